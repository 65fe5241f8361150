#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace dgife {

/// Square sparse matrix in compressed sparse row layout; per-row columns are
/// sorted and deduplicated.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;   // size n+1
    std::vector<int> col;
    std::vector<double> val;

    int nnz() const { return static_cast<int>(col.size()); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;

    double entry(int r, int c) const;
    double max_abs() const;
    /// max |A - A^T| entrywise.
    double symmetry_defect() const;
    CsrMatrix transposed() const;
    std::vector<double> diagonal() const;

    void write_matrix_market(std::ostream& os) const;
};

/// A*sa + B*sb with general (merged) sparsity.
CsrMatrix add_scaled(const CsrMatrix& a, double sa, const CsrMatrix& b, double sb);

/// Coordinate accumulation buffer; compress() sums duplicates in insertion
/// order so assembly stays deterministic.
class TripletBuffer {
  public:
    void reserve(std::size_t n) { entries_.reserve(n); }
    void add(int r, int c, double v) { entries_.push_back({r, c, v}); }
    CsrMatrix compress(int n) const;

  private:
    struct Entry {
        int r, c;
        double v;
    };
    std::vector<Entry> entries_;
};

}  // namespace dgife
