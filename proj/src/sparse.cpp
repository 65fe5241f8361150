#include "dgife/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dgife {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(n);
    multiply(x, y);
    return y;
}

double CsrMatrix::entry(int r, int c) const {
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == c) return val[k];
    return 0.0;
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix t;
    t.n = n;
    t.row_ptr.assign(n + 1, 0);
    t.col.resize(col.size());
    t.val.resize(val.size());
    for (int c : col) ++t.row_ptr[c + 1];
    std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
    std::vector<int> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const int pos = cursor[col[k]]++;
            t.col[pos] = i;
            t.val[pos] = val[k];
        }
    return t;
}

double CsrMatrix::symmetry_defect() const {
    const CsrMatrix t = transposed();
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
        int ka = row_ptr[i], kb = t.row_ptr[i];
        const int ea = row_ptr[i + 1], eb = t.row_ptr[i + 1];
        while (ka < ea || kb < eb) {
            const int ca = ka < ea ? col[ka] : n;
            const int cb = kb < eb ? t.col[kb] : n;
            if (ca == cb) {
                defect = std::max(defect, std::abs(val[ka] - t.val[kb]));
                ++ka;
                ++kb;
            } else if (ca < cb) {
                defect = std::max(defect, std::abs(val[ka]));
                ++ka;
            } else {
                defect = std::max(defect, std::abs(t.val[kb]));
                ++kb;
            }
        }
    }
    return defect;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == i) d[i] = val[k];
    return d;
}

void CsrMatrix::write_matrix_market(std::ostream& os) const {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << n << ' ' << n << ' ' << nnz() << '\n';
    os.precision(17);
    for (int i = 0; i < n; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            os << i + 1 << ' ' << col[k] + 1 << ' ' << val[k] << '\n';
}

CsrMatrix add_scaled(const CsrMatrix& a, double sa, const CsrMatrix& b, double sb) {
    if (a.n != b.n) throw std::invalid_argument("add_scaled: dimension mismatch");
    CsrMatrix r;
    r.n = a.n;
    r.row_ptr.assign(a.n + 1, 0);
    r.col.reserve(a.col.size() + b.col.size());
    r.val.reserve(a.col.size() + b.col.size());
    for (int i = 0; i < a.n; ++i) {
        int ka = a.row_ptr[i], kb = b.row_ptr[i];
        const int ea = a.row_ptr[i + 1], eb = b.row_ptr[i + 1];
        while (ka < ea || kb < eb) {
            const int ca = ka < ea ? a.col[ka] : a.n;
            const int cb = kb < eb ? b.col[kb] : a.n;
            if (ca == cb) {
                r.col.push_back(ca);
                r.val.push_back(sa * a.val[ka++] + sb * b.val[kb++]);
            } else if (ca < cb) {
                r.col.push_back(ca);
                r.val.push_back(sa * a.val[ka++]);
            } else {
                r.col.push_back(cb);
                r.val.push_back(sb * b.val[kb++]);
            }
        }
        r.row_ptr[i + 1] = static_cast<int>(r.col.size());
    }
    return r;
}

CsrMatrix TripletBuffer::compress(int n) const {
    std::vector<int> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int u, int v) {
        if (entries_[u].r != entries_[v].r) return entries_[u].r < entries_[v].r;
        return entries_[u].c < entries_[v].c;
    });

    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(n + 1, 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Entry& e = entries_[order[k]];
        if (e.r < 0 || e.r >= n || e.c < 0 || e.c >= n)
            throw std::out_of_range("TripletBuffer: index out of range");
        if (k > 0) {
            const Entry& prev = entries_[order[k - 1]];
            if (prev.r == e.r && prev.c == e.c) {
                m.val.back() += e.v;
                continue;
            }
        }
        m.col.push_back(e.c);
        m.val.push_back(e.v);
        ++m.row_ptr[e.r + 1];
    }
    std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
    return m;
}

}  // namespace dgife
