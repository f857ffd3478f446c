#include "supertheta/linalg.hpp"

#include <stdexcept>

namespace st {

Mat Mat::identity(const Field* f, size_t n) {
    Mat m(f, n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

Mat Mat::operator*(const Mat& o) const {
    if (cols != o.rows) throw std::invalid_argument("matrix product: dimension mismatch");
    Mat r(F, rows, o.cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < cols; ++k) {
            uint32_t x = (*this)(i, k);
            if (!x) continue;
            for (size_t j = 0; j < o.cols; ++j)
                if (o(k, j)) r(i, j) = F->add(r(i, j), F->mul(x, o(k, j)));
        }
    return r;
}

Mat Mat::operator+(const Mat& o) const {
    if (rows != o.rows || cols != o.cols) throw std::invalid_argument("matrix sum: dimension mismatch");
    Mat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = F->add(a[i], o.a[i]);
    return r;
}

Mat Mat::operator-(const Mat& o) const {
    if (rows != o.rows || cols != o.cols) throw std::invalid_argument("matrix difference: dimension mismatch");
    Mat r = *this;
    for (size_t i = 0; i < a.size(); ++i) r.a[i] = F->sub(a[i], o.a[i]);
    return r;
}

Mat Mat::scaled(uint32_t c) const {
    Mat r = *this;
    for (auto& x : r.a) x = F->mul(x, c);
    return r;
}

Mat Mat::transpose() const {
    Mat r(F, cols, rows);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) r(j, i) = (*this)(i, j);
    return r;
}

bool Mat::is_zero() const {
    for (auto x : a)
        if (x) return false;
    return true;
}

std::vector<uint32_t> Mat::column(size_t j) const {
    std::vector<uint32_t> v(rows);
    for (size_t i = 0; i < rows; ++i) v[i] = (*this)(i, j);
    return v;
}

std::vector<uint32_t> Mat::apply(const std::vector<uint32_t>& v) const {
    if (v.size() != cols) throw std::invalid_argument("matrix-vector product: dimension mismatch");
    std::vector<uint32_t> r(rows, 0);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) r[i] = F->add(r[i], F->mul((*this)(i, j), v[j]));
    return r;
}

std::vector<size_t> rref(Mat& m) {
    const Field& F = *m.F;
    std::vector<size_t> piv;
    size_t row = 0;
    for (size_t col = 0; col < m.cols && row < m.rows; ++col) {
        size_t sel = row;
        while (sel < m.rows && m(sel, col) == 0) ++sel;
        if (sel == m.rows) continue;
        if (sel != row)
            for (size_t j = 0; j < m.cols; ++j) std::swap(m(sel, j), m(row, j));
        uint32_t inv = F.inv(m(row, col));
        for (size_t j = col; j < m.cols; ++j) m(row, j) = F.mul(m(row, j), inv);
        for (size_t i = 0; i < m.rows; ++i) {
            if (i == row || m(i, col) == 0) continue;
            uint32_t f = F.neg(m(i, col));
            for (size_t j = col; j < m.cols; ++j)
                if (m(row, j)) m(i, j) = F.add(m(i, j), F.mul(f, m(row, j)));
        }
        piv.push_back(col);
        ++row;
    }
    return piv;
}

size_t rank(Mat m) { return rref(m).size(); }

Mat nullspace(const Mat& m) {
    Mat r = m;
    auto piv = rref(r);
    std::vector<bool> is_piv(m.cols, false);
    for (auto c : piv) is_piv[c] = true;
    size_t nfree = m.cols - piv.size();
    Mat ns(m.F, m.cols, nfree);
    size_t k = 0;
    for (size_t f = 0; f < m.cols; ++f) {
        if (is_piv[f]) continue;
        ns(f, k) = 1;
        for (size_t i = 0; i < piv.size(); ++i) ns(piv[i], k) = m.F->neg(r(i, f));
        ++k;
    }
    return ns;
}

bool solve(const Mat& m, const Mat& b, Mat& x) {
    if (b.rows != m.rows) throw std::invalid_argument("solve: dimension mismatch");
    Mat aug(m.F, m.rows, m.cols + b.cols);
    for (size_t i = 0; i < m.rows; ++i) {
        for (size_t j = 0; j < m.cols; ++j) aug(i, j) = m(i, j);
        for (size_t j = 0; j < b.cols; ++j) aug(i, m.cols + j) = b(i, j);
    }
    auto piv = rref(aug);
    for (auto c : piv)
        if (c >= m.cols) return false;
    x = Mat(m.F, m.cols, b.cols);
    for (size_t i = 0; i < piv.size(); ++i)
        for (size_t j = 0; j < b.cols; ++j) x(piv[i], j) = aug(i, m.cols + j);
    return true;
}

Mat inverse(const Mat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("inverse of a non-square matrix");
    Mat x;
    Mat id = Mat::identity(m.F, m.rows);
    if (rank(m) != m.rows || !solve(m, id, x)) throw std::domain_error("matrix is singular");
    return x;
}

Mat column_intersection(const Mat& a, const Mat& b) {
    // Solve a u = b v; the intersection is spanned by a u.
    Mat ab(a.F, a.rows, a.cols + b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < a.cols; ++j) ab(i, j) = a(i, j);
        for (size_t j = 0; j < b.cols; ++j) ab(i, a.cols + j) = a.F->neg(b(i, j));
    }
    Mat ns = nullspace(ab);
    Mat u(a.F, a.cols, ns.cols);
    for (size_t i = 0; i < a.cols; ++i)
        for (size_t j = 0; j < ns.cols; ++j) u(i, j) = ns(i, j);
    Mat span = a * u;
    // prune to an independent set of columns
    Mat t = span.transpose();
    auto piv = rref(t);
    Mat out(a.F, a.rows, piv.size());
    for (size_t k = 0; k < piv.size(); ++k)
        for (size_t i = 0; i < a.rows; ++i) out(i, k) = t(k, i);
    return out;
}

}  // namespace st
