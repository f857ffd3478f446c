#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "supertheta/ffield.hpp"

namespace st {

// Dense matrix over a finite field; entries are field reps.
struct Mat {
    const Field* F = nullptr;
    size_t rows = 0, cols = 0;
    std::vector<uint32_t> a;

    Mat() = default;
    Mat(const Field* f, size_t r, size_t c) : F(f), rows(r), cols(c), a(r * c, 0) {}

    uint32_t& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    uint32_t operator()(size_t i, size_t j) const { return a[i * cols + j]; }

    static Mat identity(const Field* f, size_t n);
    Mat operator*(const Mat& o) const;
    Mat operator+(const Mat& o) const;
    Mat operator-(const Mat& o) const;
    Mat scaled(uint32_t c) const;
    Mat transpose() const;
    bool is_zero() const;
    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
    std::vector<uint32_t> column(size_t j) const;
    std::vector<uint32_t> apply(const std::vector<uint32_t>& v) const;
};

// Reduced row echelon form in place; returns pivot columns.
std::vector<size_t> rref(Mat& m);
size_t rank(Mat m);
// Basis of {v : m v = 0} as the columns of the returned matrix.
Mat nullspace(const Mat& m);
// Solves m X = b.  Returns false when the system is inconsistent.
bool solve(const Mat& m, const Mat& b, Mat& x);
Mat inverse(const Mat& m);
// Intersection of the column spans of a and b.
Mat column_intersection(const Mat& a, const Mat& b);

}  // namespace st
