#pragma once

#include <cstdint>
#include <vector>

#include "supertheta/ffield.hpp"

namespace st {

// Truncated Laurent series s^v (c_0 + c_1 s + ... + c_{L-1} s^{L-1} + O(s^L))
// over a finite field.  Precision is tracked relatively: products keep the
// shorter length, sums are cut at the smaller absolute precision.  A series
// with no known nonzero coefficient is a zero O(s^v).
class Laurent {
public:
    static constexpr size_t kDefaultLength = 96;
    static constexpr size_t kMaxLength = 1024;

    Laurent() = default;
    static Laurent constant(const Field* F, uint32_t c, size_t len = kDefaultLength);
    static Laurent monomial(const Field* F, uint32_t c, int64_t v, size_t len = kDefaultLength);
    static Laurent zero(const Field* F, int64_t abs_prec);
    // s^v (c[0] + c[1] s + ...) + O(s^(v + c.size())).
    static Laurent from_coeffs(const Field* F, int64_t v, std::vector<uint32_t> c);

    const Field* field() const { return F_; }
    bool is_zero() const { return c_.empty(); }
    int64_t valuation() const { return v_; }
    size_t length() const { return c_.size(); }
    // Exponent bound: everything from s^abs_precision() on is unknown.
    int64_t abs_precision() const { return v_ + static_cast<int64_t>(c_.size()); }
    // Coefficient of s^e; throws std::domain_error beyond the precision.
    uint32_t coeff(int64_t e) const;
    uint32_t constant_term() const { return coeff(0); }
    const std::vector<uint32_t>& coeffs() const { return c_; }

    Laurent operator+(const Laurent& o) const;
    Laurent operator-(const Laurent& o) const;
    Laurent operator-() const;
    Laurent operator*(const Laurent& o) const;
    Laurent operator/(const Laurent& o) const { return *this * o.inv(); }
    Laurent& operator+=(const Laurent& o) { return *this = *this + o; }
    Laurent& operator-=(const Laurent& o) { return *this = *this - o; }
    Laurent& operator*=(const Laurent& o) { return *this = *this * o; }
    Laurent scale(uint32_t c) const;
    // this + c for an exact constant c.
    Laurent plus_constant(uint32_t c) const;
    Laurent inv() const;
    Laurent pow(int64_t e) const;
    // Coefficientwise x -> x^(p^t) together with s -> s^(p^t) (t >= 0): the
    // p^t-th power of the series.
    Laurent frobenius_power(uint32_t t) const;
    // The unique q-th root (q = p^t); throws if some known exponent with a
    // nonzero coefficient is not divisible by q.
    Laurent qth_root(uint32_t t) const;
    // Substitution s -> c s.
    Laurent rescale_variable(uint32_t c) const;
    Laurent truncated(size_t len) const;
    bool equals(const Laurent& o) const;

private:
    const Field* F_ = nullptr;
    int64_t v_ = 0;
    std::vector<uint32_t> c_;
    void normalize();
};

inline Laurent zero_like(const Laurent& a) { return Laurent::zero(a.field(), Laurent::kMaxLength); }
inline Laurent one_like(const Laurent& a) { return Laurent::constant(a.field(), 1, Laurent::kMaxLength); }
inline Laurent int_like(const Laurent& a, int64_t n) {
    return Laurent::constant(a.field(), a.field()->from_int(n), Laurent::kMaxLength);
}
inline Laurent scale_by(const Laurent& a, uint32_t c) { return a.scale(c); }
inline bool is_unit(const Laurent& a) { return !a.is_zero(); }

// Square root with constant term 1 of a series with constant term 1 (p odd).
Laurent sqrt_one(const Laurent& a);

// Substitutes a nilpotent NilRing element into a power series with
// nonnegative valuation: sum_e c_e t^e.  Requires enough known terms.
Nil substitute_series(const Laurent& f, const Nil& t);

}  // namespace st
