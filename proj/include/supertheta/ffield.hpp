#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace st {

class Field;

// A field element is a small integer "rep": 0 stands for zero and r > 0 for
// g^(r-1), where g is the field's fixed multiplicative generator.  Addition
// goes through a Zech logarithm table, so every operation is a lookup.
struct Fq {
    const Field* F = nullptr;
    uint32_t r = 0;

    Fq() = default;
    Fq(const Field* f, uint32_t rep) : F(f), r(rep) {}

    bool is_zero() const { return r == 0; }
    bool operator==(const Fq& o) const { return r == o.r; }
    bool operator!=(const Fq& o) const { return r != o.r; }

    Fq operator+(const Fq& o) const;
    Fq operator-(const Fq& o) const;
    Fq operator-() const;
    Fq operator*(const Fq& o) const;
    Fq operator/(const Fq& o) const;
    Fq& operator+=(const Fq& o) { return *this = *this + o; }
    Fq& operator-=(const Fq& o) { return *this = *this - o; }
    Fq& operator*=(const Fq& o) { return *this = *this * o; }
    Fq inv() const;
    Fq pow(int64_t e) const;
};

class Field {
public:
    // Builds F_{p^k}.  With an empty modulus the lexicographically first monic
    // irreducible polynomial of degree k is used.  Coefficients are listed
    // constant term first and the leading 1 included.
    static std::shared_ptr<const Field> make(uint32_t p, uint32_t k,
                                             std::vector<uint32_t> modulus = {});

    uint32_t p() const { return p_; }
    uint32_t k() const { return k_; }
    uint32_t q() const { return q_; }
    const std::vector<uint32_t>& modulus() const { return modulus_; }

    uint32_t add(uint32_t a, uint32_t b) const {
        if (a == 0) return b;
        if (b == 0) return a;
        uint32_t d = b >= a ? b - a : b + qm1_ - a;
        uint32_t z = zech_[d];
        if (z == 0) return 0;
        uint32_t s = a - 1 + z - 1;
        if (s >= qm1_) s -= qm1_;
        return s + 1;
    }
    uint32_t neg(uint32_t a) const {
        if (a == 0) return 0;
        uint32_t s = a - 1 + half_;
        if (s >= qm1_) s -= qm1_;
        return s + 1;
    }
    uint32_t sub(uint32_t a, uint32_t b) const { return add(a, neg(b)); }
    uint32_t mul(uint32_t a, uint32_t b) const {
        if (a == 0 || b == 0) return 0;
        uint32_t s = a - 1 + b - 1;
        if (s >= qm1_) s -= qm1_;
        return s + 1;
    }
    uint32_t inv(uint32_t a) const;
    uint32_t div(uint32_t a, uint32_t b) const { return mul(a, inv(b)); }
    uint32_t pow(uint32_t a, int64_t e) const;
    // a^(p^t); t may be negative (inverse Frobenius).
    uint32_t frob(uint32_t a, int t = 1) const;

    uint32_t from_int(int64_t n) const;
    uint32_t one() const { return 1; }
    uint32_t generator() const { return 2; }

    // Power-basis coordinates, constant term first.
    std::vector<uint32_t> coords(uint32_t a) const;
    uint32_t from_coords(const std::vector<uint32_t>& c) const;
    // Index sum_i c_i p^i of the coordinate tuple; a bijection onto [0, q).
    uint32_t index_of(uint32_t a) const { return a == 0 ? 0 : exp_idx_[a - 1]; }
    uint32_t from_index(uint32_t idx) const { return log_rep_[idx]; }

    bool is_square(uint32_t a) const { return a == 0 || ((a - 1) % 2 == 0); }
    // Root with the lexicographically smaller coordinate tuple; throws on non-squares.
    uint32_t sqrt(uint32_t a) const;
    // Smallest d | k with a in F_{p^d}.
    uint32_t degree_of(uint32_t a) const;
    // Element of F_{p^d} subfield membership.
    bool in_subfield(uint32_t a, uint32_t d) const;
    // Primitive root of unity of order n (n | q-1).
    uint32_t root_of_unity(uint32_t n) const;

    uint32_t random(std::mt19937_64& rng) const { return static_cast<uint32_t>(rng() % q_); }
    uint32_t random_nonzero(std::mt19937_64& rng) const {
        return 1 + static_cast<uint32_t>(rng() % qm1_);
    }

    Fq elem(uint32_t rep) const { return Fq(this, rep); }
    Fq zero() const { return Fq(this, 0); }
    Fq unit() const { return Fq(this, 1); }
    Fq integer(int64_t n) const { return Fq(this, from_int(n)); }

    std::string to_string(uint32_t a) const;

private:
    Field() = default;
    uint32_t p_ = 0, k_ = 0, q_ = 0, qm1_ = 0, half_ = 0;
    std::vector<uint32_t> modulus_;
    std::vector<uint32_t> exp_idx_;  // e -> index of g^e
    std::vector<uint32_t> log_rep_;  // index -> rep
    std::vector<uint32_t> zech_;     // d -> rep of 1 + g^d
};

using FieldPtr = std::shared_ptr<const Field>;

inline Fq Fq::operator+(const Fq& o) const { return Fq(F, F->add(r, o.r)); }
inline Fq Fq::operator-(const Fq& o) const { return Fq(F, F->sub(r, o.r)); }
inline Fq Fq::operator-() const { return Fq(F, F->neg(r)); }
inline Fq Fq::operator*(const Fq& o) const { return Fq(F, F->mul(r, o.r)); }
inline Fq Fq::operator/(const Fq& o) const { return Fq(F, F->div(r, o.r)); }
inline Fq Fq::inv() const { return Fq(F, F->inv(r)); }
inline Fq Fq::pow(int64_t e) const { return Fq(F, F->pow(r, e)); }

inline Fq zero_like(const Fq& a) { return a.F->zero(); }
inline Fq scale_by(const Fq& a, uint32_t c) { return Fq(a.F, a.F->mul(a.r, c)); }
inline Fq one_like(const Fq& a) { return a.F->unit(); }
inline Fq int_like(const Fq& a, int64_t n) { return a.F->integer(n); }
inline bool is_unit(const Fq& a) { return !a.is_zero(); }

Fq sqrt_in_field(const Fq& a);

// Polynomial helpers over the prime field (coefficients constant term first).
namespace fp_poly {
bool is_irreducible(const std::vector<uint32_t>& f, uint32_t p);
}

// ---------------------------------------------------------------------------
// Nilpotent quotient rings K[x_1..x_m]/(x_j^{e_j}).
//
// Monomials are packed into a 64-bit word, 8 bits per variable, so at most
// eight generators with exponents below 256.

class NilRing;

struct Nil {
    const NilRing* R = nullptr;
    std::vector<std::pair<uint64_t, uint32_t>> terms;  // sorted by monomial, no zero coeffs

    Nil() = default;
    explicit Nil(const NilRing* ring) : R(ring) {}

    bool is_zero() const { return terms.empty(); }
    uint32_t constant() const;
    uint32_t coeff(uint64_t mono) const;

    Nil operator+(const Nil& o) const;
    Nil operator-(const Nil& o) const;
    Nil operator-() const;
    Nil operator*(const Nil& o) const;
    Nil& operator+=(const Nil& o) { return *this = *this + o; }
    Nil& operator-=(const Nil& o) { return *this = *this - o; }
    Nil& operator*=(const Nil& o) { return *this = *this * o; }
    Nil scale(uint32_t c) const;
    Nil inv() const;
    Nil pow(uint64_t e) const;
    bool operator==(const Nil& o) const { return terms == o.terms; }
    bool operator!=(const Nil& o) const { return !(*this == o); }
    Nil operator/(const Nil& o) const { return *this * o.inv(); }
};

class NilRing {
public:
    NilRing(FieldPtr field, std::vector<std::string> names, std::vector<uint32_t> exps);

    const Field& field() const { return *F_; }
    FieldPtr field_ptr() const { return F_; }
    size_t nvars() const { return exps_.size(); }
    uint32_t exponent_bound(size_t j) const { return exps_[j]; }
    const std::vector<std::string>& names() const { return names_; }
    // Largest n with some product of n nilpotent elements nonzero, plus one.
    uint32_t nilpotency() const { return nilp_; }

    Nil zero() const { return Nil(this); }
    Nil constant(uint32_t c) const;
    Nil one() const { return constant(1); }
    Nil integer(int64_t n) const { return constant(F_->from_int(n)); }
    Nil var(size_t j) const;
    Nil monomial(const std::vector<uint32_t>& e, uint32_t c) const;

    static uint32_t exp_of(uint64_t mono, size_t j) { return (mono >> (8 * j)) & 0xff; }
    static uint64_t pack(const std::vector<uint32_t>& e);
    // Product of monomials, or nullopt-style flag when it vanishes.
    bool mono_mul(uint64_t a, uint64_t b, uint64_t& out) const;
    size_t dense_size() const { return dense_; }
    size_t dense_index(uint64_t mono) const;

    std::string to_string(const Nil& a) const;

private:
    FieldPtr F_;
    std::vector<std::string> names_;
    std::vector<uint32_t> exps_;
    std::vector<size_t> strides_;
    size_t dense_ = 0;
    uint32_t nilp_ = 1;
};

inline Nil zero_like(const Nil& a) { return a.R->zero(); }
inline Nil scale_by(const Nil& a, uint32_t c) { return a.scale(c); }
inline Nil one_like(const Nil& a) { return a.R->one(); }
inline Nil int_like(const Nil& a, int64_t n) { return a.R->integer(n); }
inline bool is_unit(const Nil& a) { return a.constant() != 0; }

// Square root of c(1 + nu) whose constant term is sqrt_in_field(c).
Nil nilring_unit_sqrt(const Nil& u);

// Ring homomorphism out of a NilRing determined by the images of the generators.
// R must provide +, *, and scale_by(R, field rep).
template <class R>
R nil_substitute(const Nil& a, const std::vector<R>& images, const R& one) {
    R acc = one - one;
    const size_t m = images.size();
    std::vector<std::vector<R>> powers(m);
    for (const auto& [mono, c] : a.terms) {
        R term = one;
        for (size_t j = 0; j < m; ++j) {
            uint32_t e = NilRing::exp_of(mono, j);
            if (e == 0) continue;
            auto& pw = powers[j];
            if (pw.empty()) pw.push_back(one);
            while (pw.size() <= e) pw.push_back(pw.back() * images[j]);
            term = term * pw[e];
        }
        acc = acc + scale_by(term, c);
    }
    return acc;
}

}  // namespace st
