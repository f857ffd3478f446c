#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "supertheta/ffield.hpp"
#include "supertheta/linalg.hpp"

namespace st {

// Integer polynomial in a fixed number of variables, used to derive the Witt
// sum and product polynomials.
struct ZPoly {
    size_t nvars = 0;
    std::map<std::vector<uint16_t>, mpz_class> terms;

    ZPoly() = default;
    explicit ZPoly(size_t n) : nvars(n) {}
    static ZPoly var(size_t n, size_t j);
    static ZPoly constant(size_t n, const mpz_class& c);

    ZPoly operator+(const ZPoly& o) const;
    ZPoly operator-(const ZPoly& o) const;
    ZPoly operator*(const ZPoly& o) const;
    ZPoly pow(uint64_t e) const;
    ZPoly scaled(const mpz_class& c) const;
    // Exact division by c; throws if some coefficient is not divisible.
    ZPoly divided(const mpz_class& c) const;
    mpz_class eval(const std::vector<mpz_class>& x) const;
};

// A polynomial with coefficients reduced mod p, stored for fast evaluation.
struct ModTerm {
    uint32_t coeff;
    std::vector<std::pair<uint16_t, uint16_t>> powers;  // (variable, exponent)
};
struct ModPoly {
    size_t nvars = 0;
    std::vector<ModTerm> terms;
};

// Witt sum and product polynomials S_i, P_i (i < n) in the variables
// X_0..X_{n-1}, Y_0..Y_{n-1} (Y_j has index n + j), obtained by solving the
// ghost equations over the integers.
class WittPolyTable {
public:
    static std::shared_ptr<const WittPolyTable> get(uint32_t p, uint32_t n);

    uint32_t p() const { return p_; }
    uint32_t n() const { return n_; }
    const ZPoly& sum_z(size_t i) const { return sum_z_.at(i); }
    const ZPoly& prod_z(size_t i) const { return prod_z_.at(i); }
    const ModPoly& sum(size_t i) const { return sum_.at(i); }
    const ModPoly& prod(size_t i) const { return prod_.at(i); }
    // i-th ghost polynomial of the X block.
    ZPoly ghost(size_t i) const;

private:
    WittPolyTable(uint32_t p, uint32_t n);
    uint32_t p_, n_;
    std::vector<ZPoly> sum_z_, prod_z_;
    std::vector<ModPoly> sum_, prod_;
};

// Ring helpers used by the generic code below.
inline uint32_t char_of(const Fq& a) { return a.F->p(); }
inline uint32_t char_of(const Nil& a) { return a.R->field().p(); }

template <class R>
R eval_mod_poly(const ModPoly& f, const std::vector<R>& vals, const R& one) {
    R acc = one - one;
    std::vector<std::vector<R>> pw(vals.size());
    for (const auto& t : f.terms) {
        bool zero = false;
        for (const auto& [v, e] : t.powers)
            if (vals[v].is_zero()) {
                zero = true;
                break;
            }
        if (zero) continue;
        R term = int_like(one, t.coeff);
        for (const auto& [v, e] : t.powers) {
            auto& cache = pw[v];
            if (cache.empty()) cache.push_back(one);
            while (cache.size() <= e) cache.push_back(cache.back() * vals[v]);
            term = term * cache[e];
        }
        acc = acc + term;
    }
    return acc;
}

template <class R>
using WittVec = std::vector<R>;

namespace detail {
template <class R>
void check_pair(const WittVec<R>& a, const WittVec<R>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("Witt vectors of different length");
    if (a.empty()) throw std::invalid_argument("empty Witt vector");
}
template <class R>
WittVec<R> apply_table(const WittVec<R>& a, const WittVec<R>& b, bool product) {
    check_pair(a, b);
    const size_t n = a.size();
    auto T = WittPolyTable::get(char_of(a[0]), static_cast<uint32_t>(n));
    std::vector<R> vals;
    vals.reserve(2 * n);
    for (const auto& x : a) vals.push_back(x);
    for (const auto& y : b) vals.push_back(y);
    R one = one_like(a[0]);
    WittVec<R> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
        out.push_back(eval_mod_poly(product ? T->prod(i) : T->sum(i), vals, one));
    return out;
}
}  // namespace detail

template <class R>
WittVec<R> witt_add(const WittVec<R>& a, const WittVec<R>& b) {
    return detail::apply_table(a, b, false);
}
template <class R>
WittVec<R> witt_mul(const WittVec<R>& a, const WittVec<R>& b) {
    return detail::apply_table(a, b, true);
}
// For odd p negation is coordinatewise.
template <class R>
WittVec<R> witt_neg(const WittVec<R>& a) {
    WittVec<R> r;
    for (const auto& x : a) r.push_back(-x);
    return r;
}
template <class R>
WittVec<R> witt_sub(const WittVec<R>& a, const WittVec<R>& b) {
    return witt_add(a, witt_neg(b));
}
template <class R>
WittVec<R> frobenius(const WittVec<R>& a) {
    WittVec<R> r;
    for (const auto& x : a) {
        R y = one_like(x);
        for (uint32_t i = 0; i < char_of(x); ++i) y = y * x;
        r.push_back(y);
    }
    return r;
}
// Verschiebung: (a_0, ..., a_{n-1}) -> (0, a_0, ..., a_{n-2}).
template <class R>
WittVec<R> shift_t(const WittVec<R>& a) {
    WittVec<R> r;
    if (a.empty()) return r;
    r.push_back(zero_like(a[0]));
    for (size_t i = 0; i + 1 < a.size(); ++i) r.push_back(a[i]);
    return r;
}

// Witt coordinates of the integer m, reduced mod p.
std::vector<int64_t> witt_integer_coords(uint32_t p, size_t n, int64_t m);

template <class R>
WittVec<R> witt_from_int(const R& like, size_t n, int64_t m) {
    auto c = witt_integer_coords(char_of(like), n, m);
    WittVec<R> r;
    for (auto x : c) r.push_back(int_like(like, x));
    return r;
}

// Coefficients of exp(-sum_i t^{p^i}/p^i) up to degree N, reduced mod p.
struct AHSeries {
    uint32_t p = 0;
    uint32_t N = 0;
    std::vector<uint32_t> c;  // residues in [0, p)
    static AHSeries compute(uint32_t p, uint32_t N);
};

// exp_AH(t) for a single nilpotent t.
Nil ah_exp(const Nil& t);
// E_AH(a) = prod exp_AH(a_i).
Nil ah_exp_eval(const WittVec<Nil>& a);
// Witt product of two vectors of possibly different lengths, computed in
// W_L for the given L (shorter inputs are padded with zeros).
WittVec<Nil> witt_mul_padded(const WittVec<Nil>& a, const WittVec<Nil>& b, size_t L);
// <x, y> = E_AH(sigma(x) . sigma(y)) for x in W_{m,n}(R) (length n, coordinates
// killed by the p^m-th power) and y in W_{n,m}(R) (length m).
Nil ah_pairing(const WittVec<Nil>& x, const WittVec<Nil>& y, uint32_t m, uint32_t n);

// Coefficient matrix of the pairing on universal points: rows are monomials
// of the W_{m,n} coordinate ring, columns those of W_{n,m}.  The pairing is a
// perfect Cartier duality exactly when this square matrix is invertible.
Mat ah_duality_matrix(FieldPtr F, uint32_t m, uint32_t n);

}  // namespace st
