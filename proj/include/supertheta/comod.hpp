#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "supertheta/ffield.hpp"
#include "supertheta/linalg.hpp"
#include "supertheta/witt.hpp"

namespace st {

// Element of M (x) R for a NilRing R, stored as monomial -> coefficient vector.
struct NilVec {
    const NilRing* R = nullptr;
    size_t dim = 0;
    std::map<uint64_t, std::vector<uint32_t>> c;

    NilVec() = default;
    NilVec(const NilRing* r, size_t d) : R(r), dim(d) {}
    static NilVec constant(const NilRing* r, const std::vector<uint32_t>& v);
    bool is_zero() const { return c.empty(); }
    void add(uint64_t mono, const std::vector<uint32_t>& v, uint32_t scale = 1);
    std::vector<uint32_t> coeff(uint64_t mono) const;
    bool operator==(const NilVec& o) const { return dim == o.dim && c == o.c; }
};

// Sum over monomials of (matrix) (x) (monomial).
struct NilMat {
    const NilRing* R = nullptr;
    size_t dim = 0;
    std::map<uint64_t, Mat> c;

    NilVec apply(const NilVec& v) const;
    bool is_zero() const { return c.empty(); }
};

// Coaction M -> M (x) R given as a callback on vectors of M.
using CoactionFn = std::function<NilVec(const std::vector<uint32_t>&)>;

// A representation of the Witt group scheme on M = k^dim, stored in the normal
// form phi(a) v = E_AH((X_0, ..., X_{n-1}, 0, ...) . a) v.  The X_nu commute and
// satisfy X_nu^{p^m} = 0; points a have m coordinates killed by the p^n-th
// power, so the coordinate ring of the group is k[x_0..x_{m-1}]/(x_j^{p^n}).
class WittComodule {
public:
    static WittComodule make(FieldPtr F, uint32_t m, uint32_t n, std::vector<Mat> X);

    uint32_t m() const { return m_; }
    uint32_t n() const { return n_; }
    size_t dim() const { return dim_; }
    const std::vector<Mat>& X() const { return X_; }
    const FieldPtr& field() const { return F_; }

    // Coordinate ring of the group with generators x_0..x_{m-1}.
    std::shared_ptr<NilRing> universal_ring() const;
    // phi(a)(v) for a point a over R (a.size() == m).
    NilVec apply(const WittVec<Nil>& a, const NilVec& v) const;
    // c_M(v) = phi(universal point)(v) over the given universal ring.
    NilVec coact(const NilRing& R, const std::vector<uint32_t>& v) const;
    CoactionFn coaction(const NilRing& R) const;

private:
    FieldPtr F_;
    uint32_t m_ = 0, n_ = 0;
    size_t dim_ = 0;
    std::vector<Mat> X_;
};

// c_M(v) == v (x) 1.
bool is_coinvariant(const CoactionFn& c, const std::vector<uint32_t>& v);

// Top-degree coefficient route for a single-generator coordinate ring
// k[x_0]/(x_0^e).
std::vector<uint32_t> invariant_vector_V(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v);
// Maximal coefficient under the order sum_nu i_nu p^nu, for k[x_0..x_{m-1}]/(x^p).
std::vector<uint32_t> invariant_vector_F(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v);
// Induction along W_{0,n} < W_{1,n} < ... using the Verschiebung filtration; the
// ring has generators x_0..x_{m-1} and step i reads off pure powers of x_{m-i}.
std::vector<uint32_t> invariant_vector_full(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v);

std::vector<uint32_t> invariant_vector_V(const WittComodule& C, const std::vector<uint32_t>& v);
std::vector<uint32_t> invariant_vector_F(const WittComodule& C, const std::vector<uint32_t>& v);
std::vector<uint32_t> invariant_vector_full(const WittComodule& C, const std::vector<uint32_t>& v);

}  // namespace st
