#include "supertheta/comod.hpp"

#include <stdexcept>
#include <string>

namespace st {

namespace {

bool all_zero(const std::vector<uint32_t>& v) {
    for (auto x : v)
        if (x) return false;
    return true;
}

Mat mat_pow(const Mat& a, uint64_t e) {
    Mat r = Mat::identity(a.F, a.rows), b = a;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

}  // namespace

NilVec NilVec::constant(const NilRing* r, const std::vector<uint32_t>& v) {
    NilVec out(r, v.size());
    if (!all_zero(v)) out.c[0] = v;
    return out;
}

void NilVec::add(uint64_t mono, const std::vector<uint32_t>& v, uint32_t scale) {
    if (scale == 0 || all_zero(v)) return;
    const Field& F = R->field();
    auto it = c.find(mono);
    if (it == c.end()) {
        std::vector<uint32_t> w(v.size());
        for (size_t i = 0; i < v.size(); ++i) w[i] = F.mul(v[i], scale);
        c.emplace(mono, std::move(w));
        return;
    }
    for (size_t i = 0; i < v.size(); ++i) it->second[i] = F.add(it->second[i], F.mul(v[i], scale));
    if (all_zero(it->second)) c.erase(it);
}

std::vector<uint32_t> NilVec::coeff(uint64_t mono) const {
    auto it = c.find(mono);
    return it == c.end() ? std::vector<uint32_t>(dim, 0) : it->second;
}

NilVec NilMat::apply(const NilVec& v) const {
    NilVec out(R, dim);
    for (const auto& [m1, M] : c)
        for (const auto& [m2, u] : v.c) {
            uint64_t mono;
            if (!R->mono_mul(m1, m2, mono)) continue;
            out.add(mono, M.apply(u));
        }
    return out;
}

WittComodule WittComodule::make(FieldPtr F, uint32_t m, uint32_t n, std::vector<Mat> X) {
    if (m == 0 || n == 0) throw std::invalid_argument("comodule: m and n must be positive");
    if (X.size() != n) throw std::invalid_argument("comodule: expected n operators");
    size_t d = X.front().rows;
    uint64_t pm = 1;
    for (uint32_t i = 0; i < m; ++i) pm *= F->p();
    for (size_t a = 0; a < X.size(); ++a) {
        if (X[a].rows != d || X[a].cols != d || X[a].F != F.get())
            throw std::invalid_argument("comodule: operator dimension or field mismatch");
        if (!mat_pow(X[a], pm).is_zero())
            throw std::invalid_argument("comodule: operator X_" + std::to_string(a) + " is not killed by p^m-th power");
        for (size_t b = 0; b < a; ++b)
            if (!(X[a] * X[b] == X[b] * X[a])) throw std::invalid_argument("comodule: operators do not commute");
    }
    WittComodule C;
    C.F_ = std::move(F);
    C.m_ = m;
    C.n_ = n;
    C.dim_ = d;
    C.X_ = std::move(X);
    return C;
}

std::shared_ptr<NilRing> WittComodule::universal_ring() const {
    uint64_t pn = 1;
    for (uint32_t i = 0; i < n_; ++i) pn *= F_->p();
    if (pn > 255) throw std::invalid_argument("comodule: universal ring exponent too large");
    std::vector<std::string> names;
    for (uint32_t j = 0; j < m_; ++j) names.push_back("x" + std::to_string(j));
    return std::make_shared<NilRing>(F_, names, std::vector<uint32_t>(m_, static_cast<uint32_t>(pn)));
}

NilVec WittComodule::apply(const WittVec<Nil>& a, const NilVec& v) const {
    if (a.size() != m_) throw std::invalid_argument("comodule_apply: point has wrong length");
    if (v.dim != dim_) throw std::invalid_argument("comodule_apply: vector dimension mismatch");
    const NilRing* R = a[0].R;
    if (v.R != R) throw std::invalid_argument("comodule_apply: vector and point over different rings");
    for (const auto& x : a)
        if (x.constant() != 0) throw std::invalid_argument("comodule_apply: point is not nilpotent");

    const size_t L = m_ + n_;
    auto T = WittPolyTable::get(F_->p(), static_cast<uint32_t>(L));
    const Field& F = *F_;
    std::vector<std::vector<Mat>> xpow(n_);
    std::vector<std::vector<Nil>> apow(m_);

    std::vector<NilMat> coords;
    for (size_t i = 0; i < L; ++i) {
        NilMat c;
        c.R = R;
        c.dim = dim_;
        for (const auto& t : T->prod(i).terms) {
            Mat xm = Mat::identity(F_.get(), dim_);
            Nil am = R->constant(F.from_int(t.coeff));
            bool zero = false;
            for (const auto& [var, e] : t.powers) {
                if (var < L) {
                    if (var >= n_) {
                        zero = true;
                        break;
                    }
                    auto& cache = xpow[var];
                    if (cache.empty()) cache.push_back(Mat::identity(F_.get(), dim_));
                    while (cache.size() <= e) cache.push_back(cache.back() * X_[var]);
                    xm = xm * cache[e];
                } else {
                    size_t j = var - L;
                    if (j >= m_) {
                        zero = true;
                        break;
                    }
                    auto& cache = apow[j];
                    if (cache.empty()) cache.push_back(R->one());
                    while (cache.size() <= e) cache.push_back(cache.back() * a[j]);
                    am = am * cache[e];
                }
                if (am.is_zero() || xm.is_zero()) {
                    zero = true;
                    break;
                }
            }
            if (zero) continue;
            for (const auto& [mono, cf] : am.terms) {
                auto it = c.c.find(mono);
                Mat add = xm.scaled(cf);
                if (it == c.c.end())
                    c.c.emplace(mono, add);
                else
                    it->second = it->second + add;
            }
        }
        for (auto it = c.c.begin(); it != c.c.end();) {
            if (it->second.is_zero())
                it = c.c.erase(it);
            else
                ++it;
        }
        coords.push_back(std::move(c));
    }

    AHSeries ah = AHSeries::compute(F.p(), R->nilpotency() + 1);
    NilVec w = v;
    for (size_t i = L; i-- > 0;) {
        if (coords[i].is_zero()) continue;
        NilVec acc = w, pw = w;
        for (uint32_t k = 1; k <= ah.N; ++k) {
            pw = coords[i].apply(pw);
            if (pw.is_zero()) break;
            uint32_t ck = F.from_int(ah.c[k]);
            for (const auto& [mono, u] : pw.c) acc.add(mono, u, ck);
        }
        w = std::move(acc);
    }
    return w;
}

NilVec WittComodule::coact(const NilRing& R, const std::vector<uint32_t>& v) const {
    WittVec<Nil> a;
    for (uint32_t j = 0; j < m_; ++j) a.push_back(R.var(j));
    return apply(a, NilVec::constant(&R, v));
}

CoactionFn WittComodule::coaction(const NilRing& R) const {
    return [this, &R](const std::vector<uint32_t>& v) { return coact(R, v); };
}

bool is_coinvariant(const CoactionFn& c, const std::vector<uint32_t>& v) {
    NilVec w = c(v);
    if (all_zero(v)) return w.is_zero();
    return w.c.size() == 1 && w.c.begin()->first == 0 && w.c.begin()->second == v;
}

std::vector<uint32_t> invariant_vector_V(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v) {
    if (all_zero(v)) throw std::invalid_argument("invariant_vector_V: zero start vector");
    if (R.nvars() != 1) throw std::invalid_argument("invariant_vector_V: ring must have one generator");
    NilVec w = c(v);
    // monomials are ordered by the packed exponent, so the last one has top degree
    return w.c.rbegin()->second;
}

std::vector<uint32_t> invariant_vector_F(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v) {
    if (all_zero(v)) throw std::invalid_argument("invariant_vector_F: zero start vector");
    const uint32_t p = R.field().p();
    NilVec w = c(v);
    uint64_t best_key = 0;
    const std::vector<uint32_t>* best = nullptr;
    for (const auto& [mono, u] : w.c) {
        uint64_t key = 0, pw = 1;
        for (size_t j = 0; j < R.nvars(); ++j) {
            uint32_t e = NilRing::exp_of(mono, j);
            if (e >= p) throw std::invalid_argument("invariant_vector_F: ring generators must satisfy x^p = 0");
            key += e * pw;
            pw *= p;
        }
        if (!best || key > best_key) {
            best_key = key;
            best = &u;
        }
    }
    return *best;
}

std::vector<uint32_t> invariant_vector_full(const CoactionFn& c, const NilRing& R, const std::vector<uint32_t>& v) {
    if (all_zero(v)) throw std::invalid_argument("invariant_vector_full: zero start vector");
    const size_t m = R.nvars();
    std::vector<uint32_t> cur = v;
    for (size_t i = 1; i <= m; ++i) {
        const size_t var = m - i;
        NilVec w = c(cur);
        uint32_t best_e = 0;
        std::vector<uint32_t> best = cur;
        for (const auto& [mono, u] : w.c) {
            bool pure = true;
            for (size_t j = 0; j < m; ++j) {
                uint32_t e = NilRing::exp_of(mono, j);
                if (j > var && e)
                    throw std::logic_error("invariant_vector_full: coaction leaves the quotient subalgebra");
                if (j != var && e) pure = false;
            }
            if (!pure) continue;
            uint32_t e = NilRing::exp_of(mono, var);
            if (e >= best_e) {
                best_e = e;
                best = u;
            }
        }
        cur = best;
    }
    return cur;
}

std::vector<uint32_t> invariant_vector_V(const WittComodule& C, const std::vector<uint32_t>& v) {
    if (C.m() != 1) throw std::invalid_argument("invariant_vector_V: needs m = 1");
    auto R = C.universal_ring();
    return invariant_vector_V(C.coaction(*R), *R, v);
}

std::vector<uint32_t> invariant_vector_F(const WittComodule& C, const std::vector<uint32_t>& v) {
    if (C.n() != 1) throw std::invalid_argument("invariant_vector_F: needs n = 1");
    auto R = C.universal_ring();
    return invariant_vector_F(C.coaction(*R), *R, v);
}

std::vector<uint32_t> invariant_vector_full(const WittComodule& C, const std::vector<uint32_t>& v) {
    auto R = C.universal_ring();
    return invariant_vector_full(C.coaction(*R), *R, v);
}

}  // namespace st
