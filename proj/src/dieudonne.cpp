#include "supertheta/dieudonne.hpp"

#include <stdexcept>
#include <string>

namespace st {

// ---------------------------------------------------------------------------
// W_N(k)

std::shared_ptr<const WRing> WRing::make(FieldPtr F, uint32_t N) {
    if (N == 0 || N > 8) throw std::invalid_argument("WRing: precision must be in [1, 8]");
    auto W = std::shared_ptr<WRing>(new WRing());
    W->F_ = std::move(F);
    W->N_ = N;
    W->d_ = W->F_->k();
    W->pN_ = 1;
    for (uint32_t i = 0; i < N; ++i) W->pN_ *= W->F_->p();
    for (auto c : W->F_->modulus()) W->f_.push_back(c);

    // sigma(x) is the root of f congruent to x^p; Newton iteration from x^p.
    Elem x = W->zero();
    if (W->d_ > 1)
        x[1] = 1;
    else
        x[0] = W->md(static_cast<int64_t>(W->F_->coords(W->F_->generator())[0]));
    if (W->d_ > 1) {
        Elem y = W->pow(x, W->p());
        for (uint32_t it = 0; it < N + 1; ++it) {
            Elem fy = W->zero(), dfy = W->zero(), pw = W->one();
            for (size_t i = 0; i < W->f_.size(); ++i) {
                fy = W->add(fy, W->mul_int(pw, W->f_[i]));
                if (i + 1 < W->f_.size()) {
                    // derivative coefficient (i+1) f_{i+1} times y^i
                    dfy = W->add(dfy, W->mul_int(pw, static_cast<int64_t>(i + 1) * W->f_[i + 1]));
                }
                pw = W->mul(pw, y);
            }
            y = W->sub(y, W->mul(fy, W->inv_unit(dfy)));
        }
        W->sigma_pows_.push_back(W->one());
        for (uint32_t j = 1; j < W->d_; ++j) W->sigma_pows_.push_back(W->mul(W->sigma_pows_.back(), y));
    } else {
        W->sigma_pows_.push_back(W->one());
    }
    return W;
}

WRing::Elem WRing::one() const {
    Elem r = zero();
    r[0] = 1 % pN_;
    return r;
}

WRing::Elem WRing::integer(int64_t c) const {
    Elem r = zero();
    r[0] = md(c);
    return r;
}

WRing::Elem WRing::rational(const mpq_class& c) const {
    mpz_class num = c.get_num(), den = c.get_den(), M = pN_, inv;
    if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), M.get_mpz_t()) == 0)
        throw std::invalid_argument("WRing: denominator divisible by p");
    mpz_class r = num * inv;
    mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), M.get_mpz_t());
    return integer(r.get_si());
}

WRing::Elem WRing::p_power(uint32_t v) const {
    int64_t c = 1;
    for (uint32_t i = 0; i < v && c != 0; ++i) c = (c * p()) % pN_;
    return integer(c);
}

WRing::Elem WRing::add(const Elem& a, const Elem& b) const {
    Elem r(d_);
    for (uint32_t i = 0; i < d_; ++i) {
        int64_t s = a[i] + b[i];
        r[i] = s >= pN_ ? s - pN_ : s;
    }
    return r;
}

WRing::Elem WRing::sub(const Elem& a, const Elem& b) const {
    Elem r(d_);
    for (uint32_t i = 0; i < d_; ++i) {
        int64_t s = a[i] - b[i];
        r[i] = s < 0 ? s + pN_ : s;
    }
    return r;
}

WRing::Elem WRing::neg(const Elem& a) const { return sub(zero(), a); }

WRing::Elem WRing::mul(const Elem& a, const Elem& b) const {
    std::vector<int64_t> c(2 * d_, 0);
    for (uint32_t i = 0; i < d_; ++i) {
        if (!a[i]) continue;
        for (uint32_t j = 0; j < d_; ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % pN_;
    }
    for (size_t deg = 2 * d_ - 1; deg >= d_; --deg) {
        int64_t t = c[deg];
        if (!t) continue;
        c[deg] = 0;
        for (uint32_t i = 0; i < d_; ++i) c[deg - d_ + i] = md(c[deg - d_ + i] - t * f_[i]);
    }
    return Elem(c.begin(), c.begin() + d_);
}

WRing::Elem WRing::mul_int(const Elem& a, int64_t c) const {
    Elem r(d_);
    int64_t cc = md(c);
    for (uint32_t i = 0; i < d_; ++i) r[i] = (a[i] * cc) % pN_;
    return r;
}

bool WRing::is_zero(const Elem& a) const {
    for (auto x : a)
        if (x) return false;
    return true;
}

uint32_t WRing::valuation(const Elem& a) const {
    uint32_t v = N_;
    for (auto x : a) {
        if (!x) continue;
        uint32_t e = 0;
        while (x % p() == 0) x /= p(), ++e;
        if (e < v) v = e;
    }
    return v;
}

WRing::Elem WRing::div_p_power(const Elem& a, uint32_t v) const {
    int64_t pv = 1;
    for (uint32_t i = 0; i < v; ++i) pv *= p();
    Elem r(d_);
    for (uint32_t i = 0; i < d_; ++i) {
        if (a[i] % pv) throw std::logic_error("WRing: inexact division by a power of p");
        r[i] = a[i] / pv;
    }
    return r;
}

WRing::Elem WRing::pow(const Elem& a, uint64_t e) const {
    Elem r = one(), b = a;
    while (e) {
        if (e & 1) r = mul(r, b);
        e >>= 1;
        if (e) b = mul(b, b);
    }
    return r;
}

WRing::Elem WRing::inv_unit(const Elem& a) const {
    if (valuation(a) != 0) throw std::domain_error("WRing: element is not a unit");
    uint64_t q = F_->q(), order = q - 1;
    for (uint32_t i = 1; i < N_; ++i) order *= q;
    return pow(a, order - 1);
}

WRing::Elem WRing::teichmuller(const Fq& c) const {
    Elem r = zero();
    if (c.is_zero()) return r;
    auto co = F_->coords(c.r);
    for (uint32_t i = 0; i < d_; ++i) r[i] = co[i];
    uint64_t e = 1;
    for (uint32_t i = 1; i < N_; ++i) e *= F_->q();
    return pow(r, e);
}

Fq WRing::residue(const Elem& a) const {
    std::vector<uint32_t> co(d_);
    for (uint32_t i = 0; i < d_; ++i) co[i] = static_cast<uint32_t>(a[i] % p());
    return F_->elem(F_->from_coords(co));
}

WRing::Elem WRing::sigma(const Elem& a) const {
    Elem r = zero();
    for (uint32_t i = 0; i < d_; ++i)
        if (a[i]) r = add(r, mul_int(sigma_pows_[i], a[i]));
    return r;
}

WRing::Elem WRing::sigma_inv(const Elem& a) const {
    Elem r = a;
    for (uint32_t i = 0; i + 1 < d_; ++i) r = sigma(r);
    return r;
}

WRing::Elem WRing::from_witt(const WittVec<Fq>& w) const {
    Elem acc = zero();
    for (size_t i = 0; i < w.size() && i < N_; ++i) {
        Fq root = F_->elem(F_->frob(w[i].r, -static_cast<int>(i)));
        acc = add(acc, mul(p_power(static_cast<uint32_t>(i)), teichmuller(root)));
    }
    return acc;
}

WittVec<Fq> WRing::to_witt(const Elem& a) const {
    WittVec<Fq> out;
    Elem rem = a;
    for (uint32_t i = 0; i < N_; ++i) {
        Fq b = residue(div_p_power(rem, i));
        rem = sub(rem, mul(p_power(i), teichmuller(b)));
        out.push_back(F_->elem(F_->frob(b.r, static_cast<int>(i))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// matrices

WMat wmat_identity(const WRing& W, size_t n) {
    WMat m(W, n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = W.one();
    return m;
}

WMat wmat_mul(const WRing& W, const WMat& x, const WMat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("W-matrix product: dimension mismatch");
    WMat r(W, x.rows, y.cols);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = 0; k < x.cols; ++k) {
            if (W.is_zero(x(i, k))) continue;
            for (size_t j = 0; j < y.cols; ++j) r(i, j) = W.add(r(i, j), W.mul(x(i, k), y(k, j)));
        }
    return r;
}

WMat wmat_add(const WRing& W, const WMat& x, const WMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("W-matrix sum: dimension mismatch");
    WMat r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = W.add(x.a[i], y.a[i]);
    return r;
}

WVec wmat_apply(const WRing& W, const WMat& m, const WVec& v) {
    if (v.size() != m.cols) throw std::invalid_argument("W-matrix apply: dimension mismatch");
    WVec r(m.rows, W.zero());
    for (size_t i = 0; i < m.rows; ++i)
        for (size_t j = 0; j < m.cols; ++j) r[i] = W.add(r[i], W.mul(m(i, j), v[j]));
    return r;
}

bool wmat_equal(const WMat& x, const WMat& y) { return x.rows == y.rows && x.cols == y.cols && x.a == y.a; }

// ---------------------------------------------------------------------------
// Howell form

namespace {

void axpy(const WRing& W, WVec& y, const WRing::Elem& t, const WVec& x) {
    for (size_t i = 0; i < y.size(); ++i)
        if (!W.is_zero(x[i])) y[i] = W.sub(y[i], W.mul(t, x[i]));
}

bool vec_zero(const WRing& W, const WVec& v) {
    for (const auto& x : v)
        if (!W.is_zero(x)) return false;
    return true;
}

WVec scale_vec(const WRing& W, const WVec& v, const WRing::Elem& c) {
    WVec r;
    for (const auto& x : v) r.push_back(W.mul(x, c));
    return r;
}

}  // namespace

Howell Howell::build(const WRing& W, std::vector<WVec> rows, size_t ncols) {
    Howell h;
    h.ncols = ncols;
    for (const auto& r : rows)
        if (r.size() != ncols) throw std::invalid_argument("Howell: row length mismatch");
    size_t cur = 0;
    for (size_t col = 0; col < ncols; ++col) {
        size_t best = rows.size();
        uint32_t bestv = W.N();
        for (size_t r = cur; r < rows.size(); ++r) {
            uint32_t v = W.valuation(rows[r][col]);
            if (v < bestv) {
                bestv = v;
                best = r;
            }
        }
        if (best == rows.size()) continue;
        std::swap(rows[cur], rows[best]);
        WRing::Elem u = W.div_p_power(rows[cur][col], bestv);
        rows[cur] = scale_vec(W, rows[cur], W.inv_unit(u));
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == cur || W.is_zero(rows[r][col])) continue;
            if (W.valuation(rows[r][col]) < bestv) continue;
            WRing::Elem t = W.div_p_power(rows[r][col], bestv);
            axpy(W, rows[r], t, rows[cur]);
        }
        if (bestv > 0) {
            WVec extra = scale_vec(W, rows[cur], W.p_power(W.N() - bestv));
            if (!vec_zero(W, extra)) rows.push_back(std::move(extra));
        }
        h.pivot_col.push_back(col);
        h.pivot_val.push_back(bestv);
        ++cur;
    }
    rows.resize(cur);
    h.rows = std::move(rows);
    return h;
}

uint32_t Howell::length(const WRing& W) const {
    uint32_t l = 0;
    for (auto v : pivot_val) l += W.N() - v;
    return l;
}

WVec Howell::reduce(const WRing& W, WVec v) const {
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& e = v[pivot_col[i]];
        if (W.is_zero(e)) continue;
        if (W.valuation(e) < pivot_val[i]) return v;
        axpy(W, v, W.div_p_power(e, pivot_val[i]), rows[i]);
    }
    return v;
}

bool Howell::contains(const WRing& W, WVec v) const { return vec_zero(W, reduce(W, std::move(v))); }

// ---------------------------------------------------------------------------
// Psi

PsiMap::PsiMap(WRingPtr W, const Order& O, WMat psi_w) : W_(std::move(W)), O_(O), psi_w_(std::move(psi_w)) {
    const WRing& R = *W_;
    if (psi_w_.rows != 2 || psi_w_.cols != 2) throw std::invalid_argument("Psi(w) must be 2x2");
    psi_f_ = WMat(R, 2, 2);
    psi_f_(0, 1) = R.integer(-static_cast<int64_t>(R.p()));
    psi_f_(1, 0) = R.one();
    const CMData& cm = O_.cm();
    if (cm.p != R.p()) throw std::invalid_argument("Psi: order and ring characteristics differ");
    // w^2 + t w + n = 0
    WMat w2 = wmat_mul(R, psi_w_, psi_w_);
    WMat lhs = wmat_add(R, w2, wmat_add(R, scale_mat(psi_w_, cm.t), scale_mat(wmat_identity(R, 2), cm.n)));
    for (const auto& x : lhs.a)
        if (!R.is_zero(x)) throw std::invalid_argument("Psi(w) does not satisfy the minimal polynomial of w");
    // F w = conj(w) F
    WMat wbar = wmat_add(R, scale_mat(wmat_identity(R, 2), -cm.t), scale_mat(psi_w_, -1));
    if (!wmat_equal(wmat_mul(R, psi_f_, psi_w_), wmat_mul(R, wbar, psi_f_)))
        throw std::invalid_argument("Psi violates F w = conj(w) F");
}

WMat PsiMap::scale_mat(const WMat& m, int64_t c) const {
    WMat r = m;
    for (auto& x : r.a) x = W_->mul_int(x, c);
    return r;
}

WMat PsiMap::eval(const OElem& x) const {
    const WRing& R = *W_;
    auto lin = [&](const mpq_class& c0, const mpq_class& c1) {
        WMat r = wmat_identity(R, 2);
        WRing::Elem a = R.rational(c0), b = R.rational(c1);
        for (auto& e : r.a) e = R.mul(e, a);
        WMat s = psi_w_;
        for (auto& e : s.a) e = R.mul(e, b);
        return wmat_add(R, r, s);
    };
    return wmat_add(R, lin(x.a0, x.a1), wmat_mul(R, lin(x.b0, x.b1), psi_f_));
}

WMat PsiMap::extend(const OMat& phi) const {
    WMat out(*W_, 2 * phi.rows, 2 * phi.cols);
    for (size_t i = 0; i < phi.rows; ++i)
        for (size_t j = 0; j < phi.cols; ++j) {
            WMat b = eval(phi(i, j));
            for (size_t r = 0; r < 2; ++r)
                for (size_t c = 0; c < 2; ++c) out(2 * i + r, 2 * j + c) = b(r, c);
        }
    return out;
}

// ---------------------------------------------------------------------------
// modules

WVec dieudonne_F(const WRing& W, const WVec& v) {
    WVec r(v.size(), W.zero());
    const int64_t p = W.p();
    for (size_t j = 0; j + 1 < v.size(); j += 2) {
        r[j] = W.mul_int(W.sigma(v[j + 1]), -p);
        r[j + 1] = W.sigma(v[j]);
    }
    return r;
}

WVec dieudonne_V(const WRing& W, const WVec& v) {
    WVec r(v.size(), W.zero());
    const int64_t p = W.p();
    for (size_t j = 0; j + 1 < v.size(); j += 2) {
        r[j] = W.mul_int(W.sigma_inv(v[j + 1]), p);
        r[j + 1] = W.neg(W.sigma_inv(v[j]));
    }
    return r;
}

std::vector<WVec> DieudonneModule::relations() const {
    std::vector<WVec> rel;
    for (size_t j = 0; j < g; ++j) {
        WVec a(2 * g, W->zero()), b(2 * g, W->zero());
        a[2 * j] = W->p_power((n + 1) / 2);
        b[2 * j + 1] = W->p_power(n / 2);
        rel.push_back(a);
        rel.push_back(b);
    }
    return rel;
}

Howell DieudonneModule::span_with_relations() const {
    std::vector<WVec> rows = gens;
    for (auto& r : relations()) rows.push_back(r);
    return Howell::build(*W, rows, 2 * g);
}

uint32_t DieudonneModule::length() const {
    uint32_t total = span_with_relations().length(*W);
    uint32_t rel = Howell::build(*W, relations(), 2 * g).length(*W);
    return total - rel;
}

bool DieudonneModule::contains(const WVec& v) const { return span_with_relations().contains(*W, v); }

bool DieudonneModule::is_FV_stable() const {
    Howell h = span_with_relations();
    for (const auto& x : gens)
        if (!h.contains(*W, dieudonne_F(*W, x)) || !h.contains(*W, dieudonne_V(*W, x))) return false;
    return true;
}

bool DieudonneModule::killed_by_F_power(uint32_t e) const {
    Howell rel = Howell::build(*W, relations(), 2 * g);
    for (const auto& x : gens) {
        WVec y = x;
        for (uint32_t i = 0; i < e; ++i) y = dieudonne_F(*W, y);
        if (!rel.contains(*W, y)) return false;
    }
    return true;
}

DieudonneModule ambient_module(WRingPtr W, size_t g, uint32_t n) {
    DieudonneModule M;
    M.W = std::move(W);
    M.g = g;
    M.n = n;
    for (size_t i = 0; i < 2 * g; ++i) {
        WVec e(2 * g, M.W->zero());
        e[i] = M.W->one();
        M.gens.push_back(e);
    }
    return M;
}

DieudonneModule kernel_in(const PsiMap& psi, const OMat& phi, const DieudonneModule& M) {
    const WRing& W = *M.W;
    if (phi.cols != M.g) throw std::invalid_argument("kernel_in: matrix width does not match the module");
    if (W.N() <= M.n) throw std::invalid_argument("kernel_in: ambient precision must exceed n");
    const size_t s = phi.rows, t = M.g;
    WMat P = psi.extend(phi);
    std::vector<WVec> rows;
    Howell src = M.span_with_relations();
    for (const auto& m : src.rows) {
        WVec row = wmat_apply(W, P, m);
        row.insert(row.end(), m.begin(), m.end());
        rows.push_back(row);
    }
    DieudonneModule target;
    target.W = M.W;
    target.g = s;
    target.n = M.n;
    for (auto& r : target.relations()) {
        r.resize(2 * s + 2 * t, W.zero());
        rows.push_back(r);
    }
    Howell h = Howell::build(W, rows, 2 * s + 2 * t);
    DieudonneModule K;
    K.W = M.W;
    K.g = t;
    K.n = M.n;
    for (size_t i = 0; i < h.rows.size(); ++i) {
        if (h.pivot_col[i] < 2 * s) continue;
        K.gens.emplace_back(h.rows[i].begin() + 2 * s, h.rows[i].end());
    }
    return K;
}

DieudonneModule kernel_module(const PsiMap& psi, const OMat& H, uint32_t n) {
    if (H.rows != H.cols) throw std::invalid_argument("kernel_module: H must be square");
    if (!omat_is_hermitian(psi.order(), H)) throw std::invalid_argument("kernel_module: H is not hermitian");
    if (psi.W().N() < n + 2) throw std::invalid_argument("kernel_module: ambient precision must be at least n + 2");
    DieudonneModule K = kernel_in(psi, H, ambient_module(psi.W_ptr(), H.rows, n));
    DieudonneModule K1 = kernel_in(psi, H, ambient_module(psi.W_ptr(), H.rows, n + 1));
    if (K.length() != K1.length())
        throw std::domain_error("kernel_module: n = " + std::to_string(n) + " is too small, ker(eta) is not killed by F^n");
    return K;
}

WRing::Elem dieudonne_pairing(const WRing& W, const WMat& psiH, const WVec& u, const WVec& v, uint32_t n) {
    if (u.size() != psiH.rows || v.size() != psiH.cols) throw std::invalid_argument("pairing: dimension mismatch");
    if (n >= W.N()) throw std::invalid_argument("pairing: ambient precision must exceed n");
    WVec w = wmat_apply(W, psiH, v);
    WRing::Elem x = W.zero();
    for (size_t j = 0; j + 1 < u.size(); j += 2) {
        x = W.add(x, W.mul(u[j], w[j + 1]));
        x = W.sub(x, W.mul(u[j + 1], w[j]));
    }
    int64_t pn = 1;
    for (uint32_t i = 0; i < n; ++i) pn *= W.p();
    for (auto& c : x) c %= pn;
    return x;
}

Mat pairing_gram(const WRing& W, const WMat& psiH, const std::vector<WVec>& gens, uint32_t n) {
    if (n != 1) throw std::invalid_argument("pairing_gram: only n = 1 is supported");
    const Field& F = W.field();
    Mat G(&F, gens.size(), gens.size());
    for (size_t i = 0; i < gens.size(); ++i)
        for (size_t j = 0; j < gens.size(); ++j) G(i, j) = W.residue(dieudonne_pairing(W, psiH, gens[i], gens[j], n)).r;
    return G;
}

bool is_maximal_isotropic(const DieudonneModule& S, const DieudonneModule& K, const WMat& psiH) {
    const WRing& W = *K.W;
    if (S.g != K.g || S.n != K.n) throw std::invalid_argument("is_maximal_isotropic: shape mismatch");
    for (const auto& x : S.gens)
        if (!K.contains(x)) throw std::invalid_argument("is_maximal_isotropic: S is not contained in M(ker eta)");
    if (!S.is_FV_stable()) throw std::invalid_argument("is_maximal_isotropic: S is not stable under F and V");
    for (const auto& x : S.gens)
        for (const auto& y : S.gens)
            if (!W.is_zero(dieudonne_pairing(W, psiH, x, y, S.n))) return false;
    return 2 * S.length() == K.length();
}

Splitting splitting_sigma(const std::vector<DieudonneModule>& subs, const DieudonneModule& K) {
    const WRing& W = *K.W;
    const size_t dim = 2 * K.g;
    size_t T = 0;
    for (const auto& s : subs) {
        if (s.g != K.g || s.n != K.n) throw std::invalid_argument("splitting_sigma: shape mismatch");
        for (const auto& x : s.gens)
            if (!K.contains(x)) throw std::invalid_argument("splitting_sigma: summand not contained in M(ker eta)");
        T += s.gens.size();
    }
    // rows [h | tag] for generators, [r | 0] for the ambient relations
    std::vector<WVec> rows;
    std::vector<std::pair<size_t, size_t>> tag_of;
    for (size_t i = 0; i < subs.size(); ++i)
        for (size_t j = 0; j < subs[i].gens.size(); ++j) {
            WVec row = subs[i].gens[j];
            row.resize(dim + T, W.zero());
            row[dim + tag_of.size()] = W.one();
            tag_of.emplace_back(i, j);
            rows.push_back(row);
        }
    for (auto r : K.relations()) {
        r.resize(dim + T, W.zero());
        rows.push_back(r);
    }
    Howell h = Howell::build(W, rows, dim + T);
    Howell rel = Howell::build(W, K.relations(), dim);

    auto split = [&](const WVec& v) {
        WVec row = v;
        row.resize(dim + T, W.zero());
        WVec red = h.reduce(W, row);
        for (size_t c = 0; c < dim; ++c)
            if (!W.is_zero(red[c])) throw std::domain_error("splitting_sigma: not a spanning tuple");
        std::vector<WVec> parts(subs.size(), WVec(dim, W.zero()));
        for (size_t k = 0; k < T; ++k) {
            WRing::Elem c = W.neg(red[dim + k]);
            if (W.is_zero(c)) continue;
            auto [i, j] = tag_of[k];
            for (size_t r = 0; r < dim; ++r) parts[i][r] = W.add(parts[i][r], W.mul(c, subs[i].gens[j][r]));
        }
        return parts;
    };

    Splitting out;
    Howell kh = K.span_with_relations();
    for (const auto& k : kh.rows) {
        if (rel.contains(W, k)) continue;
        out.k_gens.push_back(k);
    }
    out.sigma.assign(subs.size(), {});
    for (const auto& k : out.k_gens) {
        auto parts = split(k);
        for (size_t i = 0; i < subs.size(); ++i) out.sigma[i].push_back(parts[i]);
        // equivariance: sigma(F k) = F sigma(k), sigma(V k) = V sigma(k) modulo relations
        auto fk = split(dieudonne_F(W, k)), vk = split(dieudonne_V(W, k));
        for (size_t i = 0; i < subs.size(); ++i) {
            WVec df = dieudonne_F(W, parts[i]), dv = dieudonne_V(W, parts[i]);
            for (size_t r = 0; r < dim; ++r) {
                df[r] = W.sub(df[r], fk[i][r]);
                dv[r] = W.sub(dv[r], vk[i][r]);
            }
            if (!rel.contains(W, df) || !rel.contains(W, dv))
                throw std::domain_error("splitting_sigma: linear splitting is not F,V-equivariant");
        }
    }
    return out;
}

WittCover witt_cover(const DieudonneModule& S) {
    if (S.n != 1) throw std::invalid_argument("witt_cover: only n = 1 is supported (the cover is then k-linear)");
    const WRing& W = *S.W;
    const Field& F = W.field();
    // delta coordinates of the generators, reduced to a basis
    Mat m(&F, S.gens.size(), S.g);
    for (size_t i = 0; i < S.gens.size(); ++i)
        for (size_t j = 0; j < S.g; ++j) m(i, j) = W.residue(S.gens[i][2 * j]).r;
    auto piv = rref(m);
    WittCover c;
    c.a = piv.size();
    c.lift = Mat(&F, 2 * S.g, c.a);
    for (size_t k = 0; k < c.a; ++k)
        for (size_t j = 0; j < S.g; ++j) c.lift(2 * j, k) = m(k, j);
    return c;
}

}  // namespace st
