#include "supertheta/sections.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace st {

namespace {

Laurent ipow(const Laurent& a, int64_t e) {
    if (e == 1) return a;
    if (e < 0) return ipow(a.inv(), -e);
    Laurent r = a;
    for (int64_t k = 1; k < e; ++k) r = r * a;
    return r;
}

int64_t ppow(uint32_t p, uint32_t e) {
    int64_t r = 1;
    for (uint32_t k = 0; k < e; ++k) r *= p;
    return r;
}

std::vector<OMat> rows_of(const CDDivisor& D) {
    std::vector<OMat> r;
    for (size_t m = 0; m < D.g(); ++m) r.push_back(D.row(m));
    return r;
}

Pt<Laurent> xi_of(const EndoRing& R, const OMat& row, const EgLaurent& P) { return R.apply_matrix(row, P)[0]; }

}  // namespace

EgLaurent to_laurent(const Curve& E, const EgPoint& P, size_t len) {
    EgLaurent r;
    r.reserve(P.size());
    for (const auto& Q : P) r.push_back(E.to_laurent(Q, len));
    return r;
}

EgLaurent eg_add(const Curve& E, const EgLaurent& a, const EgLaurent& b) {
    EgLaurent r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = E.add(a[j], b[j]);
    return r;
}

EgLaurent eg_sub(const Curve& E, const EgLaurent& a, const EgLaurent& b) {
    EgLaurent r(a.size());
    for (size_t j = 0; j < a.size(); ++j) r[j] = E.sub(a[j], b[j]);
    return r;
}

static Fq exact_value(const Laurent& v, const Field& F) {
    if (v.is_zero()) return F.zero();
    if (v.valuation() < 0) throw std::domain_error("value_at: pole at the point");
    if (v.valuation() > 0) return F.zero();
    return F.elem(v.coeff(0));
}

Fq value_at(const EFn& f, const Curve& E, const Pt<Fq>& P) {
    return exact_value(f(E.to_laurent(P, 1)), E.field());
}

Fq value_at(const EgFn& f, const Curve& E, const EgPoint& P) {
    return exact_value(f(to_laurent(E, P, 1)), E.field());
}

EgLaurent formal_line(const Curve& E, const EgPoint& P, const std::vector<uint32_t>& gamma, size_t len) {
    if (gamma.size() != P.size()) throw std::invalid_argument("formal_line: dimension mismatch");
    EgLaurent r(P.size());
    for (size_t j = 0; j < P.size(); ++j) r[j] = E.add(E.to_laurent(P[j], len), E.formal_point(gamma[j], len));
    return r;
}

int64_t order_at(const EFn& f, const Curve& E, const Pt<Fq>& T, uint32_t c, size_t len) {
    Laurent v = f(E.add(E.to_laurent(T, len), E.formal_point(c, len)));
    if (v.is_zero()) throw std::domain_error("order_at: order beyond the known precision");
    return v.valuation();
}

int64_t order_along(const EgFn& f, const Curve& E, const EgPoint& P, const std::vector<uint32_t>& gamma,
                    size_t len) {
    Laurent v = f(formal_line(E, P, gamma, len));
    if (v.is_zero()) throw std::domain_error("order_along: order beyond the known precision");
    return v.valuation();
}

// ---------------------------------------------------------------------------
// Functions on E

Laurent EllipticFunction::operator()(const Pt<Laurent>& P) const {
    if (P.inf) throw std::domain_error("EllipticFunction: evaluation at the point at infinity");
    const Field& F = E_->field();
    Laurent acc = Laurent::constant(&F, 1, Laurent::kMaxLength);
    for (const auto& f : f_) {
        Laurent dx = P.x.plus_constant(F.neg(f.x0.r));
        Laurent v = f.vertical ? dx : P.y.plus_constant(F.neg(f.y0.r)) - dx.scale(f.lambda.r);
        acc = acc * ipow(v, f.e);
    }
    return acc;
}

Fq EllipticFunction::at(const Pt<Fq>& P) const { return value_at(fn(), *E_, P); }

EFn EllipticFunction::fn() const {
    EllipticFunction self = *this;
    return [self](const Pt<Laurent>& P) { return self(P); };
}

EllipticFunction elliptic_function_with_divisor(const CurvePtr& Ep, const EDivisor& D) {
    const Curve& E = *Ep;
    const Field& F = E.field();
    int64_t deg = 0;
    Pt<Fq> sum = Pt<Fq>::infinity();
    for (const auto& [P, n] : D) {
        if (!E.on_curve(P)) throw std::invalid_argument("elliptic_function_with_divisor: point not on the curve");
        deg += n;
        sum = E.add(sum, E.mul(P, n));
    }
    if (deg != 0 || !sum.inf)
        throw std::invalid_argument("elliptic_function_with_divisor: divisor is not principal");

    std::vector<EllipticFunction::Factor> out;
    std::vector<Pt<Fq>> positive;
    for (const auto& [P, n] : D) {
        if (P.inf || n == 0) continue;
        Pt<Fq> Q = P;
        if (n < 0) {
            EllipticFunction::Factor v;
            v.vertical = true;
            v.x0 = P.x;
            v.e = n;
            out.push_back(v);
            Q = E.neg(P);
        }
        for (int64_t k = 0; k < (n < 0 ? -n : n); ++k) positive.push_back(Q);
    }
    Pt<Fq> S = Pt<Fq>::infinity();
    for (const auto& Q : positive) {
        if (S.inf) {
            S = Q;
            continue;
        }
        Pt<Fq> T = E.add(S, Q);
        if (T.inf) {
            EllipticFunction::Factor v;
            v.vertical = true;
            v.x0 = S.x;
            out.push_back(v);
        } else {
            EllipticFunction::Factor l;
            l.x0 = S.x;
            l.y0 = S.y;
            l.lambda = (S == Q) ? (F.integer(3) * S.x * S.x + E.a()) / (F.integer(2) * S.y) : (Q.y - S.y) / (Q.x - S.x);
            out.push_back(l);
            EllipticFunction::Factor v;
            v.vertical = true;
            v.x0 = T.x;
            v.e = -1;
            out.push_back(v);
        }
        S = T;
    }
    return EllipticFunction(Ep, std::move(out));
}

EFn elliptic_monomial(const CurvePtr& Ep, const Pt<Fq>& T, int i, int e) {
    const Curve* E = Ep.get();
    return [Ep, E, T, i, e](const Pt<Laurent>& P) {
        Pt<Laurent> Q = T.inf ? P : E->sub(P, E->to_laurent(T));
        const Field* F = &E->field();
        if (Q.inf) throw std::domain_error("elliptic_monomial: pole");
        Laurent r = Laurent::constant(F, 1, Laurent::kMaxLength);
        for (int k = 0; k < i; ++k) r = r * Q.x;
        if (e) r = r * Q.y;
        return r;
    };
}

std::vector<std::pair<int, int>> riemann_roch_monomials(int64_t M) {
    std::vector<std::pair<int, int>> out;
    for (int64_t ord = 0; ord <= M; ++ord) {
        if (ord == 1) continue;
        if (ord % 2 == 0) out.emplace_back(static_cast<int>(ord / 2), 0);
        else out.emplace_back(static_cast<int>((ord - 3) / 2), 1);
    }
    return out;
}

EgFn pullback(const EndoRing& R, const EFn& f, const OMat& row) {
    const EndoRing* Rp = &R;
    return [Rp, f, row](const EgLaurent& P) { return f(xi_of(*Rp, row, P)); };
}

EgFn translate(const EndoRing& R, const EgFn& f, const EgPoint& Q) {
    return translate(R, f, to_laurent(R.curve(), Q));
}

EgFn translate(const EndoRing& R, const EgFn& f, const EgLaurent& Q) {
    const Curve* E = &R.curve();
    return [E, f, Q](const EgLaurent& P) { return f(eg_add(*E, P, Q)); };
}

EgFn multiply_argument(const EndoRing& R, const EgFn& f, int64_t n) {
    const Curve* E = &R.curve();
    return [E, f, n](const EgLaurent& P) {
        EgLaurent Q(P.size());
        for (size_t j = 0; j < P.size(); ++j) Q[j] = E->mul(P[j], n);
        return f(Q);
    };
}

// ---------------------------------------------------------------------------
// Section spaces

std::vector<Laurent> SectionSpace::eval_ambient(const EgLaurent& P) const {
    const Curve& E = R_->curve();
    const Field* F = &E.field();
    const size_t g = T_.size();
    std::vector<std::vector<Laurent>> vals(g);
    for (size_t m = 0; m < g; ++m) {
        OMat row = D_.base->row(m);
        Pt<Laurent> Q = xi_of(*R_, row, P);
        if (!T_[m].inf) Q = E.sub(Q, E.to_laurent(T_[m]));
        if (Q.inf) throw std::domain_error("section: evaluation on the divisor");
        int maxi = 0;
        for (const auto& [i, e] : mono_[m]) maxi = std::max(maxi, i);
        std::vector<Laurent> xp{Laurent::constant(F, 1, Laurent::kMaxLength)};
        for (int i = 1; i <= maxi; ++i) xp.push_back(xp.back() * Q.x);
        for (const auto& [i, e] : mono_[m]) vals[m].push_back(e ? xp[static_cast<size_t>(i)] * Q.y : xp[static_cast<size_t>(i)]);
    }
    std::vector<Laurent> out;
    out.reserve(index_.size());
    for (const auto& idx : index_) {
        Laurent v = vals[0][idx[0]];
        for (size_t m = 1; m < g; ++m) v = v * vals[m][idx[m]];
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<Laurent> SectionSpace::eval_basis(const EgLaurent& P) const {
    auto amb = eval_ambient(P);
    const Field* F = &R_->curve().field();
    std::vector<Laurent> out;
    for (size_t j = 0; j < C_.rows; ++j) {
        Laurent acc;
        bool first = true;
        for (size_t k = 0; k < C_.cols; ++k) {
            uint32_t c = C_(j, k);
            if (!c) continue;
            Laurent term = amb[k].scale(c);
            acc = first ? term : acc + term;
            first = false;
        }
        if (first) acc = Laurent::zero(F, Laurent::kMaxLength);
        out.push_back(acc.qth_root(t_));
    }
    return out;
}

std::vector<Fq> SectionSpace::eval_basis(const EgPoint& P) const {
    const Curve& E = R_->curve();
    auto v = eval_basis(to_laurent(E, P, 1));
    std::vector<Fq> out;
    for (const auto& x : v) out.push_back(exact_value(x, E.field()));
    return out;
}

Laurent SectionSpace::eval(const std::vector<uint32_t>& a, const EgLaurent& P) const {
    auto b = eval_basis(P);
    const Field* F = &R_->curve().field();
    Laurent acc = Laurent::zero(F, Laurent::kMaxLength);
    for (size_t j = 0; j < b.size(); ++j)
        if (a[j]) acc = acc + b[j].scale(a[j]);
    return acc;
}

EgFn SectionSpace::function(const std::vector<uint32_t>& a) const {
    if (a.size() != dim()) throw std::invalid_argument("SectionSpace::function: coordinate size mismatch");
    SectionSpace self = *this;
    return [self, a](const EgLaurent& P) { return self.eval(a, P); };
}

EgFn SectionSpace::basis_function(size_t j) const {
    std::vector<uint32_t> a(dim(), 0);
    a.at(j) = 1;
    return function(a);
}

SectionSpace SectionSpace::build(const EndoRing& R, const TranslatedDivisor& D, uint32_t N, uint32_t t,
                                 size_t target, std::mt19937_64& rng, const SectionOptions& opt) {
    const Curve& E = R.curve();
    const Field& F = E.field();
    const uint32_t p = F.p();
    const size_t g = D.base->g();
    SectionSpace S;
    S.R_ = &R;
    S.D_ = D;
    S.N_ = N;
    S.t_ = t;
    S.T_ = D.T;
    const int64_t q = ppow(p, t);
    size_t K = 1;
    for (size_t m = 0; m < g; ++m) {
        S.mono_.push_back(riemann_roch_monomials(static_cast<int64_t>(N) * q * ppow(p, D.base->n[m])));
        K *= S.mono_.back().size();
    }
    if (K > 65535) throw std::runtime_error("build_section_space: ambient space too large");
    for (size_t k = 0; k < K; ++k) {
        std::vector<uint16_t> idx(g);
        size_t r = k;
        for (size_t m = g; m-- > 0;) {
            idx[m] = static_cast<uint16_t>(r % S.mono_[m].size());
            r /= S.mono_[m].size();
        }
        S.index_.push_back(idx);
    }

    Mat cond(&F, 0, K);
    size_t nullity = K, stable = 0;
    int round = 0;
    for (; round < opt.max_rounds && stable < 2; ++round) {
        EgPoint P;
        for (size_t j = 0; j < g; ++j) P.push_back(E.random_point(rng));
        std::vector<uint32_t> gamma(g);
        for (auto& c : gamma) c = F.random_nonzero(rng);
        std::vector<Laurent> amb;
        try {
            amb = S.eval_ambient(formal_line(E, P, gamma, opt.series_length));
        } catch (const std::domain_error&) {
            continue;
        }
        int64_t lo = 0, hi = INT64_MAX;
        for (const auto& a : amb) {
            if (!a.is_zero()) lo = std::min(lo, a.valuation());
            hi = std::min(hi, a.abs_precision());
        }
        std::vector<uint32_t> rows = cond.a;
        size_t nrows = cond.rows;
        for (int64_t e = lo; e < hi; ++e) {
            if (((e % q) + q) % q == 0) continue;
            for (size_t k = 0; k < K; ++k) rows.push_back(amb[k].coeff(e));
            ++nrows;
        }
        Mat M(&F, nrows, K);
        M.a = std::move(rows);
        rref(M);
        size_t rk = 0;
        while (rk < M.rows) {
            bool nz = false;
            for (size_t k = 0; k < K && !nz; ++k) nz = M(rk, k) != 0;
            if (!nz) break;
            ++rk;
        }
        M.a.resize(rk * K);
        M.rows = rk;
        cond = std::move(M);
        size_t nl = K - rk;
        if (nl < target) {
            std::ostringstream os;
            os << "build_section_space: q-th power conditions leave dimension " << nl << " below the target "
               << target;
            throw std::logic_error(os.str());
        }
        if (nl == target && nl == nullity) ++stable;
        else stable = (nl == target) ? 1 : 0;
        nullity = nl;
    }
    if (nullity != target) {
        std::ostringstream os;
        os << "basis construction failed: dimension " << nullity << " above target " << target << " after " << round
           << " rounds";
        throw std::runtime_error(os.str());
    }
    S.C_ = nullspace(cond).transpose();
    return S;
}

std::vector<uint32_t> SectionSpace::coordinates(const EgFn& f, std::mt19937_64& rng) const {
    const Curve& E = R_->curve();
    const Field* F = &E.field();
    const size_t n = dim(), npts = n + 4;
    Mat A(F, npts, n), b(F, npts, 1);
    size_t row = 0;
    for (int tries = 0; row < npts && tries < 1000; ++tries) {
        EgPoint P = generic_point(*R_, D_, rng);
        try {
            auto vals = eval_basis(P);
            Fq fv = value_at(f, E, P);
            for (size_t j = 0; j < n; ++j) A(row, j) = vals[j].r;
            b(row, 0) = fv.r;
            ++row;
        } catch (const std::domain_error&) {
        }
    }
    if (row < npts) throw std::runtime_error("SectionSpace::coordinates: no admissible evaluation points");
    Mat x;
    if (!solve(A, b, x)) throw std::runtime_error("SectionSpace::coordinates: function outside the basis span");
    return x.column(0);
}

bool on_divisor(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x) {
    return divisor_multiplicity_at(R, D, x) > 0;
}

EgPoint generic_point(const EndoRing& R, const TranslatedDivisor& D, std::mt19937_64& rng) {
    const Curve& E = R.curve();
    for (int tries = 0; tries < 10000; ++tries) {
        EgPoint P;
        for (size_t j = 0; j < D.base->g(); ++j) P.push_back(E.random_point(rng));
        if (!on_divisor(R, D, P)) return P;
    }
    throw std::runtime_error("generic_point: every sampled point lies on the divisor");
}

std::vector<EgPoint> component_points(const EndoRing& R, const OMat& row, const Pt<Fq>& T, size_t count,
                                      std::mt19937_64& rng) {
    const Curve& E = R.curve();
    const size_t g = row.cols;
    size_t jb = g;
    for (size_t j = g; j-- > 0;)
        if (!row(0, j).is_zero()) {
            jb = j;
            break;
        }
    if (jb == g) throw std::invalid_argument("component_points: zero row");
    std::unordered_map<size_t, std::vector<Pt<Fq>>> pre;
    for (const auto& Q : E.points()) pre[E.point_index(R.eval(row(0, jb), Q))].push_back(Q);
    std::vector<EgPoint> out;
    for (int tries = 0; out.size() < count && tries < 100000; ++tries) {
        EgPoint P(g);
        Pt<Fq> acc = T;
        for (size_t j = 0; j < g; ++j) {
            if (j == jb) continue;
            P[j] = E.random_point(rng);
            acc = E.sub(acc, R.eval(row(0, j), P[j]));
        }
        auto it = pre.find(E.point_index(acc));
        if (it == pre.end()) continue;
        P[jb] = it->second[rng() % it->second.size()];
        out.push_back(P);
    }
    if (out.size() < count) throw std::runtime_error("component_points: component has too few rational points");
    return out;
}

std::optional<RelatingFunction> relating_function(const EndoRing& R, const SectionSpace& LD, const CDDivisor& Di,
                                                  const EgPoint& shift, std::mt19937_64& rng) {
    const Curve& E = R.curve();
    const Field* F = &E.field();
    auto Dp = TranslatedDivisor::make(R, Di, shift);
    const size_t n = LD.dim();
    std::vector<std::vector<Fq>> rows;
    for (size_t m = 0; m < Di.g(); ++m) {
        auto pts = component_points(R, Di.row(m), Dp.T[m], 3 * (n + 3), rng);
        size_t used = 0;
        for (const auto& P : pts) {
            if (used >= n + 3) break;
            if (on_divisor(R, LD.divisor(), P)) continue;
            try {
                rows.push_back(LD.eval_basis(P));
                ++used;
            } catch (const std::domain_error&) {
            }
        }
        if (used < n + 3) throw std::runtime_error("relating_function: too few usable points on a component");
    }
    Mat A(F, rows.size(), n);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < n; ++j) A(i, j) = rows[i][j].r;
    Mat ns = nullspace(A);
    if (ns.cols == 0) return std::nullopt;
    if (ns.cols > 1) throw std::runtime_error("relating_function: vanishing space has dimension above one");
    RelatingFunction rf;
    rf.shift = shift;
    rf.coeffs = ns.column(0);
    rf.g = LD.function(rf.coeffs);
    return rf;
}

// ---------------------------------------------------------------------------
// Level structure

LevelElement level_function(const EndoRing& R, const TranslatedDivisor& D, const EgPoint& x, const EgPoint& half,
                            int64_t N) {
    const Curve& E = R.curve();
    const Field& F = E.field();
    if (N < 2 || N % 2) throw std::invalid_argument("level_function: N must be even");
    if (!(eg_mul(E, half, 2) == x)) throw std::invalid_argument("level_function: half does not double to x");
    if (!eg_is_zero(eg_mul(E, x, N))) throw std::invalid_argument("level_function: x is not N-torsion");
    LevelElement L;
    L.x = x;
    L.half = half;
    L.N = N;
    const EndoRing* Rp = &R;
    const auto rows = rows_of(*D.base);
    const auto T = D.T;
    std::vector<int64_t> mult;
    for (auto n : D.base->n) mult.push_back(ppow(F.p(), n));
    for (int64_t j = 0; j < N / 2; ++j) {
        EgPoint a = eg_add(E, half, eg_mul(E, x, j));
        std::vector<std::optional<uint32_t>> X;
        for (const auto& row : rows) {
            Pt<Fq> c = R.apply_matrix(row, a)[0];
            X.push_back(c.inf ? std::nullopt : std::optional<uint32_t>(c.x.r));
        }
        L.rho_j.push_back([Rp, rows, T, X, mult](const EgLaurent& P) {
            const Curve& Ec = Rp->curve();
            const Field* Fp = &Ec.field();
            Laurent acc = Laurent::constant(Fp, 1, Laurent::kMaxLength);
            for (size_t m = 0; m < rows.size(); ++m) {
                if (!X[m]) continue;
                Pt<Laurent> Q = xi_of(*Rp, rows[m], P);
                if (!T[m].inf) Q = Ec.sub(Q, Ec.to_laurent(T[m]));
                if (Q.inf) throw std::domain_error("level function: pole");
                acc = acc * ipow(Q.x.plus_constant(Fp->neg(*X[m])), mult[m]);
            }
            return acc;
        });
    }
    const auto rho_j = L.rho_j;
    const EgLaurent xl = to_laurent(E, x);
    L.rho = [Rp, rho_j, xl](const EgLaurent& P) {
        const Curve& Ec = Rp->curve();
        EgLaurent Px = eg_add(Ec, P, xl);
        Laurent acc = Laurent::constant(&Ec.field(), 1, Laurent::kMaxLength);
        for (const auto& r : rho_j) acc = acc * r(Px) / r(P);
        return acc;
    };
    return L;
}

EgFn level_action(const EndoRing& R, const LevelElement& L, const EgFn& G) {
    const Curve* E = &R.curve();
    const EgLaurent negx = to_laurent(*E, eg_neg(*E, L.x));
    const EgFn rho = L.rho;
    return [E, negx, rho, G](const EgLaurent& P) {
        EgLaurent Q = eg_add(*E, P, negx);
        return rho(Q) * G(Q);
    };
}

EgFn level_action(const EndoRing& R, const std::vector<const LevelElement*>& word, const EgFn& G) {
    EgFn f = G;
    for (size_t k = word.size(); k-- > 0;) f = level_action(R, *word[k], f);
    return f;
}

// ---------------------------------------------------------------------------
// Comodule on sections

namespace {

Laurent chain_at(const EndoRing& R, const SplitHData& H, const std::vector<size_t>& order, size_t k, uint32_t N,
                 const EgFn& f, const EgLaurent& Q, size_t len) {
    if (k == order.size()) return f(Q);
    const Curve& E = R.curve();
    const size_t i = order[k];
    EgLaurent h(H.dirs[i].size());
    for (size_t j = 0; j < h.size(); ++j) h[j] = E.formal_point(H.dirs[i][j], len);
    EgLaurent Qh = eg_add(E, Q, h);
    Laurent inner = chain_at(R, H, order, k + 1, N, f, Qh, len);
    if (!H.mult[i]) return inner;
    Laurent ratio = H.mult[i](Q) / H.mult[i](Qh);
    return ipow(ratio, N) * inner;
}

}  // namespace

Laurent translated_chain(const EndoRing& R, const SplitHData& H, const std::vector<size_t>& order, uint32_t N,
                         const EgFn& f, const EgPoint& P, size_t len) {
    return chain_at(R, H, order, 0, N, f, to_laurent(R.curve(), P, len), len);
}

Laurent shuffle_factor(const EndoRing& R, const SectionSpace& S, const SplitHData& H, std::mt19937_64& rng,
                       size_t len) {
    const Field* F = &R.curve().field();
    const size_t r = H.dirs.size();
    if (r <= 1) return Laurent::constant(F, 1, len);
    std::vector<size_t> fwd(r), rev(r);
    for (size_t i = 0; i < r; ++i) fwd[i] = rev[r - 1 - i] = i;
    std::optional<Laurent> first;
    int agreed = 0;
    for (int tries = 0; tries < 200 && agreed < 3; ++tries) {
        EgPoint P = generic_point(R, S.divisor(), rng);
        size_t j = rng() % S.dim();
        EgFn f = S.basis_function(j);
        Laurent q;
        try {
            Laurent a = translated_chain(R, H, fwd, S.level(), f, P, len);
            Laurent b = translated_chain(R, H, rev, S.level(), f, P, len);
            if (a.is_zero() || a.valuation() != 0) continue;
            // h_i only lives in the Frobenius kernel, so the divisors are
            // translation invariant modulo s^p and nothing beyond is meaningful.
            q = (b / a).truncated(F->p());
        } catch (const std::domain_error&) {
            continue;
        }
        if (!first) first = q;
        else if (!(*first - q).is_zero())
            throw std::runtime_error("shuffle_factor: quotient depends on the point or the section");
        ++agreed;
    }
    if (!first) throw std::runtime_error("shuffle_factor: no admissible evaluation point");
    Laurent sh = sqrt_one(*first);
    if (!(sh * sh - *first).is_zero()) throw std::logic_error("shuffle_factor: square root check failed");
    return sh;
}

SectionComodule comodule_on_sections(const EndoRing& R, const SectionSpace& S, const SplitHData& H,
                                     std::mt19937_64& rng, size_t len) {
    const Curve& E = R.curve();
    const Field* F = &E.field();
    const uint32_t p = F->p();
    const size_t n = S.dim();
    if (H.dirs.size() != H.mult.size()) throw std::invalid_argument("comodule_on_sections: malformed splitting data");
    Laurent sh = shuffle_factor(R, S, H, rng, len);
    std::vector<size_t> fwd(H.dirs.size());
    for (size_t i = 0; i < fwd.size(); ++i) fwd[i] = i;

    const size_t npts = n + 4;
    Mat A(F, npts, n);
    std::vector<Mat> rhs(p, Mat(F, npts, n));
    size_t row = 0;
    for (int tries = 0; row < npts && tries < 1000; ++tries) {
        EgPoint P = generic_point(R, S.divisor(), rng);
        try {
            auto vals = S.eval_basis(P);
            std::vector<Laurent> series;
            for (size_t j = 0; j < n; ++j) series.push_back(sh * translated_chain(R, H, fwd, S.level(), S.basis_function(j), P, len));
            for (size_t j = 0; j < n; ++j) A(row, j) = vals[j].r;
            for (size_t j = 0; j < n; ++j) {
                if (!series[j].is_zero() && series[j].valuation() < 0)
                    throw std::logic_error("comodule_on_sections: translated section has a pole at a generic point");
                for (uint32_t e = 0; e < p; ++e) rhs[e](row, j) = series[j].coeff(e);
            }
            ++row;
        } catch (const std::domain_error&) {
        }
    }
    if (row < npts) throw std::runtime_error("comodule_on_sections: no admissible evaluation points");
    SectionComodule out;
    for (uint32_t e = 0; e < p; ++e) {
        Mat x;
        if (!solve(A, rhs[e], x))
            throw std::runtime_error("comodule_on_sections: result outside the basis span (basis too small)");
        out.coeff.push_back(x);
    }
    out.shuffle = sh;
    Mat X0 = out.coeff[1].scaled(F->neg(1));
    out.C = WittComodule::make(R.curve().field_ptr(), 1, 1, {X0});
    auto ring = out.C.universal_ring();
    for (size_t j = 0; j < n; ++j) {
        std::vector<uint32_t> ej(n, 0);
        ej[j] = 1;
        NilVec cv = out.C.coact(*ring, ej);
        for (uint32_t e = 0; e < p; ++e) {
            auto col = out.coeff[e].column(j);
            if (cv.coeff(NilRing::pack({e})) != col)
                throw std::runtime_error("comodule_on_sections: coaction is not of Witt normal form");
        }
    }
    return out;
}

Mat invariant_sections(const SectionComodule& C) {
    const auto& X = C.C.X();
    const size_t n = C.C.dim();
    const Field* F = X.front().F;
    Mat stack(F, n * X.size(), n);
    for (size_t a = 0; a < X.size(); ++a)
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) stack(a * n + i, j) = X[a](i, j);
    Mat K = nullspace(stack);
    auto ring = C.C.universal_ring();
    auto coact = C.C.coaction(*ring);
    for (size_t j = 0; j < n; ++j) {
        std::vector<uint32_t> ej(n, 0);
        ej[j] = 1;
        auto v = invariant_vector_full(C.C, ej);
        bool zero = std::all_of(v.begin(), v.end(), [](uint32_t c) { return c == 0; });
        if (zero) continue;
        if (!is_coinvariant(coact, v)) throw std::logic_error("invariant_sections: invariant_vector_full output not invariant");
        Mat one(F, n, 1);
        for (size_t i = 0; i < n; ++i) one(i, 0) = v[i];
        if (column_intersection(K, one).cols != 1)
            throw std::logic_error("invariant_sections: invariant vector outside the common kernel");
    }
    return K;
}

std::vector<uint32_t> invariant_section(const SectionComodule& C) {
    Mat K = invariant_sections(C);
    if (K.cols != 1) {
        std::ostringstream os;
        os << "invariant_section: invariant space has dimension " << K.cols << ", expected 1";
        throw std::runtime_error(os.str());
    }
    return K.column(0);
}

// ---------------------------------------------------------------------------
// Evaluation

EllipticFunction duplication_function(const CurvePtr& E, const Pt<Fq>& T) {
    if (!E->dbl(T).inf) throw std::invalid_argument("duplication_function: T is not 2-torsion");
    EDivisor D;
    for (const auto& S : E->points())
        if (E->dbl(S) == T) D.emplace_back(S, 1);
    if (D.size() != 4) throw std::runtime_error("duplication_function: halves of T are not all rational");
    D.emplace_back(T, -4);
    return elliptic_function_with_divisor(E, D);
}

EgFn rho2(const EndoRing& R, const TranslatedDivisor& D) {
    const EndoRing* Rp = &R;
    const auto rows = rows_of(*D.base);
    std::vector<EFn> fs;
    std::vector<int64_t> mult;
    for (size_t m = 0; m < rows.size(); ++m) {
        fs.push_back(duplication_function(R.curve_ptr(), D.T[m]).fn());
        mult.push_back(ppow(R.curve().field().p(), D.base->n[m]));
    }
    return [Rp, rows, fs, mult](const EgLaurent& P) {
        Laurent acc = Laurent::constant(&Rp->curve().field(), 1, Laurent::kMaxLength);
        for (size_t m = 0; m < rows.size(); ++m) acc = acc * ipow(fs[m](xi_of(*Rp, rows[m], P)), mult[m]);
        return acc;
    };
}

EgFn local_equation_at_zero(const EndoRing& R, const TranslatedDivisor& D) {
    const EndoRing* Rp = &R;
    std::vector<OMat> rows;
    std::vector<int64_t> mult;
    for (size_t m = 0; m < D.base->g(); ++m)
        if (D.T[m].inf) {
            rows.push_back(D.base->row(m));
            mult.push_back(ppow(R.curve().field().p(), D.base->n[m]));
        }
    return [Rp, rows, mult](const EgLaurent& P) {
        Laurent acc = Laurent::constant(&Rp->curve().field(), 1, Laurent::kMaxLength);
        for (size_t m = 0; m < rows.size(); ++m) {
            Pt<Laurent> Q = xi_of(*Rp, rows[m], P);
            if (Q.inf) throw std::domain_error("local equation: evaluation at the origin");
            acc = acc * ipow(-(Q.x / Q.y), mult[m]);
        }
        return acc;
    };
}

Fq ev0(const EndoRing& R, const TranslatedDivisor& D, uint32_t N, const EgFn& f, const std::vector<uint32_t>& c,
       size_t len) {
    const Curve& E = R.curve();
    EgLaurent line = formal_line(E, eg_zero(D.base->g()), c, len);
    Laurent u = local_equation_at_zero(R, D)(line);
    Laurent v = f(line) * ipow(u, N);
    if (v.is_zero()) {
        if (v.abs_precision() > 0) return E.field().zero();
        throw std::domain_error("ev0: value beyond the known precision");
    }
    if (v.valuation() < 0) throw std::domain_error("ev0: the product with u^N still has a pole at 0");
    return E.field().elem(v.coeff(0));
}

}  // namespace st
