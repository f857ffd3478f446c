#include "supertheta/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

namespace st {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

nlohmann::json field_json(const Fq& a) { return a.F->to_string(a.r); }

nlohmann::json point_json(const Pt<Fq>& P) {
    if (P.inf) return "O";
    return nlohmann::json::array({field_json(P.x), field_json(P.y)});
}

nlohmann::json eg_json(const EgPoint& x) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& P : x) out.push_back(point_json(P));
    return out;
}

nlohmann::json reps_json(const Field& F, const std::vector<uint32_t>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (uint32_t r : v) out.push_back(F.to_string(r));
    return out;
}

// Runs body, converting anything but ValidationError and PipelineError into a
// PipelineError tagged with the stage.
template <class Fn>
auto stage(const std::string& name, const nlohmann::json& partial, Fn&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const ValidationError&) {
        throw;
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what(), partial);
    }
}

template <class Fn>
auto validated(const std::string& what, Fn&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

std::vector<uint32_t> parse_reps(const Field& F, const std::vector<std::string>& v) {
    std::vector<uint32_t> out;
    for (const auto& s : v) out.push_back(parse_field_expr(F, s).r);
    return out;
}

// Divides by the first nonzero entry.
std::vector<Fq> normalize_first(const std::vector<Fq>& v) {
    for (const auto& x : v)
        if (!x.is_zero()) {
            Fq inv = x.inv();
            std::vector<Fq> out;
            for (const auto& y : v) out.push_back(y * inv);
            return out;
        }
    throw std::runtime_error("nullpoint is identically zero");
}

uint32_t field_degree(const std::vector<Fq>& v) {
    uint32_t d = 1;
    for (const auto& x : v) d = std::lcm(d, x.F->degree_of(x.r));
    return d;
}

}  // namespace

size_t Problem::h0() const {
    uint32_t len = K.length();
    if (len % 2) throw std::logic_error("Problem::h0: M(ker eta) has odd length");
    size_t h = 1;
    for (uint32_t i = 0; i < len / 2; ++i) h *= F->p();
    return h;
}

Problem build_problem(const ProblemConfig& cfg) {
    Problem P;
    const size_t g = cfg.g();
    P.F = validated("field", [&] { return Field::make(cfg.p, cfg.k, cfg.modulus); });
    const Field& F = *P.F;
    P.E = validated("curve", [&] {
        return Curve::make(P.F, parse_field_expr(F, cfg.curve_a), parse_field_expr(F, cfg.curve_b));
    });
    P.O = std::make_unique<Order>(cfg.cm);
    RatMap w;
    w.xn = parse_reps(F, cfg.w_map.xn);
    w.xd = parse_reps(F, cfg.w_map.xd);
    w.yn = parse_reps(F, cfg.w_map.yn);
    w.yd = parse_reps(F, cfg.w_map.yd);
    P.R = std::make_unique<EndoRing>(P.E, *P.O, w, EndoRing::frobenius_map(*P.E));
    validated("endomorphisms", [&] {
        std::mt19937_64 rng(cfg.seed);
        P.R->validate(rng, 100);
        return 0;
    });

    P.H = validated("H", [&] { return omat_parse(*P.O, cfg.H); });
    if (!omat_is_hermitian(*P.O, P.H)) throw ValidationError("H is not hermitian");
    for (const auto& d : cfg.divisors) {
        CDDivisor D;
        D.name = d.name;
        D.n = d.n;
        D.phi = validated("divisor " + d.name, [&] { return omat_parse(*P.O, d.phi); });
        if (!(D.induced_polarization(*P.O) == P.H))
            throw ValidationError("divisor " + d.name + " does not induce H (Phi^* Phi != H)");
        P.divisors.push_back(std::move(D));
    }
    P.reference = cfg.reference;

    P.W = WRing::make(P.F, cfg.n + 2);
    const WRing& W = *P.W;
    WMat psi_w(W, 2, 2);
    for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 2; ++j) psi_w(i, j) = parse_witt_expr(W, cfg.psi_w[i][j]);
    P.psi = validated("psi_w", [&] { return std::make_unique<PsiMap>(P.W, *P.O, psi_w); });
    P.psiH = P.psi->extend(P.H);
    P.K = validated("ker eta", [&] { return kernel_module(*P.psi, P.H, cfg.n); });

    P.S.W = P.W;
    P.S.g = g;
    P.S.n = cfg.n;
    for (const auto& gen : cfg.mh) {
        WVec v;
        for (const auto& e : gen) v.push_back(parse_witt_expr(W, e));
        P.S.gens.push_back(std::move(v));
    }
    for (const auto& v : P.S.gens)
        if (!P.K.contains(v)) throw ValidationError("M(H) generator outside M(ker eta)");
    if (!P.S.is_FV_stable()) throw ValidationError("M(H) is not stable under F and V");
    bool iso = stage("dieudonne", {}, [&] { return is_maximal_isotropic(P.S, P.K, P.psiH); });
    if (!iso) throw ValidationError("M(H) is not a maximal isotropic submodule of M(ker eta)");

    if (cfg.n != 1)
        throw PipelineError("dieudonne", "only ker(eta) inside E^g[F] (n = 1) is supported by the section stage");
    for (const auto& d : P.divisors)
        for (uint32_t e : d.n)
            if (e != 0) throw PipelineError("dieudonne", "divisor exponents n_m > 0 are not supported");
    if (witt_cover(P.S).a != 1)
        throw PipelineError("dieudonne", "M(H) must be cyclic (one Witt-cover generator)");
    for (const auto& d : P.divisors)
        P.subs.push_back(validated("divisor " + d.name, [&] { return kernel_in(*P.psi, d.phi, P.K); }));

    if (cfg.eval_direction.empty()) P.direction.assign(g, F.one());
    else P.direction = parse_reps(F, cfg.eval_direction);
    for (uint32_t c : P.direction)
        if (c == 0) throw ValidationError("eval_direction entries must be nonzero");
    return P;
}

std::vector<std::vector<uint32_t>> split_directions(const Problem& P) {
    const WRing& W = *P.W;
    const Field& F = *P.F;
    const size_t g = P.g();
    Splitting sp = splitting_sigma(P.subs, P.K);
    // Coordinates of the M(H) generator in the Howell generators of K, read
    // off on delta residues (n = 1: K is a k-vector space on the deltas).
    const auto& h = P.S.gens.front();
    Mat A(&F, g, sp.k_gens.size()), b(&F, g, 1);
    for (size_t m = 0; m < g; ++m) {
        for (size_t j = 0; j < sp.k_gens.size(); ++j) A(m, j) = W.residue(sp.k_gens[j][2 * m]).r;
        b(m, 0) = W.residue(h[2 * m]).r;
    }
    Mat c;
    if (!solve(A, b, c)) throw std::logic_error("split_directions: M(H) generator outside the span of M(ker eta)");
    std::vector<std::vector<uint32_t>> dirs(P.subs.size(), std::vector<uint32_t>(g, 0));
    for (size_t i = 0; i < P.subs.size(); ++i)
        for (size_t m = 0; m < g; ++m) {
            Fq acc = F.zero();
            for (size_t j = 0; j < sp.k_gens.size(); ++j)
                acc = acc + F.elem(c(j, 0)) * W.residue(sp.sigma[i][j][2 * m]);
            dirs[i][m] = acc.r;
        }
    return dirs;
}

Prepared prepare(const Problem& P, std::mt19937_64& rng, nlohmann::json* log) {
    nlohmann::json scratch;
    nlohmann::json& out = log ? *log : scratch;
    Prepared prep;
    prep.P = &P;
    const EndoRing& R = *P.R;
    const Curve& E = R.curve();
    const Field& F = *P.F;
    const size_t g = P.g();

    prep.frame = stage("frame", out, [&] { return torsion_frame(R, P.H, 4); });
    auto basis = two_torsion_basis(E, prep.frame);
    prep.normalizing = stage("normalize", out, [&] { return normalizing_point(R, P.divisors[P.reference], basis); });
    prep.D = TranslatedDivisor::make(R, P.divisors[P.reference], prep.normalizing);
    out["normalizing_point"] = eg_json(prep.normalizing);
    out["reference_divisor"] = P.divisors[P.reference].name;

    prep.LD = stage("sections", out, [&] { return SectionSpace::build(R, prep.D, 1, 1, P.h0(), rng); });
    out["dim_L(D)"] = prep.LD.dim();

    auto dirs = stage("splitting", out, [&] { return split_directions(P); });
    out["split_directions"] = nlohmann::json::array();
    for (const auto& d : dirs) out["split_directions"].push_back(reps_json(F, d));

    prep.relating.assign(P.divisors.size(), std::nullopt);
    out["relating_shifts"] = nlohmann::json::object();
    for (size_t i = 0; i < P.divisors.size(); ++i) {
        bool zero = std::all_of(dirs[i].begin(), dirs[i].end(), [](uint32_t c) { return c == 0; });
        if (zero) continue;  // h has no component along this divisor
        EgFn mult;
        if (i != P.reference) {
            stage("relating", out, [&] {
                int hits = 0;
                for (uint32_t bits = 0; bits < (1u << (2 * g)); ++bits) {
                    auto rf = relating_function(R, prep.LD, P.divisors[i], two_torsion_point(E, basis, bits), rng);
                    if (!rf) continue;
                    ++hits;
                    prep.relating[i] = std::move(rf);
                }
                if (hits != 1) {
                    std::ostringstream os;
                    os << "expected exactly one 2-torsion shift relating " << P.divisors[i].name << " to D, found "
                       << hits;
                    throw std::runtime_error(os.str());
                }
                return 0;
            });
            mult = prep.relating[i]->g;
            out["relating_shifts"][P.divisors[i].name] = eg_json(prep.relating[i]->shift);
        }
        prep.split.dirs.push_back(dirs[i]);
        prep.split.mult.push_back(mult);
        prep.split_divisors.push_back(i);
    }
    if (prep.split.dirs.empty()) throw PipelineError("splitting", "M(H) generator splits to zero", out);

    prep.comodule = stage("comodule", out, [&] { return comodule_on_sections(R, prep.LD, prep.split, rng); });
    out["comodule_X0_rank"] = rank(prep.comodule.C.X().front());
    prep.rho_H = stage("invariants", out, [&] { return invariant_section(prep.comodule); });
    out["rho_H"] = reps_json(F, prep.rho_H);
    return prep;
}

ThetaKernel::ThetaKernel(const Prepared& prep, size_t series_length)
    : R_(prep.P->R.get()), D_(&prep.D), g_(prep.P->g()), len_(series_length), dir_(prep.P->direction),
      zeta_(prep.frame.zeta) {
    const EndoRing& R = *R_;
    EgFn rho_H2 = multiply_argument(R, prep.LD.function(prep.rho_H), 2);
    EgFn r2 = rho2(R, prep.D);
    seed_ = [r2, rho_H2](const EgLaurent& P) { return r2(P) * rho_H2(P); };
    for (size_t i = 0; i < g_; ++i) {
        Ux_.push_back(level_function(R, prep.D, prep.frame.x[i], prep.frame.xh[i], 4));
        Uy_.push_back(level_function(R, prep.D, prep.frame.y[i], prep.frame.yh[i], 4));
    }
    // Warm the lazily built curve caches before any parallel use.
    R.curve().points();
    R.curve().formal_w();
}

Fq ThetaKernel::eval(size_t idx) const {
    const uint32_t a = static_cast<uint32_t>(idx & ((size_t(1) << g_) - 1));
    const uint32_t b = static_cast<uint32_t>(idx >> g_);
    std::vector<const LevelElement*> word;
    for (size_t i = 0; i < g_; ++i)
        if ((b >> i) & 1) word.push_back(&Uy_[i]);
    for (size_t i = 0; i < g_; ++i)
        if ((a >> i) & 1) word.push_back(&Ux_[i]);
    EgFn f = level_action(*R_, word, seed_);
    // A direction along which some component of D contains the line fails
    // with a domain error; the fallbacks (1, g^j, ..., g^j) are deterministic.
    const Field& F = R_->curve().field();
    std::vector<uint32_t> dir = dir_;
    for (int attempt = 0;; ++attempt) {
        try {
            return ev0(*R_, *D_, 4, f, dir, len_);
        } catch (const std::domain_error&) {
            if (attempt >= 8) throw;
            for (size_t m = 1; m < g_; ++m) dir[m] = F.pow(F.generator(), attempt + static_cast<int64_t>(m));
        }
    }
}

ThetaConstants theta_table_serial(const ThetaKernel& K) {
    ThetaConstants th;
    th.g = K.g();
    th.v.assign(K.size(), K.zeta().F->zero());
    for (size_t idx = 0; idx < K.size(); ++idx) th.v[idx] = K.eval(idx);
    return th;
}

ThetaConstants theta_table_parallel(const ThetaKernel& K) {
    ThetaConstants th;
    th.g = K.g();
    th.v.assign(K.size(), K.zeta().F->zero());
    const long n = static_cast<long>(K.size());
    std::vector<std::string> errors(K.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long idx = 0; idx < n; ++idx) {
        try {
            th.v[idx] = K.eval(static_cast<size_t>(idx));
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return th;
}

SquaresRoute squares_route(const Prepared& prep, std::mt19937_64& rng, size_t series_length, bool parallel) {
    const Problem& P = *prep.P;
    const EndoRing& R = *P.R;
    const Curve& E = R.curve();
    const Field& F = *P.F;
    const size_t g = P.g();
    SquaresRoute out;

    SectionSpace L2 = SectionSpace::build(R, prep.D, 2, 1, P.h0() * (size_t(1) << g), rng);
    SectionComodule C2 = comodule_on_sections(R, L2, prep.split, rng);
    Mat K = invariant_sections(C2);
    out.invariant_dim = K.cols;
    if (K.cols != (size_t(1) << g))
        throw std::runtime_error("level-2 invariant space has the wrong dimension");

    // Level 2: X_i = 2 x_i with halves x_i, Y_i = 2 y_i with halves y_i.
    std::vector<LevelElement> UX, UY;
    for (size_t i = 0; i < g; ++i) {
        UX.push_back(level_function(R, prep.D, eg_mul(E, prep.frame.x[i], 2), prep.frame.x[i], 2));
        UY.push_back(level_function(R, prep.D, eg_mul(E, prep.frame.y[i], 2), prep.frame.y[i], 2));
    }
    const size_t n = L2.dim();
    Mat stack(&F, g * n, K.cols);
    for (size_t i = 0; i < g; ++i) {
        Mat M(&F, n, n);
        for (size_t j = 0; j < n; ++j) {
            auto c = L2.coordinates(level_action(R, UY[i], L2.basis_function(j)), rng);
            for (size_t r = 0; r < n; ++r) M(r, j) = c[r];
        }
        Mat A = M * K - K;
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < K.cols; ++c) stack(i * n + r, c) = A(r, c);
    }
    Mat fixed = nullspace(stack);
    if (fixed.cols != 1) throw std::runtime_error("the U_Y-fixed invariant sections are not a line");
    out.s2 = (K * fixed).column(0);

    EgFn s2 = L2.function(out.s2);
    E.points();
    E.formal_w();
    out.q2.g = g;
    out.q2.level = 2;
    out.q2.q.assign(size_t(1) << g, F.zero());
    const long m = static_cast<long>(out.q2.q.size());
    std::vector<std::string> errors(out.q2.q.size());
    auto one = [&](long x) {
        std::vector<const LevelElement*> word;
        for (size_t i = 0; i < g; ++i)
            if ((x >> i) & 1) word.push_back(&UX[i]);
        try {
            out.q2.q[x] = ev0(R, prep.D, 2, level_action(R, word, s2), P.direction, series_length);
        } catch (const std::exception& e) {
            errors[x] = e.what();
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long x = 0; x < m; ++x) one(x);
    } else {
        for (long x = 0; x < m; ++x) one(x);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return out;
}

std::string characteristic_key(uint32_t a, uint32_t b, size_t g) {
    std::string s;
    for (size_t i = 0; i < g; ++i) s.push_back((a >> i) & 1 ? '1' : '0');
    s.push_back(',');
    for (size_t i = 0; i < g; ++i) s.push_back((b >> i) & 1 ? '1' : '0');
    return s;
}

RunResult run_pipeline(const ProblemConfig& cfg, const RunOptions& opt) {
    RunResult res;
    res.mode = opt.mode.value_or(cfg.mode);
    auto t_all = Clock::now();
    auto t = Clock::now();
    auto lap = [&](const std::string& name) {
        res.timings.emplace_back(name, seconds_since(t));
        t = Clock::now();
    };

    Problem P = build_problem(cfg);
    res.field = P.F;
    res.g = P.g();
    lap("validate");

    std::mt19937_64 rng(cfg.seed);
    nlohmann::json log;
    Prepared prep = prepare(P, rng, &log);
    lap("invariant_section");
    const Field& F = *P.F;
    res.diagnostics["dim_L(D)"] = prep.LD.dim();
    res.diagnostics["h0"] = P.h0();
    res.diagnostics["relating_shifts"] = log["relating_shifts"];
    res.diagnostics["split_directions"] = log["split_directions"];
    res.diagnostics["eval_direction"] = reps_json(F, P.direction);

    const Fq zeta = prep.frame.zeta;
    if (res.mode == RunMode::Full) {
        ThetaConstants th = stage("theta", log, [&] {
            ThetaKernel K(prep, cfg.series_length);
            return opt.parallel ? theta_table_parallel(K) : theta_table_serial(K);
        });
        lap("theta");
        ThetaNullpoint q4 = stage("theta", log, [&] { return inverse_fourier_theta(th, zeta); });
        ThetaConstants back = fourier_theta(q4, zeta);
        if (back.v != th.v) throw PipelineError("theta", "Fourier round trip failed", log);
        if (!q4.is_symmetric()) throw PipelineError("theta", "level-4 nullpoint is not symmetric", log);
        res.theta = stage("theta", log, [&] { return th.normalized(); });
        res.q = q4;
        res.q.q = normalize_first(q4.q);
        if (opt.dump_intermediates) {
            log["theta_raw"] = nlohmann::json::array();
            for (const auto& x : th.v) log["theta_raw"].push_back(field_json(x));
        }
    } else {
        SquaresRoute sq = stage("squares", log, [&] {
            return squares_route(prep, rng, cfg.series_length, opt.parallel);
        });
        lap("theta");
        res.diagnostics["level2_invariant_dim"] = sq.invariant_dim;
        log["s2"] = reps_json(F, sq.s2);
        ThetaConstants th2 = squares_from_level2(sq.q2);
        res.theta = stage("squares", log, [&] { return th2.normalized(); });
        res.q = sq.q2;
        res.q.q = normalize_first(sq.q2.q);
    }
    res.profile = vanishing_profile(res.theta);
    for (uint32_t a = 0; a < (1u << res.g); ++a)
        for (uint32_t b = 0; b < (1u << res.g); ++b)
            if (ThetaConstants::parity(a, b) && !res.theta.at(a, b).is_zero())
                throw PipelineError("theta", "an odd characteristic does not vanish", log);
    res.theta_field_degree = field_degree(res.theta.v);

    if (res.g == 2) {
        ThetaConstants sq = res.theta.squares ? res.theta : res.theta.squared();
        try {
            RosenhainResult rr;
            rr.lambda = rosenhain_g2(sq);
            rr.curve = rosenhain_curve(rr.lambda);
            try {
                rr.lpoly = l_polynomial(rr.curve);
                rr.supersingular = is_supersingular(*rr.lpoly);
            } catch (const std::runtime_error& e) {
                rr.note = e.what();
            }
            res.rosenhain = std::move(rr);
        } catch (const std::runtime_error& e) {
            res.rosenhain_note = e.what();
        }
        lap("rosenhain");
    } else {
        res.rosenhain_note = "Rosenhain invariants are only produced for g = 2";
    }
    res.timings.emplace_back("total", seconds_since(t_all));
    if (opt.dump_intermediates) res.intermediates = log;
    return res;
}

nlohmann::json result_to_json(const ProblemConfig& cfg, const RunResult& r, bool with_timings) {
    using nlohmann::json;
    json out;
    out["config"] = cfg.source;
    out["mode"] = to_string(r.mode);
    out["g"] = r.g;
    out["field"] = {{"p", cfg.p}, {"k", cfg.k}, {"element_format", "power-basis coordinates, constant term first"}};

    json q;
    q["level"] = r.q.level;
    q["values"] = json::object();
    for (size_t i = 0; i < r.q.q.size(); ++i) {
        auto v = zn_vector(i, r.g, r.q.level);
        std::string key;
        for (size_t j = 0; j < v.size(); ++j) key += (j ? "," : "") + std::to_string(v[j]);
        q["values"][key] = field_json(r.q.q[i]);
    }
    out["q"] = q;

    json th;
    th["squares"] = r.theta.squares;
    th["normalization"] = "divided by the first nonzero even entry";
    th["values"] = json::object();
    for (uint32_t b = 0; b < (1u << r.g); ++b)
        for (uint32_t a = 0; a < (1u << r.g); ++a)
            th["values"][characteristic_key(a, b, r.g)] = field_json(r.theta.at(a, b));
    th["field_degree"] = r.theta_field_degree;
    out["theta"] = th;

    json prof;
    prof["odd_total"] = r.profile.odd_total;
    prof["odd_vanishing"] = json::array();
    prof["even_vanishing"] = json::array();
    for (const auto& [a, b] : r.profile.odd) prof["odd_vanishing"].push_back(characteristic_key(a, b, r.g));
    for (const auto& [a, b] : r.profile.even) prof["even_vanishing"].push_back(characteristic_key(a, b, r.g));
    out["vanishing"] = prof;

    if (r.rosenhain) {
        const auto& rr = *r.rosenhain;
        json ro;
        ro["lambda"] = json::array();
        for (const auto& l : rr.lambda) ro["lambda"].push_back(field_json(l));
        ro["curve"] = json::array();
        for (const auto& c : rr.curve.f) ro["curve"].push_back(field_json(c));
        ro["definition_degree"] = definition_degree(rr.curve);
        if (rr.lpoly) {
            ro["point_counts"] = {{"N1", rr.lpoly->N1}, {"N2", rr.lpoly->N2}};
            ro["l_polynomial"] = {{"c1", rr.lpoly->c1}, {"c2", rr.lpoly->c2}, {"q_degree", rr.lpoly->d}};
        }
        ro["supersingular"] = rr.supersingular ? json(*rr.supersingular) : json(nullptr);
        if (!rr.note.empty()) ro["note"] = rr.note;
        out["rosenhain"] = ro;
    } else {
        out["rosenhain"] = nullptr;
        out["rosenhain_note"] = r.rosenhain_note;
    }
    out["diagnostics"] = r.diagnostics;
    if (!r.intermediates.is_null()) out["intermediates"] = r.intermediates;
    if (with_timings) {
        json tj = json::object();
        for (const auto& [k, v] : r.timings) tj[k] = v;
        out["timings"] = tj;
    }
    return out;
}

}  // namespace st
