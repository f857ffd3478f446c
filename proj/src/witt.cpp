#include "supertheta/witt.hpp"

#include <mutex>
#include <stdexcept>
#include <string>

namespace st {

ZPoly ZPoly::var(size_t n, size_t j) {
    ZPoly r(n);
    std::vector<uint16_t> e(n, 0);
    e[j] = 1;
    r.terms[e] = 1;
    return r;
}

ZPoly ZPoly::constant(size_t n, const mpz_class& c) {
    ZPoly r(n);
    if (c != 0) r.terms[std::vector<uint16_t>(n, 0)] = c;
    return r;
}

ZPoly ZPoly::operator+(const ZPoly& o) const {
    ZPoly r = *this;
    for (const auto& [e, c] : o.terms) {
        auto& slot = r.terms[e];
        slot += c;
        if (slot == 0) r.terms.erase(e);
    }
    return r;
}

ZPoly ZPoly::operator-(const ZPoly& o) const { return *this + o.scaled(-1); }

ZPoly ZPoly::operator*(const ZPoly& o) const {
    ZPoly r(nvars);
    std::vector<uint16_t> e(nvars);
    for (const auto& [ea, ca] : terms)
        for (const auto& [eb, cb] : o.terms) {
            for (size_t i = 0; i < nvars; ++i) e[i] = static_cast<uint16_t>(ea[i] + eb[i]);
            r.terms[e] += ca * cb;
        }
    for (auto it = r.terms.begin(); it != r.terms.end();) {
        if (it->second == 0)
            it = r.terms.erase(it);
        else
            ++it;
    }
    return r;
}

ZPoly ZPoly::pow(uint64_t e) const {
    ZPoly result = constant(nvars, 1), base = *this;
    while (e) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

ZPoly ZPoly::scaled(const mpz_class& c) const {
    ZPoly r(nvars);
    if (c == 0) return r;
    for (const auto& [e, x] : terms) r.terms[e] = x * c;
    return r;
}

ZPoly ZPoly::divided(const mpz_class& c) const {
    ZPoly r(nvars);
    for (const auto& [e, x] : terms) {
        if (!mpz_divisible_p(x.get_mpz_t(), c.get_mpz_t()))
            throw std::logic_error("ZPoly: inexact division");
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), x.get_mpz_t(), c.get_mpz_t());
        r.terms[e] = q;
    }
    return r;
}

mpz_class ZPoly::eval(const std::vector<mpz_class>& x) const {
    mpz_class acc = 0;
    for (const auto& [e, c] : terms) {
        mpz_class t = c;
        for (size_t i = 0; i < nvars; ++i) {
            if (!e[i]) continue;
            mpz_class pw;
            mpz_pow_ui(pw.get_mpz_t(), x[i].get_mpz_t(), e[i]);
            t *= pw;
        }
        acc += t;
    }
    return acc;
}

namespace {

mpz_class ipow(uint32_t p, uint64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), p, e);
    return r;
}

ModPoly reduce_mod(const ZPoly& f, uint32_t p) {
    ModPoly m;
    m.nvars = f.nvars;
    mpz_class P = p;
    for (const auto& [e, c] : f.terms) {
        mpz_class r;
        mpz_fdiv_r(r.get_mpz_t(), c.get_mpz_t(), P.get_mpz_t());
        if (r == 0) continue;
        ModTerm t;
        t.coeff = static_cast<uint32_t>(r.get_ui());
        for (size_t i = 0; i < e.size(); ++i)
            if (e[i]) t.powers.emplace_back(static_cast<uint16_t>(i), e[i]);
        m.terms.push_back(std::move(t));
    }
    return m;
}

}  // namespace

ZPoly WittPolyTable::ghost(size_t i) const {
    const size_t nv = 2 * n_;
    ZPoly w(nv);
    for (size_t j = 0; j <= i; ++j)
        w = w + ZPoly::var(nv, j).pow(ipow(p_, i - j).get_ui()).scaled(ipow(p_, j));
    return w;
}

WittPolyTable::WittPolyTable(uint32_t p, uint32_t n) : p_(p), n_(n) {
    const size_t nv = 2 * n;
    std::vector<ZPoly> wx, wy;
    for (size_t i = 0; i < n; ++i) {
        ZPoly a(nv), b(nv);
        for (size_t j = 0; j <= i; ++j) {
            uint64_t e = ipow(p, i - j).get_ui();
            a = a + ZPoly::var(nv, j).pow(e).scaled(ipow(p, j));
            b = b + ZPoly::var(nv, n + j).pow(e).scaled(ipow(p, j));
        }
        wx.push_back(a);
        wy.push_back(b);
    }
    for (size_t i = 0; i < n; ++i) {
        ZPoly s = wx[i] + wy[i];
        ZPoly m = wx[i] * wy[i];
        for (size_t j = 0; j < i; ++j) {
            uint64_t e = ipow(p, i - j).get_ui();
            s = s - sum_z_[j].pow(e).scaled(ipow(p, j));
            m = m - prod_z_[j].pow(e).scaled(ipow(p, j));
        }
        sum_z_.push_back(s.divided(ipow(p, i)));
        prod_z_.push_back(m.divided(ipow(p, i)));
        sum_.push_back(reduce_mod(sum_z_.back(), p));
        prod_.push_back(reduce_mod(prod_z_.back(), p));
    }
}

std::shared_ptr<const WittPolyTable> WittPolyTable::get(uint32_t p, uint32_t n) {
    if (p < 3 || p % 2 == 0) throw std::invalid_argument("Witt tables need an odd prime");
    if (n == 0 || n > 6) throw std::invalid_argument("Witt length must be in [1, 6]");
    static std::mutex mu;
    static std::map<std::pair<uint32_t, uint32_t>, std::shared_ptr<const WittPolyTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, n}];
    if (!slot) slot.reset(new WittPolyTable(p, n));
    return slot;
}

std::vector<int64_t> witt_integer_coords(uint32_t p, size_t n, int64_t m) {
    std::vector<mpz_class> c;
    mpz_class M = static_cast<long>(m);
    std::vector<int64_t> out;
    for (size_t i = 0; i < n; ++i) {
        mpz_class rest = M;
        for (size_t j = 0; j < i; ++j) {
            mpz_class pw;
            mpz_pow_ui(pw.get_mpz_t(), c[j].get_mpz_t(), ipow(p, i - j).get_ui());
            rest -= ipow(p, j) * pw;
        }
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), rest.get_mpz_t(), ipow(p, i).get_mpz_t());
        c.push_back(q);
        mpz_class r;
        mpz_class P = p;
        mpz_fdiv_r(r.get_mpz_t(), q.get_mpz_t(), P.get_mpz_t());
        out.push_back(static_cast<int64_t>(r.get_si()));
    }
    return out;
}

AHSeries AHSeries::compute(uint32_t p, uint32_t N) {
    static std::mutex mu;
    static std::map<uint32_t, std::vector<mpq_class>> exact;
    std::vector<mpq_class> c;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& e = exact[p];
        if (e.empty()) e.push_back(1);
        while (e.size() <= N) {
            size_t k = e.size();
            mpq_class s = 0;
            for (uint64_t pi = 1; pi <= k; pi *= p) s += e[k - pi];
            e.push_back(-s / mpq_class(static_cast<long>(k)));
        }
        c.assign(e.begin(), e.begin() + N + 1);
    }
    AHSeries out;
    out.p = p;
    out.N = N;
    mpz_class P = p;
    for (const auto& x : c) {
        mpz_class num = x.get_num(), den = x.get_den();
        if (mpz_divisible_p(den.get_mpz_t(), P.get_mpz_t()))
            throw std::logic_error("Artin-Hasse coefficient is not p-integral");
        mpz_class inv, r;
        mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), P.get_mpz_t());
        r = num * inv;
        mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), P.get_mpz_t());
        out.c.push_back(static_cast<uint32_t>(r.get_ui()));
    }
    return out;
}

Nil ah_exp(const Nil& t) {
    if (t.constant() != 0) throw std::invalid_argument("ah_exp: argument is not nilpotent");
    const NilRing& R = *t.R;
    AHSeries s = AHSeries::compute(R.field().p(), R.nilpotency());
    Nil acc = R.one(), pw = R.one();
    for (uint32_t k = 1; k <= s.N; ++k) {
        pw = pw * t;
        if (pw.is_zero()) break;
        if (s.c[k]) acc += pw.scale(R.field().from_int(s.c[k]));
    }
    return acc;
}

Nil ah_exp_eval(const WittVec<Nil>& a) {
    if (a.empty()) throw std::invalid_argument("ah_exp_eval: empty Witt vector");
    Nil acc = a[0].R->one();
    for (const auto& x : a) acc = acc * ah_exp(x);
    return acc;
}

WittVec<Nil> witt_mul_padded(const WittVec<Nil>& a, const WittVec<Nil>& b, size_t L) {
    if (a.empty() || b.empty()) throw std::invalid_argument("witt_mul_padded: empty input");
    if (a.size() > L || b.size() > L) throw std::invalid_argument("witt_mul_padded: input longer than L");
    WittVec<Nil> x = a, y = b;
    x.resize(L, a[0].R->zero());
    y.resize(L, a[0].R->zero());
    return witt_mul(x, y);
}

Nil ah_pairing(const WittVec<Nil>& x, const WittVec<Nil>& y, uint32_t m, uint32_t n) {
    if (x.size() != n || y.size() != m) throw std::invalid_argument("ah_pairing: lengths do not match (m, n)");
    return ah_exp_eval(witt_mul_padded(x, y, m + n));
}

Mat ah_duality_matrix(FieldPtr F, uint32_t m, uint32_t n) {
    const uint32_t p = F->p();
    uint32_t pm = 1, pn = 1;
    for (uint32_t i = 0; i < m; ++i) pm *= p;
    for (uint32_t i = 0; i < n; ++i) pn *= p;
    std::vector<std::string> names;
    std::vector<uint32_t> ex;
    for (uint32_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i)), ex.push_back(pm);
    for (uint32_t i = 0; i < m; ++i) names.push_back("y" + std::to_string(i)), ex.push_back(pn);
    NilRing R(F, names, ex);
    WittVec<Nil> x, y;
    for (uint32_t i = 0; i < n; ++i) x.push_back(R.var(i));
    for (uint32_t i = 0; i < m; ++i) y.push_back(R.var(n + i));
    Nil v = ah_pairing(x, y, m, n);

    // both monomial sets have p^{mn} elements; index them by mixed radix
    size_t size = 1;
    for (uint32_t i = 0; i < m * n; ++i) size *= p;
    Mat M(F.get(), size, size);
    for (const auto& [mono, c] : v.terms) {
        size_t row = 0, col = 0, stride = 1;
        for (uint32_t i = 0; i < n; ++i, stride *= pm) row += NilRing::exp_of(mono, i) * stride;
        stride = 1;
        for (uint32_t i = 0; i < m; ++i, stride *= pn) col += NilRing::exp_of(mono, n + i) * stride;
        M(row, col) = c;
    }
    return M;
}

}  // namespace st
