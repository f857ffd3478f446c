#include "supertheta/ffield.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace st {

namespace fp_poly {

using Poly = std::vector<uint32_t>;

static void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

static Poly mod(Poly a, const Poly& f, uint32_t p) {
    trim(a);
    const size_t df = f.size() - 1;
    const uint64_t lead_inv = [&] {
        uint64_t r = 1, b = f.back() % p, e = p - 2;
        while (e) {
            if (e & 1) r = r * b % p;
            b = b * b % p;
            e >>= 1;
        }
        return r;
    }();
    while (a.size() > df) {
        uint64_t c = a.back() * lead_inv % p;
        size_t shift = a.size() - 1 - df;
        for (size_t i = 0; i <= df; ++i)
            a[shift + i] = static_cast<uint32_t>((a[shift + i] + (p - c) * f[i]) % p);
        trim(a);
    }
    return a;
}

static Poly mulmod(const Poly& a, const Poly& b, const Poly& f, uint32_t p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            c[i + j] = static_cast<uint32_t>((c[i + j] + uint64_t(a[i]) * b[j]) % p);
    return mod(std::move(c), f, p);
}

static Poly powmod(Poly a, uint64_t e, const Poly& f, uint32_t p) {
    Poly r{1};
    a = mod(a, f, p);
    while (e) {
        if (e & 1) r = mulmod(r, a, f, p);
        a = mulmod(a, a, f, p);
        e >>= 1;
    }
    return r;
}

static Poly gcd(Poly a, Poly b, uint32_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

bool is_irreducible(const std::vector<uint32_t>& f_in, uint32_t p) {
    Poly f = f_in;
    trim(f);
    if (f.size() < 2) return false;
    const size_t k = f.size() - 1;
    if (k == 1) return true;
    // x^(p^i) - x must be coprime to f for i <= k/2, and x^(p^k) = x mod f.
    Poly x{0, 1};
    Poly xp = x;
    for (size_t i = 1; i <= k; ++i) {
        xp = powmod(xp, p, f, p);
        if (i <= k / 2) {
            Poly d = xp;
            d.resize(std::max<size_t>(d.size(), 2), 0);
            d[1] = (d[1] + p - 1) % p;
            trim(d);
            Poly g = gcd(f, d, p);
            if (g.size() > 1) return false;
        }
    }
    Poly d = xp;
    d.resize(std::max<size_t>(d.size(), 2), 0);
    d[1] = (d[1] + p - 1) % p;
    trim(d);
    return d.empty();
}

}  // namespace fp_poly

namespace {

bool is_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<uint64_t> prime_factors(uint64_t n) {
    std::vector<uint64_t> out;
    for (uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

}  // namespace

std::shared_ptr<const Field> Field::make(uint32_t p, uint32_t k, std::vector<uint32_t> modulus) {
    if (p == 2) throw std::invalid_argument("characteristic 2 is not supported");
    if (!is_prime(p)) throw std::invalid_argument("field characteristic must be an odd prime");
    if (k == 0) throw std::invalid_argument("extension degree must be positive");
    uint64_t q = 1;
    for (uint32_t i = 0; i < k; ++i) {
        q *= p;
        if (q > (1ull << 26)) throw std::invalid_argument("field too large for table arithmetic");
    }
    if (modulus.empty()) {
        // Lexicographic search over monic polynomials x^k + c_{k-1}x^{k-1} + ... + c_0,
        // ordered by the integer sum c_i p^i.
        std::vector<uint32_t> f(k + 1, 0);
        f[k] = 1;
        bool found = false;
        for (uint64_t idx = 0; idx < q && !found; ++idx) {
            uint64_t t = idx;
            for (uint32_t i = 0; i < k; ++i) {
                f[i] = static_cast<uint32_t>(t % p);
                t /= p;
            }
            if (fp_poly::is_irreducible(f, p)) found = true;
        }
        if (!found) throw std::logic_error("no irreducible polynomial found");
        modulus = f;
    } else {
        for (auto& c : modulus) c %= p;
        fp_poly::trim(modulus);
        if (modulus.size() != k + 1) throw std::invalid_argument("modulus degree does not match k");
        if (modulus.back() != 1) throw std::invalid_argument("modulus must be monic");
        if (!fp_poly::is_irreducible(modulus, p)) throw std::invalid_argument("modulus is reducible");
    }

    auto F = std::shared_ptr<Field>(new Field());
    F->p_ = p;
    F->k_ = k;
    F->q_ = static_cast<uint32_t>(q);
    F->qm1_ = F->q_ - 1;
    F->half_ = F->qm1_ / 2;
    F->modulus_ = modulus;

    auto to_index = [&](const fp_poly::Poly& a) {
        uint64_t idx = 0, w = 1;
        for (size_t i = 0; i < k; ++i) {
            if (i < a.size()) idx += a[i] * w;
            w *= p;
        }
        return static_cast<uint32_t>(idx);
    };
    auto from_index = [&](uint64_t idx) {
        fp_poly::Poly a(k, 0);
        for (size_t i = 0; i < k; ++i) {
            a[i] = static_cast<uint32_t>(idx % p);
            idx /= p;
        }
        fp_poly::trim(a);
        return a;
    };

    // Smallest primitive element by index.
    const auto factors = prime_factors(q - 1);
    fp_poly::Poly gen;
    for (uint64_t idx = 2; idx < q; ++idx) {
        fp_poly::Poly g = from_index(idx);
        bool primitive = true;
        for (auto l : factors) {
            fp_poly::Poly t = fp_poly::powmod(g, (q - 1) / l, modulus, p);
            if (t.size() == 1 && t[0] == 1) {
                primitive = false;
                break;
            }
        }
        if (primitive) {
            gen = g;
            break;
        }
    }
    if (q == 3) gen = {2};
    if (gen.empty()) throw std::logic_error("no primitive element found");

    F->exp_idx_.assign(q - 1, 0);
    F->log_rep_.assign(q, 0);
    fp_poly::Poly cur{1};
    for (uint64_t e = 0; e + 1 < q; ++e) {
        uint32_t idx = to_index(cur);
        F->exp_idx_[e] = idx;
        if (F->log_rep_[idx] != 0) throw std::logic_error("generator order too small");
        F->log_rep_[idx] = static_cast<uint32_t>(e + 1);
        cur = fp_poly::mulmod(cur, gen, modulus, p);
    }
    F->zech_.assign(q - 1, 0);
    for (uint64_t d = 0; d + 1 < q; ++d) {
        uint32_t idx = F->exp_idx_[d];
        uint32_t c0 = idx % p;
        uint32_t idx2 = idx - c0 + (c0 + 1) % p;
        F->zech_[d] = F->log_rep_[idx2];
    }
    return F;
}

uint32_t Field::inv(uint32_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero in finite field");
    uint32_t l = a - 1;
    return (l == 0 ? 0 : qm1_ - l) + 1;
}

uint32_t Field::pow(uint32_t a, int64_t e) const {
    if (e == 0) return 1;
    if (a == 0) {
        if (e < 0) throw std::domain_error("negative power of zero");
        return 0;
    }
    int64_t m = static_cast<int64_t>(qm1_);
    int64_t l = static_cast<int64_t>(a - 1);
    int64_t ee = e % m;
    if (ee < 0) ee += m;
    return static_cast<uint32_t>((static_cast<unsigned __int128>(l) * ee) % m) + 1;
}

uint32_t Field::frob(uint32_t a, int t) const {
    if (a == 0) return 0;
    int tt = t % static_cast<int>(k_);
    if (tt < 0) tt += static_cast<int>(k_);
    uint64_t e = 1;
    for (int i = 0; i < tt; ++i) e = e * p_ % qm1_;
    if (qm1_ == 1) return a;
    return static_cast<uint32_t>((uint64_t(a - 1) * e) % qm1_) + 1;
}

uint32_t Field::from_int(int64_t n) const {
    int64_t m = n % static_cast<int64_t>(p_);
    if (m < 0) m += p_;
    return log_rep_[static_cast<uint32_t>(m)];
}

std::vector<uint32_t> Field::coords(uint32_t a) const {
    uint32_t idx = index_of(a);
    std::vector<uint32_t> c(k_);
    for (uint32_t i = 0; i < k_; ++i) {
        c[i] = idx % p_;
        idx /= p_;
    }
    return c;
}

uint32_t Field::from_coords(const std::vector<uint32_t>& c) const {
    if (c.size() > k_) throw std::invalid_argument("too many coordinates for field element");
    uint64_t idx = 0, w = 1;
    for (size_t i = 0; i < c.size(); ++i) {
        idx += (c[i] % p_) * w;
        w *= p_;
    }
    return log_rep_[idx];
}

uint32_t Field::sqrt(uint32_t a) const {
    if (a == 0) return 0;
    if (!is_square(a)) throw std::domain_error("no square root: element is a non-residue");
    uint32_t l = (a - 1) / 2;
    uint32_t r1 = l + 1;
    uint32_t r2 = neg(r1);
    auto c1 = coords(r1), c2 = coords(r2);
    return std::lexicographical_compare(c2.begin(), c2.end(), c1.begin(), c1.end()) ? r2 : r1;
}

bool Field::in_subfield(uint32_t a, uint32_t d) const {
    if (d == 0 || k_ % d != 0) return false;
    return frob(a, static_cast<int>(d)) == a;
}

uint32_t Field::degree_of(uint32_t a) const {
    for (uint32_t d = 1; d <= k_; ++d)
        if (k_ % d == 0 && in_subfield(a, d)) return d;
    return k_;
}

uint32_t Field::root_of_unity(uint32_t n) const {
    if (n == 0 || qm1_ % n != 0) throw std::domain_error("field has no root of unity of that order");
    return (qm1_ / n) % qm1_ + 1;
}

std::string Field::to_string(uint32_t a) const {
    auto c = coords(a);
    if (k_ == 1) return std::to_string(c[0]);
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << "]";
    return os.str();
}

Fq sqrt_in_field(const Fq& a) { return Fq(a.F, a.F->sqrt(a.r)); }

// ---------------------------------------------------------------------------

NilRing::NilRing(FieldPtr field, std::vector<std::string> names, std::vector<uint32_t> exps)
    : F_(std::move(field)), names_(std::move(names)), exps_(std::move(exps)) {
    if (exps_.size() > 8) throw std::invalid_argument("NilRing supports at most 8 generators");
    if (names_.size() != exps_.size()) throw std::invalid_argument("NilRing: names/exponents mismatch");
    strides_.resize(exps_.size());
    size_t s = 1;
    uint32_t nil = 1;
    for (size_t j = 0; j < exps_.size(); ++j) {
        if (exps_[j] < 1 || exps_[j] > 255)
            throw std::invalid_argument("NilRing: nilpotency exponent must lie in [1,255]");
        strides_[j] = s;
        if (s < (size_t(1) << 40)) s *= exps_[j];
        nil += exps_[j] - 1;
    }
    dense_ = s;
    nilp_ = nil;
}

uint64_t NilRing::pack(const std::vector<uint32_t>& e) {
    uint64_t m = 0;
    for (size_t j = 0; j < e.size(); ++j) m |= uint64_t(e[j] & 0xff) << (8 * j);
    return m;
}

bool NilRing::mono_mul(uint64_t a, uint64_t b, uint64_t& out) const {
    uint64_t s = a + b;  // exponents stay below 255+255 < 512 only if fields do not carry
    for (size_t j = 0; j < exps_.size(); ++j) {
        uint32_t ea = exp_of(a, j), eb = exp_of(b, j);
        if (ea + eb >= exps_[j]) return false;
    }
    out = s;
    return true;
}

size_t NilRing::dense_index(uint64_t mono) const {
    size_t idx = 0;
    for (size_t j = 0; j < exps_.size(); ++j) idx += exp_of(mono, j) * strides_[j];
    return idx;
}

Nil NilRing::constant(uint32_t c) const {
    Nil r(this);
    if (c != 0) r.terms.push_back({0, c});
    return r;
}

Nil NilRing::var(size_t j) const {
    Nil r(this);
    if (exps_.at(j) > 1) r.terms.push_back({uint64_t(1) << (8 * j), 1});
    return r;
}

Nil NilRing::monomial(const std::vector<uint32_t>& e, uint32_t c) const {
    Nil r(this);
    for (size_t j = 0; j < e.size(); ++j)
        if (e[j] >= exps_.at(j)) return r;
    if (c != 0) r.terms.push_back({pack(e), c});
    return r;
}

std::string NilRing::to_string(const Nil& a) const {
    if (a.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : a.terms) {
        if (!first) os << " + ";
        first = false;
        os << F_->to_string(c);
        for (size_t j = 0; j < exps_.size(); ++j) {
            uint32_t e = exp_of(m, j);
            if (e == 0) continue;
            os << "*" << names_[j];
            if (e > 1) os << "^" << e;
        }
    }
    return os.str();
}

uint32_t Nil::constant() const {
    if (!terms.empty() && terms.front().first == 0) return terms.front().second;
    return 0;
}

uint32_t Nil::coeff(uint64_t mono) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), std::make_pair(mono, uint32_t(0)));
    if (it != terms.end() && it->first == mono) return it->second;
    return 0;
}

static Nil merge(const Nil& a, const Nil& b, bool negate_b) {
    const Field& F = a.R->field();
    Nil r(a.R);
    r.terms.reserve(a.terms.size() + b.terms.size());
    size_t i = 0, j = 0;
    while (i < a.terms.size() || j < b.terms.size()) {
        if (j == b.terms.size() || (i < a.terms.size() && a.terms[i].first < b.terms[j].first)) {
            r.terms.push_back(a.terms[i++]);
        } else {
            uint32_t cb = negate_b ? F.neg(b.terms[j].second) : b.terms[j].second;
            if (i < a.terms.size() && a.terms[i].first == b.terms[j].first) {
                uint32_t c = F.add(a.terms[i].second, cb);
                if (c) r.terms.push_back({a.terms[i].first, c});
                ++i;
            } else {
                r.terms.push_back({b.terms[j].first, cb});
            }
            ++j;
        }
    }
    return r;
}

Nil Nil::operator+(const Nil& o) const { return merge(*this, o, false); }
Nil Nil::operator-(const Nil& o) const { return merge(*this, o, true); }

Nil Nil::operator-() const {
    Nil r = *this;
    for (auto& t : r.terms) t.second = R->field().neg(t.second);
    return r;
}

Nil Nil::scale(uint32_t c) const {
    Nil r(R);
    if (c == 0) return r;
    r.terms = terms;
    for (auto& t : r.terms) t.second = R->field().mul(t.second, c);
    return r;
}

Nil Nil::operator*(const Nil& o) const {
    const Field& F = R->field();
    Nil r(R);
    if (terms.empty() || o.terms.empty()) return r;
    if (terms.size() == 1 && terms[0].first == 0) return o.scale(terms[0].second);
    if (o.terms.size() == 1 && o.terms[0].first == 0) return scale(o.terms[0].second);
    const size_t dense = R->dense_size();
    if (dense <= (size_t(1) << 22)) {
        thread_local std::vector<uint32_t> acc;
        thread_local std::vector<uint64_t> monos;
        thread_local std::vector<uint8_t> seen;
        if (acc.size() < dense) {
            acc.assign(dense, 0);
            seen.assign(dense, 0);
            monos.resize(dense);
        }
        std::vector<size_t> touched;
        for (const auto& [ma, ca] : terms) {
            for (const auto& [mb, cb] : o.terms) {
                uint64_t m;
                if (!R->mono_mul(ma, mb, m)) continue;
                size_t idx = R->dense_index(m);
                if (!seen[idx]) {
                    seen[idx] = 1;
                    monos[idx] = m;
                    touched.push_back(idx);
                }
                acc[idx] = F.add(acc[idx], F.mul(ca, cb));
            }
        }
        r.terms.reserve(touched.size());
        for (size_t idx : touched) {
            if (acc[idx]) r.terms.push_back({monos[idx], acc[idx]});
            acc[idx] = 0;
            seen[idx] = 0;
        }
        std::sort(r.terms.begin(), r.terms.end());
        return r;
    }
    std::map<uint64_t, uint32_t> acc;
    for (const auto& [ma, ca] : terms) {
        for (const auto& [mb, cb] : o.terms) {
            uint64_t m;
            if (!R->mono_mul(ma, mb, m)) continue;
            auto& slot = acc[m];
            slot = F.add(slot, F.mul(ca, cb));
        }
    }
    for (const auto& [m, c] : acc)
        if (c) r.terms.push_back({m, c});
    return r;
}

Nil Nil::inv() const {
    uint32_t c = constant();
    if (c == 0) throw std::domain_error("NilRing element is not a unit");
    const Field& F = R->field();
    uint32_t ci = F.inv(c);
    // u = c(1 + nu); u^{-1} = c^{-1} sum (-nu)^k, finite since nu is nilpotent.
    Nil nu = scale(ci) - R->one();
    Nil mnu = -nu;
    Nil term = R->one();
    Nil sum = R->one();
    for (uint32_t k = 1; k <= R->nilpotency(); ++k) {
        term = term * mnu;
        if (term.is_zero()) break;
        sum += term;
    }
    return sum.scale(ci);
}

Nil Nil::pow(uint64_t e) const {
    Nil r = R->one();
    Nil b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

Nil nilring_unit_sqrt(const Nil& u) {
    const NilRing& R = *u.R;
    const Field& F = R.field();
    uint32_t c = u.constant();
    if (c == 0) throw std::domain_error("square root of a non-unit in NilRing");
    uint32_t rc = F.sqrt(c);
    Nil r = R.constant(rc);
    const uint32_t half = F.inv(F.from_int(2));
    // Newton iteration r <- (r + u/r)/2 doubles the nilpotent precision each step.
    for (uint32_t it = 0; it < 64; ++it) {
        Nil next = (r + u * r.inv()).scale(half);
        if (next == r) return r;
        r = std::move(next);
    }
    throw std::logic_error("NilRing square root iteration did not stabilise");
}

}  // namespace st
