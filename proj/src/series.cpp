#include "supertheta/series.hpp"

#include <algorithm>
#include <stdexcept>

namespace st {

void Laurent::normalize() {
    size_t lead = 0;
    while (lead < c_.size() && c_[lead] == 0) ++lead;
    if (lead == c_.size()) {
        v_ += static_cast<int64_t>(c_.size());
        c_.clear();
        return;
    }
    if (lead) {
        c_.erase(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(lead));
        v_ += static_cast<int64_t>(lead);
    }
    if (c_.size() > kMaxLength) c_.resize(kMaxLength);
}

Laurent Laurent::constant(const Field* F, uint32_t c, size_t len) {
    return monomial(F, c, 0, len);
}

Laurent Laurent::monomial(const Field* F, uint32_t c, int64_t v, size_t len) {
    Laurent r;
    r.F_ = F;
    r.v_ = v;
    r.c_.assign(std::max<size_t>(len, 1), 0);
    r.c_[0] = c;
    r.normalize();
    return r;
}

Laurent Laurent::zero(const Field* F, int64_t abs_prec) {
    Laurent r;
    r.F_ = F;
    r.v_ = abs_prec;
    return r;
}

Laurent Laurent::from_coeffs(const Field* F, int64_t v, std::vector<uint32_t> c) {
    Laurent r;
    r.F_ = F;
    r.v_ = v;
    r.c_ = std::move(c);
    r.normalize();
    return r;
}

uint32_t Laurent::coeff(int64_t e) const {
    if (e < v_) return 0;
    if (e >= abs_precision()) throw std::domain_error("Laurent series: coefficient beyond known precision");
    return c_[static_cast<size_t>(e - v_)];
}

Laurent Laurent::operator+(const Laurent& o) const {
    const int64_t ap = std::min(abs_precision(), o.abs_precision());
    const int64_t v = std::min(is_zero() ? ap : v_, o.is_zero() ? ap : o.v_);
    Laurent r;
    r.F_ = F_ ? F_ : o.F_;
    r.v_ = std::min(v, ap);
    if (ap <= r.v_) return zero(r.F_, ap);
    r.c_.assign(static_cast<size_t>(ap - r.v_), 0);
    for (size_t i = 0; i < c_.size(); ++i) {
        int64_t e = v_ + static_cast<int64_t>(i);
        if (e >= ap) break;
        r.c_[static_cast<size_t>(e - r.v_)] = c_[i];
    }
    const Field& F = *r.F_;
    for (size_t i = 0; i < o.c_.size(); ++i) {
        int64_t e = o.v_ + static_cast<int64_t>(i);
        if (e >= ap) break;
        auto& slot = r.c_[static_cast<size_t>(e - r.v_)];
        slot = F.add(slot, o.c_[i]);
    }
    r.normalize();
    return r;
}

Laurent Laurent::operator-() const {
    Laurent r = *this;
    for (auto& c : r.c_) c = F_->neg(c);
    return r;
}

Laurent Laurent::operator-(const Laurent& o) const { return *this + (-o); }

Laurent Laurent::operator*(const Laurent& o) const {
    const Field* F = F_ ? F_ : o.F_;
    if (is_zero() || o.is_zero()) {
        // O(s^a) times s^b(...) is O(s^(a+b)).
        return zero(F, v_ + o.v_);
    }
    const size_t L = std::min(c_.size(), o.c_.size());
    Laurent r;
    r.F_ = F;
    r.v_ = v_ + o.v_;
    r.c_.assign(L, 0);
    for (size_t i = 0; i < L; ++i) {
        if (c_[i] == 0) continue;
        const uint32_t a = c_[i];
        for (size_t j = 0; i + j < L; ++j) {
            if (o.c_[j] == 0) continue;
            r.c_[i + j] = F->add(r.c_[i + j], F->mul(a, o.c_[j]));
        }
    }
    r.normalize();
    return r;
}

Laurent Laurent::scale(uint32_t c) const {
    if (c == 0) return zero(F_, abs_precision());
    Laurent r = *this;
    for (auto& x : r.c_) x = F_->mul(x, c);
    return r;
}

Laurent Laurent::plus_constant(uint32_t c) const {
    if (c == 0 || abs_precision() <= 0) return *this;
    if (is_zero()) {
        Laurent r = constant(F_, c, static_cast<size_t>(abs_precision()));
        return r;
    }
    Laurent r = *this;
    if (v_ <= 0) {
        auto& slot = r.c_[static_cast<size_t>(-v_)];
        slot = F_->add(slot, c);
        r.normalize();
        return r;
    }
    std::vector<uint32_t> nc(static_cast<size_t>(abs_precision()), 0);
    nc[0] = c;
    std::copy(c_.begin(), c_.end(), nc.begin() + v_);
    r.v_ = 0;
    r.c_ = std::move(nc);
    r.normalize();
    return r;
}

Laurent Laurent::inv() const {
    if (is_zero()) throw std::domain_error("Laurent series: inverse of a series with no known nonzero term");
    const Field& F = *F_;
    const size_t L = c_.size();
    Laurent r;
    r.F_ = F_;
    r.v_ = -v_;
    r.c_.assign(L, 0);
    const uint32_t i0 = F.inv(c_[0]);
    r.c_[0] = i0;
    size_t d = L - 1;
    while (d > 0 && c_[d] == 0) --d;
    for (size_t n = 1; n < L; ++n) {
        uint32_t acc = 0;
        for (size_t k = 1; k <= std::min(n, d); ++k)
            if (c_[k] && r.c_[n - k]) acc = F.add(acc, F.mul(c_[k], r.c_[n - k]));
        r.c_[n] = F.neg(F.mul(acc, i0));
    }
    return r;
}

Laurent Laurent::pow(int64_t e) const {
    if (e < 0) return inv().pow(-e);
    Laurent r = constant(F_, 1, kMaxLength);
    Laurent b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

Laurent Laurent::frobenius_power(uint32_t t) const {
    if (t == 0) return *this;
    int64_t q = 1;
    for (uint32_t i = 0; i < t; ++i) q *= F_->p();
    if (is_zero()) return zero(F_, v_ * q);
    Laurent r;
    r.F_ = F_;
    r.v_ = v_ * q;
    size_t L = std::min<size_t>(c_.size() * static_cast<size_t>(q), kMaxLength);
    r.c_.assign(L, 0);
    for (size_t i = 0; i < c_.size(); ++i) {
        size_t pos = i * static_cast<size_t>(q);
        if (pos >= L) break;
        r.c_[pos] = F_->frob(c_[i], static_cast<int>(t));
    }
    r.normalize();
    return r;
}

Laurent Laurent::qth_root(uint32_t t) const {
    if (t == 0) return *this;
    int64_t q = 1;
    for (uint32_t i = 0; i < t; ++i) q *= F_->p();
    auto floor_div = [](int64_t a, int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    if (is_zero()) return zero(F_, floor_div(v_ + q - 1, q));
    if (v_ % q != 0) throw std::domain_error("Laurent series: valuation not divisible by q in q-th root");
    Laurent r;
    r.F_ = F_;
    r.v_ = v_ / q;
    const size_t L = (c_.size() + static_cast<size_t>(q) - 1) / static_cast<size_t>(q);
    r.c_.assign(L, 0);
    for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        if (i % static_cast<size_t>(q) != 0)
            throw std::domain_error("Laurent series: not a q-th power");
        r.c_[i / static_cast<size_t>(q)] = F_->frob(c_[i], -static_cast<int>(t));
    }
    r.normalize();
    return r;
}

Laurent Laurent::rescale_variable(uint32_t c) const {
    if (c == 0) throw std::invalid_argument("Laurent series: rescaling by zero");
    Laurent r = *this;
    uint32_t cp = F_->pow(c, v_);
    for (auto& x : r.c_) {
        x = F_->mul(x, cp);
        cp = F_->mul(cp, c);
    }
    return r;
}

Laurent Laurent::truncated(size_t len) const {
    Laurent r = *this;
    if (r.c_.size() > len) r.c_.resize(len);
    r.normalize();
    return r;
}

bool Laurent::equals(const Laurent& o) const {
    Laurent d = *this - o;
    return d.is_zero();
}

Laurent sqrt_one(const Laurent& a) {
    const Field& F = *a.field();
    if (a.is_zero() || a.valuation() != 0 || a.coeff(0) != 1)
        throw std::domain_error("sqrt_one: series does not have constant term 1");
    const auto& c = a.coeffs();
    const size_t L = c.size();
    std::vector<uint32_t> r(L, 0);
    r[0] = 1;
    const uint32_t half = F.inv(F.from_int(2));
    for (size_t n = 1; n < L; ++n) {
        uint32_t acc = c[n];
        for (size_t k = 1; k < n; ++k) acc = F.sub(acc, F.mul(r[k], r[n - k]));
        r[n] = F.mul(acc, half);
    }
    return Laurent::from_coeffs(&F, 0, std::move(r));
}

Nil substitute_series(const Laurent& f, const Nil& t) {
    const NilRing& R = *t.R;
    if (t.constant() != 0) throw std::invalid_argument("substitute_series: argument is not nilpotent");
    const int64_t need = static_cast<int64_t>(R.nilpotency());
    if (f.is_zero()) {
        if (f.abs_precision() < need) throw std::domain_error("substitute_series: insufficient precision");
        return R.zero();
    }
    if (f.valuation() < 0) throw std::domain_error("substitute_series: series has a pole");
    if (f.abs_precision() < need) throw std::domain_error("substitute_series: insufficient precision");
    // Horner from the top known degree below the nilpotency bound.
    Nil acc = R.zero();
    for (int64_t e = need - 1; e >= 0; --e) {
        acc = acc * t;
        uint32_t c = f.coeff(e);
        if (c) acc = acc + R.constant(c);
    }
    return acc;
}

}  // namespace st
