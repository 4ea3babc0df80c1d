#include "gfw/laurent.hpp"

#include <sstream>
#include <stdexcept>

namespace gfw {

LaurentPoly::LaurentPoly(const Scalar& constant) : ctx_(constant.ctx()) {
    if (!constant.is_zero()) coeffs_.emplace(0, constant);
}

LaurentPoly LaurentPoly::monomial(const Scalar& c, long e) {
    LaurentPoly p;
    p.ctx_ = c.ctx();
    if (!c.is_zero()) p.coeffs_.emplace(e, c);
    return p;
}

long LaurentPoly::min_degree() const {
    if (coeffs_.empty()) throw std::domain_error("LaurentPoly: zero has no degree");
    return coeffs_.begin()->first;
}

long LaurentPoly::max_degree() const {
    if (coeffs_.empty()) throw std::domain_error("LaurentPoly: zero has no degree");
    return coeffs_.rbegin()->first;
}

const Scalar& LaurentPoly::coeff(long e) const {
    static const Scalar dummy;
    auto it = coeffs_.find(e);
    if (it == coeffs_.end()) {
        if (!ctx_) throw std::logic_error("LaurentPoly::coeff on zero polynomial without context");
        static thread_local Scalar zero_cache;
        zero_cache = Scalar::zero(ctx_);
        return zero_cache;
    }
    return it->second;
}

void LaurentPoly::set_coeff(long e, const Scalar& c) {
    if (!ctx_) ctx_ = c.ctx();
    if (c.is_zero())
        coeffs_.erase(e);
    else
        coeffs_[e] = c;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
    LaurentPoly r = *this;
    if (!r.ctx_) r.ctx_ = o.ctx_;
    for (const auto& [e, c] : o.coeffs_) {
        auto it = r.coeffs_.find(e);
        if (it == r.coeffs_.end()) {
            r.coeffs_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) r.coeffs_.erase(it);
        }
    }
    return r;
}

LaurentPoly LaurentPoly::operator-() const {
    LaurentPoly r = *this;
    for (auto& [e, c] : r.coeffs_) c = -c;
    return r;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const { return *this + (-o); }

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
    LaurentPoly r;
    r.ctx_ = ctx_ ? ctx_ : o.ctx_;
    for (const auto& [e1, c1] : coeffs_) {
        for (const auto& [e2, c2] : o.coeffs_) {
            Scalar prod = c1 * c2;
            if (prod.is_zero()) continue;
            auto it = r.coeffs_.find(e1 + e2);
            if (it == r.coeffs_.end()) {
                r.coeffs_.emplace(e1 + e2, std::move(prod));
            } else {
                it->second += prod;
                if (it->second.is_zero()) r.coeffs_.erase(it);
            }
        }
    }
    return r;
}

LaurentPoly LaurentPoly::scaled(const Scalar& c) const {
    return *this * LaurentPoly(c);
}

bool LaurentPoly::operator==(const LaurentPoly& o) const {
    if (coeffs_.size() != o.coeffs_.size()) return false;
    auto it2 = o.coeffs_.begin();
    for (const auto& [e, c] : coeffs_) {
        if (e != it2->first || c != it2->second) return false;
        ++it2;
    }
    return true;
}

LaurentPoly LaurentPoly::substitute(const Scalar& c, long k) const {
    if (k < 1) throw std::invalid_argument("LaurentPoly::substitute: k must be >= 1");
    LaurentPoly r;
    r.ctx_ = ctx_;
    for (const auto& [e, co] : coeffs_) {
        Scalar nc = co * c.pow(e);
        if (!nc.is_zero()) r.coeffs_[e * k] = std::move(nc);
    }
    return r;
}

LaurentRational::LaurentRational(LaurentPoly num, LaurentPoly den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::invalid_argument("LaurentRational: zero denominator");
    normalize();
}

LaurentRational::LaurentRational(const LaurentPoly& num)
    : LaurentRational(num, LaurentPoly(Scalar::one(num.ctx() ? num.ctx() : ScalarCtxPtr()))) {}

LaurentRational LaurentRational::constant(const Scalar& c) {
    return LaurentRational(LaurentPoly(c), LaurentPoly(Scalar::one(c.ctx())));
}

void LaurentRational::normalize() {
    // Shift by powers of X so both num and den are genuine polynomials with
    // nonzero constant-or-higher support starting at 0 where possible.
    if (!num_.is_zero()) {
        long shift = std::min(num_.min_degree(), den_.min_degree());
        if (shift != 0) {
            LaurentPoly xshift = LaurentPoly::monomial(Scalar::one(den_.ctx()), -shift);
            num_ = num_ * xshift;
            den_ = den_ * xshift;
        }
    }
    // Scale so the top X-coefficient of the denominator is 1, when that
    // coefficient is invertible (it always is for the factors arising here).
    try {
        Scalar top = den_.coeff(den_.max_degree());
        Scalar inv = top.inverse();
        num_ = num_.scaled(inv);
        den_ = den_.scaled(inv);
    } catch (const std::domain_error&) {
        // Non-invertible leading coefficient: keep unscaled; equality testing
        // and arithmetic remain exact via cross-multiplication.
    }
}

LaurentRational LaurentRational::operator+(const LaurentRational& o) const {
    return LaurentRational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

LaurentRational LaurentRational::operator-() const {
    LaurentRational r = *this;
    r.num_ = -r.num_;
    return r;
}

LaurentRational LaurentRational::operator-(const LaurentRational& o) const {
    return *this + (-o);
}

LaurentRational LaurentRational::operator*(const LaurentRational& o) const {
    return LaurentRational(num_ * o.num_, den_ * o.den_);
}

LaurentRational LaurentRational::operator/(const LaurentRational& o) const {
    if (o.num_.is_zero()) throw std::domain_error("LaurentRational: division by zero");
    return LaurentRational(num_ * o.den_, den_ * o.num_);
}

bool LaurentRational::operator==(const LaurentRational& o) const {
    return num_ * o.den_ == o.num_ * den_;
}

LaurentRational LaurentRational::substitute(const Scalar& c, long k) const {
    return LaurentRational(num_.substitute(c, k), den_.substitute(c, k));
}

std::pair<Scalar, long> LaurentRational::lowest_degree_term() const {
    if (num_.is_zero())
        throw std::domain_error("LaurentRational::lowest_degree_term: zero function");
    // As a series in Y = X^{-1}: num = a_top X^dn (1 + O(Y)),
    // den = b_top X^dd (1 + O(Y)), so r = (a_top/b_top) Y^{dd-dn} (1 + O(Y)).
    const Scalar& atop = num_.coeff(num_.max_degree());
    const Scalar& btop = den_.coeff(den_.max_degree());
    Scalar coeff = atop * btop.inverse();
    return {coeff, den_.max_degree() - num_.max_degree()};
}

std::string LaurentRational::serialize() const {
    auto emit = [](const LaurentPoly& p) {
        std::ostringstream os;
        os << "{";
        bool first = true;
        for (const auto& [e, c] : p.coeffs()) {
            if (!first) os << ",";
            first = false;
            os << e << ":" << c.serialize();
        }
        os << "}";
        return os.str();
    };
    return "{num:" + emit(num_) + ",den:" + emit(den_) + "}";
}

}  // namespace gfw
