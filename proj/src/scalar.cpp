#include "gfw/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace gfw {

namespace {

// Polynomial division helpers over Q, polynomials as coefficient vectors
// (index = power), normalized so the top coefficient is nonzero.

void trim(std::vector<Rat>& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// Remainder of p modulo the monic polynomial m.
void reduce_mod(std::vector<Rat>& p, const std::vector<Rat>& m) {
    const long dm = static_cast<long>(m.size()) - 1;
    trim(p);
    while (static_cast<long>(p.size()) - 1 >= dm) {
        const long shift = static_cast<long>(p.size()) - 1 - dm;
        const Rat lead = p.back();
        for (long i = 0; i <= dm; ++i) p[shift + i] -= lead * m[i];
        trim(p);
    }
}

// Exact quotient of p by the monic polynomial m (p must be divisible).
std::vector<Rat> divide_exact(std::vector<Rat> p, const std::vector<Rat>& m) {
    const long dm = static_cast<long>(m.size()) - 1;
    trim(p);
    std::vector<Rat> q(std::max<long>(static_cast<long>(p.size()) - dm, 0));
    while (static_cast<long>(p.size()) - 1 >= dm) {
        const long shift = static_cast<long>(p.size()) - 1 - dm;
        const Rat lead = p.back();
        q[shift] = lead;
        for (long i = 0; i <= dm; ++i) p[shift + i] -= lead * m[i];
        trim(p);
    }
    if (!p.empty()) throw std::logic_error("divide_exact: nonzero remainder");
    return q;
}

// Cyclotomic polynomial Phi_n, by the recursion
// Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d, memoized.
const std::vector<Rat>& cyclotomic_poly(long n) {
    static std::map<long, std::vector<Rat>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<Rat> p(n + 1);
    p[0] = -1;
    p[n] = 1;
    for (long d = 1; d < n; ++d) {
        if (n % d == 0) p = divide_exact(std::move(p), cyclotomic_poly(d));
    }
    return cache.emplace(n, std::move(p)).first->second;
}

std::string rat_to_string(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

Rat rat_from_string(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    return r;
}

}  // namespace

ScalarContext::ScalarContext(long n, long q) : n_(n), q_(q) {
    if (n <= 0 || q <= 1) throw std::invalid_argument("ScalarContext: need n >= 1, q >= 2");
    phi_ = cyclotomic_poly(n);
    deg_ = static_cast<long>(phi_.size()) - 1;
}

long choose_cyclotomic_order(const std::vector<long>& orders, long p) {
    if (p <= 0) throw std::invalid_argument("choose_cyclotomic_order: p must be positive");
    long n = p;
    for (long o : orders) {
        if (o <= 0) throw std::invalid_argument("choose_cyclotomic_order: orders must be positive");
        n = std::lcm(n, o);
    }
    return n;
}

Scalar::Scalar(ScalarCtxPtr ctx, std::vector<Rat> a, std::vector<Rat> b)
    : ctx_(std::move(ctx)), a_(std::move(a)), b_(std::move(b)) {
    a_.resize(ctx_->degree());
    b_.resize(ctx_->degree());
}

void Scalar::check_compatible(const Scalar& o) const {
    if (!ctx_ || !o.ctx_) throw std::logic_error("Scalar: unset context");
    if (ctx_->n() != o.ctx_->n() || ctx_->q() != o.ctx_->q())
        throw std::logic_error("Scalar: mixed contexts");
}

Scalar Scalar::zero(const ScalarCtxPtr& ctx) { return Scalar(ctx, {}, {}); }

Scalar Scalar::one(const ScalarCtxPtr& ctx) { return integer(ctx, 1); }

Scalar Scalar::integer(const ScalarCtxPtr& ctx, long v) { return rational(ctx, Rat(v)); }

Scalar Scalar::rational(const ScalarCtxPtr& ctx, const Rat& v) {
    std::vector<Rat> a(ctx->degree());
    if (ctx->degree() > 0) a[0] = v;
    return Scalar(ctx, std::move(a), {});
}

Scalar Scalar::root_of_unity(const ScalarCtxPtr& ctx, long order, long power) {
    if (order <= 0 || ctx->n() % order != 0)
        throw std::invalid_argument("root_of_unity: order must divide the cyclotomic order");
    long e = ((power % order) + order) % order * (ctx->n() / order);
    std::vector<Rat> a(e + 1);
    a[e] = 1;
    reduce_mod(a, ctx->cyclotomic());
    return Scalar(ctx, std::move(a), {});
}

Scalar Scalar::root_combination(const ScalarCtxPtr& ctx, const std::vector<long long>& counts) {
    if (static_cast<long>(counts.size()) != ctx->n())
        throw std::invalid_argument("root_combination: need one multiplicity per exponent mod N");
    std::vector<Rat> a(counts.size());
    for (size_t e = 0; e < counts.size(); ++e)
        if (counts[e] != 0) a[e] = Rat(static_cast<long>(counts[e]));
    reduce_mod(a, ctx->cyclotomic());
    return Scalar(ctx, std::move(a), {});
}

Scalar Scalar::q_half_power(const ScalarCtxPtr& ctx, long j) {
    // q^(j/2) = q^k * s^r with j = 2k + r, r in {0, 1}; negative j uses
    // 1/sqrt(q) = s/q.
    long k = (j >= 0) ? j / 2 : -((-j + 1) / 2);
    long r = j - 2 * k;  // 0 or 1
    Rat c(1);
    Rat qq(ctx->q());
    for (long i = 0; i < std::abs(k); ++i) c *= qq;
    if (k < 0) c = 1 / c;
    std::vector<Rat> a(ctx->degree()), b(ctx->degree());
    if (r == 0) {
        a[0] = c;
    } else {
        b[0] = c;
    }
    return Scalar(ctx, std::move(a), std::move(b));
}

bool Scalar::is_zero() const {
    auto all0 = [](const std::vector<Rat>& v) {
        return std::all_of(v.begin(), v.end(), [](const Rat& r) { return r == 0; });
    };
    return all0(a_) && all0(b_);
}

Scalar Scalar::operator+(const Scalar& o) const {
    Scalar r = *this;
    r += o;
    return r;
}

Scalar Scalar::operator-(const Scalar& o) const {
    Scalar r = *this;
    r -= o;
    return r;
}

Scalar Scalar::operator-() const {
    Scalar r = *this;
    for (auto& c : r.a_) c = -c;
    for (auto& c : r.b_) c = -c;
    return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
    check_compatible(o);
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    for (size_t i = 0; i < b_.size(); ++i) b_[i] += o.b_[i];
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
    check_compatible(o);
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    for (size_t i = 0; i < b_.size(); ++i) b_[i] -= o.b_[i];
    return *this;
}

namespace {
// c += x*y (polynomial multiply-accumulate, no reduction).
void mul_acc(std::vector<Rat>& c, const std::vector<Rat>& x, const std::vector<Rat>& y) {
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        for (size_t j = 0; j < y.size(); ++j) {
            if (y[j] == 0) continue;
            c[i + j] += x[i] * y[j];
        }
    }
}
}  // namespace

Scalar Scalar::operator*(const Scalar& o) const {
    check_compatible(o);
    const long d = ctx_->degree();
    // (a1 + b1 s)(a2 + b2 s) = (a1 a2 + q b1 b2) + (a1 b2 + b1 a2) s.
    std::vector<Rat> a(2 * d), b(2 * d), qb(2 * d);
    mul_acc(a, a_, o.a_);
    mul_acc(qb, b_, o.b_);
    Rat qq(ctx_->q());
    for (size_t i = 0; i < qb.size(); ++i) a[i] += qq * qb[i];
    mul_acc(b, a_, o.b_);
    mul_acc(b, b_, o.a_);
    reduce_mod(a, ctx_->cyclotomic());
    reduce_mod(b, ctx_->cyclotomic());
    return Scalar(ctx_, std::move(a), std::move(b));
}

Scalar& Scalar::operator*=(const Scalar& o) {
    *this = *this * o;
    return *this;
}

bool Scalar::operator==(const Scalar& o) const {
    check_compatible(o);
    return a_ == o.a_ && b_ == o.b_;
}

Scalar Scalar::inverse() const {
    if (!ctx_) throw std::logic_error("Scalar: unset context");
    if (is_zero()) throw std::domain_error("Scalar::inverse: zero");
    const long d = ctx_->degree();
    const long dim = 2 * d;
    // Columns of the matrix are z * (basis element), basis = zeta^i and
    // zeta^i * s; solve M w = e_0.
    std::vector<std::vector<Rat>> m(dim, std::vector<Rat>(dim + 1));
    for (long col = 0; col < dim; ++col) {
        std::vector<Rat> ea(d), eb(d);
        if (col < d) ea[col] = 1; else eb[col - d] = 1;
        Scalar prod = *this * Scalar(ctx_, std::move(ea), std::move(eb));
        for (long row = 0; row < d; ++row) {
            m[row][col] = prod.a_[row];
            m[d + row][col] = prod.b_[row];
        }
    }
    m[0][dim] = 1;  // right-hand side: the element 1
    // Gaussian elimination with partial (first-nonzero) pivoting over Q.
    std::vector<long> where(dim, -1);
    long row = 0;
    for (long col = 0; col < dim && row < dim; ++col) {
        long piv = -1;
        for (long r = row; r < dim; ++r) {
            if (m[r][col] != 0) { piv = r; break; }
        }
        if (piv < 0) continue;
        std::swap(m[piv], m[row]);
        Rat inv = 1 / m[row][col];
        for (long c = col; c <= dim; ++c) m[row][c] *= inv;
        for (long r = 0; r < dim; ++r) {
            if (r == row || m[r][col] == 0) continue;
            Rat f = m[r][col];
            for (long c = col; c <= dim; ++c) m[r][c] -= f * m[row][c];
        }
        where[col] = row;
        ++row;
    }
    std::vector<Rat> wa(d), wb(d);
    for (long col = 0; col < dim; ++col) {
        Rat v = (where[col] >= 0) ? m[where[col]][dim] : Rat(0);
        if (col < d) wa[col] = v; else wb[col - d] = v;
    }
    // Consistency: verify the candidate actually inverts (catches the
    // inconsistent-system case where z is a zero divisor).
    Scalar w(ctx_, std::move(wa), std::move(wb));
    if (!(*this * w == one(ctx_)))
        throw std::domain_error("Scalar::inverse: element is a zero divisor");
    return w;
}

Scalar Scalar::pow(long e) const {
    Scalar base = (e < 0) ? inverse() : *this;
    unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
    Scalar r = one(ctx_);
    while (k) {
        if (k & 1) r *= base;
        base *= base;
        k >>= 1;
    }
    return r;
}

Scalar Scalar::galois(long m) const {
    const long n = ctx_->n();
    if (std::gcd(((m % n) + n) % n, n) != 1)
        throw std::invalid_argument("Scalar::galois: exponent not coprime to N");
    const long d = ctx_->degree();
    auto twist = [&](const std::vector<Rat>& src) {
        std::vector<Rat> out(n);
        for (long i = 0; i < d; ++i) {
            if (src[i] == 0) continue;
            long e = ((i * m) % n + n) % n;
            out[e] += src[i];
        }
        reduce_mod(out, ctx_->cyclotomic());
        return out;
    };
    return Scalar(ctx_, twist(a_), twist(b_));
}

std::complex<double> Scalar::to_complex() const {
    const double pi = 3.14159265358979323846;
    std::complex<double> z(0.0, 0.0), zs(0.0, 0.0);
    for (long i = 0; i < ctx_->degree(); ++i) {
        std::complex<double> zi = std::polar(1.0, 2.0 * pi * i / ctx_->n());
        if (a_[i] != 0) z += a_[i].get_d() * zi;
        if (b_[i] != 0) zs += b_[i].get_d() * zi;
    }
    return z + std::sqrt(static_cast<double>(ctx_->q())) * zs;
}

std::string Scalar::serialize() const {
    std::ostringstream os;
    os << "{n:" << ctx_->n() << ",q:" << ctx_->q() << ",a:[";
    for (size_t i = 0; i < a_.size(); ++i) os << (i ? "," : "") << rat_to_string(a_[i]);
    os << "],b:[";
    for (size_t i = 0; i < b_.size(); ++i) os << (i ? "," : "") << rat_to_string(b_[i]);
    os << "]}";
    return os.str();
}

Scalar Scalar::deserialize(const ScalarCtxPtr& ctx, const std::string& text) {
    auto need = [&](bool cond) {
        if (!cond) throw std::invalid_argument("Scalar::deserialize: malformed: " + text);
    };
    auto grab_long = [&](const std::string& key) {
        auto pos = text.find(key + ":");
        need(pos != std::string::npos);
        return std::stol(text.substr(pos + key.size() + 1));
    };
    auto grab_list = [&](const std::string& key) {
        auto pos = text.find(key + ":[");
        need(pos != std::string::npos);
        auto end = text.find(']', pos);
        need(end != std::string::npos);
        std::string body = text.substr(pos + key.size() + 2, end - (pos + key.size() + 2));
        std::vector<Rat> out;
        std::istringstream is(body);
        std::string tok;
        while (std::getline(is, tok, ',')) out.push_back(rat_from_string(tok));
        return out;
    };
    need(grab_long("n") == ctx->n());
    need(grab_long("q") == ctx->q());
    auto a = grab_list("a"), b = grab_list("b");
    need(static_cast<long>(a.size()) <= ctx->degree() &&
         static_cast<long>(b.size()) <= ctx->degree());
    return Scalar(ctx, std::move(a), std::move(b));
}

std::string Scalar::to_string() const {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const std::vector<Rat>& v, bool with_s) {
        for (size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0) continue;
            if (!first) os << " + ";
            first = false;
            os << rat_to_string(v[i]);
            if (i > 0) os << "*z^" << i;
            if (with_s) os << "*sqrt(" << ctx_->q() << ")";
        }
    };
    emit(a_, false);
    emit(b_, true);
    if (first) os << "0";
    return os.str();
}

}  // namespace gfw
