#include "tlhedge/payoff.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace tlhedge {

namespace {

// One-dimensional difference operator: integer weights at integer offsets,
// divided by divisor * h^order.
struct Stencil1d {
    std::vector<std::pair<int, double>> taps;
    double divisor = 1.0;
};

Stencil1d make_stencil(int order, bool one_sided) {
    switch (order) {
        case 0: return {{{0, 1.0}}, 1.0};
        case 1:
            if (one_sided) return {{{0, -3.0}, {1, 4.0}, {2, -1.0}}, 2.0};
            return {{{-1, -1.0}, {1, 1.0}}, 2.0};
        case 2:
            if (one_sided) return {{{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}, 1.0};
            return {{{-1, 1.0}, {0, -2.0}, {1, 1.0}}, 1.0};
        default: throw std::invalid_argument("unsupported derivative order");
    }
}

double fd_step(const FiniteDifference& fd, double coordinate) {
    return fd.step ? *fd.step : 1e-4 * (1.0 + std::abs(coordinate));
}

bool needs_one_sided(DomainKind domain, double coordinate, double h) {
    return domain == DomainKind::NonNegativeQuadrant && coordinate < 2.0 * h;
}

[[noreturn]] void not_finite(const std::string& name, double x, double y) {
    std::ostringstream os;
    os.precision(17);
    os << "payoff '" << name << "' is not finite at (" << x << ", " << y << ")";
    throw std::domain_error(os.str());
}

[[noreturn]] void not_finite(const std::string& name, double x) {
    std::ostringstream os;
    os.precision(17);
    os << "payoff '" << name << "' is not finite at " << x;
    throw std::domain_error(os.str());
}

void check_step(const FiniteDifference& fd) {
    if (fd.step && !(*fd.step > 0.0 && std::isfinite(*fd.step)))
        throw std::invalid_argument("finite-difference step must be positive");
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

// d^order/dx^order of x^n
double monomial_derivative(int n, int order, double x) {
    if (order > n) return 0.0;
    double c = 1.0;
    for (int i = 0; i < order; ++i) c *= n - i;
    return c * ipow(x, n - order);
}

// d^order/du^order of exp(-u^2/2)
double gaussian_derivative(int order, double u) {
    const double g = std::exp(-0.5 * u * u);
    switch (order) {
        case 0: return g;
        case 1: return -u * g;
        case 2: return (u * u - 1.0) * g;
        default: throw std::invalid_argument("unsupported derivative order");
    }
}

using AxisFn = std::function<double(int, double)>;

PayoffSpec separable(std::string name, double scale, AxisFn gx, AxisFn gy, DomainKind domain) {
    auto make = [=](Partial p) -> BivariateFn {
        const auto [ox, oy] = partial_orders(p);
        return [=](double x, double y) { return scale * gx(ox, x) * gy(oy, y); };
    };
    return PayoffSpec::analytic(std::move(name),
                                {make(Partial::F), make(Partial::D1), make(Partial::D2),
                                 make(Partial::D11), make(Partial::D22), make(Partial::D12),
                                 make(Partial::D112), make(Partial::D122), make(Partial::D1122)},
                                domain);
}

int require_nonneg_int(double v, std::string_view what) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 64.0)
        throw std::invalid_argument(std::string(what) + " must be a non-negative integer");
    return static_cast<int>(v);
}

void require_arity(std::string_view name, std::span<const double> p, std::size_t n) {
    if (p.size() != n) {
        std::ostringstream os;
        os << "payoff '" << name << "' expects " << n << " parameter(s), got " << p.size();
        throw std::invalid_argument(os.str());
    }
}

std::string format_name(std::string_view name, std::span<const double> p) {
    std::ostringstream os;
    os.precision(17);
    os << name;
    for (std::size_t i = 0; i < p.size(); ++i) os << (i == 0 ? ':' : ',') << p[i];
    return os.str();
}

}  // namespace

std::string_view to_string(DomainKind kind) {
    return kind == DomainKind::FullPlane ? "full_plane" : "nonnegative_quadrant";
}

DomainKind parse_domain_kind(std::string_view text) {
    if (text == "full_plane" || text == "full") return DomainKind::FullPlane;
    if (text == "nonnegative_quadrant" || text == "quadrant") return DomainKind::NonNegativeQuadrant;
    throw std::invalid_argument("unknown domain kind '" + std::string(text) + "'");
}

PayoffSpec PayoffSpec::analytic(std::string name, Derivatives d, DomainKind domain) {
    PayoffSpec spec;
    spec.name_ = std::move(name);
    spec.domain_ = domain;
    spec.source_ = Analytic{};
    spec.fns_ = {std::move(d.f),   std::move(d.d1),   std::move(d.d2),
                 std::move(d.d11), std::move(d.d22),  std::move(d.d12),
                 std::move(d.d112), std::move(d.d122), std::move(d.d1122)};
    for (const auto& fn : spec.fns_)
        if (!fn) throw std::invalid_argument("analytic payoff missing a derivative");
    return spec;
}

PayoffSpec PayoffSpec::finite_difference(std::string name, BivariateFn f, FiniteDifference source,
                                         DomainKind domain) {
    if (!f) throw std::invalid_argument("finite-difference payoff needs a function");
    check_step(source);
    PayoffSpec spec;
    spec.name_ = std::move(name);
    spec.domain_ = domain;
    spec.source_ = source;
    spec.fns_[0] = std::move(f);
    return spec;
}

PayoffSpec PayoffSpec::with_domain(DomainKind domain) const {
    PayoffSpec copy = *this;
    copy.domain_ = domain;
    return copy;
}

double PayoffSpec::eval(Partial which, double x, double y) const {
    const double value = std::holds_alternative<Analytic>(source_) || which == Partial::F
                             ? fns_[static_cast<std::size_t>(which)](x, y)
                             : stencil(which, x, y);
    if (!std::isfinite(value)) not_finite(name_, x, y);
    return value;
}

double PayoffSpec::stencil(Partial which, double x, double y) const {
    const auto& fd = std::get<FiniteDifference>(source_);
    const auto [ox, oy] = partial_orders(which);
    const double hx = fd_step(fd, x);
    const double hy = fd_step(fd, y);
    const Stencil1d sx = make_stencil(ox, needs_one_sided(domain_, x, hx));
    const Stencil1d sy = make_stencil(oy, needs_one_sided(domain_, y, hy));
    const auto& f = fns_[0];

    double outer = 0.0;
    for (const auto& [i, wx] : sx.taps) {
        const double xi = x + i * hx;
        double inner = 0.0;
        for (const auto& [j, wy] : sy.taps) {
            const double yj = y + j * hy;
            const double v = f(xi, yj);
            if (!std::isfinite(v)) not_finite(name_, xi, yj);
            inner += wy * v;
        }
        outer += wx * inner;
    }
    return outer / (sx.divisor * std::pow(hx, ox) * sy.divisor * std::pow(hy, oy));
}

UnivariatePayoffSpec UnivariatePayoffSpec::analytic(std::string name, UnivariateFn f,
                                                    UnivariateFn d1, UnivariateFn d2,
                                                    DomainKind domain) {
    if (!f || !d1 || !d2) throw std::invalid_argument("analytic payoff missing a derivative");
    UnivariatePayoffSpec spec;
    spec.name_ = std::move(name);
    spec.domain_ = domain;
    spec.fns_ = {std::move(f), std::move(d1), std::move(d2)};
    return spec;
}

UnivariatePayoffSpec UnivariatePayoffSpec::finite_difference(std::string name, UnivariateFn f,
                                                             FiniteDifference source,
                                                             DomainKind domain) {
    if (!f) throw std::invalid_argument("finite-difference payoff needs a function");
    check_step(source);
    UnivariatePayoffSpec spec;
    spec.name_ = std::move(name);
    spec.domain_ = domain;
    spec.source_ = source;
    spec.fns_[0] = std::move(f);
    return spec;
}

double UnivariatePayoffSpec::eval(int order, double x) const {
    if (order < 0 || order > 2) throw std::invalid_argument("unsupported derivative order");
    double value;
    if (order == 0 || std::holds_alternative<Analytic>(source_)) {
        value = fns_[static_cast<std::size_t>(order)](x);
    } else {
        const auto& fd = std::get<FiniteDifference>(source_);
        const double h = fd_step(fd, x);
        const Stencil1d s = make_stencil(order, needs_one_sided(domain_, x, h));
        double acc = 0.0;
        for (const auto& [i, w] : s.taps) {
            const double v = fns_[0](x + i * h);
            if (!std::isfinite(v)) not_finite(name_, x + i * h);
            acc += w * v;
        }
        value = acc / (s.divisor * std::pow(h, order));
    }
    if (!std::isfinite(value)) not_finite(name_, x);
    return value;
}

PayoffSpec embed_univariate(const UnivariatePayoffSpec& g) {
    auto zero = [](double, double) { return 0.0; };
    auto order = [g](int k) -> BivariateFn { return [g, k](double x, double) { return g.eval(k, x); }; };
    PayoffSpec spec = PayoffSpec::analytic(
        "univariate_embedded(" + g.name() + ")",
        {order(0), order(1), zero, order(2), zero, zero, zero, zero, zero}, g.domain());
    return spec;
}

PayoffSpec catalog_payoff(std::string_view name, std::span<const double> p, DomainKind domain) {
    const std::string label = format_name(name, p);
    if (name == "constant") {
        require_arity(name, p, 1);
        const double c = p[0];
        auto unit = [](int order, double) { return order == 0 ? 1.0 : 0.0; };
        return separable(label, c, unit, unit, domain);
    }
    if (name == "monomial") {
        require_arity(name, p, 2);
        const int i = require_nonneg_int(p[0], "monomial exponent i");
        const int j = require_nonneg_int(p[1], "monomial exponent j");
        return separable(
            label, 1.0, [i](int o, double x) { return monomial_derivative(i, o, x); },
            [j](int o, double y) { return monomial_derivative(j, o, y); }, domain);
    }
    if (name == "gaussian_bump") {
        if (!p.empty()) require_arity(name, p, 2);
        const double s1 = p.empty() ? 0.0 : p[0];
        const double s2 = p.empty() ? 0.0 : p[1];
        return separable(
            label, 0.5 * std::numbers::inv_pi,
            [s1](int o, double x) { return gaussian_derivative(o, x - s1); },
            [s2](int o, double y) { return gaussian_derivative(o, y - s2); }, domain);
    }
    if (name == "product_exponential") {
        require_arity(name, p, 2);
        const double alpha = p[0];
        const double beta = p[1];
        return separable(
            label, 1.0, [alpha](int o, double x) { return ipow(alpha, o) * std::exp(alpha * x); },
            [beta](int o, double y) { return ipow(beta, o) * std::exp(beta * y); }, domain);
    }
    if (name == "univariate_embedded") {
        require_arity(name, p, 1);
        PayoffSpec spec = embed_univariate(univariate_catalog("power", p, domain));
        return spec;
    }
    throw std::invalid_argument("unknown catalog payoff '" + std::string(name) + "'");
}

UnivariatePayoffSpec univariate_catalog(std::string_view name, std::span<const double> p,
                                        DomainKind domain) {
    const std::string label = format_name(name, p);
    if (name == "constant") {
        require_arity(name, p, 1);
        const double c = p[0];
        return UnivariatePayoffSpec::analytic(
            label, [c](double) { return c; }, [](double) { return 0.0; },
            [](double) { return 0.0; }, domain);
    }
    if (name == "power") {
        require_arity(name, p, 1);
        const int n = require_nonneg_int(p[0], "power exponent");
        return UnivariatePayoffSpec::analytic(
            label, [n](double x) { return monomial_derivative(n, 0, x); },
            [n](double x) { return monomial_derivative(n, 1, x); },
            [n](double x) { return monomial_derivative(n, 2, x); }, domain);
    }
    if (name == "exponential") {
        require_arity(name, p, 1);
        const double a = p[0];
        return UnivariatePayoffSpec::analytic(
            label, [a](double x) { return std::exp(a * x); },
            [a](double x) { return a * std::exp(a * x); },
            [a](double x) { return a * a * std::exp(a * x); }, domain);
    }
    throw std::invalid_argument("unknown univariate payoff '" + std::string(name) + "'");
}

PayoffToken parse_payoff_token(std::string_view token) {
    PayoffToken out;
    const auto colon = token.find(':');
    out.name = std::string(token.substr(0, colon));
    if (out.name.empty()) throw std::invalid_argument("empty payoff token");
    if (colon == std::string_view::npos) return out;
    std::string_view rest = token.substr(colon + 1);
    while (true) {
        const auto comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
            throw std::invalid_argument("bad payoff parameter '" + std::string(item) + "'");
        out.parameters.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

PayoffSpec payoff_from_token(std::string_view token, DomainKind domain) {
    const PayoffToken t = parse_payoff_token(token);
    return catalog_payoff(t.name, t.parameters, domain);
}

PayoffSpec finite_difference_payoff(BivariateFn f, FiniteDifference source, DomainKind domain) {
    return PayoffSpec::finite_difference("finite_difference", std::move(f), source, domain);
}

}  // namespace tlhedge
