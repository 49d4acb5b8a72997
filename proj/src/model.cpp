#include "tlhedge/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "tlhedge/format.hpp"
#include "tlhedge/quadrature.hpp"

namespace tlhedge {

void ModelParams::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("model parameters: " + what); };
    if (!(spot1 > 0.0) || !(spot2 > 0.0) || !std::isfinite(spot1) || !std::isfinite(spot2))
        bad("spots must be positive and finite");
    for (const double v : {vol1, vol2}) {
        if (!std::isfinite(v) || v < 0.0) bad("volatilities must be finite and non-negative");
        if (v == 0.0 && !allow_zero_vol) bad("zero volatility requires the degenerate zero-vol mode");
    }
    if (!(std::abs(rho) <= 1.0)) bad("correlation must lie in [-1, 1]");
    if (!std::isfinite(rate)) bad("rate must be finite");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) bad("maturity must be positive");
}

double ModelParams::forward1() const { return spot1 * std::exp(rate * maturity); }
double ModelParams::forward2() const { return spot2 * std::exp(rate * maturity); }
double ModelParams::discount() const { return std::exp(-rate * maturity); }
double ModelParams::cross_moment() const {
    return forward1() * forward2() * std::exp(rho * vol1 * vol2 * maturity);
}

std::map<std::string, std::string> ModelParams::describe() const {
    return {{"spot1", format_double(spot1)}, {"spot2", format_double(spot2)},
            {"vol1", format_double(vol1)},   {"vol2", format_double(vol2)},
            {"rho", format_double(rho)},     {"rate", format_double(rate)},
            {"maturity", format_double(maturity)}};
}

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

// One factor of a product payoff.
enum class LegShape { Call, Put, Above, Below };

struct Leg {
    LegShape shape;
    double strike;
};

bool pays_above(LegShape s) { return s == LegShape::Call || s == LegShape::Above; }

double leg_on_support(const Leg& leg, double s) {
    switch (leg.shape) {
        case LegShape::Call: return s - leg.strike;
        case LegShape::Put: return leg.strike - s;
        default: return 1.0;
    }
}

std::pair<Leg, Leg> legs_of(SurfaceKind kind, double k1, double k2) {
    switch (kind) {
        case SurfaceKind::PP: return {{LegShape::Put, k1}, {LegShape::Put, k2}};
        case SurfaceKind::CC: return {{LegShape::Call, k1}, {LegShape::Call, k2}};
        case SurfaceKind::CP: return {{LegShape::Call, k1}, {LegShape::Put, k2}};
        case SurfaceKind::PC: return {{LegShape::Put, k1}, {LegShape::Call, k2}};
        case SurfaceKind::CorrCallDigital: return {{LegShape::Call, k1}, {LegShape::Above, k2}};
        case SurfaceKind::CorrPutDigital: return {{LegShape::Put, k1}, {LegShape::Below, k2}};
        case SurfaceKind::DigitalPP: return {{LegShape::Below, k1}, {LegShape::Below, k2}};
    }
    throw std::invalid_argument("unknown surface kind");
}

SurfaceKind kind_of(TloKind k) {
    switch (k) {
        case TloKind::CC: return SurfaceKind::CC;
        case TloKind::CP: return SurfaceKind::CP;
        case TloKind::PC: return SurfaceKind::PC;
        case TloKind::PP: return SurfaceKind::PP;
    }
    return SurfaceKind::PP;
}

// E[leg(S)] for S lognormal with mean `forward` and log-standard-deviation sd.
double leg_expectation(const Leg& leg, double forward, double sd) {
    const double k = leg.strike;
    if (k <= 0.0) {
        switch (leg.shape) {
            case LegShape::Call: return forward - k;
            case LegShape::Put: return 0.0;
            case LegShape::Above: return 1.0;
            case LegShape::Below: return 0.0;
        }
    }
    if (sd == 0.0) {
        switch (leg.shape) {
            case LegShape::Call: return positive_part(forward - k);
            case LegShape::Put: return positive_part(k - forward);
            case LegShape::Above: return forward > k ? 1.0 : 0.0;
            case LegShape::Below: return forward < k ? 1.0 : 0.0;
        }
    }
    const double d1 = (std::log(forward / k) + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    switch (leg.shape) {
        case LegShape::Call: return forward * normal_cdf(d1) - k * normal_cdf(d2);
        case LegShape::Put: return k * normal_cdf(-d2) - forward * normal_cdf(-d1);
        case LegShape::Above: return normal_cdf(d2);
        case LegShape::Below: return normal_cdf(-d2);
    }
    return 0.0;
}

// Per-asset terminal law S = F exp(-sd^2/2 + sd Z).
struct Marginal {
    double forward;
    double sd;
    double drift() const { return -0.5 * sd * sd; }
    double price(double z) const { return forward * std::exp(drift() + sd * z); }
    // Standardised threshold c with S > k <=> Z > c (sd > 0, k > 0).
    double threshold(double k) const { return (std::log(k / forward) - drift()) / sd; }
};

struct Interval {
    double lo;
    double hi;
    bool empty() const { return !(lo < hi); }
};

// Support of a leg in the standard normal coordinate z, where the leg's
// event is {z > c} for pays_above legs and {z < c} otherwise.
Interval leg_support(const Leg& leg, double c, double box) {
    if (pays_above(leg.shape)) return {std::max(c, -box), box};
    return {-box, std::min(c, box)};
}

double outer_threshold(const Leg& leg, const Marginal& m) {
    if (leg.strike <= 0.0) return -std::numeric_limits<double>::infinity();
    return m.threshold(leg.strike);
}

double expect_product_tensor(const ModelParams& p, const Leg& leg1, const Leg& leg2, const QuadratureOptions& o) {
    p.validate();
    const Marginal m1{p.forward1(), p.vol1 * std::sqrt(p.maturity)};
    const Marginal m2{p.forward2(), p.vol2 * std::sqrt(p.maturity)};
    if (m1.sd == 0.0 || m2.sd == 0.0)
        return leg_expectation(leg1, m1.forward, m1.sd) * leg_expectation(leg2, m2.forward, m2.sd);
    const double r = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    if (r == 0.0)
        throw NumericalError("degenerate correlation |rho| = 1: the tensor quadrature needs a non-singular "
                             "Cholesky factor; use the Monte Carlo pricer");
    if (leg2.strike <= 0.0 && !pays_above(leg2.shape)) return 0.0;

    const Interval outer = leg_support(leg1, outer_threshold(leg1, m1), o.box_sd);
    if (outer.empty()) return 0.0;
    const GaussLegendreRule& rule = gauss_legendre(o.nodes);
    const double c2 = leg2.strike <= 0.0 ? -std::numeric_limits<double>::infinity() : m2.threshold(leg2.strike);

    return integrate_gl(rule, outer.lo, outer.hi, [&](double z1) {
        const double v1 = leg_on_support(leg1, m1.price(z1));
        // S2 > k2  <=>  rho z1 + r z2 > c2
        const Interval inner = leg_support(leg2, (c2 - p.rho * z1) / r, o.box_sd);
        if (inner.empty()) return 0.0;
        const double base = m2.drift() + m2.sd * p.rho * z1;
        const double v2 = integrate_gl(rule, inner.lo, inner.hi, [&](double z2) {
            return normal_pdf(z2) * leg_on_support(leg2, m2.forward * std::exp(base + m2.sd * r * z2));
        });
        return normal_pdf(z1) * v1 * v2;
    });
}

double expect_product_conditional(const ModelParams& p, const Leg& leg1, const Leg& leg2,
                                  const QuadratureOptions& o) {
    p.validate();
    const Marginal m1{p.forward1(), p.vol1 * std::sqrt(p.maturity)};
    const Marginal m2{p.forward2(), p.vol2 * std::sqrt(p.maturity)};
    if (m1.sd == 0.0 || m2.sd == 0.0)
        return leg_expectation(leg1, m1.forward, m1.sd) * leg_expectation(leg2, m2.forward, m2.sd);
    const Interval outer = leg_support(leg1, outer_threshold(leg1, m1), o.box_sd);
    if (outer.empty()) return 0.0;
    const double r2 = std::max(0.0, 1.0 - p.rho * p.rho);
    const double sd_c = m2.sd * std::sqrt(r2);
    return integrate_gl(gauss_legendre(o.nodes), outer.lo, outer.hi, [&](double z1) {
        // S2 | z1 is lognormal with this mean and log-sd
        const double fwd_c = m2.forward * std::exp(m2.sd * p.rho * z1 - 0.5 * m2.sd * m2.sd * p.rho * p.rho);
        return normal_pdf(z1) * leg_on_support(leg1, m1.price(z1)) * leg_expectation(leg2, fwd_c, sd_c);
    });
}

double tlo_payoff(TloKind kind, double k1, double k2, double s1, double s2) {
    switch (kind) {
        case TloKind::CC: return positive_part(s1 - k1) * positive_part(s2 - k2);
        case TloKind::CP: return positive_part(s1 - k1) * positive_part(k2 - s2);
        case TloKind::PC: return positive_part(k1 - s1) * positive_part(s2 - k2);
        case TloKind::PP: return positive_part(k1 - s1) * positive_part(k2 - s2);
    }
    return 0.0;
}

struct RunningMoments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double v) {
        count += 1.0;
        const double delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    // Chan et al. pairwise combination
    void merge(const RunningMoments& o) {
        if (o.count == 0.0) return;
        const double n = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * o.count / n;
        m2 += o.m2 + delta * delta * count * o.count / n;
        count = n;
    }
    McEstimate estimate() const {
        const double var = count > 1.0 ? m2 / (count - 1.0) : 0.0;
        return {mean, std::sqrt(var / count)};
    }
};

// Draws correlated terminal prices batch by batch and feeds them to `visit`,
// which accumulates into per-payoff moments of the current batch.
template <class Visit>
std::vector<McEstimate> run_mc(const ModelParams& p, std::size_t payoffs, std::size_t paths, std::uint64_t seed,
                               Visit&& visit) {
    p.validate();
    if (paths < 1000) throw std::invalid_argument("Monte Carlo needs at least 1000 paths");
    const Marginal m1{p.forward1(), p.vol1 * std::sqrt(p.maturity)};
    const Marginal m2{p.forward2(), p.vol2 * std::sqrt(p.maturity)};
    const double r = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double to_unit = 0x1.0p-53;

    std::vector<RunningMoments> total(payoffs);
    std::vector<RunningMoments> batch(payoffs);
    const std::size_t batches = (paths + kMcBatchPaths - 1) / kMcBatchPaths;
    for (std::size_t b = 0; b < batches; ++b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(b)};
        std::mt19937_64 gen(seq);
        std::fill(batch.begin(), batch.end(), RunningMoments{});
        const std::size_t n = std::min(kMcBatchPaths, paths - b * kMcBatchPaths);
        for (std::size_t i = 0; i < n; ++i) {
            const double u1 = 1.0 - static_cast<double>(gen() >> 11) * to_unit;  // (0, 1]
            const double u2 = static_cast<double>(gen() >> 11) * to_unit;
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double z1 = radius * std::cos(two_pi * u2);
            const double zb = radius * std::sin(two_pi * u2);
            const double s1 = m1.price(z1);
            const double s2 = m2.price(p.rho * z1 + r * zb);
            visit(s1, s2, batch);
        }
        for (std::size_t k = 0; k < payoffs; ++k) total[k].merge(batch[k]);
    }
    std::vector<McEstimate> out;
    out.reserve(payoffs);
    for (const auto& t : total) out.push_back(t.estimate());
    return out;
}

}  // namespace

double price_vanilla(const ModelParams& params, const Instrument& vanilla) {
    params.validate();
    const double t = std::sqrt(params.maturity);
    auto marginal = [&](Asset a) {
        return a == Asset::First ? Marginal{params.forward1(), params.vol1 * t}
                                 : Marginal{params.forward2(), params.vol2 * t};
    };
    if (const auto* c = std::get_if<Call>(&vanilla)) {
        if (c->strike < 0.0) throw std::invalid_argument("negative strike in " + describe(vanilla));
        const Marginal m = marginal(c->asset);
        return leg_expectation({LegShape::Call, c->strike}, m.forward, m.sd);
    }
    if (const auto* q = std::get_if<Put>(&vanilla)) {
        if (q->strike < 0.0) throw std::invalid_argument("negative strike in " + describe(vanilla));
        const Marginal m = marginal(q->asset);
        return leg_expectation({LegShape::Put, q->strike}, m.forward, m.sd);
    }
    throw std::invalid_argument("price_vanilla expects a Call or Put, got " + describe(vanilla));
}

double price_tlo(const ModelParams& params, const Tlo& tlo, const QuadratureOptions& options) {
    return price_surface_node(params, kind_of(tlo.kind), tlo.k1, tlo.k2, options);
}

double price_tlo_conditional(const ModelParams& params, const Tlo& tlo, const QuadratureOptions& options) {
    if (tlo.k1 < 0.0 || tlo.k2 < 0.0) throw std::invalid_argument("negative strike in " + describe(Instrument{tlo}));
    const auto [l1, l2] = legs_of(kind_of(tlo.kind), tlo.k1, tlo.k2);
    return expect_product_conditional(params, l1, l2, options);
}

McEstimate price_tlo_mc(const ModelParams& params, const Tlo& tlo, std::size_t paths, std::uint64_t seed) {
    return price_tlos_mc(params, std::span<const Tlo>(&tlo, 1), paths, seed).front();
}

std::vector<McEstimate> price_tlos_mc(const ModelParams& params, std::span<const Tlo> tlos, std::size_t paths,
                                      std::uint64_t seed) {
    return run_mc(params, tlos.size(), paths, seed, [&](double s1, double s2, std::vector<RunningMoments>& acc) {
        for (std::size_t k = 0; k < tlos.size(); ++k)
            acc[k].push(tlo_payoff(tlos[k].kind, tlos[k].k1, tlos[k].k2, s1, s2));
    });
}

McEstimate price_payoff_mc(const ModelParams& params, const PayoffSpec& payoff, std::size_t paths,
                           std::uint64_t seed) {
    return run_mc(params, 1, paths, seed,
                  [&](double s1, double s2, std::vector<RunningMoments>& acc) { acc[0].push(payoff.f(s1, s2)); })
        .front();
}

double price_portfolio(const ModelParams& params, const HedgePortfolio& portfolio) {
    params.validate();
    double total = 0.0;
    for (const auto& [instrument, weight] : portfolio.positions()) {
        double value = 0.0;
        if (std::holds_alternative<Bond>(instrument)) {
            value = 1.0;
        } else if (const auto* f = std::get_if<Forward>(&instrument)) {
            value = (f->asset == Asset::First ? params.forward1() : params.forward2()) - f->anchor;
        } else if (const auto* t = std::get_if<Tlo>(&instrument)) {
            value = price_tlo_conditional(params, *t);
        } else {
            value = price_vanilla(params, instrument);
        }
        total += weight * value;
    }
    return total;
}

double price_payoff_direct(const ModelParams& params, const PayoffSpec& payoff, const QuadratureOptions& o) {
    params.validate();
    const Marginal m1{params.forward1(), params.vol1 * std::sqrt(params.maturity)};
    const Marginal m2{params.forward2(), params.vol2 * std::sqrt(params.maturity)};
    const double r = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));
    const GaussLegendreRule& rule = gauss_legendre(o.nodes);
    const double box = o.box_sd;
    double value = 0.0;
    double shell = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z1 = box * rule.nodes[i];
        const double s1 = m1.price(z1);
        const double w1 = box * rule.weights[i] * normal_pdf(z1);
        double row = 0.0;
        double row_shell = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double z2 = box * rule.nodes[j];
            const double term = box * rule.weights[j] * normal_pdf(z2) * payoff.f(s1, m2.price(params.rho * z1 + r * z2));
            row += term;
            if (std::max(std::abs(z1), std::abs(z2)) > box - 1.0) row_shell += std::abs(term);
        }
        value += w1 * row;
        shell += w1 * row_shell;
    }
    if (shell > 1e-9 * (1.0 + std::abs(value))) {
        std::ostringstream os;
        os << "direct pricing of '" << payoff.name() << "' did not converge: the outer shell of the +-" << box
           << " sd box carries " << shell;
        throw NumericalError(os.str());
    }
    return value;
}

std::string_view to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::PP: return "PP";
        case SurfaceKind::CC: return "CC";
        case SurfaceKind::CP: return "CP";
        case SurfaceKind::PC: return "PC";
        case SurfaceKind::CorrCallDigital: return "CorrCallDigital";
        case SurfaceKind::CorrPutDigital: return "CorrPutDigital";
        case SurfaceKind::DigitalPP: return "DigitalPP";
    }
    return "?";
}

SurfaceKind parse_surface_kind(std::string_view text) {
    for (const auto k : {SurfaceKind::PP, SurfaceKind::CC, SurfaceKind::CP, SurfaceKind::PC,
                         SurfaceKind::CorrCallDigital, SurfaceKind::CorrPutDigital, SurfaceKind::DigitalPP})
        if (text == to_string(k)) return k;
    throw std::invalid_argument("unknown surface kind '" + std::string(text) + "'");
}

double price_surface_node(const ModelParams& params, SurfaceKind kind, double k1, double k2,
                          const QuadratureOptions& options) {
    if (k1 < 0.0 || k2 < 0.0) throw std::invalid_argument("negative strike");
    const auto [l1, l2] = legs_of(kind, k1, k2);
    return expect_product_tensor(params, l1, l2, options);
}

PriceSurface generate_surface(const ModelParams& params, SurfaceKind kind, std::span<const double> k1_grid,
                              std::span<const double> k2_grid, const QuadratureOptions& options) {
    params.validate();
    auto check = [](std::span<const double> g, const char* name) {
        if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!(g[i] > 0.0) || !std::isfinite(g[i]))
                throw std::invalid_argument(std::string(name) + " grid must be positive");
            if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument(std::string(name) + " grid must ascend");
        }
    };
    check(k1_grid, "k1");
    check(k2_grid, "k2");

    PriceSurface s;
    s.kind = kind;
    s.k1.assign(k1_grid.begin(), k1_grid.end());
    s.k2.assign(k2_grid.begin(), k2_grid.end());
    s.values.resize(s.k1.size() * s.k2.size());
    for (std::size_t i = 0; i < s.k1.size(); ++i)
        for (std::size_t j = 0; j < s.k2.size(); ++j) s.at(i, j) = price_surface_node(params, kind, s.k1[i], s.k2[j], options);
    s.provenance = params.describe();
    s.provenance["pricer"] = "tensor_gauss_legendre";
    s.provenance["nodes"] = std::to_string(options.nodes);
    s.provenance["box_sd"] = format_double(options.box_sd);
    return s;
}

std::vector<std::string> check_surface(const PriceSurface& s, double slack) {
    std::vector<std::string> issues;
    if (s.k1.empty() || s.k2.empty() || s.values.size() != s.k1.size() * s.k2.size()) {
        issues.push_back("surface shape does not match its grids");
        return issues;
    }
    double scale = 0.0;
    for (const double v : s.values) {
        if (!std::isfinite(v)) {
            issues.push_back("surface contains a non-finite value");
            return issues;
        }
        scale = std::max(scale, std::abs(v));
    }
    const double tol = slack * std::max(1.0, scale);
    for (std::size_t i = 0; i < s.k1.size(); ++i)
        for (std::size_t j = 0; j < s.k2.size(); ++j)
            if (s.at(i, j) < -tol) {
                issues.push_back("negative value at (" + format_double(s.k1[i]) + ", " + format_double(s.k2[j]) + ")");
                return issues;
            }
    const auto [l1, l2] = legs_of(s.kind, 1.0, 1.0);
    const double dir1 = pays_above(l1.shape) ? -1.0 : 1.0;  // put-like legs grow with the strike
    const double dir2 = pays_above(l2.shape) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < s.k1.size(); ++i)
        for (std::size_t j = 0; j < s.k2.size(); ++j) {
            if (i + 1 < s.k1.size() && dir1 * (s.at(i + 1, j) - s.at(i, j)) < -tol) {
                issues.push_back("not monotone along k1 at (" + format_double(s.k1[i]) + ", " + format_double(s.k2[j]) + ")");
                return issues;
            }
            if (j + 1 < s.k2.size() && dir2 * (s.at(i, j + 1) - s.at(i, j)) < -tol) {
                issues.push_back("not monotone along k2 at (" + format_double(s.k1[i]) + ", " + format_double(s.k2[j]) + ")");
                return issues;
            }
        }
    return issues;
}

std::vector<double> uniform_grid(double lo, double step, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
    return g;
}

}  // namespace tlhedge
