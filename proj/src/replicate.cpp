#include "tlhedge/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tlhedge {

StrikeGrid StrikeGrid::make(double lower, double upper, double spacing) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw std::invalid_argument("strike grid needs finite lower < upper");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw std::invalid_argument("strike grid spacing must be positive");
    const double ratio = (upper - lower) / spacing;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
        std::ostringstream os;
        os << "(upper - lower) / spacing = " << ratio << " is not a positive integer";
        throw std::invalid_argument(os.str());
    }
    return {lower, upper, spacing};
}

std::size_t StrikeGrid::intervals() const {
    return static_cast<std::size_t>(std::llround((upper - lower) / spacing));
}

double StrikeGrid::node(std::size_t i) const {
    return i == intervals() ? upper : lower + static_cast<double>(i) * spacing;
}

std::optional<std::size_t> StrikeGrid::index_of(double k) const {
    const double r = (k - lower) / spacing;
    const long long i = std::llround(r);
    if (i < 0 || static_cast<std::size_t>(i) > intervals()) return std::nullopt;
    if (std::abs(node(static_cast<std::size_t>(i)) - k) > 1e-9 * spacing) return std::nullopt;
    return static_cast<std::size_t>(i);
}

HedgePortfolio HedgePortfolio::assemble(std::span<const Position> positions, std::pair<double, double> anchor,
                                        Provenance provenance) {
    std::vector<Position> sorted(positions.begin(), positions.end());
    for (const auto& p : sorted)
        if (!std::isfinite(p.weight))
            throw std::domain_error("non-finite weight for " + describe(p.instrument));
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Position& l, const Position& r) { return l.instrument < r.instrument; });

    HedgePortfolio out;
    out.anchor_ = anchor;
    out.provenance_ = std::move(provenance);
    const bool quadrant = out.provenance_.domain == DomainKind::NonNegativeQuadrant;
    for (std::size_t i = 0; i < sorted.size();) {
        double w = 0.0;
        std::size_t j = i;
        for (; j < sorted.size() && sorted[j].instrument == sorted[i].instrument; ++j) w += sorted[j].weight;
        if (std::abs(w) > kPruneThreshold && !(quadrant && vanishes_on_quadrant(sorted[i].instrument)))
            out.positions_.push_back({sorted[i].instrument, w});
        i = j;
    }
    return out;
}

std::optional<double> HedgePortfolio::weight_of(const Instrument& instrument) const {
    const auto it = std::lower_bound(positions_.begin(), positions_.end(), instrument,
                                     [](const Position& p, const Instrument& i) { return p.instrument < i; });
    if (it == positions_.end() || !(it->instrument == instrument)) return std::nullopt;
    return it->weight;
}

std::pair<std::pair<double, double>, std::pair<double, double>> HedgePortfolio::box() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto axis = [](const std::optional<StrikeGrid>& g) {
        return g ? std::pair{g->lower, g->upper} : std::pair{-inf, inf};
    };
    return {axis(provenance_.grid1), axis(provenance_.grid2)};
}

namespace {

struct StripNode {
    double strike;
    double weight;
};

// Composite trapezoid rules on [lower, anchor] and [anchor, upper].
struct SplitRule {
    double anchor;
    std::vector<StripNode> below;
    std::vector<StripNode> above;
};

SplitRule split_rule(const StrikeGrid& grid, double anchor, const char* label) {
    const auto idx = grid.index_of(anchor);
    if (!idx) {
        std::ostringstream os;
        os.precision(17);
        os << "anchor " << label << " = " << anchor << " is not a node of the strike grid [" << grid.lower
           << ", " << grid.upper << "] with spacing " << grid.spacing;
        throw std::invalid_argument(os.str());
    }
    const std::size_t n = grid.intervals();
    const double h = grid.spacing;
    SplitRule rule{grid.node(*idx), {}, {}};
    if (*idx > 0) {
        for (std::size_t i = 0; i <= *idx; ++i)
            rule.below.push_back({grid.node(i), (i == 0 || i == *idx) ? h / 2 : h});
    }
    if (*idx < n) {
        for (std::size_t i = *idx; i <= n; ++i)
            rule.above.push_back({grid.node(i), (i == *idx || i == n) ? h / 2 : h});
    }
    return rule;
}

void check_grid_domain(const StrikeGrid& grid, DomainKind domain) {
    StrikeGrid::make(grid.lower, grid.upper, grid.spacing);
    if (domain == DomainKind::NonNegativeQuadrant && grid.lower != 0.0)
        throw std::invalid_argument("strike grids on the non-negative quadrant must start at 0");
}

}  // namespace

HedgePortfolio decompose_univariate(const UnivariatePayoffSpec& payoff, double a, const StrikeGrid& grid) {
    check_grid_domain(grid, payoff.domain());
    const SplitRule rule = split_rule(grid, a, "a");
    const double an = rule.anchor;

    std::vector<Position> out;
    out.push_back({Bond{}, payoff.f(an)});
    out.push_back({Forward{Asset::First, an}, payoff.d1(an)});
    for (const auto& n : rule.below) out.push_back({Put{Asset::First, n.strike}, payoff.d2(n.strike) * n.weight});
    for (const auto& n : rule.above) out.push_back({Call{Asset::First, n.strike}, payoff.d2(n.strike) * n.weight});
    return HedgePortfolio::assemble(out, {an, 0.0}, {payoff.name(), payoff.domain(), grid, std::nullopt});
}

HedgePortfolio decompose_bivariate(const PayoffSpec& payoff, double a, double b, const StrikeGrid& grid1,
                                   const StrikeGrid& grid2) {
    check_grid_domain(grid1, payoff.domain());
    check_grid_domain(grid2, payoff.domain());
    const SplitRule r1 = split_rule(grid1, a, "a");
    const SplitRule r2 = split_rule(grid2, b, "b");
    const double an = r1.anchor;
    const double bn = r2.anchor;

    std::vector<Position> out;
    out.reserve(8 + 4 * (grid1.size() + grid2.size()) + grid1.size() * grid2.size() + grid1.size() + grid2.size());

    out.push_back({Bond{}, payoff.f(an, bn)});
    out.push_back({Forward{Asset::First, an}, payoff.d1(an, bn)});
    out.push_back({Forward{Asset::Second, bn}, payoff.d2(an, bn)});

    // f12(a,b)(x-a)(y-b) written as four at-the-anchor TLOs
    const double f12 = payoff.d12(an, bn);
    out.push_back({Tlo{TloKind::CC, an, bn}, f12});
    out.push_back({Tlo{TloKind::PP, an, bn}, f12});
    out.push_back({Tlo{TloKind::CP, an, bn}, -f12});
    out.push_back({Tlo{TloKind::PC, an, bn}, -f12});

    // Strips in k1 at k2 = b; (y - b) = (y - b)+ - (b - y)+
    for (const auto& n : r1.below) {
        out.push_back({Put{Asset::First, n.strike}, payoff.d11(n.strike, bn) * n.weight});
        const double w = payoff.d112(n.strike, bn) * n.weight;
        out.push_back({Tlo{TloKind::PC, n.strike, bn}, w});
        out.push_back({Tlo{TloKind::PP, n.strike, bn}, -w});
    }
    for (const auto& n : r1.above) {
        out.push_back({Call{Asset::First, n.strike}, payoff.d11(n.strike, bn) * n.weight});
        const double w = payoff.d112(n.strike, bn) * n.weight;
        out.push_back({Tlo{TloKind::CC, n.strike, bn}, w});
        out.push_back({Tlo{TloKind::CP, n.strike, bn}, -w});
    }

    // Strips in k2 at k1 = a; (x - a) = (x - a)+ - (a - x)+
    for (const auto& n : r2.below) {
        out.push_back({Put{Asset::Second, n.strike}, payoff.d22(an, n.strike) * n.weight});
        const double w = payoff.d122(an, n.strike) * n.weight;
        out.push_back({Tlo{TloKind::CP, an, n.strike}, w});
        out.push_back({Tlo{TloKind::PP, an, n.strike}, -w});
    }
    for (const auto& n : r2.above) {
        out.push_back({Call{Asset::Second, n.strike}, payoff.d22(an, n.strike) * n.weight});
        const double w = payoff.d122(an, n.strike) * n.weight;
        out.push_back({Tlo{TloKind::CC, an, n.strike}, w});
        out.push_back({Tlo{TloKind::PC, an, n.strike}, -w});
    }

    // Sheet: kind follows the quadrant of (k1, k2) relative to (a, b).
    auto sheet = [&](const std::vector<StripNode>& s1, const std::vector<StripNode>& s2, TloKind kind) {
        for (const auto& n1 : s1)
            for (const auto& n2 : s2)
                out.push_back({Tlo{kind, n1.strike, n2.strike},
                               payoff.d1122(n1.strike, n2.strike) * n1.weight * n2.weight});
    };
    sheet(r1.above, r2.above, TloKind::CC);
    sheet(r1.below, r2.above, TloKind::PC);
    sheet(r1.above, r2.below, TloKind::CP);
    sheet(r1.below, r2.below, TloKind::PP);

    return HedgePortfolio::assemble(out, {an, bn}, {payoff.name(), payoff.domain(), grid1, grid2});
}

HedgePortfolio decompose_bivariate_zero_anchor(const PayoffSpec& payoff, const StrikeGrid& grid1,
                                               const StrikeGrid& grid2) {
    if (payoff.domain() != DomainKind::NonNegativeQuadrant)
        throw std::invalid_argument("the zero-anchor expansion holds on the non-negative quadrant only");
    check_grid_domain(grid1, payoff.domain());
    check_grid_domain(grid2, payoff.domain());
    const SplitRule r1 = split_rule(grid1, 0.0, "a");
    const SplitRule r2 = split_rule(grid2, 0.0, "b");

    std::vector<Position> out;
    out.push_back({Bond{}, payoff.f(0.0, 0.0)});
    // x and y are zero-strike calls, carried as forwards anchored at 0
    out.push_back({Forward{Asset::First, 0.0}, payoff.d1(0.0, 0.0)});
    out.push_back({Forward{Asset::Second, 0.0}, payoff.d2(0.0, 0.0)});
    out.push_back({Tlo{TloKind::CC, 0.0, 0.0}, payoff.d12(0.0, 0.0)});
    for (const auto& n : r1.above) {
        out.push_back({Call{Asset::First, n.strike}, payoff.d11(n.strike, 0.0) * n.weight});
        out.push_back({Tlo{TloKind::CC, n.strike, 0.0}, payoff.d112(n.strike, 0.0) * n.weight});
    }
    for (const auto& n : r2.above) {
        out.push_back({Call{Asset::Second, n.strike}, payoff.d22(0.0, n.strike) * n.weight});
        out.push_back({Tlo{TloKind::CC, 0.0, n.strike}, payoff.d122(0.0, n.strike) * n.weight});
    }
    for (const auto& n1 : r1.above)
        for (const auto& n2 : r2.above)
            out.push_back({Tlo{TloKind::CC, n1.strike, n2.strike},
                           payoff.d1122(n1.strike, n2.strike) * n1.weight * n2.weight});

    HedgePortfolio direct =
        HedgePortfolio::assemble(out, {0.0, 0.0}, {payoff.name(), payoff.domain(), grid1, grid2});
    const HedgePortfolio general = decompose_bivariate(payoff, 0.0, 0.0, grid1, grid2);
    if (!structurally_equal(direct, general, 1e-12))
        throw std::logic_error("zero-anchor expansion disagrees with the general expansion at (0, 0)");
    return direct;
}

double portfolio_payoff(const HedgePortfolio& portfolio, double x, double y) {
    double total = 0.0;
    for (const auto& p : portfolio.positions()) total += p.weight * instrument_payoff(p.instrument, x, y);
    return total;
}

bool structurally_equal(const HedgePortfolio& lhs, const HedgePortfolio& rhs, double tol) {
    if (lhs.size() != rhs.size()) return false;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const auto& l = lhs.positions()[i];
        const auto& r = rhs.positions()[i];
        if (!(l.instrument == r.instrument)) return false;
        if (std::abs(l.weight - r.weight) > tol * (1.0 + std::abs(l.weight))) return false;
    }
    return true;
}

std::vector<EvalPoint> eval_grid(double lo1, double hi1, std::size_t n1, double lo2, double hi2, std::size_t n2) {
    if (n1 == 0 || n2 == 0) return {};
    auto coord = [](double lo, double hi, std::size_t n, std::size_t i) {
        return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    std::vector<EvalPoint> pts;
    pts.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) pts.push_back({coord(lo1, hi1, n1, i), coord(lo2, hi2, n2, j)});
    return pts;
}

std::vector<EvalPoint> cell_centred_grid(double lo, double hi, std::size_t n) {
    std::vector<EvalPoint> pts;
    pts.reserve(n * n);
    const double cell = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            pts.push_back({lo + (static_cast<double>(i) + 0.5) * cell, lo + (static_cast<double>(j) + 0.5) * cell});
    return pts;
}

ReplicationReport replication_error(const HedgePortfolio& portfolio, const PayoffSpec& payoff,
                                    std::span<const EvalPoint> eval_points) {
    if (eval_points.empty()) throw std::invalid_argument("replication_error needs at least one eval point");
    const auto [bx, by] = portfolio.box();
    ReplicationReport report;
    report.residuals.reserve(eval_points.size());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < eval_points.size(); ++i) {
        const auto [x, y] = eval_points[i];
        if (x < bx.first || x > bx.second || y < by.first || y > by.second) report.outside_box.push_back(i);
        const double r = portfolio_payoff(portfolio, x, y) - payoff.f(x, y);
        report.residuals.push_back(r);
        report.sup_error = std::max(report.sup_error, std::abs(r));
        sum_sq += r * r;
    }
    report.l2_error = std::sqrt(sum_sq / static_cast<double>(eval_points.size()));
    return report;
}

}  // namespace tlhedge
