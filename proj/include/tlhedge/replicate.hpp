#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tlhedge/instrument.hpp"
#include "tlhedge/payoff.hpp"

namespace tlhedge {

/// Positions with |weight| at or below this are dropped from a portfolio.
inline constexpr double kPruneThreshold = 1e-14;

/// Uniform strike grid [lower, upper] replacing an integral over strikes.
/// The upper end truncates the infinite limit. Quadrature is composite
/// trapezoid.
struct StrikeGrid {
    double lower = 0.0;
    double upper = 1.0;
    double spacing = 0.1;

    /// Throws std::invalid_argument unless lower < upper and
    /// (upper - lower) / spacing is a positive integer.
    static StrikeGrid make(double lower, double upper, double spacing);

    std::size_t intervals() const;
    std::size_t size() const { return intervals() + 1; }
    double node(std::size_t i) const;
    /// Index of the node equal to k; nullopt when k is not a node.
    std::optional<std::size_t> index_of(double k) const;
    StrikeGrid refined() const { return {lower, upper, spacing / 2}; }
};

struct Position {
    Instrument instrument;
    double weight = 0.0;
};

/// Record of how a portfolio was discretized.
struct Provenance {
    std::string payoff;
    DomainKind domain = DomainKind::NonNegativeQuadrant;
    std::optional<StrikeGrid> grid1;
    std::optional<StrikeGrid> grid2;
};

class HedgePortfolio {
public:
    HedgePortfolio() = default;

    /// Merges duplicate instruments, drops |weight| <= kPruneThreshold and
    /// instruments that vanish on the quadrant (when the domain is the
    /// quadrant), and sorts canonically. Throws on non-finite weights.
    static HedgePortfolio assemble(std::span<const Position> positions, std::pair<double, double> anchor,
                                   Provenance provenance);

    const std::vector<Position>& positions() const { return positions_; }
    std::pair<double, double> anchor() const { return anchor_; }
    const Provenance& provenance() const { return provenance_; }
    std::size_t size() const { return positions_.size(); }
    std::optional<double> weight_of(const Instrument& instrument) const;

    /// Truncation box [lower, upper] per asset; unbounded axes are infinite.
    std::pair<std::pair<double, double>, std::pair<double, double>> box() const;

private:
    std::vector<Position> positions_;
    std::pair<double, double> anchor_{0.0, 0.0};
    Provenance provenance_;
};

HedgePortfolio decompose_univariate(const UnivariatePayoffSpec& payoff, double a, const StrikeGrid& grid);

HedgePortfolio decompose_bivariate(const PayoffSpec& payoff, double a, double b, const StrikeGrid& grid1,
                                   const StrikeGrid& grid2);

/// Expansion at a = b = 0 built directly from the simplified formula; checks
/// structural equality with decompose_bivariate(payoff, 0, 0, ...) and throws
/// std::logic_error on mismatch.
HedgePortfolio decompose_bivariate_zero_anchor(const PayoffSpec& payoff, const StrikeGrid& grid1,
                                               const StrikeGrid& grid2);

double portfolio_payoff(const HedgePortfolio& portfolio, double x, double y);

/// Same instruments and weights within tol * (1 + |weight|).
bool structurally_equal(const HedgePortfolio& lhs, const HedgePortfolio& rhs, double tol);

struct EvalPoint {
    double x = 0.0;
    double y = 0.0;
};

/// n1 x n2 points uniformly spaced on [lo1, hi1] x [lo2, hi2], endpoints included.
std::vector<EvalPoint> eval_grid(double lo1, double hi1, std::size_t n1, double lo2, double hi2,
                                 std::size_t n2);

/// n x n cell-centred points on [lo, hi]^2. Used for refinement studies: at
/// strike-lattice nodes the trapezoid rule is exact for the piecewise linear
/// option payoffs, so node-aligned points hide the O(h^2) error.
std::vector<EvalPoint> cell_centred_grid(double lo, double hi, std::size_t n);

struct ReplicationReport {
    double sup_error = 0.0;
    double l2_error = 0.0;  // root mean square
    std::vector<double> residuals;          // portfolio - payoff, per point
    std::vector<std::size_t> outside_box;   // indices of points outside the truncation box
};

ReplicationReport replication_error(const HedgePortfolio& portfolio, const PayoffSpec& payoff,
                                    std::span<const EvalPoint> eval_points);

}  // namespace tlhedge
