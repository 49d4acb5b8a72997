#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tlhedge/instrument.hpp"
#include "tlhedge/payoff.hpp"
#include "tlhedge/replicate.hpp"

namespace tlhedge {

/// Raised when a quadrature cannot deliver its declared tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlated bivariate lognormal terminal law:
///   S_i = F_i exp(-vol_i^2 T / 2 + vol_i sqrt(T) Z_i),  corr(Z_1, Z_2) = rho,
/// with F_i = spot_i exp(rate T).
struct ModelParams {
    double spot1 = 1.0;
    double spot2 = 1.0;
    double vol1 = 0.2;
    double vol2 = 0.2;
    double rho = 0.0;
    double rate = 0.0;
    double maturity = 1.0;
    /// Admit vol_i == 0 (deterministic terminal price).
    bool allow_zero_vol = false;

    void validate() const;
    double forward1() const;
    double forward2() const;
    double discount() const;
    /// E[S1 S2] = F1 F2 exp(rho vol1 vol2 T)
    double cross_moment() const;
    std::map<std::string, std::string> describe() const;
};

struct QuadratureOptions {
    std::size_t nodes = 256;     // per dimension
    double box_sd = 10.0;        // half-width of the integration box in standard deviations
};

/// Undiscounted Black-Scholes expectation of a vanilla. Throws on negative strike
/// or a non-vanilla instrument.
double price_vanilla(const ModelParams& params, const Instrument& vanilla);

/// E[TLO payoff] by tensor Gauss-Legendre quadrature in decorrelated normal
/// coordinates. The outer panel is cut at the asset-1 strike and the inner
/// panel at the asset-2 strike line, so each panel integrand is smooth.
/// Throws NumericalError for |rho| == 1.
double price_tlo(const ModelParams& params, const Tlo& tlo, const QuadratureOptions& options = {});

/// E[TLO payoff] by one-dimensional Gauss-Legendre quadrature over asset 1
/// with the conditional asset-2 expectation in closed form. Used for bulk
/// portfolio pricing; cross-checks price_tlo.
double price_tlo_conditional(const ModelParams& params, const Tlo& tlo, const QuadratureOptions& options = {});

struct McEstimate {
    double price = 0.0;
    double standard_error = 0.0;
};

/// Monte Carlo batch size: paths are drawn in fixed batches, batch b using a
/// mt19937_64 seeded by seed_seq{low32(seed), high32(seed), b}; normals come
/// from Box-Muller on 53-bit uniforms. Results are bit-reproducible.
inline constexpr std::size_t kMcBatchPaths = 1 << 16;

/// Throws std::invalid_argument for paths < 1000.
McEstimate price_tlo_mc(const ModelParams& params, const Tlo& tlo, std::size_t paths, std::uint64_t seed);

/// Several TLOs on common random numbers; element i equals
/// price_tlo_mc(params, tlos[i], paths, seed).
std::vector<McEstimate> price_tlos_mc(const ModelParams& params, std::span<const Tlo> tlos, std::size_t paths,
                                      std::uint64_t seed);

/// Monte Carlo estimate of E[f(S1, S2)] for an arbitrary payoff.
McEstimate price_payoff_mc(const ModelParams& params, const PayoffSpec& payoff, std::size_t paths,
                           std::uint64_t seed);

/// Sum of weight * undiscounted expectation (Bond 1, Forward F - anchor).
double price_portfolio(const ModelParams& params, const HedgePortfolio& portfolio);

/// E[f(S1, S2)] by tensor quadrature on the +-box_sd box. Throws NumericalError
/// when the outer shell of the box carries more than 1e-9 (1 + |value|).
double price_payoff_direct(const ModelParams& params, const PayoffSpec& payoff, const QuadratureOptions& options = {});

enum class SurfaceKind { PP, CC, CP, PC, CorrCallDigital, CorrPutDigital, DigitalPP };

std::string_view to_string(SurfaceKind kind);
SurfaceKind parse_surface_kind(std::string_view text);

/// Undiscounted E[payoff] for one grid node of a surface kind:
///   CorrCallDigital = (S1 - k1)+ 1{S2 > k2}, CorrPutDigital = (k1 - S1)+ 1{S2 < k2},
///   DigitalPP = 1{S1 <= k1} 1{S2 <= k2}.
double price_surface_node(const ModelParams& params, SurfaceKind kind, double k1, double k2,
                          const QuadratureOptions& options = {});

/// Undiscounted prices on a rectangular strike grid, row-major in k1.
struct PriceSurface {
    SurfaceKind kind = SurfaceKind::PP;
    std::vector<double> k1;
    std::vector<double> k2;
    std::vector<double> values;
    std::map<std::string, std::string> provenance;

    double at(std::size_t i, std::size_t j) const { return values[i * k2.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * k2.size() + j]; }
};

/// Throws std::invalid_argument unless both grids are ascending and positive.
PriceSurface generate_surface(const ModelParams& params, SurfaceKind kind, std::span<const double> k1_grid,
                              std::span<const double> k2_grid, const QuadratureOptions& options = {});

/// Violations of the surface invariants (finite, non-negative, monotone in the
/// direction implied by the kind), each as a one-line message. Empty when valid.
std::vector<std::string> check_surface(const PriceSurface& surface, double slack = 1e-12);

/// lo, lo + step, ..., n points
std::vector<double> uniform_grid(double lo, double step, std::size_t n);

}  // namespace tlhedge
