#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tlhedge/model.hpp"

namespace tlhedge {

enum class Quantity { Density, Cdf };

std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view text);

/// Recovered joint density or CDF. Only interior nodes of the source price
/// grid are present; the boundary ring has no estimate and is omitted.
struct DensitySurface {
    Quantity quantity = Quantity::Density;
    std::vector<double> k1;
    std::vector<double> k2;
    std::vector<double> values;  // row-major in k1
    std::map<std::string, std::string> provenance;

    double at(std::size_t i, std::size_t j) const { return values[i * k2.size() + j]; }
};

/// q = d2/dk1^2 d2/dk2^2 of the put-put surface, by composed central second
/// differences. Needs uniform grids with at least 5 nodes per axis.
DensitySurface density_from_pp_surface(const PriceSurface& surface);

/// Q(S1 <= k1, S2 <= k2) = d2/dk1 dk2 of the put-put surface.
DensitySurface cdf_from_pp_surface(const PriceSurface& surface);

/// Richardson estimate of the stencil error of cdf_from_pp_surface: one third
/// of the sup gap between the step-h CDF and the CDF from every other node,
/// over nodes both estimates share.
double cdf_stencil_error_estimate(const PriceSurface& surface);

/// Second difference in k1 composed with a first difference in k2; the sign
/// is -1 for CorrCallDigital and +1 for CorrPutDigital.
DensitySurface density_from_correlation_surface(const PriceSurface& surface);

/// Same stencil as the put-put case for CC, CP and PC surfaces.
DensitySurface density_from_tlo_surface(const PriceSurface& surface);

/// Density from any TLO or correlation-option surface.
DensitySurface recover_density(const PriceSurface& surface);

/// Minimiser of sum (u - p)^2 + lambda * (sum (D4_k1 u)^2 + sum (D4_k2 u)^2),
/// where D4 is the unscaled fourth difference along one axis. lambda = 0
/// returns the input unchanged.
PriceSurface regularize_surface(const PriceSurface& surface, double lambda);

struct LambdaSelection {
    double best_lambda = 0.0;
    std::vector<std::pair<double, double>> scores;  // (lambda, rms of smoothed - holdout)
};

/// Grid search: smooth `noisy` with each lambda and score it against an
/// independent noisy replicate of the same surface.
LambdaSelection select_lambda(const PriceSurface& noisy, const PriceSurface& holdout,
                              std::span<const double> lambdas);

/// Log-spaced lambdas lo, 10 lo, ..., hi.
std::vector<double> lambda_sweep(double lo = 1e-8, double hi = 1e-2);

/// Adds independent uniform noise on [-amplitude, amplitude] to every value,
/// drawn from mt19937_64(seed) with 53-bit uniforms.
PriceSurface add_uniform_noise(const PriceSurface& surface, double amplitude, std::uint64_t seed);

/// Correlated lognormal joint density. Throws for non-positive strikes.
double model_density(const ModelParams& params, double k1, double k2);

struct Box {
    double lo1, hi1, lo2, hi2;
    bool contains(double x, double y) const { return x >= lo1 && x <= hi1 && y >= lo2 && y <= hi2; }
};

struct OracleComparison {
    double sup_abs_error = 0.0;
    double max_oracle = 0.0;
    double relative_sup_error = 0.0;  // sup_abs_error / max_oracle
    std::size_t nodes = 0;
};

/// Density estimate against model_density over the nodes inside `box`
/// (all nodes when absent).
OracleComparison compare_to_model(const DensitySurface& density, const ModelParams& params,
                                  const std::optional<Box>& box = std::nullopt);

/// Violations of the CDF invariants: values in [-slack, 1 + slack] and
/// non-decreasing along each axis up to slack.
std::vector<std::string> check_cdf(const DensitySurface& cdf, double slack = 1e-3);

/// Trapezoid integral of a density surface over its grid box.
double integrate_density(const DensitySurface& density);

}  // namespace tlhedge
