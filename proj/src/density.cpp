#include "tlhedge/density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tlhedge/format.hpp"

namespace tlhedge {

std::string_view to_string(Quantity q) { return q == Quantity::Cdf ? "cdf" : "density"; }

Quantity parse_quantity(std::string_view text) {
    if (text == "density") return Quantity::Density;
    if (text == "cdf") return Quantity::Cdf;
    throw std::invalid_argument("unknown quantity '" + std::string(text) + "'");
}

namespace {

constexpr std::size_t kMinNodes = 5;

double uniform_spacing(const std::vector<double>& k, const char* axis) {
    if (k.size() < kMinNodes) {
        std::ostringstream os;
        os << axis << " grid has " << k.size() << " nodes; at least " << kMinNodes << " are required";
        throw std::invalid_argument(os.str());
    }
    const double h = (k.back() - k.front()) / static_cast<double>(k.size() - 1);
    if (!(h > 0.0)) throw std::invalid_argument(std::string(axis) + " grid must ascend");
    for (std::size_t i = 0; i + 1 < k.size(); ++i)
        if (std::abs((k[i + 1] - k[i]) - h) > 1e-9 * h)
            throw std::invalid_argument(std::string(axis) + " grid is not uniform");
    return h;
}

// Central difference of order 1 or 2 on taps -1, 0, +1.
struct CentralDiff {
    std::array<double, 3> w;
    double scale;  // divisor once the step is known
};

CentralDiff central(int order, double h) {
    if (order == 1) return {{-1.0, 0.0, 1.0}, 2.0 * h};
    return {{1.0, -2.0, 1.0}, h * h};
}

DensitySurface apply_stencil(const PriceSurface& s, int order1, int order2, double sign, Quantity quantity,
                             const std::string& method) {
    if (s.values.size() != s.k1.size() * s.k2.size())
        throw std::invalid_argument("surface shape does not match its grids");
    const double h1 = uniform_spacing(s.k1, "k1");
    const double h2 = uniform_spacing(s.k2, "k2");
    const CentralDiff d1 = central(order1, h1);
    const CentralDiff d2 = central(order2, h2);

    DensitySurface out;
    out.quantity = quantity;
    out.k1.assign(s.k1.begin() + 1, s.k1.end() - 1);
    out.k2.assign(s.k2.begin() + 1, s.k2.end() - 1);
    out.values.reserve(out.k1.size() * out.k2.size());
    for (std::size_t i = 1; i + 1 < s.k1.size(); ++i) {
        for (std::size_t j = 1; j + 1 < s.k2.size(); ++j) {
            double outer = 0.0;
            for (std::size_t a = 0; a < 3; ++a) {
                double inner = 0.0;
                for (std::size_t b = 0; b < 3; ++b) inner += d2.w[b] * s.at(i + a - 1, j + b - 1);
                outer += d1.w[a] * inner;
            }
            out.values.push_back(sign * outer / (d1.scale * d2.scale));
        }
    }
    out.provenance = s.provenance;
    out.provenance["source_kind"] = std::string(to_string(s.kind));
    out.provenance["stencil"] = method;
    out.provenance["h1"] = format_double(h1);
    out.provenance["h2"] = format_double(h2);
    return out;
}

void require_kind(const PriceSurface& s, std::initializer_list<SurfaceKind> allowed, const char* op) {
    for (const auto k : allowed)
        if (s.kind == k) return;
    throw std::invalid_argument(std::string(op) + " does not accept " + std::string(to_string(s.kind)) + " surfaces");
}

// D4^T D4 for the unscaled fourth difference on n nodes.
Eigen::MatrixXd fourth_difference_gram(std::size_t n) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    constexpr std::array<double, 5> w{1.0, -4.0, 6.0, -4.0, 1.0};
    for (std::size_t r = 0; r + 4 < n; ++r)
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b)
                gram(static_cast<Eigen::Index>(r + a), static_cast<Eigen::Index>(r + b)) += w[a] * w[b];
    return gram;
}

double rms_difference(const PriceSurface& a, const PriceSurface& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.values.size()));
}

}  // namespace

DensitySurface density_from_pp_surface(const PriceSurface& surface) {
    require_kind(surface, {SurfaceKind::PP}, "density_from_pp_surface");
    return apply_stencil(surface, 2, 2, 1.0, Quantity::Density, "central_d2k1_d2k2");
}

DensitySurface cdf_from_pp_surface(const PriceSurface& surface) {
    require_kind(surface, {SurfaceKind::PP}, "cdf_from_pp_surface");
    return apply_stencil(surface, 1, 1, 1.0, Quantity::Cdf, "central_dk1_dk2");
}

double cdf_stencil_error_estimate(const PriceSurface& surface) {
    const DensitySurface fine = cdf_from_pp_surface(surface);
    PriceSurface coarse;
    coarse.kind = surface.kind;
    for (std::size_t i = 0; i < surface.k1.size(); i += 2) coarse.k1.push_back(surface.k1[i]);
    for (std::size_t j = 0; j < surface.k2.size(); j += 2) coarse.k2.push_back(surface.k2[j]);
    for (std::size_t i = 0; i < surface.k1.size(); i += 2)
        for (std::size_t j = 0; j < surface.k2.size(); j += 2) coarse.values.push_back(surface.at(i, j));
    const DensitySurface c = cdf_from_pp_surface(coarse);
    // coarse interior node (i, j) is source node (2i + 2, 2j + 2), fine interior node (2i + 1, 2j + 1)
    double gap = 0.0;
    for (std::size_t i = 0; i < c.k1.size(); ++i)
        for (std::size_t j = 0; j < c.k2.size(); ++j)
            gap = std::max(gap, std::abs(c.at(i, j) - fine.at(2 * i + 1, 2 * j + 1)));
    return gap / 3.0;
}

DensitySurface density_from_correlation_surface(const PriceSurface& surface) {
    require_kind(surface, {SurfaceKind::CorrCallDigital, SurfaceKind::CorrPutDigital},
                 "density_from_correlation_surface");
    const double sign = surface.kind == SurfaceKind::CorrCallDigital ? -1.0 : 1.0;
    return apply_stencil(surface, 2, 1, sign, Quantity::Density, "central_d2k1_dk2");
}

DensitySurface density_from_tlo_surface(const PriceSurface& surface) {
    require_kind(surface, {SurfaceKind::CC, SurfaceKind::CP, SurfaceKind::PC, SurfaceKind::PP},
                 "density_from_tlo_surface");
    return apply_stencil(surface, 2, 2, 1.0, Quantity::Density, "central_d2k1_d2k2");
}

DensitySurface recover_density(const PriceSurface& surface) {
    switch (surface.kind) {
        case SurfaceKind::PP: return density_from_pp_surface(surface);
        case SurfaceKind::CC:
        case SurfaceKind::CP:
        case SurfaceKind::PC: return density_from_tlo_surface(surface);
        case SurfaceKind::CorrCallDigital:
        case SurfaceKind::CorrPutDigital: return density_from_correlation_surface(surface);
        case SurfaceKind::DigitalPP: break;
    }
    throw std::invalid_argument("DigitalPP surfaces carry the CDF directly, not a density stencil input");
}

PriceSurface regularize_surface(const PriceSurface& surface, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
    if (lambda == 0.0) return surface;
    const auto n1 = static_cast<Eigen::Index>(surface.k1.size());
    const auto n2 = static_cast<Eigen::Index>(surface.k2.size());
    if (surface.values.size() != surface.k1.size() * surface.k2.size())
        throw std::invalid_argument("surface shape does not match its grids");

    // (I + lambda (G1 (x) I + I (x) G2)) u = p, diagonalised axis by axis.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(fourth_difference_gram(surface.k1.size()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(fourth_difference_gram(surface.k2.size()));
    if (e1.info() != Eigen::Success || e2.info() != Eigen::Success)
        throw NumericalError("regularization: eigen-decomposition failed");

    Eigen::MatrixXd p(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) p(i, j) = surface.values[static_cast<std::size_t>(i * n2 + j)];

    Eigen::MatrixXd c = e1.eigenvectors().transpose() * p * e2.eigenvectors();
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) {
            const double denom = 1.0 + lambda * (e1.eigenvalues()(i) + e2.eigenvalues()(j));
            if (!(denom > 0.0) || !std::isfinite(denom))
                throw NumericalError("regularization: singular normal system; raise lambda");
            c(i, j) /= denom;
        }
    const Eigen::MatrixXd u = e1.eigenvectors() * c * e2.eigenvectors().transpose();

    PriceSurface out = surface;
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) out.values[static_cast<std::size_t>(i * n2 + j)] = u(i, j);
    out.provenance["regularization_lambda"] = format_double(lambda);
    return out;
}

LambdaSelection select_lambda(const PriceSurface& noisy, const PriceSurface& holdout, std::span<const double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("lambda sweep is empty");
    if (noisy.values.size() != holdout.values.size() || noisy.k1 != holdout.k1 || noisy.k2 != holdout.k2)
        throw std::invalid_argument("holdout surface must share the grid of the noisy surface");
    LambdaSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (const double lambda : lambdas) {
        const double score = rms_difference(regularize_surface(noisy, lambda), holdout);
        sel.scores.emplace_back(lambda, score);
        if (score < best) {
            best = score;
            sel.best_lambda = lambda;
        }
    }
    return sel;
}

std::vector<double> lambda_sweep(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("lambda sweep needs 0 < lo <= hi");
    std::vector<double> out;
    const int decades = static_cast<int>(std::round(std::log10(hi / lo)));
    for (int d = 0; d <= decades; ++d) out.push_back(lo * std::pow(10.0, d));
    return out;
}

PriceSurface add_uniform_noise(const PriceSurface& surface, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0)) throw std::invalid_argument("noise amplitude must be >= 0");
    std::mt19937_64 gen(seed);
    PriceSurface out = surface;
    for (double& v : out.values) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        v += amplitude * (2.0 * u - 1.0);
    }
    out.provenance["noise_amplitude"] = format_double(amplitude);
    out.provenance["noise_seed"] = std::to_string(seed);
    return out;
}

double model_density(const ModelParams& params, double k1, double k2) {
    params.validate();
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw std::invalid_argument("model_density needs positive strikes");
    const double sd1 = params.vol1 * std::sqrt(params.maturity);
    const double sd2 = params.vol2 * std::sqrt(params.maturity);
    const double one_minus = 1.0 - params.rho * params.rho;
    if (sd1 == 0.0 || sd2 == 0.0 || one_minus <= 0.0)
        throw std::invalid_argument("model_density: the terminal law has no density for these parameters");
    const double z1 = (std::log(k1 / params.forward1()) + 0.5 * sd1 * sd1) / sd1;
    const double z2 = (std::log(k2 / params.forward2()) + 0.5 * sd2 * sd2) / sd2;
    const double quad = (z1 * z1 - 2.0 * params.rho * z1 * z2 + z2 * z2) / one_minus;
    return std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * sd1 * sd2 * std::sqrt(one_minus) * k1 * k2);
}

OracleComparison compare_to_model(const DensitySurface& density, const ModelParams& params,
                                  const std::optional<Box>& box) {
    OracleComparison c;
    for (std::size_t i = 0; i < density.k1.size(); ++i)
        for (std::size_t j = 0; j < density.k2.size(); ++j) {
            if (box && !box->contains(density.k1[i], density.k2[j])) continue;
            const double q = model_density(params, density.k1[i], density.k2[j]);
            c.sup_abs_error = std::max(c.sup_abs_error, std::abs(density.at(i, j) - q));
            c.max_oracle = std::max(c.max_oracle, q);
            ++c.nodes;
        }
    if (c.nodes == 0) throw std::invalid_argument("no density nodes inside the comparison box");
    c.relative_sup_error = c.sup_abs_error / c.max_oracle;
    return c;
}

std::vector<std::string> check_cdf(const DensitySurface& cdf, double slack) {
    std::vector<std::string> issues;
    auto where = [&](std::size_t i, std::size_t j) {
        return "(" + format_double(cdf.k1[i]) + ", " + format_double(cdf.k2[j]) + ")";
    };
    for (std::size_t i = 0; i < cdf.k1.size(); ++i)
        for (std::size_t j = 0; j < cdf.k2.size(); ++j) {
            const double v = cdf.at(i, j);
            if (!(v >= -slack && v <= 1.0 + slack)) issues.push_back("CDF outside [0, 1] at " + where(i, j));
            if (i + 1 < cdf.k1.size() && cdf.at(i + 1, j) < v - slack)
                issues.push_back("CDF decreasing along k1 at " + where(i, j));
            if (j + 1 < cdf.k2.size() && cdf.at(i, j + 1) < v - slack)
                issues.push_back("CDF decreasing along k2 at " + where(i, j));
        }
    return issues;
}

double integrate_density(const DensitySurface& d) {
    auto weight = [](const std::vector<double>& k, std::size_t i) {
        if (k.size() == 1) return 0.0;
        const double left = i > 0 ? k[i] - k[i - 1] : 0.0;
        const double right = i + 1 < k.size() ? k[i + 1] - k[i] : 0.0;
        return 0.5 * (left + right);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < d.k1.size(); ++i)
        for (std::size_t j = 0; j < d.k2.size(); ++j) total += weight(d.k1, i) * weight(d.k2, j) * d.at(i, j);
    return total;
}

}  // namespace tlhedge
