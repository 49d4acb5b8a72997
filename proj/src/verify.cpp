#include "tlhedge/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>

#include "tlhedge/density.hpp"
#include "tlhedge/format.hpp"
#include "tlhedge/io.hpp"
#include "tlhedge/model.hpp"
#include "tlhedge/replicate.hpp"

namespace tlhedge {

namespace {

constexpr std::array<TloKind, 4> kKinds{TloKind::CC, TloKind::CP, TloKind::PC, TloKind::PP};

ModelParams reference_model() {
    ModelParams m;
    m.vol1 = 0.2;
    m.vol2 = 0.25;
    m.rho = 0.5;
    return m;
}

// CC - CP - PC + PP against E[(S1 - k1)(S2 - k2)]; error relative to
// max(|rhs|, sum of leg prices) so that at-the-money zeros stay meaningful.
double parity_error(const ModelParams& m, double k1, double k2) {
    double lhs = 0.0, scale = 0.0;
    for (const auto kind : kKinds) {
        const double p = price_tlo(m, {kind, k1, k2});
        const bool plus = kind == TloKind::CC || kind == TloKind::PP;
        lhs += plus ? p : -p;
        scale += std::abs(p);
    }
    const double rhs = m.cross_moment() - k2 * m.forward1() - k1 * m.forward2() + k1 * k2;
    return std::abs(lhs - rhs) / std::max({std::abs(rhs), scale, 1e-300});
}

std::vector<double> moneyness_strikes(double forward, double sd, std::initializer_list<double> m) {
    std::vector<double> out;
    for (const double x : m) out.push_back(forward * std::exp(sd * x));
    return out;
}

CheckResult replication_exact() {
    const auto grid = StrikeGrid::make(0.0, 5.0, 0.05);
    const auto pts = eval_grid(0, 4, 21, 0, 4, 21);
    double worst = 0.0;
    for (const char* tok : {"constant:7", "monomial:1,0", "monomial:0,1", "monomial:1,1"}) {
        const auto p = payoff_from_token(tok);
        worst = std::max(worst, replication_error(decompose_bivariate(p, 0, 0, grid, grid), p, pts).sup_error);
    }
    return {"replication_exact", worst <= 1e-12, "sup_error=" + format_double(worst)};
}

CheckResult replication_refinement() {
    const auto p = payoff_from_token("monomial:1,2");
    const auto pts = cell_centred_grid(0, 4, 37);
    const auto coarse = StrikeGrid::make(0, 10, 0.02);
    const double e1 = replication_error(decompose_bivariate(p, 0, 0, coarse, coarse), p, pts).sup_error;
    const double e2 =
        replication_error(decompose_bivariate(p, 0, 0, coarse.refined(), coarse.refined()), p, pts).sup_error;
    const double ratio = e1 / e2;
    return {"replication_refinement_xy2", ratio >= 3 && ratio <= 5 && e2 <= 1e-2,
            "sup_error=" + format_double(e2) + " ratio=" + format_double(ratio)};
}

CheckResult parity() {
    double worst = 0.0;
    for (const double rho : {-0.8, 0.0, 0.8})
        for (const double v1 : {0.1, 0.4})
            for (const double v2 : {0.1, 0.4}) {
                ModelParams m;
                m.vol1 = v1;
                m.vol2 = v2;
                m.rho = rho;
                for (const double k1 : moneyness_strikes(m.forward1(), v1, {-1, 0, 1}))
                    for (const double k2 : moneyness_strikes(m.forward2(), v2, {-1, 0, 1}))
                        worst = std::max(worst, parity_error(m, k1, k2));
            }
    return {"parity", worst <= 1e-7, "max_rel_error=" + format_double(worst)};
}

CheckResult zero_vol_parity() {
    ModelParams m;
    m.spot1 = 1.1;
    m.spot2 = 0.9;
    m.vol1 = 0.0;
    m.vol2 = 0.0;
    m.rate = 0.03;
    m.allow_zero_vol = true;
    double worst = 0.0;
    for (const double k1 : {0.5, 1.0, 1.5})
        for (const double k2 : {0.5, 1.0, 1.5}) worst = std::max(worst, parity_error(m, k1, k2));
    return {"zero_vol_parity", worst <= 1e-14, "max_rel_error=" + format_double(worst)};
}

CheckResult surface_invariants() {
    const auto m = reference_model();
    const auto g = uniform_grid(0.5, 0.1, 13);
    std::vector<std::string> issues;
    for (const auto kind : {SurfaceKind::PP, SurfaceKind::CC, SurfaceKind::DigitalPP}) {
        const auto v = check_surface(generate_surface(m, kind, g, g));
        issues.insert(issues.end(), v.begin(), v.end());
    }
    const double far1 = m.forward1() * std::exp(8 * m.vol1);
    const double far2 = m.forward2() * std::exp(8 * m.vol2);
    const double corner = price_surface_node(m, SurfaceKind::DigitalPP, far1, far2);
    if (corner < 1 - 1e-4) issues.push_back("DigitalPP at 8 sd strikes is " + format_double(corner));
    return {"surface_invariants", issues.empty(),
            issues.empty() ? "violations=0" : std::to_string(issues.size()) + " violations; first: " + issues.front()};
}

CheckResult quadrature_vs_mc(const VerifyConfig& cfg) {
    const auto m = reference_model();
    std::vector<Tlo> tlos;
    for (const double k1 : moneyness_strikes(m.forward1(), m.vol1, {-1, 0, 1}))
        for (const double k2 : moneyness_strikes(m.forward2(), m.vol2, {-1, 0, 1}))
            for (const auto kind : kKinds) tlos.push_back({kind, k1, k2});
    const auto mc = price_tlos_mc(m, tlos, cfg.mc_paths, cfg.seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < tlos.size(); ++i)
        worst = std::max(worst, std::abs(price_tlo(m, tlos[i]) - mc[i].price) / mc[i].standard_error);
    return {"quadrature_vs_mc", worst <= 3.0,
            "max_z=" + format_double(worst) + " paths=" + std::to_string(cfg.mc_paths) +
                " seed=" + std::to_string(cfg.seed)};
}

CheckResult price_consistency() {
    const auto m = reference_model();
    const double h = 0.02;
    auto upper = [h](double f, double sd) { return std::ceil(f * std::exp(8 * sd) / h) * h; };
    const auto g1 = StrikeGrid::make(0, upper(m.forward1(), m.vol1), h);
    const auto g2 = StrikeGrid::make(0, upper(m.forward2(), m.vol2), h);
    double worst = 0.0;
    for (const char* tok : {"monomial:1,1", "monomial:1,2", "univariate_embedded:2"}) {
        const auto p = payoff_from_token(tok);
        const double direct = price_payoff_direct(m, p);
        const double hedged = price_portfolio(m, decompose_bivariate(p, 1.0, 1.0, g1, g2));
        worst = std::max(worst, std::abs(hedged - direct) / (1 + std::abs(direct)));
    }
    return {"price_consistency", worst <= 1e-4, "max_rel_gap=" + format_double(worst)};
}

const Box kDensityBox{0.7, 1.4, 0.7, 1.4};

std::vector<CheckResult> density_checks() {
    const auto m = reference_model();
    const auto coarse = uniform_grid(0.5, 0.04, 31);
    const auto fine = uniform_grid(0.5, 0.02, 61);
    const auto pp_c = generate_surface(m, SurfaceKind::PP, coarse, coarse);
    const auto pp_f = generate_surface(m, SurfaceKind::PP, fine, fine);
    std::vector<CheckResult> out;

    const double e_c = compare_to_model(density_from_pp_surface(pp_c), m, kDensityBox).relative_sup_error;
    const double e_f = compare_to_model(density_from_pp_surface(pp_f), m, kDensityBox).relative_sup_error;
    const double ratio = e_c / e_f;
    out.push_back({"density_convergence", ratio >= 3 && ratio <= 5,
                   "rel_error_coarse=" + format_double(e_c) + " rel_error_fine=" + format_double(e_f) +
                       " ratio=" + format_double(ratio)});

    // Pairwise agreement of the recovered densities on the coarse grid.
    std::vector<DensitySurface> d;
    std::vector<double> err;
    for (const auto kind : {SurfaceKind::PP, SurfaceKind::CC, SurfaceKind::CP, SurfaceKind::PC,
                            SurfaceKind::CorrCallDigital, SurfaceKind::CorrPutDigital}) {
        d.push_back(recover_density(kind == SurfaceKind::PP ? pp_c : generate_surface(m, kind, coarse, coarse)));
        err.push_back(compare_to_model(d.back(), m, kDensityBox).sup_abs_error);
    }
    double worst = 0.0;
    bool ok = true;
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b) {
            double gap = 0.0;
            for (std::size_t i = 0; i < d[a].k1.size(); ++i)
                for (std::size_t j = 0; j < d[a].k2.size(); ++j)
                    if (kDensityBox.contains(d[a].k1[i], d[a].k2[j]))
                        gap = std::max(gap, std::abs(d[a].at(i, j) - d[b].at(i, j)));
            const double bound = 2 * std::max(err[a], err[b]);
            ok = ok && gap <= bound;
            worst = std::max(worst, gap / bound);
        }
    out.push_back({"cross_kind_density", ok, "max_gap_over_bound=" + format_double(worst)});

    const auto cdf = cdf_from_pp_surface(pp_c);
    const auto dig = generate_surface(m, SurfaceKind::DigitalPP, coarse, coarse);
    double gap = 0.0;
    for (std::size_t i = 0; i < cdf.k1.size(); ++i)
        for (std::size_t j = 0; j < cdf.k2.size(); ++j) gap = std::max(gap, std::abs(cdf.at(i, j) - dig.at(i + 1, j + 1)));
    const double tol = 2 * cdf_stencil_error_estimate(pp_c);
    out.push_back({"cdf_identity", gap <= tol, "sup_gap=" + format_double(gap) + " tol=" + format_double(tol)});
    return out;
}

CheckResult surface_file(const std::filesystem::path& path) {
    try {
        const auto s = load_surface(path);
        const auto v = check_surface(s);
        if (!v.empty()) return {"surface_file", false, path.string() + ": " + v.front()};
        return {"surface_file", true, path.string()};
    } catch (const std::exception& e) {
        return {"surface_file", false, e.what()};
    }
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {name, false, std::string("error: ") + e.what()};
    }
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyConfig& config) {
    std::vector<CheckResult> out;
    out.push_back(guarded("replication_exact", replication_exact));
    out.push_back(guarded("replication_refinement_xy2", replication_refinement));
    out.push_back(guarded("parity", parity));
    out.push_back(guarded("zero_vol_parity", zero_vol_parity));
    out.push_back(guarded("surface_invariants", surface_invariants));
    out.push_back(guarded("quadrature_vs_mc", [&] { return quadrature_vs_mc(config); }));
    out.push_back(guarded("price_consistency", price_consistency));
    try {
        for (auto& r : density_checks()) out.push_back(std::move(r));
    } catch (const std::exception& e) {
        out.push_back({"density_checks", false, std::string("error: ") + e.what()});
    }
    if (config.surface_file) out.push_back(surface_file(*config.surface_file));
    return out;
}

}  // namespace tlhedge
