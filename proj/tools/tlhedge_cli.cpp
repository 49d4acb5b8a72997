// tlhedge: static hedges of bivariate payoffs and density recovery from
// traffic light option surfaces.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tlhedge/density.hpp"
#include "tlhedge/format.hpp"
#include "tlhedge/io.hpp"
#include "tlhedge/model.hpp"
#include "tlhedge/replicate.hpp"
#include "tlhedge/verify.hpp"

namespace fs = std::filesystem;
using namespace tlhedge;

namespace {

struct GridOpts {
    double lower = 0.0;
    double upper = 10.0;
    double step = 0.02;
};

struct AxisOpts {
    double lo = 0.5;
    double step = 0.04;
    std::size_t n = 31;
};

struct Options {
    fs::path out = ".";
    std::uint64_t seed = 12345;
    double lambda = 0.0;
    std::string save_config;

    ModelParams model;

    // replicate
    std::string payoff;
    std::string domain = "quadrant";
    double anchor_a = 0.0;
    double anchor_b = 0.0;
    GridOpts grid1, grid2;
    double eval_lo = 0.0;
    double eval_hi = 4.0;
    std::size_t eval_n = 37;
    std::string portfolio_name = "portfolio.csv";

    // price
    std::string portfolio_file;
    std::string instrument;
    std::string direct_payoff;
    std::size_t mc_paths = 0;

    // surface / density
    std::string kind = "PP";
    AxisOpts axis1, axis2;
    std::string surface_name = "surface.csv";
    std::string surface_file;
    std::string quantity = "density";
    double noise = 0.0;
    bool sweep = false;
    bool oracle = false;
    std::string density_name = "density.csv";

    // verify
    std::size_t verify_paths = 200000;
    std::string verify_surface;
};

class Report {
public:
    void add(const std::string& key, const std::string& value) { os_ << key << ',' << value << '\n'; }
    void add(const std::string& key, double value) { add(key, format_double(value)); }
    void add_count(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }

    void emit(const fs::path& path) const {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << os_.str();
        std::cout << os_.str();
    }

private:
    std::ostringstream os_;
};

void add_model_options(CLI::App* cmd, ModelParams& m) {
    cmd->add_option("--spot1", m.spot1, "Spot of asset 1")->capture_default_str();
    cmd->add_option("--spot2", m.spot2, "Spot of asset 2")->capture_default_str();
    cmd->add_option("--vol1", m.vol1, "Volatility of asset 1")->capture_default_str();
    cmd->add_option("--vol2", m.vol2, "Volatility of asset 2")->capture_default_str();
    cmd->add_option("--rho", m.rho, "Correlation")->capture_default_str();
    cmd->add_option("--rate", m.rate, "Risk-free rate")->capture_default_str();
    cmd->add_option("--maturity", m.maturity, "Maturity in years")->capture_default_str();
    cmd->add_flag("--allow-zero-vol", m.allow_zero_vol, "Admit zero volatility");
}

void add_axis_options(CLI::App* cmd, const std::string& name, AxisOpts& a) {
    cmd->add_option("--" + name + "-lo", a.lo, "First strike")->capture_default_str();
    cmd->add_option("--" + name + "-step", a.step, "Strike spacing")->capture_default_str();
    cmd->add_option("--" + name + "-n", a.n, "Number of strikes")->capture_default_str();
}

void add_model_report(Report& r, const ModelParams& m) {
    for (const auto& [k, v] : m.describe()) r.add("model." + k, v);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(text);
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

Asset asset_of(const std::string& s) {
    if (s == "1") return Asset::First;
    if (s == "2") return Asset::Second;
    throw std::invalid_argument("asset must be 1 or 2, got '" + s + "'");
}

// bond | forward:ASSET:ANCHOR | call:ASSET:K | put:ASSET:K | tlo:KIND:K1,K2
Instrument parse_instrument(const std::string& token) {
    const auto f = split(token, ':');
    if (f.size() == 1 && f[0] == "bond") return Bond{};
    if (f.size() == 3) {
        if (f[0] == "forward") return Forward{asset_of(f[1]), parse_double(f[2], "anchor")};
        if (f[0] == "call") return Call{asset_of(f[1]), parse_double(f[2], "strike")};
        if (f[0] == "put") return Put{asset_of(f[1]), parse_double(f[2], "strike")};
        if (f[0] == "tlo") {
            const auto k = split(f[2], ',');
            if (k.size() == 2) return Tlo{parse_tlo_kind(f[1]), parse_double(k[0], "k1"), parse_double(k[1], "k2")};
        }
    }
    throw std::invalid_argument("cannot parse instrument '" + token + "'");
}

int cmd_replicate(const Options& o) {
    const DomainKind domain = parse_domain_kind(o.domain);
    const PayoffSpec payoff = payoff_from_token(o.payoff, domain);
    const auto g1 = StrikeGrid::make(o.grid1.lower, o.grid1.upper, o.grid1.step);
    const auto g2 = StrikeGrid::make(o.grid2.lower, o.grid2.upper, o.grid2.step);
    const auto pts = cell_centred_grid(o.eval_lo, o.eval_hi, o.eval_n);

    const HedgePortfolio port = decompose_bivariate(payoff, o.anchor_a, o.anchor_b, g1, g2);
    const auto err = replication_error(port, payoff, pts);
    const HedgePortfolio fine = decompose_bivariate(payoff, o.anchor_a, o.anchor_b, g1.refined(), g2.refined());
    const auto err_fine = replication_error(fine, payoff, pts);

    const fs::path file = o.out / o.portfolio_name;
    save_portfolio(file, port);

    Report r;
    r.add("command", "replicate");
    r.add("payoff", payoff.name());
    r.add("domain", std::string(to_string(domain)));
    r.add("portfolio_file", file.string());
    r.add_count("instruments", port.size());
    r.add("eval_box", format_double(o.eval_lo) + ";" + format_double(o.eval_hi));
    r.add_count("eval_points", pts.size());
    r.add_count("eval_points_outside_box", err.outside_box.size());
    r.add("sup_error", err.sup_error);
    r.add("l2_error", err.l2_error);
    r.add("sup_error_refined", err_fine.sup_error);
    r.add("l2_error_refined", err_fine.l2_error);
    r.add("refinement_ratio_sup", err_fine.sup_error > 0 ? format_double(err.sup_error / err_fine.sup_error) : "nan");
    r.add("refinement_ratio_l2", err_fine.l2_error > 0 ? format_double(err.l2_error / err_fine.l2_error) : "nan");
    r.emit(o.out / "replicate_report.csv");
    return 0;
}

int cmd_price(const Options& o) {
    o.model.validate();
    Report r;
    r.add("command", "price");
    add_model_report(r, o.model);
    double undiscounted = 0.0;
    std::optional<PayoffSpec> mc_payoff;
    if (!o.portfolio_file.empty()) {
        const HedgePortfolio port = load_portfolio(o.portfolio_file);
        undiscounted = price_portfolio(o.model, port);
        r.add("portfolio_file", o.portfolio_file);
        r.add_count("instruments", port.size());
        mc_payoff = finite_difference_payoff([port](double x, double y) { return portfolio_payoff(port, x, y); },
                                             FiniteDifference{}, DomainKind::FullPlane);
    } else if (!o.instrument.empty()) {
        const Instrument inst = parse_instrument(o.instrument);
        r.add("instrument", describe(inst));
        if (const auto* t = std::get_if<Tlo>(&inst)) {
            undiscounted = price_tlo(o.model, *t);
        } else {
            const HedgePortfolio single = HedgePortfolio::assemble(std::vector<Position>{{inst, 1.0}}, {0.0, 0.0},
                                                                   {"instrument", DomainKind::FullPlane, {}, {}});
            undiscounted = price_portfolio(o.model, single);
        }
        mc_payoff = finite_difference_payoff([inst](double x, double y) { return instrument_payoff(inst, x, y); },
                                             FiniteDifference{}, DomainKind::FullPlane);
    } else if (o.direct_payoff.empty()) {
        throw std::invalid_argument("price needs --portfolio, --instrument or --payoff");
    }
    if (mc_payoff) {
        r.add("undiscounted", undiscounted);
        r.add("discounted", undiscounted * o.model.discount());
    }
    if (!o.direct_payoff.empty()) {
        const double direct = price_payoff_direct(o.model, payoff_from_token(o.direct_payoff));
        r.add("payoff", o.direct_payoff);
        r.add("direct_undiscounted", direct);
        r.add("direct_discounted", direct * o.model.discount());
        if (mc_payoff) r.add("relative_gap", std::abs(undiscounted - direct) / (1 + std::abs(direct)));
    }
    if (o.mc_paths > 0 && mc_payoff) {
        const McEstimate mc = price_payoff_mc(o.model, *mc_payoff, o.mc_paths, o.seed);
        r.add("mc_paths", std::to_string(o.mc_paths));
        r.add("mc_seed", std::to_string(o.seed));
        r.add("mc_undiscounted", mc.price);
        r.add("mc_standard_error", mc.standard_error);
        r.add("mc_z", mc.standard_error > 0 ? format_double((undiscounted - mc.price) / mc.standard_error) : "nan");
    }
    r.emit(o.out / "price_report.csv");
    return 0;
}

PriceSurface surface_from_options(const Options& o) {
    const auto k1 = uniform_grid(o.axis1.lo, o.axis1.step, o.axis1.n);
    const auto k2 = uniform_grid(o.axis2.lo, o.axis2.step, o.axis2.n);
    return generate_surface(o.model, parse_surface_kind(o.kind), k1, k2);
}

int cmd_surface(const Options& o) {
    const SurfaceKind kind = parse_surface_kind(o.kind);
    const PriceSurface s = surface_from_options(o);
    const fs::path file = o.out / o.surface_name;
    save_surface(file, s);
    const auto issues = check_surface(s);
    Report r;
    r.add("command", "surface");
    r.add("kind", std::string(to_string(kind)));
    r.add("surface_file", file.string());
    r.add_count("nodes", s.values.size());
    r.add_count("invariant_violations", issues.size());
    for (const auto& i : issues) r.add("violation", i);
    r.emit(o.out / "surface_report.csv");
    return 0;
}

int cmd_density(const Options& o) {
    const PriceSurface clean = o.surface_file.empty() ? surface_from_options(o) : load_surface(o.surface_file);
    double max_abs = 0.0;
    for (const double v : clean.values) max_abs = std::max(max_abs, std::abs(v));
    const double amplitude = o.noise * max_abs;
    const PriceSurface input = o.noise > 0 ? add_uniform_noise(clean, amplitude, o.seed) : clean;

    Report r;
    r.add("command", "density");
    r.add("source", o.surface_file.empty() ? "generated" : o.surface_file);
    r.add("source_kind", std::string(to_string(clean.kind)));
    if (o.noise > 0) {
        r.add("noise_amplitude", amplitude);
        r.add("noise_seed", std::to_string(o.seed));
    }

    double lambda = o.lambda;
    if (o.sweep) {
        if (!(o.noise > 0)) throw std::invalid_argument("--sweep needs --noise to build a held-out replicate");
        const PriceSurface holdout = add_uniform_noise(clean, amplitude, o.seed + 1);
        const auto sweep = lambda_sweep();
        const LambdaSelection sel = select_lambda(input, holdout, sweep);
        for (const auto& [l, score] : sel.scores) r.add("sweep_score[" + format_double(l) + "]", score);
        lambda = sel.best_lambda;
    }
    r.add("lambda", lambda);
    const PriceSurface smoothed = regularize_surface(input, lambda);

    const Quantity quantity = parse_quantity(o.quantity);
    DensitySurface out;
    if (quantity == Quantity::Cdf) {
        out = cdf_from_pp_surface(smoothed);
    } else {
        out = recover_density(smoothed);
    }
    out.provenance["lambda"] = format_double(lambda);
    const fs::path file = o.out / o.density_name;
    save_density(file, out);
    r.add("quantity", std::string(to_string(quantity)));
    r.add("density_file", file.string());
    r.add_count("nodes", out.values.size());

    if (quantity == Quantity::Cdf) {
        const auto issues = check_cdf(out);
        r.add_count("cdf_violations", issues.size());
        r.add("cdf_at_last_node", out.values.back());
    } else {
        r.add("integral", integrate_density(out));
        if (o.oracle) {
            add_model_report(r, o.model);
            const OracleComparison c = compare_to_model(out, o.model);
            r.add("oracle_sup_abs_error", c.sup_abs_error);
            r.add("oracle_max", c.max_oracle);
            r.add("oracle_relative_sup_error", c.relative_sup_error);
        }
    }
    r.emit(o.out / "density_report.csv");
    return 0;
}

int cmd_verify(const Options& o) {
    VerifyConfig cfg;
    cfg.seed = o.seed;
    cfg.mc_paths = o.verify_paths;
    if (!o.verify_surface.empty()) cfg.surface_file = o.verify_surface;
    const auto results = run_verification(cfg);
    Report r;
    r.add("check", "status,detail");
    std::size_t failed = 0;
    for (const auto& c : results) {
        r.add(c.name, std::string(c.passed ? "PASS" : "FAIL") + "," + c.detail);
        failed += c.passed ? 0 : 1;
    }
    r.emit(o.out / "verify_report.csv");
    if (failed > 0) std::cerr << failed << " check(s) failed\n";
    return failed > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static hedging of bivariate payoffs with traffic light options, and joint density recovery"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file");
    Options o;
    std::string out_dir = ".";
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
    app.add_option("--lambda", o.lambda, "Regularization weight")->capture_default_str();
    app.add_option("--save-config", o.save_config, "Write the effective configuration to this file")
        ->configurable(false);

    auto* rep = app.add_subcommand("replicate", "Build a static hedge and report replication error");
    rep->add_option("--payoff", o.payoff, "Payoff token, e.g. monomial:1,2")->required();
    rep->add_option("--domain", o.domain, "quadrant or full")->capture_default_str();
    rep->add_option("--anchor-a", o.anchor_a, "Expansion point in asset 1")->capture_default_str();
    rep->add_option("--anchor-b", o.anchor_b, "Expansion point in asset 2")->capture_default_str();
    rep->add_option("--lower1", o.grid1.lower)->capture_default_str();
    rep->add_option("--upper1", o.grid1.upper)->capture_default_str();
    rep->add_option("--step1", o.grid1.step)->capture_default_str();
    rep->add_option("--lower2", o.grid2.lower)->capture_default_str();
    rep->add_option("--upper2", o.grid2.upper)->capture_default_str();
    rep->add_option("--step2", o.grid2.step)->capture_default_str();
    rep->add_option("--eval-lo", o.eval_lo, "Lower corner of the square eval box")->capture_default_str();
    rep->add_option("--eval-hi", o.eval_hi, "Upper corner of the square eval box")->capture_default_str();
    rep->add_option("--eval-n", o.eval_n, "Cell-centred eval points per axis")->capture_default_str();
    rep->add_option("--portfolio-name", o.portfolio_name)->capture_default_str();

    auto* pri = app.add_subcommand("price", "Price a portfolio file or a single instrument");
    pri->add_option("--portfolio", o.portfolio_file, "Portfolio file");
    pri->add_option("--instrument", o.instrument, "bond | forward:A:X | call:A:K | put:A:K | tlo:KIND:K1,K2");
    pri->add_option("--payoff", o.direct_payoff, "Also price this payoff token directly");
    pri->add_option("--mc-paths", o.mc_paths, "Monte Carlo cross-check paths (0 = off)")->capture_default_str();
    add_model_options(pri, o.model);

    auto* sur = app.add_subcommand("surface", "Generate a price surface on a strike grid");
    sur->add_option("--kind", o.kind, "PP, CC, CP, PC, CorrCallDigital, CorrPutDigital or DigitalPP")
        ->capture_default_str();
    add_axis_options(sur, "k1", o.axis1);
    add_axis_options(sur, "k2", o.axis2);
    sur->add_option("--surface-name", o.surface_name)->capture_default_str();
    add_model_options(sur, o.model);

    auto* den = app.add_subcommand("density", "Recover the joint density or CDF from a surface");
    den->add_option("--surface", o.surface_file, "Surface file (otherwise generated from the model)");
    den->add_option("--kind", o.kind, "Kind of the generated surface")->capture_default_str();
    add_axis_options(den, "k1", o.axis1);
    add_axis_options(den, "k2", o.axis2);
    den->add_option("--quantity", o.quantity, "density or cdf")->capture_default_str();
    den->add_option("--noise", o.noise, "Uniform noise amplitude relative to max |price|")->capture_default_str();
    den->add_flag("--sweep", o.sweep, "Choose lambda by held-out grid search");
    den->add_flag("--oracle", o.oracle, "Compare against the model density");
    den->add_option("--density-name", o.density_name)->capture_default_str();
    add_model_options(den, o.model);

    auto* ver = app.add_subcommand("verify", "Run the invariant suite");
    ver->add_option("--mc-paths", o.verify_paths, "Monte Carlo paths")->capture_default_str();
    ver->add_option("--surface-file", o.verify_surface, "Also validate this surface file");

    CLI11_PARSE(app, argc, argv);
    o.out = out_dir;

    try {
        if (!o.save_config.empty()) {
            std::ofstream cfg(o.save_config);
            cfg << app.config_to_str(true, false);
        }
        if (*rep) return cmd_replicate(o);
        if (*pri) return cmd_price(o);
        if (*sur) return cmd_surface(o);
        if (*den) return cmd_density(o);
        if (*ver) return cmd_verify(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
