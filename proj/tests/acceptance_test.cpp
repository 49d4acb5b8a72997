// Acceptance suite. Each criterion is one test; a summary table with one
// PASS/FAIL line per criterion is printed at the end.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tlhedge/density.hpp"
#include "tlhedge/model.hpp"
#include "tlhedge/replicate.hpp"

using namespace tlhedge;

namespace {

std::map<std::string, std::string>& details() {
    static std::map<std::string, std::string> d;
    return d;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void note(const std::string& id, const std::string& text) { details()[id] = text; }

std::string current_id() { return ::testing::UnitTest::GetInstance()->current_test_info()->name(); }

class Summary : public ::testing::EmptyTestEventListener {
    std::vector<std::pair<std::string, bool>> rows_;
    void OnTestEnd(const ::testing::TestInfo& info) override { rows_.emplace_back(info.name(), info.result()->Passed()); }
    void OnTestProgramEnd(const ::testing::UnitTest&) override {
        std::printf("\n==== acceptance summary ====\n");
        for (const auto& [id, ok] : rows_)
            std::printf("%-4s %s  %s\n", ok ? "PASS" : "FAIL", id.c_str(), details()[id].c_str());
        std::fflush(stdout);
    }
};

double trap_weight(const StrikeGrid& g, std::size_t i) {
    return (i == 0 || i == g.intervals()) ? g.spacing / 2 : g.spacing;
}

// the stored node nearest a decimal strike; portfolio lookups are exact
double on_grid(const StrikeGrid& g, double k) { return g.node(*g.index_of(k)); }

double sup_error(const PayoffSpec& p, const StrikeGrid& g1, const StrikeGrid& g2, const std::vector<EvalPoint>& pts,
                 double a = 0, double b = 0) {
    return replication_error(decompose_bivariate(p, a, b, g1, g2), p, pts).sup_error;
}

double rms_error(const PayoffSpec& p, const StrikeGrid& g, const std::vector<EvalPoint>& pts) {
    return replication_error(decompose_bivariate(p, 0, 0, g, g), p, pts).l2_error;
}

ModelParams reference_model() {
    ModelParams m;
    m.vol1 = 0.2;
    m.vol2 = 0.25;
    m.rho = 0.5;
    return m;
}

const Box kDensityBox{0.7, 1.4, 0.7, 1.4};

double peak(const PriceSurface& s) { return *std::max_element(s.values.begin(), s.values.end()); }

}  // namespace

// Bilinear payoffs are replicated with finitely many instruments.
TEST(Acceptance, ACC01_replication_exactness) {
    const auto g = StrikeGrid::make(0, 10, 0.05);
    const auto pts = eval_grid(0, 4, 21, 0, 4, 21);
    double worst = 0;
    for (const char* tok : {"constant:1", "monomial:1,0", "monomial:0,1", "monomial:1,1"}) {
        const double e = sup_error(payoff_from_token(tok), g, g, pts);
        EXPECT_LE(e, 1e-12) << tok;
        worst = std::max(worst, e);
    }
    note(current_id(), "max sup error " + fmt(worst) + " (tol 1e-12)");
}

TEST(Acceptance, ACC02_xy2_strip) {
    const auto p = payoff_from_token("monomial:1,2");
    const auto g = StrikeGrid::make(0, 10, 0.01);
    const auto port = decompose_bivariate(p, 0, 0, g, g);
    ASSERT_EQ(port.size(), g.size());
    for (const auto& pos : port.positions()) {
        const auto* t = std::get_if<Tlo>(&pos.instrument);
        ASSERT_NE(t, nullptr) << describe(pos.instrument);
        EXPECT_EQ(t->kind, TloKind::CC);
        EXPECT_EQ(t->k1, 0.0);
        const std::size_t j = *g.index_of(t->k2);
        EXPECT_NEAR(pos.weight / trap_weight(g, j), 2.0, 1e-12);
    }
    const auto pts = cell_centred_grid(0, 4, 37);
    const double e = sup_error(p, g, g, pts);
    const double e_half = sup_error(p, g.refined(), g.refined(), pts);
    const double ratio = e / e_half;
    EXPECT_LE(e, 1e-2);
    EXPECT_GE(ratio, 3);
    EXPECT_LE(ratio, 5);
    note(current_id(), "only CC(0,k2), density 2; sup error " + fmt(e) + ", halving ratio " + fmt(ratio));
}

TEST(Acceptance, ACC03_monomial_sheets) {
    const auto g = StrikeGrid::make(0, 5, 0.02);
    const auto pts = cell_centred_grid(0, 4, 37);
    std::ostringstream os;
    for (const auto& [tok, density] :
         std::vector<std::pair<const char*, double (*)(double, double)>>{
             {"monomial:2,2", [](double, double) { return 4.0; }},
             {"monomial:3,2", [](double k1, double) { return 12 * k1; }}}) {
        const auto p = payoff_from_token(tok);
        const auto port = decompose_bivariate(p, 0, 0, g, g);
        for (const double x1 : {0.5, 1.3, 2.74, 4.0})
            for (const double x2 : {0.1, 1.0, 3.38}) {
                const double k1 = on_grid(g, x1), k2 = on_grid(g, x2);
                const double w = trap_weight(g, *g.index_of(k1)) * trap_weight(g, *g.index_of(k2));
                const auto held = port.weight_of(Tlo{TloKind::CC, k1, k2});
                ASSERT_TRUE(held.has_value());
                EXPECT_NEAR(*held / w, density(k1, k2), 1e-12) << tok << ' ' << k1 << ' ' << k2;
            }
        const double ratio = rms_error(p, g, pts) / rms_error(p, g.refined(), pts);
        EXPECT_GE(ratio, 3) << tok;
        EXPECT_LE(ratio, 5) << tok;
        os << "; " << tok << " rms ratio " << fmt(ratio);
    }
    note(current_id(), "sheet densities 4 and 12 k1 exact" + os.str());
}

TEST(Acceptance, ACC04_gaussian) {
    const auto p = payoff_from_token("gaussian_bump");
    const auto g = StrikeGrid::make(0, 10, 0.05);
    const auto port = decompose_bivariate(p, 0, 0, g, g);
    for (const double x1 : {0.35, 1.0, 1.65, 2.9})
        for (const double x2 : {0.2, 1.25, 2.4}) {
            const double k1 = on_grid(g, x1), k2 = on_grid(g, x2);
            const double w = trap_weight(g, *g.index_of(k1)) * trap_weight(g, *g.index_of(k2));
            EXPECT_NEAR(port.weight_of(Tlo{TloKind::CC, k1, k2}).value_or(0.0) / w, oracle::gaussian_sheet_density(k1, k2), 1e-12);
        }
    for (const double x : {0.35, 1.0, 2.9}) {
        const double k = on_grid(g, x);
        const double w = trap_weight(g, *g.index_of(k));
        EXPECT_NEAR(port.weight_of(Call{Asset::First, k}).value_or(0.0) / w, oracle::gaussian_strip_density(k), 1e-12);
        EXPECT_NEAR(port.weight_of(Call{Asset::Second, k}).value_or(0.0) / w, oracle::gaussian_strip_density(k), 1e-12);
    }
    const auto pts = cell_centred_grid(0, 3, 31);
    std::vector<double> errs;
    auto grid = StrikeGrid::make(0, 10, 0.2);
    for (int level = 0; level < 4; ++level, grid = grid.refined()) errs.push_back(sup_error(p, grid, grid, pts));
    std::ostringstream os;
    for (std::size_t i = 0; i < errs.size(); ++i) {
        if (i > 0) EXPECT_LT(errs[i], errs[i - 1]);
        os << fmt(errs[i]) << (i + 1 < errs.size() ? " > " : "");
    }
    note(current_id(), "weight densities match; sup errors " + os.str());
}

TEST(Acceptance, ACC05_price_consistency) {
    const auto m = reference_model();
    const double h = 0.02;
    auto upper = [h](double f, double sd) { return std::ceil(f * std::exp(8 * sd) / h) * h; };
    const auto g1 = StrikeGrid::make(0, upper(m.forward1(), m.vol1), h);
    const auto g2 = StrikeGrid::make(0, upper(m.forward2(), m.vol2), h);
    const double a = std::round(m.forward1() / h) * h;
    const double b = std::round(m.forward2() / h) * h;
    double worst = 0;
    std::string worst_tok;
    for (const char* tok : {"constant:3", "monomial:1,1", "monomial:1,2", "monomial:2,2", "gaussian_bump",
                            "product_exponential:0.5,0.3", "univariate_embedded:2"}) {
        const auto p = payoff_from_token(tok);
        const double direct = price_payoff_direct(m, p);
        const double hedged = price_portfolio(m, decompose_bivariate(p, a, b, g1, g2));
        const double gap = std::abs(hedged - direct) / (1 + std::abs(direct));
        EXPECT_LE(gap, 1e-4) << tok;
        if (gap > worst) worst = gap, worst_tok = tok;
    }
    note(current_id(), "max relative gap " + fmt(worst) + " (" + worst_tok + ", tol 1e-4)");
}

namespace {

struct SweepPoint {
    ModelParams model;
    std::vector<Tlo> tlos;
};

std::vector<SweepPoint> parameter_sweep() {
    std::vector<SweepPoint> out;
    for (const double rho : {-0.8, 0.0, 0.8})
        for (const double v1 : {0.1, 0.4})
            for (const double v2 : {0.1, 0.4}) {
                SweepPoint s;
                s.model.vol1 = v1;
                s.model.vol2 = v2;
                s.model.rho = rho;
                for (const double x : {-1.0, -0.5, 0.0, 0.5, 1.0})
                    for (const double y : {-1.0, -0.5, 0.0, 0.5, 1.0})
                        for (const auto kind : {TloKind::CC, TloKind::CP, TloKind::PC, TloKind::PP})
                            s.tlos.push_back({kind, s.model.forward1() * std::exp(v1 * x),
                                              s.model.forward2() * std::exp(v2 * y)});
                out.push_back(s);
            }
    return out;
}

}  // namespace

TEST(Acceptance, ACC06_parity) {
    double worst = 0;
    for (const auto& s : parameter_sweep()) {
        const auto& m = s.model;
        const oracle::Lognormal2 l{m.forward1(), m.forward2(), m.vol1, m.vol2, m.rho};
        for (std::size_t i = 0; i < s.tlos.size(); i += 4) {
            const double k1 = s.tlos[i].k1, k2 = s.tlos[i].k2;
            const double cc = price_tlo(m, {TloKind::CC, k1, k2});
            const double cp = price_tlo(m, {TloKind::CP, k1, k2});
            const double pc = price_tlo(m, {TloKind::PC, k1, k2});
            const double pp = price_tlo(m, {TloKind::PP, k1, k2});
            const double rhs = oracle::cross_moment(l) - k2 * l.f1 - k1 * l.f2 + k1 * k2;
            // at-the-money with rho = 0 the right side is 0; scale by the legs there
            const double scale = std::max(std::abs(rhs), cc + cp + pc + pp);
            const double rel = std::abs(cc - cp - pc + pp - rhs) / scale;
            EXPECT_LE(rel, 1e-7) << m.rho << ' ' << m.vol1 << ' ' << m.vol2 << ' ' << k1 << ' ' << k2;
            worst = std::max(worst, rel);
        }
    }
    note(current_id(), "max relative error " + fmt(worst) + " over 300 strike pairs (tol 1e-7)");
}

TEST(Acceptance, ACC07_quadrature_vs_mc) {
    double worst = 0;
    std::size_t n = 0, outside = 0;
    for (const auto& s : parameter_sweep()) {
        const auto mc = price_tlos_mc(s.model, s.tlos, 1000000, 12345);
        for (std::size_t i = 0; i < s.tlos.size(); ++i) {
            const double z = std::abs(price_tlo(s.model, s.tlos[i]) - mc[i].price) / mc[i].standard_error;
            EXPECT_LE(z, 3.0) << describe(Instrument{s.tlos[i]}) << " rho " << s.model.rho;
            worst = std::max(worst, z);
            ++n;
            outside += z > 3.0;
        }
    }
    note(current_id(), std::to_string(n) + " TLOs, seed 12345, 1e6 paths; max |z| " + fmt(worst) + ", beyond 3 SE: " +
                           std::to_string(outside));
}

TEST(Acceptance, ACC08_density_recovery) {
    const auto m = reference_model();
    const auto coarse = uniform_grid(0.5, 0.04, 31);
    const auto fine = uniform_grid(0.5, 0.02, 61);
    auto rel = [&](const PriceSurface& s) {
        return compare_to_model(recover_density(s), m, kDensityBox).relative_sup_error;
    };
    const double e_c = rel(generate_surface(m, SurfaceKind::PP, coarse, coarse));
    const double e_f = rel(generate_surface(m, SurfaceKind::PP, fine, fine));
    const double ratio = e_c / e_f;
    EXPECT_GE(ratio, 3);
    EXPECT_LE(ratio, 5);

    std::vector<DensitySurface> d;
    std::vector<double> err;
    for (const auto kind : {SurfaceKind::PP, SurfaceKind::CC, SurfaceKind::CP, SurfaceKind::PC,
                            SurfaceKind::CorrCallDigital, SurfaceKind::CorrPutDigital}) {
        d.push_back(recover_density(generate_surface(m, kind, fine, fine)));
        double e = 0;
        for (std::size_t i = 0; i < d.back().k1.size(); ++i)
            for (std::size_t j = 0; j < d.back().k2.size(); ++j) {
                const double x = d.back().k1[i], y = d.back().k2[j];
                if (kDensityBox.contains(x, y))
                    e = std::max(e, std::abs(d.back().at(i, j) -
                                             oracle::lognormal2_density({1, 1, m.vol1, m.vol2, m.rho}, x, y)));
            }
        err.push_back(e);
    }
    double worst = 0;
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = a + 1; b < d.size(); ++b) {
            double gap = 0;
            for (std::size_t i = 0; i < d[a].k1.size(); ++i)
                for (std::size_t j = 0; j < d[a].k2.size(); ++j)
                    if (kDensityBox.contains(d[a].k1[i], d[a].k2[j]))
                        gap = std::max(gap, std::abs(d[a].at(i, j) - d[b].at(i, j)));
            const double bound = 2 * *std::max_element(err.begin(), err.end());
            EXPECT_LE(gap, bound) << a << ' ' << b;
            worst = std::max(worst, gap / bound);
        }
    note(current_id(), "relative sup error " + fmt(e_c) + " -> " + fmt(e_f) + ", ratio " + fmt(ratio) +
                           "; max pairwise gap / bound " + fmt(worst));
}

TEST(Acceptance, ACC09_cdf_identity) {
    const auto m = reference_model();
    const oracle::Lognormal2 l{1, 1, m.vol1, m.vol2, m.rho};
    const auto fine = uniform_grid(0.5, 0.02, 61);
    const auto pp = generate_surface(m, SurfaceKind::PP, fine, fine);
    const auto cdf = cdf_from_pp_surface(pp);
    const auto digital = generate_surface(m, SurfaceKind::DigitalPP, fine, fine);
    double gap = 0, oracle_gap = 0;
    for (std::size_t i = 0; i < cdf.k1.size(); ++i)
        for (std::size_t j = 0; j < cdf.k2.size(); ++j) {
            gap = std::max(gap, std::abs(cdf.at(i, j) - digital.at(i + 1, j + 1)));
            oracle_gap = std::max(oracle_gap, std::abs(digital.at(i + 1, j + 1) -
                                                       oracle::digital_pp(l, cdf.k1[i], cdf.k2[j])));
        }
    // differencing tolerance: twice the Richardson estimate of the stencil error
    const double tol = 2 * cdf_stencil_error_estimate(pp);
    EXPECT_LE(gap, tol);
    EXPECT_LE(oracle_gap, 1e-9);

    const double h = 0.02;
    const double c1 = m.forward1() * std::exp(8 * m.vol1);
    const double c2 = m.forward2() * std::exp(8 * m.vol2);
    const auto corner = generate_surface(m, SurfaceKind::PP, uniform_grid(c1 - 2 * h, h, 5),
                                         uniform_grid(c2 - 2 * h, h, 5));
    const double tail = cdf_from_pp_surface(corner).at(1, 1);
    EXPECT_GE(tail, 1 - 1e-4);
    note(current_id(), "sup |cdf - digital| " + fmt(gap) + " (tol " + fmt(tol) + "); cdf at 8 sd " + fmt(tail));
}

TEST(Acceptance, ACC10_ill_posedness) {
    const auto m = reference_model();
    const auto coarse = uniform_grid(0.5, 0.1, 13);
    const auto fine = uniform_grid(0.5, 0.02, 61);
    auto error = [&](const PriceSurface& s) {
        return compare_to_model(density_from_pp_surface(s), m, kDensityBox).relative_sup_error;
    };
    const auto clean_c = generate_surface(m, SurfaceKind::PP, coarse, coarse);
    const auto clean_f = generate_surface(m, SurfaceKind::PP, fine, fine);
    const double amp = 1e-5 * peak(clean_f);
    const auto noisy_c = add_uniform_noise(clean_c, amp, 12345);
    const auto noisy_f = add_uniform_noise(clean_f, amp, 12345);
    const double e_coarse = error(noisy_c);
    const double e_fine = error(noisy_f);
    EXPECT_GT(e_fine, e_coarse);

    const auto holdout = add_uniform_noise(clean_f, amp, 12346);
    const auto sel = select_lambda(noisy_f, holdout, lambda_sweep(1e-8, 1e-2));
    const double e_best = error(regularize_surface(noisy_f, sel.best_lambda));
    EXPECT_LT(e_best, e_fine);
    note(current_id(), "unregularized error coarse " + fmt(e_coarse) + " < fine " + fmt(e_fine) + "; lambda " +
                           fmt(sel.best_lambda) + " gives " + fmt(e_best));
}

TEST(Acceptance, ACC11_degenerate_embedding) {
    const auto g = StrikeGrid::make(0, 10, 0.02);
    const auto uni = decompose_univariate(univariate_catalog("power", std::vector<double>{2}), 0, g);
    const auto bi = decompose_bivariate(payoff_from_token("univariate_embedded:2"), 0, 0, g, g);
    ASSERT_EQ(uni.size(), bi.size());
    for (std::size_t i = 0; i < uni.size(); ++i) {
        EXPECT_TRUE(uni.positions()[i].instrument == bi.positions()[i].instrument)
            << describe(uni.positions()[i].instrument) << " vs " << describe(bi.positions()[i].instrument);
        EXPECT_EQ(uni.positions()[i].weight, bi.positions()[i].weight);
    }
    note(current_id(), std::to_string(bi.size()) + " positions, identical instruments and weights");
}

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    ::testing::UnitTest::GetInstance()->listeners().Append(new Summary);
    return RUN_ALL_TESTS();
}
