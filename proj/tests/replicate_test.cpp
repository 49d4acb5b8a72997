#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tlhedge/replicate.hpp"

using namespace tlhedge;

namespace {

double trapezoid_weight(const StrikeGrid& g, std::size_t i, std::size_t first, std::size_t last) {
    return (i == first || i == last) ? g.spacing / 2 : g.spacing;
}

}  // namespace

TEST(StrikeGrid, Validation) {
    EXPECT_NO_THROW(StrikeGrid::make(0, 10, 0.02));
    EXPECT_THROW(StrikeGrid::make(0, 1, 0.3), std::invalid_argument);
    EXPECT_THROW(StrikeGrid::make(1, 0, 0.1), std::invalid_argument);
    EXPECT_THROW(StrikeGrid::make(0, 1, 0.0), std::invalid_argument);
    const auto g = StrikeGrid::make(0, 10, 0.02);
    EXPECT_EQ(g.size(), 501u);
    EXPECT_EQ(g.index_of(1.0), std::optional<std::size_t>(50));
    EXPECT_FALSE(g.index_of(1.005).has_value());
}

TEST(Assemble, MergesPrunesAndSorts) {
    std::vector<Position> in{{Tlo{TloKind::CC, 1, 1}, 0.5},
                             {Bond{}, 2.0},
                             {Tlo{TloKind::CC, 1, 1}, 0.25},
                             {Call{Asset::First, 1}, 1e-16},
                             {Put{Asset::First, 0.0}, 3.0}};
    const auto p = HedgePortfolio::assemble(in, {0, 0}, {});
    ASSERT_EQ(p.size(), 2u);
    EXPECT_TRUE(std::holds_alternative<Bond>(p.positions()[0].instrument));
    EXPECT_EQ(p.weight_of(Tlo{TloKind::CC, 1, 1}), std::optional<double>(0.75));
    EXPECT_FALSE(p.weight_of(Put{Asset::First, 0.0}).has_value());
}

TEST(Assemble, KeepsZeroStrikePutOnFullPlane) {
    std::vector<Position> in{{Put{Asset::First, 0.0}, 3.0}};
    Provenance prov;
    prov.domain = DomainKind::FullPlane;
    EXPECT_EQ(HedgePortfolio::assemble(in, {0, 0}, prov).size(), 1u);
}

TEST(Assemble, RejectsNonFiniteWeight) {
    std::vector<Position> in{{Bond{}, std::nan("")}};
    EXPECT_THROW(HedgePortfolio::assemble(in, {0, 0}, {}), std::domain_error);
}

TEST(Decompose, ConstantIsSingleBond) {
    const auto g = StrikeGrid::make(0, 5, 0.1);
    const auto p = decompose_bivariate(payoff_from_token("constant:7"), 0, 0, g, g);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.weight_of(Bond{}), std::optional<double>(7.0));
}

TEST(Decompose, ProductAtOriginIsOneTlo) {
    const auto g = StrikeGrid::make(0, 5, 0.1);
    const auto p = decompose_bivariate(payoff_from_token("monomial:1,1"), 0, 0, g, g);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.weight_of(Tlo{TloKind::CC, 0, 0}), std::optional<double>(1.0));
}

TEST(Decompose, ProductAwayFromOriginIsExact) {
    const auto g = StrikeGrid::make(0, 5, 0.1);
    const auto payoff = payoff_from_token("monomial:1,1");
    const auto p = decompose_bivariate(payoff, 1.2, 0.7, g, g);
    const auto pts = eval_grid(0, 4, 17, 0, 4, 17);
    EXPECT_LE(replication_error(p, payoff, pts).sup_error, 1e-13);
}

TEST(Decompose, AnchorMustBeGridNode) {
    const auto g = StrikeGrid::make(0, 5, 0.1);
    EXPECT_THROW(decompose_bivariate(payoff_from_token("monomial:1,1"), 0.05, 0, g, g), std::invalid_argument);
}

TEST(Decompose, QuadrantGridsStartAtZero) {
    const auto g = StrikeGrid::make(0.5, 5, 0.1);
    EXPECT_THROW(decompose_bivariate(payoff_from_token("monomial:1,1"), 1, 1, g, g), std::invalid_argument);
}

TEST(Decompose, TrapezoidWeightsOnStrips) {
    const auto g = StrikeGrid::make(0, 2, 0.25);
    const auto p = decompose_bivariate(payoff_from_token("monomial:2,1"), 1.0, 0, g, g);
    // f11 = 2y vanishes at b = 0, so only the k1 TLO strips carry f112 = 2
    const std::size_t ia = 4;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k = g.node(i);
        if (i >= ia) {
            const double w = 2 * trapezoid_weight(g, i, ia, g.intervals());
            EXPECT_DOUBLE_EQ(*p.weight_of(Tlo{TloKind::CC, k, 0}), w + (i == ia ? 2.0 : 0.0)) << k;
        }
        if (i > 0 && i <= ia) {
            const double w = 2 * trapezoid_weight(g, i, 0, ia);
            EXPECT_DOUBLE_EQ(*p.weight_of(Tlo{TloKind::PC, k, 0}), w - (i == ia ? 2.0 : 0.0)) << k;
        }
    }
}

TEST(Decompose, ZeroAnchorFormMatchesGeneral) {
    const auto g = StrikeGrid::make(0, 4, 0.05);
    for (const char* tok : {"monomial:2,2", "gaussian_bump", "product_exponential:0.3,0.2", "monomial:1,3"}) {
        const auto payoff = payoff_from_token(tok);
        const auto z = decompose_bivariate_zero_anchor(payoff, g, g);
        const auto full = decompose_bivariate(payoff, 0, 0, g, g);
        EXPECT_TRUE(structurally_equal(z, full, 1e-12)) << tok;
        for (const auto& pos : z.positions()) {
            if (const auto* t = std::get_if<Tlo>(&pos.instrument)) EXPECT_EQ(t->kind, TloKind::CC) << tok;
            EXPECT_FALSE(std::holds_alternative<Put>(pos.instrument)) << tok;
        }
    }
}

TEST(Decompose, ZeroAnchorRejectsFullPlane) {
    const auto g = StrikeGrid::make(-2, 2, 0.1);
    EXPECT_THROW(decompose_bivariate_zero_anchor(payoff_from_token("gaussian_bump", DomainKind::FullPlane), g, g),
                 std::invalid_argument);
}

TEST(Decompose, FullPlaneGaussianTranslate) {
    const auto payoff = payoff_from_token("gaussian_bump:0.5,-0.5", DomainKind::FullPlane);
    const auto g = StrikeGrid::make(-8, 8, 0.1);
    const auto p = decompose_bivariate(payoff, 0, 0, g, g);
    const auto pts = cell_centred_grid(-3, 3, 25);
    const auto r = replication_error(p, payoff, pts);
    EXPECT_TRUE(std::isfinite(r.sup_error));
    EXPECT_LT(r.sup_error, 1e-3);
    EXPECT_TRUE(r.outside_box.empty());
}

TEST(Decompose, UnivariateSquareExactAtNodes) {
    const auto g = StrikeGrid::make(0, 5, 0.1);
    const auto p = decompose_univariate(univariate_catalog("power", std::vector<double>{2}), 1.0, g);
    for (double x = 0; x <= 4.0; x += 0.1) EXPECT_NEAR(portfolio_payoff(p, x, 0), x * x, 1e-12) << x;
    // between nodes the piecewise linear interpolant overshoots by h^2/4 at the midpoint
    EXPECT_NEAR(portfolio_payoff(p, 1.05, 0) - 1.05 * 1.05, 0.0025, 1e-12);
}

TEST(ReplicationError, FlagsPointsOutsideBox) {
    const auto g = StrikeGrid::make(0, 2, 0.1);
    const auto payoff = payoff_from_token("monomial:1,2");
    const auto p = decompose_bivariate(payoff, 0, 0, g, g);
    std::vector<EvalPoint> pts{{1, 1}, {1, 3}};
    const auto r = replication_error(p, payoff, pts);
    ASSERT_EQ(r.outside_box.size(), 1u);
    EXPECT_EQ(r.outside_box[0], 1u);
    EXPECT_THROW(replication_error(p, payoff, std::vector<EvalPoint>{}), std::invalid_argument);
}

TEST(ReplicationError, SecondOrderUnderRefinement) {
    // off-lattice points: at strike nodes the trapezoid rule is exact for kinks
    const auto payoff = payoff_from_token("product_exponential:0.5,0.5");
    const auto pts = cell_centred_grid(0, 3, 23);
    auto g = StrikeGrid::make(0, 4, 0.1);
    const double e1 = replication_error(decompose_bivariate(payoff, 0, 0, g, g), payoff, pts).l2_error;
    g = g.refined();
    const double e2 = replication_error(decompose_bivariate(payoff, 0, 0, g, g), payoff, pts).l2_error;
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Grids, EvalAndCellCentred) {
    const auto e = eval_grid(0, 1, 3, 2, 4, 2);
    ASSERT_EQ(e.size(), 6u);
    EXPECT_EQ(e.back().x, 1.0);
    EXPECT_EQ(e.back().y, 4.0);
    const auto c = cell_centred_grid(0, 1, 4);
    ASSERT_EQ(c.size(), 16u);
    EXPECT_DOUBLE_EQ(c.front().x, 0.125);
}
