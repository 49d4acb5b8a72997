#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tlhedge/payoff.hpp"

using namespace tlhedge;

TEST(PayoffToken, ParsesNameAndParameters) {
    const auto t = parse_payoff_token("monomial:1,2");
    EXPECT_EQ(t.name, "monomial");
    ASSERT_EQ(t.parameters.size(), 2u);
    EXPECT_EQ(t.parameters[0], 1.0);
    EXPECT_EQ(t.parameters[1], 2.0);
    EXPECT_TRUE(parse_payoff_token("gaussian_bump").parameters.empty());
}

TEST(PayoffToken, RejectsGarbage) {
    EXPECT_THROW(parse_payoff_token("monomial:1,x"), std::invalid_argument);
    EXPECT_THROW(payoff_from_token("nosuch"), std::invalid_argument);
    EXPECT_THROW(payoff_from_token("monomial:1"), std::invalid_argument);
    EXPECT_THROW(payoff_from_token("monomial:1.5,2"), std::invalid_argument);
}

TEST(Catalog, MonomialPartials) {
    const auto p = payoff_from_token("monomial:3,2");
    const double x = 1.3, y = 0.7;
    EXPECT_DOUBLE_EQ(p.f(x, y), x * x * x * y * y);
    EXPECT_DOUBLE_EQ(p.d1(x, y), 3 * x * x * y * y);
    EXPECT_DOUBLE_EQ(p.d2(x, y), 2 * x * x * x * y);
    EXPECT_DOUBLE_EQ(p.d11(x, y), 6 * x * y * y);
    EXPECT_DOUBLE_EQ(p.d22(x, y), 2 * x * x * x);
    EXPECT_DOUBLE_EQ(p.d12(x, y), 6 * x * x * y);
    EXPECT_DOUBLE_EQ(p.d112(x, y), 12 * x * y);
    EXPECT_DOUBLE_EQ(p.d122(x, y), 6 * x * x);
    EXPECT_DOUBLE_EQ(p.d1122(x, y), 12 * x);
}

TEST(Catalog, GaussianBumpMatchesClosedForm) {
    const auto p = payoff_from_token("gaussian_bump");
    const double x = 0.8, y = 1.7;
    const double g = std::exp(-(x * x + y * y) / 2) / (2 * M_PI);
    EXPECT_NEAR(p.f(x, y), g, 1e-16);
    EXPECT_NEAR(p.d1122(x, y), (x * x - 1) * (y * y - 1) * g, 1e-16);
    EXPECT_NEAR(p.d112(x, y), (x * x - 1) * (-y) * g, 1e-16);
}

TEST(Catalog, ShiftedGaussianIsTranslate) {
    const auto base = payoff_from_token("gaussian_bump");
    const auto shifted = payoff_from_token("gaussian_bump:0.5,-1", DomainKind::FullPlane);
    for (const auto part : kAllPartials)
        EXPECT_DOUBLE_EQ(shifted.eval(part, 1.0, -0.5), base.eval(part, 0.5, 0.5));
    EXPECT_EQ(shifted.domain(), DomainKind::FullPlane);
}

TEST(Catalog, ProductExponential) {
    const auto p = payoff_from_token("product_exponential:0.5,-0.25");
    const double v = std::exp(0.5 * 2 - 0.25 * 1);
    EXPECT_DOUBLE_EQ(p.f(2, 1), v);
    EXPECT_DOUBLE_EQ(p.d1122(2, 1), 0.25 * 0.0625 * v);
}

TEST(Catalog, UnivariateEmbeddingIgnoresSecondArgument) {
    const auto p = payoff_from_token("univariate_embedded:2");
    EXPECT_EQ(p.f(3, 100), 9.0);
    EXPECT_EQ(p.d11(3, 100), 2.0);
    for (const auto part : {Partial::D2, Partial::D22, Partial::D12, Partial::D112, Partial::D122, Partial::D1122})
        EXPECT_EQ(p.eval(part, 3, 100), 0.0);
}

TEST(FiniteDifference, MatchesAnalyticPartials) {
    const auto exact = payoff_from_token("product_exponential:0.7,0.4");
    const auto fd = finite_difference_payoff([](double x, double y) { return std::exp(0.7 * x + 0.4 * y); },
                                             FiniteDifference{1e-2});
    for (const auto part : kAllPartials) {
        const double e = exact.eval(part, 1.2, 0.9);
        EXPECT_NEAR(fd.eval(part, 1.2, 0.9), e, 1e-5 * (1 + std::abs(e))) << static_cast<int>(part);
    }
}

TEST(FiniteDifference, OneSidedNearQuadrantEdge) {
    const auto fd = finite_difference_payoff([](double x, double y) { return x * x * y * y; }, FiniteDifference{1e-3});
    // central stencils would sample negative coordinates here
    EXPECT_NEAR(fd.d11(0.0, 1.0), 2.0, 1e-6);
    EXPECT_NEAR(fd.d1122(0.0005, 0.0005), 4.0, 1e-4);
}

TEST(FiniteDifference, ConstantHasZeroDerivatives) {
    const auto fd = finite_difference_payoff([](double, double) { return 3.0; }, FiniteDifference{});
    for (const auto part : kAllPartials)
        if (part != Partial::F) EXPECT_EQ(fd.eval(part, 1.1, 2.2), 0.0);
}

TEST(FiniteDifference, NonFiniteValueNamesPoint) {
    const auto fd = finite_difference_payoff([](double x, double) { return std::log(x - 1.0); }, FiniteDifference{});
    try {
        fd.d11(0.5, 0.5);
        FAIL() << "expected domain_error";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
    }
}

TEST(Univariate, CatalogAndEmbedding) {
    const auto g = univariate_catalog("power", std::vector<double>{3});
    EXPECT_DOUBLE_EQ(g.f(2), 8);
    EXPECT_DOUBLE_EQ(g.d1(2), 12);
    EXPECT_DOUBLE_EQ(g.d2(2), 12);
    const auto e = embed_univariate(g);
    EXPECT_DOUBLE_EQ(e.d11(2, 5), 12);
    EXPECT_EQ(e.d22(2, 5), 0.0);
}

TEST(Domain, RoundTripsNames) {
    for (const auto d : {DomainKind::NonNegativeQuadrant, DomainKind::FullPlane})
        EXPECT_EQ(parse_domain_kind(to_string(d)), d);
    EXPECT_THROW(parse_domain_kind("sphere"), std::invalid_argument);
}
