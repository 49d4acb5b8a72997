#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tlhedge {

/// Price domain a payoff is defined on. FullPlane admits negative prices.
enum class DomainKind { NonNegativeQuadrant, FullPlane };

std::string_view to_string(DomainKind kind);
DomainKind parse_domain_kind(std::string_view text);

using BivariateFn = std::function<double(double, double)>;
using UnivariateFn = std::function<double(double)>;

struct Analytic {};

/// Central differences of order-2 accuracy. Without an explicit step the
/// per-axis step is 1e-4 * (1 + |coordinate|).
struct FiniteDifference {
    std::optional<double> step;
};

using DerivativeSource = std::variant<Analytic, FiniteDifference>;

/// Partial derivatives consumed by the bivariate replication formula.
/// Mixed partials are stored once; C4 smoothness makes the order irrelevant.
enum class Partial { F, D1, D2, D11, D22, D12, D112, D122, D1122 };

inline constexpr std::array<Partial, 9> kAllPartials = {
    Partial::F,   Partial::D1,   Partial::D2,   Partial::D11,  Partial::D22,
    Partial::D12, Partial::D112, Partial::D122, Partial::D1122};

/// Differentiation orders (in x, in y) of a partial.
constexpr std::array<int, 2> partial_orders(Partial p) {
    switch (p) {
        case Partial::F: return {0, 0};
        case Partial::D1: return {1, 0};
        case Partial::D2: return {0, 1};
        case Partial::D11: return {2, 0};
        case Partial::D22: return {0, 2};
        case Partial::D12: return {1, 1};
        case Partial::D112: return {2, 1};
        case Partial::D122: return {1, 2};
        case Partial::D1122: return {2, 2};
    }
    return {0, 0};
}

/// Bivariate payoff together with every partial derivative the replication
/// formula needs. Immutable after construction.
class PayoffSpec {
public:
    struct Derivatives {
        BivariateFn f, d1, d2, d11, d22, d12, d112, d122, d1122;
    };

    static PayoffSpec analytic(std::string name, Derivatives derivatives,
                               DomainKind domain = DomainKind::NonNegativeQuadrant);

    static PayoffSpec finite_difference(std::string name, BivariateFn f,
                                        FiniteDifference source,
                                        DomainKind domain = DomainKind::NonNegativeQuadrant);

    /// Throws std::domain_error when the payoff (or a stencil value) is not
    /// finite at the requested point.
    double eval(Partial which, double x, double y) const;

    double f(double x, double y) const { return eval(Partial::F, x, y); }
    double d1(double x, double y) const { return eval(Partial::D1, x, y); }
    double d2(double x, double y) const { return eval(Partial::D2, x, y); }
    double d11(double x, double y) const { return eval(Partial::D11, x, y); }
    double d22(double x, double y) const { return eval(Partial::D22, x, y); }
    double d12(double x, double y) const { return eval(Partial::D12, x, y); }
    double d112(double x, double y) const { return eval(Partial::D112, x, y); }
    double d122(double x, double y) const { return eval(Partial::D122, x, y); }
    double d1122(double x, double y) const { return eval(Partial::D1122, x, y); }

    DomainKind domain() const { return domain_; }
    const DerivativeSource& source() const { return source_; }
    const std::string& name() const { return name_; }

    /// Copy of this payoff declared on another domain.
    PayoffSpec with_domain(DomainKind domain) const;

private:
    PayoffSpec() = default;
    double stencil(Partial which, double x, double y) const;

    std::string name_;
    DomainKind domain_ = DomainKind::NonNegativeQuadrant;
    DerivativeSource source_ = Analytic{};
    std::array<BivariateFn, 9> fns_;
};

/// Univariate payoff with f, f' and f''.
class UnivariatePayoffSpec {
public:
    static UnivariatePayoffSpec analytic(std::string name, UnivariateFn f, UnivariateFn d1,
                                         UnivariateFn d2,
                                         DomainKind domain = DomainKind::NonNegativeQuadrant);
    static UnivariatePayoffSpec finite_difference(std::string name, UnivariateFn f,
                                                  FiniteDifference source,
                                                  DomainKind domain = DomainKind::NonNegativeQuadrant);

    /// order in {0, 1, 2}
    double eval(int order, double x) const;
    double f(double x) const { return eval(0, x); }
    double d1(double x) const { return eval(1, x); }
    double d2(double x) const { return eval(2, x); }

    DomainKind domain() const { return domain_; }
    const DerivativeSource& source() const { return source_; }
    const std::string& name() const { return name_; }

private:
    UnivariatePayoffSpec() = default;

    std::string name_;
    DomainKind domain_ = DomainKind::NonNegativeQuadrant;
    DerivativeSource source_ = Analytic{};
    std::array<UnivariateFn, 3> fns_;
};

/// Bivariate payoff f(x, y) = g(x).
PayoffSpec embed_univariate(const UnivariatePayoffSpec& g);

/// Catalog of closed-form bivariate payoffs:
///   constant(c), monomial(i, j), gaussian_bump() or gaussian_bump(s1, s2)
///   (translate by (s1, s2)), product_exponential(alpha, beta) = exp(alpha x + beta y),
///   univariate_embedded(p) = x^p.
/// Throws std::invalid_argument on an unknown name or bad parameters.
PayoffSpec catalog_payoff(std::string_view name, std::span<const double> parameters,
                          DomainKind domain = DomainKind::NonNegativeQuadrant);

/// Univariate catalog: constant(c), power(p), exponential(alpha).
UnivariatePayoffSpec univariate_catalog(std::string_view name, std::span<const double> parameters,
                                        DomainKind domain = DomainKind::NonNegativeQuadrant);

/// Parses "name" or "name:p1,p2,..." (e.g. "monomial:1,2").
struct PayoffToken {
    std::string name;
    std::vector<double> parameters;
};
PayoffToken parse_payoff_token(std::string_view token);

PayoffSpec payoff_from_token(std::string_view token,
                             DomainKind domain = DomainKind::NonNegativeQuadrant);

PayoffSpec finite_difference_payoff(BivariateFn f, FiniteDifference source,
                                    DomainKind domain = DomainKind::NonNegativeQuadrant);

}  // namespace tlhedge
