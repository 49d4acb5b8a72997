#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>

namespace tlhedge {

enum class Asset : int { First = 1, Second = 2 };

/// Traffic light option kinds: leg on asset 1 (Call/Put) times leg on asset 2.
///   CC = (x-k1)+ (y-k2)+    CP = (x-k1)+ (k2-y)+
///   PC = (k1-x)+ (y-k2)+    PP = (k1-x)+ (k2-y)+
enum class TloKind { CC, CP, PC, PP };

std::string_view to_string(TloKind kind);
TloKind parse_tlo_kind(std::string_view text);

struct Bond {
    auto operator<=>(const Bond&) const = default;
};

/// Pays (x - anchor) on asset 1 or (y - anchor) on asset 2.
struct Forward {
    Asset asset = Asset::First;
    double anchor = 0.0;
    auto operator<=>(const Forward&) const = default;
};

struct Call {
    Asset asset = Asset::First;
    double strike = 0.0;
    auto operator<=>(const Call&) const = default;
};

struct Put {
    Asset asset = Asset::First;
    double strike = 0.0;
    auto operator<=>(const Put&) const = default;
};

struct Tlo {
    TloKind kind = TloKind::CC;
    double k1 = 0.0;
    double k2 = 0.0;
    auto operator<=>(const Tlo&) const = default;
};

/// Ordering of the variant (type, then asset/kind, then strikes ascending)
/// is the canonical portfolio ordering.
using Instrument = std::variant<Bond, Forward, Call, Put, Tlo>;

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

double instrument_payoff(const Instrument& instrument, double x, double y);

/// True when the payoff vanishes for every (x, y) in the non-negative quadrant,
/// i.e. a put leg struck at or below zero.
bool vanishes_on_quadrant(const Instrument& instrument);

std::string describe(const Instrument& instrument);

}  // namespace tlhedge
