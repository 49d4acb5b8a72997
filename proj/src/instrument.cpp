#include "tlhedge/instrument.hpp"

#include <sstream>
#include <stdexcept>

namespace tlhedge {

std::string_view to_string(TloKind kind) {
    switch (kind) {
        case TloKind::CC: return "CC";
        case TloKind::CP: return "CP";
        case TloKind::PC: return "PC";
        case TloKind::PP: return "PP";
    }
    return "?";
}

TloKind parse_tlo_kind(std::string_view text) {
    if (text == "CC") return TloKind::CC;
    if (text == "CP") return TloKind::CP;
    if (text == "PC") return TloKind::PC;
    if (text == "PP") return TloKind::PP;
    throw std::invalid_argument("unknown TLO kind '" + std::string(text) + "'");
}

namespace {

double on_asset(Asset asset, double x, double y) { return asset == Asset::First ? x : y; }

}  // namespace

double instrument_payoff(const Instrument& instrument, double x, double y) {
    struct Visitor {
        double x, y;
        double operator()(const Bond&) const { return 1.0; }
        double operator()(const Forward& f) const { return on_asset(f.asset, x, y) - f.anchor; }
        double operator()(const Call& c) const { return positive_part(on_asset(c.asset, x, y) - c.strike); }
        double operator()(const Put& p) const { return positive_part(p.strike - on_asset(p.asset, x, y)); }
        double operator()(const Tlo& t) const {
            const bool call1 = t.kind == TloKind::CC || t.kind == TloKind::CP;
            const bool call2 = t.kind == TloKind::CC || t.kind == TloKind::PC;
            const double leg1 = call1 ? positive_part(x - t.k1) : positive_part(t.k1 - x);
            const double leg2 = call2 ? positive_part(y - t.k2) : positive_part(t.k2 - y);
            return leg1 * leg2;
        }
    };
    return std::visit(Visitor{x, y}, instrument);
}

bool vanishes_on_quadrant(const Instrument& instrument) {
    if (const auto* p = std::get_if<Put>(&instrument)) return p->strike <= 0.0;
    if (const auto* t = std::get_if<Tlo>(&instrument)) {
        const bool put1 = t->kind == TloKind::PC || t->kind == TloKind::PP;
        const bool put2 = t->kind == TloKind::CP || t->kind == TloKind::PP;
        return (put1 && t->k1 <= 0.0) || (put2 && t->k2 <= 0.0);
    }
    return false;
}

std::string describe(const Instrument& instrument) {
    std::ostringstream os;
    os.precision(17);
    struct Visitor {
        std::ostringstream& os;
        void operator()(const Bond&) const { os << "Bond"; }
        void operator()(const Forward& f) const {
            os << "Forward(asset " << static_cast<int>(f.asset) << ", anchor " << f.anchor << ")";
        }
        void operator()(const Call& c) const {
            os << "Call(asset " << static_cast<int>(c.asset) << ", K " << c.strike << ")";
        }
        void operator()(const Put& p) const {
            os << "Put(asset " << static_cast<int>(p.asset) << ", K " << p.strike << ")";
        }
        void operator()(const Tlo& t) const {
            os << "TLO " << to_string(t.kind) << "(" << t.k1 << ", " << t.k2 << ")";
        }
    };
    std::visit(Visitor{os}, instrument);
    return os.str();
}

}  // namespace tlhedge
