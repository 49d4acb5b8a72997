#include "tlhedge/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "tlhedge/format.hpp"

namespace tlhedge {

namespace {

constexpr std::string_view kPortfolioHeader = "type,asset,kind,k1,k2,anchor,weight";
constexpr std::string_view kSurfaceHeader = "k1,k2,value";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

std::string grid_text(const StrikeGrid& g) {
    return format_double(g.lower) + ";" + format_double(g.upper) + ";" + format_double(g.spacing);
}

StrikeGrid parse_grid(const std::string& text) {
    std::istringstream ss(text);
    std::string a, b, c;
    if (!std::getline(ss, a, ';') || !std::getline(ss, b, ';') || !std::getline(ss, c))
        throw std::invalid_argument("bad grid '" + text + "'");
    return StrikeGrid::make(parse_double(a, "grid lower"), parse_double(b, "grid upper"),
                            parse_double(c, "grid spacing"));
}

Asset parse_asset(const std::string& text) {
    if (text == "1") return Asset::First;
    if (text == "2") return Asset::Second;
    throw std::invalid_argument("asset must be 1 or 2, got '" + text + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

std::map<std::string, std::string> read_sidecar(const std::filesystem::path& path) {
    const auto meta = sidecar_path(path);
    std::ifstream in = open_in(meta);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(meta.string(), n, "expected key=value");
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

void write_sidecar(const std::filesystem::path& path, const std::map<std::string, std::string>& meta) {
    std::ofstream out = open_out(sidecar_path(path));
    for (const auto& [k, v] : meta) out << k << '=' << v << '\n';
}

struct Grid2d {
    std::vector<double> k1, k2, values;
};

void write_grid(const std::filesystem::path& path, const std::vector<double>& k1, const std::vector<double>& k2,
                const std::vector<double>& values) {
    std::ofstream out = open_out(path);
    out << kSurfaceHeader << '\n';
    for (std::size_t i = 0; i < k1.size(); ++i)
        for (std::size_t j = 0; j < k2.size(); ++j)
            out << format_double(k1[i]) << ',' << format_double(k2[j]) << ','
                << format_double(values[i * k2.size() + j]) << '\n';
}

Grid2d read_grid(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    const std::string src = path.string();
    std::string line;
    std::size_t n = 1;
    if (!std::getline(in, line) || line != kSurfaceHeader) fail(src, n, "expected header 'k1,k2,value'");
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 3) fail(src, n, "expected 3 fields");
        try {
            rows.push_back({parse_double(f[0], "k1"), parse_double(f[1], "k2"), parse_double(f[2], "value")});
        } catch (const std::invalid_argument& e) {
            fail(src, n, e.what());
        }
        if (!std::isfinite(rows.back()[2])) fail(src, n, "non-finite value");
    }
    if (rows.empty()) fail(src, n, "no data rows");

    Grid2d g;
    for (const auto& r : rows) {
        if (r[0] != rows.front()[0]) break;
        g.k2.push_back(r[1]);
    }
    if (rows.size() % g.k2.size() != 0) fail(src, n, "rows do not form a rectangular grid");
    const std::size_t n1 = rows.size() / g.k2.size();
    for (std::size_t i = 0; i < n1; ++i) {
        const double k1 = rows[i * g.k2.size()][0];
        if (i > 0 && !(k1 > g.k1.back())) fail(src, i * g.k2.size() + 2, "rows not sorted by k1");
        g.k1.push_back(k1);
        for (std::size_t j = 0; j < g.k2.size(); ++j) {
            const auto& r = rows[i * g.k2.size() + j];
            if (r[0] != k1 || r[1] != g.k2[j])
                fail(src, i * g.k2.size() + j + 2, "rows do not form a sorted rectangular grid");
            g.values.push_back(r[2]);
        }
    }
    for (std::size_t j = 1; j < g.k2.size(); ++j)
        if (!(g.k2[j] > g.k2[j - 1])) fail(src, j + 2, "rows not sorted by k2");
    return g;
}

}  // namespace

void write_portfolio(std::ostream& out, const HedgePortfolio& portfolio) {
    const auto& prov = portfolio.provenance();
    out << "# format=tlhedge-portfolio-1\n";
    out << "# payoff=" << prov.payoff << '\n';
    out << "# domain=" << to_string(prov.domain) << '\n';
    out << "# anchor_a=" << format_double(portfolio.anchor().first) << '\n';
    out << "# anchor_b=" << format_double(portfolio.anchor().second) << '\n';
    if (prov.grid1) out << "# grid1=" << grid_text(*prov.grid1) << '\n';
    if (prov.grid2) out << "# grid2=" << grid_text(*prov.grid2) << '\n';
    out << kPortfolioHeader << '\n';

    struct Row {
        std::ostream& out;
        void operator()(const Bond&) const { out << "Bond,,,,,,"; }
        void operator()(const Forward& f) const {
            out << "Forward," << static_cast<int>(f.asset) << ",,,," << format_double(f.anchor) << ',';
        }
        void operator()(const Call& c) const {
            out << "Call," << static_cast<int>(c.asset) << ",," << format_double(c.strike) << ",,,";
        }
        void operator()(const Put& p) const {
            out << "Put," << static_cast<int>(p.asset) << ",," << format_double(p.strike) << ",,,";
        }
        void operator()(const Tlo& t) const {
            out << "TLO,," << to_string(t.kind) << ',' << format_double(t.k1) << ',' << format_double(t.k2) << ",,";
        }
    };
    for (const auto& p : portfolio.positions()) {
        std::visit(Row{out}, p.instrument);
        out << format_double(p.weight) << '\n';
    }
}

HedgePortfolio read_portfolio(std::istream& in, const std::string& source) {
    Provenance prov;
    std::pair<double, double> anchor{0.0, 0.0};
    std::vector<Position> positions;
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            if (!header && line.rfind("# ", 0) == 0) {
                const auto eq = line.find('=');
                if (eq == std::string::npos) fail(source, n, "expected '# key=value'");
                const std::string key = line.substr(2, eq - 2);
                const std::string value = line.substr(eq + 1);
                if (key == "payoff") prov.payoff = value;
                else if (key == "domain") prov.domain = parse_domain_kind(value);
                else if (key == "anchor_a") anchor.first = parse_double(value, "anchor_a");
                else if (key == "anchor_b") anchor.second = parse_double(value, "anchor_b");
                else if (key == "grid1") prov.grid1 = parse_grid(value);
                else if (key == "grid2") prov.grid2 = parse_grid(value);
                continue;
            }
            if (!header) {
                if (line != kPortfolioHeader) fail(source, n, "expected header '" + std::string(kPortfolioHeader) + "'");
                header = true;
                continue;
            }
            const auto f = split_csv(line);
            if (f.size() != 7) fail(source, n, "expected 7 fields");
            const std::string& type = f[0];
            Instrument inst;
            if (type == "Bond") inst = Bond{};
            else if (type == "Forward") inst = Forward{parse_asset(f[1]), parse_double(f[5], "anchor")};
            else if (type == "Call") inst = Call{parse_asset(f[1]), parse_double(f[3], "strike")};
            else if (type == "Put") inst = Put{parse_asset(f[1]), parse_double(f[3], "strike")};
            else if (type == "TLO")
                inst = Tlo{parse_tlo_kind(f[2]), parse_double(f[3], "k1"), parse_double(f[4], "k2")};
            else fail(source, n, "unknown instrument type '" + type + "'");
            const double w = parse_double(f[6], "weight");
            if (!std::isfinite(w)) fail(source, n, "non-finite weight");
            positions.push_back({inst, w});
        } catch (const std::invalid_argument& e) {
            fail(source, n, e.what());
        }
    }
    if (!header) fail(source, n, "missing header");
    return HedgePortfolio::assemble(positions, anchor, prov);
}

void save_portfolio(const std::filesystem::path& path, const HedgePortfolio& portfolio) {
    std::ofstream out = open_out(path);
    write_portfolio(out, portfolio);
}

HedgePortfolio load_portfolio(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    return read_portfolio(in, path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path meta = path;
    meta += ".meta";
    return meta;
}

void save_surface(const std::filesystem::path& path, const PriceSurface& surface) {
    write_grid(path, surface.k1, surface.k2, surface.values);
    auto meta = surface.provenance;
    meta["kind"] = std::string(to_string(surface.kind));
    write_sidecar(path, meta);
}

PriceSurface load_surface(const std::filesystem::path& path) {
    auto meta = read_sidecar(path);
    const auto kind = meta.find("kind");
    if (kind == meta.end()) throw FormatError(sidecar_path(path).string() + ": missing 'kind'");
    PriceSurface s;
    try {
        s.kind = parse_surface_kind(kind->second);
    } catch (const std::invalid_argument& e) {
        throw FormatError(sidecar_path(path).string() + ": " + e.what());
    }
    meta.erase(kind);
    Grid2d g = read_grid(path);
    s.k1 = std::move(g.k1);
    s.k2 = std::move(g.k2);
    s.values = std::move(g.values);
    s.provenance = std::move(meta);
    return s;
}

void save_density(const std::filesystem::path& path, const DensitySurface& density) {
    write_grid(path, density.k1, density.k2, density.values);
    auto meta = density.provenance;
    meta["quantity"] = std::string(to_string(density.quantity));
    write_sidecar(path, meta);
}

DensitySurface load_density(const std::filesystem::path& path) {
    auto meta = read_sidecar(path);
    const auto q = meta.find("quantity");
    if (q == meta.end()) throw FormatError(sidecar_path(path).string() + ": missing 'quantity'");
    DensitySurface d;
    try {
        d.quantity = parse_quantity(q->second);
    } catch (const std::invalid_argument& e) {
        throw FormatError(sidecar_path(path).string() + ": " + e.what());
    }
    meta.erase(q);
    Grid2d g = read_grid(path);
    d.k1 = std::move(g.k1);
    d.k2 = std::move(g.k2);
    d.values = std::move(g.values);
    d.provenance = std::move(meta);
    return d;
}

}  // namespace tlhedge
