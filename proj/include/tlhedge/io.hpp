#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "tlhedge/density.hpp"
#include "tlhedge/model.hpp"
#include "tlhedge/replicate.hpp"

namespace tlhedge {

/// Malformed or inconsistent input file; the message names the file and line.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Portfolio text format: "# key=value" provenance lines, then the header
/// "type,asset,kind,k1,k2,anchor,weight" and one row per position in canonical
/// order. Vanilla strikes go in the k1 column. Numbers use the shortest
/// round-trip decimal form.
void write_portfolio(std::ostream& out, const HedgePortfolio& portfolio);
HedgePortfolio read_portfolio(std::istream& in, const std::string& source = "<stream>");

void save_portfolio(const std::filesystem::path& path, const HedgePortfolio& portfolio);
HedgePortfolio load_portfolio(const std::filesystem::path& path);

/// Surface files: "k1,k2,value" rows sorted by (k1, k2). Metadata (kind or
/// quantity, provenance) lives in a "key=value" sidecar at <path>.meta.
std::filesystem::path sidecar_path(const std::filesystem::path& path);

void save_surface(const std::filesystem::path& path, const PriceSurface& surface);
PriceSurface load_surface(const std::filesystem::path& path);

void save_density(const std::filesystem::path& path, const DensitySurface& density);
DensitySurface load_density(const std::filesystem::path& path);

}  // namespace tlhedge
