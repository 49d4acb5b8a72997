#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tlhedge {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyConfig {
    std::uint64_t seed = 12345;
    std::size_t mc_paths = 200000;
    /// Extra surface file to validate; a bad file yields a failed "surface_file" check.
    std::optional<std::filesystem::path> surface_file;
};

/// Invariant suite: replication exactness and convergence, parities (including
/// the zero-vol case), surface monotonicity, quadrature against Monte Carlo,
/// price consistency, density convergence, cross-kind density agreement and
/// the CDF identity. A check that throws is reported as failed.
std::vector<CheckResult> run_verification(const VerifyConfig& config);

}  // namespace tlhedge
