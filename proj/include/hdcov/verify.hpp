#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hdcov/types.hpp"

namespace hdcov {

enum class VerifyScale {
    Desk,   ///< acceptance-suite replicate counts
    Smoke,  ///< small replicate counts for wiring tests; tolerances may not hold
};

struct VerifyOptions {
    VerifyScale scale = VerifyScale::Desk;
    std::uint64_t seed = 20240611;
    std::optional<int> threads;
    /// Run only checks whose name starts with one of these prefixes.
    std::vector<std::string> only;
    /// Replaces the library gradient in the derivative checks.
    std::function<Matrix(TestKind, const DataMatrix&)> gradient_override;
};

struct CheckResult {
    std::string name;
    int criterion = 0;  ///< acceptance criterion number, 0 for supplementary checks
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string detail;
    bool randomized = false;
    double seconds = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    /// Hash of every number produced by the randomized checks.
    std::uint64_t fingerprint = 0;
    bool all_passed() const;
};

/// Names of all registered checks, in execution order.
std::vector<std::string> verification_check_names();

VerifyReport run_verification(const VerifyOptions& options);

/// Tau of Sigma = I + eps W solved for a target by bisection; W is a fixed
/// symmetric Gaussian direction.
Matrix dense_alternative(TestKind kind, const SampleShape& shape, double target_tau, std::uint64_t seed);

}  // namespace hdcov
