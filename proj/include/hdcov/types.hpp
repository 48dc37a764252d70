#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace hdcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rows are observations, columns are coordinates.
using DataMatrix = Eigen::MatrixXd;

/// Sample count n and dimension p. Every formula in the library is written in
/// terms of the effective sample size N = n - 1.
struct SampleShape {
    int n = 0;
    int p = 0;

    int N() const noexcept { return n - 1; }
    double y() const noexcept { return static_cast<double>(p) / N(); }

    static SampleShape from_N(int N, int p) { return SampleShape{N + 1, p}; }

    /// Throws InsufficientSamples for n < 2 and BadDimension for p < 1.
    void validate() const;

    friend bool operator==(const SampleShape&, const SampleShape&) = default;
};

enum class TestKind { LrtIdentity, NagaoLedoitWolf, LrtSphericity, John };

inline constexpr std::array<TestKind, 4> kAllTestKinds = {
    TestKind::LrtIdentity, TestKind::NagaoLedoitWolf, TestKind::LrtSphericity, TestKind::John};

/// CLI spelling: lrt, nagao, lrt-s, john.
std::string_view to_string(TestKind kind);

/// Accepts the CLI spelling and the long names (lrt_identity,
/// nagao_ledoit_wolf, lrt_sphericity, john).
TestKind parse_test_kind(std::string_view text);

/// The two likelihood-ratio statistics need a nonsingular sample covariance.
constexpr bool is_lrt(TestKind kind) {
    return kind == TestKind::LrtIdentity || kind == TestKind::LrtSphericity;
}

/// Sphericity statistics are invariant under X -> cX.
constexpr bool is_sphericity(TestKind kind) {
    return kind == TestKind::LrtSphericity || kind == TestKind::John;
}

/// Throws DegenerateStatistic when an LRT kind is requested with p >= N.
void require_nondegenerate(TestKind kind, const SampleShape& shape);

}  // namespace hdcov
