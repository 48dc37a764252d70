#include "hdcov/types.hpp"

#include "hdcov/error.hpp"

namespace hdcov {

void SampleShape::validate() const {
    if (n < 2) fail(ErrorCode::InsufficientSamples, "n must be at least 2, got " + std::to_string(n));
    if (p < 1) fail(ErrorCode::BadDimension, "p must be positive, got " + std::to_string(p));
}

std::string_view to_string(TestKind kind) {
    switch (kind) {
        case TestKind::LrtIdentity: return "lrt";
        case TestKind::NagaoLedoitWolf: return "nagao";
        case TestKind::LrtSphericity: return "lrt-s";
        case TestKind::John: return "john";
    }
    return "unknown";
}

TestKind parse_test_kind(std::string_view text) {
    if (text == "lrt" || text == "lrt_identity") return TestKind::LrtIdentity;
    if (text == "nagao" || text == "nagao_ledoit_wolf") return TestKind::NagaoLedoitWolf;
    if (text == "lrt-s" || text == "lrt_sphericity") return TestKind::LrtSphericity;
    if (text == "john") return TestKind::John;
    fail(ErrorCode::BadArgument, "unknown test kind '" + std::string(text) + "'");
}

void require_nondegenerate(TestKind kind, const SampleShape& shape) {
    shape.validate();
    if (is_lrt(kind) && shape.p >= shape.N()) {
        fail(ErrorCode::DegenerateStatistic,
             std::string(to_string(kind)) + " needs p < N = n - 1 (n=" + std::to_string(shape.n) +
                 ", p=" + std::to_string(shape.p) + ")");
    }
}

}  // namespace hdcov
