#include "hdcov/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "hdcov/error.hpp"

namespace hdcov {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t line) {
    token = trim(token);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        fail(ErrorCode::Parse, "line " + std::to_string(line) + ": cannot parse '" + std::string(token) + "'");
    }
    return value;
}

template <typename T>
T required(const Json& j, const char* key) {
    if (!j.contains(key)) fail(ErrorCode::Parse, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
    }
}

void check_schema(const Json& j, const char* expected) {
    if (j.contains("schema") && j.at("schema") != expected) {
        fail(ErrorCode::Parse, "unsupported schema " + j.at("schema").dump() + ", expected " + expected);
    }
}

Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, origin + ": " + e.what());
    }
}

}  // namespace

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

Matrix parse_csv_matrix(const std::string& text, bool header) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = !header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = view.find(',', start);
            row.push_back(parse_number(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start),
                                       line_no));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(rows.front().size()) + " columns, found " +
                                       std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorCode::Parse, "no data rows");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

Matrix read_csv_matrix(const std::filesystem::path& path, bool header) {
    try {
        return parse_csv_matrix(read_text_file(path), header);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) fail(ErrorCode::Parse, path.string() + ": " + e.what());
        throw;
    }
}

std::string format_csv_matrix(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

CovarianceSpec covariance_spec_from_json(const Json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) fail(ErrorCode::Parse, "covariance spec must be a JSON object");
    const auto kind = required<std::string>(j, "kind");
    const int p = required<int>(j, "p");
    CovarianceSpec spec;
    spec.p = p;
    if (kind == "identity") {
        spec.kind = CovarianceSpec::Identity{};
    } else if (kind == "scaled_identity") {
        spec.kind = CovarianceSpec::ScaledIdentity{required<double>(j, "lambda")};
    } else if (kind == "diagonal") {
        spec.kind = CovarianceSpec::Diagonal{required<std::vector<double>>(j, "eigenvalues")};
    } else if (kind == "spiked") {
        auto a = required<std::vector<double>>(j, "a");
        // A shorter list gives the leading spikes; the rest are zero.
        if (static_cast<int>(a.size()) < p) a.resize(static_cast<std::size_t>(p), 0.0);
        spec.kind = CovarianceSpec::Spiked{std::move(a)};
    } else if (kind == "dense") {
        Matrix entries;
        if (j.contains("entries")) {
            const auto rows = required<std::vector<std::vector<double>>>(j, "entries");
            entries.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != rows[0].size()) fail(ErrorCode::Parse, "dense entries are ragged");
                for (std::size_t c = 0; c < rows[r].size(); ++c) entries(r, c) = rows[r][c];
            }
        } else {
            std::filesystem::path path = required<std::string>(j, "path");
            if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
            entries = read_csv_matrix(path);
        }
        spec.kind = CovarianceSpec::Dense{std::move(entries)};
    } else {
        fail(ErrorCode::Parse, "unknown covariance kind '" + kind + "'");
    }
    return spec;
}

Json covariance_spec_to_json(const CovarianceSpec& spec) {
    Json j;
    struct Visitor {
        Json& j;
        void operator()(const CovarianceSpec::Identity&) const { j["kind"] = "identity"; }
        void operator()(const CovarianceSpec::ScaledIdentity& s) const {
            j["kind"] = "scaled_identity";
            j["lambda"] = s.lambda;
        }
        void operator()(const CovarianceSpec::Diagonal& d) const {
            j["kind"] = "diagonal";
            j["eigenvalues"] = d.eigenvalues;
        }
        void operator()(const CovarianceSpec::Spiked& s) const {
            j["kind"] = "spiked";
            j["a"] = s.a;
        }
        void operator()(const CovarianceSpec::Dense& d) const {
            j["kind"] = "dense";
            Json rows = Json::array();
            for (Eigen::Index r = 0; r < d.entries.rows(); ++r) {
                Json row = Json::array();
                for (Eigen::Index c = 0; c < d.entries.cols(); ++c) row.push_back(d.entries(r, c));
                rows.push_back(row);
            }
            j["entries"] = rows;
        }
    };
    std::visit(Visitor{j}, spec.kind);
    j["p"] = spec.p;
    return j;
}

CovarianceSpec load_covariance_spec(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return CovarianceSpec::dense(read_csv_matrix(path));
    const Json j = parse_json(read_text_file(path), path.string());
    return covariance_spec_from_json(j, path.parent_path());
}

Json calibration_to_json(const NullCalibration& calib) {
    Json j;
    j["schema"] = kCalibrationSchema;
    j["kind"] = std::string(to_string(calib.kind));
    j["n"] = calib.n;
    j["p"] = calib.p;
    j["m"] = calib.m;
    j["sigma"] = calib.sigma;
    j["method"] = std::string(to_string(calib.method));
    j["reps"] = calib.reps;
    j["seed"] = calib.seed;
    return j;
}

NullCalibration calibration_from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorCode::Parse, "calibration must be a JSON object");
    check_schema(j, kCalibrationSchema);
    NullCalibration c;
    try {
        c.kind = parse_test_kind(required<std::string>(j, "kind"));
    } catch (const Error& e) {
        fail(ErrorCode::Parse, e.what());
    }
    c.n = required<int>(j, "n");
    c.p = required<int>(j, "p");
    c.m = required<double>(j, "m");
    c.sigma = required<double>(j, "sigma");
    c.method = parse_calibration_method(required<std::string>(j, "method"));
    c.reps = j.value("reps", 0);
    c.seed = j.value("seed", std::uint64_t{0});
    if (!(c.sigma > 0.0) || !std::isfinite(c.m)) fail(ErrorCode::Parse, "calibration needs finite m and sigma > 0");
    c.shape().validate();
    return c;
}

NullCalibration read_calibration(const std::filesystem::path& path) {
    return calibration_from_json(parse_json(read_text_file(path), path.string()));
}

Json power_to_json(const PowerPrediction& prediction) {
    Json j;
    j["schema"] = kPowerSchema;
    j["kind"] = std::string(to_string(prediction.kind));
    j["tau"] = prediction.tau;
    j["power"] = prediction.power;
    j["components"] = {{"mean_gap_leading", prediction.components.mean_gap_leading},
                       {"sigma_null", prediction.components.sigma_null},
                       {"alpha", prediction.components.alpha}};
    return j;
}

Json contiguity_to_json(const ContiguityReport& report, double t) {
    Json j;
    j["kind"] = std::string(to_string(report.kind));
    j["V"] = report.V;
    j["V_std_error"] = report.V_std_error;
    j["V_source"] = report.V_closed_form ? "closed_form" : "monte_carlo";
    j["mean_gap"] = report.mean_gap;
    j["sigma_null"] = report.sigma_null;
    j["err_bar"] = report.err_bar;
    j["t"] = t;
    j["bound_term_23"] = report.bound_term_23(t);
    j["bound_term_49"] = report.bound_term_49;
    j["residual_bound"] = report.residual_bound;
    j["constants"] = "unit (shapes only, not certified bounds)";
    return j;
}

}  // namespace hdcov
