#include "hdcov/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "hdcov/calibration.hpp"
#include "hdcov/contiguity.hpp"
#include "hdcov/error.hpp"
#include "hdcov/io.hpp"
#include "hdcov/mclab.hpp"
#include "hdcov/model.hpp"
#include "hdcov/power.hpp"
#include "hdcov/rng.hpp"
#include "hdcov/statistics.hpp"
#include "hdcov/verify.hpp"

namespace hdcov {

namespace {

struct CommonFlags {
    std::string test = "lrt";
    int n = 0;
    int p = 0;
    double alpha = 0.05;
    std::string seed;
    int reps = 0;
    int threads = 0;
    std::string out;
    std::string format;
};

std::optional<int> thread_flag(const CommonFlags& f) {
    return f.threads > 0 ? std::optional<int>(f.threads) : std::nullopt;
}

/// --seed: an unsigned 64-bit integer, or "auto" to draw one and report it.
std::uint64_t resolve_seed(const std::string& text, std::ostream& err) {
    if (text.empty()) fail(ErrorCode::BadArgument, "--seed is required (pass --seed auto to draw one)");
    if (text == "auto") {
        std::random_device device;
        const std::uint64_t seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
        err << "seed: " << seed << "\n";
        return seed;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(ErrorCode::BadArgument, "--seed must be an unsigned integer or 'auto'");
    }
    return value;
}

std::vector<double> parse_number_list(const std::string& text, const char* flag) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size() && token.find_first_not_of(" \t", used) != std::string::npos) throw 0;
        } catch (...) {
            fail(ErrorCode::BadArgument, std::string(flag) + ": cannot parse '" + token + "'");
        }
    }
    if (values.empty()) fail(ErrorCode::BadArgument, std::string(flag) + " is empty");
    return values;
}

void emit(const CommonFlags& f, const std::string& text, std::ostream& out) {
    if (f.out.empty()) {
        out << text;
    } else {
        write_text_file(f.out, text);
    }
}

SampleShape shape_of(const CommonFlags& f) {
    const SampleShape shape{f.n, f.p};
    shape.validate();
    return shape;
}

Matrix sigma_from_flags(const std::string& sigma_path, const std::string& spikes, int p) {
    if (!sigma_path.empty() && !spikes.empty()) fail(ErrorCode::BadArgument, "use either --sigma or --spikes");
    CovarianceSpec spec;
    if (!sigma_path.empty()) {
        spec = load_covariance_spec(sigma_path);
    } else if (!spikes.empty()) {
        spec = CovarianceSpec::spiked(p, parse_number_list(spikes, "--spikes"));
    } else {
        fail(ErrorCode::BadArgument, "a covariance is required: --sigma <file> or --spikes a1,a2,...");
    }
    if (spec.p != p) {
        fail(ErrorCode::BadDimension, "covariance has p=" + std::to_string(spec.p) + " but --p is " + std::to_string(p));
    }
    return build_covariance(spec);
}

/// Spikes are summarized as the nonzero leading entries.
std::string spike_descriptor(const std::string& sigma_path, const std::string& spikes) {
    if (!spikes.empty()) return "spikes:" + spikes;
    return "sigma:" + std::filesystem::path(sigma_path).filename().string();
}

/// --calib: "asymptotic", "mc" or a calibration file.
NullCalibration resolve_calibration(const std::string& calib, TestKind kind, const SampleShape& shape,
                                    const CommonFlags& f, std::ostream& err) {
    if (calib == "asymptotic") return null_calibrate_asymptotic(kind, shape);
    if (calib == "mc") {
        const int reps = f.reps > 0 ? f.reps : 20000;
        return null_calibrate_mc(kind, shape, reps, resolve_seed(f.seed, err), thread_flag(f));
    }
    NullCalibration c = read_calibration(calib);
    if (c.kind != kind) fail(ErrorCode::BadArgument, "calibration file is for test " + std::string(to_string(c.kind)));
    if (!(c.shape() == shape)) {
        fail(ErrorCode::BadDimension, "calibration file is for n=" + std::to_string(c.n) + ", p=" + std::to_string(c.p));
    }
    return c;
}

std::string csv_field(double v) { return format_double(v); }

void add_common(CLI::App* cmd, CommonFlags& f, bool shape = true) {
    cmd->add_option("--test", f.test, "lrt | nagao | lrt-s | john")->check(
        CLI::IsMember({"lrt", "nagao", "lrt-s", "john", "lrt_identity", "nagao_ledoit_wolf", "lrt_sphericity"}));
    if (shape) {
        cmd->add_option("--n", f.n, "sample count n (N = n - 1)")->required();
        cmd->add_option("--p", f.p, "dimension p")->required();
    }
    cmd->add_option("--seed", f.seed, "master seed, or 'auto'");
    cmd->add_option("--threads", f.threads, "worker threads (default: HDCOV_THREADS or all cores)");
    cmd->add_option("--out", f.out, "output file (default: stdout)");
}

int cmd_calibrate(const CommonFlags& f, const std::string& method, std::ostream& out, std::ostream& err) {
    const TestKind kind = parse_test_kind(f.test);
    const SampleShape shape = shape_of(f);
    NullCalibration c;
    if (method == "asymptotic") {
        c = null_calibrate_asymptotic(kind, shape);
    } else {
        c = null_calibrate_mc(kind, shape, f.reps > 0 ? f.reps : 20000, resolve_seed(f.seed, err), thread_flag(f));
    }
    std::string text;
    if (f.format == "csv") {
        text = "# schema: " + std::string(kCalibrationSchema) + "\nkind,n,p,m,sigma,method,reps,seed\n" +
               std::string(to_string(c.kind)) + "," + std::to_string(c.n) + "," + std::to_string(c.p) + "," +
               csv_field(c.m) + "," + csv_field(c.sigma) + "," + std::string(to_string(c.method)) + "," +
               std::to_string(c.reps) + "," + std::to_string(c.seed) + "\n";
    } else {
        text = calibration_to_json(c).dump(2) + "\n";
    }
    emit(f, text, out);
    if (!f.out.empty()) {
        out << to_string(c.kind) << " n=" << c.n << " p=" << c.p << " m=" << format_double(c.m)
            << " sigma=" << format_double(c.sigma) << " (" << to_string(c.method) << ") -> " << f.out << "\n";
    }
    return kExitOk;
}

int cmd_test(const CommonFlags& f, const std::string& data_path, bool header, const std::string& mean_mode,
             const std::string& calib, std::ostream& out, std::ostream& err) {
    const TestKind kind = parse_test_kind(f.test);
    const DataMatrix x = read_csv_matrix(data_path, header);
    const MeanMode mode = mean_mode == "known" ? MeanMode::Known : MeanMode::Unknown;
    const int rows = static_cast<int>(x.rows());
    const SampleShape shape = mode == MeanMode::Known ? SampleShape::from_N(rows, static_cast<int>(x.cols()))
                                                      : SampleShape{rows, static_cast<int>(x.cols())};
    if ((f.n != 0 && f.n != shape.n) || (f.p != 0 && f.p != shape.p)) {
        fail(ErrorCode::BadDimension, "data has n=" + std::to_string(shape.n) + ", p=" + std::to_string(shape.p) +
                                          " but flags say n=" + std::to_string(f.n) + ", p=" + std::to_string(f.p));
    }
    require_nondegenerate(kind, shape);
    const NullCalibration c = resolve_calibration(calib, kind, shape, f, err);
    const Decision d = decide(kind, x, c, f.alpha, mode);
    Json j;
    j["schema"] = kDecisionSchema;
    j["kind"] = std::string(to_string(kind));
    j["n"] = shape.n;
    j["p"] = shape.p;
    j["mean_mode"] = mean_mode;
    j["alpha"] = f.alpha;
    j["statistic"] = d.statistic;
    j["zscore"] = d.zscore;
    j["reject"] = d.reject;
    j["calibration"] = calibration_to_json(c);
    emit(f, j.dump(2) + "\n", out);
    return kExitOk;
}

int cmd_power(const CommonFlags& f, const std::string& sigma_path, const std::string& spikes,
              const std::string& calib, bool diagnose, double t, std::ostream& out, std::ostream& err) {
    const TestKind kind = parse_test_kind(f.test);
    const SampleShape shape = shape_of(f);
    require_nondegenerate(kind, shape);
    const Matrix sigma = sigma_from_flags(sigma_path, spikes, shape.p);
    const double sigma_null = calib == "asymptotic" ? std::sqrt(null_variance_asymptotic(kind, shape))
                                                    : resolve_calibration(calib, kind, shape, f, err).sigma;
    PowerPrediction prediction = analytic_power(kind, sigma, shape, f.alpha, sigma_null);
    if (!spikes.empty() && calib == "asymptotic") {
        // Spiked closed form, so the output matches the corollary formulas bit for bit.
        std::vector<double> a = parse_number_list(spikes, "--spikes");
        a.resize(static_cast<std::size_t>(shape.p), 0.0);
        prediction.tau = spiked_tau(kind, a, shape);
        prediction.power = power_from_tau(prediction.tau, f.alpha);
    }
    Json j = power_to_json(prediction);
    j["n"] = shape.n;
    j["p"] = shape.p;
    j["sigma_source"] = calib;
    if (diagnose) {
        ContiguityOptions opts;
        opts.threads = thread_flag(f);
        opts.reps = f.reps > 0 ? f.reps : 500;
        if (kind != TestKind::LrtIdentity) opts.seed = resolve_seed(f.seed, err);
        j["contiguity"] = contiguity_to_json(contiguity_report(kind, sigma, shape, sigma_null, opts), t);
    }
    emit(f, j.dump(2) + "\n", out);
    return kExitOk;
}

const char* kPowerCsvHeader = "kind,n,p,alpha,spike_descriptor,tau,power_analytic,power_empirical,se";

int cmd_simulate(const CommonFlags& f, const std::string& sigma_path, const std::string& spikes, int calib_reps,
                 std::ostream& out, std::ostream& err) {
    const TestKind kind = parse_test_kind(f.test);
    const SampleShape shape = shape_of(f);
    require_nondegenerate(kind, shape);
    if (f.reps < 100) fail(ErrorCode::BadArgument, "simulate needs --reps >= 100");
    const std::uint64_t seed = resolve_seed(f.seed, err);
    const Matrix sigma = sigma_from_flags(sigma_path, spikes, shape.p);
    const PowerPrediction analytic = analytic_power(kind, sigma, shape, f.alpha);
    const NullCalibration c = null_calibrate_mc(kind, shape, calib_reps, derive_seed(seed, 1), thread_flag(f));
    const McEstimate emp = empirical_power(kind, sigma, shape, f.alpha, c, f.reps, derive_seed(seed, 2), thread_flag(f));
    const std::string descriptor = spike_descriptor(sigma_path, spikes);
    std::string text;
    if (f.format == "json") {
        Json j;
        j["schema"] = kSimulateSchema;
        j["kind"] = std::string(to_string(kind));
        j["n"] = shape.n;
        j["p"] = shape.p;
        j["alpha"] = f.alpha;
        j["spike_descriptor"] = descriptor;
        j["tau"] = analytic.tau;
        j["power_analytic"] = analytic.power;
        j["power_empirical"] = emp.value;
        j["se"] = emp.std_error;
        j["discrepancy"] = emp.value - analytic.power;
        j["reps"] = f.reps;
        j["seed"] = seed;
        text = j.dump(2) + "\n";
    } else {
        text = "# schema: " + std::string(kSimulateSchema) + "\n" + kPowerCsvHeader + ",discrepancy,reps,seed\n";
        text += std::string(to_string(kind)) + "," + std::to_string(shape.n) + "," + std::to_string(shape.p) + "," +
                csv_field(f.alpha) + ",\"" + descriptor + "\"," + csv_field(analytic.tau) + "," +
                csv_field(analytic.power) + "," + csv_field(emp.value) + "," + csv_field(emp.std_error) + "," +
                csv_field(emp.value - analytic.power) + "," + std::to_string(f.reps) + "," + std::to_string(seed) + "\n";
    }
    emit(f, text, out);
    return kExitOk;
}

struct SweepFlags {
    std::vector<std::string> tests;
    std::string a1_grid;
    std::string np_grid;
    double a1 = 1.0;
    bool empirical = false;
    int calib_reps = 5000;
};

std::vector<std::pair<int, int>> parse_np_grid(const std::string& text) {
    std::vector<std::pair<int, int>> grid;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto x = token.find('x');
        try {
            if (x == std::string::npos) throw 0;
            std::size_t used_n = 0, used_p = 0;
            const std::string ns = token.substr(0, x), ps = token.substr(x + 1);
            const int n = std::stoi(ns, &used_n);
            const int p = std::stoi(ps, &used_p);
            if (used_n != ns.size() || used_p != ps.size()) throw 0;
            grid.emplace_back(n, p);
        } catch (...) {
            fail(ErrorCode::BadArgument, "--np-grid entries look like 201x50, got '" + token + "'");
        }
    }
    if (grid.empty()) fail(ErrorCode::BadArgument, "--np-grid is empty");
    return grid;
}

int cmd_sweep(const CommonFlags& f, const SweepFlags& s, std::ostream& out, std::ostream& err) {
    std::vector<TestKind> kinds;
    for (const std::string& t : s.tests) {
        if (t == "all") {
            kinds.assign(kAllTestKinds.begin(), kAllTestKinds.end());
        } else {
            kinds.push_back(parse_test_kind(t));
        }
    }
    if (kinds.empty()) kinds.push_back(parse_test_kind(f.test));
    if (!s.a1_grid.empty() && !s.np_grid.empty()) fail(ErrorCode::BadArgument, "use either --a1-grid or --np-grid");
    struct Point {
        int n, p;
        double a1;
    };
    std::vector<Point> points;
    if (!s.np_grid.empty()) {
        for (auto [n, p] : parse_np_grid(s.np_grid)) points.push_back({n, p, s.a1});
    } else {
        if (s.a1_grid.empty()) fail(ErrorCode::BadArgument, "a grid is required: --a1-grid or --np-grid");
        if (f.n == 0 || f.p == 0) fail(ErrorCode::BadArgument, "--a1-grid needs --n and --p");
        for (double a1 : parse_number_list(s.a1_grid, "--a1-grid")) points.push_back({f.n, f.p, a1});
    }
    std::optional<std::uint64_t> seed;
    if (s.empirical) {
        if (f.reps < 100) fail(ErrorCode::BadArgument, "--empirical needs --reps >= 100");
        seed = resolve_seed(f.seed, err);
    }
    std::string text = "# schema: " + std::string(kSweepSchema) + "\n" + kPowerCsvHeader +
                       ",beta_lrt,beta_lrts,beta_na,beta_jo,ordering_boundary\n";
    std::uint64_t row = 0;
    for (const Point& pt : points) {
        const SampleShape shape{pt.n, pt.p};
        shape.validate();
        std::vector<double> a(static_cast<std::size_t>(pt.p), 0.0);
        a[0] = pt.a1;
        const PowerOrdering ord = power_ordering(a, shape, f.alpha);
        const Matrix sigma = build_covariance(CovarianceSpec::spiked(a));
        for (TestKind kind : kinds) {
            ++row;
            if (is_lrt(kind) && shape.p >= shape.N()) {
                fail(ErrorCode::DegenerateStatistic, std::string(to_string(kind)) + " needs p < N at grid point n=" +
                                                         std::to_string(shape.n) + ", p=" + std::to_string(shape.p));
            }
            const double tau = spiked_tau(kind, a, shape);
            const double power = power_from_tau(tau, f.alpha);
            std::string emp_cols = ",";
            if (seed) {
                const NullCalibration c =
                    null_calibrate_mc(kind, shape, s.calib_reps, derive_seed(*seed, 2 * row), thread_flag(f));
                const McEstimate e =
                    empirical_power(kind, sigma, shape, f.alpha, c, f.reps, derive_seed(*seed, 2 * row + 1), thread_flag(f));
                emp_cols = csv_field(e.value) + "," + csv_field(e.std_error);
            }
            auto opt = [](const std::optional<double>& v) { return v ? csv_field(*v) : std::string(); };
            text += std::string(to_string(kind)) + "," + std::to_string(shape.n) + "," + std::to_string(shape.p) + "," +
                    csv_field(f.alpha) + ",a1=" + csv_field(pt.a1) + "," + csv_field(tau) + "," + csv_field(power) + "," +
                    emp_cols + "," + opt(ord.beta_lrt) + "," + opt(ord.beta_lrts) + "," + csv_field(ord.beta_na) + "," +
                    csv_field(ord.beta_jo) + "," + csv_field(ord.boundary) + "\n";
        }
    }
    emit(f, text, out);
    return kExitOk;
}

int cmd_verify(const CommonFlags& f, const std::string& scale, const std::vector<std::string>& only, bool list,
               std::ostream& out, std::ostream& err) {
    if (list) {
        for (const std::string& name : verification_check_names()) out << name << "\n";
        return kExitOk;
    }
    VerifyOptions options;
    options.scale = scale == "smoke" ? VerifyScale::Smoke : VerifyScale::Desk;
    if (!f.seed.empty()) options.seed = resolve_seed(f.seed, err);
    options.threads = thread_flag(f);
    options.only = only;
    const VerifyReport report = run_verification(options);
    Json j;
    j["schema"] = kVerifySchema;
    j["scale"] = scale;
    j["seed"] = options.seed;
    j["fingerprint"] = report.fingerprint;
    Json checks = Json::array();
    int failed = 0;
    for (const CheckResult& c : report.checks) {
        Json e;
        e["name"] = c.name;
        e["criterion"] = c.criterion;
        e["status"] = c.passed ? "pass" : "fail";
        e["observed"] = c.observed;
        e["expected"] = c.expected;
        e["tolerance"] = c.tolerance;
        e["detail"] = c.detail;
        checks.push_back(e);
        if (!c.passed) ++failed;
        err << (c.passed ? "PASS " : "FAIL ") << c.name << "  observed=" << format_double(c.observed) << "  "
            << c.detail << "\n";
    }
    j["checks"] = checks;
    j["passed"] = static_cast<int>(report.checks.size()) - failed;
    j["failed"] = failed;
    emit(f, j.dump(2) + "\n", out);
    return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"High-dimensional covariance tests: calibration, power and verification"};
    app.name("hdcov");
    app.require_subcommand(1);

    CommonFlags f;

    auto* calibrate = app.add_subcommand("calibrate", "Null mean and sd of a statistic");
    add_common(calibrate, f);
    std::string method = "mc";
    calibrate->add_option("--reps", f.reps, "Monte Carlo replicates (default 20000)");
    calibrate->add_option("--calib,--method", method, "mc | asymptotic")->check(CLI::IsMember({"mc", "asymptotic"}));
    calibrate->add_option("--format", f.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    auto* test = app.add_subcommand("test", "Apply a calibrated test to a data file");
    add_common(test, f, false);
    std::string data_path, mean_mode = "unknown", test_calib = "mc";
    bool header = false;
    test->add_option("--data", data_path, "CSV data, one observation per line")->required();
    test->add_flag("--header", header, "skip the first line of the data file");
    test->add_option("--mean", mean_mode, "unknown (center at sample mean) | known (mean zero)")
        ->check(CLI::IsMember({"known", "unknown"}));
    test->add_option("--calib", test_calib, "mc | asymptotic | calibration JSON file");
    test->add_option("--alpha", f.alpha, "level");
    test->add_option("--reps", f.reps, "replicates for --calib mc (default 20000)");
    test->add_option("--n", f.n, "expected n (optional consistency check)");
    test->add_option("--p", f.p, "expected p (optional consistency check)");

    auto* power = app.add_subcommand("power", "Analytic power prediction");
    add_common(power, f);
    std::string sigma_path, spikes, power_calib = "asymptotic";
    bool diagnose = false;
    double t = 0.0;
    power->add_option("--sigma", sigma_path, "covariance spec (.json) or dense matrix (.csv)");
    power->add_option("--spikes", spikes, "leading spikes a1,a2,... of diag(1 + a)");
    power->add_option("--alpha", f.alpha, "level");
    power->add_option("--calib", power_calib, "sigma_null source: asymptotic | mc | calibration JSON file");
    power->add_option("--reps", f.reps, "replicates for --calib mc or the dispersion estimate");
    power->add_flag("--diagnose", diagnose, "add the contiguity report");
    power->add_option("--t", t, "threshold t for the 2/3-exponent bound term");

    auto* simulate = app.add_subcommand("simulate", "Empirical vs analytic power");
    add_common(simulate, f);
    int sim_calib_reps = 10000;
    simulate->add_option("--sigma", sigma_path, "covariance spec (.json) or dense matrix (.csv)");
    simulate->add_option("--spikes", spikes, "leading spikes a1,a2,...");
    simulate->add_option("--alpha", f.alpha, "level");
    simulate->add_option("--reps", f.reps, "replicates under the alternative")->required();
    simulate->add_option("--calib-reps", sim_calib_reps, "replicates for the null calibration");
    simulate->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"json", "csv"}));

    auto* sweep = app.add_subcommand("sweep", "Power curves over a spike or (n, p) grid");
    add_common(sweep, f, false);
    SweepFlags s;
    sweep->add_option("--tests", s.tests, "tests to include, or 'all'")->delimiter(',');
    sweep->add_option("--n", f.n, "sample count for --a1-grid");
    sweep->add_option("--p", f.p, "dimension for --a1-grid");
    sweep->add_option("--a1-grid", s.a1_grid, "comma-separated leading spike values");
    sweep->add_option("--np-grid", s.np_grid, "comma-separated n x p pairs, e.g. 201x50,401x100");
    sweep->add_option("--a1", s.a1, "leading spike for --np-grid");
    sweep->add_option("--alpha", f.alpha, "level");
    sweep->add_flag("--empirical", s.empirical, "add Monte Carlo power columns");
    sweep->add_option("--reps", f.reps, "replicates per grid point for --empirical");
    sweep->add_option("--calib-reps", s.calib_reps, "calibration replicates for --empirical");

    auto* verify = app.add_subcommand("verify", "Run the oracle suite");
    add_common(verify, f, false);
    std::string scale = "desk";
    std::vector<std::string> only;
    bool list = false;
    verify->add_option("--scale", scale, "desk | smoke")->check(CLI::IsMember({"desk", "smoke"}));
    verify->add_option("--only", only, "run checks whose names start with these prefixes");
    verify->add_flag("--list", list, "list check names and exit");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!(f.alpha > 0.0 && f.alpha < 1.0)) fail(ErrorCode::BadArgument, "--alpha must lie in (0, 1)");
        if (*calibrate) return cmd_calibrate(f, method, out, err);
        if (*test) return cmd_test(f, data_path, header, mean_mode, test_calib, out, err);
        if (*power) return cmd_power(f, sigma_path, spikes, power_calib, diagnose, t, out, err);
        if (*simulate) return cmd_simulate(f, sigma_path, spikes, sim_calib_reps, out, err);
        if (*sweep) return cmd_sweep(f, s, out, err);
        if (*verify) return cmd_verify(f, scale, only, list, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_user_error() ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace hdcov
