#include "rankcpd/datagen.hpp"
#include "rankcpd/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rankcpd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json config_json(const DetectorConfig& c) {
    return json{
        {"window", c.window},
        {"epsilon", c.epsilon},
        {"delta", c.delta},
        {"eta", c.eta},
        {"use_scaled", c.use_scaled},
        {"stride", c.stride},
        {"normalize_cost", c.normalize_cost},
        {"threads", c.threads},
        {"sinkhorn",
         {{"max_iters", c.sinkhorn.max_iters},
          {"tolerance", c.sinkhorn.tolerance},
          {"epsilon_scaling", c.sinkhorn.epsilon_scaling},
          {"overrelaxation", c.sinkhorn.overrelaxation}}},
    };
}

json make_manifest(const std::string& command, const DetectorConfig& config, json inputs,
                   std::uint64_t seed, double duration_seconds) {
    return json{
        {"command", command},
        {"config", config_json(config)},
        {"inputs", std::move(inputs)},
        {"seed", seed},
        {"version", RANKCPD_VERSION},
        {"duration_seconds", duration_seconds},
    };
}

void write_json_file(const json& value, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << value.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    json parsed;
    in >> parsed;
    return parsed;
}

void print_json(const json& value) { std::cout << value.dump(2) << '\n'; }

const char* kind_name(StatisticKind kind) {
    return kind == StatisticKind::RankEnergy ? "RE" : "sRE";
}

// --- simulate ---------------------------------------------------------------

std::vector<SegmentSpec> parse_segment_specs(const json& doc) {
    if (!doc.is_object() || !doc.contains("segments") || !doc["segments"].is_array()) {
        throw std::runtime_error("spec file must be an object with a 'segments' array");
    }
    std::vector<SegmentSpec> specs;
    for (const auto& item : doc["segments"]) {
        if (!item.is_object() || !item.contains("length")) {
            throw std::runtime_error("each segment needs at least a 'length'");
        }
        const int length = item["length"].get<int>();
        const std::string kind = item.value("kind", std::string("gaussian"));
        if (kind == "zeros") {
            if (!item.contains("dim")) {
                throw std::runtime_error("zeros segment needs 'dim'");
            }
            specs.push_back(SegmentSpec::zeros(length, item["dim"].get<int>()));
        } else if (kind == "gaussian") {
            if (!item.contains("mean") || !item["mean"].is_array() || item["mean"].empty()) {
                throw std::runtime_error("gaussian segment needs a nonempty 'mean' array");
            }
            Eigen::VectorXd mean(item["mean"].size());
            for (Eigen::Index i = 0; i < mean.size(); ++i) {
                mean(i) = item["mean"][static_cast<std::size_t>(i)].get<double>();
            }
            specs.push_back(SegmentSpec::gaussian(length, std::move(mean),
                                                  item.value("covariance_scale", 1.0)));
        } else {
            throw std::runtime_error("unknown segment kind '" + kind + "'");
        }
    }
    return specs;
}

struct SimulateArgs {
    std::string preset;
    std::string spec_file;
    int segment_length = 500;
    std::uint64_t seed = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    Timer timer;
    LabeledSeries data;
    json inputs = json::object();
    if (!args.preset.empty()) {
        if (args.preset != "fig1") {
            std::cerr << "error: unknown preset '" << args.preset << "'\n";
            return kExitUsage;
        }
        data = fig1_preset(args.segment_length, args.seed);
        inputs["preset"] = args.preset;
        inputs["segment_length"] = args.segment_length;
    } else {
        data = generate_segments(parse_segment_specs(read_json_file(args.spec_file)), args.seed);
        inputs["spec_file"] = args.spec_file;
    }

    const fs::path out_dir(args.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create '" + args.out + "': " + ec.message());
    }
    write_csv(data.series, (out_dir / "series.csv").string());
    write_labels(data.truth, (out_dir / "labels.txt").string());

    json manifest = make_manifest("simulate", DetectorConfig{}, inputs, args.seed, timer.seconds());
    manifest["outputs"] = {{"series", (out_dir / "series.csv").string()},
                           {"labels", (out_dir / "labels.txt").string()},
                           {"rows", data.series.length()},
                           {"dim", data.series.dim()},
                           {"change_points", data.truth.change_points}};
    write_json_file(manifest, out_dir / "manifest.json");
    return 0;
}

// --- stat -------------------------------------------------------------------

struct StatArgs {
    std::string x_path;
    std::string y_path;
    double epsilon = 0.0;
    bool normalize_cost = false;
    bool header = false;
};

int run_stat(const StatArgs& args) {
    Timer timer;
    const TimeSeries xs = load_csv(args.x_path, args.header);
    const TimeSeries ys = load_csv(args.y_path, args.header);
    const TwoSample sample{xs.values, ys.values};

    SoftRankOptions options;
    options.normalize_cost = args.normalize_cost;
    StatisticValue stat;
    if (args.epsilon == 0.0) {
        stat = rank_energy(sample);
    } else {
        stat = soft_rank_energy(sample, args.epsilon, options);
    }

    DetectorConfig config;
    config.epsilon = args.epsilon;
    config.normalize_cost = args.normalize_cost;
    config.sinkhorn = options.sinkhorn;
    json out{
        {"kind", kind_name(stat.kind)},
        {"epsilon", stat.epsilon},
        {"raw", stat.raw},
        {"scaled", stat.scaled},
        {"m", sample.m()},
        {"n", sample.n()},
    };
    out["manifest"] = make_manifest("stat", config,
                                    json{{"x", args.x_path}, {"y", args.y_path}}, 0,
                                    timer.seconds());
    print_json(out);
    return 0;
}

// --- detect -----------------------------------------------------------------

struct DetectArgs {
    std::string series_path;
    int window = 0;
    double epsilon = 0.0;
    int delta = 0;
    double eta = 0.0;
    bool eta_given = false;
    int calibrate_null = 0;
    bool scaled = false;
    int stride = 1;
    int pad = 0;
    bool normalize_cost = false;
    bool header = false;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

// eta = 95th percentile of the statistic over `count` random relabelings of
// the first window pair; under the null every relabeling is equally likely.
double calibrate_eta(const TimeSeries& series, const DetectorConfig& config, int count,
                     std::uint64_t seed) {
    const int n = config.window;
    const HaltonGrid grid = generate_halton(2 * n, series.dim());
    std::mt19937_64 gen(mix64(seed, 0x9bULL));
    std::vector<int> order(static_cast<std::size_t>(2 * n));
    std::iota(order.begin(), order.end(), 0);
    Eigen::MatrixXd permuted(2 * n, series.dim());
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        shuffle_values(order, gen);
        for (int i = 0; i < 2 * n; ++i) {
            permuted.row(i) = series.values.row(order[static_cast<std::size_t>(i)]);
        }
        stats.push_back(
            window_statistic(permuted.topRows(n), permuted.bottomRows(n), grid, config));
    }
    std::sort(stats.begin(), stats.end());
    const auto rank = static_cast<std::size_t>(
        std::max(0.0, std::ceil(0.95 * count) - 1.0));
    return stats[std::min(rank, stats.size() - 1)];
}

void write_trace_csv(const StatisticTrace& trace, int pad, const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << "t,sigma\n";
    char buffer[64];
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", trace.values[i]);
        out << (trace.times[i] - pad) << ',' << buffer << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

int run_detect(const DetectArgs& args) {
    Timer timer;
    TimeSeries series = load_csv(args.series_path, args.header);
    if (args.pad > 0) {
        series = zero_pad(series, args.pad);
    }

    DetectorConfig config;
    config.window = args.window;
    config.epsilon = args.epsilon;
    config.delta = args.delta;
    config.use_scaled = args.scaled;
    config.stride = args.stride;
    config.normalize_cost = args.normalize_cost;
    config.threads = args.threads;

    if (series.length() < 2 * config.window) {
        throw std::runtime_error("series has " + std::to_string(series.length()) +
                                 " rows after padding, need at least " +
                                 std::to_string(2 * config.window));
    }
    if (args.eta_given) {
        config.eta = args.eta;
    } else {
        config.eta = calibrate_eta(series, config, args.calibrate_null, args.seed);
    }

    const StatisticTrace trace = scan(series, config);
    const Detections detections = detect_peaks(trace);

    const fs::path out_dir(args.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create '" + args.out + "': " + ec.message());
    }
    write_trace_csv(trace, args.pad, out_dir / "trace.csv");

    std::vector<int> change_points = detections.change_points;
    for (int& t : change_points) {
        t -= args.pad;
    }
    const json manifest = make_manifest("detect", config,
                                        json{{"series", args.series_path}}, args.seed,
                                        timer.seconds());
    json out{
        {"change_points", change_points},
        {"eta", config.eta},
        {"pad", args.pad},
        {"count", change_points.size()},
        {"calibrated", !args.eta_given},
    };
    out["manifest"] = manifest;
    write_json_file(out, out_dir / "detections.json");
    write_json_file(manifest, out_dir / "manifest.json");
    return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string trace_path;
    std::string detections_path;
    std::string labels_path;
    int margin = 0;
    int delta = 1;
    double eta = 0.0;
    bool eta_given = false;
};

StatisticTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    StatisticTrace trace;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::stringstream row(line);
        std::string t_cell;
        std::string v_cell;
        if (!std::getline(row, t_cell, ',') || !std::getline(row, v_cell)) {
            throw std::runtime_error("trace row " + std::to_string(lineno) +
                                     " is not 't,sigma'");
        }
        try {
            trace.times.push_back(std::stoi(t_cell));
            trace.values.push_back(std::stod(v_cell));
        } catch (const std::exception&) {
            if (lineno == 1) {
                continue;  // header row
            }
            throw std::runtime_error("trace row " + std::to_string(lineno) +
                                     " is not numeric: '" + line + "'");
        }
    }
    if (trace.times.empty()) {
        throw std::runtime_error("trace '" + path + "' has no rows");
    }
    return trace;
}

Detections load_detections_json(const std::string& path) {
    const json doc = read_json_file(path);
    Detections detections;
    const json* points = nullptr;
    if (doc.is_array()) {
        points = &doc;
    } else if (doc.is_object() && doc.contains("change_points")) {
        points = &doc["change_points"];
    }
    if (points == nullptr || !points->is_array()) {
        throw std::runtime_error("'" + path + "' has no change_points array");
    }
    for (const auto& value : *points) {
        detections.change_points.push_back(value.get<int>());
    }
    return detections;
}

int run_evaluate(const EvaluateArgs& args) {
    Timer timer;
    const GroundTruth truth = load_labels(args.labels_path);

    EvalReport report;
    json inputs{{"labels", args.labels_path}};
    DetectorConfig config;
    config.delta = args.delta;
    if (!args.trace_path.empty()) {
        const StatisticTrace trace = load_trace_csv(args.trace_path);
        config.eta = args.eta;
        report = f1_score(detect_peaks(trace, args.eta, args.delta), truth, args.margin);
        report.auc = cp_auc(trace, truth, args.margin, args.delta);
        inputs["trace"] = args.trace_path;
    } else {
        report = f1_score(load_detections_json(args.detections_path), truth, args.margin);
        inputs["detections"] = args.detections_path;
    }

    json out{
        {"f1", report.f1},
        {"precision", report.precision},
        {"recall", report.recall},
        {"tp", report.counts.tp},
        {"fp", report.counts.fp},
        {"fn", report.counts.fn},
        {"margin", report.margin},
    };
    if (report.auc) {
        out["auc"] = *report.auc;
    }
    out["manifest"] = make_manifest("evaluate", config, inputs, 0, timer.seconds());
    print_json(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate rank statistics and change-point detection"};
    app.set_version_flag("--version", RANKCPD_VERSION);
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a labeled synthetic series");
    auto* source = simulate->add_option_group("source");
    source->add_option("--preset", sim.preset, "Built-in scenario (fig1)");
    source->add_option("--spec-file", sim.spec_file, "JSON segment list")
        ->check(CLI::ExistingFile);
    source->require_option(1);
    simulate->add_option("--segment-length", sim.segment_length, "Rows per preset segment")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--out", sim.out, "Output directory")->required();

    StatArgs stat;
    CLI::App* stat_cmd = app.add_subcommand("stat", "Two-sample rank statistic for two CSV files");
    stat_cmd->add_option("--x", stat.x_path, "First sample CSV")->required()->check(CLI::ExistingFile);
    stat_cmd->add_option("--y", stat.y_path, "Second sample CSV")->required()->check(CLI::ExistingFile);
    stat_cmd->add_option("--epsilon", stat.epsilon, "Entropic regularizer; 0 for the exact statistic")
        ->check(CLI::NonNegativeNumber);
    stat_cmd->add_flag("--normalize-cost", stat.normalize_cost, "Divide costs by their max first");
    stat_cmd->add_flag("--header", stat.header, "Inputs start with a header row");

    DetectArgs det;
    CLI::App* detect_cmd = app.add_subcommand("detect", "Scan a series and report change points");
    detect_cmd->add_option("--series", det.series_path, "Input CSV")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--window", det.window, "Rows per sliding sample")->required()->check(CLI::PositiveNumber);
    detect_cmd->add_option("--epsilon", det.epsilon, "Entropic regularizer; 0 for the exact statistic")
        ->check(CLI::NonNegativeNumber);
    detect_cmd->add_option("--delta", det.delta, "Peak dominance radius")->required()->check(CLI::PositiveNumber);
    auto* threshold = detect_cmd->add_option_group("threshold");
    auto* eta_opt = threshold->add_option("--eta", det.eta, "Detection threshold");
    threshold->add_option("--calibrate-null", det.calibrate_null,
                          "Set eta to the 95th percentile of K permutation-null statistics")
        ->check(CLI::PositiveNumber);
    threshold->require_option(1);
    detect_cmd->add_flag("--scaled", det.scaled, "Use the mn/(m+n)-scaled statistic");
    detect_cmd->add_option("--stride", det.stride, "Evaluate every stride-th center")->check(CLI::PositiveNumber);
    detect_cmd->add_option("--pad", det.pad, "Zero rows added at both ends")->check(CLI::NonNegativeNumber);
    detect_cmd->add_flag("--normalize-cost", det.normalize_cost, "Divide costs by their max first");
    detect_cmd->add_flag("--header", det.header, "Input starts with a header row");
    detect_cmd->add_option("--seed", det.seed, "Seed for null calibration");
    detect_cmd->add_option("--threads", det.threads, "Worker threads; 0 = auto")->check(CLI::NonNegativeNumber);
    detect_cmd->add_option("--out", det.out, "Output directory")->required();

    EvaluateArgs ev;
    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score detections against labels");
    auto* predicted = evaluate_cmd->add_option_group("predicted");
    auto* trace_opt = predicted->add_option("--trace", ev.trace_path, "trace.csv from detect");
    predicted->add_option("--detections", ev.detections_path, "detections.json from detect");
    predicted->require_option(1);
    evaluate_cmd->add_option("--labels", ev.labels_path, "True change points, one per line")
        ->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--margin", ev.margin, "Match tolerance in time steps")
        ->required()->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--delta", ev.delta, "Peak dominance radius for traces")->check(CLI::PositiveNumber);
    auto* ev_eta_opt = evaluate_cmd->add_option("--eta", ev.eta, "Threshold for F1 from a trace");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    det.eta_given = eta_opt->count() > 0;
    ev.eta_given = ev_eta_opt->count() > 0;
    if (!ev.trace_path.empty() && !ev.eta_given) {
        std::cerr << "error: --trace requires --eta for the F1 computation\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            return run_simulate(sim);
        }
        if (stat_cmd->parsed()) {
            return run_stat(stat);
        }
        if (detect_cmd->parsed()) {
            return run_detect(det);
        }
        if (evaluate_cmd->parsed()) {
            return run_evaluate(ev);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
