#include "rankcpd/datagen.hpp"

#include "rankcpd/rng.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rankcpd {

SegmentSpec SegmentSpec::zeros(int length, int dim) {
    SegmentSpec spec;
    spec.kind = Kind::Zeros;
    spec.length = length;
    spec.mean = Eigen::VectorXd::Zero(dim);
    spec.covariance_scale = 0.0;
    return spec;
}

SegmentSpec SegmentSpec::gaussian(int length, Eigen::VectorXd mean, double covariance_scale) {
    SegmentSpec spec;
    spec.kind = Kind::Gaussian;
    spec.length = length;
    spec.mean = std::move(mean);
    spec.covariance_scale = covariance_scale;
    return spec;
}

LabeledSeries generate_segments(const std::vector<SegmentSpec>& specs, std::uint64_t seed) {
    if (specs.empty()) {
        throw std::invalid_argument("generate_segments: no segments");
    }
    const auto dim = specs.front().mean.size();
    if (dim < 1) {
        throw std::invalid_argument("generate_segments: dimension must be positive");
    }
    int total = 0;
    for (const auto& spec : specs) {
        if (spec.length < 1) {
            throw std::invalid_argument("generate_segments: segment length must be positive");
        }
        if (spec.mean.size() != dim) {
            throw std::invalid_argument("generate_segments: segment dimensions differ");
        }
        if (spec.covariance_scale < 0.0 || !std::isfinite(spec.covariance_scale)) {
            throw std::invalid_argument("generate_segments: covariance scale must be finite and nonnegative");
        }
        total += spec.length;
    }

    LabeledSeries out;
    out.seed = seed;
    out.series.values.resize(total, dim);
    out.truth.series_length = total;

    int row = 0;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const auto& spec = specs[s];
        if (s > 0) {
            out.truth.change_points.push_back(row);
        }
        if (spec.kind == SegmentSpec::Kind::Zeros) {
            out.series.values.middleRows(row, spec.length).setZero();
        } else {
            NormalSampler normals(mix64(seed, s));
            const double sigma = std::sqrt(spec.covariance_scale);
            for (int i = 0; i < spec.length; ++i) {
                for (Eigen::Index k = 0; k < dim; ++k) {
                    out.series.values(row + i, k) = spec.mean(k) + sigma * normals.next();
                }
            }
        }
        row += spec.length;
    }
    return out;
}

LabeledSeries fig1_preset(int segment_length, std::uint64_t seed) {
    if (segment_length < 1) {
        throw std::invalid_argument("fig1_preset: segment length must be positive");
    }
    const int d = 3;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const Eigen::VectorXd up = Eigen::VectorXd::Constant(d, 2.0);
    const Eigen::VectorXd down = Eigen::VectorXd::Constant(d, -2.0);
    const std::vector<SegmentSpec> specs = {
        SegmentSpec::zeros(segment_length, d),
        SegmentSpec::gaussian(segment_length, zero, 0.001),
        SegmentSpec::gaussian(segment_length, up, 1.0),
        SegmentSpec::gaussian(segment_length, zero, 4.0),
        SegmentSpec::gaussian(segment_length, down, 0.25),
        SegmentSpec::gaussian(segment_length, zero, 0.001),
        SegmentSpec::zeros(segment_length, d),
    };
    return generate_segments(specs, seed);
}

namespace {

double parse_cell(const std::string& cell, int row, int column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(begin, &end);
    while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) {
        ++end;
    }
    if (end == begin || end == nullptr || *end != '\0' || errno == ERANGE) {
        throw std::runtime_error("load_csv: parse error at row " + std::to_string(row) +
                                 ", column " + std::to_string(column) + ": '" + cell + "'");
    }
    return value;
}

std::vector<double> parse_row(const std::string& line, int row) {
    std::vector<double> cells;
    std::stringstream stream(line);
    std::string cell;
    int column = 1;
    while (std::getline(stream, cell, ',')) {
        cells.push_back(parse_cell(cell, row, column));
        ++column;
    }
    if (!line.empty() && line.back() == ',') {
        throw std::runtime_error("load_csv: parse error at row " + std::to_string(row) +
                                 ", column " + std::to_string(column) + ": empty cell");
    }
    return cells;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

TimeSeries load_csv(const std::string& path, bool has_header) {
    std::ifstream input(path);
    if (!input) {
        throw std::runtime_error("load_csv: cannot open '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    bool skipped_header = !has_header;
    while (std::getline(input, line)) {
        ++lineno;
        if (blank(line)) {
            continue;
        }
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        auto cells = parse_row(line, lineno);
        if (!rows.empty() && cells.size() != rows.front().size()) {
            throw std::runtime_error("load_csv: row " + std::to_string(lineno) + " has " +
                                     std::to_string(cells.size()) + " columns, expected " +
                                     std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) {
        throw std::runtime_error("load_csv: no data rows in '" + path + "'");
    }
    TimeSeries series;
    series.values.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            series.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return series;
}

void write_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream output(path);
    if (!output) {
        throw std::runtime_error("write_csv: cannot open '" + path + "'");
    }
    char buffer[64];
    for (int i = 0; i < series.length(); ++i) {
        for (int j = 0; j < series.dim(); ++j) {
            // %.17g round-trips doubles exactly.
            std::snprintf(buffer, sizeof(buffer), "%.17g", series.values(i, j));
            if (j > 0) {
                output << ',';
            }
            output << buffer;
        }
        output << '\n';
    }
    if (!output) {
        throw std::runtime_error("write_csv: write failed for '" + path + "'");
    }
}

GroundTruth load_labels(const std::string& path) {
    std::ifstream input(path);
    if (!input) {
        throw std::runtime_error("load_labels: cannot open '" + path + "'");
    }
    GroundTruth truth;
    std::string line;
    int lineno = 0;
    while (std::getline(input, line)) {
        ++lineno;
        if (blank(line)) {
            continue;
        }
        const char* begin = line.c_str();
        char* end = nullptr;
        errno = 0;
        const long value = std::strtol(begin, &end, 10);
        while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) {
            ++end;
        }
        if (end == begin || end == nullptr || *end != '\0' || errno == ERANGE || value < 0) {
            throw std::runtime_error("load_labels: line " + std::to_string(lineno) +
                                     " is not a nonnegative integer: '" + line + "'");
        }
        truth.change_points.push_back(static_cast<int>(value));
    }
    std::sort(truth.change_points.begin(), truth.change_points.end());
    truth.change_points.erase(
        std::unique(truth.change_points.begin(), truth.change_points.end()),
        truth.change_points.end());
    if (!truth.change_points.empty()) {
        truth.series_length = truth.change_points.back() + 1;
    }
    return truth;
}

void write_labels(const GroundTruth& truth, const std::string& path) {
    std::ofstream output(path);
    if (!output) {
        throw std::runtime_error("write_labels: cannot open '" + path + "'");
    }
    for (const int t : truth.change_points) {
        output << t << '\n';
    }
    if (!output) {
        throw std::runtime_error("write_labels: write failed for '" + path + "'");
    }
}

}  // namespace rankcpd
