#include "film/data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "film/errors.hpp"

namespace film::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0' && std::isfinite(out);
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

} // namespace

TimeSeriesTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("load_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("load_csv: empty file " + path);
    }
    strip_cr(line);
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2) {
        throw DataError("load_csv: header must name a timestamp column and at least one value column (line 1)");
    }
    {
        // A first row made of numbers is data, not a header.
        bool all_numeric = true;
        for (std::size_t i = 1; i < header.size(); ++i) {
            double v;
            if (!parse_number(header[i], v)) {
                all_numeric = false;
                break;
            }
        }
        if (all_numeric) {
            throw DataError("load_csv: missing header row in " + path);
        }
    }
    TimeSeriesTable table;
    table.column_names.assign(header.begin() + 1, header.end());
    const std::size_t ncols = table.column_names.size();

    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != ncols + 1) {
            throw DataError("load_csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(ncols + 1));
        }
        table.timestamps.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v;
            if (!parse_number(cells[c], v)) {
                throw DataError("load_csv: non-numeric cell '" + cells[c] + "' at line " +
                                std::to_string(line_no));
            }
            flat.push_back(v);
        }
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(table.timestamps.size());
    if (rows < 1) {
        throw DataError("load_csv: no data rows in " + path);
    }
    table.values.resize(rows, static_cast<Eigen::Index>(ncols));
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            table.values(r, c) = flat[static_cast<std::size_t>(r) * ncols + static_cast<std::size_t>(c)];
        }
    }
    return table;
}

TimeSeriesTable select_column(const TimeSeriesTable& table, const std::string& column) {
    Eigen::Index idx = -1;
    for (std::size_t i = 0; i < table.column_names.size(); ++i) {
        if (table.column_names[i] == column) {
            idx = static_cast<Eigen::Index>(i);
            break;
        }
    }
    if (idx < 0) {
        char* end = nullptr;
        const long parsed = std::strtol(column.c_str(), &end, 10);
        if (end != column.c_str() && *end == '\0' && parsed >= 0 &&
            parsed < table.values.cols()) {
            idx = static_cast<Eigen::Index>(parsed);
        }
    }
    if (idx < 0) {
        throw std::invalid_argument("select_column: no column named '" + column + "'");
    }
    TimeSeriesTable out;
    out.timestamps = table.timestamps;
    out.column_names = {table.column_names[static_cast<std::size_t>(idx)]};
    out.values = table.values.col(idx);
    return out;
}

SplitTables split(const TimeSeriesTable& table, const SplitSpec& spec) {
    if (!(spec.train > 0.0) || !(spec.val > 0.0) || !(spec.test > 0.0) ||
        std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split: ratios must be positive and sum to 1");
    }
    const Eigen::Index rows = table.rows();
    if (rows < 10) {
        throw std::invalid_argument("split: need at least 10 rows, got " + std::to_string(rows));
    }
    // a hair of slack so 0.7 + 0.1 lands on the decimal boundary it names
    const Eigen::Index a = static_cast<Eigen::Index>(
        std::floor(spec.train * static_cast<double>(rows) + 1e-9));
    const Eigen::Index b = static_cast<Eigen::Index>(
        std::floor((spec.train + spec.val) * static_cast<double>(rows) + 1e-9));
    auto slice = [&](Eigen::Index begin, Eigen::Index count) {
        TimeSeriesTable part;
        part.column_names = table.column_names;
        part.values = table.values.middleRows(begin, count);
        part.timestamps.assign(table.timestamps.begin() + begin,
                               table.timestamps.begin() + begin + count);
        return part;
    };
    SplitTables out;
    out.train = slice(0, a);
    out.val = slice(a, b - a);
    out.test = slice(b, rows - b);
    return out;
}

WindowSet windows(const TimeSeriesTable& table, Eigen::Index input_length,
                  Eigen::Index horizon, Eigen::Index stride) {
    if (input_length < 1 || horizon < 1 || stride < 1) {
        throw std::invalid_argument("windows: lengths and stride must be >= 1");
    }
    if (input_length + horizon > table.rows()) {
        throw std::invalid_argument("windows: window of " + std::to_string(input_length + horizon) +
                                    " rows does not fit a table of " + std::to_string(table.rows()));
    }
    WindowSet ws;
    ws.input_length = input_length;
    ws.horizon = horizon;
    ws.stride = stride;
    for (Eigen::Index o = 0; o + input_length + horizon <= table.rows(); o += stride) {
        ws.origins.push_back(o);
    }
    return ws;
}

Scaler fit_scaler(const TimeSeriesTable& train) {
    if (train.rows() < 1) {
        throw std::invalid_argument("fit_scaler: empty training table");
    }
    Scaler s;
    const double n = static_cast<double>(train.rows());
    s.mean = train.values.colwise().sum() / n;
    s.std.resize(train.channels());
    for (Eigen::Index c = 0; c < train.channels(); ++c) {
        const double var = (train.values.col(c).array() - s.mean(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.std(c) = (sd < 1e-12) ? 1.0 : sd;
    }
    return s;
}

void apply_scaler(const Scaler& scaler, TimeSeriesTable& table) {
    if (scaler.mean.size() != table.channels()) {
        throw std::invalid_argument("apply_scaler: channel mismatch");
    }
    for (Eigen::Index c = 0; c < table.channels(); ++c) {
        table.values.col(c) = (table.values.col(c).array() - scaler.mean(c)) / scaler.std(c);
    }
}

Eigen::MatrixXd invert_scaler(const Scaler& scaler, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (scaler.mean.size() != x.cols()) {
        throw std::invalid_argument("invert_scaler: channel mismatch");
    }
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        out.col(c) = x.col(c).array() * scaler.std(c) + scaler.mean(c);
    }
    return out;
}

void save_scaler(const std::string& path, const Scaler& scaler) {
    std::ofstream out(path);
    if (!out) throw DataError("save_scaler: cannot write " + path);
    out.precision(17);
    for (Eigen::Index c = 0; c < scaler.mean.size(); ++c) {
        out << scaler.mean(c) << " " << scaler.std(c) << "\n";
    }
}

Scaler load_scaler(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_scaler: cannot open " + path);
    std::vector<double> means, stds;
    double m, s;
    while (in >> m >> s) {
        means.push_back(m);
        stds.push_back(s);
    }
    if (means.empty()) throw DataError("load_scaler: no entries in " + path);
    Scaler out;
    out.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    out.std = Eigen::Map<Eigen::VectorXd>(stds.data(), static_cast<Eigen::Index>(stds.size()));
    return out;
}

TimeSeriesTable gen_sine_trend(Eigen::Index length, const std::vector<SineComponent>& components,
                               double trend_slope, double noise_sigma, std::uint64_t seed) {
    if (length < 1) {
        throw std::invalid_argument("gen_sine_trend: length must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TimeSeriesTable table;
    table.column_names = {"value"};
    table.values.resize(length, 1);
    table.timestamps.reserve(static_cast<std::size_t>(length));
    for (Eigen::Index t = 0; t < length; ++t) {
        double v = trend_slope * static_cast<double>(t);
        for (const auto& c : components) {
            v += c.amplitude *
                 std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / c.period + c.phase);
        }
        v += noise_sigma * gauss(rng);
        table.values(t, 0) = v;
        table.timestamps.push_back(std::to_string(t));
    }
    return table;
}

ArUnitary gen_ar_unitary(Eigen::Index dim, Eigen::Index steps, double sigma, std::uint64_t seed) {
    if (dim < 2 || dim % 2 != 0) {
        throw std::invalid_argument("gen_ar_unitary: dim must be even and >= 2");
    }
    if (steps < 1) {
        throw std::invalid_argument("gen_ar_unitary: steps must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ArUnitary out;
    out.transition = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim / 2; ++b) {
        const double ang = 2.0 * std::numbers::pi * uni(rng);
        const double c = std::cos(ang), s = std::sin(ang);
        out.transition(2 * b, 2 * b) = c;
        out.transition(2 * b, 2 * b + 1) = -s;
        out.transition(2 * b + 1, 2 * b) = s;
        out.transition(2 * b + 1, 2 * b + 1) = c;
    }
    out.offset.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) out.offset(i) = uni(rng) - 0.5;

    out.trajectory.resize(steps, dim);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd eps(dim);
    for (Eigen::Index t = 0; t < steps; ++t) {
        for (Eigen::Index i = 0; i < dim; ++i) eps(i) = gauss(rng); // drawn even for sigma = 0
        x = out.transition * x + out.offset + sigma * eps;
        out.trajectory.row(t) = x.transpose();
    }
    return out;
}

Eigen::VectorXd gen_lipschitz(double lipschitz_const, Eigen::Index length, std::uint64_t seed) {
    if (length < 2) {
        throw std::invalid_argument("gen_lipschitz: length must be >= 2");
    }
    if (lipschitz_const < 0.0) {
        throw std::invalid_argument("gen_lipschitz: constant must be >= 0");
    }
    std::mt19937_64 rng(seed);
    const double bound = lipschitz_const / static_cast<double>(length);
    std::uniform_real_distribution<double> uni(-bound, bound);
    Eigen::VectorXd x(length);
    double acc = 0.0;
    for (Eigen::Index t = 0; t < length; ++t) {
        acc += uni(rng);
        x(t) = acc;
    }
    return x;
}

} // namespace film::data
