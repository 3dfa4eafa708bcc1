#ifndef FILM_DATA_HPP
#define FILM_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace film::data {

/// Timestamped multivariate series in file order (assumed chronological).
struct TimeSeriesTable {
    std::vector<std::string> timestamps;
    Eigen::MatrixXd values; // rows x channels
    std::vector<std::string> column_names;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index channels() const { return values.cols(); }
};

/// Parse a CSV with a header row, a leading timestamp column and numeric
/// data columns. Malformed cells and ragged rows raise DataError with the
/// offending line number.
TimeSeriesTable load_csv(const std::string& path);

/// Keep a single column (by name or zero-based data-column index).
TimeSeriesTable select_column(const TimeSeriesTable& table, const std::string& column);

struct SplitSpec {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

struct SplitTables {
    TimeSeriesTable train;
    TimeSeriesTable val;
    TimeSeriesTable test;
};

/// Contiguous chronological split with floor boundaries on the cumulative
/// ratios; the three parts partition the rows exactly.
SplitTables split(const TimeSeriesTable& table, const SplitSpec& spec);

/// Sliding supervised windows: input of `input_length` rows immediately
/// followed by `horizon` target rows, advancing by `stride`.
struct WindowSet {
    Eigen::Index input_length = 0;
    Eigen::Index horizon = 0;
    Eigen::Index stride = 1;
    std::vector<Eigen::Index> origins;

    Eigen::Index count() const { return static_cast<Eigen::Index>(origins.size()); }
};

WindowSet windows(const TimeSeriesTable& table, Eigen::Index input_length,
                  Eigen::Index horizon, Eigen::Index stride = 1);

inline Eigen::Block<const Eigen::MatrixXd> window_input(const TimeSeriesTable& table,
                                                        const WindowSet& ws, Eigen::Index i) {
    return table.values.middleRows(ws.origins[static_cast<std::size_t>(i)], ws.input_length);
}

inline Eigen::Block<const Eigen::MatrixXd> window_target(const TimeSeriesTable& table,
                                                         const WindowSet& ws, Eigen::Index i) {
    return table.values.middleRows(ws.origins[static_cast<std::size_t>(i)] + ws.input_length,
                                   ws.horizon);
}

/// Per-channel z-score fitted on the training split only. Channels with
/// degenerate variance keep unit scale.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

Scaler fit_scaler(const TimeSeriesTable& train);
void apply_scaler(const Scaler& scaler, TimeSeriesTable& table);
Eigen::MatrixXd invert_scaler(const Scaler& scaler, const Eigen::Ref<const Eigen::MatrixXd>& x);
void save_scaler(const std::string& path, const Scaler& scaler);
Scaler load_scaler(const std::string& path);

struct SineComponent {
    double amplitude = 1.0;
    double period = 24.0;
    double phase = 0.0;
};

/// x_t = sum_i a_i sin(2 pi t / p_i + phi_i) + slope * t + sigma * g_t with
/// seeded standard normal g_t. Deterministic per seed.
TimeSeriesTable gen_sine_trend(Eigen::Index length, const std::vector<SineComponent>& components,
                               double trend_slope, double noise_sigma, std::uint64_t seed);

/// Noisy autoregression x_{t+1} = A x_t + b + eps_t with A built from seeded
/// 2x2 rotation blocks (unitary by construction). sigma = 0 replays the
/// deterministic part on the identical draw sequence.
struct ArUnitary {
    Eigen::MatrixXd transition; // dim x dim
    Eigen::VectorXd offset;     // b
    Eigen::MatrixXd trajectory; // steps x dim, rows x_1..x_steps from x_0 = 0
};

ArUnitary gen_ar_unitary(Eigen::Index dim, Eigen::Index steps, double sigma, std::uint64_t seed);

/// Cumulative sum of seeded uniform steps in [-c/length, c/length], so the
/// discrete Lipschitz constant on the unit interval stays at most c.
Eigen::VectorXd gen_lipschitz(double lipschitz_const, Eigen::Index length, std::uint64_t seed);

} // namespace film::data

#endif
