// Command-line front end: train / evaluate / forecast / reconstruct /
// verify / ks-test. Machine-readable output is line-oriented key=value;
// lines starting with '#' carry non-reproducible extras such as wall time.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "film/checkpoint.hpp"
#include "film/data.hpp"
#include "film/errors.hpp"
#include "film/legendre.hpp"
#include "film/model.hpp"
#include "film/stats.hpp"
#include "film/training.hpp"
#include "film/verify.hpp"

namespace {

using film::model::FiLMConfig;

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
};

struct ModelOpts {
    long horizon = 96;
    std::string factors = "1,2,4";
    long order = 256;
    long modes = 32;
    std::string policy = "lowest";
    long rank = 0;
    bool revin = false;
    double eps_norm = 1e-5;
};

struct DataOpts {
    std::string data_path;
    std::string target_col;
    bool synthetic = false;
    long syn_length = 10000;
    std::string syn_periods = "24,169";
    std::string syn_amps = "1.0,0.8";
    double syn_slope = 0.0;
    double syn_noise = 0.1;
    double split_train = 0.7;
    double split_val = 0.1;
    double split_test = 0.2;
};

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(std::stod(cell));
    }
    return out;
}

FiLMConfig make_config(const ModelOpts& m, Eigen::Index channels) {
    FiLMConfig cfg;
    cfg.horizon = m.horizon;
    cfg.multiscale_factors.clear();
    for (double f : parse_list(m.factors)) {
        cfg.multiscale_factors.push_back(static_cast<Eigen::Index>(f));
    }
    cfg.legendre_order = m.order;
    cfg.mode_count = m.modes;
    cfg.mode_policy = film::spectral::parse_mode_policy(m.policy);
    cfg.rank = m.rank;
    cfg.revin_enabled = m.revin;
    cfg.epsilon_norm = m.eps_norm;
    cfg.channels = channels;
    cfg.validate();
    return cfg;
}

// Plain key=value file with '#' comments; command-line flags override.
std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    if (!in) throw film::DataError("config: cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw film::DataError("config: line " + std::to_string(line_no) +
                                      " is not key=value");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config_file(int argc, char** argv, CommonOpts& common, ModelOpts& m, DataOpts& d,
                       film::train::TrainConfig& tc, std::string& out_path) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            common.config_path = argv[i + 1];
        }
    }
    if (common.config_path.empty()) return;
    const auto kv = load_config_file(common.config_path);
    auto get = [&](const char* key, auto& slot) {
        const auto it = kv.find(key);
        if (it == kv.end()) return;
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, std::string>) {
            slot = it->second;
        } else if constexpr (std::is_same_v<T, bool>) {
            slot = it->second == "1" || it->second == "true" || it->second == "on";
        } else if constexpr (std::is_integral_v<T>) {
            slot = static_cast<T>(std::stoll(it->second));
        } else {
            slot = static_cast<T>(std::stod(it->second));
        }
    };
    get("seed", common.seed);
    get("horizon", m.horizon);
    get("factors", m.factors);
    get("order", m.order);
    get("modes", m.modes);
    get("mode_policy", m.policy);
    get("rank", m.rank);
    get("revin", m.revin);
    get("eps_norm", m.eps_norm);
    get("data", d.data_path);
    get("target_col", d.target_col);
    get("synthetic", d.synthetic);
    get("syn_length", d.syn_length);
    get("syn_periods", d.syn_periods);
    get("syn_amps", d.syn_amps);
    get("syn_slope", d.syn_slope);
    get("syn_noise", d.syn_noise);
    get("split_train", d.split_train);
    get("split_val", d.split_val);
    get("split_test", d.split_test);
    get("lr", tc.learning_rate);
    get("batch_size", tc.batch_size);
    get("epochs", tc.epochs);
    get("out", out_path);
}

film::data::TimeSeriesTable load_table(const DataOpts& d, std::uint64_t seed) {
    if (d.synthetic) {
        const auto periods = parse_list(d.syn_periods);
        const auto amps = parse_list(d.syn_amps);
        std::vector<film::data::SineComponent> comps;
        for (std::size_t i = 0; i < periods.size(); ++i) {
            const double amp = i < amps.size() ? amps[i] : 1.0;
            comps.push_back({amp, periods[i], 0.4 * static_cast<double>(i)});
        }
        return film::data::gen_sine_trend(d.syn_length, comps, d.syn_slope, d.syn_noise, seed);
    }
    if (d.data_path.empty()) {
        throw std::invalid_argument("no input: pass --data <csv> or --synthetic");
    }
    auto table = film::data::load_csv(d.data_path);
    if (!d.target_col.empty()) table = film::data::select_column(table, d.target_col);
    return table;
}

void emit(const char* key, double value) { std::printf("%s=%.12g\n", key, value); }
void emit(const char* key, long long value) { std::printf("%s=%lld\n", key, value); }
void emit(const char* key, const std::string& value) {
    std::printf("%s=%s\n", key, value.c_str());
}

void echo_config(const FiLMConfig& cfg, std::uint64_t seed) {
    emit("seed", static_cast<long long>(seed));
    emit("horizon", static_cast<long long>(cfg.horizon));
    std::string f;
    for (Eigen::Index v : cfg.multiscale_factors) {
        if (!f.empty()) f += ",";
        f += std::to_string(v);
    }
    emit("factors", f);
    emit("order", static_cast<long long>(cfg.legendre_order));
    emit("modes", static_cast<long long>(cfg.mode_count));
    emit("mode_policy", film::spectral::to_string(cfg.mode_policy));
    emit("rank", static_cast<long long>(cfg.rank));
    emit("revin", static_cast<long long>(cfg.revin_enabled ? 1 : 0));
    emit("channels", static_cast<long long>(cfg.channels));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_train(const CommonOpts& common, const ModelOpts& mopts, const DataOpts& dopts,
              film::train::TrainConfig tc, const std::string& out_path) {
    const auto start = std::chrono::steady_clock::now();
    tc.seed = common.seed;

    auto table = load_table(dopts, common.seed);
    auto splits = film::data::split(table, {dopts.split_train, dopts.split_val, dopts.split_test});
    const auto scaler = film::data::fit_scaler(splits.train);
    film::data::apply_scaler(scaler, splits.train);
    film::data::apply_scaler(scaler, splits.val);
    film::data::apply_scaler(scaler, splits.test);

    const auto cfg = make_config(mopts, table.channels());
    const auto ctx = film::model::build_context(cfg, common.seed);
    const auto train_ws = film::data::windows(splits.train, cfg.input_length(), cfg.horizon, 1);
    const auto val_ws = film::data::windows(splits.val, cfg.input_length(), cfg.horizon, 1);

    auto params = film::model::init_params(cfg, ctx, common.seed);
    const auto result =
        film::train::train(params, splits.train, train_ws, splits.val, val_ws, ctx, tc);

    std::printf("# epoch train_mse val_mse val_mae\n");
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const auto& h = result.history[i];
        std::printf("epoch=%zu train_mse=%.12g val_mse=%.12g val_mae=%.12g\n", i, h.train_mse,
                    h.val_mse, h.val_mae);
    }
    emit("best_epoch", static_cast<long long>(result.best_epoch));
    emit("best_val_mse", result.history[static_cast<std::size_t>(result.best_epoch)].val_mse);
    echo_config(cfg, common.seed);
    emit("lr", tc.learning_rate);
    emit("batch_size", static_cast<long long>(tc.batch_size));
    emit("epochs", static_cast<long long>(tc.epochs));

    film::checkpoint::Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.seed = common.seed;
    for (const auto& e : ctx.experts) ckpt.mode_indices.push_back(e.modes.indices);
    ckpt.params = result.best_params;
    ckpt.scaler = scaler;
    film::checkpoint::save(out_path, ckpt);
    emit("checkpoint", out_path);
    std::printf("# runtime_seconds=%.3f\n", seconds_since(start));
    return 0;
}

struct LoadedCheckpoint {
    film::checkpoint::Checkpoint ckpt;
    film::model::ModelContext ctx;
};

LoadedCheckpoint open_checkpoint(const std::string& path) {
    LoadedCheckpoint lc{film::checkpoint::load(path), {}};
    lc.ctx = film::checkpoint::context_from(lc.ckpt);
    return lc;
}

film::data::SplitTables split_with_scaler(const DataOpts& dopts, std::uint64_t seed,
                                          const LoadedCheckpoint& lc) {
    auto table = load_table(dopts, seed);
    auto splits = film::data::split(table, {dopts.split_train, dopts.split_val, dopts.split_test});
    if (lc.ckpt.scaler.has_value()) {
        film::data::apply_scaler(*lc.ckpt.scaler, splits.train);
        film::data::apply_scaler(*lc.ckpt.scaler, splits.val);
        film::data::apply_scaler(*lc.ckpt.scaler, splits.test);
    }
    return splits;
}

int cmd_evaluate(const CommonOpts& common, const DataOpts& dopts, const std::string& ckpt_path,
                 const std::string& which_split) {
    const auto start = std::chrono::steady_clock::now();
    const auto lc = open_checkpoint(ckpt_path);
    auto splits = split_with_scaler(dopts, common.seed, lc);
    const film::data::TimeSeriesTable& part = which_split == "train" ? splits.train
                                              : which_split == "val" ? splits.val
                                                                     : splits.test;
    const auto ws =
        film::data::windows(part, lc.ckpt.config.input_length(), lc.ckpt.config.horizon, 1);
    const auto report = film::train::evaluate(lc.ckpt.params, part, ws, lc.ctx, 32);
    std::printf("split=%s windows=%lld horizon=%lld\n", which_split.c_str(),
                static_cast<long long>(ws.count()),
                static_cast<long long>(lc.ckpt.config.horizon));
    emit("mse", report.mse);
    emit("mae", report.mae);
    echo_config(lc.ckpt.config, common.seed);
    std::printf("# runtime_seconds=%.3f\n", seconds_since(start));
    return 0;
}

int cmd_forecast(const CommonOpts& common, const DataOpts& dopts, const std::string& ckpt_path,
                 bool standardized) {
    const auto lc = open_checkpoint(ckpt_path);
    auto table = load_table(dopts, common.seed);
    if (lc.ckpt.scaler.has_value()) film::data::apply_scaler(*lc.ckpt.scaler, table);
    const auto need = lc.ckpt.config.input_length();
    if (table.rows() < need) {
        throw std::invalid_argument("forecast: series holds " + std::to_string(table.rows()) +
                                    " rows but the model needs " + std::to_string(need));
    }
    const Eigen::MatrixXd fc =
        film::model::film_forward(table.values.bottomRows(need), lc.ckpt.params, lc.ctx);
    const Eigen::MatrixXd out = (standardized || !lc.ckpt.scaler.has_value())
                                    ? fc
                                    : film::data::invert_scaler(*lc.ckpt.scaler, fc);
    std::printf("# step");
    for (const auto& name : table.column_names) std::printf(" %s", name.c_str());
    std::printf("\n");
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        std::printf("%lld", static_cast<long long>(i + 1));
        for (Eigen::Index c = 0; c < out.cols(); ++c) std::printf(" %.12g", out(i, c));
        std::printf("\n");
    }
    return 0;
}

int cmd_reconstruct(std::uint64_t seed, long length, long order, const std::string& kind) {
    Eigen::VectorXd x(length);
    if (kind == "lipschitz") {
        x = film::data::gen_lipschitz(1.0, length, seed);
    } else {
        for (Eigen::Index t = 0; t < length; ++t) {
            const double u = 2.0 * std::numbers::pi * static_cast<double>(t + 1) /
                             static_cast<double>(length);
            x(t) = kind == "sine" ? std::sin(u) : std::sin(u) + 0.5 * std::cos(3.0 * u);
        }
    }
    const auto disc = film::legendre::discretize_bilinear(film::legendre::build_transition(order),
                                                          1.0 / static_cast<double>(length));
    const Eigen::MatrixXd coeffs = film::legendre::project(x, disc);
    const Eigen::MatrixXd eval = film::legendre::build_eval_matrix(length, order);
    const Eigen::VectorXd rec =
        film::legendre::reconstruct(coeffs.row(length - 1).transpose(), eval, length);
    emit("signal", kind);
    emit("length", static_cast<long long>(length));
    emit("order", static_cast<long long>(order));
    emit("roundtrip_rel_error", (rec - x).norm() / x.norm());
    return 0;
}

int cmd_verify(std::uint64_t seed, const std::string& suite, long trials, double sigma) {
    std::vector<film::verify::VerifyReport> reports;
    if (suite == "legendre-rate" || suite == "all") {
        reports.push_back(film::verify::approximation_rate({16, 32, 64, 128}, 1024, 10, seed));
    }
    if (suite == "noise-growth" || suite == "all") {
        reports.push_back(
            film::verify::noise_accumulation({16, 64, 256, 1024}, trials, 4, sigma, seed));
    }
    if (suite == "mode-projection" || suite == "all") {
        reports.push_back(film::verify::projection_bound(64, 64, 16, 1e-3, 1.0, 5, seed));
    }
    if (reports.empty()) {
        throw std::invalid_argument("verify: unknown suite '" + suite + "'");
    }
    bool all_pass = true;
    for (const auto& r : reports) {
        std::printf("[%s] %s measured=%.6g expected=%.6g (%s)\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.expected, r.detail.c_str());
        std::printf("%s_measured=%.12g\n%s_pass=%d\n", r.name.c_str(), r.measured, r.name.c_str(),
                    r.pass ? 1 : 0);
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

std::vector<double> read_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw film::DataError("ks-test: cannot open " + path);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (out.empty()) throw film::DataError("ks-test: no numbers in " + path);
    return out;
}

int cmd_ks_test(const CommonOpts& common, const DataOpts& dopts, const std::string& ckpt_path,
                const std::string& sample_a, const std::string& sample_b, double alpha) {
    film::stats::KSResult result;
    if (!sample_a.empty() && !sample_b.empty()) {
        result =
            film::stats::ks_test(read_sample_file(sample_a), read_sample_file(sample_b), alpha);
    } else if (!ckpt_path.empty()) {
        // pooled input-window values against pooled forecast values on the
        // test split
        const auto lc = open_checkpoint(ckpt_path);
        auto splits = split_with_scaler(dopts, common.seed, lc);
        const auto ws = film::data::windows(splits.test, lc.ckpt.config.input_length(),
                                            lc.ckpt.config.horizon, 1);
        const Eigen::MatrixXd preds =
            film::train::predict_windows(lc.ckpt.params, splits.test, ws, lc.ctx, 32);
        std::vector<double> inputs, forecasts;
        for (Eigen::Index i = 0; i < ws.count(); ++i) {
            const auto block = film::data::window_input(splits.test, ws, i);
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) inputs.push_back(block(r, c));
            }
        }
        forecasts.assign(preds.data(), preds.data() + preds.size());
        result = film::stats::ks_test(inputs, forecasts, alpha);
    } else {
        throw std::invalid_argument(
            "ks-test: pass --sample-a/--sample-b files or --checkpoint with data");
    }
    emit("ks_statistic", result.statistic);
    emit("ks_threshold", result.threshold);
    emit("alpha", result.alpha);
    emit("n", static_cast<long long>(result.n));
    emit("m", static_cast<long long>(result.m));
    emit("reject", static_cast<long long>(result.reject ? 1 : 0));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FiLM long-horizon forecaster: Legendre memory projection with "
                 "frequency-enhanced mixing"};
    app.require_subcommand(1);

    CommonOpts common;
    ModelOpts mopts;
    DataOpts dopts;
    film::train::TrainConfig tc;
    std::string out_path = "film.ckpt";
    std::string ckpt_path;
    std::string which_split = "test";
    std::string suite = "all";
    std::string sample_a, sample_b, signal_kind = "mix";
    long rec_length = 1024, rec_order = 128, trials = 200;
    double alpha = 0.01, sigma = 0.1;
    bool standardized = false;

    try {
        apply_config_file(argc, argv, common, mopts, dopts, tc, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "key=value config file");
        cmd->add_option("--seed", common.seed, "run seed");
    };
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--horizon", mopts.horizon, "prediction length");
        cmd->add_option("--factors", mopts.factors, "multiscale factors, comma separated");
        cmd->add_option("--order", mopts.order, "Legendre polynomial count");
        cmd->add_option("--modes", mopts.modes, "frequency mode count");
        cmd->add_option("--mode-policy", mopts.policy, "lowest | random | low_random");
        cmd->add_option("--rank", mopts.rank, "low-rank K, 0 = full weights");
        cmd->add_flag("--revin", mopts.revin, "enable instance normalization");
        cmd->add_option("--eps-norm", mopts.eps_norm, "normalization epsilon");
    };
    auto add_data = [&](CLI::App* cmd) {
        cmd->add_option("--data", dopts.data_path, "input CSV (timestamp + numeric columns)");
        cmd->add_option("--target-col", dopts.target_col, "restrict to one column");
        cmd->add_flag("--synthetic", dopts.synthetic, "generate a seasonal series instead");
        cmd->add_option("--syn-length", dopts.syn_length, "synthetic series length");
        cmd->add_option("--syn-periods", dopts.syn_periods, "synthetic periods");
        cmd->add_option("--syn-amps", dopts.syn_amps, "synthetic amplitudes");
        cmd->add_option("--syn-slope", dopts.syn_slope, "synthetic trend slope");
        cmd->add_option("--syn-noise", dopts.syn_noise, "synthetic noise sigma");
        cmd->add_option("--split-train", dopts.split_train, "train ratio");
        cmd->add_option("--split-val", dopts.split_val, "validation ratio");
        cmd->add_option("--split-test", dopts.split_test, "test ratio");
    };

    CLI::App* train = app.add_subcommand("train", "fit a model and save the checkpoint");
    add_common(train);
    add_model(train);
    add_data(train);
    train->add_option("--lr", tc.learning_rate, "Adam learning rate");
    train->add_option("--batch", tc.batch_size, "mini-batch size");
    train->add_option("--epochs", tc.epochs, "epoch count (no early stopping)");
    train->add_option("--out", out_path, "checkpoint output path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "metrics on a dataset split");
    add_common(evaluate);
    add_data(evaluate);
    evaluate->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
    evaluate->add_option("--split", which_split, "train | val | test");

    CLI::App* forecast = app.add_subcommand("forecast", "forecast from the end of a series");
    add_common(forecast);
    add_data(forecast);
    forecast->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
    forecast->add_flag("--standardized", standardized, "emit on the standardized scale");

    CLI::App* reconstruct =
        app.add_subcommand("reconstruct", "projection round-trip demonstration");
    add_common(reconstruct);
    reconstruct->add_option("--length", rec_length, "signal length");
    reconstruct->add_option("--order", rec_order, "Legendre polynomial count");
    reconstruct->add_option("--signal", signal_kind, "mix | sine | lipschitz");

    CLI::App* verify = app.add_subcommand("verify", "empirical approximation checks");
    add_common(verify);
    verify->add_option("--suite", suite, "legendre-rate | noise-growth | mode-projection | all");
    verify->add_option("--trials", trials, "Monte Carlo trials");
    verify->add_option("--sigma", sigma, "noise level for the growth check");

    CLI::App* kstest = app.add_subcommand("ks-test", "two-sample distribution check");
    add_common(kstest);
    add_data(kstest);
    kstest->add_option("--checkpoint", ckpt_path, "compare input windows vs forecasts");
    kstest->add_option("--sample-a", sample_a, "file of numbers, one per line");
    kstest->add_option("--sample-b", sample_b, "file of numbers, one per line");
    kstest->add_option("--alpha", alpha, "significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(train)) return cmd_train(common, mopts, dopts, tc, out_path);
        if (app.got_subcommand(evaluate))
            return cmd_evaluate(common, dopts, ckpt_path, which_split);
        if (app.got_subcommand(forecast))
            return cmd_forecast(common, dopts, ckpt_path, standardized);
        if (app.got_subcommand(reconstruct))
            return cmd_reconstruct(common.seed, rec_length, rec_order, signal_kind);
        if (app.got_subcommand(verify)) return cmd_verify(common.seed, suite, trials, sigma);
        if (app.got_subcommand(kstest))
            return cmd_ks_test(common, dopts, ckpt_path, sample_a, sample_b, alpha);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
