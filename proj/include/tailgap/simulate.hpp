#pragma once

// Seeded Monte Carlo engine for payoff streams. Each path draws from its own
// keyed random stream, every payoff in the config is accumulated along the same
// draws under an optional absorbing barrier, and aggregates are merged in a
// fixed block order so results do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tailgap/distributions.hpp"
#include "tailgap/errors.hpp"
#include "tailgap/payoffs.hpp"
#include "tailgap/random.hpp"
#include "tailgap/scoring.hpp"

namespace tailgap {

/// Pairwise (cascade) summation; fixed association order for a given length.
template <class Range>
double pairwise_sum(const Range& values) {
    const std::span<const double> v(std::data(values), std::size(values));
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct SimulationConfig {
    /// Draw source for generated paths. Ignored when `streams` is non-empty.
    std::optional<DistributionSpec> generator;
    /// Replay mode: one fixed sequence of x values per path.
    std::vector<std::vector<double>> streams;
    std::vector<PayoffFunction> payoffs;
    std::vector<std::string> payoff_ids;
    std::size_t horizon = 1;
    std::size_t paths = 1;
    std::uint64_t seed = 0;
    std::optional<SurvivalConfig> survival;
    /// Subtract the generator mean from every draw when it is finite.
    bool center = false;
    unsigned threads = 1;
    /// Keep every cumulative value for long-form export.
    bool record_paths = false;
};

struct PayoffStats {
    std::string id;
    // Final cumulative P/L across paths.
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    double absorption_frequency = 0.0;
    /// Unconditional per-draw payoff mean and standard deviation, barrier ignored.
    double ensemble_mean = 0.0;
    double ensemble_stddev = 0.0;
    std::vector<double> final_values;
    std::vector<bool> absorbed;
    /// Mean cumulative value across paths after each period.
    std::vector<double> per_period_mean;
    /// [path][period] cumulative values; filled only with record_paths.
    std::vector<std::vector<double>> traces;
};

struct SimulationResult {
    std::size_t paths = 0;
    std::size_t horizon = 0;
    std::vector<PayoffStats> payoffs;
    /// Mean |x| of the draws along each path.
    std::vector<double> path_mean_abs_draw;
    std::vector<std::string> warnings;
};

namespace detail {

inline constexpr std::size_t simulation_block = 64;

struct BlockAccumulator {
    std::vector<std::vector<double>> period_sums;  // [payoff][period]
};

inline double sample_stddev(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline void validate(const SimulationConfig& cfg) {
    if (cfg.payoffs.empty()) throw ValidationError("simulation: at least one payoff is required");
    if (!cfg.payoff_ids.empty() && cfg.payoff_ids.size() != cfg.payoffs.size()) {
        throw ValidationError("simulation: payoff_ids must match payoffs");
    }
    if (cfg.streams.empty()) {
        if (!cfg.generator) throw ValidationError("simulation: generator or streams required");
        if (cfg.horizon < 1) throw ValidationError("simulation: horizon must be >= 1");
        if (cfg.paths < 1) throw ValidationError("simulation: paths must be >= 1");
    } else {
        const std::size_t len = cfg.streams.front().size();
        if (len == 0) throw ValidationError("simulation: replay streams must be non-empty");
        for (const auto& s : cfg.streams) {
            if (s.size() != len) throw ValidationError("simulation: replay streams must share one length");
            for (double x : s) {
                if (!std::isfinite(x)) throw ValidationError("simulation: replay streams must be finite");
            }
        }
    }
}

inline SimulationResult run(const SimulationConfig& cfg) {
    validate(cfg);
    const bool replay = !cfg.streams.empty();
    const std::size_t paths = replay ? cfg.streams.size() : cfg.paths;
    const std::size_t horizon = replay ? cfg.streams.front().size() : cfg.horizon;
    const std::size_t n_payoffs = cfg.payoffs.size();
    const SurvivalConfig survival = cfg.survival.value_or(SurvivalConfig{});

    SimulationResult result;
    result.paths = paths;
    result.horizon = horizon;

    double shift = 0.0;
    if (!replay) {
        const auto& gen = *cfg.generator;
        if (cfg.center) {
            if (has_finite_mean(gen)) {
                shift = mean(gen);
            } else {
                result.warnings.push_back("generator mean is infinite; draws left uncentered");
            }
        }
        for (std::size_t j = 0; j < n_payoffs; ++j) {
            try {
                (void)expectation(cfg.payoffs[j], gen);
            } catch (const InfiniteMeanError&) {
                result.warnings.push_back("payoff " + std::to_string(j) +
                                          " has infinite expectation under the generator; empirical sums diverge");
            }
        }
    }

    std::vector<std::vector<double>> finals(n_payoffs, std::vector<double>(paths));
    std::vector<std::vector<char>> absorbed(n_payoffs, std::vector<char>(paths, 0));
    std::vector<std::vector<double>> draw_sums(n_payoffs, std::vector<double>(paths));
    std::vector<std::vector<double>> draw_sumsq(n_payoffs, std::vector<double>(paths));
    std::vector<double> mean_abs(paths);
    std::vector<std::vector<std::vector<double>>> traces;
    if (cfg.record_paths) {
        traces.assign(n_payoffs, std::vector<std::vector<double>>(paths, std::vector<double>(horizon)));
    }

    const std::size_t n_blocks = (paths + detail::simulation_block - 1) / detail::simulation_block;
    std::vector<detail::BlockAccumulator> blocks(n_blocks);

    auto run_block = [&](std::size_t block) {
        auto& acc = blocks[block];
        acc.period_sums.assign(n_payoffs, std::vector<double>(horizon, 0.0));
        std::vector<double> running(n_payoffs);
        std::vector<char> alive(n_payoffs);
        const std::size_t first = block * detail::simulation_block;
        const std::size_t last = std::min(paths, first + detail::simulation_block);
        for (std::size_t path = first; path < last; ++path) {
            RandomStream rng(cfg.seed, path);
            std::fill(running.begin(), running.end(), 0.0);
            std::fill(alive.begin(), alive.end(), 1);
            double abs_sum = 0.0;
            for (std::size_t t = 0; t < horizon; ++t) {
                const double x = replay ? cfg.streams[path][t] : draw(*cfg.generator, rng) - shift;
                abs_sum += std::abs(x);
                for (std::size_t j = 0; j < n_payoffs; ++j) {
                    const double g = cfg.payoffs[j](x);
                    draw_sums[j][path] += g;
                    draw_sumsq[j][path] += g * g;
                    if (alive[j] && !(running[j] > survival.b)) {
                        alive[j] = 0;
                        absorbed[j][path] = 1;
                    }
                    if (alive[j]) running[j] += g;
                    const double value = survival.initial + running[j];
                    acc.period_sums[j][t] += value;
                    if (cfg.record_paths) traces[j][path][t] = value;
                }
            }
            mean_abs[path] = abs_sum / static_cast<double>(horizon);
            for (std::size_t j = 0; j < n_payoffs; ++j) finals[j][path] = survival.initial + running[j];
        }
    };

    const unsigned workers = std::max(1U, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n_blocks)));
    if (workers == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < n_blocks; b = next++) run_block(b);
            });
        }
    }

    result.path_mean_abs_draw = std::move(mean_abs);
    const double draws = static_cast<double>(paths) * static_cast<double>(horizon);
    for (std::size_t j = 0; j < n_payoffs; ++j) {
        PayoffStats s;
        s.id = cfg.payoff_ids.empty() ? "payoff" + std::to_string(j) : cfg.payoff_ids[j];
        const auto& f = finals[j];
        s.mean = pairwise_sum(f) / static_cast<double>(paths);
        s.stddev = detail::sample_stddev(f, s.mean);
        const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
        s.min = *lo;
        s.max = *hi;
        std::size_t n_absorbed = 0;
        s.absorbed.resize(paths);
        for (std::size_t i = 0; i < paths; ++i) {
            s.absorbed[i] = absorbed[j][i] != 0;
            n_absorbed += absorbed[j][i] != 0 ? 1 : 0;
        }
        s.absorption_frequency = static_cast<double>(n_absorbed) / static_cast<double>(paths);
        s.ensemble_mean = pairwise_sum(draw_sums[j]) / draws;
        const double second = pairwise_sum(draw_sumsq[j]) / draws;
        s.ensemble_stddev = std::sqrt(std::max(0.0, second - s.ensemble_mean * s.ensemble_mean));
        s.final_values = f;
        s.per_period_mean.assign(horizon, 0.0);
        std::vector<double> column(n_blocks);
        for (std::size_t t = 0; t < horizon; ++t) {
            for (std::size_t b = 0; b < n_blocks; ++b) column[b] = blocks[b].period_sums[j][t];
            s.per_period_mean[t] = pairwise_sum(column) / static_cast<double>(paths);
        }
        if (cfg.record_paths) s.traces = std::move(traces[j]);
        result.payoffs.push_back(std::move(s));
    }
    return result;
}

struct EnsembleVsTime {
    double ensemble_mean = 0.0;           ///< one-period payoff averaged over all gamblers
    double ensemble_stderr = 0.0;
    double time_average_all = 0.0;        ///< P(T) / T averaged over every path, absorbed ones frozen
    double time_average_all_stderr = 0.0;
    double time_average_survivors = std::numeric_limits<double>::quiet_NaN();
    std::size_t survivors = 0;
};

/// Ensemble expectation against time averages for the first payoff in cfg.
inline EnsembleVsTime ensemble_vs_time(const SimulationConfig& cfg) {
    if (!cfg.survival) throw ValidationError("ensemble_vs_time: survival config required");
    const auto res = run(cfg);
    const auto& s = res.payoffs.front();
    const double T = static_cast<double>(res.horizon);
    const double initial = cfg.survival->initial;

    EnsembleVsTime out;
    out.ensemble_mean = s.ensemble_mean;
    out.ensemble_stderr = s.ensemble_stddev / std::sqrt(static_cast<double>(res.paths) * T);

    std::vector<double> averages(res.paths);
    std::vector<double> survivors;
    for (std::size_t i = 0; i < res.paths; ++i) {
        averages[i] = (s.final_values[i] - initial) / T;
        if (!s.absorbed[i]) survivors.push_back(averages[i]);
    }
    out.time_average_all = pairwise_sum(averages) / static_cast<double>(res.paths);
    out.time_average_all_stderr =
        detail::sample_stddev(averages, out.time_average_all) / std::sqrt(static_cast<double>(res.paths));
    out.survivors = survivors.size();
    if (!survivors.empty()) out.time_average_survivors = pairwise_sum(survivors) / static_cast<double>(survivors.size());
    return out;
}

/// A binary payoff at the p-exceedance threshold next to the linear payoff,
/// both on draws from `generator` (centered when its mean is finite).
inline SimulationConfig threshold_comparison_config(const DistributionSpec& generator, double p, std::size_t horizon,
                                                    std::size_t paths, std::uint64_t seed) {
    SimulationConfig cfg;
    cfg.generator = generator;
    cfg.center = has_finite_mean(generator);
    const double shift = cfg.center ? mean(generator) : 0.0;
    const double K = quantile_threshold(generator, p) - shift;
    cfg.payoffs = {single(Heaviside{K}), single(Linear{})};
    cfg.payoff_ids = {"binary", "linear"};
    cfg.horizon = horizon;
    cfg.paths = paths;
    cfg.seed = seed;
    return cfg;
}

}  // namespace tailgap
