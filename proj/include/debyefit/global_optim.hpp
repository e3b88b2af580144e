#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace debyefit::optim {

enum class Algorithm { PSO, DE, DA };

/// "pso" / "de" / "da" (case-insensitive); throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);

/// Axis-aligned search box.
class Bounds {
public:
    /// Throws InvalidArgument unless the sizes match and lower[d] < upper[d].
    Bounds(std::vector<double> lower, std::vector<double> upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> upper() const noexcept { return upper_; }
    double width(std::size_t d) const noexcept { return upper_[d] - lower_[d]; }
    bool contains(std::span<const double> x) const noexcept;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

struct PsoConstants {
    double inertia_start = 0.9;
    double inertia_end = 0.4;
    double cognitive = 1.49;
    double social = 1.49;
};

struct DeConstants {
    double differential_weight = 0.8; ///< F
    double crossover_rate = 0.9;      ///< CR
};

struct DaConstants {
    double visiting = 2.62;       ///< q_v, in (1, 3)
    double acceptance = -5.0;     ///< q_a
    double initial_temperature = 5230.0;
    double restart_temperature_ratio = 2e-5;
    std::size_t local_search_interval = 50; ///< annealing steps between refinements
};

struct OptimizerSettings {
    Algorithm algorithm = Algorithm::PSO;
    std::size_t max_iterations = 100;
    std::size_t population = 40; ///< swarm / population size; DA ignores it
    std::uint64_t seed = 0;
    /// PSO/DE stop early once both the best cost and the population's mean
    /// best cost improved by less than this (relative) over the last
    /// `stall_window` iterations. DA runs to max_iterations.
    double tolerance = 1e-8;
    std::size_t stall_window = 15;
    PsoConstants pso;
    DeConstants de;
    DaConstants da;

    /// Canonical literature defaults for the chosen algorithm
    /// (PSO 40 × 100, DE 50 × 200, DA 1000 steps).
    static OptimizerSettings defaults(Algorithm algorithm, std::uint64_t seed = 0);
};

/// (iteration, best cost so far)
struct TracePoint {
    std::size_t iteration = 0;
    double best_cost = 0.0;

    friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct OptimizeResult {
    std::vector<double> best_point;
    double best_cost = 0.0;
    std::vector<TracePoint> trace;
    std::size_t evaluations = 0;

    friend bool operator==(const OptimizeResult&, const OptimizeResult&) = default;
};

/// The objective must be finite on every in-bounds point.
using Objective = std::function<double(std::span<const double>)>;

OptimizeResult pso_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings);
OptimizeResult de_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings);
OptimizeResult da_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings);

/// Dispatch on settings.algorithm.
OptimizeResult minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings);

} // namespace debyefit::optim
