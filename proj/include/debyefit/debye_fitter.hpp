#pragma once

#include "debyefit/dispersion_models.hpp"
#include "debyefit/global_optim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace debyefit {

inline constexpr int kAutoPoleCount = -1;
inline constexpr int kMaxPoles = 20;
/// The automatic pole loop accepts the first N whose summed error (percent) is below this.
inline constexpr double kAutoPoleTargetError = 5.0;
/// Denominator floor for pointwise relative errors.
inline constexpr double kRelativeErrorFloor = 1e-6;
/// Smallest weight a sign-flipped pole may carry.
inline constexpr double kWeightFloor = 1e-12;

struct DebyePole {
    double delta_eps = 0.0;
    double tau = 0.0; ///< seconds

    friend bool operator==(const DebyePole&, const DebyePole&) = default;
};

/// ε(ω) = ε∞ + Σ Δεₙ / (1 + jωτₙ)
struct DebyeExpansion {
    double eps_inf = 1.0;
    std::vector<DebyePole> poles;

    /// Sorts poles by descending τ.
    void canonicalize();

    friend bool operator==(const DebyeExpansion&, const DebyeExpansion&) = default;
};

/// Throws InvalidArgument unless 1 ≤ N ≤ 20 and every τ > 0.
void validate(const DebyeExpansion& expansion);

ComplexSpectrum eval_expansion(const DebyeExpansion& expansion, const FrequencyGrid& grid);

struct WeightSolveResult {
    double eps_inf = 1.0;
    std::vector<double> deltas; ///< strictly positive
    bool penalized = false;     ///< some raw weight came out negative
};

/// Linear least squares for (ε∞, Δε₁…Δε_N) given fixed relaxation times.
/// Real and loss parts contribute one row each per frequency; the normal
/// equations carry a relative ridge λ = 1e-10·tr(AᵀA)/(N+1). Negative weights
/// are sign-flipped, and ε∞ < 1 is clamped to 1 with the weights re-solved.
WeightSolveResult solve_weights_dls(std::span<const double> taus, const ComplexSpectrum& target);

/// Undamped, unconstrained least-squares weights (ε∞ first). No sign flip or
/// clamp; used to inspect raw solutions.
std::vector<double> solve_weights_unconstrained(std::span<const double> taus, const ComplexSpectrum& target);

/// Average pointwise relative errors in percent.
struct RelativeErrors {
    double real = 0.0;
    double imag = 0.0;
    double total() const noexcept { return real + imag; }
};

RelativeErrors relative_errors(const ComplexSpectrum& fitted, const ComplexSpectrum& target);

/// Fitting objective over log10(τ): weight solve, then summed relative error.
/// Always finite and nonnegative.
double cost(std::span<const double> log10_taus, const ComplexSpectrum& target);

/// log10(τ) box whose relaxation frequencies span [f_min/10, f_max·10].
optim::Bounds tau_search_bounds(double f_min_hz, double f_max_hz, std::size_t pole_count);

struct FitConfig {
    optim::Algorithm algorithm = optim::Algorithm::PSO;
    int pole_count = 5; ///< 1…20, or kAutoPoleCount
    double f_min_hz = 1e7;
    double f_max_hz = 1e11;
    std::size_t grid_points = 50;
    std::optional<std::uint64_t> seed; ///< drawn from system entropy when absent
    /// Replaces the algorithm defaults; `algorithm` and `seed` are taken from this config.
    std::optional<optim::OptimizerSettings> optimizer;
};

struct FitReport {
    DebyeExpansion expansion;
    double err_real = 0.0;  ///< percent
    double err_imag = 0.0;  ///< percent
    double err_total = 0.0; ///< percent
    double duration = 0.0;  ///< seconds
    std::vector<optim::TracePoint> convergence;
    std::uint64_t seed_used = 0;
};

/// Fits N = config.pole_count poles (or delegates to fit_auto_poles for -1).
FitReport fit(const RelaxationModel& model, const FitConfig& config);

/// Same as fit() for an already sampled target; config's band and grid size are ignored.
FitReport fit_spectrum(const ComplexSpectrum& target, const FitConfig& config);

/// Tries N = 1, 2, … (seed + N each time) until the summed error drops below
/// 5 % or N reaches 20; returns the last report. `duration` covers the whole loop.
FitReport fit_auto_poles(const RelaxationModel& model, const FitConfig& config);

/// `iteration,best_cost` rows.
void write_convergence_csv(const std::filesystem::path& path, std::span<const optim::TracePoint> trace);

} // namespace debyefit
