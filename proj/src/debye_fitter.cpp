#include "debyefit/debye_fitter.hpp"

#include "debyefit/errors.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace debyefit {

namespace {

using cplx = std::complex<double>;

constexpr double kRidgeScale = 1e-10;

// Rows 0..M-1 match ε', rows M..2M-1 match ε''. Column 0 is ε∞ (real rows only).
struct LinearSystem {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
};

LinearSystem build_system(std::span<const double> taus, const ComplexSpectrum& target)
{
    const auto m = static_cast<Eigen::Index>(target.size());
    const auto n = static_cast<Eigen::Index>(taus.size());
    LinearSystem sys{Eigen::MatrixXd::Zero(2 * m, n + 1), Eigen::VectorXd(2 * m)};
    const auto& grid = target.grid();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double w = grid[static_cast<std::size_t>(i)];
        sys.a(i, 0) = 1.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double wt = w * taus[static_cast<std::size_t>(k)];
            const double den = 1.0 + wt * wt;
            sys.a(i, k + 1) = 1.0 / den;
            sys.a(m + i, k + 1) = wt / den;
        }
        sys.b(i) = target.real(static_cast<std::size_t>(i));
        sys.b(m + i) = target.loss(static_cast<std::size_t>(i));
    }
    return sys;
}

Eigen::VectorXd solve_damped(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
    Eigen::MatrixXd normal = a.transpose() * a;
    const double lambda = kRidgeScale * normal.trace() / static_cast<double>(normal.rows());
    normal.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !(lambda > 0.0)) {
        throw std::logic_error("damped normal equations are singular");
    }
    return ldlt.solve(a.transpose() * b);
}

void check_taus(std::span<const double> taus, const ComplexSpectrum& target)
{
    if (taus.empty()) {
        throw InvalidArgument("weight solve needs at least one relaxation time");
    }
    if (taus.size() > target.size()) {
        throw InvalidArgument("more poles than frequency points");
    }
    for (double t : taus) {
        if (!(std::isfinite(t) && t > 0.0)) {
            throw InvalidArgument("relaxation times must be finite and positive");
        }
    }
}

double part_error(double fitted, double target)
{
    return std::abs(fitted - target) / std::max(std::abs(target), kRelativeErrorFloor);
}

optim::OptimizerSettings settings_for(const FitConfig& config, std::uint64_t seed)
{
    optim::OptimizerSettings s = config.optimizer ? *config.optimizer : optim::OptimizerSettings::defaults(config.algorithm);
    s.algorithm = config.algorithm;
    s.seed = seed;
    return s;
}

std::uint64_t resolve_seed(const FitConfig& config)
{
    if (config.seed) {
        return *config.seed;
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void check_pole_count(int n)
{
    if (n < 1 || n > kMaxPoles) {
        throw ConfigError(fmt::format("pole count must lie in [1, {}] or be {} (automatic), got {}", kMaxPoles, kAutoPoleCount, n));
    }
}

} // namespace

void DebyeExpansion::canonicalize()
{
    std::stable_sort(poles.begin(), poles.end(), [](const DebyePole& a, const DebyePole& b) { return a.tau > b.tau; });
}

void validate(const DebyeExpansion& expansion)
{
    if (expansion.poles.empty() || expansion.poles.size() > static_cast<std::size_t>(kMaxPoles)) {
        throw InvalidArgument("Debye expansion needs between 1 and 20 poles");
    }
    if (!std::isfinite(expansion.eps_inf)) {
        throw InvalidArgument("Debye expansion eps_inf must be finite");
    }
    for (const auto& p : expansion.poles) {
        if (!(std::isfinite(p.tau) && p.tau > 0.0) || !std::isfinite(p.delta_eps)) {
            throw InvalidArgument("Debye poles need finite weights and positive relaxation times");
        }
    }
}

ComplexSpectrum eval_expansion(const DebyeExpansion& expansion, const FrequencyGrid& grid)
{
    validate(expansion);
    std::vector<cplx> values(grid.size(), cplx(expansion.eps_inf, 0.0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto& p : expansion.poles) {
            values[i] += p.delta_eps / cplx(1.0, grid[i] * p.tau);
        }
    }
    return ComplexSpectrum(grid, std::move(values));
}

WeightSolveResult solve_weights_dls(std::span<const double> taus, const ComplexSpectrum& target)
{
    check_taus(taus, target);
    const auto sys = build_system(taus, target);
    Eigen::VectorXd x = solve_damped(sys.a, sys.b);

    WeightSolveResult result;
    result.eps_inf = x(0);
    Eigen::VectorXd deltas = x.tail(x.size() - 1);
    if (!(result.eps_inf >= 1.0)) {
        // Hold ε∞ at the physical floor and re-solve the pole weights.
        result.eps_inf = 1.0;
        const auto m = static_cast<Eigen::Index>(target.size());
        Eigen::VectorXd b = sys.b;
        b.head(m).array() -= 1.0;
        deltas = solve_damped(sys.a.rightCols(sys.a.cols() - 1), b);
    }

    result.deltas.resize(taus.size());
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const double d = deltas(static_cast<Eigen::Index>(k));
        if (d < 0.0) {
            result.penalized = true;
        }
        result.deltas[k] = std::max(std::abs(d), kWeightFloor);
    }
    return result;
}

std::vector<double> solve_weights_unconstrained(std::span<const double> taus, const ComplexSpectrum& target)
{
    check_taus(taus, target);
    const auto sys = build_system(taus, target);
    const Eigen::VectorXd x = sys.a.colPivHouseholderQr().solve(sys.b);
    return {x.data(), x.data() + x.size()};
}

RelativeErrors relative_errors(const ComplexSpectrum& fitted, const ComplexSpectrum& target)
{
    if (fitted.size() != target.size()) {
        throw InvalidArgument("spectra differ in length");
    }
    RelativeErrors e;
    for (std::size_t i = 0; i < target.size(); ++i) {
        e.real += part_error(fitted.real(i), target.real(i));
        e.imag += part_error(fitted.loss(i), target.loss(i));
    }
    const double scale = 100.0 / static_cast<double>(target.size());
    e.real *= scale;
    e.imag *= scale;
    return e;
}

double cost(std::span<const double> log10_taus, const ComplexSpectrum& target)
{
    constexpr double kWorst = std::numeric_limits<double>::max();
    try {
        DebyeExpansion expansion;
        std::vector<double> taus(log10_taus.size());
        for (std::size_t k = 0; k < taus.size(); ++k) {
            taus[k] = std::pow(10.0, log10_taus[k]);
        }
        const auto weights = solve_weights_dls(taus, target);
        expansion.eps_inf = weights.eps_inf;
        for (std::size_t k = 0; k < taus.size(); ++k) {
            expansion.poles.push_back({weights.deltas[k], taus[k]});
        }
        const double c = relative_errors(eval_expansion(expansion, target.grid()), target).total();
        return std::isfinite(c) ? c : kWorst;
    } catch (const std::exception&) {
        return kWorst;
    }
}

optim::Bounds tau_search_bounds(double f_min_hz, double f_max_hz, std::size_t pole_count)
{
    if (!(f_min_hz > 0.0 && f_min_hz < f_max_hz)) {
        throw InvalidArgument("tau search needs 0 < f_min < f_max");
    }
    // τ = 1/(2πf); the slowest pole relaxes a decade below the band, the fastest a decade above.
    const double lo = std::log10(1.0 / (2.0 * std::numbers::pi * f_max_hz * 10.0));
    const double hi = std::log10(1.0 / (2.0 * std::numbers::pi * f_min_hz / 10.0));
    return optim::Bounds(std::vector<double>(pole_count, lo), std::vector<double>(pole_count, hi));
}

FitReport fit_spectrum(const ComplexSpectrum& target, const FitConfig& config)
{
    check_pole_count(config.pole_count);
    const auto start = std::chrono::steady_clock::now();
    const auto n = static_cast<std::size_t>(config.pole_count);
    if (n > target.size()) {
        throw ConfigError("more poles than frequency points");
    }
    const auto freqs = target.grid().frequencies_hz();
    const auto bounds = tau_search_bounds(freqs.front(), freqs.back(), n);
    const std::uint64_t seed = resolve_seed(config);

    const auto result = optim::minimize([&](std::span<const double> x) { return cost(x, target); }, bounds,
                                        settings_for(config, seed));

    FitReport report;
    std::vector<double> taus(n);
    for (std::size_t k = 0; k < n; ++k) {
        taus[k] = std::pow(10.0, result.best_point[k]);
    }
    const auto weights = solve_weights_dls(taus, target);
    report.expansion.eps_inf = weights.eps_inf;
    for (std::size_t k = 0; k < n; ++k) {
        report.expansion.poles.push_back({weights.deltas[k], taus[k]});
    }
    report.expansion.canonicalize();

    const auto errors = relative_errors(eval_expansion(report.expansion, target.grid()), target);
    report.err_real = errors.real;
    report.err_imag = errors.imag;
    report.err_total = errors.total();
    report.convergence = result.trace;
    report.seed_used = seed;
    report.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

FitReport fit(const RelaxationModel& model, const FitConfig& config)
{
    if (config.pole_count == kAutoPoleCount) {
        return fit_auto_poles(model, config);
    }
    check_pole_count(config.pole_count);
    const auto grid = make_log_grid(config.f_min_hz, config.f_max_hz, config.grid_points);
    return fit_spectrum(evaluate(model, grid), config);
}

FitReport fit_auto_poles(const RelaxationModel& model, const FitConfig& config)
{
    if (config.pole_count != kAutoPoleCount) {
        throw ConfigError("automatic pole selection requires pole_count = -1");
    }
    const auto start = std::chrono::steady_clock::now();
    const auto grid = make_log_grid(config.f_min_hz, config.f_max_hz, config.grid_points);
    const auto target = evaluate(model, grid);
    const std::uint64_t base_seed = resolve_seed(config);

    FitReport report;
    const int max_poles = std::min(kMaxPoles, static_cast<int>(target.size()));
    for (int n = 1; n <= max_poles; ++n) {
        FitConfig step = config;
        step.pole_count = n;
        step.seed = base_seed + static_cast<std::uint64_t>(n);
        report = fit_spectrum(target, step);
        if (report.err_total < kAutoPoleTargetError) {
            break;
        }
    }
    report.seed_used = base_seed;
    report.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_convergence_csv(const std::filesystem::path& path, std::span<const optim::TracePoint> trace)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "iteration,best_cost\n";
    for (const auto& p : trace) {
        out << fmt::format("{},{:.10e}\n", p.iteration, p.best_cost);
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace debyefit
