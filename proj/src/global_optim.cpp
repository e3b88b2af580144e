#include "debyefit/global_optim.hpp"

#include "debyefit/errors.hpp"
#include "debyefit/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace debyefit::optim {

namespace {

// Counts evaluations and keeps the best point seen.
class Tracker {
public:
    explicit Tracker(const Objective& objective) : objective_(objective) {}

    double operator()(std::span<const double> x)
    {
        ++evaluations_;
        double v = objective_(x);
        if (std::isnan(v)) {
            v = std::numeric_limits<double>::infinity();
        }
        if (best_point_.empty() || v < best_cost_) {
            best_cost_ = v;
            best_point_.assign(x.begin(), x.end());
        }
        return v;
    }

    double best_cost() const noexcept { return best_cost_; }
    const std::vector<double>& best_point() const noexcept { return best_point_; }
    std::size_t evaluations() const noexcept { return evaluations_; }

    void record(std::size_t iteration) { trace_.push_back({iteration, best_cost_}); }

    // Also tracks the population's mean (personal-)best cost for stall detection.
    void record(std::size_t iteration, std::span<const double> population_costs)
    {
        record(iteration);
        double sum = 0.0;
        for (double c : population_costs) {
            sum += c;
        }
        population_mean_.push_back(sum / static_cast<double>(population_costs.size()));
    }

    // True when neither the incumbent nor the population mean improved by more
    // than `tol` (relative) over the last `window` records.
    bool stalled(std::size_t window, double tol) const
    {
        if (window == 0 || trace_.size() <= window || population_mean_.size() <= window) {
            return false;
        }
        auto flat = [&](double before, double now) {
            if (!std::isfinite(before)) {
                return false;
            }
            const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
            return (before - now) < tol * scale;
        };
        const std::size_t t = trace_.size() - 1;
        const std::size_t p = population_mean_.size() - 1;
        return flat(trace_[t - window].best_cost, trace_[t].best_cost) &&
               flat(population_mean_[p - window], population_mean_[p]);
    }

    OptimizeResult finish() &&
    {
        OptimizeResult r;
        r.best_point = std::move(best_point_);
        r.best_cost = best_cost_;
        r.trace = std::move(trace_);
        r.evaluations = evaluations_;
        return r;
    }

private:
    const Objective& objective_;
    std::vector<double> best_point_;
    double best_cost_ = std::numeric_limits<double>::infinity();
    std::vector<TracePoint> trace_;
    std::vector<double> population_mean_;
    std::size_t evaluations_ = 0;
};

void check_settings(const Bounds& bounds, const OptimizerSettings& s)
{
    if (bounds.dim() == 0) {
        throw ConfigError("search space must have at least one dimension");
    }
    if (s.max_iterations < 1) {
        throw ConfigError("max_iterations must be >= 1");
    }
    if (s.algorithm != Algorithm::DA && s.population < 5) {
        throw ConfigError("population must be >= 5");
    }
    if (!(s.tolerance >= 0.0)) {
        throw ConfigError("tolerance must be nonnegative");
    }
}

std::vector<double> random_point(const Bounds& b, CounterRng& rng)
{
    std::vector<double> x(b.dim());
    for (std::size_t d = 0; d < b.dim(); ++d) {
        x[d] = rng.uniform(b.lower()[d], b.upper()[d]);
    }
    return x;
}

} // namespace

Algorithm parse_algorithm(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "pso") {
        return Algorithm::PSO;
    }
    if (lower == "de") {
        return Algorithm::DE;
    }
    if (lower == "da") {
        return Algorithm::DA;
    }
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected pso, de or da)");
}

std::string_view to_string(Algorithm algorithm)
{
    switch (algorithm) {
    case Algorithm::PSO:
        return "pso";
    case Algorithm::DE:
        return "de";
    case Algorithm::DA:
        return "da";
    }
    return "unknown";
}

Bounds::Bounds(std::vector<double> lower, std::vector<double> upper) : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.size() != upper_.size()) {
        throw InvalidArgument("bounds: lower and upper differ in dimension");
    }
    for (std::size_t d = 0; d < lower_.size(); ++d) {
        if (!(std::isfinite(lower_[d]) && std::isfinite(upper_[d]) && lower_[d] < upper_[d])) {
            throw InvalidArgument("bounds: need finite lower < upper in every dimension");
        }
    }
}

bool Bounds::contains(std::span<const double> x) const noexcept
{
    if (x.size() != dim()) {
        return false;
    }
    for (std::size_t d = 0; d < dim(); ++d) {
        if (!(x[d] >= lower_[d] && x[d] <= upper_[d])) {
            return false;
        }
    }
    return true;
}

OptimizerSettings OptimizerSettings::defaults(Algorithm algorithm, std::uint64_t seed)
{
    OptimizerSettings s;
    s.algorithm = algorithm;
    s.seed = seed;
    switch (algorithm) {
    case Algorithm::PSO:
        s.population = 40;
        s.max_iterations = 100;
        break;
    case Algorithm::DE:
        s.population = 50;
        s.max_iterations = 200;
        break;
    case Algorithm::DA:
        s.max_iterations = 1000;
        break;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Particle swarm: global-best topology, linearly decaying inertia.
// ---------------------------------------------------------------------------
OptimizeResult pso_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings)
{
    check_settings(bounds, settings);
    const std::size_t dim = bounds.dim();
    const std::size_t n = settings.population;
    const auto& k = settings.pso;
    CounterRng rng(settings.seed);
    Tracker f(objective);

    std::vector<std::vector<double>> x(n), v(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = random_point(bounds, rng);
        for (std::size_t d = 0; d < dim; ++d) {
            const double w = bounds.width(d);
            v[i][d] = rng.uniform(-w, w);
        }
    }
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) {
        cost[i] = f(x[i]);
    }
    auto pbest = x;
    auto pbest_cost = cost;
    std::size_t g = static_cast<std::size_t>(std::min_element(pbest_cost.begin(), pbest_cost.end()) - pbest_cost.begin());
    f.record(0, pbest_cost);

    for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
        const double frac = settings.max_iterations > 1
                                ? static_cast<double>(it - 1) / static_cast<double>(settings.max_iterations - 1)
                                : 0.0;
        const double inertia = k.inertia_start + (k.inertia_end - k.inertia_start) * frac;
        const std::vector<double> gbest = pbest[g];

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                const double vmax = bounds.width(d);
                double vel = inertia * v[i][d] + k.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                             k.social * r2 * (gbest[d] - x[i][d]);
                vel = std::clamp(vel, -vmax, vmax);
                double pos = x[i][d] + vel;
                if (pos < bounds.lower()[d]) {
                    pos = bounds.lower()[d];
                    vel = 0.0;
                } else if (pos > bounds.upper()[d]) {
                    pos = bounds.upper()[d];
                    vel = 0.0;
                }
                x[i][d] = pos;
                v[i][d] = vel;
            }
        }
        // Positions are fixed before evaluation, so this loop is the
        // generation barrier and can be parallelized freely.
        for (std::size_t i = 0; i < n; ++i) {
            cost[i] = f(x[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (cost[i] < pbest_cost[i]) {
                pbest_cost[i] = cost[i];
                pbest[i] = x[i];
                if (cost[i] < pbest_cost[g]) {
                    g = i;
                }
            }
        }
        f.record(it, pbest_cost);
        if (f.stalled(settings.stall_window, settings.tolerance)) {
            break;
        }
    }
    return std::move(f).finish();
}

// ---------------------------------------------------------------------------
// Differential evolution, DE/rand/1/bin.
// ---------------------------------------------------------------------------
OptimizeResult de_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings)
{
    check_settings(bounds, settings);
    const std::size_t dim = bounds.dim();
    const std::size_t n = settings.population;
    const double scale = settings.de.differential_weight;
    const double cr = settings.de.crossover_rate;
    CounterRng rng(settings.seed);
    Tracker f(objective);

    std::vector<std::vector<double>> pop(n);
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i) {
        pop[i] = random_point(bounds, rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
        cost[i] = f(pop[i]);
    }
    f.record(0, cost);

    std::vector<std::vector<double>> trial(n, std::vector<double>(dim));
    std::vector<double> trial_cost(n);
    for (std::size_t gen = 1; gen <= settings.max_iterations; ++gen) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a, b, c;
            do {
                a = rng.below(n);
            } while (a == i);
            do {
                b = rng.below(n);
            } while (b == i || b == a);
            do {
                c = rng.below(n);
            } while (c == i || c == a || c == b);
            const std::size_t forced = rng.below(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                if (d == forced || rng.uniform() < cr) {
                    double m = pop[a][d] + scale * (pop[b][d] - pop[c][d]);
                    if (m < bounds.lower()[d] || m > bounds.upper()[d]) {
                        m = rng.uniform(bounds.lower()[d], bounds.upper()[d]);
                    }
                    trial[i][d] = m;
                } else {
                    trial[i][d] = pop[i][d];
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            trial_cost[i] = f(trial[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (trial_cost[i] <= cost[i]) {
                pop[i] = trial[i];
                cost[i] = trial_cost[i];
            }
        }
        f.record(gen, cost);
        if (f.stalled(settings.stall_window, settings.tolerance)) {
            break;
        }
    }
    return std::move(f).finish();
}

// ---------------------------------------------------------------------------
// Dual annealing: generalized (Tsallis) simulated annealing plus periodic
// coordinate-wise golden-section refinement of the incumbent.
// ---------------------------------------------------------------------------
namespace {

constexpr double kTailLimit = 1e8;
constexpr double kMinVisitBound = 1e-10;

class VisitingDistribution {
public:
    explicit VisitingDistribution(double qv) : qv_(qv)
    {
        const double factor2 = std::exp((4.0 - qv) * std::log(qv - 1.0));
        const double factor3 = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
        factor4_p_ = std::sqrt(std::numbers::pi) * factor2 / (factor3 * (3.0 - qv));
        const double factor5 = 1.0 / (qv - 1.0) - 0.5;
        const double d1 = 2.0 - factor5;
        factor6_ = std::numbers::pi * (1.0 - factor5) / std::sin(std::numbers::pi * (1.0 - factor5)) /
                   std::exp(std::lgamma(d1));
    }

    double draw(double temperature, CounterRng& rng) const
    {
        double x = rng.normal();
        const double y = rng.normal();
        const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
        const double factor4 = factor4_p_ * factor1;
        x *= std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
        const double den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
        double step = x / den;
        if (!std::isfinite(step) || step > kTailLimit) {
            step = (std::signbit(step) ? -kTailLimit : kTailLimit) * rng.uniform();
        } else if (step < -kTailLimit) {
            step = -kTailLimit * rng.uniform();
        }
        return step;
    }

private:
    double qv_;
    double factor4_p_ = 0.0;
    double factor6_ = 0.0;
};

double wrap_into(double value, double lo, double hi)
{
    const double width = hi - lo;
    const double a = value - lo;
    const double b = std::fmod(a, width) + width;
    double wrapped = std::fmod(b, width) + lo;
    if (std::abs(wrapped - lo) < kMinVisitBound) {
        wrapped += kMinVisitBound;
    }
    return std::clamp(wrapped, lo, hi);
}

// Golden-section line search along coordinate d within [lo, hi]; returns the
// best abscissa found and its value.
std::pair<double, double> golden_section(Tracker& f, std::vector<double> x, std::size_t d, double lo, double hi)
{
    constexpr double kInvPhi = 0.6180339887498949;
    constexpr int kIterations = 30;
    auto at = [&](double t) {
        x[d] = t;
        return f(x);
    };
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double e = a + kInvPhi * (b - a);
    double fc = at(c), fe = at(e);
    for (int i = 0; i < kIterations; ++i) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - kInvPhi * (b - a);
            fc = at(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + kInvPhi * (b - a);
            fe = at(e);
        }
    }
    return fc < fe ? std::pair{c, fc} : std::pair{e, fe};
}

// Coordinate descent around x with shrinking brackets; x/fx updated in place.
void refine(Tracker& f, const Bounds& bounds, std::vector<double>& x, double& fx, double tolerance)
{
    constexpr int kPasses = 8;
    constexpr double kInitialFraction = 0.1;
    for (int pass = 0; pass < kPasses; ++pass) {
        const double before = fx;
        const double fraction = kInitialFraction * std::ldexp(1.0, -pass);
        for (std::size_t d = 0; d < bounds.dim(); ++d) {
            const double h = fraction * bounds.width(d);
            const double lo = std::max(bounds.lower()[d], x[d] - h);
            const double hi = std::min(bounds.upper()[d], x[d] + h);
            if (!(lo < hi)) {
                continue;
            }
            const auto [t, ft] = golden_section(f, x, d, lo, hi);
            if (ft < fx) {
                x[d] = t;
                fx = ft;
            }
        }
        if (pass > 0 && before - fx <= tolerance * std::max(std::abs(before), std::numeric_limits<double>::min())) {
            break;
        }
    }
}

} // namespace

OptimizeResult da_minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings)
{
    check_settings(bounds, settings);
    const auto& k = settings.da;
    if (!(k.visiting > 1.0 && k.visiting < 3.0)) {
        throw ConfigError("dual annealing visiting parameter must lie in (1, 3)");
    }
    if (!(k.initial_temperature > 0.0)) {
        throw ConfigError("dual annealing initial temperature must be positive");
    }
    const std::size_t dim = bounds.dim();
    const double qv = k.visiting;
    const double qa = k.acceptance;
    const double restart_temperature = k.initial_temperature * k.restart_temperature_ratio;
    const VisitingDistribution visit(qv);
    CounterRng rng(settings.seed);
    Tracker f(objective);

    std::vector<double> current = random_point(bounds, rng);
    double current_cost = f(current);
    f.record(0);

    const double t1 = std::exp((qv - 1.0) * std::log(2.0)) - 1.0;
    std::size_t schedule_step = 0;
    std::vector<double> candidate(dim);
    for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
        const double s = static_cast<double>(schedule_step) + 2.0;
        const double t2 = std::exp((qv - 1.0) * std::log(s)) - 1.0;
        double temperature = k.initial_temperature * t1 / t2;
        if (temperature < restart_temperature) {
            // Re-anneal from a fresh random point.
            schedule_step = 0;
            temperature = k.initial_temperature;
            current = random_point(bounds, rng);
            current_cost = f(current);
        }
        const double temperature_step = temperature / static_cast<double>(schedule_step + 1);

        for (std::size_t j = 0; j < 2 * dim; ++j) {
            candidate = current;
            if (j < dim) {
                for (std::size_t d = 0; d < dim; ++d) {
                    candidate[d] = wrap_into(current[d] + visit.draw(temperature, rng), bounds.lower()[d], bounds.upper()[d]);
                }
            } else {
                const std::size_t d = j - dim;
                candidate[d] = wrap_into(current[d] + visit.draw(temperature, rng), bounds.lower()[d], bounds.upper()[d]);
            }
            const double candidate_cost = f(candidate);
            bool accept = candidate_cost < current_cost;
            if (!accept) {
                const double r = rng.uniform();
                const double pqv_temp = 1.0 - (qa - 1.0) * (candidate_cost - current_cost) / temperature_step;
                const double pqv = pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - qa));
                accept = r <= pqv;
            }
            if (accept) {
                current = candidate;
                current_cost = candidate_cost;
            }
        }

        if (k.local_search_interval > 0 && it % k.local_search_interval == 0) {
            // Refine the incumbent best and continue the chain from there.
            std::vector<double> x = f.best_point();
            double fx = f.best_cost();
            refine(f, bounds, x, fx, settings.tolerance);
            current = std::move(x);
            current_cost = fx;
        }
        ++schedule_step;
        f.record(it);
    }
    return std::move(f).finish();
}

OptimizeResult minimize(const Objective& objective, const Bounds& bounds, const OptimizerSettings& settings)
{
    switch (settings.algorithm) {
    case Algorithm::PSO:
        return pso_minimize(objective, bounds, settings);
    case Algorithm::DE:
        return de_minimize(objective, bounds, settings);
    case Algorithm::DA:
        return da_minimize(objective, bounds, settings);
    }
    throw ConfigError("unknown optimizer algorithm tag");
}

} // namespace debyefit::optim
