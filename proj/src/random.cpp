#include "debyefit/random.hpp"

#include <cmath>
#include <numbers>

namespace debyefit {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace

CounterRng::CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed + kGolden)) {}

CounterRng::result_type CounterRng::operator()() noexcept
{
    ++counter_;
    return mix64(key_ ^ mix64(counter_ * kGolden));
}

CounterRng CounterRng::split() noexcept
{
    return CounterRng((*this)());
}

double CounterRng::uniform() noexcept
{
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) noexcept
{
    const double u = lo + (hi - lo) * uniform();
    return u < hi ? u : lo;
}

std::size_t CounterRng::below(std::size_t n) noexcept
{
    // Rejection sampling removes the modulo bias.
    const auto bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t r = (*this)();
    while (r >= limit) {
        r = (*this)();
    }
    return static_cast<std::size_t>(r % bound);
}

double CounterRng::normal() noexcept
{
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace debyefit
