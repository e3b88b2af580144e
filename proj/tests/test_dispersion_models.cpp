#include "debyefit/dispersion_models.hpp"
#include "debyefit/errors.hpp"
#include "debyefit/random.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace debyefit;
using cplx = std::complex<double>;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double rel_diff(cplx a, cplx b)
{
    return std::abs(a - b) / std::abs(b);
}

double max_rel_diff(const ComplexSpectrum& a, const ComplexSpectrum& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, rel_diff(a.values()[i], b.values()[i]));
    }
    return worst;
}

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("debyefit_" + name);
}

} // namespace

TEST_CASE("make_log_grid spans the band inclusively")
{
    const auto grid = make_log_grid(1e7, 1e11, 50);
    REQUIRE(grid.size() == 50);
    CHECK(grid[0] == doctest::Approx(kTwoPi * 1e7).epsilon(1e-15));
    CHECK(grid[49] == doctest::Approx(kTwoPi * 1e11).epsilon(1e-15));
    const double ratio = grid[1] / grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(grid[i] / grid[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
    }

    const auto three = make_log_grid(1e6, 1e8, 3);
    CHECK(three[1] == doctest::Approx(kTwoPi * 1e7).epsilon(1e-14));
}

TEST_CASE("make_log_grid rejects degenerate input")
{
    CHECK_THROWS_AS(make_log_grid(1.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(make_log_grid(2.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(make_log_grid(0.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(make_log_grid(-1.0, 1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(make_log_grid(1.0, 10.0, 1), InvalidArgument);
    CHECK_THROWS_AS(FrequencyGrid({1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(FrequencyGrid({1.0}), InvalidArgument);
}

TEST_CASE("Debye pole: half-height point, static limit and high-frequency tail")
{
    const double tau = 1e-10;
    const auto at_peak = eval_debye_pole(1.0, 14.0, tau, FrequencyGrid({1.0 / tau, 2.0 / tau}));
    CHECK(at_peak.real(0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(at_peak.loss(0) == doctest::Approx(7.0).epsilon(1e-14));

    const auto slow = eval_debye_pole(5.0, 3.0, 1e-9, FrequencyGrid({1e-3, 1e-2}));
    CHECK(slow.real(0) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(slow.loss(0) == doctest::Approx(0.0).epsilon(1e-10));

    // mpmath, 30 digits
    const auto fast = eval_debye_pole(5.0, 3.0, 1e-9, FrequencyGrid({kTwoPi * 1e12, kTwoPi * 2e12}));
    CHECK(fast.real(0) == doctest::Approx(5.000000075990885806881705).epsilon(1e-14));
    CHECK(fast.loss(0) == doctest::Approx(0.0004774648171813609012096766).epsilon(1e-12));

    CHECK_THROWS_AS(eval_debye_pole(1.0, 1.0, 0.0, at_peak.grid()), InvalidArgument);
    CHECK_THROWS_AS(eval_debye_pole(1.0, 1.0, -1e-9, at_peak.grid()), InvalidArgument);
}

TEST_CASE("Debye peak sits at the relaxation frequency and approaches half the strength")
{
    const double tau = 1e-10, delta = 14.0;
    double gap = 0.0;
    for (std::size_t n : {20u, 199u, 1999u}) {
        const auto grid = make_log_grid(1e7, 1e11, n);
        const auto s = eval_debye_pole(1.0, delta, tau, grid);
        std::size_t peak = 0, nearest = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.loss(i) > s.loss(peak)) {
                peak = i;
            }
            if (std::abs(std::log(grid[i] * tau)) < std::abs(std::log(grid[nearest] * tau))) {
                nearest = i;
            }
        }
        CHECK(peak == nearest);
        // Loss is (delta/2) sech(ln(omega tau)); the nearest sample is at most half a step away.
        const double half_step = 0.5 * std::log(grid[1] / grid[0]);
        gap = delta / 2.0 - s.loss(peak);
        CHECK(gap >= 0.0);
        CHECK(gap <= delta / 2.0 * (1.0 - 1.0 / std::cosh(half_step)) + 1e-14);
    }
    CHECK(gap < 1e-4);
}

TEST_CASE("Havriliak-Negami reduces to Debye for alpha = beta = 1")
{
    CounterRng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        HavriliakNegamiParams p;
        p.eps_inf = rng.uniform(1.0, 20.0);
        p.delta_eps = rng.uniform(0.1, 80.0);
        p.tau0 = std::pow(10.0, rng.uniform(-13.0, -6.0));
        const auto grid = make_log_grid(std::pow(10.0, rng.uniform(3, 7)), std::pow(10.0, rng.uniform(8, 12)), 50);
        const auto hn = eval_havriliak_negami(p, grid);
        const auto debye = eval_debye_pole(p.eps_inf, p.delta_eps, p.tau0, grid);
        CHECK(max_rel_diff(hn, debye) < 1e-12);
    }
}

TEST_CASE("Havriliak-Negami against a 30-digit oracle at omega = 1/tau0")
{
    const HavriliakNegamiParams p{2.7, 5.9, 9.4e-10, 0.91, 0.45};
    const auto s = eval_havriliak_negami(p, FrequencyGrid({1.0 / p.tau0, 2.0 / p.tau0}));
    CHECK(s.real(0) == doctest::Approx(7.349213846648136034290052).epsilon(1e-13));
    CHECK(s.loss(0) == doctest::Approx(1.549066391367855036993323).epsilon(1e-13));
}

TEST_CASE("Havriliak-Negami parameter validation")
{
    const auto grid = make_log_grid(1e7, 1e11, 10);
    HavriliakNegamiParams p{2.7, 5.9, 9.4e-10, 0.91, 0.45};
    p.alpha = 0.0;
    CHECK_THROWS_AS(eval_havriliak_negami(p, grid), InvalidArgument);
    p.alpha = 1.01;
    CHECK_THROWS_AS(eval_havriliak_negami(p, grid), InvalidArgument);
    p.alpha = 0.9;
    p.beta = 0.0;
    CHECK_THROWS_AS(eval_havriliak_negami(p, grid), InvalidArgument);
    p.beta = 0.5;
    p.eps_inf = 0.5;
    CHECK_THROWS_AS(eval_havriliak_negami(p, grid), InvalidArgument);
}

TEST_CASE("Cole-Cole and Cole-Davidson limits are continuous")
{
    const auto grid = make_log_grid(1e6, 1e12, 50);
    const HavriliakNegamiParams cole_cole{3.0, 20.0, 1e-9, 1.0, 1.0};
    auto near = cole_cole;
    near.alpha = 1.0 - 1e-9;
    CHECK(max_rel_diff(eval_havriliak_negami(near, grid), eval_havriliak_negami(cole_cole, grid)) < 1e-6);

    const HavriliakNegamiParams cole_davidson{3.0, 20.0, 1e-9, 1.0, 0.6};
    near = cole_davidson;
    near.alpha = 1.0 - 1e-9;
    CHECK(max_rel_diff(eval_havriliak_negami(near, grid), eval_havriliak_negami(cole_davidson, grid)) < 1e-6);

    const HavriliakNegamiParams cd{3.0, 20.0, 1e-9, 0.7, 1.0};
    near = cd;
    near.beta = 1.0 - 1e-9;
    CHECK(max_rel_diff(eval_havriliak_negami(near, grid), eval_havriliak_negami(cd, grid)) < 1e-6);
}

TEST_CASE("Havriliak-Negami asymptotes to eps_s and eps_inf")
{
    const HavriliakNegamiParams p{2.7, 5.9, 9.4e-10, 0.91, 0.45};
    const double w_min = kTwoPi * 1e7, w_max = kTwoPi * 1e11;
    const auto s = eval_havriliak_negami(p, FrequencyGrid({w_min * 1e-6, w_max * 1e6}));
    CHECK(std::abs(s.values()[1] - cplx(p.eps_inf, 0.0)) < 1e-3 * p.delta_eps);
    CHECK(std::abs(s.values()[0] - cplx(p.eps_inf + p.delta_eps, 0.0)) < 1e-3 * p.delta_eps);
}

TEST_CASE("Loss is nonnegative for passive Debye, HN and CRIM media")
{
    CounterRng rng(5);
    const auto grid = make_log_grid(1e5, 1e13, 80);
    for (int trial = 0; trial < 100; ++trial) {
        const HavriliakNegamiParams hn{rng.uniform(1, 10), rng.uniform(0.1, 50), std::pow(10.0, rng.uniform(-12, -7)),
                                       rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
        const auto s = eval_havriliak_negami(hn, grid);
        CrimParams crim;
        crim.shape_a = rng.uniform(0.2, 1.0);
        const double f = rng.uniform(0.05, 0.95);
        crim.components = {{f, {rng.uniform(1, 10), rng.uniform(0.1, 80), std::pow(10.0, rng.uniform(-12, -7))}},
                           {1.0 - f, {rng.uniform(1, 10), rng.uniform(0.1, 80), std::pow(10.0, rng.uniform(-12, -7))}}};
        const auto c = eval_crim(crim, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(s.loss(i) >= 0.0);
            CHECK(c.loss(i) >= 0.0);
        }
    }
}

TEST_CASE("Jonscher special values")
{
    const double wp = kTwoPi * 1e9;
    const auto grid = make_log_grid(1e6, 1e12, 50);

    const auto flat = eval_jonscher({4.0, 2.5, wp, 0.0}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(flat.values()[i] - cplx(6.5, 0.0)) <= 1e-12 * 6.5);
        CHECK(flat.loss(i) == 0.0);
    }

    const FrequencyGrid at_ref({wp, 2 * wp});
    const auto linear = eval_jonscher({4.0, 2.5, wp, 1.0}, at_ref);
    CHECK(linear.real(0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(linear.loss(0) == doctest::Approx(2.5).epsilon(1e-14));

    const auto half = eval_jonscher({3.0, 2.0, wp, 0.5}, at_ref);
    CHECK(half.real(0) == doctest::Approx(3.0 + std::sqrt(2.0)).epsilon(1e-14));
    CHECK(half.loss(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(eval_jonscher({3.0, 2.0, wp, 1.5}, grid), InvalidArgument);
    CHECK_THROWS_AS(eval_jonscher({3.0, 2.0, wp, -0.1}, grid), InvalidArgument);
}

TEST_CASE("Jonscher loss is a monotone power law")
{
    const auto grid = make_log_grid(1e6, 1e12, 60);
    for (double n : {0.1, 0.5, 0.9}) {
        const auto s = eval_jonscher({3.0, 2.0, kTwoPi * 1e8, n}, grid);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            CHECK(s.loss(i) > s.loss(i - 1));
        }
    }
}

TEST_CASE("CRIM reductions and two-phase oracle")
{
    const auto grid = make_log_grid(1e7, 1e11, 50);
    const DebyePoleParams water{4.9, 75.1, 8.27e-12};
    const auto water_spectrum = eval_debye_pole(water.eps_inf, water.delta_eps, water.tau, grid);
    for (double a : {0.5, 0.33, 1.0, -0.5}) {
        CHECK(max_rel_diff(eval_crim({a, {{1.0, water}}}, grid), water_spectrum) < 1e-12);
        CHECK(max_rel_diff(eval_crim({a, {{0.5, water}, {0.5, water}}}, grid), water_spectrum) < 1e-12);
    }

    // mpmath, 30 digits
    const CrimParams mix{0.5, {{0.3, water}, {0.7, {4.0, 1.0, 1e-9}}}};
    const auto s = eval_crim(mix, FrequencyGrid({kTwoPi * 1e9, kTwoPi * 2e9}));
    CHECK(s.real(0) == doctest::Approx(16.68082506396048356013269).epsilon(1e-13));
    CHECK(s.loss(0) == doctest::Approx(0.7550118477844058690228956).epsilon(1e-13));

    CHECK_THROWS_AS(eval_crim({0.5, {{0.3, water}, {0.6, water}}}, grid), InvalidArgument);
    CHECK_THROWS_AS(eval_crim({0.0, {{1.0, water}}}, grid), InvalidArgument);
    CHECK_THROWS_AS(eval_crim({0.5, {}}, grid), InvalidArgument);
}

TEST_CASE("Raw data interpolation")
{
    SUBCASE("knots are reproduced")
    {
        const auto grid = make_log_grid(1e6, 1e9, 4);
        RawDataTable t;
        const auto f = grid.frequencies_hz();
        for (std::size_t i = 0; i < f.size(); ++i) {
            t.rows.push_back({f[i], 10.0 - static_cast<double>(i), 0.5 * static_cast<double>(i)});
        }
        const auto s = interp_raw_data(t, grid);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(s.real(i) == doctest::Approx(t.rows[i].eps_real).epsilon(1e-12));
            CHECK(s.loss(i) == doctest::Approx(t.rows[i].eps_imag).epsilon(1e-12));
        }
    }
    SUBCASE("geometric midpoint gives the arithmetic mean")
    {
        const RawDataTable t{{{1e6, 10.0, 2.0}, {1e8, 4.0, 6.0}}};
        const auto s = interp_raw_data(t, FrequencyGrid({kTwoPi * 1e6, kTwoPi * 1e7}));
        CHECK(s.real(1) == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(s.loss(1) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("dense sampling of a Debye pole tracks the analytic spectrum")
    {
        const auto coarse = make_log_grid(1e7, 1e11, 100);
        const auto pole = eval_debye_pole(3.0, 12.0, 2e-10, coarse);
        RawDataTable t;
        const auto f = coarse.frequencies_hz();
        for (std::size_t i = 0; i < f.size(); ++i) {
            t.rows.push_back({f[i], pole.real(i), pole.loss(i)});
        }
        const auto dense = make_log_grid(1e7, 1e11, 997);
        const auto interp = interp_raw_data(t, dense);
        const auto exact = eval_debye_pole(3.0, 12.0, 2e-10, dense);
        for (std::size_t i = 0; i < dense.size(); ++i) {
            CHECK(rel_diff(interp.values()[i], exact.values()[i]) < 1e-3);
        }
    }
    SUBCASE("no extrapolation")
    {
        const RawDataTable t{{{1e6, 10.0, 2.0}, {1e8, 4.0, 6.0}}};
        CHECK_THROWS_AS(interp_raw_data(t, make_log_grid(1e5, 1e8, 10)), OutOfRange);
        CHECK_THROWS_AS(interp_raw_data(t, make_log_grid(1e6, 1e9, 10)), OutOfRange);
        CHECK_NOTHROW(interp_raw_data(t, make_log_grid(1e6, 1e8, 10)));
    }
}

TEST_CASE("Raw data CSV reader")
{
    const auto path = temp_file("raw.csv");
    {
        std::ofstream out(path);
        out << "frequency_hz, eps_real, eps_imag\n1e6, 10, 2\n\n1e7,8,3\n1e8 6 4\n";
    }
    const auto t = read_raw_data_csv(path);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[1] == RawDataRow{1e7, 8.0, 3.0});
    CHECK(t.rows[2] == RawDataRow{1e8, 6.0, 4.0});

    {
        std::ofstream out(path);
        out << "1e6,10,2\n1e7,8\n";
    }
    CHECK_THROWS_AS(read_raw_data_csv(path), InvalidArgument);
    {
        std::ofstream out(path);
        out << "1e7,10,2\n1e6,8,1\n";
    }
    CHECK_THROWS_AS(read_raw_data_csv(path), InvalidArgument);
    CHECK_THROWS_AS(read_raw_data_csv(temp_file("does_not_exist.csv")), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("Single-pole spectrum CSV export")
{
    // εs = 15, ε∞ = 1, τ = 0.1 ns
    const auto s = eval_debye_pole(1.0, 14.0, 1e-10, make_log_grid(1e7, 1e12, 5));
    const auto path = temp_file("debye.csv");
    write_spectrum_csv(path, s);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "frequency_hz,eps_real,eps_imag");
    CHECK(first.starts_with("1.0000000000e+07,"));
    std::size_t lines = 2;
    for (std::string l; std::getline(in, l);) {
        ++lines;
    }
    CHECK(lines == 6);
    std::filesystem::remove(path);
}
