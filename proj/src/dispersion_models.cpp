#include "debyefit/dispersion_models.hpp"

#include "debyefit/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace debyefit {

namespace {

using cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// j^p = e^{jπp/2} scaled by x^p, for x > 0.
cplx j_power(double x, double p)
{
    return std::polar(std::pow(x, p), 0.5 * std::numbers::pi * p);
}

void require(bool ok, const char* what)
{
    if (!ok) {
        throw InvalidArgument(what);
    }
}

bool parse_double(std::string_view token, double& out)
{
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::string normalized = line;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::replace(normalized.begin(), normalized.end(), ';', ' ');
    std::istringstream in(normalized);
    std::vector<std::string> fields;
    for (std::string tok; in >> tok;) {
        fields.push_back(tok);
    }
    return fields;
}

} // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas))
{
    require(omegas_.size() >= 2, "frequency grid needs at least 2 points");
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        require(std::isfinite(omegas_[i]) && omegas_[i] > 0.0, "frequency grid points must be finite and positive");
        if (i > 0) {
            require(omegas_[i] > omegas_[i - 1], "frequency grid must be strictly increasing");
        }
    }
}

std::vector<double> FrequencyGrid::frequencies_hz() const
{
    std::vector<double> f(omegas_.size());
    std::transform(omegas_.begin(), omegas_.end(), f.begin(), [](double w) { return w / kTwoPi; });
    return f;
}

FrequencyGrid make_log_grid(double f_min_hz, double f_max_hz, std::size_t n_points)
{
    require(std::isfinite(f_min_hz) && std::isfinite(f_max_hz), "band edges must be finite");
    require(f_min_hz > 0.0, "lower frequency must be positive");
    require(f_min_hz < f_max_hz, "lower frequency must be below upper frequency");
    require(n_points >= 2, "grid needs at least 2 points");

    const double lo = std::log10(f_min_hz);
    const double hi = std::log10(f_max_hz);
    const double step = (hi - lo) / static_cast<double>(n_points - 1);
    std::vector<double> omegas(n_points);
    omegas.front() = kTwoPi * f_min_hz;
    omegas.back() = kTwoPi * f_max_hz;
    for (std::size_t i = 1; i + 1 < n_points; ++i) {
        omegas[i] = kTwoPi * std::pow(10.0, lo + step * static_cast<double>(i));
    }
    return FrequencyGrid(std::move(omegas));
}

ComplexSpectrum::ComplexSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    require(values_.size() == grid_.size(), "spectrum length must match grid length");
}

void validate(const DebyePoleParams& p)
{
    require(std::isfinite(p.eps_inf) && std::isfinite(p.delta_eps), "Debye parameters must be finite");
    require(std::isfinite(p.tau) && p.tau > 0.0, "Debye relaxation time must be positive");
}

void validate(const HavriliakNegamiParams& p)
{
    require(std::isfinite(p.eps_inf) && p.eps_inf >= 1.0, "HN eps_inf must be >= 1");
    require(std::isfinite(p.delta_eps) && p.delta_eps > 0.0, "HN delta_eps must be > 0");
    require(std::isfinite(p.tau0) && p.tau0 > 0.0, "HN tau0 must be > 0");
    require(p.alpha > 0.0 && p.alpha <= 1.0, "HN alpha must lie in (0, 1]");
    require(p.beta > 0.0 && p.beta <= 1.0, "HN beta must lie in (0, 1]");
}

void validate(const JonscherParams& p)
{
    require(std::isfinite(p.eps_inf), "Jonscher eps_inf must be finite");
    require(std::isfinite(p.a_p) && p.a_p > 0.0, "Jonscher a_p must be > 0");
    require(std::isfinite(p.omega_p) && p.omega_p > 0.0, "Jonscher omega_p must be > 0");
    require(p.n_p >= 0.0 && p.n_p <= 1.0, "Jonscher n_p must lie in [0, 1]");
}

void validate(const CrimParams& p)
{
    require(std::isfinite(p.shape_a) && p.shape_a != 0.0, "CRIM shape factor must be nonzero");
    require(!p.components.empty(), "CRIM needs at least one component");
    double total = 0.0;
    for (const auto& c : p.components) {
        require(c.fraction > 0.0 && c.fraction <= 1.0, "CRIM fractions must lie in (0, 1]");
        validate(c.constituent);
        total += c.fraction;
    }
    require(std::abs(total - 1.0) <= 1e-9, "CRIM fractions must sum to 1");
}

void validate(const RawDataTable& t)
{
    require(t.rows.size() >= 2, "raw data needs at least 2 rows");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        require(std::isfinite(r.frequency_hz) && r.frequency_hz > 0.0, "raw data frequencies must be positive");
        require(std::isfinite(r.eps_real) && std::isfinite(r.eps_imag), "raw data values must be finite");
        if (i > 0) {
            require(r.frequency_hz > t.rows[i - 1].frequency_hz, "raw data frequencies must be strictly increasing");
        }
    }
}

ComplexSpectrum eval_debye_pole(double eps_inf, double delta_eps, double tau0, const FrequencyGrid& grid)
{
    validate(DebyePoleParams{eps_inf, delta_eps, tau0});
    std::vector<cplx> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = eps_inf + delta_eps / cplx(1.0, grid[i] * tau0);
    }
    return ComplexSpectrum(grid, std::move(values));
}

ComplexSpectrum eval_havriliak_negami(const HavriliakNegamiParams& params, const FrequencyGrid& grid)
{
    validate(params);
    std::vector<cplx> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx base = 1.0 + j_power(grid[i] * params.tau0, params.alpha);
        const cplx denom = params.beta == 1.0 ? base : std::pow(base, params.beta);
        values[i] = params.eps_inf + params.delta_eps / denom;
    }
    return ComplexSpectrum(grid, std::move(values));
}

ComplexSpectrum eval_jonscher(const JonscherParams& params, const FrequencyGrid& grid)
{
    validate(params);
    std::vector<cplx> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // (−jx)^n = x^n e^{−jπn/2}
        const double x = grid[i] / params.omega_p;
        values[i] = params.eps_inf + params.a_p * std::polar(std::pow(x, params.n_p), -0.5 * std::numbers::pi * params.n_p);
    }
    return ComplexSpectrum(grid, std::move(values));
}

ComplexSpectrum eval_crim(const CrimParams& params, const FrequencyGrid& grid)
{
    validate(params);
    const double a = params.shape_a;
    std::vector<cplx> mix(grid.size(), cplx(0.0, 0.0));
    for (const auto& c : params.components) {
        const auto& d = c.constituent;
        const auto spectrum = eval_debye_pole(d.eps_inf, d.delta_eps, d.tau, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            mix[i] += c.fraction * std::pow(spectrum.values()[i], a);
        }
    }
    for (auto& v : mix) {
        v = std::pow(v, 1.0 / a);
    }
    return ComplexSpectrum(grid, std::move(mix));
}

ComplexSpectrum interp_raw_data(const RawDataTable& table, const FrequencyGrid& grid)
{
    validate(table);
    const auto& rows = table.rows;
    const double band_lo = rows.front().frequency_hz;
    const double band_hi = rows.back().frequency_hz;
    // Absorbs the rounding in ω = 2πf → f = ω/2π at the band edges.
    constexpr double kEdgeSlack = 1e-12;

    std::vector<double> log_f(rows.size());
    std::transform(rows.begin(), rows.end(), log_f.begin(), [](const RawDataRow& r) { return std::log(r.frequency_hz); });

    std::vector<cplx> values(grid.size());
    const auto freqs = grid.frequencies_hz();
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        double f = freqs[i];
        if (f < band_lo * (1.0 - kEdgeSlack) || f > band_hi * (1.0 + kEdgeSlack)) {
            throw OutOfRange(fmt::format("frequency {:g} Hz lies outside the tabulated band [{:g}, {:g}] Hz", f, band_lo, band_hi));
        }
        f = std::clamp(f, band_lo, band_hi);
        const double lf = std::log(f);
        auto upper = std::upper_bound(log_f.begin(), log_f.end(), lf);
        std::size_t k = upper == log_f.end() ? rows.size() - 1 : static_cast<std::size_t>(upper - log_f.begin());
        k = std::max<std::size_t>(k, 1);
        const double t = (lf - log_f[k - 1]) / (log_f[k] - log_f[k - 1]);
        const auto& r0 = rows[k - 1];
        const auto& r1 = rows[k];
        const double re = r0.eps_real + t * (r1.eps_real - r0.eps_real);
        const double im = r0.eps_imag + t * (r1.eps_imag - r0.eps_imag);
        values[i] = cplx(re, -im);
    }
    return ComplexSpectrum(grid, std::move(values));
}

ComplexSpectrum evaluate(const RelaxationModel& model, const FrequencyGrid& grid)
{
    struct Visitor {
        const FrequencyGrid& grid;
        ComplexSpectrum operator()(const HavriliakNegamiParams& p) const { return eval_havriliak_negami(p, grid); }
        ComplexSpectrum operator()(const JonscherParams& p) const { return eval_jonscher(p, grid); }
        ComplexSpectrum operator()(const CrimParams& p) const { return eval_crim(p, grid); }
        ComplexSpectrum operator()(const RawDataTable& t) const { return interp_raw_data(t, grid); }
    };
    return std::visit(Visitor{grid}, model);
}

RawDataTable read_raw_data_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open raw data file " + path.string());
    }
    RawDataTable table;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty() || fields.front().starts_with('#')) {
            continue;
        }
        double f = 0.0;
        if (first_content && !parse_double(fields.front(), f)) {
            first_content = false;
            continue; // header
        }
        first_content = false;
        RawDataRow row;
        if (fields.size() != 3 || !parse_double(fields[0], row.frequency_hz) || !parse_double(fields[1], row.eps_real) ||
            !parse_double(fields[2], row.eps_imag)) {
            throw InvalidArgument(fmt::format("{}:{}: expected three numeric columns", path.string(), line_no));
        }
        table.rows.push_back(row);
    }
    validate(table);
    return table;
}

void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spectrum)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "frequency_hz,eps_real,eps_imag\n";
    const auto freqs = spectrum.grid().frequencies_hz();
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out << fmt::format("{:.10e},{:.10e},{:.10e}\n", freqs[i], spectrum.real(i), spectrum.loss(i));
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace debyefit
