#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace debyefit {

/// Strictly increasing, strictly positive angular frequencies (rad/s).
class FrequencyGrid {
public:
    /// Validates the invariants; throws InvalidArgument.
    explicit FrequencyGrid(std::vector<double> omegas);

    std::span<const double> omegas() const noexcept { return omegas_; }
    std::size_t size() const noexcept { return omegas_.size(); }
    double operator[](std::size_t i) const noexcept { return omegas_[i]; }

    /// Frequencies in Hz, ω / 2π.
    std::vector<double> frequencies_hz() const;

private:
    std::vector<double> omegas_;
};

/// `n_points` angular frequencies log-spaced from 2π·f_min to 2π·f_max inclusive.
FrequencyGrid make_log_grid(double f_min_hz, double f_max_hz, std::size_t n_points);

/// Complex relative permittivity sampled on a grid. Each value is stored as
/// the complex number ε' − jε'', so `loss()` (ε'') is the negated imaginary part.
class ComplexSpectrum {
public:
    ComplexSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> values);

    const FrequencyGrid& grid() const noexcept { return grid_; }
    std::span<const std::complex<double>> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// ε' at point i.
    double real(std::size_t i) const noexcept { return values_[i].real(); }
    /// ε'' at point i (nonnegative for passive media).
    double loss(std::size_t i) const noexcept { return -values_[i].imag(); }

private:
    FrequencyGrid grid_;
    std::vector<std::complex<double>> values_;
};

struct DebyePoleParams {
    double eps_inf = 1.0;
    double delta_eps = 1.0;
    double tau = 1e-9; ///< seconds

    friend bool operator==(const DebyePoleParams&, const DebyePoleParams&) = default;
};

struct HavriliakNegamiParams {
    double eps_inf = 1.0;
    double delta_eps = 1.0;
    double tau0 = 1e-9; ///< seconds
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const HavriliakNegamiParams&, const HavriliakNegamiParams&) = default;
};

struct JonscherParams {
    double eps_inf = 1.0;
    double a_p = 1.0;
    double omega_p = 1.0; ///< reference angular frequency, rad/s
    double n_p = 0.5;
};

struct CrimComponent {
    double fraction = 1.0;
    DebyePoleParams constituent;

    friend bool operator==(const CrimComponent&, const CrimComponent&) = default;
};

struct CrimParams {
    double shape_a = 0.5;
    std::vector<CrimComponent> components;

    friend bool operator==(const CrimParams&, const CrimParams&) = default;
};

struct RawDataRow {
    double frequency_hz = 0.0;
    double eps_real = 0.0;
    double eps_imag = 0.0; ///< ε'' (loss), ≥ 0

    friend bool operator==(const RawDataRow&, const RawDataRow&) = default;
};

struct RawDataTable {
    std::vector<RawDataRow> rows;

    friend bool operator==(const RawDataTable&, const RawDataTable&) = default;
};

using RelaxationModel = std::variant<HavriliakNegamiParams, JonscherParams, CrimParams, RawDataTable>;

// Parameter checks. Each throws InvalidArgument naming the bad field.
void validate(const DebyePoleParams& p);
void validate(const HavriliakNegamiParams& p);
void validate(const JonscherParams& p);
void validate(const CrimParams& p);
void validate(const RawDataTable& t);

/// ε∞ + Δε / (1 + jωτ)
ComplexSpectrum eval_debye_pole(double eps_inf, double delta_eps, double tau0, const FrequencyGrid& grid);

/// ε∞ + Δε / (1 + (jωτ₀)^α)^β, principal-branch powers.
ComplexSpectrum eval_havriliak_negami(const HavriliakNegamiParams& params, const FrequencyGrid& grid);

/// ε∞ + Aₚ(−jω/ωₚ)^nₚ, principal branch.
ComplexSpectrum eval_jonscher(const JonscherParams& params, const FrequencyGrid& grid);

/// (Σ fᵢ εᵢ(ω)^a)^{1/a} over single-pole Debye constituents.
ComplexSpectrum eval_crim(const CrimParams& params, const FrequencyGrid& grid);

/// Piecewise-linear interpolation of ε' and ε'' in log-frequency. Throws
/// OutOfRange if the grid leaves the tabulated band.
ComplexSpectrum interp_raw_data(const RawDataTable& table, const FrequencyGrid& grid);

/// Dispatches on the model kind.
ComplexSpectrum evaluate(const RelaxationModel& model, const FrequencyGrid& grid);

/// Reads `frequency_hz, eps_real, eps_imag` rows. Commas and/or whitespace
/// separate fields; a first line whose first token is not numeric is a header.
RawDataTable read_raw_data_csv(const std::filesystem::path& path);

/// Writes `frequency_hz,eps_real,eps_imag` (ε'' positive) for plotting.
void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spectrum);

} // namespace debyefit
