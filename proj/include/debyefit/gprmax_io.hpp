#pragma once

#include "debyefit/debye_fitter.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace debyefit::gprmax {

enum class CommandKind { HavriliakNegami, Jonscher, Crim, RawData };

std::string_view hashtag(CommandKind kind);

/// `#jonscher` parameters as written on the command line (reference frequency in Hz).
struct JonscherFields {
    double eps_inf = 1.0;
    double a_p = 1.0;
    double f_p_hz = 1.0;
    double n_p = 0.5;

    friend bool operator==(const JonscherFields&, const JonscherFields&) = default;
};

struct RawDataFields {
    std::string path;

    friend bool operator==(const RawDataFields&, const RawDataFields&) = default;
};

using CommandParams = std::variant<HavriliakNegamiParams, JonscherFields, CrimParams, RawDataFields>;

/// One `#havriliak_negami` / `#jonscher` / `#crim` / `#raw_data` line.
/// Conductivity, permeability and magnetic loss are never fitted; their
/// original tokens are kept so the emitted `#material` line repeats them verbatim.
struct MaterialCommand {
    CommandKind kind = CommandKind::HavriliakNegami;
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    CommandParams params;
    std::string sigma;    ///< S/m
    std::string mu_r;
    std::string mag_loss; ///< Ω/m
    int n_poles = 5;      ///< 1…20, or -1 for automatic
    std::string material_id;
    std::optional<std::int64_t> seed;

    friend bool operator==(const MaterialCommand&, const MaterialCommand&) = default;
};

/// Parses one hashtag line. Throws ParseError; its position() names the
/// offending field (1-based, counted after the colon).
MaterialCommand parse_command(std::string_view line);

/// Inverse of parse_command, shortest round-trip number formatting.
std::string format_command(const MaterialCommand& command);

/// Relaxation model for the fitter; Jonscher's reference frequency becomes rad/s,
/// raw data paths resolve against `base_dir` when relative.
RelaxationModel build_model(const MaterialCommand& command, const std::filesystem::path& base_dir = {});

/// Four digits after the decimal point: fixed for 0.1 ≤ |x| < 1e4, otherwise
/// exponent notation without padding (e.g. 2.8345, 0.6736, 4.3677e-10).
std::string format_number(double value);

/// `#material: <ε∞> <σ> <μr> <mag_loss> <id>`
std::string material_line(const DebyeExpansion& expansion, const MaterialCommand& command);
/// `#add_dispersion_debye: <N> <Δε₁> <τ₁> … <id>`
std::string dispersion_line(const DebyeExpansion& expansion, const MaterialCommand& command);

struct CliOptions {
    optim::Algorithm algorithm = optim::Algorithm::PSO;
    std::size_t grid_points = 50;
    std::optional<std::filesystem::path> csv_dir;
    std::filesystem::path base_dir; ///< for relative #raw_data paths
};

struct MaterialOutput {
    std::string material_line;
    std::string dispersion_line;
    std::vector<std::filesystem::path> csv_paths;
    FitReport report;
};

/// Fits the command's model and formats the two output lines; writes
/// `spectrum_<id>.csv` and `convergence_<id>.csv` when csv_dir is set.
MaterialOutput run_command(const MaterialCommand& command, const CliOptions& options);

struct BatchResult {
    std::vector<MaterialOutput> outputs;
    std::vector<std::string> diagnostics; ///< `line N: message`
    int exit_code = 0;                    ///< 0 ok, 1 parse/config error, 2 I/O error
};

/// Processes every hashtag line of `input` in order, writing output lines to
/// `out` as they are produced. Blank lines and `--` comments are skipped. The
/// first parse error stops the batch; fit errors are reported and skipped.
BatchResult run_stream(std::istream& input, std::ostream& out, const CliOptions& options);

/// run_stream over a file; base_dir defaults to the file's directory.
BatchResult run_file(const std::filesystem::path& path, std::ostream& out, CliOptions options);

} // namespace debyefit::gprmax
