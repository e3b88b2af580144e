// Fits multi-pole Debye expansions to the dispersive-material commands of a
// gprMax-style input file and prints #material / #add_dispersion_debye lines.

#include "debyefit/errors.hpp"
#include "debyefit/gprmax_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace debyefit;

    CLI::App app{"Fit multi-pole Debye expansions to dispersive material commands"};
    std::string input;
    std::string output;
    std::string optimizer = "pso";
    std::size_t grid_points = 50;
    std::string csv_dir;
    bool quiet = false;

    app.add_option("-i,--input", input, "File of hashtag commands (default: standard input)");
    app.add_option("-o,--output", output, "Write material lines here (default: standard output)");
    app.add_option("--optimizer", optimizer, "Global optimizer for relaxation times")
        ->check(CLI::IsMember({"pso", "de", "da"}, CLI::ignore_case));
    app.add_option("--grid-points", grid_points, "Log-spaced frequency samples across the band")
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    app.add_option("--csv-dir", csv_dir, "Directory for spectrum_<id>.csv and convergence_<id>.csv");
    app.add_flag("-q,--quiet", quiet, "Suppress the per-material fit summary on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    gprmax::CliOptions options;
    try {
        options.algorithm = optim::parse_algorithm(optimizer);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    options.grid_points = grid_points;
    if (!csv_dir.empty()) {
        options.csv_dir = csv_dir;
    }

    std::ofstream file_out;
    if (!output.empty()) {
        file_out.open(output);
        if (!file_out) {
            std::cerr << "cannot write " << output << '\n';
            return 2;
        }
    }
    std::ostream& out = output.empty() ? std::cout : file_out;

    const auto batch = input.empty() ? gprmax::run_stream(std::cin, out, options) : gprmax::run_file(input, out, options);

    if (!quiet) {
        for (const auto& o : batch.outputs) {
            const auto& r = o.report;
            std::cerr << fmt::format("-- {}: {} poles, error real {:.3f}% + imag {:.3f}% = {:.3f}%, {:.3f} s, seed {}\n",
                                     o.material_line.substr(o.material_line.rfind(' ') + 1), r.expansion.poles.size(),
                                     r.err_real, r.err_imag, r.err_total, r.duration, r.seed_used);
        }
    }
    for (const auto& d : batch.diagnostics) {
        std::cerr << d << '\n';
    }
    if (file_out.is_open()) {
        file_out.close();
        if (!file_out) {
            std::cerr << "failed writing " << output << '\n';
            return 2;
        }
    }
    return batch.exit_code;
}
