#include "debyefit/gprmax_io.hpp"

#include "debyefit/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace debyefit::gprmax {

namespace {

struct KindName {
    CommandKind kind;
    std::string_view name;
};

constexpr KindName kKinds[] = {
    {CommandKind::HavriliakNegami, "#havriliak_negami"},
    {CommandKind::Jonscher, "#jonscher"},
    {CommandKind::Crim, "#crim"},
    {CommandKind::RawData, "#raw_data"},
};

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> tokenize(std::string_view s)
{
    std::istringstream in{std::string(s)};
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) {
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

// Walks the tokens after the colon; positions are 1-based.
class FieldReader {
public:
    FieldReader(std::string_view command, std::vector<std::string> tokens) : command_(command), tokens_(std::move(tokens)) {}

    std::size_t position() const noexcept { return next_ + 1; }
    std::size_t remaining() const noexcept { return tokens_.size() - next_; }

    void require(std::size_t count) const
    {
        if (remaining() < count) {
            const auto missing = tokens_.size() + 1;
            throw ParseError(fmt::format("{}: expected {} fields, got {}; field {} is missing", command_,
                                         next_ + count, tokens_.size(), missing),
                             static_cast<int>(missing));
        }
    }

    const std::string& raw()
    {
        require(1);
        return tokens_[next_++];
    }

    double number(std::string_view what)
    {
        const auto pos = position();
        const std::string& tok = raw();
        double value = 0.0;
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (first != last && *first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
            throw ParseError(fmt::format("{}: field {} ({}): '{}' is not a number", command_, pos, what, tok),
                             static_cast<int>(pos));
        }
        return value;
    }

    std::int64_t integer(std::string_view what)
    {
        const auto pos = position();
        const std::string& tok = raw();
        std::int64_t value = 0;
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (first != last && *first == '+') {
            ++first;
        }
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) {
            throw ParseError(fmt::format("{}: field {} ({}): '{}' is not an integer", command_, pos, what, tok),
                             static_cast<int>(pos));
        }
        return value;
    }

    // Numeric field kept as its original token.
    std::string verbatim(std::string_view what, double min_value)
    {
        const auto pos = position();
        const double v = number(what);
        if (v < min_value) {
            fail(pos, what, fmt::format("must be >= {}", min_value));
        }
        return tokens_[pos - 1];
    }

    [[noreturn]] void fail(std::size_t pos, std::string_view what, std::string_view why) const
    {
        throw ParseError(fmt::format("{}: field {} ({}) {}", command_, pos, what, why), static_cast<int>(pos));
    }

private:
    std::string_view command_;
    std::vector<std::string> tokens_;
    std::size_t next_ = 0;
};

// Parses a value and range-checks it in one step.
template <typename Check>
double checked(FieldReader& r, std::string_view what, Check ok, std::string_view why)
{
    const auto pos = r.position();
    const double v = r.number(what);
    if (!ok(v)) {
        r.fail(pos, what, why);
    }
    return v;
}

std::string shortest(double v)
{
    return fmt::format("{}", v);
}

} // namespace

std::string_view hashtag(CommandKind kind)
{
    for (const auto& k : kKinds) {
        if (k.kind == kind) {
            return k.name;
        }
    }
    return "#unknown";
}

MaterialCommand parse_command(std::string_view line)
{
    line = trim(line);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
        throw ParseError(fmt::format("'{}': expected '<#command>: <fields>'", line), 0);
    }
    const std::string_view head = trim(line.substr(0, colon));
    const auto it = std::find_if(std::begin(kKinds), std::end(kKinds), [&](const KindName& k) { return k.name == head; });
    if (it == std::end(kKinds)) {
        throw ParseError(fmt::format("unknown command '{}'", head), 0);
    }

    MaterialCommand cmd;
    cmd.kind = it->kind;
    FieldReader r(head, tokenize(line.substr(colon + 1)));

    auto positive = [](double v) { return v > 0.0; };
    cmd.f_min_hz = checked(r, "lower frequency", positive, "must be > 0");
    {
        const auto pos = r.position();
        cmd.f_max_hz = r.number("upper frequency");
        if (!(cmd.f_max_hz > cmd.f_min_hz)) {
            r.fail(pos, "upper frequency", "must exceed the lower frequency");
        }
    }

    switch (cmd.kind) {
    case CommandKind::HavriliakNegami: {
        HavriliakNegamiParams p;
        auto unit = [](double v) { return v > 0.0 && v <= 1.0; };
        p.alpha = checked(r, "alpha", unit, "must lie in (0, 1]");
        p.beta = checked(r, "beta", unit, "must lie in (0, 1]");
        p.eps_inf = checked(r, "eps_inf", [](double v) { return v >= 1.0; }, "must be >= 1");
        p.delta_eps = checked(r, "delta_eps", positive, "must be > 0");
        p.tau0 = checked(r, "tau", positive, "must be > 0");
        cmd.params = p;
        break;
    }
    case CommandKind::Jonscher: {
        JonscherFields p;
        p.eps_inf = checked(r, "eps_inf", [](double v) { return v >= 1.0; }, "must be >= 1");
        p.a_p = checked(r, "a_p", positive, "must be > 0");
        p.f_p_hz = checked(r, "reference frequency", positive, "must be > 0");
        p.n_p = checked(r, "n_p", [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
        cmd.params = p;
        break;
    }
    case CommandKind::Crim: {
        CrimParams p;
        p.shape_a = checked(r, "shape factor", [](double v) { return v != 0.0; }, "must be nonzero");
        const auto count_pos = r.position();
        const auto m = r.integer("component count");
        if (m < 1 || m > 100) {
            r.fail(count_pos, "component count", "must lie in [1, 100]");
        }
        const auto first_fraction = r.position();
        p.components.resize(static_cast<std::size_t>(m));
        double total = 0.0;
        for (auto& c : p.components) {
            c.fraction = checked(r, "fraction", [](double v) { return v > 0.0 && v <= 1.0; }, "must lie in (0, 1]");
            total += c.fraction;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            r.fail(first_fraction, "fractions", fmt::format("sum to {}, expected 1", total));
        }
        for (auto& c : p.components) {
            c.constituent.eps_inf = checked(r, "constituent eps_inf", [](double v) { return v >= 1.0; }, "must be >= 1");
            c.constituent.delta_eps = checked(r, "constituent delta_eps", positive, "must be > 0");
            c.constituent.tau = checked(r, "constituent tau", positive, "must be > 0");
        }
        cmd.params = p;
        break;
    }
    case CommandKind::RawData:
        cmd.params = RawDataFields{r.raw()};
        break;
    }

    cmd.sigma = r.verbatim("conductivity", 0.0);
    cmd.mu_r = r.verbatim("relative permeability", 1.0);
    cmd.mag_loss = r.verbatim("magnetic loss", 0.0);
    {
        const auto pos = r.position();
        const auto n = r.integer("number of poles");
        if (n != kAutoPoleCount && (n < 1 || n > kMaxPoles)) {
            r.fail(pos, "number of poles", "must lie in [1, 20] or be -1");
        }
        cmd.n_poles = static_cast<int>(n);
    }
    cmd.material_id = r.raw();
    if (r.remaining() > 0) {
        cmd.seed = r.integer("seed");
    }
    if (r.remaining() > 0) {
        r.fail(r.position(), "trailing field", "is unexpected");
    }
    return cmd;
}

std::string format_command(const MaterialCommand& cmd)
{
    std::string out = fmt::format("{}: {} {}", hashtag(cmd.kind), shortest(cmd.f_min_hz), shortest(cmd.f_max_hz));
    struct Visitor {
        std::string& out;
        void operator()(const HavriliakNegamiParams& p) const
        {
            out += fmt::format(" {} {} {} {} {}", shortest(p.alpha), shortest(p.beta), shortest(p.eps_inf),
                               shortest(p.delta_eps), shortest(p.tau0));
        }
        void operator()(const JonscherFields& p) const
        {
            out += fmt::format(" {} {} {} {}", shortest(p.eps_inf), shortest(p.a_p), shortest(p.f_p_hz), shortest(p.n_p));
        }
        void operator()(const CrimParams& p) const
        {
            out += fmt::format(" {} {}", shortest(p.shape_a), p.components.size());
            for (const auto& c : p.components) {
                out += " " + shortest(c.fraction);
            }
            for (const auto& c : p.components) {
                out += fmt::format(" {} {} {}", shortest(c.constituent.eps_inf), shortest(c.constituent.delta_eps),
                                   shortest(c.constituent.tau));
            }
        }
        void operator()(const RawDataFields& p) const { out += " " + p.path; }
    };
    std::visit(Visitor{out}, cmd.params);
    out += fmt::format(" {} {} {} {} {}", cmd.sigma, cmd.mu_r, cmd.mag_loss, cmd.n_poles, cmd.material_id);
    if (cmd.seed) {
        out += fmt::format(" {}", *cmd.seed);
    }
    return out;
}

RelaxationModel build_model(const MaterialCommand& cmd, const std::filesystem::path& base_dir)
{
    struct Visitor {
        const std::filesystem::path& base_dir;
        RelaxationModel operator()(const HavriliakNegamiParams& p) const { return p; }
        RelaxationModel operator()(const JonscherFields& p) const
        {
            return JonscherParams{p.eps_inf, p.a_p, 2.0 * std::numbers::pi * p.f_p_hz, p.n_p};
        }
        RelaxationModel operator()(const CrimParams& p) const { return p; }
        RelaxationModel operator()(const RawDataFields& p) const
        {
            std::filesystem::path path(p.path);
            if (path.is_relative() && !base_dir.empty()) {
                path = base_dir / path;
            }
            return read_raw_data_csv(path);
        }
    };
    return std::visit(Visitor{base_dir}, cmd.params);
}

std::string format_number(double value)
{
    const double mag = std::abs(value);
    if (value == 0.0) {
        return "0.0000";
    }
    if (mag >= 0.1 && mag < 1e4) {
        return fmt::format("{:.4f}", value);
    }
    std::string s = fmt::format("{:.4e}", value);
    // Drop the exponent's '+' sign and zero padding: e-09 → e-9, e+05 → e5.
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e + 1);
    std::string_view exp = std::string_view(s).substr(e + 1);
    std::string sign;
    if (!exp.empty() && (exp.front() == '+' || exp.front() == '-')) {
        if (exp.front() == '-') {
            sign = "-";
        }
        exp.remove_prefix(1);
    }
    while (exp.size() > 1 && exp.front() == '0') {
        exp.remove_prefix(1);
    }
    return mantissa + sign + std::string(exp);
}

std::string material_line(const DebyeExpansion& expansion, const MaterialCommand& cmd)
{
    return fmt::format("#material: {} {} {} {} {}", format_number(expansion.eps_inf), cmd.sigma, cmd.mu_r, cmd.mag_loss,
                       cmd.material_id);
}

std::string dispersion_line(const DebyeExpansion& expansion, const MaterialCommand& cmd)
{
    std::string out = fmt::format("#add_dispersion_debye: {}", expansion.poles.size());
    for (const auto& p : expansion.poles) {
        out += fmt::format(" {} {}", format_number(p.delta_eps), format_number(p.tau));
    }
    out += " " + cmd.material_id;
    return out;
}

namespace {

void write_fit_csv(const std::filesystem::path& path, const ComplexSpectrum& target, const ComplexSpectrum& fitted)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "frequency_hz,eps_real_target,eps_imag_target,eps_real_fit,eps_imag_fit,rel_err_real,rel_err_imag\n";
    const auto freqs = target.grid().frequencies_hz();
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double err_re = std::abs(fitted.real(i) - target.real(i)) / std::max(std::abs(target.real(i)), kRelativeErrorFloor);
        const double err_im = std::abs(fitted.loss(i) - target.loss(i)) / std::max(std::abs(target.loss(i)), kRelativeErrorFloor);
        out << fmt::format("{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n", freqs[i], target.real(i),
                           target.loss(i), fitted.real(i), fitted.loss(i), err_re, err_im);
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace

MaterialOutput run_command(const MaterialCommand& cmd, const CliOptions& options)
{
    const RelaxationModel model = build_model(cmd, options.base_dir);
    FitConfig config;
    config.algorithm = options.algorithm;
    config.pole_count = cmd.n_poles;
    config.f_min_hz = cmd.f_min_hz;
    config.f_max_hz = cmd.f_max_hz;
    config.grid_points = options.grid_points;
    if (cmd.seed) {
        config.seed = static_cast<std::uint64_t>(*cmd.seed);
    }

    MaterialOutput output;
    output.report = fit(model, config);
    output.material_line = material_line(output.report.expansion, cmd);
    output.dispersion_line = dispersion_line(output.report.expansion, cmd);

    if (options.csv_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*options.csv_dir, ec);
        if (ec) {
            throw IoError("cannot create " + options.csv_dir->string() + ": " + ec.message());
        }
        const auto grid = make_log_grid(cmd.f_min_hz, cmd.f_max_hz, options.grid_points);
        const auto target = evaluate(model, grid);
        const auto fitted = eval_expansion(output.report.expansion, grid);
        const auto spectrum_path = *options.csv_dir / ("spectrum_" + cmd.material_id + ".csv");
        const auto convergence_path = *options.csv_dir / ("convergence_" + cmd.material_id + ".csv");
        write_fit_csv(spectrum_path, target, fitted);
        write_convergence_csv(convergence_path, output.report.convergence);
        output.csv_paths = {spectrum_path, convergence_path};
    }
    return output;
}

BatchResult run_stream(std::istream& input, std::ostream& out, const CliOptions& options)
{
    BatchResult batch;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.starts_with("--")) {
            continue;
        }
        MaterialCommand cmd;
        try {
            cmd = parse_command(text);
        } catch (const ParseError& e) {
            batch.diagnostics.push_back(fmt::format("line {}: {}", line_no, e.what()));
            batch.exit_code = std::max(batch.exit_code, 1);
            break;
        }
        try {
            auto output = run_command(cmd, options);
            out << output.material_line << '\n' << output.dispersion_line << '\n';
            batch.outputs.push_back(std::move(output));
        } catch (const IoError& e) {
            batch.diagnostics.push_back(fmt::format("line {}: {}", line_no, e.what()));
            batch.exit_code = 2;
        } catch (const std::exception& e) {
            batch.diagnostics.push_back(fmt::format("line {}: {}", line_no, e.what()));
            batch.exit_code = std::max(batch.exit_code, 1);
        }
    }
    out.flush();
    return batch;
}

BatchResult run_file(const std::filesystem::path& path, std::ostream& out, CliOptions options)
{
    std::ifstream in(path);
    if (!in) {
        BatchResult batch;
        batch.diagnostics.push_back("cannot open " + path.string());
        batch.exit_code = 2;
        return batch;
    }
    if (options.base_dir.empty()) {
        options.base_dir = path.parent_path();
    }
    return run_stream(in, out, options);
}

} // namespace debyefit::gprmax
