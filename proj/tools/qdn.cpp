// qdn: run, validate and cross-check detector network definitions.
//
// Exit status: 0 success, 1 validation or oracle failure, 2 usage or input
// errors.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qdn/qdn.hpp"

namespace {

using namespace qdn;

constexpr double kOracleTolerance = 1e-12;
constexpr unsigned kExhaustiveOutcomeRank = 12;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string &text, const std::string &path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw UsageError("cannot write " + path);
    }
}

double parse_double(std::string s, const std::string &what) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    double x = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
        throw UsageError("bad number \"" + s + "\" in " + what);
    }
    return x;
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

/// "re,im" or a bare real number.
Complex parse_complex(const std::string &s, const std::string &what) {
    const auto parts = split(s, ',');
    if (parts.size() == 1) {
        return {parse_double(parts[0], what), 0.0};
    }
    if (parts.size() != 2) {
        throw UsageError("expected re,im for " + what + ", got \"" + s + "\"");
    }
    return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

/// "re,im;re,im;..."
std::vector<Complex> parse_complex_list(const std::string &s, const std::string &what) {
    std::vector<Complex> out;
    for (const auto &part : split(s, ';')) {
        out.push_back(parse_complex(part, what));
    }
    return out;
}

std::vector<unsigned> parse_index_list(const std::string &s, const std::string &what) {
    std::vector<unsigned> out;
    for (const auto &part : split(s, ',')) {
        unsigned k = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), k);
        if (part.empty() || ec != std::errc{} || end != part.data() + part.size()) {
            throw UsageError("bad index \"" + part + "\" in " + what);
        }
        out.push_back(k);
    }
    return out;
}

ResultFormat parse_format(const std::string &s) {
    return s == "csv" ? ResultFormat::csv : ResultFormat::json;
}

std::string format_ranks(const std::vector<unsigned> &ranks) {
    std::string s = "[";
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        s += (i ? ", " : "") + std::to_string(ranks[i]);
    }
    return s + "]";
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

void report_validation_failure(const ValidationError &e) {
    std::cerr << "validation failed at stage " << e.stage() << ": Gram deviation "
              << sci(e.deviation()) << "\n";
}

struct OracleReport {
    std::string method;
    double max_deviation = 0.0;
    std::size_t compared = 0;
};

/// Compares the sparse engine's final labstate with an independent oracle:
/// path sums when the stages after the first are rank-1, the dense
/// 2^r simulation otherwise.
OracleReport oracle_check(const NetworkProgram &program, const Labstate &final_state) {
    OracleReport rep;
    const auto &stages = program.stages();
    const bool path_ok =
        stages.empty() ||
        std::all_of(stages.begin() + 1, stages.end(),
                    [](const StageMap &s) { return is_rank_one(s); });
    if (path_ok) {
        rep.method = "path-sum";
        const RegisterSpec reg(program.final_rank());
        std::set<std::uint64_t> outcomes;
        std::set<unsigned> weights;
        for (const auto &[b, amp] : final_state.terms()) {
            outcomes.insert(b.value);
            weights.insert(static_cast<unsigned>(std::popcount(b.value)));
        }
        if (reg.rank() <= kExhaustiveOutcomeRank) {
            for (unsigned p : weights) {
                for (const auto &b : rank_subset(reg, p)) {
                    outcomes.insert(b.value);
                }
            }
        }
        for (std::uint64_t b : outcomes) {
            const Complex oracle = path_sum_oracle(program, SignalMonomial::from_mask(b));
            rep.max_deviation = std::max(
                rep.max_deviation, std::abs(oracle - final_state.amplitude(BasisIndex{b})));
            ++rep.compared;
        }
        return rep;
    }
    rep.method = "dense";
    const auto dense = dense_run(program);
    for (std::uint64_t b = 0; b < dense.size(); ++b) {
        rep.max_deviation = std::max(
            rep.max_deviation, std::abs(dense[b] - final_state.amplitude(BasisIndex{b})));
    }
    rep.compared = dense.size();
    return rep;
}

int print_oracle(const OracleReport &rep) {
    const bool ok = rep.max_deviation <= kOracleTolerance;
    std::cerr << "oracle (" << rep.method << "): max deviation " << sci(rep.max_deviation)
              << " over " << rep.compared << " amplitudes" << (ok ? "" : " FAILED") << "\n";
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct RunOptions {
    std::string file;
    std::string format = "json";
    std::string out;
    bool oracle = false;
    double tolerance = kValidationTolerance;
};

int cmd_run(const RunOptions &opt) {
    const NetDefDocument doc = parse_netdef(read_file(opt.file));
    const NetworkProgram program = compile(doc);
    RunResult result = run_program(program, opt.tolerance);
    ProbabilityTable table = result.table;
    if (const auto query = queried_outcomes(doc)) {
        table = select_outcomes(table, *query);
    }
    write_output(emit_results(table, parse_format(opt.format)), opt.out);
    return opt.oracle ? print_oracle(oracle_check(program, result.final_state)) : 0;
}

int cmd_validate(const std::string &file, double tolerance) {
    const NetworkProgram program = compile(parse_netdef(read_file(file)));
    const ValidationReport report = validate_program(program, tolerance);
    if (!report.passed) {
        std::cout << "invalid: stage " << *report.failing_stage << " Gram deviation "
                  << sci(report.max_gram_deviation) << "\n";
        return 1;
    }
    std::cout << "valid: ranks "
              << format_ranks(program.register_ranks()) << ", max Gram deviation "
              << sci(report.max_gram_deviation) << "\n";
    return 0;
}

struct OracleOptions {
    std::string file;
    std::uint64_t seed = 0;
    unsigned stages = 5;
    unsigned max_rank = 4;
};

int cmd_oracle(const OracleOptions &opt) {
    if (!opt.file.empty()) {
        const NetworkProgram program = compile(parse_netdef(read_file(opt.file)));
        const RunResult result = run_program(program);
        return print_oracle(oracle_check(program, result.final_state));
    }
    if (opt.stages == 0 || opt.max_rank == 0 || opt.max_rank > kMaxRank) {
        throw UsageError("--stages and --max-rank must be positive (rank at most 64)");
    }
    const NetworkProgram program = random_program(
        opt.seed, RandomProgramShape{.max_stages = opt.stages, .min_stages = opt.stages,
                                     .max_rank = opt.max_rank, .min_initial_rank = 1});
    double dev = 0.0;
    std::size_t pairs = 0;
    for (unsigned i = 0; i < program.initial_rank(); ++i) {
        for (unsigned j = 0; j < program.final_rank(); ++j) {
            dev = std::max(dev, std::abs(path_amplitude_propagate(program, i, j) -
                                         path_amplitude_enumerate(program, i, j)));
            ++pairs;
        }
    }
    const bool ok = dev <= kOracleTolerance;
    std::cout << "seed " << opt.seed << ": " << program.stage_count() << " stages, ranks "
              << format_ranks(program.register_ranks()) << ", " << pairs
              << " pairs, max deviation " << sci(dev) << (ok ? "" : " FAILED") << "\n";
    return ok ? 0 : 1;
}

struct PresetOptions {
    std::string name;
    std::string alpha, beta, gamma, delta;
    std::string psi;
    unsigned sites = 0;
    std::string slits;
    std::string kernel = "fresnel";
    double strength = 1.0;
    std::optional<double> theta;
    std::optional<double> phi;
    bool beamsplitter = false;
    bool emit = false;
    std::string format = "json";
    std::string out;
};

Complex required_complex(const std::string &value, const char *flag) {
    if (value.empty()) {
        throw UsageError(std::string("missing ") + flag);
    }
    return parse_complex(value, flag);
}

double required_angle(const std::optional<double> &value, const char *flag) {
    if (!value) {
        throw UsageError(std::string("missing ") + flag);
    }
    return *value;
}

SlitGeometry slit_geometry(const PresetOptions &opt) {
    if (opt.sites == 0) {
        throw UsageError("missing --sites");
    }
    if (opt.slits.empty()) {
        throw UsageError("missing --slits");
    }
    SlitGeometry g;
    g.sites = opt.sites;
    g.open_slits = parse_index_list(opt.slits, "--slits");
    if (opt.kernel == "fresnel") {
        g.kernel = fresnel_kernel(opt.sites, opt.strength);
    } else if (opt.kernel == "dft-row" || opt.kernel == "chirp") {
        g.kernel = chirp_kernel(opt.sites);
    } else {
        throw UsageError("unknown kernel \"" + opt.kernel + "\"");
    }
    return g;
}

NetworkProgram build_preset(const PresetOptions &opt) {
    const std::string &n = opt.name;
    if (n == "sg") {
        return stern_gerlach(required_complex(opt.alpha, "--alpha"),
                             required_complex(opt.beta, "--beta"));
    }
    if (n == "pvm") {
        if (opt.psi.empty()) {
            throw UsageError("missing --psi");
        }
        return pvm_network(parse_complex_list(opt.psi, "--psi"));
    }
    if (n == "slit") {
        const SlitGeometry g = slit_geometry(opt);
        std::vector<Complex> split;
        if (opt.psi.empty()) {
            split.assign(g.open_slits.size(),
                         Complex{1.0 / std::sqrt(static_cast<double>(g.open_slits.size()))});
        } else {
            split = parse_complex_list(opt.psi, "--psi");
        }
        return slit_network(g, split);
    }
    if (n == "double-slit") {
        const SlitGeometry g = slit_geometry(opt);
        if (g.open_slits.size() != 2 ||
            g.open_slits[1] != mirror_slit(g.open_slits[0], g.sites) ||
            g.open_slits[0] == g.open_slits[1]) {
            throw UsageError("double-slit needs --slits s,M-s with s != M-s");
        }
        std::vector<Complex> split(2, Complex{1.0 / std::sqrt(2.0)});
        if (!opt.psi.empty()) {
            split = parse_complex_list(opt.psi, "--psi");
        }
        return slit_network(g, split);
    }
    if (n == "epr") {
        return epr_network({required_angle(opt.theta, "--theta"),
                            required_angle(opt.phi, "--phi")});
    }
    if (n == "hsz") {
        std::optional<std::vector<StageMap>> downstream;
        if (opt.beamsplitter) {
            downstream = std::vector<StageMap>{hsz_balanced_beamsplitter()};
        }
        return hsz_network(required_angle(opt.theta, "--theta"), std::move(downstream));
    }
    if (n == "product") {
        return product_network(stern_gerlach(required_complex(opt.alpha, "--alpha"),
                                             required_complex(opt.beta, "--beta")),
                               stern_gerlach(required_complex(opt.gamma, "--gamma"),
                                             required_complex(opt.delta, "--delta")));
    }
    throw UsageError("unknown preset \"" + n + "\"");
}

int cmd_preset(const PresetOptions &opt) {
    const NetworkProgram program = build_preset(opt);
    if (opt.emit) {
        write_output(serialize_netdef(to_netdef(program)), opt.out);
        return 0;
    }
    write_output(emit_results(run_program(program).table, parse_format(opt.format)),
                 opt.out);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantized detector network simulator"};
    app.require_subcommand(1);
    const std::vector<std::string> formats{"json", "csv"};

    RunOptions run;
    auto *run_cmd = app.add_subcommand("run", "Run a network definition and print the outcome table");
    run_cmd->add_option("file", run.file, "Network definition (.qdn.json)")->required();
    run_cmd->add_option("--format", run.format, "Result format")
        ->check(CLI::IsMember(formats));
    run_cmd->add_option("--out", run.out, "Write results to this file");
    run_cmd->add_flag("--oracle", run.oracle, "Cross-check amplitudes against an independent oracle");
    run_cmd->add_option("--tolerance", run.tolerance, "Gram validation tolerance")
        ->check(CLI::PositiveNumber);

    std::string validate_file;
    double validate_tolerance = kValidationTolerance;
    auto *validate_cmd = app.add_subcommand("validate", "Check probability conservation");
    validate_cmd->add_option("file", validate_file, "Network definition (.qdn.json)")->required();
    validate_cmd->add_option("--tolerance", validate_tolerance, "Gram validation tolerance")
        ->check(CLI::PositiveNumber);

    OracleOptions oracle;
    auto *oracle_cmd = app.add_subcommand(
        "oracle", "Compare the engine with brute-force path sums on a file or a random program");
    oracle_cmd->add_option("file", oracle.file, "Network definition (.qdn.json)");
    oracle_cmd->add_option("--seed", oracle.seed, "Random program seed");
    oracle_cmd->add_option("--stages", oracle.stages, "Stage count of the random program");
    oracle_cmd->add_option("--max-rank", oracle.max_rank, "Largest register rank");

    PresetOptions preset;
    auto *preset_cmd = app.add_subcommand("preset", "Build and run a standard experiment");
    preset_cmd->add_option("name", preset.name, "sg, pvm, slit, double-slit, epr, hsz or product")
        ->required()
        ->check(CLI::IsMember(
            {"sg", "pvm", "slit", "double-slit", "epr", "hsz", "product"}));
    preset_cmd->add_option("--alpha", preset.alpha, "re,im");
    preset_cmd->add_option("--beta", preset.beta, "re,im");
    preset_cmd->add_option("--gamma", preset.gamma, "re,im (product, second factor)");
    preset_cmd->add_option("--delta", preset.delta, "re,im (product, second factor)");
    preset_cmd->add_option("--psi", preset.psi, "Amplitudes \"re,im;re,im;...\"");
    preset_cmd->add_option("--sites", preset.sites, "Screen sites M");
    preset_cmd->add_option("--slits", preset.slits, "Open slits a,b,...");
    preset_cmd->add_option("--kernel", preset.kernel, "fresnel or dft-row")
        ->check(CLI::IsMember({"fresnel", "dft-row", "chirp"}));
    preset_cmd->add_option("--strength", preset.strength, "Fresnel kernel strength");
    preset_cmd->add_option("--theta", preset.theta, "Angle (epr, hsz)");
    preset_cmd->add_option("--phi", preset.phi, "Azimuth (epr)");
    preset_cmd->add_flag("--beamsplitter", preset.beamsplitter,
                         "Append balanced beamsplitters (hsz)");
    preset_cmd->add_flag("--emit", preset.emit, "Print the network definition instead of results");
    preset_cmd->add_option("--format", preset.format, "Result format")
        ->check(CLI::IsMember(formats));
    preset_cmd->add_option("--out", preset.out, "Write output to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) {
            return cmd_run(run);
        }
        if (*validate_cmd) {
            return cmd_validate(validate_file, validate_tolerance);
        }
        if (*oracle_cmd) {
            return cmd_oracle(oracle);
        }
        return cmd_preset(preset);
    } catch (const ValidationError &e) {
        report_validation_failure(e);
        return 1;
    } catch (const NetDefError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        // UsageError or a library precondition (unnormalized amplitudes,
        // angles out of range, ...).
        std::cerr << "error: " << e.what() << "\n";
        if (*preset_cmd) {
            std::cerr << "\n" << preset_cmd->help();
        }
        return 2;
    }
}
