// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qdn/qdn.hpp"
#include "netdef_support.hpp"
#include "test_support.hpp"

using namespace qdn;
using std::numbers::pi;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

/// Tracks the worst deviation seen against a fixed tolerance.
struct Worst {
    double tolerance;
    double value = 0.0;
    void see(double d) { value = std::max(value, std::isnan(d) ? INFINITY : d); }
    bool ok() const { return value <= tolerance; }
    std::string text() const { return "max dev " + sci(value) + " (tol " + sci(tolerance) + ")"; }
};

std::vector<Complex> random_kernel(std::mt19937_64 &rng, unsigned m) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    std::vector<double> phases(m);
    for (auto &p : phases) {
        p = phase(rng);
    }
    return kernel_from_spectrum_phases(phases);
}

Verdict sg_born_rule() {
    std::mt19937_64 rng(101);
    Worst w{1e-12};
    for (int i = 0; i < 100; ++i) {
        const auto ab = gen::random_unit_vector(rng, 2);
        const auto t = run_program(stern_gerlach(ab[0], ab[1])).table;
        for (std::uint64_t b = 0; b < 8; ++b) {
            const double expected = b == 2 ? std::norm(ab[0]) : b == 4 ? std::norm(ab[1]) : 0.0;
            w.see(std::abs(t.probability(SignalMonomial::from_mask(b)) - expected));
        }
    }
    return {w.ok(), "100 draws, " + w.text()};
}

Verdict pvm_agreement() {
    std::mt19937_64 rng(102);
    Worst w{1e-12};
    for (unsigned d = 2; d <= 8; ++d) {
        for (int i = 0; i < 20; ++i) {
            const auto psi = gen::random_unit_vector(rng, d);
            const auto t = run_program(pvm_network(psi)).table;
            for (unsigned k = 0; k < d; ++k) {
                w.see(std::abs(t.probability(SignalMonomial::single(k + 1)) - std::norm(psi[k])));
            }
        }
    }
    return {w.ok(), "d = 2..8, " + w.text()};
}

Verdict double_slit() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Worst w{1e-12};
    Worst sum{1e-12};
    int cases = 0;
    for (unsigned m : {4U, 8U, 16U}) {
        for (unsigned s = 1; 2 * s < m; ++s) {
            for (int i = 0; i < 10; ++i) {
                SlitGeometry g{m, {s, mirror_slit(s, m)}, random_kernel(rng, m)};
                const double mix = u(rng);
                const Complex psi[] = {std::polar(std::sqrt(mix), 2 * pi * u(rng)),
                                       std::polar(std::sqrt(1 - mix), 2 * pi * u(rng))};
                const auto t = run_program(slit_network(g, psi)).table;
                const auto closed = double_slit_closed_form(g, s, psi[0], psi[1]);
                double total = 0.0;
                for (unsigned j = 0; j < m; ++j) {
                    const double p = t.probability(SignalMonomial::single(j));
                    w.see(std::abs(p - closed[j]));
                    total += p;
                }
                sum.see(std::abs(total - 1.0));
                ++cases;
            }
        }
    }
    return {w.ok() && sum.ok(), std::to_string(cases) + " geometries, closed form " + w.text() +
                                    ", sum " + sum.text()};
}

std::vector<NetworkProgram> oracle_programs() {
    std::vector<NetworkProgram> out;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        out.push_back(random_program(1000 + seed, RandomProgramShape{5, 1, 4, 1}));
    }
    return out;
}

Verdict path_oracle() {
    Worst w{1e-12};
    std::size_t pairs = 0;
    for (const auto &p : oracle_programs()) {
        for (unsigned i = 0; i < p.initial_rank(); ++i) {
            for (unsigned j = 0; j < p.final_rank(); ++j) {
                w.see(std::abs(path_amplitude_propagate(p, i, j) - path_amplitude_enumerate(p, i, j)));
                ++pairs;
            }
        }
    }
    return {w.ok(), "200 programs, " + std::to_string(pairs) + " pairs, " + w.text()};
}

Verdict semigroup() {
    std::size_t splits = 0;
    std::size_t mismatches = 0;
    for (const auto &p : oracle_programs()) {
        const std::span<const StageMap> stages(p.stages());
        for (unsigned i = 0; i < p.initial_rank(); ++i) {
            const Labstate start = basis_state(RegisterSpec(p.initial_rank()), SignalMonomial::single(i));
            const Labstate whole = run_stages(stages, start);
            for (std::size_t k = 0; k <= stages.size(); ++k) {
                const Labstate split = run_stages(stages.subspan(k), run_stages(stages.first(k), start));
                mismatches += split == whole ? 0 : 1;
                ++splits;
            }
        }
    }
    return {mismatches == 0,
            std::to_string(splits) + " split points, " + std::to_string(mismatches) + " inexact"};
}

Verdict epr() {
    Worst w{1e-12};
    Worst marg{1e-12};
    Worst inv{1e-15};
    for (int a = 0; a < 8; ++a) {
        const double theta = pi * a / 7.0;
        const double s2 = std::pow(std::sin(theta / 2), 2) / 2;
        const double c2 = std::pow(std::cos(theta / 2), 2) / 2;
        const auto ref = run_program(epr_network({theta, 0.0})).table;
        for (int b = 0; b < 4; ++b) {
            const double phi = pi * b / 2.0 + 0.1;
            const auto t = run_program(epr_network({theta, phi})).table;
            const double p13 = t.probability(SignalMonomial{1, 3});
            const double p24 = t.probability(SignalMonomial{2, 4});
            const double p14 = t.probability(SignalMonomial{1, 4});
            const double p23 = t.probability(SignalMonomial{2, 3});
            w.see(std::abs(p13 - s2));
            w.see(std::abs(p24 - s2));
            w.see(std::abs(p14 - c2));
            w.see(std::abs(p23 - c2));
            marg.see(std::abs(p13 + p14 - 0.5));
            marg.see(std::abs(p23 + p24 - 0.5));
            marg.see(std::abs(p13 + p23 - 0.5));
            marg.see(std::abs(p14 + p24 - 0.5));
            for (const auto &pair : rank_subset(RegisterSpec(5), 2)) {
                const auto o = SignalMonomial::from_basis(pair);
                inv.see(std::abs(t.probability(o) - ref.probability(o)));
            }
        }
    }
    return {w.ok() && marg.ok() && inv.ok(), "32 settings, coincidences " + w.text() +
                                                 ", marginals " + marg.text() + ", phi " + inv.text()};
}

std::map<std::uint64_t, double> upper_marginal(const ProbabilityTable &t, unsigned offset) {
    std::map<std::uint64_t, double> m;
    for (const auto &o : t.outcomes) {
        m[o.index.value >> offset] += o.probability;
    }
    return m;
}

Verdict independence() {
    std::mt19937_64 rng(107);
    Worst w{1e-12};
    Worst perturb{1e-15};
    for (int i = 0; i < 50; ++i) {
        const auto ab = gen::random_unit_vector(rng, 2);
        const auto gd = gen::random_unit_vector(rng, 2);
        const NetworkProgram second = stern_gerlach(gd[0], gd[1]);
        const auto t = run_program(product_network(stern_gerlach(ab[0], ab[1]), second)).table;
        w.see(std::abs(t.probability(SignalMonomial{1, 4}) - std::norm(ab[0]) * std::norm(gd[0])));
        w.see(std::abs(t.probability(SignalMonomial{1, 5}) - std::norm(ab[0]) * std::norm(gd[1])));
        w.see(std::abs(t.probability(SignalMonomial{2, 4}) - std::norm(ab[1]) * std::norm(gd[0])));
        w.see(std::abs(t.probability(SignalMonomial{2, 5}) - std::norm(ab[1]) * std::norm(gd[1])));

        const auto ab2 = gen::random_unit_vector(rng, 2);
        const auto t2 = run_program(product_network(stern_gerlach(ab2[0], ab2[1]), second)).table;
        const auto m1 = upper_marginal(t, 3);
        const auto m2 = upper_marginal(t2, 3);
        for (const auto &[k, p] : m1) {
            perturb.see(std::abs(p - (m2.contains(k) ? m2.at(k) : 0.0)));
        }
        for (const auto &[k, p] : m2) {
            perturb.see(std::abs(p - (m1.contains(k) ? m1.at(k) : 0.0)));
        }
    }
    return {w.ok() && perturb.ok(), "50 pairs, joint " + w.text() + ", marginal " + perturb.text()};
}

Verdict hsz_fringes() {
    Worst w{1e-12};
    Worst fringe{1e-9};
    const SignalMonomial pairs[] = {SignalMonomial{1, 3}, SignalMonomial{2, 4},
                                    SignalMonomial{1, 4}, SignalMonomial{2, 3}};
    std::vector<double> lo(4, INFINITY), hi(4, -INFINITY);
    for (int k = 0; k < 64; ++k) {
        const double theta = 2 * pi * k / 64.0;
        const NetworkProgram p = hsz_network(theta, std::vector<StageMap>{hsz_balanced_beamsplitter()});
        const auto t = run_program(p).table;
        for (const auto &b : rank_subset(RegisterSpec(5), 2)) {
            const auto o = SignalMonomial::from_basis(b);
            w.see(std::abs(t.probability(o) - std::norm(path_sum_oracle(p, o))));
        }
        for (int i = 0; i < 4; ++i) {
            lo[i] = std::min(lo[i], t.probability(pairs[i]));
            hi[i] = std::max(hi[i], t.probability(pairs[i]));
        }
    }
    for (int i = 0; i < 4; ++i) {
        fringe.see(std::abs(hi[i] - lo[i] - 0.5));
    }
    return {w.ok() && fringe.ok(), "64 phases, oracle " + w.text() + ", peak-to-trough " + fringe.text()};
}

Verdict rank_combinatorics() {
    std::size_t bad = 0;
    for (unsigned r = 1; r <= 12; ++r) {
        std::vector<bool> seen(std::size_t{1} << r, false);
        std::size_t total = 0;
        for (unsigned p = 0; p <= r; ++p) {
            const auto subset = rank_subset(RegisterSpec(r), p);
            std::uint64_t binom = 1;
            for (unsigned i = 1; i <= p; ++i) {
                binom = binom * (r - p + i) / i;
            }
            bad += subset.size() == binom ? 0 : 1;
            for (const auto &b : subset) {
                bad += seen[b.value] ? 1 : 0;
                seen[b.value] = true;
            }
            total += subset.size();
        }
        bad += total == (std::size_t{1} << r) ? 0 : 1;
    }
    return {bad == 0, "r = 1..12, " + std::to_string(bad) + " violations"};
}

Verdict povm_completeness() {
    Worst w{1e-9};
    const unsigned sources[] = {0, 1, 2};
    int built = 0;
    for (std::uint64_t seed = 0; built < 50; ++seed) {
        const NetworkProgram p = random_program(5000 + seed, RandomProgramShape{4, 1, 5, 3});
        const auto povm = effective_povm(p, sources);
        ComplexMatrix sum(3);
        for (const auto &e : povm) {
            sum += e.effect;
        }
        w.see(sum.max_abs_difference(ComplexMatrix::identity(3)));
        ++built;
    }
    return {w.ok(), "50 programs, " + w.text()};
}

int cli_status(const std::string &args) {
    const std::string cmd = std::string("\"") + QDN_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Verdict format_round_trip() {
    std::size_t failures = 0;
    for (const auto &p : gen::preset_programs()) {
        const auto doc = to_netdef(p);
        const auto back = parse_netdef(serialize_netdef(doc));
        failures += gen::bitwise_equal(back, doc) && compile(back) == p ? 0 : 1;
    }
    std::mt19937_64 rng(111);
    for (int i = 0; i < 500; ++i) {
        const auto doc = gen::random_document(rng);
        failures += gen::bitwise_equal(parse_netdef(serialize_netdef(doc)), doc) ? 0 : 1;
    }
    const std::string dir = std::string("\"") + QDN_FIXTURE_DIR + "/";
    const std::pair<std::string, int> corpus[] = {
        {"run " + dir + "sg.qdn.json\"", 0},
        {"run " + dir + "query.qdn.json\"", 0},
        {"run " + dir + "epr.qdn.json\" --oracle", 0},
        {"run " + dir + "hsz.qdn.json\" --oracle", 0},
        {"validate " + dir + "sg.qdn.json\"", 0},
        {"validate " + dir + "bad.qdn.json\"", 1},
        {"run " + dir + "bad.qdn.json\"", 1},
        {"run " + dir + "malformed.qdn.json\"", 2},
        {"run " + dir + "range.qdn.json\"", 2},
        {"run " + dir + "version.qdn.json\"", 2},
        {"preset sg --alpha 1,0", 2},
        {"preset sg --alpha 1,0 --beta 0,0", 0},
    };
    std::size_t exit_mismatches = 0;
    for (const auto &[args, expected] : corpus) {
        if (cli_status(args) != expected) {
            std::printf("    unexpected exit status: qdn %s\n", args.c_str());
            ++exit_mismatches;
        }
    }
    return {failures == 0 && exit_mismatches == 0,
            std::to_string(failures) + " round-trip failures over 506 documents, " +
                std::to_string(exit_mismatches) + " CLI exit mismatches over " +
                std::to_string(std::size(corpus)) + " invocations"};
}

} // namespace

int main() {
    const std::pair<const char *, std::function<Verdict()>> criteria[] = {
        {"SG Born rule", sg_born_rule},
        {"PVM agreement", pvm_agreement},
        {"double-slit interference", double_slit},
        {"path-integral oracle", path_oracle},
        {"semigroup composition", semigroup},
        {"EPR correlations", epr},
        {"independence factorization", independence},
        {"HSZ fringes", hsz_fringes},
        {"rank combinatorics", rank_combinatorics},
        {"POVM completeness", povm_completeness},
        {"format round-trip and CLI exits", format_round_trip},
    };
    int failed = 0;
    int n = 0;
    for (const auto &[name, check] : criteria) {
        ++n;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception &e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %2d %-32s %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
        failed += v.pass ? 0 : 1;
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
