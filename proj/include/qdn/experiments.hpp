#pragma once

// Ready-made detector networks: Stern-Gerlach, general von Neumann (PVM)
// tests, slit experiments on a cyclic screen, EPR pairs, two-photon
// interferometry and independent products of networks.
//
// Register layouts
//   stern_gerlach  rank 3: 0 source, 1 up, 2 down
//   pvm_network    rank 1+d: 0 source, i = outcome i (1..d)
//   slit_network   ranks {1, M, M}: source, slit a, detector j
//   epr_network    rank 5: 0 source, 1/2 Alice up/down, 3/4 Bob up/down
//   hsz_network    rank 5: 0 source, 1..4 the four photon channels

#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/register.hpp"
#include "qdn/stage.hpp"

namespace qdn {

/// Tolerance on |psi|^2 sums handed to the builders.
inline constexpr double kAmplitudeNormTolerance = 1e-12;

namespace detail {

inline void require_normalized(std::span<const Complex> amps,
                               const char *what) {
    double n2 = 0.0;
    for (const auto &a : amps) {
        n2 += std::norm(a);
    }
    if (!(std::abs(n2 - 1.0) <= kAmplitudeNormTolerance)) {
        throw ArgumentError(std::string(what) + " has squared norm " +
                            std::to_string(n2) + ", expected 1");
    }
}

inline std::size_t cyclic(long long k, std::size_t m) {
    const long long mm = static_cast<long long>(m);
    return static_cast<std::size_t>(((k % mm) + mm) % mm);
}

} // namespace detail

inline NetworkProgram stern_gerlach(Complex alpha, Complex beta) {
    const Complex pair[] = {alpha, beta};
    detail::require_normalized(pair, "Stern-Gerlach amplitude pair");
    StageMap stage(3, 3,
                   {RewriteRule{0,
                                {RuleTerm{alpha, SignalMonomial{1}},
                                 RuleTerm{beta, SignalMonomial{2}}}}});
    return NetworkProgram(3, SignalMonomial{0}, {std::move(stage)});
}

/// A+_0 -> sum_i psi^i A+_i on a rank-(1+d) register.
inline NetworkProgram pvm_network(std::span<const Complex> psi) {
    if (psi.empty() || psi.size() + 1 > kMaxRank) {
        throw ArgumentError("PVM test needs between 1 and 63 outcomes");
    }
    detail::require_normalized(psi, "PVM amplitude vector");
    const unsigned rank = static_cast<unsigned>(psi.size()) + 1;
    RewriteRule rule{0, {}};
    for (unsigned i = 1; i < rank; ++i) {
        rule.targets.push_back(RuleTerm{psi[i - 1], SignalMonomial::single(i)});
    }
    return NetworkProgram(rank, SignalMonomial{0},
                          {StageMap(rank, rank, {std::move(rule)})});
}

// ---------------------------------------------------------------------------
// Slit experiments

/// Cyclic screen of M sites. The barrier-to-screen amplitude from slit a to
/// detector j is kernel[(a - j) mod M].
struct SlitGeometry {
    unsigned sites = 0;
    std::vector<unsigned> open_slits;
    std::vector<Complex> kernel;
};

/// max_d |sum_k conj(V_k) V_{(k+d) mod M} - delta_{0d}|.
inline double kernel_orthogonality_deviation(std::span<const Complex> kernel) {
    const std::size_t m = kernel.size();
    double worst = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
        Complex sum{};
        for (std::size_t k = 0; k < m; ++k) {
            sum += std::conj(kernel[k]) * kernel[(k + d) % m];
        }
        const double dev = std::abs(sum - (d == 0 ? Complex{1.0} : Complex{}));
        if (!(dev <= worst)) {
            worst = dev;
        }
    }
    return worst;
}

/// Inverse DFT of exp(i * phases[q]); any such kernel is a row of a
/// circulant unitary.
inline std::vector<Complex> kernel_from_spectrum_phases(
    std::span<const double> phases) {
    const std::size_t m = phases.size();
    if (m == 0) {
        throw ArgumentError("kernel needs at least one site");
    }
    std::vector<Complex> v(m);
    for (std::size_t k = 0; k < m; ++k) {
        Complex sum{};
        for (std::size_t q = 0; q < m; ++q) {
            const double angle =
                phases[q] + 2.0 * std::numbers::pi *
                                static_cast<double>((q * k) % m) /
                                static_cast<double>(m);
            sum += std::polar(1.0, angle);
        }
        v[k] = sum / static_cast<double>(m);
    }
    return v;
}

/// Discrete Fresnel propagator: unit-modulus quadratic phase spectrum
/// exp(-i pi strength q^2 / M) with q centred on zero.
inline std::vector<Complex> fresnel_kernel(unsigned sites,
                                           double strength = 1.0) {
    std::vector<double> phases(sites);
    for (unsigned q = 0; q < sites; ++q) {
        const double qc = (2 * q <= sites) ? static_cast<double>(q)
                                           : static_cast<double>(q) - sites;
        phases[q] = -std::numbers::pi * strength * qc * qc / sites;
    }
    return kernel_from_spectrum_phases(phases);
}

/// Unit-modulus chirp V_k = exp(i pi k^2 / M) / sqrt(M) (k(k+1) for odd M).
/// It has the equal-magnitude entries of a Fourier matrix row, but unlike a
/// literal row exp(2 pi i k / M) / sqrt(M) it satisfies the cyclic
/// orthogonality rule.
inline std::vector<Complex> chirp_kernel(unsigned sites) {
    if (sites == 0) {
        throw ArgumentError("kernel needs at least one site");
    }
    const std::uint64_t m = sites;
    std::vector<Complex> v(sites);
    for (std::uint64_t k = 0; k < m; ++k) {
        const std::uint64_t e = (m % 2 == 0) ? (k * k) % (2 * m)
                                             : (k * (k + 1)) % (2 * m);
        v[k] = std::polar(1.0 / std::sqrt(static_cast<double>(m)),
                          std::numbers::pi * static_cast<double>(e) /
                              static_cast<double>(m));
    }
    return v;
}

/// Literal Fourier-matrix row exp(2 pi i k / M) / sqrt(M). Not a valid slit
/// kernel for M > 1; kept so the rejection path can be exercised.
inline std::vector<Complex> dft_row(unsigned sites, unsigned row = 1) {
    std::vector<Complex> v(sites);
    for (unsigned k = 0; k < sites; ++k) {
        v[k] = std::polar(1.0 / std::sqrt(static_cast<double>(sites)),
                          2.0 * std::numbers::pi *
                              static_cast<double>((row * k) % sites) / sites);
    }
    return v;
}

namespace detail {

inline void check_geometry(const SlitGeometry &g) {
    if (g.sites == 0 || g.sites > kMaxRank) {
        throw ArgumentError("slit screen needs between 1 and 64 sites");
    }
    if (g.kernel.size() != g.sites) {
        throw ArgumentError("kernel length " + std::to_string(g.kernel.size()) +
                            " does not match " + std::to_string(g.sites) +
                            " sites");
    }
    if (g.open_slits.empty()) {
        throw ArgumentError("at least one slit must be open");
    }
    std::set<unsigned> seen;
    for (unsigned a : g.open_slits) {
        if (a >= g.sites) {
            throw OutOfRangeError("slit " + std::to_string(a) +
                                  " outside a screen of " +
                                  std::to_string(g.sites) + " sites");
        }
        if (!seen.insert(a).second) {
            throw ArgumentError("slit " + std::to_string(a) +
                                " listed twice");
        }
    }
    const double dev = kernel_orthogonality_deviation(g.kernel);
    if (!(dev <= kValidationTolerance)) {
        throw ValidationError(1, dev,
                              "slit kernel violates the cyclic orthogonality "
                              "rule by " +
                                  std::to_string(dev));
    }
}

} // namespace detail

/// Two stages: source -> open slits with amplitudes `split` (aligned with
/// geometry.open_slits), then slit a -> detector j with kernel[(a-j) mod M].
inline NetworkProgram slit_network(const SlitGeometry &geometry,
                                   std::span<const Complex> split) {
    detail::check_geometry(geometry);
    if (split.size() != geometry.open_slits.size()) {
        throw ArgumentError("split has " + std::to_string(split.size()) +
                            " amplitudes for " +
                            std::to_string(geometry.open_slits.size()) +
                            " open slits");
    }
    detail::require_normalized(split, "slit split");

    const unsigned m = geometry.sites;
    RewriteRule splitting{0, {}};
    for (std::size_t i = 0; i < split.size(); ++i) {
        splitting.targets.push_back(
            RuleTerm{split[i], SignalMonomial::single(geometry.open_slits[i])});
    }
    std::vector<RewriteRule> superposition;
    for (unsigned a = 0; a < m; ++a) {
        RewriteRule rule{a, {}};
        for (unsigned j = 0; j < m; ++j) {
            rule.targets.push_back(RuleTerm{
                geometry.kernel[detail::cyclic(static_cast<long long>(a) - j, m)],
                SignalMonomial::single(j)});
        }
        superposition.push_back(std::move(rule));
    }
    NetworkProgram program(
        1, SignalMonomial{0},
        {StageMap(1, m, {std::move(splitting)}),
         StageMap(m, m, std::move(superposition))});
    require_valid(validate_program(program), kValidationTolerance);
    return program;
}

/// Second slit of a symmetric pair: -s taken modulo M.
inline unsigned mirror_slit(unsigned s, unsigned sites) {
    return static_cast<unsigned>(detail::cyclic(-static_cast<long long>(s), sites));
}

/// Detector probabilities for slits s and -s open, straight from the
/// four-term interference formula.
inline std::vector<double> double_slit_closed_form(const SlitGeometry &geometry,
                                                   unsigned s, Complex psi_s,
                                                   Complex psi_ms) {
    const Complex pair[] = {psi_s, psi_ms};
    detail::require_normalized(pair, "double-slit split");
    const unsigned m = geometry.sites;
    SlitGeometry g = geometry;
    g.open_slits = {s, mirror_slit(s, m)};
    if (s < m && g.open_slits[0] == g.open_slits[1]) {
        throw ArgumentError("slit " + std::to_string(s) +
                            " coincides with its mirror image");
    }
    detail::check_geometry(g);

    const long long ss = s;
    std::vector<double> p(m);
    for (unsigned j = 0; j < m; ++j) {
        const Complex v_s = g.kernel[detail::cyclic(ss - j, m)];
        const Complex v_ms = g.kernel[detail::cyclic(-ss - j, m)];
        const Complex cross = psi_ms * std::conj(psi_s) * v_ms * std::conj(v_s) +
                              std::conj(psi_ms) * psi_s * std::conj(v_ms) * v_s;
        p[j] = std::norm(psi_s) * std::norm(v_s) +
               std::norm(psi_ms) * std::norm(v_ms) + cross.real();
    }
    return p;
}

// ---------------------------------------------------------------------------
// Entanglement

struct EprSettings {
    double theta = 0.0; ///< Bob's polar angle, [0, pi]
    double phi = 0.0;   ///< Bob's azimuth, [0, 2 pi)
};

inline NetworkProgram epr_network(EprSettings settings) {
    const double theta = settings.theta;
    const double phi = settings.phi;
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
        throw ArgumentError("EPR theta must lie in [0, pi]");
    }
    if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi)) {
        throw ArgumentError("EPR phi must lie in [0, 2 pi)");
    }
    const double s = std::sin(theta / 2.0) / std::numbers::sqrt2;
    const double c = std::cos(theta / 2.0) / std::numbers::sqrt2;
    const Complex phase = std::polar(1.0, -phi);
    RewriteRule rule{0,
                     {RuleTerm{s * phase, SignalMonomial{1, 3}},
                      RuleTerm{Complex{s}, SignalMonomial{2, 4}},
                      RuleTerm{c * phase, SignalMonomial{1, 4}},
                      RuleTerm{Complex{-c}, SignalMonomial{2, 3}}}};
    return NetworkProgram(5, SignalMonomial{0},
                          {StageMap(5, 5, {std::move(rule)})});
}

/// Balanced beamsplitters on the given qubit pairs; everything else passes
/// through. Pair (a, b) uses the symmetric matrix (1/sqrt2) [[1, i], [i, 1]]:
/// A+_a -> (A+_a + i A+_b)/sqrt2, A+_b -> (i A+_a + A+_b)/sqrt2.
inline StageMap
beamsplitter_stage(unsigned rank,
                   std::span<const std::pair<unsigned, unsigned>> pairs) {
    const double h = 1.0 / std::numbers::sqrt2;
    const Complex ih{0.0, h};
    std::vector<RewriteRule> rules;
    for (const auto &[a, b] : pairs) {
        rules.push_back(RewriteRule{a,
                                    {RuleTerm{Complex{h}, SignalMonomial::single(a)},
                                     RuleTerm{ih, SignalMonomial::single(b)}}});
        rules.push_back(RewriteRule{b,
                                    {RuleTerm{ih, SignalMonomial::single(a)},
                                     RuleTerm{Complex{h}, SignalMonomial::single(b)}}});
    }
    return StageMap(rank, rank, std::move(rules), Passthrough::identity);
}

/// A+_k -> e^{i phase} A+_k; everything else passes through.
inline StageMap phase_shifter_stage(unsigned rank, unsigned k, double phase) {
    return StageMap(rank, rank,
                    {RewriteRule{k, {RuleTerm{std::polar(1.0, phase),
                                              SignalMonomial::single(k)}}}},
                    Passthrough::identity);
}

/// Beamsplitters mixing channels {1,2} and {3,4} of the two-photon network.
inline StageMap hsz_balanced_beamsplitter() {
    const std::pair<unsigned, unsigned> pairs[] = {{1, 2}, {3, 4}};
    return beamsplitter_stage(5, pairs);
}

/// A+_0 -> (A+_1 A+_3 + e^{i theta} A+_2 A+_4)/sqrt2, followed by optional
/// downstream optics.
inline NetworkProgram hsz_network(double theta,
                                  std::optional<std::vector<StageMap>> downstream =
                                      std::nullopt) {
    const double h = 1.0 / std::numbers::sqrt2;
    std::vector<StageMap> stages;
    stages.push_back(StageMap(
        5, 5,
        {RewriteRule{0,
                     {RuleTerm{Complex{h}, SignalMonomial{1, 3}},
                      RuleTerm{std::polar(h, theta), SignalMonomial{2, 4}}}}}));
    if (downstream) {
        for (auto &s : *downstream) {
            stages.push_back(std::move(s));
        }
    }
    NetworkProgram program(5, SignalMonomial{0}, std::move(stages));
    require_valid(validate_program(program), kValidationTolerance);
    return program;
}

// ---------------------------------------------------------------------------
// Independent experiments

namespace detail {

/// Strict copy of a stage with identity passthrough written out as rules.
inline std::vector<RewriteRule> explicit_rules(const StageMap &stage) {
    std::vector<RewriteRule> rules;
    for (const auto &[k, rule] : stage.rules()) {
        rules.push_back(rule);
    }
    if (stage.passthrough() == Passthrough::identity) {
        const unsigned limit = std::min(stage.input_rank(), stage.output_rank());
        for (unsigned k = 0; k < limit; ++k) {
            if (!stage.find_rule(k)) {
                rules.push_back(RewriteRule{
                    k, {RuleTerm{Complex{1.0}, SignalMonomial::single(k)}}});
            }
        }
    }
    return rules;
}

inline SignalMonomial shifted(SignalMonomial m, unsigned offset) {
    if (m.extent() + offset > kMaxRank) {
        throw OutOfRangeError("offset monomial exceeds 64 qubits");
    }
    return SignalMonomial::from_mask(offset == 0 ? m.mask() : m.mask() << offset);
}

inline std::vector<StageMap> padded_stages(const NetworkProgram &p,
                                           std::size_t count) {
    std::vector<StageMap> stages = p.stages();
    while (stages.size() < count) {
        stages.push_back(StageMap::identity(p.final_rank()));
    }
    return stages;
}

} // namespace detail

/// Runs a and b side by side on one register: b's qubits sit above a's at
/// every stage, and the shorter program is padded with identity stages.
inline NetworkProgram product_network(const NetworkProgram &a,
                                      const NetworkProgram &b) {
    require_valid(validate_program(a), kValidationTolerance);
    require_valid(validate_program(b), kValidationTolerance);
    const std::size_t n = std::max(a.stage_count(), b.stage_count());
    const auto sa = detail::padded_stages(a, n);
    const auto sb = detail::padded_stages(b, n);

    const unsigned r0 = a.initial_rank() + b.initial_rank();
    if (r0 > kMaxRank) {
        throw ArgumentError("product register exceeds 64 qubits");
    }
    const SignalMonomial initial = SignalMonomial::from_mask(
        a.initial().mask() |
        detail::shifted(b.initial(), a.initial_rank()).mask());

    std::vector<StageMap> stages;
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned in_off = sa[i].input_rank();
        const unsigned out_off = sa[i].output_rank();
        const unsigned r_in = in_off + sb[i].input_rank();
        const unsigned r_out = out_off + sb[i].output_rank();
        if (r_out > kMaxRank) {
            throw ArgumentError("product register exceeds 64 qubits");
        }
        std::vector<RewriteRule> rules = detail::explicit_rules(sa[i]);
        std::set<unsigned> used;
        for (const auto &r : rules) {
            used.insert(r.source);
        }
        for (auto rule : detail::explicit_rules(sb[i])) {
            rule.source += in_off;
            for (auto &t : rule.targets) {
                t.monomial = detail::shifted(t.monomial, out_off);
            }
            if (!used.insert(rule.source).second) {
                throw Error("product network: generator collision after offset");
            }
            rules.push_back(std::move(rule));
        }
        stages.emplace_back(r_in, r_out, std::move(rules));
    }
    return NetworkProgram(r0, initial, std::move(stages));
}

} // namespace qdn
