#pragma once

// Discrete path integrals over rank-1 programs. When every rule sends one
// generator to a combination of single generators, stage n is an
// r_{n-1} x r_n matrix U^(n) and the amplitude from generator i0 to
// generator iN is
//
//   A(i0, iN) = sum over i1..i_{N-1} of U^(1)_{i0 i1} ... U^(N)_{i_{N-1} iN}.
//
// path_amplitude_propagate evaluates this by vector-matrix products;
// path_amplitude_enumerate walks every path and serves as its oracle.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/register.hpp"
#include "qdn/stage.hpp"

namespace qdn {

inline constexpr std::uint64_t kDefaultPathCap = 10'000'000;

/// True when every rule target is a single generator.
inline bool is_rank_one(const StageMap &stage) {
    for (const auto &[k, rule] : stage.rules()) {
        for (const auto &t : rule.targets) {
            if (t.monomial.rank() != 1) {
                return false;
            }
        }
    }
    return true;
}

inline bool is_rank_one(const NetworkProgram &program) {
    for (const auto &s : program.stages()) {
        if (!is_rank_one(s)) {
            return false;
        }
    }
    return true;
}

namespace detail {

inline void require_rank_one(std::span<const StageMap> stages) {
    for (std::size_t n = 0; n < stages.size(); ++n) {
        if (!is_rank_one(stages[n])) {
            throw UnsupportedStructureError(
                "stage " + std::to_string(n) +
                " has a multi-generator target; path amplitudes need rank-1 "
                "stages");
        }
    }
}

inline void check_endpoints(const NetworkProgram &program, unsigned i0,
                            unsigned iN) {
    if (i0 >= program.initial_rank()) {
        throw OutOfRangeError("source generator " + std::to_string(i0) +
                              " outside rank-" +
                              std::to_string(program.initial_rank()) +
                              " register");
    }
    if (iN >= program.final_rank()) {
        throw OutOfRangeError("target generator " + std::to_string(iN) +
                              " outside rank-" +
                              std::to_string(program.final_rank()) +
                              " register");
    }
}

/// Dense row-major r_in x r_out coefficient matrix of a rank-1 stage.
/// Generators with no rule in a strict stage contribute a zero row.
inline std::vector<Complex> stage_matrix(const StageMap &stage) {
    const unsigned rows = stage.input_rank();
    const unsigned cols = stage.output_rank();
    std::vector<Complex> u(static_cast<std::size_t>(rows) * cols);
    for (unsigned i = 0; i < rows; ++i) {
        if (const RewriteRule *rule = stage.find_rule(i)) {
            for (const auto &t : rule->targets) {
                const unsigned j = t.monomial.indices().front();
                u[static_cast<std::size_t>(i) * cols + j] = t.coefficient;
            }
        } else if (stage.passthrough() == Passthrough::identity && i < cols) {
            u[static_cast<std::size_t>(i) * cols + i] = Complex{1.0};
        }
    }
    return u;
}

/// U_{ij} read straight from the rule list.
inline Complex rule_coefficient(const StageMap &stage, unsigned i,
                                unsigned j) {
    if (const RewriteRule *rule = stage.find_rule(i)) {
        for (const auto &t : rule->targets) {
            if (t.monomial == SignalMonomial::single(j)) {
                return t.coefficient;
            }
        }
        return {};
    }
    if (stage.passthrough() == Passthrough::identity && i == j &&
        j < stage.output_rank()) {
        return Complex{1.0};
    }
    return {};
}

} // namespace detail

/// A(i0, iN) by sequential vector-matrix propagation, O(sum r_{n-1} r_n).
inline Complex path_amplitude_propagate(const NetworkProgram &program,
                                        unsigned i0, unsigned iN) {
    detail::require_rank_one(program.stages());
    detail::check_endpoints(program, i0, iN);
    std::vector<Complex> v(program.initial_rank());
    v[i0] = Complex{1.0};
    for (const auto &stage : program.stages()) {
        const auto u = detail::stage_matrix(stage);
        const unsigned cols = stage.output_rank();
        std::vector<Complex> w(cols);
        for (unsigned i = 0; i < v.size(); ++i) {
            if (v[i] == Complex{}) {
                continue;
            }
            for (unsigned j = 0; j < cols; ++j) {
                w[j] += v[i] * u[static_cast<std::size_t>(i) * cols + j];
            }
        }
        v = std::move(w);
    }
    return v[iN];
}

/// A(i0, iN) by explicit enumeration of every intermediate index tuple.
/// Throws ResourceError when the number of paths exceeds `path_cap`.
inline Complex path_amplitude_enumerate(const NetworkProgram &program,
                                        unsigned i0, unsigned iN,
                                        std::uint64_t path_cap = kDefaultPathCap) {
    detail::require_rank_one(program.stages());
    detail::check_endpoints(program, i0, iN);
    const auto &stages = program.stages();
    const std::size_t n_stages = stages.size();
    if (n_stages == 0) {
        return i0 == iN ? Complex{1.0} : Complex{};
    }

    // Intermediate registers r_1 .. r_{N-1}.
    std::vector<unsigned> radix;
    std::uint64_t paths = 1;
    for (std::size_t n = 0; n + 1 < n_stages; ++n) {
        const unsigned r = stages[n].output_rank();
        radix.push_back(r);
        if (paths > path_cap / r) {
            throw ResourceError("path enumeration exceeds the cap of " +
                                std::to_string(path_cap) + " paths");
        }
        paths *= r;
    }

    std::vector<unsigned> idx(radix.size(), 0);
    Complex sum{};
    for (std::uint64_t p = 0; p < paths; ++p) {
        Complex product = Complex{1.0};
        unsigned from = i0;
        for (std::size_t n = 0; n < n_stages; ++n) {
            const unsigned to = (n + 1 < n_stages) ? idx[n] : iN;
            product *= detail::rule_coefficient(stages[n], from, to);
            if (product == Complex{}) {
                break;
            }
            from = to;
        }
        sum += product;
        // Odometer, last intermediate index fastest.
        for (std::size_t d = radix.size(); d-- > 0;) {
            if (++idx[d] < radix[d]) {
                break;
            }
            idx[d] = 0;
        }
    }
    return sum;
}

/// Amplitude from source monomial S to target monomial T through rank-1
/// stages, by brute force over joint paths of |S| labelled signals. A joint
/// path contributes only if the signals occupy distinct qubits at every stage
/// (a qubit cannot fire twice), matching the nilpotent product expansion.
inline Complex monomial_path_amplitude_enumerate(
    std::span<const StageMap> stages, SignalMonomial source,
    SignalMonomial target, std::uint64_t path_cap = kDefaultPathCap) {
    detail::require_rank_one(stages);
    if (source.rank() != target.rank()) {
        return {};
    }
    const std::vector<unsigned> start = source.indices();
    const std::size_t p = start.size();
    const std::size_t n_stages = stages.size();
    if (n_stages == 0) {
        return source == target ? Complex{1.0} : Complex{};
    }

    // One digit per (stage, signal); final-stage digits range over the
    // output register and are filtered against the target afterwards.
    std::vector<unsigned> radix;
    std::uint64_t paths = 1;
    for (std::size_t n = 0; n < n_stages; ++n) {
        for (std::size_t s = 0; s < p; ++s) {
            const unsigned r = stages[n].output_rank();
            radix.push_back(r);
            if (paths > path_cap / r) {
                throw ResourceError("joint path enumeration exceeds the cap of " +
                                    std::to_string(path_cap) + " paths");
            }
            paths *= r;
        }
    }

    std::vector<unsigned> idx(radix.size(), 0);
    Complex sum{};
    for (std::uint64_t q = 0; q < paths; ++q) {
        bool alive = true;
        std::vector<unsigned> at = start;
        Complex product{1.0};
        for (std::size_t n = 0; n < n_stages && alive; ++n) {
            std::uint64_t occupied = 0;
            for (std::size_t s = 0; s < p; ++s) {
                const unsigned to = idx[n * p + s];
                const std::uint64_t bit = std::uint64_t{1} << to;
                if ((occupied & bit) != 0) {
                    alive = false;
                    break;
                }
                occupied |= bit;
                product *= detail::rule_coefficient(stages[n], at[s], to);
                at[s] = to;
            }
            if (alive && n + 1 == n_stages && occupied != target.mask()) {
                alive = false;
            }
            if (product == Complex{}) {
                alive = false;
            }
        }
        if (alive) {
            sum += product;
        }
        for (std::size_t d = radix.size(); d-- > 0;) {
            if (++idx[d] < radix[d]) {
                break;
            }
            idx[d] = 0;
        }
    }
    return sum;
}

/// Brute-force amplitude of `outcome` in the final labstate of a program
/// whose stages after the first are rank-1. The first stage may carry
/// multi-generator targets; its image of the initial monomial is expanded
/// term by term, and each term is pushed through the remaining stages by
/// joint path enumeration.
inline Complex path_sum_oracle(const NetworkProgram &program,
                               SignalMonomial outcome,
                               std::uint64_t path_cap = kDefaultPathCap) {
    const auto &stages = program.stages();
    if (stages.empty()) {
        return program.initial() == outcome ? Complex{1.0} : Complex{};
    }
    const std::span<const StageMap> rest(stages.begin() + 1, stages.end());
    detail::require_rank_one(rest);

    // One rule term chosen per fired generator of the initial monomial.
    const StageMap &first = stages.front();
    std::vector<std::vector<RuleTerm>> factors;
    for (unsigned k : program.initial().indices()) {
        if (const RewriteRule *rule = first.find_rule(k)) {
            factors.push_back(rule->targets);
        } else if (first.passthrough() == Passthrough::identity &&
                   k < first.output_rank()) {
            factors.push_back({RuleTerm{Complex{1.0}, SignalMonomial::single(k)}});
        } else {
            throw MissingRuleError(k, "path oracle: no rule for generator " +
                                          std::to_string(k));
        }
    }
    std::vector<std::size_t> choice(factors.size(), 0);
    Complex sum{};
    while (true) {
        Complex coeff{1.0};
        std::uint64_t mask = 0;
        bool alive = true;
        for (std::size_t f = 0; f < factors.size(); ++f) {
            const RuleTerm &t = factors[f][choice[f]];
            if ((mask & t.monomial.mask()) != 0) {
                alive = false;
                break;
            }
            mask |= t.monomial.mask();
            coeff *= t.coefficient;
        }
        if (alive) {
            sum += coeff * monomial_path_amplitude_enumerate(
                               rest, SignalMonomial::from_mask(mask), outcome,
                               path_cap);
        }
        std::size_t f = factors.size();
        while (f-- > 0) {
            if (++choice[f] < factors[f].size()) {
                break;
            }
            choice[f] = 0;
        }
        if (f == static_cast<std::size_t>(-1)) {
            break;
        }
    }
    return sum;
}

} // namespace qdn
