#pragma once

// Stage maps: one discrete time step of a detector network, given as rewrite
// rules that send each creation operator of the input register to a linear
// combination of signal monomials over the output register.
//
// The image of a multi-generator monomial is the distributive product of its
// generators' images; products that would fire a qubit twice vanish.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/register.hpp"

namespace qdn {

/// Default tolerance for semi-unitarity checks.
inline constexpr double kValidationTolerance = 1e-9;
/// Default tolerance for probability identities (sums, oracle agreement).
inline constexpr double kProbabilityTolerance = 1e-12;

struct RuleTerm {
    Complex coefficient;
    SignalMonomial monomial;

    friend bool operator==(const RuleTerm &, const RuleTerm &) = default;
};

/// A+_source -> sum_t coefficient_t * monomial_t.
struct RewriteRule {
    unsigned source = 0;
    std::vector<RuleTerm> targets;

    friend bool operator==(const RewriteRule &, const RewriteRule &) = default;
};

/// What happens to a fired generator that has no rule.
enum class Passthrough {
    strict,   ///< evolution fails with MissingRuleError
    identity, ///< A+_k maps to A+_k on the output register
};

class StageMap {
  public:
    StageMap(unsigned input_rank, unsigned output_rank,
             std::vector<RewriteRule> rules,
             Passthrough passthrough = Passthrough::strict)
        : input_(input_rank), output_(output_rank), passthrough_(passthrough) {
        for (auto &rule : rules) {
            const unsigned src = rule.source;
            if (src >= input_rank) {
                throw OutOfRangeError("rule source " + std::to_string(src) +
                                      " outside rank-" +
                                      std::to_string(input_rank) +
                                      " input register");
            }
            if (rule.targets.empty()) {
                throw ArgumentError("rule for generator " +
                                    std::to_string(src) + " has no targets");
            }
            std::set<std::uint64_t> seen;
            for (const auto &t : rule.targets) {
                if (t.monomial.empty()) {
                    throw ArgumentError("rule for generator " +
                                        std::to_string(src) +
                                        " targets the void monomial");
                }
                if (t.monomial.extent() > output_rank) {
                    throw OutOfRangeError(
                        "rule for generator " + std::to_string(src) +
                        " targets " + t.monomial.to_string() +
                        " outside rank-" + std::to_string(output_rank) +
                        " output register");
                }
                if (!seen.insert(t.monomial.mask()).second) {
                    throw ArgumentError("rule for generator " +
                                        std::to_string(src) +
                                        " repeats target " +
                                        t.monomial.to_string());
                }
            }
            if (!rules_.emplace(src, std::move(rule)).second) {
                throw ArgumentError("duplicate rule for generator " +
                                    std::to_string(src));
            }
        }
    }

    /// Identity stage on a register of the given rank (no rules, identity
    /// passthrough).
    static StageMap identity(unsigned rank) {
        return StageMap(rank, rank, {}, Passthrough::identity);
    }

    unsigned input_rank() const noexcept { return input_.rank(); }
    unsigned output_rank() const noexcept { return output_.rank(); }
    RegisterSpec input_register() const noexcept { return input_; }
    RegisterSpec output_register() const noexcept { return output_; }
    Passthrough passthrough() const noexcept { return passthrough_; }
    const std::map<unsigned, RewriteRule> &rules() const noexcept {
        return rules_;
    }

    const RewriteRule *find_rule(unsigned generator) const {
        auto it = rules_.find(generator);
        return it == rules_.end() ? nullptr : &it->second;
    }

    friend bool operator==(const StageMap &, const StageMap &) = default;

  private:
    RegisterSpec input_;
    RegisterSpec output_;
    std::map<unsigned, RewriteRule> rules_;
    Passthrough passthrough_;
};

/// Sparse image of one basis monomial, ascending by output basis index.
using MonomialImage = std::vector<std::pair<std::uint64_t, Complex>>;

namespace detail {

inline std::vector<RuleTerm> generator_image(const StageMap &stage,
                                             unsigned k) {
    if (const RewriteRule *rule = stage.find_rule(k)) {
        return rule->targets;
    }
    if (stage.passthrough() == Passthrough::strict) {
        throw MissingRuleError(k, "no rule for fired generator " +
                                      std::to_string(k) + " in strict stage");
    }
    if (k >= stage.output_rank()) {
        throw OutOfRangeError("identity passthrough of generator " +
                              std::to_string(k) + " into rank-" +
                              std::to_string(stage.output_rank()) +
                              " output register");
    }
    return {RuleTerm{Complex{1.0, 0.0}, SignalMonomial::single(k)}};
}

} // namespace detail

/// Image of A+_{k1}...A+_{kp}|0) under the stage, expanded distributively.
inline MonomialImage image_of(const StageMap &stage, SignalMonomial m) {
    if (m.extent() > stage.input_rank()) {
        throw OutOfRangeError("monomial " + m.to_string() +
                              " outside rank-" +
                              std::to_string(stage.input_rank()) +
                              " input register");
    }
    std::map<std::uint64_t, Complex> current{{0, Complex{1.0, 0.0}}};
    for (unsigned k : m.indices()) {
        const auto factor = detail::generator_image(stage, k);
        std::map<std::uint64_t, Complex> next;
        for (const auto &[mask, amp] : current) {
            for (const auto &term : factor) {
                if ((mask & term.monomial.mask()) != 0) {
                    continue; // A+_j A+_j = 0
                }
                next[mask | term.monomial.mask()] += amp * term.coefficient;
            }
        }
        current = std::move(next);
    }
    MonomialImage out;
    out.reserve(current.size());
    for (const auto &[mask, amp] : current) {
        if (amp != Complex{}) {
            out.emplace_back(mask, amp);
        }
    }
    return out;
}

/// Applies one stage to a labstate. The void component passes through
/// unchanged.
inline Labstate evolve(const StageMap &stage, const Labstate &state) {
    if (state.register_spec() != stage.input_register()) {
        throw DimensionError("stage expects a rank-" +
                             std::to_string(stage.input_rank()) +
                             " labstate, got rank " +
                             std::to_string(state.rank()));
    }
    std::map<std::uint64_t, Complex> acc;
    for (const auto &[index, amp] : state.terms()) {
        for (const auto &[mask, coeff] :
             image_of(stage, SignalMonomial::from_basis(index))) {
            acc[mask] += amp * coeff;
        }
    }
    return Labstate::from_sorted_map(stage.output_register(), acc);
}

class NetworkProgram {
  public:
    /// Empty program: the prepared state is the final state.
    NetworkProgram(unsigned initial_rank, SignalMonomial initial)
        : NetworkProgram(initial_rank, initial, {}) {}

    NetworkProgram(unsigned initial_rank, SignalMonomial initial,
                   std::vector<StageMap> stages)
        : initial_register_(initial_rank), initial_(initial),
          stages_(std::move(stages)) {
        if (initial.extent() > initial_rank) {
            throw OutOfRangeError("initial monomial " + initial.to_string() +
                                  " outside rank-" +
                                  std::to_string(initial_rank) + " register");
        }
        unsigned rank = initial_rank;
        for (std::size_t n = 0; n < stages_.size(); ++n) {
            if (stages_[n].input_rank() != rank) {
                throw DimensionError(
                    "stage " + std::to_string(n) + " expects input rank " +
                    std::to_string(stages_[n].input_rank()) +
                    " but the previous register has rank " +
                    std::to_string(rank));
            }
            rank = stages_[n].output_rank();
        }
    }

    unsigned initial_rank() const noexcept { return initial_register_.rank(); }
    RegisterSpec initial_register() const noexcept { return initial_register_; }
    SignalMonomial initial() const noexcept { return initial_; }
    const std::vector<StageMap> &stages() const noexcept { return stages_; }
    std::size_t stage_count() const noexcept { return stages_.size(); }

    unsigned final_rank() const noexcept {
        return stages_.empty() ? initial_rank() : stages_.back().output_rank();
    }

    /// r_0, ..., r_N.
    std::vector<unsigned> register_ranks() const {
        std::vector<unsigned> ranks{initial_rank()};
        for (const auto &s : stages_) {
            ranks.push_back(s.output_rank());
        }
        return ranks;
    }

    /// Same stages, different preparation.
    NetworkProgram with_initial(SignalMonomial initial) const {
        return NetworkProgram(initial_rank(), initial, stages_);
    }

    friend bool operator==(const NetworkProgram &,
                           const NetworkProgram &) = default;

  private:
    RegisterSpec initial_register_;
    SignalMonomial initial_;
    std::vector<StageMap> stages_;
};

/// The labstate right after the preparation switch is thrown.
inline Labstate prepare(const NetworkProgram &program) {
    return basis_state(program.initial_register(), program.initial());
}

/// Applies stages in order without validating them.
inline Labstate run_stages(std::span<const StageMap> stages, Labstate state) {
    for (const auto &stage : stages) {
        state = evolve(stage, state);
    }
    return state;
}

struct ValidationReport {
    bool passed = false;
    /// Largest |G_ab - delta_ab| over every Gram matrix checked.
    double max_gram_deviation = 0.0;
    /// Monomials whose images were tested. For a program this concatenates
    /// the per-stage domains in stage order.
    std::vector<SignalMonomial> checked_domain;
    /// Deviation per checked stage (one entry for a single-stage check).
    std::vector<double> stage_deviations;
    /// First stage whose deviation exceeded the tolerance.
    std::optional<std::size_t> failing_stage;
};

namespace detail {

inline Complex sparse_dot(const MonomialImage &x, const MonomialImage &y) {
    Complex sum{};
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].first < y[j].first) {
            ++i;
        } else if (y[j].first < x[i].first) {
            ++j;
        } else {
            sum += std::conj(x[i].second) * y[j].second;
            ++i;
            ++j;
        }
    }
    return sum;
}

inline double gram_deviation(const std::vector<MonomialImage> &images) {
    double worst = 0.0;
    for (std::size_t a = 0; a < images.size(); ++a) {
        for (std::size_t b = a; b < images.size(); ++b) {
            const Complex g = sparse_dot(images[a], images[b]);
            const Complex expected = (a == b) ? Complex{1.0} : Complex{};
            const double dev = std::abs(g - expected);
            if (!(dev <= worst)) {
                worst = dev; // NaN propagates
            }
        }
    }
    return worst;
}

} // namespace detail

/// Checks that the images of `domain` are orthonormal.
inline ValidationReport validate_stage(const StageMap &stage,
                                       std::span<const SignalMonomial> domain,
                                       double tolerance = kValidationTolerance) {
    if (domain.empty()) {
        throw ArgumentError("validation domain is empty");
    }
    std::vector<MonomialImage> images;
    images.reserve(domain.size());
    for (const auto &m : domain) {
        images.push_back(image_of(stage, m));
    }
    ValidationReport report;
    report.max_gram_deviation = detail::gram_deviation(images);
    report.stage_deviations.push_back(report.max_gram_deviation);
    report.checked_domain.assign(domain.begin(), domain.end());
    report.passed = report.max_gram_deviation <= tolerance;
    if (!report.passed) {
        report.failing_stage = 0;
    }
    return report;
}

/// Default domain: every single generator that has a rule.
inline ValidationReport validate_stage(const StageMap &stage,
                                       double tolerance = kValidationTolerance) {
    std::vector<SignalMonomial> domain;
    for (const auto &[k, rule] : stage.rules()) {
        domain.push_back(SignalMonomial::single(k));
    }
    return validate_stage(stage, domain, tolerance);
}

/// Propagates the reachable monomial support from `initial_support` and
/// checks each stage's Gram matrix on what it actually receives. Stops at the
/// first failing stage.
inline ValidationReport
validate_program(const NetworkProgram &program,
                 std::span<const SignalMonomial> initial_support,
                 double tolerance = kValidationTolerance) {
    ValidationReport report;
    report.passed = true;
    std::set<SignalMonomial> support(initial_support.begin(),
                                     initial_support.end());
    for (const auto &m : support) {
        if (m.extent() > program.initial_rank()) {
            throw OutOfRangeError("domain monomial " + m.to_string() +
                                  " outside rank-" +
                                  std::to_string(program.initial_rank()) +
                                  " register");
        }
    }
    for (std::size_t n = 0; n < program.stage_count(); ++n) {
        const StageMap &stage = program.stages()[n];
        std::vector<MonomialImage> images;
        std::set<SignalMonomial> next;
        for (const auto &m : support) {
            report.checked_domain.push_back(m);
            images.push_back(image_of(stage, m));
            for (const auto &[mask, amp] : images.back()) {
                next.insert(SignalMonomial::from_mask(mask));
            }
        }
        const double dev = detail::gram_deviation(images);
        report.stage_deviations.push_back(dev);
        if (!(dev <= report.max_gram_deviation)) {
            report.max_gram_deviation = dev;
        }
        if (!(dev <= tolerance)) {
            report.passed = false;
            report.failing_stage = n;
            return report;
        }
        support = std::move(next);
    }
    return report;
}

inline ValidationReport
validate_program(const NetworkProgram &program,
                 double tolerance = kValidationTolerance) {
    const SignalMonomial initial = program.initial();
    return validate_program(program, std::span<const SignalMonomial>(&initial, 1),
                            tolerance);
}

inline void require_valid(const ValidationReport &report, double tolerance) {
    if (report.passed) {
        return;
    }
    const std::size_t stage = report.failing_stage.value_or(0);
    throw ValidationError(stage, report.max_gram_deviation,
                          "stage " + std::to_string(stage) +
                              " fails semi-unitarity: Gram deviation " +
                              std::to_string(report.max_gram_deviation) +
                              " exceeds tolerance " +
                              std::to_string(tolerance));
}

struct Outcome {
    BasisIndex index;
    Complex amplitude;
    double probability = 0.0;

    SignalMonomial monomial() const { return SignalMonomial::from_basis(index); }

    friend bool operator==(const Outcome &, const Outcome &) = default;
};

/// Outcome monomial -> Born probability, sorted by basis index.
struct ProbabilityTable {
    unsigned rank = 1;
    std::vector<Outcome> outcomes;

    /// Probability of an outcome; zero when it is absent.
    double probability(SignalMonomial m) const {
        for (const auto &o : outcomes) {
            if (o.index.value == m.mask()) {
                return o.probability;
            }
        }
        return 0.0;
    }

    double total() const {
        double sum = 0.0;
        for (const auto &o : outcomes) {
            sum += o.probability;
        }
        return sum;
    }

    friend bool operator==(const ProbabilityTable &,
                           const ProbabilityTable &) = default;
};

inline ProbabilityTable probability_table(const Labstate &state) {
    ProbabilityTable table;
    table.rank = state.rank();
    table.outcomes.reserve(state.size());
    for (const auto &[index, amp] : state.terms()) {
        table.outcomes.push_back(Outcome{index, amp, std::norm(amp)});
    }
    return table;
}

/// Restricts a table to the queried outcomes (absent ones get amplitude 0).
inline ProbabilityTable select_outcomes(const ProbabilityTable &table,
                                        std::span<const SignalMonomial> query) {
    std::set<SignalMonomial> wanted(query.begin(), query.end());
    ProbabilityTable out;
    out.rank = table.rank;
    for (const auto &m : wanted) {
        if (m.extent() > table.rank) {
            throw OutOfRangeError("queried outcome " + m.to_string() +
                                  " outside rank-" +
                                  std::to_string(table.rank) + " register");
        }
        Outcome o{BasisIndex{m.mask()}, Complex{}, 0.0};
        for (const auto &row : table.outcomes) {
            if (row.index == o.index) {
                o = row;
                break;
            }
        }
        out.outcomes.push_back(o);
    }
    return out;
}

struct RunResult {
    Labstate final_state;
    ProbabilityTable table;
};

/// Validates, prepares and evolves. Throws ValidationError naming the first
/// stage that does not conserve probability.
inline RunResult run_program(const NetworkProgram &program,
                             double tolerance = kValidationTolerance) {
    require_valid(validate_program(program, tolerance), tolerance);
    Labstate final_state = run_stages(program.stages(), prepare(program));
    ProbabilityTable table = probability_table(final_state);
    return {std::move(final_state), std::move(table)};
}

} // namespace qdn
