#pragma once

// Dense reference simulator. Every register is held as a full 2^r amplitude
// array and every rule is applied as a creation-weighted sum over the whole
// array, so it shares no code path with the sparse evolution. Only usable for
// small registers.

#include <cstdint>
#include <string>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/stage.hpp"

namespace qdn {

inline constexpr unsigned kDenseOracleMaxRank = 20;

namespace detail {

inline void require_dense_rank(unsigned rank) {
    if (rank > kDenseOracleMaxRank) {
        throw ResourceError("dense oracle limited to rank " +
                            std::to_string(kDenseOracleMaxRank) +
                            " registers, got rank " + std::to_string(rank));
    }
}

/// Applies sum_t c_t A+_{monomial_t} to a dense vector.
inline std::vector<Complex> dense_apply_sum(const std::vector<Complex> &v,
                                            const std::vector<RuleTerm> &terms) {
    std::vector<Complex> w(v.size());
    for (std::uint64_t idx = 0; idx < v.size(); ++idx) {
        if (v[idx] == Complex{}) {
            continue;
        }
        for (const auto &t : terms) {
            const std::uint64_t m = t.monomial.mask();
            if ((idx & m) == 0) {
                w[idx | m] += t.coefficient * v[idx];
            }
        }
    }
    return w;
}

} // namespace detail

/// Final dense amplitude vector of a program (no validation).
inline std::vector<Complex> dense_run(const NetworkProgram &program) {
    detail::require_dense_rank(program.initial_rank());
    std::vector<Complex> v(std::size_t{1} << program.initial_rank());
    v[program.initial().mask()] = Complex{1.0};
    for (const auto &stage : program.stages()) {
        detail::require_dense_rank(stage.output_rank());
        const std::size_t out_dim = std::size_t{1} << stage.output_rank();
        std::vector<Complex> w(out_dim);
        for (std::uint64_t b = 0; b < v.size(); ++b) {
            if (v[b] == Complex{}) {
                continue;
            }
            std::vector<Complex> image(out_dim);
            image[0] = Complex{1.0};
            for (unsigned k = 0; k < stage.input_rank(); ++k) {
                if (((b >> k) & 1U) == 0) {
                    continue;
                }
                std::vector<RuleTerm> terms;
                if (const RewriteRule *rule = stage.find_rule(k)) {
                    terms = rule->targets;
                } else if (stage.passthrough() == Passthrough::identity &&
                           k < stage.output_rank()) {
                    terms.push_back(
                        RuleTerm{Complex{1.0}, SignalMonomial::single(k)});
                } else {
                    throw MissingRuleError(
                        k, "dense oracle: no image for generator " +
                               std::to_string(k));
                }
                image = detail::dense_apply_sum(image, terms);
            }
            for (std::size_t j = 0; j < out_dim; ++j) {
                w[j] += v[b] * image[j];
            }
        }
        v = std::move(w);
    }
    return v;
}

} // namespace qdn
