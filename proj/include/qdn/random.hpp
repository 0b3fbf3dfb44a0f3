#pragma once

// Seeded generators for semi-unitary stages and programs. Used by tests and
// by the CLI oracle mode; output depends only on the seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/stage.hpp"

namespace qdn {

namespace detail {

/// Orthonormalizes the rows of a row-major rows x cols matrix in place
/// (modified Gram-Schmidt, two passes).
inline void orthonormalize_rows(std::vector<Complex> &a, unsigned rows,
                                unsigned cols) {
    auto row = [&](unsigned i, unsigned j) -> Complex & {
        return a[static_cast<std::size_t>(i) * cols + j];
    };
    for (unsigned i = 0; i < rows; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            for (unsigned k = 0; k < i; ++k) {
                Complex proj{};
                for (unsigned j = 0; j < cols; ++j) {
                    proj += std::conj(row(k, j)) * row(i, j);
                }
                for (unsigned j = 0; j < cols; ++j) {
                    row(i, j) -= proj * row(k, j);
                }
            }
        }
        double n2 = 0.0;
        for (unsigned j = 0; j < cols; ++j) {
            n2 += std::norm(row(i, j));
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (unsigned j = 0; j < cols; ++j) {
            row(i, j) *= inv;
        }
    }
}

} // namespace detail

/// Rank-1 strict stage whose r_in x r_out coefficient matrix has orthonormal
/// rows, obtained by orthonormalizing a seeded complex Gaussian matrix.
inline StageMap random_semi_unitary(unsigned r_in, unsigned r_out,
                                    std::uint64_t seed) {
    if (r_out < r_in) {
        throw InfeasibleError("no " + std::to_string(r_in) +
                              " orthonormal rows exist in dimension " +
                              std::to_string(r_out));
    }
    static_cast<void>(RegisterSpec{r_in});
    static_cast<void>(RegisterSpec{r_out});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> a(static_cast<std::size_t>(r_in) * r_out);
    for (auto &z : a) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        z = Complex{re, im};
    }
    detail::orthonormalize_rows(a, r_in, r_out);

    std::vector<RewriteRule> rules;
    for (unsigned i = 0; i < r_in; ++i) {
        RewriteRule rule{i, {}};
        for (unsigned j = 0; j < r_out; ++j) {
            rule.targets.push_back(RuleTerm{
                a[static_cast<std::size_t>(i) * r_out + j],
                SignalMonomial::single(j)});
        }
        rules.push_back(std::move(rule));
    }
    StageMap stage(r_in, r_out, std::move(rules));
    if (!validate_stage(stage, 1e-12).passed) {
        throw Error("random semi-unitary stage failed its own Gram check");
    }
    return stage;
}

struct RandomProgramShape {
    unsigned max_stages = 5;    ///< N is drawn from [min_stages, max_stages]
    unsigned min_stages = 1;
    unsigned max_rank = 4;      ///< r_n <= max_rank
    unsigned min_initial_rank = 1;
};

/// Chain of random semi-unitary stages with non-decreasing ranks, prepared
/// on generator 0.
inline NetworkProgram random_program(std::uint64_t seed,
                                     RandomProgramShape shape = {}) {
    if (shape.min_initial_rank > shape.max_rank ||
        shape.min_stages > shape.max_stages) {
        throw ArgumentError("inconsistent random program shape");
    }
    std::mt19937_64 rng(seed);
    auto draw = [&](unsigned lo, unsigned hi) {
        return std::uniform_int_distribution<unsigned>(lo, hi)(rng);
    };
    const unsigned n_stages = draw(shape.min_stages, shape.max_stages);
    unsigned rank = draw(shape.min_initial_rank, shape.max_rank);
    const unsigned initial_rank = rank;
    std::vector<StageMap> stages;
    for (unsigned n = 0; n < n_stages; ++n) {
        const unsigned next = draw(rank, shape.max_rank);
        stages.push_back(random_semi_unitary(rank, next, rng()));
        rank = next;
    }
    return NetworkProgram(initial_rank, SignalMonomial::single(0),
                          std::move(stages));
}

} // namespace qdn
