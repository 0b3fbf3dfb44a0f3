#include <random>

#include <gtest/gtest.h>

#include "qdn/experiments.hpp"
#include "qdn/povm.hpp"
#include "qdn/random.hpp"
#include "test_support.hpp"

using namespace qdn;

TEST(EffectivePovm, SternGerlachSingleSource) {
    const Complex alpha{0.6, 0.0};
    const Complex beta{0.0, 0.8};
    const unsigned sources[] = {0};
    const auto povm = effective_povm(stern_gerlach(alpha, beta), sources);
    ASSERT_EQ(povm.size(), 2U);
    EXPECT_EQ(povm[0].outcome, SignalMonomial{1});
    EXPECT_EQ(povm[1].outcome, SignalMonomial{2});
    EXPECT_NEAR(povm[0].effect(0, 0).real(), std::norm(alpha), 1e-15);
    EXPECT_NEAR(povm[1].effect(0, 0).real(), std::norm(beta), 1e-15);
    ComplexMatrix sum(1);
    for (const auto &e : povm) {
        sum += e.effect;
    }
    EXPECT_LE(sum.max_abs_difference(ComplexMatrix::identity(1)), 1e-15);
}

TEST(EffectivePovm, IdentityProgramGivesDiagonalProjectors) {
    const NetworkProgram program(3, SignalMonomial{0}, {StageMap::identity(3)});
    const unsigned sources[] = {0, 1, 2};
    const auto povm = effective_povm(program, sources);
    ASSERT_EQ(povm.size(), 3U);
    for (std::size_t o = 0; o < 3; ++o) {
        EXPECT_EQ(povm[o].outcome, SignalMonomial::single(static_cast<unsigned>(o)));
        ComplexMatrix expected(3);
        expected(o, o) = Complex{1.0};
        EXPECT_EQ(povm[o].effect.max_abs_difference(expected), 0.0);
    }
}

TEST(EffectivePovm, CompletenessAndBornAgreement) {
    std::mt19937_64 rng(77);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const NetworkProgram program = random_program(
            seed, RandomProgramShape{.max_stages = 4, .min_stages = 1, .max_rank = 5,
                                     .min_initial_rank = 3});
        const unsigned sources[] = {0, 1, 2};
        const auto povm = effective_povm(program, sources);

        ComplexMatrix sum(3);
        for (const auto &e : povm) {
            sum += e.effect;
        }
        EXPECT_LE(sum.max_abs_difference(ComplexMatrix::identity(3)), 1e-9);

        // P(o) for a superposed preparation, evolved directly.
        const auto c = gen::random_unit_vector(rng, 3);
        const Labstate prepared = Labstate::from_terms(
            program.initial_register(),
            {{BasisIndex{1}, c[0]}, {BasisIndex{2}, c[1]}, {BasisIndex{4}, c[2]}});
        const Labstate out = run_stages(program.stages(), prepared);
        for (const auto &e : povm) {
            const double direct = born_probability(out, e.outcome);
            const Complex quad = e.effect.quadratic_form(c);
            EXPECT_NEAR(quad.real(), direct, 1e-12);
            EXPECT_NEAR(quad.imag(), 0.0, 1e-12);
            EXPECT_GE(quad.real(), -1e-15);
        }
    }
}

TEST(EffectivePovm, ValidationFailurePropagates) {
    // Sources 1 and 2 both land on qubit 1.
    const NetworkProgram program(
        3, SignalMonomial{1},
        {StageMap(3, 3, {RewriteRule{1, {RuleTerm{1.0, SignalMonomial{1}}}},
                         RewriteRule{2, {RuleTerm{1.0, SignalMonomial{1}}}}})});
    const unsigned sources[] = {1, 2};
    EXPECT_THROW(effective_povm(program, sources), ValidationError);
    const unsigned bad[] = {3};
    EXPECT_THROW(effective_povm(program, bad), OutOfRangeError);
    EXPECT_THROW(effective_povm(program, std::span<const unsigned>{}), ArgumentError);
}
