#pragma once

// Random and preset network definition documents for round-trip checks.

#include <bit>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "qdn/experiments.hpp"
#include "qdn/netdef.hpp"

namespace qdn::gen {

inline double odd_double(std::mt19937_64 &rng) {
    static const double specials[] = {
        -0.0,
        0.0,
        0.1,
        1.0 / 3.0,
        std::numeric_limits<double>::denorm_min(),
        std::numeric_limits<double>::min(),
        std::numeric_limits<double>::max(),
        -std::numeric_limits<double>::max(),
        std::numeric_limits<double>::epsilon(),
        1e-300,
        -7.25e17,
        std::numbers::pi,
    };
    switch (rng() % 3) {
    case 0:
        return specials[rng() % std::size(specials)];
    case 1: {
        // Arbitrary finite bit pattern.
        for (;;) {
            const double x = std::bit_cast<double>(static_cast<std::uint64_t>(rng()));
            if (std::isfinite(x)) {
                return x;
            }
        }
    }
    default:
        return std::normal_distribution<double>()(rng);
    }
}

inline std::vector<unsigned> random_monomial(std::mt19937_64 &rng, unsigned rank, bool nonempty) {
    for (;;) {
        std::vector<unsigned> m;
        for (unsigned k = 0; k < rank; ++k) {
            if (rng() % 3 == 0) {
                m.push_back(k);
            }
        }
        if (!nonempty || !m.empty()) {
            return m;
        }
    }
}

inline NetDefDocument random_document(std::mt19937_64 &rng) {
    NetDefDocument doc;
    const unsigned n = static_cast<unsigned>(rng() % 5);
    for (unsigned i = 0; i <= n; ++i) {
        doc.register_ranks.push_back(1 + static_cast<unsigned>(rng() % 7));
    }
    doc.initial = random_monomial(rng, doc.register_ranks.front(), false);
    for (unsigned i = 0; i < n; ++i) {
        NetDefStage stage;
        stage.passthrough = rng() % 2 ? Passthrough::strict : Passthrough::identity;
        for (unsigned k = 0; k < doc.register_ranks[i]; ++k) {
            if (rng() % 2) {
                continue;
            }
            NetDefRule rule;
            rule.from = {k};
            std::set<std::vector<unsigned>> used;
            const unsigned terms = 1 + static_cast<unsigned>(rng() % 3);
            for (unsigned t = 0; t < terms; ++t) {
                auto m = random_monomial(rng, doc.register_ranks[i + 1], true);
                if (used.insert(m).second) {
                    rule.to.push_back(NetDefTerm{odd_double(rng), odd_double(rng), m});
                }
            }
            stage.rules.push_back(std::move(rule));
        }
        doc.stages.push_back(std::move(stage));
    }
    switch (rng() % 3) {
    case 0:
        break;
    case 1:
        doc.queries = NetDefQueries{};
        break;
    default: {
        NetDefQueries q{false, {}};
        const unsigned count = static_cast<unsigned>(rng() % 4);
        for (unsigned i = 0; i < count; ++i) {
            q.monomials.push_back(random_monomial(rng, doc.register_ranks.back(), false));
        }
        doc.queries = q;
    }
    }
    return doc;
}

/// Equality that also distinguishes -0.0 from 0.0.
inline bool bitwise_equal(const NetDefDocument &a, const NetDefDocument &b) {
    if (!(a == b)) {
        return false;
    }
    for (std::size_t s = 0; s < a.stages.size(); ++s) {
        for (std::size_t r = 0; r < a.stages[s].rules.size(); ++r) {
            const auto &ta = a.stages[s].rules[r].to;
            const auto &tb = b.stages[s].rules[r].to;
            for (std::size_t t = 0; t < ta.size(); ++t) {
                if (std::bit_cast<std::uint64_t>(ta[t].re) !=
                        std::bit_cast<std::uint64_t>(tb[t].re) ||
                    std::bit_cast<std::uint64_t>(ta[t].im) !=
                        std::bit_cast<std::uint64_t>(tb[t].im)) {
                    return false;
                }
            }
        }
    }
    return true;
}

inline std::vector<NetworkProgram> preset_programs() {
    const double h = 1.0 / std::numbers::sqrt2;
    const Complex psi[] = {0.6, Complex{0.0, 0.8}};
    const Complex pvm_psi[] = {0.5, Complex{0.0, 0.5}, Complex{-0.5, 0.0}, Complex{0.0, -0.5}};
    const Complex split[] = {h, Complex{0.0, h}};
    return {
        stern_gerlach(psi[0], psi[1]),
        pvm_network(pvm_psi),
        slit_network(SlitGeometry{8, {1, 7}, fresnel_kernel(8)}, split),
        epr_network({1.0, 0.5}),
        hsz_network(0.3, std::vector<StageMap>{hsz_balanced_beamsplitter()}),
        product_network(stern_gerlach(psi[0], psi[1]), epr_network({0.2, 0.0})),
    };
}

} // namespace qdn::gen
