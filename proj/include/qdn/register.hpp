#pragma once

// Quantum registers of detector qubits, their computational basis, and sparse
// labstates over that basis.
//
// Basis indices are little-endian: qubit k fired contributes 2^k, so the
// state with only qubit 0 fired is |1) and the void state is |0).

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdn/errors.hpp"

namespace qdn {

using Complex = std::complex<double>;

inline constexpr unsigned kMaxRank = 64;

/// Default tolerance for the unit-norm precondition of probability queries.
inline constexpr double kNormTolerance = 1e-9;

class RegisterSpec {
  public:
    explicit RegisterSpec(unsigned rank) : rank_(rank) {
        if (rank < 1 || rank > kMaxRank) {
            throw ArgumentError("register rank must lie in [1, 64], got " +
                                std::to_string(rank));
        }
    }

    unsigned rank() const noexcept { return rank_; }

    /// True when `index` < 2^rank.
    bool contains(std::uint64_t index) const noexcept {
        return rank_ == kMaxRank || (index >> rank_) == 0;
    }

    friend bool operator==(const RegisterSpec &, const RegisterSpec &) = default;

  private:
    unsigned rank_;
};

/// A computational-basis label |a) of some register.
struct BasisIndex {
    std::uint64_t value = 0;

    constexpr BasisIndex() = default;
    constexpr explicit BasisIndex(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(const BasisIndex &,
                                      const BasisIndex &) = default;
};

/// A product of distinct creation operators A+_{k1} ... A+_{kp} acting on the
/// void. Stored as a bitmask; the canonical index list is ascending.
class SignalMonomial {
  public:
    constexpr SignalMonomial() = default;

    /// Requires strictly ascending indices, each below 64.
    SignalMonomial(std::initializer_list<unsigned> indices)
        : SignalMonomial(std::span<const unsigned>(indices.begin(),
                                                   indices.size())) {}

    explicit SignalMonomial(std::span<const unsigned> indices) {
        bool first = true;
        unsigned previous = 0;
        for (unsigned k : indices) {
            if (k >= kMaxRank) {
                throw OutOfRangeError("qubit index " + std::to_string(k) +
                                      " exceeds the 64-qubit limit");
            }
            if (!first && k <= previous) {
                throw ArgumentError(
                    "monomial indices must be strictly ascending");
            }
            mask_ |= std::uint64_t{1} << k;
            previous = k;
            first = false;
        }
    }

    static constexpr SignalMonomial from_mask(std::uint64_t mask) {
        SignalMonomial m;
        m.mask_ = mask;
        return m;
    }

    static constexpr SignalMonomial from_basis(BasisIndex index) {
        return from_mask(index.value);
    }

    static SignalMonomial single(unsigned k) {
        if (k >= kMaxRank) {
            throw OutOfRangeError("qubit index " + std::to_string(k) +
                                  " exceeds the 64-qubit limit");
        }
        return from_mask(std::uint64_t{1} << k);
    }

    constexpr std::uint64_t mask() const noexcept { return mask_; }

    /// Number of creation operators p.
    constexpr unsigned rank() const noexcept {
        return static_cast<unsigned>(std::popcount(mask_));
    }

    constexpr bool empty() const noexcept { return mask_ == 0; }

    constexpr bool contains(unsigned k) const noexcept {
        return k < kMaxRank && ((mask_ >> k) & 1U) != 0;
    }

    /// Highest fired index plus one; 0 for the empty monomial.
    constexpr unsigned extent() const noexcept {
        return static_cast<unsigned>(std::bit_width(mask_));
    }

    std::vector<unsigned> indices() const {
        std::vector<unsigned> out;
        out.reserve(rank());
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
            out.push_back(static_cast<unsigned>(std::countr_zero(m)));
        }
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (unsigned k : indices()) {
            if (!first) {
                s += ",";
            }
            s += std::to_string(k);
            first = false;
        }
        return s + "}";
    }

    friend constexpr bool operator==(const SignalMonomial &,
                                     const SignalMonomial &) = default;
    friend constexpr auto operator<=>(const SignalMonomial &a,
                                      const SignalMonomial &b) {
        return a.mask_ <=> b.mask_;
    }

  private:
    std::uint64_t mask_ = 0;
};

/// Basis index of A+_{k1} ... A+_{kp} |0), i.e. the sum of 2^k over the
/// monomial's indices.
inline BasisIndex encode_monomial(SignalMonomial m, RegisterSpec reg) {
    if (m.extent() > reg.rank()) {
        throw OutOfRangeError("monomial " + m.to_string() +
                              " does not fit a rank-" +
                              std::to_string(reg.rank()) + " register");
    }
    return BasisIndex{m.mask()};
}

/// Sparse amplitude vector over the basis of one register. Amplitudes that
/// are exactly zero are never stored.
class Labstate {
  public:
    using Term = std::pair<BasisIndex, Complex>;

    /// The zero vector.
    explicit Labstate(RegisterSpec reg) : reg_(reg) {}

    /// Accumulates duplicate indices and drops exact zeros.
    static Labstate from_terms(RegisterSpec reg, std::span<const Term> terms) {
        std::map<std::uint64_t, Complex> acc;
        for (const auto &[index, amp] : terms) {
            if (!reg.contains(index.value)) {
                throw OutOfRangeError("basis index " +
                                      std::to_string(index.value) +
                                      " outside rank-" +
                                      std::to_string(reg.rank()) + " register");
            }
            acc[index.value] += amp;
        }
        return from_sorted_map(reg, acc);
    }

    static Labstate from_terms(RegisterSpec reg,
                               std::initializer_list<Term> terms) {
        return from_terms(reg, std::span<const Term>(terms.begin(),
                                                     terms.size()));
    }

    /// Keys must already lie inside the register.
    static Labstate from_sorted_map(RegisterSpec reg,
                                    const std::map<std::uint64_t, Complex> &acc) {
        Labstate s(reg);
        s.terms_.reserve(acc.size());
        for (const auto &[index, amp] : acc) {
            if (amp != Complex{}) {
                s.terms_.emplace_back(BasisIndex{index}, amp);
            }
        }
        return s;
    }

    RegisterSpec register_spec() const noexcept { return reg_; }
    unsigned rank() const noexcept { return reg_.rank(); }

    /// Nonzero terms in ascending basis order.
    std::span<const Term> terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    Complex amplitude(BasisIndex index) const {
        auto it = std::lower_bound(
            terms_.begin(), terms_.end(), index,
            [](const Term &t, BasisIndex i) { return t.first < i; });
        if (it == terms_.end() || it->first != index) {
            return {};
        }
        return it->second;
    }

    double norm_squared() const noexcept {
        double sum = 0.0;
        for (const auto &t : terms_) {
            sum += std::norm(t.second);
        }
        return sum;
    }

    friend Labstate operator*(Complex scale, const Labstate &s) {
        std::map<std::uint64_t, Complex> acc;
        for (const auto &[index, amp] : s.terms_) {
            acc[index.value] = scale * amp;
        }
        return from_sorted_map(s.reg_, acc);
    }

    friend Labstate operator+(const Labstate &a, const Labstate &b) {
        if (a.reg_ != b.reg_) {
            throw DimensionError("cannot add labstates over registers of rank " +
                                 std::to_string(a.rank()) + " and " +
                                 std::to_string(b.rank()));
        }
        std::map<std::uint64_t, Complex> acc;
        for (const auto &[index, amp] : a.terms_) {
            acc[index.value] += amp;
        }
        for (const auto &[index, amp] : b.terms_) {
            acc[index.value] += amp;
        }
        return from_sorted_map(a.reg_, acc);
    }

    /// Exact comparison, amplitude by amplitude.
    friend bool operator==(const Labstate &, const Labstate &) = default;

  private:
    RegisterSpec reg_;
    std::vector<Term> terms_;
};

/// |0...0), the idle apparatus.
inline Labstate void_state(RegisterSpec reg) {
    return Labstate::from_terms(reg, {{BasisIndex{0}, Complex{1.0, 0.0}}});
}

/// The basis state A+_{k1} ... A+_{kp} |0).
inline Labstate basis_state(RegisterSpec reg, SignalMonomial m) {
    return Labstate::from_terms(reg,
                                {{encode_monomial(m, reg), Complex{1.0, 0.0}}});
}

/// A+_k = |1)_k(0| on qubit k. Terms that already have qubit k fired are
/// annihilated, so the result may be the zero vector.
inline Labstate apply_creation(unsigned k, const Labstate &state) {
    if (k >= state.rank()) {
        throw OutOfRangeError("creation operator index " + std::to_string(k) +
                              " outside rank-" + std::to_string(state.rank()) +
                              " register");
    }
    const std::uint64_t bit = std::uint64_t{1} << k;
    std::map<std::uint64_t, Complex> acc;
    for (const auto &[index, amp] : state.terms()) {
        if ((index.value & bit) == 0) {
            acc.emplace(index.value | bit, amp);
        }
    }
    return Labstate::from_sorted_map(state.register_spec(), acc);
}

/// (x|y), conjugate-linear in x.
inline Complex inner_product(const Labstate &x, const Labstate &y) {
    if (x.register_spec() != y.register_spec()) {
        throw DimensionError("inner product between registers of rank " +
                             std::to_string(x.rank()) + " and " +
                             std::to_string(y.rank()));
    }
    Complex sum{};
    auto xs = x.terms();
    auto ys = y.terms();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < xs.size() && j < ys.size()) {
        if (xs[i].first < ys[j].first) {
            ++i;
        } else if (ys[j].first < xs[i].first) {
            ++j;
        } else {
            sum += std::conj(xs[i].second) * ys[j].second;
            ++i;
            ++j;
        }
    }
    return sum;
}

/// Born rule on the register basis: |(outcome|state)|^2.
inline double born_probability(const Labstate &state, SignalMonomial outcome,
                               double norm_tolerance = kNormTolerance) {
    const double n2 = state.norm_squared();
    if (!(std::abs(n2 - 1.0) <= norm_tolerance)) {
        throw NormalizationError("labstate has squared norm " +
                                 std::to_string(n2) + ", expected 1");
    }
    return std::norm(
        state.amplitude(encode_monomial(outcome, state.register_spec())));
}

/// All basis indices with exactly p fired qubits, ascending. The list has
/// r!/((r-p)! p!) entries.
inline std::vector<BasisIndex> rank_subset(RegisterSpec reg, unsigned p) {
    const unsigned r = reg.rank();
    if (p > r) {
        throw ArgumentError("subset rank " + std::to_string(p) +
                            " exceeds register rank " + std::to_string(r));
    }
    std::vector<BasisIndex> out;
    if (p == 0) {
        out.emplace_back(0);
        return out;
    }
    // Gosper's hack walks the fixed-popcount masks in increasing order.
    std::uint64_t v = (p == 64) ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << p) - 1;
    while (true) {
        out.emplace_back(v);
        const std::uint64_t t = v | (v - 1);
        if (t == ~std::uint64_t{0}) {
            break;
        }
        const std::uint64_t next =
            (t + 1) |
            (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
        if (!reg.contains(next)) {
            break;
        }
        v = next;
    }
    return out;
}

} // namespace qdn
