#pragma once

// Effective POVM seen by a preparation that superposes several source
// generators: for each outcome o, E_o[s][t] = conj(M_o[s]) M_o[t] where M_o[s]
// is the final amplitude on o when only source s is fired. A prepared state
// sum_s c_s A+_s|0) then has P(o) = c^dagger E_o c, and sum_o E_o = I.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qdn/errors.hpp"
#include "qdn/register.hpp"
#include "qdn/stage.hpp"

namespace qdn {

/// Small dense square complex matrix, row-major.
class ComplexMatrix {
  public:
    explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = Complex{1.0};
        }
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    Complex &operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const Complex &operator()(std::size_t i, std::size_t j) const {
        return data_[i * n_ + j];
    }

    ComplexMatrix &operator+=(const ComplexMatrix &other) {
        if (other.n_ != n_) {
            throw DimensionError("matrix size mismatch");
        }
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] += other.data_[k];
        }
        return *this;
    }

    /// Largest |a_ij - b_ij|.
    double max_abs_difference(const ComplexMatrix &other) const {
        if (other.n_ != n_) {
            throw DimensionError("matrix size mismatch");
        }
        double worst = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k) {
            const double d = std::abs(data_[k] - other.data_[k]);
            if (!(d <= worst)) {
                worst = d;
            }
        }
        return worst;
    }

    /// x^dagger M x.
    Complex quadratic_form(std::span<const Complex> x) const {
        if (x.size() != n_) {
            throw DimensionError("vector length does not match matrix size");
        }
        Complex sum{};
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                sum += std::conj(x[i]) * (*this)(i, j) * x[j];
            }
        }
        return sum;
    }

  private:
    std::size_t n_;
    std::vector<Complex> data_;
};

struct PovmElement {
    SignalMonomial outcome;
    ComplexMatrix effect;
};

/// Builds one effect per outcome monomial in the joint final support of the
/// given source generators, in ascending basis order.
inline std::vector<PovmElement>
effective_povm(const NetworkProgram &program, std::span<const unsigned> sources,
               double tolerance = kValidationTolerance) {
    if (sources.empty()) {
        throw ArgumentError("effective POVM needs at least one source");
    }
    std::vector<SignalMonomial> domain;
    for (unsigned s : sources) {
        if (s >= program.initial_rank()) {
            throw OutOfRangeError("source generator " + std::to_string(s) +
                                  " outside rank-" +
                                  std::to_string(program.initial_rank()) +
                                  " register");
        }
        domain.push_back(SignalMonomial::single(s));
    }
    require_valid(validate_program(program, domain, tolerance), tolerance);

    const std::size_t m = sources.size();
    // outcome mask -> amplitude per source
    std::map<std::uint64_t, std::vector<Complex>> columns;
    for (std::size_t s = 0; s < m; ++s) {
        const Labstate final_state = run_stages(
            program.stages(),
            basis_state(program.initial_register(), domain[s]));
        for (const auto &[index, amp] : final_state.terms()) {
            auto &col = columns[index.value];
            col.resize(m);
            col[s] = amp;
        }
    }

    std::vector<PovmElement> out;
    out.reserve(columns.size());
    for (const auto &[mask, amps] : columns) {
        ComplexMatrix e(m);
        for (std::size_t s = 0; s < m; ++s) {
            for (std::size_t t = 0; t < m; ++t) {
                e(s, t) = std::conj(amps[s]) * amps[t];
            }
        }
        out.push_back(PovmElement{SignalMonomial::from_mask(mask), std::move(e)});
    }
    return out;
}

} // namespace qdn
