// Double slit on a 16-site cyclic screen: simulated detector probabilities
// next to the four-term interference formula.

#include <cstdio>
#include <numbers>

#include "qdn/qdn.hpp"

int main() {
    using namespace qdn;
    const unsigned sites = 16;
    const unsigned s = 3;
    const double h = 1.0 / std::numbers::sqrt2;

    SlitGeometry geometry{sites, {s, mirror_slit(s, sites)}, fresnel_kernel(sites, 1.0)};
    const Complex split[] = {h, h};
    const RunResult result = run_program(slit_network(geometry, split));
    const auto closed = double_slit_closed_form(geometry, s, h, h);

    std::printf("slits %u and %u open, %u detectors\n\n", s, geometry.open_slits[1], sites);
    std::printf("  j   simulated        formula          |diff|\n");
    double total = 0.0;
    for (unsigned j = 0; j < sites; ++j) {
        const double p = result.table.probability(SignalMonomial::single(j));
        total += p;
        std::printf("%3u   %.12f   %.12f   %.1e\n", j, p, closed[j], std::abs(p - closed[j]));
    }
    std::printf("\ntotal probability %.15f\n", total);
    return 0;
}
