// Sizing an actuator: two design knobs in [0, 1]^2 (winding turns, magnet volume).
// Torque grows with both; cost and mass are the resources to minimize. We ask for a
// torque of at least 1.2 and compare the elimination sampler with pure Halton sampling
// at the same budget.

#include <cstdio>

#include "codesign/metrics.hpp"
#include "codesign/design_problem.hpp"
#include "codesign/sampler.hpp"

using namespace codesign;

namespace {

Dpi actuator() {
    DpiModel m;
    m.space = ImplementationSpace::box({0, 0}, {1, 1}, {2.0, PosetSpec::real(2)});
    m.fun = PosetSpec::real(1);
    m.res = PosetSpec::real(2);
    m.prov = [](const Impl& x) { return Element::real({1.5 * x[0] + x[1] - 0.3 * x[0] * x[1]}); };
    // Copper is cheap and heavy, magnets the other way round.
    m.req = [](const Impl& x) {
        return Element::real({0.4 * x[0] + 1.6 * x[1] * x[1], 1.2 * x[0] * x[0] + 0.3 * x[1]});
    };
    m.name = "actuator";
    return Dpi(std::move(m));
}

double cumulative(const RunTrace& tr, const Element& target, const Antichain& truth, const Point& ref,
                  std::size_t budget) {
    double s = 0;
    for (double d : hvd_curve(tr.history, target, truth, ref, budget)) s += d;
    return s;
}

}  // namespace

int main() {
    const Dpi dpi = actuator();
    const Element target = Element::real({1.2});
    const std::size_t budget = 300;

    const auto oracle = fix_fun_min_res(dpi, target, {250'000});
    Antichain truth = oracle.antichain;
    const Point ref = reference_point(truth);
    std::printf("grid oracle: %zu nondominated designs, reference (%.3f, %.3f)\n", truth.size(), ref[0], ref[1]);

    SamplerConfig ours;
    ours.budget = budget;
    ours.delta = 0.05;
    ours.evaluator.flavor = Flavor::monotone;
    SamplerConfig halton = ours;
    halton.delta = 1.0;
    halton.evaluator.flavor = Flavor::trivial;

    double sum_ours = 0, sum_halton = 0;
    const int seeds = 10;
    for (int seed = 1; seed <= seeds; ++seed) {
        ours.seed = halton.seed = std::uint64_t(seed);
        const RunTrace a = run_elimination_sampler(dpi, target, ours);
        const RunTrace b = run_elimination_sampler(dpi, target, halton);
        // The grid can miss points a run finds; score both against the merged front.
        Antichain merged = truth;
        for (const auto& r : a.antichain.members()) merged.insert(r);
        for (const auto& r : b.antichain.members()) merged.insert(r);
        sum_ours += cumulative(a, target, merged, ref, budget);
        sum_halton += cumulative(b, target, merged, ref, budget);
        if (seed == 1) {
            std::printf("seed 1, elimination sampler: %zu designs on the front\n", a.antichain.size());
            for (std::size_t k = 0; k < a.antichain.size() && k < 8; ++k) {
                const auto& x = a.implementations[k];
                std::printf("  turns %.3f magnet %.3f -> %s\n", x[0], x[1],
                            format_element(*dpi.res_poset(), a.antichain.members()[k]).c_str());
            }
        }
    }
    std::printf("mean cumulative HVD over %d seeds, N = %zu: elimination %.4f, Halton %.4f (ratio %.2f)\n", seeds,
                budget, sum_ours / seeds, sum_halton / seeds, sum_ours / sum_halton);
}
