#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "codesign/benchmarks.hpp"
#include "codesign/metrics.hpp"

using namespace codesign;

TEST_CASE("monotone step instances", "[benchmarks]") {
    auto inst = gen_monotone({3, 2, 25, 4, {}});
    const Dpi& d = inst.dpi;
    CHECK(d.req({0, 0, 0}) == Element::real({0, 0}));
    auto one = d.req({1, 1, 1}).reals();
    CHECK(one[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(one[1] == Catch::Approx(1.0).margin(1e-12));
    CHECK(d.prov({0.3, 0.2, 0.9}).is_top());
    CHECK(leq(*d.fun_poset(), inst.target, d.prov({0.5, 0.5, 0.5})));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 10000; ++k) {
        Impl x{U(rng), U(rng), U(rng)}, y = x;
        for (auto& v : y) v = std::min(1.0, v + U(rng) * (1 - v));
        CHECK(leq(*d.res_poset(), d.req(x), d.req(y)));
    }
}

TEST_CASE("monotone instances on a 6^d grid", "[benchmarks][property]") {
    for (std::size_t dim : {1u, 2u, 3u}) {
        auto d = gen_monotone({dim, 2, 10, 7 + dim, {}}).dpi;
        auto pts = grid_points(Impl(dim, 0.0), Impl(dim, 1.0), std::size_t(std::pow(6.0, double(dim)) + 0.5));
        REQUIRE(pts.size() == std::size_t(std::pow(6.0, double(dim)) + 0.5));
        for (const auto& x : pts)
            for (const auto& y : pts) {
                bool below = true;
                for (std::size_t a = 0; a < dim; ++a) below = below && x[a] <= y[a];
                if (below) CHECK(leq(*d.res_poset(), d.req(x), d.req(y)));
            }
    }
}

TEST_CASE("monotone cell representatives reach every value", "[benchmarks]") {
    MonotoneSpec spec{2, 2, 6, 3, {}};
    auto atoms = draw_step_atoms(spec);
    auto reps = step_cell_representatives(atoms, 2);
    std::set<std::vector<double>> reached;
    for (const auto& x : reps) reached.insert(atoms(x));
    for (const auto& x : grid_points({0, 0}, {1, 1}, 200 * 200)) CHECK(reached.count(atoms(x)) == 1);
}

TEST_CASE("triangle wave", "[benchmarks]") {
    CHECK(triangle_wave(0.3) == Catch::Approx(0.3));
    CHECK(triangle_wave(1.7) == Catch::Approx(0.3));
    CHECK(triangle_wave(2.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(triangle_wave(-0.4) == Catch::Approx(0.4));
}

TEST_CASE("Lipschitz instances", "[benchmarks]") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        LipschitzSpec spec = lipschitz_preset(seed);
        auto map = draw_triangle_map(spec);
        Eigen::MatrixXd A(spec.m, spec.d);
        for (std::size_t i = 0; i < spec.m; ++i)
            for (std::size_t j = 0; j < spec.d; ++j) A(Eigen::Index(i), Eigen::Index(j)) = map.A[i][j];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
        CHECK(std::abs(svd.singularValues()(0) - spec.L) <= 1e-9);
    }

    auto inst = gen_lipschitz(lipschitz_preset(3));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 10000; ++k) {
        Impl x(4), y(4);
        for (auto& v : x) v = U(rng);
        for (auto& v : y) v = U(rng);
        auto gx = inst.dpi.req(x).reals(), gy = inst.dpi.req(y).reals();
        double dg = 0, dx = 0;
        for (std::size_t j = 0; j < 2; ++j) {
            dg += (gx[j] - gy[j]) * (gx[j] - gy[j]);
            CHECK(gx[j] >= 0.0);
            CHECK(gx[j] <= 1.0);
        }
        for (std::size_t a = 0; a < 4; ++a) dx += (x[a] - y[a]) * (x[a] - y[a]);
        CHECK(std::sqrt(dg) <= 2.0 * std::sqrt(dx) + 1e-12);
    }
}

TEST_CASE("regeneration is deterministic", "[benchmarks]") {
    auto a = gen_monotone(monotone_preset(2)), b = gen_monotone(monotone_preset(2));
    auto c = gen_lipschitz(lipschitz_preset(2)), e = gen_lipschitz(lipschitz_preset(2));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0, 1);
    for (int k = 0; k < 200; ++k) {
        Impl x3{U(rng), U(rng), U(rng)}, x4{U(rng), U(rng), U(rng), U(rng)};
        CHECK(a.dpi.req(x3) == b.dpi.req(x3));
        CHECK(c.dpi.req(x4) == e.dpi.req(x4));
    }
    FiniteSpec fs;
    fs.seed = 5;
    auto f1 = gen_finite(fs), f2 = gen_finite(fs);
    REQUIRE(f1.dpi.space().items() == f2.dpi.space().items());
    for (const auto& i : f1.dpi.space().items()) {
        CHECK(f1.dpi.req(i) == f2.dpi.req(i));
        CHECK(f1.dpi.prov(i) == f2.dpi.prov(i));
    }
    CHECK(f1.target == f2.target);
    auto g1 = gen_finite_random(4, 5, 6, 3), g2 = gen_finite_random(4, 5, 6, 3);
    REQUIRE(g1.edges().size() == g2.edges().size());
    for (std::size_t k = 0; k < g1.edges().size(); ++k) {
        CHECK(g1.edges()[k].from == g2.edges()[k].from);
        CHECK(g1.edges()[k].to == g2.edges()[k].to);
    }
}

TEST_CASE("finite monotone instances", "[benchmarks]") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        FiniteSpec fs;
        fs.seed = seed;
        auto inst = gen_finite(fs);
        const auto& items = inst.dpi.space().items();
        CHECK(items.size() == fs.items);
        for (const auto& x : items)
            for (const auto& y : items)
                if (inst.dpi.space().leq(x, y)) {
                    CHECK(leq(*inst.dpi.res_poset(), inst.dpi.req(x), inst.dpi.req(y)));
                    CHECK(leq(*inst.dpi.fun_poset(), inst.dpi.prov(x), inst.dpi.prov(y)));
                }
        CHECK_FALSE(fix_fun_min_res(inst.dpi, inst.target).infeasible);
    }
    FiniteSpec perturbed;
    perturbed.perturbation = 0.2;
    auto p = gen_finite(perturbed);
    std::size_t violations = 0;
    const auto& items = p.dpi.space().items();
    for (const auto& x : items)
        for (const auto& y : items)
            if (p.dpi.space().leq(x, y) && !leq(*p.dpi.res_poset(), p.dpi.req(x), p.dpi.req(y))) ++violations;
    CHECK(violations > 0);
}

TEST_CASE("instance ids round-trip", "[benchmarks]") {
    CHECK(instance_from_id("M3").id == "monotone:d3m2K25:seed3");
    CHECK(instance_from_id("L5").id == lipschitz_id(lipschitz_preset(5)));
    auto m = instance_from_id("monotone:d2m3K7:seed11");
    CHECK(m.dpi.space().dimension() == 2);
    CHECK(m.dpi.res_poset()->dimension() == 3);
    auto f = instance_from_id("finite:n50d2g8p0.1:seed2");
    CHECK(f.dpi.space().size() == 50);
    CHECK(f.id == "finite:n50d2g8p0.1:seed2");
    CHECK_THROWS_AS(instance_from_id("M9"), configuration_error);
    CHECK_THROWS_AS(instance_from_id("nonsense"), configuration_error);
}

TEST_CASE("random graphs", "[benchmarks]") {
    auto one = gen_finite_random(1, 6, 4, 2);
    CHECK(one.size() == 1);
    CHECK(one.edges().empty());
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto g = gen_finite_random(1 + seed % 6, 5, 6, seed);
        INFO("seed " << seed);
        CHECK(validate(g).ok());
        // The all-universal tuple completes the top target.
        auto sys = system_interface(g);
        CHECK_FALSE(fix_fun_min_res(induced_system_dpi(g), sys.fun->bottom()).infeasible);
    }
}

TEST_CASE("reference point", "[metrics]") {
    Antichain a(PosetSpec::real(2));
    a.insert(Element::real({0, 1}));
    a.insert(Element::real({1, 0}));
    CHECK(reference_point(a) == Point{1.1, 1.1});
    Antichain b(PosetSpec::real(2));
    b.insert(Element::real({0, 0}));
    CHECK(reference_point(b) == Point{0.1, 0.1});
}
