#pragma once

// Seeded instance generators: monotone step-atom maps, Lipschitz triangle-wave maps,
// small finite monotone instances, and random finite co-design graphs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "codesign/graph.hpp"
#include "codesign/random.hpp"

namespace codesign {

// An instance with the functionality target it is benchmarked at.
struct Instance {
    std::string id;
    Dpi dpi;
    Element target;
};

// ---- monotone step atoms -----------------------------------------------------

struct MonotoneSpec {
    std::size_t d = 3;
    std::size_t m = 2;
    std::size_t K = 25;
    std::uint64_t seed = 1;
    std::vector<int> orientation;  // per output: +1 increasing, -1 decreasing (x -> 1 - x); empty = all +1

    void validate() const {
        if (d < 1 || m < 1) throw configuration_error("monotone instance needs d, m >= 1");
        if (K < 1) throw configuration_error("monotone instance needs K >= 1");
        if (!orientation.empty() && orientation.size() != m)
            throw configuration_error("orientation length differs from the output dimension");
        for (int s : orientation)
            if (s != 1 && s != -1) throw configuration_error("orientation entries must be +1 or -1");
    }
};

struct StepAtoms {
    std::vector<std::vector<double>> thresholds;  // K x d
    std::vector<std::vector<double>> weights;     // m x K, rows sum to 1
    std::vector<int> orientation;                 // m

    std::vector<double> operator()(const Impl& x) const {
        std::vector<double> g(weights.size(), 0.0);
        for (std::size_t j = 0; j < weights.size(); ++j) {
            for (std::size_t k = 0; k < thresholds.size(); ++k) {
                bool fires = true;
                for (std::size_t a = 0; a < x.size() && fires; ++a) {
                    const double v = orientation[j] > 0 ? x[a] : 1.0 - x[a];
                    fires = v >= thresholds[k][a];
                }
                if (fires) g[j] += weights[j][k];
            }
        }
        return g;
    }
};

inline StepAtoms draw_step_atoms(const MonotoneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed ^ 0x6d6f6e6f746f6e65ULL);
    StepAtoms s;
    s.thresholds.assign(spec.K, std::vector<double>(spec.d));
    for (auto& t : s.thresholds)
        for (auto& v : t) v = rng.uniform();
    s.weights.assign(spec.m, std::vector<double>(spec.K));
    for (auto& w : s.weights) {
        double sum = 0;
        for (auto& v : w) sum += (v = 1.0 - rng.uniform());  // in (0, 1]
        for (auto& v : w) v /= sum;
    }
    s.orientation = spec.orientation.empty() ? std::vector<int>(spec.m, 1) : spec.orientation;
    return s;
}

// Every value the step map attains is attained at one of these points: per axis, the
// fold points of all atoms, the midpoints between consecutive folds, and both ends.
inline std::vector<Impl> step_cell_representatives(const StepAtoms& s, std::size_t d) {
    std::vector<std::vector<double>> axes(d);
    for (std::size_t a = 0; a < d; ++a) {
        std::set<double> folds{0.0, 1.0};
        for (const auto& t : s.thresholds) {
            for (int o : s.orientation) folds.insert(o > 0 ? t[a] : 1.0 - t[a]);
        }
        std::vector<double> f(folds.begin(), folds.end());
        for (std::size_t k = 0; k < f.size(); ++k) {
            axes[a].push_back(f[k]);
            if (k + 1 < f.size()) axes[a].push_back(0.5 * (f[k] + f[k + 1]));
        }
    }
    std::vector<Impl> out;
    std::vector<std::size_t> idx(d, 0);
    while (true) {
        Impl x(d);
        for (std::size_t a = 0; a < d; ++a) x[a] = axes[a][idx[a]];
        out.push_back(std::move(x));
        std::size_t a = 0;
        for (; a < d; ++a) {
            if (++idx[a] < axes[a].size()) break;
            idx[a] = 0;
        }
        if (a == d) break;
    }
    return out;
}

// Functionality of the synthetic instances: R^2 with a constant top value, so every
// implementation meets the target (0, 0).
inline Poset synthetic_functionality() { return PosetSpec::real(2); }
inline Element synthetic_target() { return Element::real({0.0, 0.0}); }

inline std::string monotone_id(const MonotoneSpec& s) {
    std::string id = "monotone:d" + std::to_string(s.d) + "m" + std::to_string(s.m) + "K" + std::to_string(s.K);
    if (!s.orientation.empty()) {
        id += "o";
        for (int o : s.orientation) id += o > 0 ? "+" : "-";
    }
    return id + ":seed" + std::to_string(s.seed);
}

inline Instance gen_monotone(const MonotoneSpec& spec) {
    auto atoms = std::make_shared<StepAtoms>(draw_step_atoms(spec));
    DpiModel m;
    m.space = ImplementationSpace::box(Impl(spec.d, 0.0), Impl(spec.d, 1.0), {2.0, PosetSpec::real(spec.d)});
    m.fun = synthetic_functionality();
    RealOptions ro;
    ro.lower = std::vector<double>(spec.m, 0.0);
    m.res = PosetSpec::real(spec.m, ro);
    m.prov = [](const Impl&) { return Element::top(); };
    m.req = [atoms](const Impl& x) { return Element::real((*atoms)(x)); };
    const std::size_t d = spec.d;
    m.critical_points = [atoms, d] { return step_cell_representatives(*atoms, d); };
    m.name = monotone_id(spec);
    return {m.name, Dpi(std::move(m)), synthetic_target()};
}

// Monotone presets M1..M8: d = 3, m = 2, K = 25, seeds 1..8.
inline MonotoneSpec monotone_preset(std::size_t k) {
    if (k < 1 || k > 8) throw configuration_error("monotone presets are M1..M8");
    return {3, 2, 25, std::uint64_t(k), {}};
}

// ---- Lipschitz triangle waves ------------------------------------------------

struct LipschitzSpec {
    std::size_t d = 4;
    std::size_t m = 2;
    double L = 2.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (d < 1 || m < 1) throw configuration_error("Lipschitz instance needs d, m >= 1");
        if (!(L > 0)) throw configuration_error("Lipschitz constant must be positive");
    }
};

// Unit-slope triangle wave with period 2 and range [0, 1].
inline double triangle_wave(double t) {
    double r = std::fmod(t, 2.0);
    if (r < 0) r += 2.0;
    return r <= 1.0 ? r : 2.0 - r;
}

// Largest singular value by power iteration on A^T A.
inline double spectral_norm(const std::vector<std::vector<double>>& A, std::size_t iterations = 200,
                            double tolerance = 1e-12) {
    const std::size_t m = A.size(), d = A.empty() ? 0 : A[0].size();
    std::vector<double> v(d, 1.0 / std::sqrt(double(d))), Av(m), w(d);
    double sigma = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            Av[i] = 0;
            for (std::size_t j = 0; j < d; ++j) Av[i] += A[i][j] * v[j];
        }
        for (std::size_t j = 0; j < d; ++j) {
            w[j] = 0;
            for (std::size_t i = 0; i < m; ++i) w[j] += A[i][j] * Av[i];
        }
        double norm = 0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0) return 0;
        for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / norm;
        const double next = std::sqrt(norm);
        const bool converged = std::abs(next - sigma) <= tolerance * std::max(1.0, next);
        sigma = next;
        if (converged) break;
    }
    // Rayleigh quotient at the final vector.
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = 0;
        for (std::size_t j = 0; j < d; ++j) r += A[i][j] * v[j];
        s += r * r;
    }
    return std::sqrt(s);
}

struct TriangleMap {
    std::vector<std::vector<double>> A;  // m x d
    std::vector<double> b;

    std::vector<double> operator()(const Impl& x) const {
        std::vector<double> g(A.size());
        for (std::size_t j = 0; j < A.size(); ++j) {
            double t = b[j];
            for (std::size_t a = 0; a < x.size(); ++a) t += A[j][a] * x[a];
            g[j] = triangle_wave(t);
        }
        return g;
    }
};

inline TriangleMap draw_triangle_map(const LipschitzSpec& spec) {
    spec.validate();
    Rng rng(spec.seed ^ 0x6c69707363686974ULL);
    TriangleMap t;
    t.A.assign(spec.m, std::vector<double>(spec.d));
    for (auto& row : t.A)
        for (auto& v : row) v = rng.normal();
    const double s = spectral_norm(t.A);
    for (auto& row : t.A)
        for (auto& v : row) v *= spec.L / s;
    t.b.resize(spec.m);
    for (auto& v : t.b) v = rng.uniform(0.0, 2.0);
    return t;
}

inline std::string lipschitz_id(const LipschitzSpec& s) {
    std::ostringstream os;
    os << "lipschitz:d" << s.d << "m" << s.m << "L" << s.L << ":seed" << s.seed;
    return os.str();
}

inline Instance gen_lipschitz(const LipschitzSpec& spec) {
    auto map = std::make_shared<TriangleMap>(draw_triangle_map(spec));
    DpiModel m;
    m.space = ImplementationSpace::box(Impl(spec.d, 0.0), Impl(spec.d, 1.0), {2.0, PosetSpec::real(spec.d)});
    m.fun = synthetic_functionality();
    RealOptions ro;
    ro.lower = std::vector<double>(spec.m, 0.0);
    m.res = PosetSpec::real(spec.m, ro);
    m.prov = [](const Impl&) { return Element::top(); };
    m.req = [map](const Impl& x) { return Element::real((*map)(x)); };
    m.name = lipschitz_id(spec);
    return {m.name, Dpi(std::move(m)), synthetic_target()};
}

// Lipschitz presets L1..L8: d = 4, m = 2, L = 2, seeds 1..8.
inline LipschitzSpec lipschitz_preset(std::size_t k) {
    if (k < 1 || k > 8) throw configuration_error("Lipschitz presets are L1..L8");
    return {4, 2, 2.0, std::uint64_t(k)};
}

// ---- small finite monotone instances -----------------------------------------

struct FiniteSpec {
    std::size_t items = 200;
    std::size_t d = 2;
    std::size_t grid = 16;        // points per axis the items are drawn from
    double perturbation = 0.0;    // amplitude of a non-monotone term added to the resources
    std::uint64_t seed = 1;

    void validate() const {
        if (d < 1) throw configuration_error("finite instance needs d >= 1");
        if (grid < 2) throw configuration_error("finite instance needs grid >= 2");
        if (items < 1 || double(items) > std::pow(double(grid), double(d)))
            throw configuration_error("finite instance has more items than grid points");
        if (perturbation < 0) throw configuration_error("perturbation must be nonnegative");
    }
};

inline std::string finite_id(const FiniteSpec& s) {
    std::ostringstream os;
    os << "finite:n" << s.items << "d" << s.d << "g" << s.grid;
    if (s.perturbation > 0) os << "p" << s.perturbation;
    os << ":seed" << s.seed;
    return os.str();
}

// Items on a grid in [0,1]^d with the componentwise order; a scalar functionality and
// two resources, all nondecreasing in the item. The target is met by part of the items.
// With a perturbation, each resource gets an item-specific offset in [-p, p].
inline Instance gen_finite(const FiniteSpec& spec) {
    spec.validate();
    Rng rng(spec.seed ^ 0x66696e697465ULL);
    std::set<Impl> pts;
    while (pts.size() < spec.items) {
        Impl x(spec.d);
        for (auto& v : x) v = double(rng.below(spec.grid)) / double(spec.grid - 1);
        pts.insert(std::move(x));
    }
    MonotoneSpec ms{spec.d, 2, 8, rng.bits(), {}};
    auto atoms = std::make_shared<StepAtoms>(draw_step_atoms(ms));
    auto simplex = [&] {
        std::vector<double> w(spec.d);
        double sum = 0;
        for (auto& v : w) sum += (v = 1.0 - rng.uniform());
        for (auto& v : w) v /= sum;
        return w;
    };
    auto fw = std::make_shared<std::vector<double>>(simplex());
    auto c0 = simplex(), c1 = simplex();
    auto lin = std::make_shared<std::vector<std::vector<double>>>(std::vector<std::vector<double>>{c0, c1});
    const double p = spec.perturbation;
    const std::uint64_t salt = rng.bits();
    const double target = rng.uniform(0.3, 0.6);

    DpiModel m;
    m.space = ImplementationSpace::finite({pts.begin(), pts.end()}, {2.0, PosetSpec::real(spec.d)});
    m.fun = PosetSpec::real(1);
    RealOptions ro;
    ro.lower = std::vector<double>{0.0, 0.0};
    m.res = PosetSpec::real(2, ro);
    m.prov = [fw](const Impl& x) {
        double s = 0;
        for (std::size_t a = 0; a < x.size(); ++a) s += (*fw)[a] * x[a];
        return Element::real({s});
    };
    m.req = [atoms, lin, p, salt](const Impl& x) {
        auto g = (*atoms)(x);
        std::vector<double> r(2);
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0;
            for (std::size_t a = 0; a < x.size(); ++a) s += (*lin)[j][a] * x[a];
            r[j] = 0.5 * g[j] + 0.5 * s;
            if (p > 0) {
                std::uint64_t h = salt + j;
                for (double v : x) h = splitmix64(h ^ std::uint64_t(std::llround(v * 1e6)));
                r[j] = std::max(0.0, r[j] + p * (2.0 * double(h >> 11) * 0x1.0p-53 - 1.0));
            }
        }
        return Element::real(std::move(r));
    };
    m.name = finite_id(spec);
    return {m.name, Dpi(std::move(m)), Element::real({target})};
}

// ---- instance ids ------------------------------------------------------------

// Parses ids of the form produced by monotone_id, lipschitz_id and finite_id, plus the
// preset names M1..M8 and L1..L8.
inline Instance instance_from_id(const std::string& id) {
    std::smatch mt;
    static const std::regex preset(R"(^([ML])([1-8])$)");
    static const std::regex mono(R"(^monotone:d(\d+)m(\d+)K(\d+)(?:o([+-]+))?:seed(\d+)$)");
    static const std::regex lip(R"(^lipschitz:d(\d+)m(\d+)L([0-9.eE+-]+):seed(\d+)$)");
    static const std::regex fin(R"(^finite:n(\d+)d(\d+)g(\d+)(?:p([0-9.eE+-]+))?:seed(\d+)$)");
    if (std::regex_match(id, mt, preset)) {
        const std::size_t k = std::stoul(mt[2]);
        return mt[1] == "M" ? gen_monotone(monotone_preset(k)) : gen_lipschitz(lipschitz_preset(k));
    }
    if (std::regex_match(id, mt, mono)) {
        MonotoneSpec s{std::stoul(mt[1]), std::stoul(mt[2]), std::stoul(mt[3]), std::stoull(mt[5]), {}};
        if (mt[4].matched)
            for (char c : mt[4].str()) s.orientation.push_back(c == '+' ? 1 : -1);
        return gen_monotone(s);
    }
    if (std::regex_match(id, mt, lip))
        return gen_lipschitz({std::stoul(mt[1]), std::stoul(mt[2]), std::stod(mt[3]), std::stoull(mt[4])});
    if (std::regex_match(id, mt, fin)) {
        FiniteSpec s;
        s.items = std::stoul(mt[1]);
        s.d = std::stoul(mt[2]);
        s.grid = std::stoul(mt[3]);
        if (mt[4].matched) s.perturbation = std::stod(mt[4]);
        s.seed = std::stoull(mt[5]);
        return gen_finite(s);
    }
    throw configuration_error("unknown instance id '" + id + "'");
}

// ---- random finite co-design graphs ------------------------------------------

// Lattice a x b (elements "u_v", covers along both axes) with a*b = size and a a random
// divisor of size.
inline Poset random_grid_lattice(std::size_t size, Rng& rng) {
    std::vector<std::size_t> divisors;
    for (std::size_t a = 1; a <= size; ++a)
        if (size % a == 0) divisors.push_back(a);
    const std::size_t a = divisors[rng.below(divisors.size())], b = size / a;
    std::vector<std::string> names;
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    for (std::size_t u = 0; u < a; ++u)
        for (std::size_t v = 0; v < b; ++v) {
            names.push_back(std::to_string(u) + "_" + std::to_string(v));
            if (u + 1 < a) covers.push_back({u * b + v, (u + 1) * b + v});
            if (v + 1 < b) covers.push_back({u * b + v, u * b + v + 1});
        }
    return PosetSpec::finite(std::move(names), covers);
}

// Node 0 is expensive: items on a 2-D grid ordered componentwise, functionality P and
// resources P x P, both nondecreasing in the item. Tractable nodes have random tables
// with functionality P x P and resources P. Every node has a universal item providing
// the top of its functionality, so the all-universal tuple completes any target.
// Tractable nodes hang off earlier nodes or stay independent; independent ones may feed
// the expensive node, which keeps every cycle inside the tractable part.
inline CoDesignGraph gen_finite_random(std::size_t node_count, std::size_t items_per_node, std::size_t poset_size,
                                       std::uint64_t seed) {
    if (node_count < 1) throw configuration_error("graph needs at least one node");
    if (items_per_node < 1) throw configuration_error("nodes need at least one item");
    if (poset_size < 1) throw configuration_error("poset needs at least one element");
    Rng rng(seed ^ 0x6772617068ULL);
    const Poset P = random_grid_lattice(poset_size, rng);
    const Poset PP = PosetSpec::product({P, P});
    const std::size_t n_el = P->size();
    const Element top = P->top();
    // Grid shape of P recovered from its element names.
    std::size_t pa = 1;
    while (P->find(std::to_string(pa) + "_0")) ++pa;
    const std::size_t pb = n_el / pa;
    auto grid_element = [pa, pb](double fu, double fv) {
        const std::size_t u = std::min(pa - 1, std::size_t(fu * double(pa - 1) + 1e-9));
        const std::size_t v = std::min(pb - 1, std::size_t(fv * double(pb - 1) + 1e-9));
        return Element::finite(u * pb + v);
    };

    CoDesignGraph g;
    {
        std::size_t side = 1;
        while (side * side < items_per_node) ++side;
        std::vector<Impl> all;
        for (std::size_t u = 0; u < side; ++u)
            for (std::size_t v = 0; v < side; ++v) all.push_back({double(u), double(v)});
        // Keep the maximal point (the universal item) and a random subset of the rest.
        std::vector<Impl> items{all.back()};
        all.pop_back();
        while (items.size() < items_per_node) {
            const std::size_t k = rng.below(all.size());
            items.push_back(all[k]);
            all.erase(all.begin() + std::ptrdiff_t(k));
        }
        std::sort(items.begin(), items.end());
        const double scale = side > 1 ? double(side - 1) : 1.0;
        auto weights = [&] {
            const double w = rng.uniform();
            return std::pair<double, double>{w, 1.0 - w};
        };
        const auto wp = weights(), wp2 = weights(), wr0 = weights(), wr1 = weights(), wr2 = weights(),
                   wr3 = weights();
        auto level = [scale](std::pair<double, double> w, const Impl& x) {
            return (w.first * x[0] + w.second * x[1]) / scale;
        };
        DpiModel m;
        m.space = ImplementationSpace::finite(items, {std::nullopt, PosetSpec::real(2)});
        m.fun = P;
        m.res = PP;
        m.prov = [=](const Impl& x) { return grid_element(level(wp, x), level(wp2, x)); };
        m.req = [=](const Impl& x) {
            return Element::tuple({grid_element(level(wr0, x), level(wr1, x)), grid_element(level(wr2, x), level(wr3, x))});
        };
        m.name = "q";
        g.add_node("q", Dpi(std::move(m)));
        g.set_expensive(std::size_t(0));
    }

    for (std::size_t k = 1; k < node_count; ++k) {
        std::vector<Impl> items;
        auto prov = std::make_shared<std::vector<Element>>();
        auto req = std::make_shared<std::vector<Element>>();
        for (std::size_t i = 0; i < items_per_node; ++i) {
            items.push_back({double(i)});
            const bool universal = i + 1 == items_per_node;
            prov->push_back(universal ? Element::tuple({top, top})
                                      : Element::tuple({Element::finite(rng.below(n_el)),
                                                        Element::finite(rng.below(n_el))}));
            req->push_back(Element::finite(rng.below(n_el)));
        }
        DpiModel m;
        m.space = ImplementationSpace::finite(std::move(items));
        m.fun = PP;
        m.res = P;
        m.prov = [prov](const Impl& i) { return (*prov)[std::size_t(i[0])]; };
        m.req = [req](const Impl& i) { return (*req)[std::size_t(i[0])]; };
        const std::string name = "n" + std::to_string(k);
        m.name = name;
        g.add_node(name, Dpi(std::move(m)));
    }

    std::set<Port> fed;
    auto wire = [&](Port from, Port to) {
        if (fed.count(to)) return;
        fed.insert(to);
        g.connect(from.node, from.coord, to.node, to.coord);
    };
    for (std::size_t k = 1; k < node_count; ++k) {
        if (rng.uniform() < 0.25) continue;  // independent node
        const std::size_t parent = rng.below(k);
        const std::size_t coord = parent == 0 ? rng.below(2) : 0;
        wire({parent, coord}, {k, rng.below(2)});
    }
    // Tractable feedback: a later node feeding an earlier tractable one.
    for (std::size_t k = 2; k < node_count; ++k)
        if (rng.uniform() < 0.3) wire({k, 0}, {1 + rng.below(k - 1), rng.below(2)});
    // Nodes the expensive node does not reach may feed it.
    std::vector<char> reached(node_count, 0);
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (const Edge& e : g.edges())
            if (e.from.node == v && !reached[e.to.node]) {
                reached[e.to.node] = 1;
                stack.push_back(e.to.node);
            }
    }
    for (std::size_t k = 1; k < node_count; ++k)
        if (!reached[k] && rng.uniform() < 0.5) wire({k, 0}, {0, 0});
    require_valid(g);
    return g;
}

}  // namespace codesign
