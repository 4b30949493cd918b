#pragma once

// Hypervolume of dominated regions below a reference point, hypervolume difference,
// per-iteration difference curves and exact-recovery checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "codesign/history.hpp"

namespace codesign {

using Point = std::vector<double>;

struct HypervolumeResult {
    double volume = 0;
    std::size_t clipped = 0;  // members not below the reference point, left out
};

namespace detail {

inline double hv_sweep_2d(std::vector<Point> pts, const Point& ref) {
    std::sort(pts.begin(), pts.end());
    double area = 0, prev_y = ref[1];
    for (const auto& p : pts) {
        if (p[1] < prev_y) {
            area += (ref[0] - p[0]) * (prev_y - p[1]);
            prev_y = p[1];
        }
    }
    return area;
}

// Sum over nonempty subsets of (-1)^(|S|+1) * vol([max of S, ref]). Subsets whose
// componentwise max already reaches the reference contribute nothing and are pruned.
inline double hv_inclusion_exclusion(const std::vector<Point>& pts, const Point& ref) {
    const std::size_t m = ref.size();
    double total = 0;
    Point corner(m);
    auto visit = [&](auto&& self, std::size_t start, const Point& upper, int parity) -> void {
        for (std::size_t k = start; k < pts.size(); ++k) {
            double vol = 1;
            for (std::size_t c = 0; c < m; ++c) {
                corner[c] = std::max(upper[c], pts[k][c]);
                vol *= ref[c] - corner[c];
            }
            if (vol <= 0) continue;
            total += parity > 0 ? vol : -vol;
            const Point next = corner;
            self(self, k + 1, next, -parity);
        }
    };
    Point lowest(m, -std::numeric_limits<double>::infinity());
    visit(visit, 0, lowest, 1);
    return total;
}

}  // namespace detail

inline constexpr std::size_t max_inclusion_exclusion_points = 24;

// Points strictly beyond the reference in some coordinate are clipped out.
inline HypervolumeResult hypervolume_points(const std::vector<Point>& points, const Point& ref) {
    if (ref.empty()) throw contract_violation("reference point is empty");
    HypervolumeResult out;
    std::vector<Point> kept;
    for (const auto& p : points) {
        if (p.size() != ref.size()) throw invalid_element("point and reference differ in dimension");
        bool inside = true;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (std::isnan(p[k]) || (std::isinf(p[k]) && p[k] < 0))
                throw domain_error("hypervolume of an unbounded or undefined point");
            inside = inside && p[k] <= ref[k];
        }
        if (inside)
            kept.push_back(p);
        else
            ++out.clipped;
    }
    if (kept.empty()) return out;
    switch (ref.size()) {
        case 1: {
            double lo = ref[0];
            for (const auto& p : kept) lo = std::min(lo, p[0]);
            out.volume = ref[0] - lo;
            return out;
        }
        case 2: out.volume = detail::hv_sweep_2d(std::move(kept), ref); return out;
        default: {
            // Dominated points do not change the volume; drop them before the exponential step.
            std::vector<Point> front;
            for (const auto& p : kept) {
                bool dominated = false;
                for (const auto& q : kept) {
                    if (&p == &q) continue;
                    bool below = true, strict = false;
                    for (std::size_t k = 0; k < p.size(); ++k) {
                        below = below && q[k] <= p[k];
                        strict = strict || q[k] < p[k];
                    }
                    if (below && (strict || &q < &p)) {
                        dominated = true;
                        break;
                    }
                }
                if (!dominated) front.push_back(p);
            }
            if (front.size() > max_inclusion_exclusion_points)
                throw contract_violation("inclusion-exclusion hypervolume limited to 24 points");
            out.volume = detail::hv_inclusion_exclusion(front, ref);
            return out;
        }
    }
}

inline std::vector<Point> real_members(const Antichain& ac) {
    if (!ac.spec().is_real()) throw contract_violation("hypervolume needs a componentwise-real poset");
    std::vector<Point> pts;
    for (const auto& a : ac) {
        if (a.is_top()) {
            pts.push_back(Point(ac.spec().dimension(), std::numeric_limits<double>::infinity()));
            continue;
        }
        if (a.is_bottom()) throw domain_error("hypervolume of an antichain containing bottom");
        pts.push_back(a.reals());
    }
    return pts;
}

// Componentwise maximum of the true antichain plus a margin of its span; coordinates
// with zero span get an absolute margin instead.
inline Point reference_point(const Antichain& truth, double margin = 0.1, double flat_margin = 0.1) {
    const auto pts = real_members(truth);
    if (pts.empty()) throw contract_violation("reference point of an empty antichain");
    Point lo = pts[0], hi = pts[0];
    for (const auto& p : pts)
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (std::isinf(p[k])) throw domain_error("reference point of an unbounded antichain");
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    for (std::size_t k = 0; k < hi.size(); ++k) {
        const double span = hi[k] - lo[k];
        hi[k] += span > 0 ? margin * span : flat_margin;
    }
    return hi;
}

inline HypervolumeResult hypervolume_detail(const Antichain& ac, const Point& ref) {
    return hypervolume_points(real_members(ac), ref);
}

inline double hypervolume(const Antichain& ac, const Point& ref) { return hypervolume_detail(ac, ref).volume; }

inline double hypervolume_difference(const Antichain& truth, const Antichain& approx, const Point& ref) {
    const double d = hypervolume(truth, ref) - hypervolume(approx, ref);
    if (d < -1e-9) throw internal_error("approximation dominates more than the true antichain");
    return std::max(d, 0.0);
}

inline bool exact_recovery(const Antichain& truth, const Antichain& approx) {
    if (!same_structure(*truth.poset(), *approx.poset()))
        throw contract_violation("antichains live in different posets");
    return upper_closure_within(truth, approx) && upper_closure_within(approx, truth);
}

// HVD of the target-feasible antichain after each iteration (records grouped by their
// iteration number; iterations 1..steps). Archives only grow, so the curve never increases.
inline std::vector<double> hvd_curve(const History& h, const Element& target, const Antichain& truth, const Point& ref,
                                     std::size_t steps) {
    const double hv_true = hypervolume(truth, ref);
    std::vector<double> curve;
    curve.reserve(steps);
    Antichain ac(h.res_poset());
    double hv = 0;
    std::size_t k = 0;
    for (std::size_t t = 1; t <= steps; ++t) {
        bool changed = false;
        for (; k < h.size() && h[k].iteration <= t; ++k)
            if (leq(*h.fun_poset(), target, h[k].functionality())) changed = ac.insert(h[k].resource()) || changed;
        if (changed) hv = hypervolume(ac, ref);
        const double d = hv_true - hv;
        if (d < -1e-9) throw internal_error("approximation dominates more than the true antichain");
        curve.push_back(std::max(d, 0.0));
    }
    return curve;
}

inline std::size_t iteration_count(const History& h) {
    std::size_t n = 0;
    for (const auto& rec : h) n = std::max(n, rec.iteration);
    return n;
}

inline double cumulative_hvd(const History& h, const Element& target, const Antichain& truth, const Point& ref) {
    double sum = 0;
    for (double d : hvd_curve(h, target, truth, ref, iteration_count(h))) sum += d;
    return sum;
}

// First iteration after which the archive recovers the true up-set, if any.
inline std::optional<std::size_t> recovery_iteration(const History& h, const Element& target, const Antichain& truth) {
    Antichain ac(h.res_poset());
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (leq(*h.fun_poset(), target, h[k].functionality())) ac.insert(h[k].resource());
        const bool iteration_done = k + 1 == h.size() || h[k + 1].iteration != h[k].iteration;
        if (iteration_done && exact_recovery(truth, ac)) return h[k].iteration;
    }
    return std::nullopt;
}

}  // namespace codesign
