#pragma once

// History-dependent bounds on the requires/provides maps of a design problem.
// Optimistic bounds (req_opt below req, prov_opt above prov) drive elimination;
// pessimistic bounds are their duals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "codesign/history.hpp"
#include "codesign/lp.hpp"

namespace codesign {

using Matrix = std::vector<std::vector<double>>;

enum class Flavor { trivial, monotone, lipschitz, linear };

inline std::string to_string(Flavor f) {
    switch (f) {
        case Flavor::trivial: return "trivial";
        case Flavor::monotone: return "monotone";
        case Flavor::lipschitz: return "lipschitz";
        case Flavor::linear: return "linear";
    }
    return "?";
}

inline Flavor parse_flavor(const std::string& s) {
    if (s == "trivial") return Flavor::trivial;
    if (s == "monotone") return Flavor::monotone;
    if (s == "lipschitz") return Flavor::lipschitz;
    if (s == "linear") return Flavor::linear;
    throw configuration_error("unknown evaluator flavor '" + s + "'");
}

// Linear-in-parameters model: value(i) = features(i) * theta with theta in a box.
struct LinearModel {
    std::function<Matrix(const Impl&)> features;  // m x p
    std::vector<double> theta_lower, theta_upper;
};

struct EvaluatorConfig {
    Flavor flavor = Flavor::trivial;
    double lipschitz = 1.0;
    std::optional<double> norm_p;  // defaults to the space metric
    std::optional<LinearModel> linear;       // model of req
    std::optional<LinearModel> linear_prov;  // model of prov; prov bounds are trivial without it
    std::size_t relax_k = 1;                 // >1 averages the K largest predecessor values (unsound)
    bool clip_at_bottom = true;
    // Monotone flavor over real resources: +1 if resource coordinate k grows with the
    // implementation, -1 if it shrinks. Empty means every coordinate grows.
    std::vector<int> orientation;
};

// ---- confidence set for linear models -----------------------------------------

class ConfidenceSet {
public:
    ConfidenceSet(std::vector<double> lower, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size() || lower_.empty())
            throw configuration_error("parameter box has bad dimensions");
        for (std::size_t j = 0; j < lower_.size(); ++j)
            if (!(lower_[j] <= upper_[j])) throw configuration_error("parameter box lower exceeds upper");
    }

    std::size_t dimension() const { return lower_.size(); }
    std::size_t rank() const { return basis_.size(); }
    std::size_t observations() const { return observations_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    // Orthonormal equality rows q.theta = v spanning all observed feature rows.
    const Matrix& rows() const { return basis_; }
    const std::vector<double>& values() const { return values_; }

    static constexpr double tolerance = 1e-9;

    void update(const Matrix& block, const std::vector<double>& observed) {
        if (block.size() != observed.size()) throw contract_violation("feature block and observation differ in size");
        bool grew = false;
        for (std::size_t r = 0; r < block.size(); ++r) {
            if (block[r].size() != dimension()) throw configuration_error("feature row has wrong length");
            grew = add_row(block[r], observed[r]) || grew;
            ++observations_;
        }
        if (grew) {
            LpProblem lp = problem(std::vector<double>(dimension(), 0.0));
            if (!solve_min(lp).feasible)
                throw misspecification_error("observations admit no parameter inside the prior box");
        }
    }

    LpProblem problem(std::vector<double> objective) const {
        return LpProblem{std::move(objective), basis_, values_, lower_, upper_};
    }

    double minimize(const std::vector<double>& c) const { return solve_checked(c, false); }
    double maximize(const std::vector<double>& c) const { return solve_checked(c, true); }

private:
    bool add_row(const std::vector<double>& a, double y) {
        std::vector<double> res = a;
        double predicted = 0;
        std::vector<double> coef(basis_.size(), 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t l = 0; l < basis_.size(); ++l) {
                double c = 0;
                for (std::size_t j = 0; j < res.size(); ++j) c += res[j] * basis_[l][j];
                coef[l] += c;
                for (std::size_t j = 0; j < res.size(); ++j) res[j] -= c * basis_[l][j];
            }
        }
        for (std::size_t l = 0; l < basis_.size(); ++l) predicted += coef[l] * values_[l];
        double norm = 0, scale = 0;
        for (std::size_t j = 0; j < res.size(); ++j) {
            norm += res[j] * res[j];
            scale += a[j] * a[j];
        }
        norm = std::sqrt(norm);
        scale = std::sqrt(scale);
        if (norm > 1e-9 * std::max(1.0, scale)) {
            for (auto& v : res) v /= norm;
            basis_.push_back(std::move(res));
            values_.push_back((y - predicted) / norm);
            return true;
        }
        if (std::abs(y - predicted) > tolerance)
            throw misspecification_error("observation contradicts earlier observations of the linear model");
        return false;
    }

    double solve_checked(const std::vector<double>& c, bool maximize) const {
        LpProblem lp = problem(c);
        LpResult r = maximize ? solve_max(lp) : solve_min(lp);
        if (!r.feasible) throw misspecification_error("confidence set is empty");
        return r.value;
    }

    std::vector<double> lower_, upper_;
    Matrix basis_;
    std::vector<double> values_;
    std::size_t observations_ = 0;
};

inline ConfidenceSet confidence_update(ConfidenceSet cs, const Matrix& block, const std::vector<double>& observed) {
    cs.update(block, observed);
    return cs;
}

// ---- evaluator ----------------------------------------------------------------

struct ProblemContext {
    Space space;
    Poset fun;
    Poset res;
};

inline ProblemContext context_of(const Dpi& dpi) { return {dpi.space_ptr(), dpi.fun_poset(), dpi.res_poset()}; }

class Evaluator {
public:
    Evaluator(EvaluatorConfig cfg, ProblemContext ctx) : cfg_(std::move(cfg)), ctx_(std::move(ctx)) { validate(); }
    Evaluator(EvaluatorConfig cfg, const Dpi& dpi) : Evaluator(std::move(cfg), context_of(dpi)) {}

    const EvaluatorConfig& config() const { return cfg_; }
    const ProblemContext& context() const { return ctx_; }
    bool sound() const { return cfg_.relax_k == 1; }

    // Brings cached linear confidence sets up to date with h (append-only).
    void observe(const History& h) {
        if (cfg_.flavor != Flavor::linear) return;
        if (synced_ != &h || synced_size_ > h.size()) {
            req_set_.reset();
            prov_set_.reset();
            synced_size_ = 0;
        }
        if (!req_set_) req_set_ = fresh_set(*cfg_.linear);
        if (cfg_.linear_prov && !prov_set_) prov_set_ = fresh_set(*cfg_.linear_prov);
        for (std::size_t k = synced_size_; k < h.size(); ++k) absorb(h[k], *req_set_, prov_set_);
        synced_ = &h;
        synced_size_ = h.size();
    }

    Element req_opt(const Impl& i, const History& h) const { return bound(i, h, side::req, true); }
    Element prov_opt(const Impl& i, const History& h) const { return bound(i, h, side::prov, true); }
    Element req_pes(const Impl& i, const History& h) const { return bound(i, h, side::req, false); }
    Element prov_pes(const Impl& i, const History& h) const { return bound(i, h, side::prov, false); }

    // True when req_opt(i,h) lies in the up-set of anti or target is not below prov_opt(i,h).
    // Same verdict as computing both bounds; sound lower bounds that only grow while
    // streaming the history stop as soon as they are covered.
    bool eliminates(const Impl& i, const History& h, const Element& target, const Antichain& anti) const {
        // Every bound lies above the least resource; once that is covered, nothing is left.
        if (!anti.empty() && ctx_.res->has_bottom() && anti.covers(ctx_.res->bottom())) return true;
        if (!leq(*ctx_.fun, target, prov_opt(i, h))) return true;
        if (anti.empty()) return false;
        if (!ctx_.space->contains(i)) throw domain_error("implementation outside the evaluator's space");
        const bool real_res = ctx_.res->is_real();
        bool stopped = false;
        if (cfg_.flavor == Flavor::monotone && real_res && cfg_.relax_k == 1) {
            Element r = real_monotone_bound(i, h, side::req, true, &anti, &stopped);
            return stopped || anti.covers(r);
        }
        if (cfg_.flavor == Flavor::lipschitz && real_res) {
            Element r = lipschitz_bound(i, h, side::req, true, &anti, &stopped);
            return stopped || anti.covers(r);
        }
        return anti.covers(req_opt(i, h));
    }

private:
    enum class side { req, prov };

    void validate() const {
        if (!ctx_.space || !ctx_.fun || !ctx_.res) throw configuration_error("evaluator context is incomplete");
        if (cfg_.relax_k < 1) throw configuration_error("relax_k must be >= 1");
        switch (cfg_.flavor) {
            case Flavor::trivial: break;
            case Flavor::monotone:
                if (!ctx_.space->has_order()) throw configuration_error("monotone evaluator needs an implementation order");
                if ((cfg_.relax_k > 1 || !cfg_.orientation.empty()) && !ctx_.res->is_real())
                    throw configuration_error("relaxed or oriented monotone evaluators need real resources");
                if (!cfg_.orientation.empty()) {
                    if (cfg_.orientation.size() != ctx_.res->dimension())
                        throw configuration_error("orientation length differs from the resource dimension");
                    if (!ctx_.space->has_point_order())
                        throw configuration_error("oriented monotone evaluator needs a componentwise implementation order");
                    for (int s : cfg_.orientation)
                        if (s != 1 && s != -1) throw configuration_error("orientation entries must be +1 or -1");
                }
                break;
            case Flavor::lipschitz:
                if (!(cfg_.lipschitz > 0)) throw configuration_error("Lipschitz constant must be positive");
                if (!cfg_.norm_p && !ctx_.space->has_metric())
                    throw configuration_error("Lipschitz evaluator needs a metric");
                if (cfg_.norm_p && !(*cfg_.norm_p >= 1)) throw configuration_error("norm p must be >= 1");
                if (!ctx_.res->is_real()) throw configuration_error("Lipschitz evaluator needs real resources");
                break;
            case Flavor::linear:
                if (!cfg_.linear || !cfg_.linear->features) throw configuration_error("linear evaluator needs features");
                if (!ctx_.res->is_real()) throw configuration_error("linear evaluator needs real resources");
                fresh_set(*cfg_.linear);
                if (cfg_.linear_prov) {
                    if (!ctx_.fun->is_real()) throw configuration_error("linear provides model needs real functionality");
                    fresh_set(*cfg_.linear_prov);
                }
                break;
        }
    }

    static ConfidenceSet fresh_set(const LinearModel& m) { return ConfidenceSet(m.theta_lower, m.theta_upper); }

    void absorb(const Record& rec, ConfidenceSet& req_set, std::optional<ConfidenceSet>& prov_set) const {
        const auto& r = rec.resource();
        if (r.is_real()) req_set.update(cfg_.linear->features(rec.implementation()), r.reals());
        if (prov_set && rec.functionality().is_real())
            prov_set->update(cfg_.linear_prov->features(rec.implementation()), rec.functionality().reals());
    }

    double distance(const Impl& a, const Impl& b) const {
        if (!cfg_.norm_p) return ctx_.space->distance(a, b);
        const double p = *cfg_.norm_p;
        if (std::isinf(p)) {
            double m = 0;
            for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
            return m;
        }
        double s = 0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(std::abs(a[k] - b[k]), p);
        return std::pow(s, 1.0 / p);
    }

    const Poset& poset(side s) const { return s == side::req ? ctx_.res : ctx_.fun; }
    static const Element& value(const Record& rec, side s) {
        return s == side::req ? rec.resource() : rec.functionality();
    }

    // An optimistic req bound and a pessimistic prov bound are lower bounds; the others are upper.
    static bool is_lower(side s, bool optimistic) { return (s == side::req) == optimistic; }

    Element bound(const Impl& i, const History& h, side s, bool optimistic) const {
        if (!ctx_.space->contains(i)) throw domain_error("implementation outside the evaluator's space");
        const bool lower = is_lower(s, optimistic);
        const PosetSpec& P = *poset(s);
        switch (cfg_.flavor) {
            case Flavor::trivial: return lower ? P.bottom() : P.top();
            case Flavor::monotone: return monotone_bound(i, h, s, lower);
            case Flavor::lipschitz: return lipschitz_bound(i, h, s, lower);
            case Flavor::linear: return linear_bound(i, h, s, lower);
        }
        throw internal_error("unknown evaluator flavor");
    }

    // Lower bounds use predecessors and the join; upper bounds use successors and the meet.
    Element monotone_bound(const Impl& i, const History& h, side s, bool lower) const {
        const PosetSpec& P = *poset(s);
        const ImplementationSpace& I = *ctx_.space;
        const bool oriented = s == side::req && !cfg_.orientation.empty();
        const bool relaxed = s == side::req && lower && cfg_.relax_k > 1;
        if (oriented || relaxed || (P.is_real() && s == side::req)) return real_monotone_bound(i, h, s, lower);

        std::vector<Element> set;
        for (const auto& rec : h) {
            const Element& v = value(rec, s);
            if (lower ? v.is_bottom() : v.is_top()) continue;  // identity of the join / meet
            const bool related = lower ? I.leq(rec.implementation(), i) : I.leq(i, rec.implementation());
            if (related) set.push_back(v);
        }
        if (set.empty()) return lower ? P.bottom() : P.top();
        return lower ? join(P, set) : meet(P, set);
    }

    // Componentwise-real resources, with optional per-coordinate orientation and K-relaxation.
    Element real_monotone_bound(const Impl& i, const History& h, side s, bool lower, const Antichain* stop = nullptr,
                                bool* stopped = nullptr) const {
        const PosetSpec& P = *poset(s);
        const ImplementationSpace& I = *ctx_.space;
        const std::size_t m = P.dimension();
        const double inf = std::numeric_limits<double>::infinity();
        const std::size_t K = lower ? cfg_.relax_k : 1;
        std::vector<int> sign = cfg_.orientation;
        if (sign.empty() || s != side::req) sign.assign(m, 1);

        std::vector<std::vector<double>> seen(m);
        std::vector<double> acc(m, lower ? -inf : inf);
        std::vector<bool> any(m, false);
        std::size_t seen_records = 0;
        for (const auto& rec : h) {
            if (stop && ++seen_records % 16 == 0 && covered(*stop, acc)) {
                *stopped = true;
                return Element::top();
            }
            const Impl& j = rec.implementation();
            int up = -1;  // lazily computed relations: j below i, j above i
            int down = -1;
            const Element& v = value(rec, s);
            for (std::size_t k = 0; k < m; ++k) {
                // Lower bound on coordinate k: records below i in the coordinate's orientation.
                const bool want_below = lower == (sign[k] > 0);
                int& rel = want_below ? down : up;
                if (rel < 0) rel = want_below ? I.leq(j, i) : I.leq(i, j);
                if (!rel) continue;
                double x;
                if (v.is_top())
                    x = inf;
                else if (v.is_bottom())
                    x = -inf;
                else
                    x = v.reals()[k];
                any[k] = true;
                if (K > 1)
                    seen[k].push_back(x);
                else
                    acc[k] = lower ? std::max(acc[k], x) : std::min(acc[k], x);
            }
        }
        if (std::none_of(any.begin(), any.end(), [](bool b) { return b; })) return lower ? P.bottom() : P.top();
        if (K > 1) {
            for (std::size_t k = 0; k < m; ++k) {
                if (!any[k]) continue;
                auto& xs = seen[k];
                const std::size_t take = std::min(K, xs.size());
                std::partial_sort(xs.begin(), xs.begin() + std::ptrdiff_t(take), xs.end(), std::greater<>());
                double sum = 0;
                for (std::size_t t = 0; t < take; ++t) sum += xs[t];
                acc[k] = sum / double(take);
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (any[k]) continue;
            if (lower && P.lower()) acc[k] = (*P.lower())[k];
        }
        return Element::real(std::move(acc));
    }

    Element lipschitz_bound(const Impl& i, const History& h, side s, bool lower, const Antichain* stop = nullptr,
                            bool* stopped = nullptr) const {
        const PosetSpec& P = *poset(s);
        if (!P.is_real()) return lower ? P.bottom() : P.top();
        const std::size_t m = P.dimension();
        const double inf = std::numeric_limits<double>::infinity();
        const double L = cfg_.lipschitz;
        std::vector<double> acc(m, lower ? -inf : inf);
        bool any = false;
        std::size_t seen_records = 0;
        for (const auto& rec : h) {
            if (stop && ++seen_records % 16 == 0 && covered(*stop, acc)) {
                *stopped = true;
                return Element::top();
            }
            const Element& v = value(rec, s);
            if (v.is_sentinel()) {
                // A top value forces +inf into lower bounds; bottom gives no upper information.
                if (lower && v.is_top()) {
                    std::fill(acc.begin(), acc.end(), inf);
                    any = true;
                }
                if (!lower && v.is_bottom()) {
                    std::fill(acc.begin(), acc.end(), -inf);
                    any = true;
                }
                continue;
            }
            any = true;
            const double slack = L * distance(i, rec.implementation());
            const auto& x = v.reals();
            for (std::size_t k = 0; k < m; ++k)
                acc[k] = lower ? std::max(acc[k], x[k] - slack) : std::min(acc[k], x[k] + slack);
        }
        if (!any) return lower ? P.bottom() : P.top();
        if (lower && cfg_.clip_at_bottom && P.lower())
            for (std::size_t k = 0; k < m; ++k) acc[k] = std::max(acc[k], (*P.lower())[k]);
        if (std::all_of(acc.begin(), acc.end(), [&](double x) { return x == inf; }) && P.admits_top_tag())
            return Element::top();
        return Element::real(std::move(acc));
    }

    // Some member of anti lies below the partial lower bound acc (a real vector).
    static bool covered(const Antichain& anti, const std::vector<double>& acc) {
        const double tol = anti.spec().tolerance();
        for (const auto& a : anti) {
            if (a.is_bottom()) return true;
            if (!a.is_real()) continue;
            const auto& x = a.reals();
            bool below = true;
            for (std::size_t k = 0; k < acc.size() && below; ++k) below = x[k] <= acc[k] + tol;
            if (below) return true;
        }
        return false;
    }

    Element linear_bound(const Impl& i, const History& h, side s, bool lower) const {
        const PosetSpec& P = *poset(s);
        const LinearModel* model = s == side::req ? &*cfg_.linear : (cfg_.linear_prov ? &*cfg_.linear_prov : nullptr);
        if (!model) return lower ? P.bottom() : P.top();

        const ConfidenceSet* set = nullptr;
        std::optional<ConfidenceSet> local_req, local_prov;
        if (synced_ == &h && synced_size_ == h.size()) {
            set = s == side::req ? &*req_set_ : &*prov_set_;
        } else {
            local_req = fresh_set(*cfg_.linear);
            if (cfg_.linear_prov) local_prov = fresh_set(*cfg_.linear_prov);
            for (const auto& rec : h) absorb(rec, *local_req, local_prov);
            set = s == side::req ? &*local_req : &*local_prov;
        }
        const Matrix phi = model->features(i);
        if (phi.size() != P.dimension()) throw configuration_error("feature block has the wrong number of rows");
        std::vector<double> out;
        out.reserve(phi.size());
        for (const auto& row : phi) out.push_back(lower ? set->minimize(row) : set->maximize(row));
        return Element::real(std::move(out));
    }

    EvaluatorConfig cfg_;
    ProblemContext ctx_;
    const History* synced_ = nullptr;
    std::size_t synced_size_ = 0;
    std::optional<ConfidenceSet> req_set_, prov_set_;
};

}  // namespace codesign
