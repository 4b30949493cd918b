#pragma once

// Design problems with implementations: an implementation space, provides/requires
// maps, an evaluation cache, and the brute-force query oracle.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codesign/order.hpp"

namespace codesign {

using Impl = std::vector<double>;

class ImplementationSpace;
using Space = std::shared_ptr<const ImplementationSpace>;

struct SpaceOptions {
    // p of the l_p distance; nullopt means no metric. Use infinity for l_inf.
    std::optional<double> metric_p;
    // Order over implementations: componentwise-real over points, or a finite poset over item indices.
    Poset order;
};

class ImplementationSpace {
public:
    enum class kind_t { finite, box };

    // An empty item list is allowed (an interconnection with no consistent tuple).
    static Space finite(std::vector<Impl> items, SpaceOptions opts = {}) {
        auto s = std::shared_ptr<ImplementationSpace>(new ImplementationSpace(kind_t::finite));
        s->dim_ = items.empty() ? 0 : items[0].size();
        for (std::size_t k = 0; k < items.size(); ++k) {
            if (items[k].size() != s->dim_) throw contract_violation("implementations have mixed dimensions");
            if (!s->index_.emplace(items[k], k).second)
                throw contract_violation("finite implementation space has duplicate items");
        }
        s->items_ = std::move(items);
        s->set_options(std::move(opts));
        return s;
    }

    static Space box(Impl lower, Impl upper, SpaceOptions opts = {}) {
        if (lower.size() != upper.size() || lower.empty()) throw contract_violation("box bounds have bad dimensions");
        for (std::size_t k = 0; k < lower.size(); ++k)
            if (!(lower[k] <= upper[k])) throw contract_violation("box lower bound exceeds upper bound");
        auto s = std::shared_ptr<ImplementationSpace>(new ImplementationSpace(kind_t::box));
        s->dim_ = lower.size();
        s->lower_ = std::move(lower);
        s->upper_ = std::move(upper);
        s->set_options(std::move(opts));
        return s;
    }

    kind_t kind() const { return kind_; }
    bool is_finite() const { return kind_ == kind_t::finite; }
    std::size_t dimension() const { return dim_; }
    const std::vector<Impl>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    const Impl& lower() const { return lower_; }
    const Impl& upper() const { return upper_; }

    std::optional<std::size_t> index_of(const Impl& i) const {
        auto it = index_.find(i);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const Impl& i) const {
        if (i.size() != dim_) return false;
        if (is_finite()) return index_.count(i) > 0;
        for (std::size_t k = 0; k < dim_; ++k)
            if (!(lower_[k] <= i[k] && i[k] <= upper_[k])) return false;
        return true;
    }

    bool has_metric() const { return metric_p_.has_value(); }
    double metric_p() const { return metric_p_.value(); }
    double distance(const Impl& a, const Impl& b) const {
        if (!metric_p_) throw configuration_error("implementation space has no metric");
        const double p = *metric_p_;
        if (std::isinf(p)) {
            double m = 0;
            for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
            return m;
        }
        if (p == 2.0) {
            double s = 0;
            for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
            return std::sqrt(s);
        }
        if (p == 1.0) {
            double s = 0;
            for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
            return s;
        }
        double s = 0;
        for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(std::abs(a[k] - b[k]), p);
        return std::pow(s, 1.0 / p);
    }

    bool has_order() const { return static_cast<bool>(order_); }
    const Poset& order() const { return order_; }
    // Fast path: componentwise order on points with zero tolerance.
    bool has_point_order() const { return point_order_; }

    Element order_element(const Impl& i) const {
        if (!order_) throw configuration_error("implementation space has no order");
        if (order_->kind() == PosetSpec::kind_t::finite) {
            auto k = index_of(i);
            if (!k) throw domain_error("implementation is not an item of the space");
            return Element::finite(*k);
        }
        return Element::real(i);
    }

    // a below b in the implementation order.
    bool leq(const Impl& a, const Impl& b) const {
        if (point_order_) {
            for (std::size_t k = 0; k < a.size(); ++k)
                if (!(a[k] <= b[k])) return false;
            return true;
        }
        return codesign::leq(*order_, order_element(a), order_element(b));
    }

private:
    explicit ImplementationSpace(kind_t k) : kind_(k) {}

    void set_options(SpaceOptions opts) {
        if (opts.metric_p && !(*opts.metric_p >= 1.0)) throw contract_violation("metric p must be >= 1");
        metric_p_ = opts.metric_p;
        order_ = std::move(opts.order);
        if (order_) {
            if (order_->kind() == PosetSpec::kind_t::finite) {
                if (!is_finite() || order_->size() != items_.size())
                    throw contract_violation("finite implementation order must index the items");
            } else if (order_->kind() == PosetSpec::kind_t::real) {
                if (order_->dimension() != dim_) throw contract_violation("implementation order has wrong dimension");
                point_order_ = order_->tolerance() == 0.0;
            } else {
                throw contract_violation("implementation order must be componentwise-real or finite");
            }
        }
    }

    kind_t kind_;
    std::size_t dim_ = 0;
    std::vector<Impl> items_;
    std::map<Impl, std::size_t> index_;
    Impl lower_, upper_;
    std::optional<double> metric_p_;
    Poset order_;
    bool point_order_ = false;
};

struct QueryResult {
    Impl implementation;
    Element functionality;
    Element resource;

    friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

using ElementMap = std::function<Element(const Impl&)>;
using PointSource = std::function<std::vector<Impl>()>;

struct DpiModel {
    Space space;
    Poset fun;
    Poset res;
    ElementMap prov;
    ElementMap req;
    // Optional finite set of implementations that realizes every attainable (prov, req)
    // pair; the oracle uses it instead of a grid for box spaces.
    PointSource critical_points;
    std::string name;
};

class Dpi {
public:
    explicit Dpi(DpiModel m) : model_(std::make_shared<const DpiModel>(std::move(m))) {
        if (!model_->space || !model_->fun || !model_->res || !model_->prov || !model_->req)
            throw contract_violation("design problem is missing a component");
    }

    const ImplementationSpace& space() const { return *model_->space; }
    const Space& space_ptr() const { return model_->space; }
    const Poset& fun_poset() const { return model_->fun; }
    const Poset& res_poset() const { return model_->res; }
    const std::string& name() const { return model_->name; }
    const PointSource& critical_points() const { return model_->critical_points; }
    const DpiModel& model() const { return *model_; }

    // Uncounted access to the true maps (oracle and test use).
    Element prov(const Impl& i) const {
        require_in_space(i);
        Element f = model_->prov(i);
        model_->fun->check(f);
        return f;
    }
    Element req(const Impl& i) const {
        require_in_space(i);
        Element r = model_->req(i);
        model_->res->check(r);
        return r;
    }

    // Counted evaluation; repeats are served from the cache.
    QueryResult evaluate(const Impl& i) {
        auto it = cache_.find(i);
        if (it != cache_.end()) return it->second;
        QueryResult q{i, prov(i), req(i)};
        ++evaluations_;
        cache_.emplace(i, q);
        return q;
    }

    std::size_t evaluation_count() const { return evaluations_; }
    bool is_cached(const Impl& i) const { return cache_.count(i) > 0; }

    // Same model, empty cache and counter.
    Dpi fresh() const { return Dpi(model_); }

private:
    explicit Dpi(std::shared_ptr<const DpiModel> m) : model_(std::move(m)) {}

    void require_in_space(const Impl& i) const {
        if (!model_->space->contains(i)) throw domain_error("implementation outside the design problem's space");
    }

    std::shared_ptr<const DpiModel> model_;
    std::map<Impl, QueryResult> cache_;
    std::size_t evaluations_ = 0;
};

// ---- oracle -----------------------------------------------------------------

struct OracleOptions {
    std::size_t grid_points = 1'000'000;  // total, split evenly per dimension
};

struct OracleResult {
    Antichain antichain;
    std::vector<Impl> witnesses;  // parallel to antichain.members()
    bool infeasible = false;
};

// Evenly spaced grid over a box, endpoints included, with floor(total^(1/d)) points per axis.
inline std::vector<Impl> grid_points(const Impl& lower, const Impl& upper, std::size_t total) {
    const std::size_t d = lower.size();
    std::size_t n = static_cast<std::size_t>(std::floor(std::pow(double(total), 1.0 / double(d)) + 1e-9));
    n = std::max<std::size_t>(n, 2);
    std::size_t count = 1;
    for (std::size_t k = 0; k < d; ++k) count *= n;
    std::vector<Impl> out;
    out.reserve(count);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t c = 0; c < count; ++c) {
        Impl x(d);
        for (std::size_t k = 0; k < d; ++k)
            x[k] = lower[k] + (upper[k] - lower[k]) * double(idx[k]) / double(n - 1);
        out.push_back(std::move(x));
        for (std::size_t k = 0; k < d; ++k) {
            if (++idx[k] < n) break;
            idx[k] = 0;
        }
    }
    return out;
}

inline std::vector<Impl> oracle_points(const Dpi& dpi, const OracleOptions& opts = {}) {
    if (dpi.space().is_finite()) return dpi.space().items();
    if (dpi.critical_points()) return dpi.critical_points()();
    return grid_points(dpi.space().lower(), dpi.space().upper(), opts.grid_points);
}

// Minimal resources among implementations whose functionality meets the target.
inline OracleResult minimize_over(const Dpi& dpi, const Element& f, const std::vector<Impl>& points) {
    const PosetSpec& F = *dpi.fun_poset();
    const PosetSpec& R = *dpi.res_poset();
    F.check(f);
    std::vector<std::pair<Element, Impl>> front;
    bool any = false;
    for (const auto& i : points) {
        if (!leq(F, f, dpi.prov(i))) continue;
        any = true;
        Element r = dpi.req(i);
        bool covered = false;
        for (const auto& [a, w] : front) {
            if (leq(R, a, r)) {
                covered = true;
                break;
            }
        }
        if (covered) continue;
        std::erase_if(front, [&](const auto& e) { return leq(R, r, e.first); });
        front.emplace_back(std::move(r), i);
    }
    OracleResult out{Antichain(dpi.res_poset()), {}, !any};
    for (auto& [r, w] : front) {
        out.antichain.insert(r);
        out.witnesses.push_back(std::move(w));
    }
    return out;
}

inline OracleResult fix_fun_min_res(const Dpi& dpi, const Element& f, const OracleOptions& opts = {}) {
    return minimize_over(dpi, f, oracle_points(dpi, opts));
}

}  // namespace codesign
