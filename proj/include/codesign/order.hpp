#pragma once

// Partial orders, elements, antichains and lattice operations.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codesign/errors.hpp"

namespace codesign {

class Element {
public:
    enum class tag : std::uint8_t { bottom, top, real, finite, tuple };

    Element() = default;

    static Element bottom() { return Element(tag::bottom); }
    static Element top() { return Element(tag::top); }
    static Element real(std::vector<double> xs) {
        Element e(tag::real);
        e.reals_ = std::move(xs);
        return e;
    }
    static Element real(std::initializer_list<double> xs) { return real(std::vector<double>(xs)); }
    static Element finite(std::size_t id) {
        Element e(tag::finite);
        e.id_ = id;
        return e;
    }
    static Element tuple(std::vector<Element> parts) {
        Element e(tag::tuple);
        e.parts_ = std::move(parts);
        return e;
    }

    tag kind() const { return tag_; }
    bool is_bottom() const { return tag_ == tag::bottom; }
    bool is_top() const { return tag_ == tag::top; }
    bool is_sentinel() const { return tag_ == tag::bottom || tag_ == tag::top; }
    bool is_real() const { return tag_ == tag::real; }
    bool is_finite() const { return tag_ == tag::finite; }
    bool is_tuple() const { return tag_ == tag::tuple; }

    const std::vector<double>& reals() const {
        if (tag_ != tag::real) throw invalid_element("element is not a real vector");
        return reals_;
    }
    std::size_t id() const {
        if (tag_ != tag::finite) throw invalid_element("element is not a finite element id");
        return id_;
    }
    const std::vector<Element>& parts() const {
        if (tag_ != tag::tuple) throw invalid_element("element is not a tuple");
        return parts_;
    }

    friend bool operator==(const Element& a, const Element& b) {
        if (a.tag_ != b.tag_) return false;
        switch (a.tag_) {
            case tag::real: return a.reals_ == b.reals_;
            case tag::finite: return a.id_ == b.id_;
            case tag::tuple: return a.parts_ == b.parts_;
            default: return true;
        }
    }
    friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }

    // Arbitrary but deterministic total order, used for sets and tie-breaks.
    friend bool operator<(const Element& a, const Element& b) {
        if (a.tag_ != b.tag_) return a.tag_ < b.tag_;
        switch (a.tag_) {
            case tag::real: return a.reals_ < b.reals_;
            case tag::finite: return a.id_ < b.id_;
            case tag::tuple:
                return std::lexicographical_compare(a.parts_.begin(), a.parts_.end(), b.parts_.begin(),
                                                    b.parts_.end());
            default: return false;
        }
    }

private:
    explicit Element(tag t) : tag_(t) {}

    tag tag_ = tag::bottom;
    std::vector<double> reals_;
    std::size_t id_ = 0;
    std::vector<Element> parts_;
};

class PosetSpec;
using Poset = std::shared_ptr<const PosetSpec>;

struct RealOptions {
    double tolerance = 0.0;                    // x <= y iff x_k <= y_k + tolerance for all k
    std::optional<std::vector<double>> lower;  // natural least element, if any
    bool augment_top = true;
    bool augment_bottom = true;
};

struct FiniteOptions {
    bool augment_top = false;  // only used when no unique maximal element exists
    bool augment_bottom = false;
};

class PosetSpec : public std::enable_shared_from_this<PosetSpec> {
public:
    enum class kind_t { real, finite, product, opposite };

    static Poset real(std::size_t m, RealOptions opts = {}) {
        if (m == 0) throw contract_violation("componentwise-real poset needs dimension >= 1");
        if (opts.lower && opts.lower->size() != m) throw contract_violation("lower bound has wrong dimension");
        if (opts.tolerance < 0) throw contract_violation("order tolerance must be nonnegative");
        auto p = std::shared_ptr<PosetSpec>(new PosetSpec(kind_t::real));
        p->dim_ = m;
        p->tol_ = opts.tolerance;
        p->lower_ = std::move(opts.lower);
        p->aug_top_ = opts.augment_top;
        p->aug_bottom_ = opts.augment_bottom;
        return p;
    }

    static Poset finite(std::vector<std::string> names, const std::vector<std::pair<std::size_t, std::size_t>>& covers,
                        FiniteOptions opts = {}) {
        auto p = std::shared_ptr<PosetSpec>(new PosetSpec(kind_t::finite));
        const std::size_t n = names.size();
        if (n == 0) throw contract_violation("finite poset needs at least one element");
        for (std::size_t i = 0; i < n; ++i) {
            if (!p->index_.emplace(names[i], i).second)
                throw contract_violation("duplicate element id '" + names[i] + "'");
        }
        std::vector<std::vector<std::size_t>> up(n);
        std::vector<std::size_t> indegree(n, 0);
        for (auto [a, b] : covers) {
            if (a >= n || b >= n) throw contract_violation("cover references unknown element");
            if (a == b) throw contract_violation("cover relation has a self loop at '" + names[a] + "'");
            up[a].push_back(b);
            ++indegree[b];
        }
        // Kahn's algorithm: acyclicity check and a topological order for the height computation.
        std::vector<std::size_t> order, frontier;
        for (std::size_t i = 0; i < n; ++i)
            if (indegree[i] == 0) frontier.push_back(i);
        while (!frontier.empty()) {
            std::size_t v = frontier.back();
            frontier.pop_back();
            order.push_back(v);
            for (std::size_t w : up[v])
                if (--indegree[w] == 0) frontier.push_back(w);
        }
        if (order.size() != n) throw contract_violation("cover relation contains a cycle");

        p->reach_.assign(n * n, 0);
        for (std::size_t s = 0; s < n; ++s) {
            std::vector<std::size_t> stack{s};
            p->reach_[s * n + s] = 1;
            while (!stack.empty()) {
                std::size_t v = stack.back();
                stack.pop_back();
                for (std::size_t w : up[v]) {
                    if (!p->reach_[s * n + w]) {
                        p->reach_[s * n + w] = 1;
                        stack.push_back(w);
                    }
                }
            }
        }
        std::vector<std::size_t> depth(n, 0);
        for (std::size_t v : order)
            for (std::size_t w : up[v]) depth[w] = std::max(depth[w], depth[v] + 1);
        p->height_ = n ? *std::max_element(depth.begin(), depth.end()) : 0;

        for (std::size_t i = 0; i < n; ++i) {
            bool is_top = true, is_bottom = true;
            for (std::size_t j = 0; j < n; ++j) {
                if (!p->reach_[j * n + i]) is_top = false;
                if (!p->reach_[i * n + j]) is_bottom = false;
            }
            if (is_top) p->natural_top_ = i;
            if (is_bottom) p->natural_bottom_ = i;
        }
        p->aug_top_ = opts.augment_top && !p->natural_top_;
        p->aug_bottom_ = opts.augment_bottom && !p->natural_bottom_;
        p->names_ = std::move(names);
        p->covers_ = covers;
        return p;
    }

    static Poset product(std::vector<Poset> parts) {
        if (parts.empty()) throw contract_violation("product poset needs at least one part");
        for (const auto& q : parts)
            if (!q) throw contract_violation("null product part");
        auto p = std::shared_ptr<PosetSpec>(new PosetSpec(kind_t::product));
        p->parts_ = std::move(parts);
        return p;
    }

    static Poset opposite(Poset inner) {
        if (!inner) throw contract_violation("null opposite inner poset");
        auto p = std::shared_ptr<PosetSpec>(new PosetSpec(kind_t::opposite));
        p->parts_ = {std::move(inner)};
        return p;
    }

    kind_t kind() const { return kind_; }
    bool is_real() const { return kind_ == kind_t::real; }

    // componentwise-real
    std::size_t dimension() const { return dim_; }
    double tolerance() const { return tol_; }
    const std::optional<std::vector<double>>& lower() const { return lower_; }

    // finite
    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    Element element(const std::string& name) const {
        auto id = find(name);
        if (!id) throw invalid_element("unknown finite element '" + name + "'");
        return Element::finite(*id);
    }
    bool reaches(std::size_t a, std::size_t b) const { return reach_[a * names_.size() + b] != 0; }
    const std::vector<std::pair<std::size_t, std::size_t>>& covers() const { return covers_; }
    std::size_t height() const {
        switch (kind_) {
            case kind_t::finite: return height_;
            case kind_t::product: {
                std::size_t h = 0;
                for (const auto& q : parts_) h += q->height();
                return h;
            }
            case kind_t::opposite: return parts_[0]->height();
            default: throw contract_violation("height is only defined for finite posets");
        }
    }

    // product / opposite
    const std::vector<Poset>& parts() const { return parts_; }
    const Poset& inner() const { return parts_.at(0); }

    bool admits_top_tag() const {
        if (kind_ == kind_t::opposite) return parts_[0]->admits_top_tag();
        return aug_top_;
    }
    bool admits_bottom_tag() const {
        if (kind_ == kind_t::opposite) return parts_[0]->admits_bottom_tag();
        return aug_bottom_;
    }

    bool has_top() const {
        switch (kind_) {
            case kind_t::real: return aug_top_;
            case kind_t::finite: return natural_top_.has_value() || aug_top_;
            case kind_t::product:
                return std::all_of(parts_.begin(), parts_.end(), [](const Poset& q) { return q->has_top(); });
            case kind_t::opposite: return parts_[0]->has_bottom();
        }
        return false;
    }
    bool has_bottom() const {
        switch (kind_) {
            case kind_t::real: return lower_.has_value() || aug_bottom_;
            case kind_t::finite: return natural_bottom_.has_value() || aug_bottom_;
            case kind_t::product:
                return std::all_of(parts_.begin(), parts_.end(), [](const Poset& q) { return q->has_bottom(); });
            case kind_t::opposite: return parts_[0]->has_top();
        }
        return false;
    }
    Element top() const {
        switch (kind_) {
            case kind_t::real:
                if (aug_top_) return Element::top();
                break;
            case kind_t::finite:
                if (natural_top_) return Element::finite(*natural_top_);
                if (aug_top_) return Element::top();
                break;
            case kind_t::product: {
                std::vector<Element> xs;
                for (const auto& q : parts_) xs.push_back(q->top());
                return Element::tuple(std::move(xs));
            }
            case kind_t::opposite: return parts_[0]->bottom();
        }
        throw contract_violation("poset has no top element");
    }
    Element bottom() const {
        switch (kind_) {
            case kind_t::real:
                if (lower_) return Element::real(*lower_);
                if (aug_bottom_) return Element::bottom();
                break;
            case kind_t::finite:
                if (natural_bottom_) return Element::finite(*natural_bottom_);
                if (aug_bottom_) return Element::bottom();
                break;
            case kind_t::product: {
                std::vector<Element> xs;
                for (const auto& q : parts_) xs.push_back(q->bottom());
                return Element::tuple(std::move(xs));
            }
            case kind_t::opposite: return parts_[0]->top();
        }
        throw contract_violation("poset has no bottom element");
    }

    // Throws invalid_element unless x is shaped for this poset.
    void check(const Element& x) const {
        switch (kind_) {
            case kind_t::real:
                if (x.is_real()) {
                    if (x.reals().size() != dim_)
                        throw invalid_element("real vector of length " + std::to_string(x.reals().size()) +
                                              " used with a " + std::to_string(dim_) + "-dimensional poset");
                    return;
                }
                break;
            case kind_t::finite:
                if (x.is_finite()) {
                    if (x.id() >= names_.size()) throw invalid_element("finite element id out of range");
                    return;
                }
                break;
            case kind_t::product:
                if (!x.is_tuple() || x.parts().size() != parts_.size())
                    throw invalid_element("product poset expects a tuple with " + std::to_string(parts_.size()) +
                                          " parts");
                for (std::size_t k = 0; k < parts_.size(); ++k) parts_[k]->check(x.parts()[k]);
                return;
            case kind_t::opposite: parts_[0]->check(x); return;
        }
        if (x.is_top() && aug_top_) return;
        if (x.is_bottom() && aug_bottom_) return;
        throw invalid_element("element kind does not match the poset");
    }

    Poset self() const { return shared_from_this(); }

private:
    explicit PosetSpec(kind_t k) : kind_(k) {}

    kind_t kind_;
    std::size_t dim_ = 0;
    double tol_ = 0.0;
    std::optional<std::vector<double>> lower_;
    bool aug_top_ = false;
    bool aug_bottom_ = false;
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::pair<std::size_t, std::size_t>> covers_;
    std::vector<std::uint8_t> reach_;
    std::size_t height_ = 0;
    std::optional<std::size_t> natural_top_, natural_bottom_;
    std::vector<Poset> parts_;
};

namespace detail {

// Sentinel handling shared by the real and finite kinds. Returns 1/0 when decided, -1 otherwise.
inline int sentinel_leq(const Element& x, const Element& y) {
    if (x.is_bottom() || y.is_top()) return 1;
    if (x.is_top() || y.is_bottom()) return 0;
    return -1;
}

inline bool leq_checked(const PosetSpec& p, const Element& x, const Element& y) {
    switch (p.kind()) {
        case PosetSpec::kind_t::real: {
            int s = sentinel_leq(x, y);
            if (s >= 0) return s == 1;
            const auto& a = x.reals();
            const auto& b = y.reals();
            const double tol = p.tolerance();
            for (std::size_t k = 0; k < a.size(); ++k)
                if (!(a[k] <= b[k] + tol)) return false;
            return true;
        }
        case PosetSpec::kind_t::finite: {
            int s = sentinel_leq(x, y);
            if (s >= 0) return s == 1;
            return p.reaches(x.id(), y.id());
        }
        case PosetSpec::kind_t::product: {
            const auto& xs = x.parts();
            const auto& ys = y.parts();
            for (std::size_t k = 0; k < xs.size(); ++k)
                if (!leq_checked(*p.parts()[k], xs[k], ys[k])) return false;
            return true;
        }
        case PosetSpec::kind_t::opposite: return leq_checked(*p.inner(), y, x);
    }
    return false;
}

}  // namespace detail

inline bool leq(const PosetSpec& p, const Element& x, const Element& y) {
    p.check(x);
    p.check(y);
    return detail::leq_checked(p, x, y);
}

inline bool leq(const Poset& p, const Element& x, const Element& y) { return leq(*p, x, y); }

// Strict part of the order: x below y and not equivalent to it.
inline bool less(const PosetSpec& p, const Element& x, const Element& y) { return leq(p, x, y) && !leq(p, y, x); }

namespace detail {

inline Element finite_bound(const PosetSpec& p, const std::vector<std::size_t>& ids, bool upper) {
    const std::size_t n = p.size();
    std::vector<std::size_t> bounds;
    for (std::size_t u = 0; u < n; ++u) {
        bool ok = true;
        for (std::size_t s : ids) {
            if (upper ? !p.reaches(s, u) : !p.reaches(u, s)) {
                ok = false;
                break;
            }
        }
        if (ok) bounds.push_back(u);
    }
    if (bounds.empty()) {
        if (upper && p.admits_top_tag()) return Element::top();
        if (!upper && p.admits_bottom_tag()) return Element::bottom();
        throw no_join(std::string("no ") + (upper ? "upper" : "lower") + " bound exists in finite poset");
    }
    for (std::size_t u : bounds) {
        bool best = true;
        for (std::size_t v : bounds) {
            if (upper ? !p.reaches(u, v) : !p.reaches(v, u)) {
                best = false;
                break;
            }
        }
        if (best) return Element::finite(u);
    }
    throw no_join(std::string("no ") + (upper ? "least upper" : "greatest lower") + " bound in finite poset");
}

inline Element lattice_bound(const PosetSpec& p, const std::vector<Element>& s, bool upper) {
    switch (p.kind()) {
        case PosetSpec::kind_t::real: {
            // upper: any top absorbs, bottoms are neutral. lower: the dual.
            std::vector<double> acc;
            bool seen = false;
            for (const auto& x : s) {
                if (x.is_top()) {
                    if (upper) return Element::top();
                    continue;
                }
                if (x.is_bottom()) {
                    if (!upper) return Element::bottom();
                    continue;
                }
                const auto& v = x.reals();
                if (!seen) {
                    acc = v;
                    seen = true;
                } else {
                    for (std::size_t k = 0; k < acc.size(); ++k)
                        acc[k] = upper ? std::max(acc[k], v[k]) : std::min(acc[k], v[k]);
                }
            }
            if (!seen) return upper ? Element::bottom() : Element::top();
            return Element::real(std::move(acc));
        }
        case PosetSpec::kind_t::finite: {
            std::vector<std::size_t> ids;
            for (const auto& x : s) {
                if (x.is_top()) {
                    if (upper) return Element::top();
                    continue;
                }
                if (x.is_bottom()) {
                    if (!upper) return Element::bottom();
                    continue;
                }
                ids.push_back(x.id());
            }
            if (ids.empty()) return upper ? Element::bottom() : Element::top();
            return finite_bound(p, ids, upper);
        }
        case PosetSpec::kind_t::product: {
            std::vector<Element> out;
            for (std::size_t k = 0; k < p.parts().size(); ++k) {
                std::vector<Element> proj;
                proj.reserve(s.size());
                for (const auto& x : s) proj.push_back(x.parts()[k]);
                out.push_back(lattice_bound(*p.parts()[k], proj, upper));
            }
            return Element::tuple(std::move(out));
        }
        case PosetSpec::kind_t::opposite: return lattice_bound(*p.inner(), s, !upper);
    }
    throw internal_error("unknown poset kind");
}

}  // namespace detail

// Least upper bound of a nonempty set.
inline Element join(const PosetSpec& p, const std::vector<Element>& s) {
    if (s.empty()) throw contract_violation("join of an empty set");
    for (const auto& x : s) p.check(x);
    return detail::lattice_bound(p, s, true);
}

// Greatest lower bound of a nonempty set.
inline Element meet(const PosetSpec& p, const std::vector<Element>& s) {
    if (s.empty()) throw contract_violation("meet of an empty set");
    for (const auto& x : s) p.check(x);
    return detail::lattice_bound(p, s, false);
}

class Antichain {
public:
    explicit Antichain(Poset p) : poset_(std::move(p)) {
        if (!poset_) throw contract_violation("antichain needs a poset");
    }

    const Poset& poset() const { return poset_; }
    const PosetSpec& spec() const { return *poset_; }
    const std::vector<Element>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

    // True iff some member is below x.
    bool covers(const Element& x) const {
        poset_->check(x);
        for (const auto& a : members_)
            if (detail::leq_checked(*poset_, a, x)) return true;
        return false;
    }

    // Adds x unless it is already covered; drops members that x dominates.
    bool insert(const Element& x) {
        if (covers(x)) return false;
        const PosetSpec& p = *poset_;
        std::erase_if(members_, [&](const Element& a) { return detail::leq_checked(p, x, a); });
        members_.push_back(x);
        return true;
    }

    bool contains(const Element& x) const { return std::find(members_.begin(), members_.end(), x) != members_.end(); }

    // Set equality of members (order-insensitive).
    bool same_members(const Antichain& other) const {
        if (other.size() != size()) return false;
        for (const auto& a : members_)
            if (!other.contains(a)) return false;
        return true;
    }

    std::vector<Element> sorted_members() const {
        auto out = members_;
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    Poset poset_;
    std::vector<Element> members_;
};

inline bool antichain_insert(Antichain& ac, const Element& x) { return ac.insert(x); }

inline bool in_upper_closure(const Antichain& ac, const Element& x) { return ac.covers(x); }

// ↑inner ⊆ ↑outer, i.e. every member of inner is covered by outer.
inline bool upper_closure_within(const Antichain& inner, const Antichain& outer) {
    for (const auto& x : inner)
        if (!outer.covers(x)) return false;
    return true;
}

// { x in s | no y in s strictly below x }, keeping the first of any equivalent (mutually below) pair.
inline Antichain minimal_elements(const Poset& p, const std::vector<Element>& s) {
    for (const auto& x : s) p->check(x);
    Antichain out(p);
    std::vector<Element> keep;
    for (std::size_t a = 0; a < s.size(); ++a) {
        bool minimal = true;
        for (std::size_t b = 0; b < s.size() && minimal; ++b) {
            if (a == b) continue;
            const bool below = detail::leq_checked(*p, s[b], s[a]);
            if (!below) continue;
            const bool above = detail::leq_checked(*p, s[a], s[b]);
            if (!above || b < a) minimal = false;
        }
        if (minimal) keep.push_back(s[a]);
    }
    for (auto& x : keep) out.insert(x);
    return out;
}

// ---- coordinates ------------------------------------------------------------

inline std::size_t coordinate_count(const PosetSpec& p) {
    switch (p.kind()) {
        case PosetSpec::kind_t::real: return p.dimension();
        case PosetSpec::kind_t::finite: return 1;
        case PosetSpec::kind_t::product: return p.parts().size();
        case PosetSpec::kind_t::opposite: return coordinate_count(*p.inner());
    }
    return 0;
}

inline Poset coordinate_poset(const PosetSpec& p, std::size_t k) {
    if (k >= coordinate_count(p)) throw contract_violation("coordinate index out of range");
    switch (p.kind()) {
        case PosetSpec::kind_t::real: {
            if (p.dimension() == 1) return p.self();
            RealOptions o;
            o.tolerance = p.tolerance();
            if (p.lower()) o.lower = std::vector<double>{(*p.lower())[k]};
            o.augment_top = p.admits_top_tag();
            o.augment_bottom = p.admits_bottom_tag();
            return PosetSpec::real(1, o);
        }
        case PosetSpec::kind_t::finite: return p.self();
        case PosetSpec::kind_t::product: return p.parts()[k];
        case PosetSpec::kind_t::opposite: {
            if (coordinate_count(p) == 1) return p.self();
            return PosetSpec::opposite(coordinate_poset(*p.inner(), k));
        }
    }
    throw internal_error("unknown poset kind");
}

inline Element coordinate(const PosetSpec& p, const Element& x, std::size_t k) {
    p.check(x);
    if (k >= coordinate_count(p)) throw contract_violation("coordinate index out of range");
    switch (p.kind()) {
        case PosetSpec::kind_t::real:
            if (x.is_sentinel()) return x;
            return Element::real({x.reals()[k]});
        case PosetSpec::kind_t::finite: return x;
        case PosetSpec::kind_t::product: return x.parts()[k];
        case PosetSpec::kind_t::opposite: return coordinate(*p.inner(), x, k);
    }
    throw internal_error("unknown poset kind");
}

inline bool same_structure(const PosetSpec& a, const PosetSpec& b) {
    if (&a == &b) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case PosetSpec::kind_t::real:
            return a.dimension() == b.dimension() && a.tolerance() == b.tolerance() && a.lower() == b.lower() &&
                   a.admits_top_tag() == b.admits_top_tag() && a.admits_bottom_tag() == b.admits_bottom_tag();
        case PosetSpec::kind_t::finite: {
            if (a.names() != b.names()) return false;
            if (a.admits_top_tag() != b.admits_top_tag() || a.admits_bottom_tag() != b.admits_bottom_tag())
                return false;
            const std::size_t n = a.size();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (a.reaches(i, j) != b.reaches(i, j)) return false;
            return true;
        }
        case PosetSpec::kind_t::product:
            if (a.parts().size() != b.parts().size()) return false;
            for (std::size_t k = 0; k < a.parts().size(); ++k)
                if (!same_structure(*a.parts()[k], *b.parts()[k])) return false;
            return true;
        case PosetSpec::kind_t::opposite: return same_structure(*a.inner(), *b.inner());
    }
    return false;
}

// Poset over a concatenation of coordinates. Real scalar coordinates with a common
// tolerance merge into one componentwise-real poset; anything else becomes a product.
inline Poset concat_posets(const std::vector<Poset>& coords) {
    if (coords.empty()) throw contract_violation("cannot concatenate zero coordinates");
    if (coords.size() == 1 && coordinate_count(*coords[0]) == 1) return coords[0];
    bool all_real = true;
    for (const auto& c : coords)
        if (c->kind() != PosetSpec::kind_t::real || c->dimension() != 1 || c->tolerance() != coords[0]->tolerance())
            all_real = false;
    if (!all_real) return PosetSpec::product(coords);
    RealOptions o;
    o.tolerance = coords[0]->tolerance();
    bool all_lower = true;
    std::vector<double> lower;
    for (const auto& c : coords) {
        o.augment_top = o.augment_top && c->admits_top_tag();
        o.augment_bottom = o.augment_bottom && c->admits_bottom_tag();
        if (c->lower())
            lower.push_back((*c->lower())[0]);
        else
            all_lower = false;
    }
    if (all_lower) o.lower = lower;
    return PosetSpec::real(coords.size(), o);
}

// Element of concat_posets(coords) assembled from one element per coordinate.
inline Element concat_elements(const PosetSpec& target, const std::vector<Element>& xs) {
    if (target.kind() != PosetSpec::kind_t::real) {
        if (target.kind() == PosetSpec::kind_t::product) return Element::tuple(xs);
        if (xs.size() != 1) throw contract_violation("concatenation arity mismatch");
        return xs[0];
    }
    if (xs.size() != target.dimension()) throw contract_violation("concatenation arity mismatch");
    bool all_bottom = true, all_top = true;
    for (const auto& x : xs) {
        all_bottom = all_bottom && x.is_bottom();
        all_top = all_top && x.is_top();
    }
    if (all_bottom && target.admits_bottom_tag()) return Element::bottom();
    if (all_top && target.admits_top_tag()) return Element::top();
    std::vector<double> v;
    v.reserve(xs.size());
    for (const auto& x : xs) {
        if (x.is_bottom())
            v.push_back(-std::numeric_limits<double>::infinity());
        else if (x.is_top())
            v.push_back(std::numeric_limits<double>::infinity());
        else
            v.push_back(x.reals().at(0));
    }
    return Element::real(std::move(v));
}

// ---- formatting -------------------------------------------------------------

inline std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_element(const PosetSpec& p, const Element& x) {
    if (x.is_bottom()) return "bottom";
    if (x.is_top()) return "top";
    switch (p.kind()) {
        case PosetSpec::kind_t::real: {
            std::string s = "(";
            const auto& v = x.reals();
            for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_real(v[k]);
            return s + ")";
        }
        case PosetSpec::kind_t::finite: return p.name(x.id());
        case PosetSpec::kind_t::product: {
            std::string s = "<";
            for (std::size_t k = 0; k < p.parts().size(); ++k)
                s += (k ? ", " : "") + format_element(*p.parts()[k], x.parts()[k]);
            return s + ">";
        }
        case PosetSpec::kind_t::opposite: return format_element(*p.inner(), x);
    }
    return "?";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits on commas at bracket depth zero.
inline std::vector<std::string_view> split_top_level(std::string_view s) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char c = s[k];
        if (c == '<' || c == '(') ++depth;
        if (c == '>' || c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(s.substr(start, k - start)));
            start = k + 1;
        }
    }
    out.push_back(trim(s.substr(start)));
    return out;
}

inline double parse_real(std::string_view s) {
    s = trim(s);
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw parse_error("invalid number '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

// Inverse of format_element. Finite names must not contain ',', '<', '>', '(' or ')'.
inline Element parse_element(const PosetSpec& p, std::string_view text) {
    const std::string_view s = detail::trim(text);
    if (s == "bottom") return Element::bottom();
    if (s == "top") return Element::top();
    switch (p.kind()) {
        case PosetSpec::kind_t::real: {
            if (s.size() < 2 || s.front() != '(' || s.back() != ')')
                throw parse_error("real element must look like (x, y, ...): '" + std::string(s) + "'");
            std::vector<double> v;
            for (auto part : detail::split_top_level(s.substr(1, s.size() - 2))) v.push_back(detail::parse_real(part));
            Element x = Element::real(std::move(v));
            p.check(x);
            return x;
        }
        case PosetSpec::kind_t::finite: {
            auto id = p.find(std::string(s));
            if (!id) throw parse_error("unknown element '" + std::string(s) + "'");
            return Element::finite(*id);
        }
        case PosetSpec::kind_t::product: {
            if (s.size() < 2 || s.front() != '<' || s.back() != '>')
                throw parse_error("tuple element must look like <a, b, ...>: '" + std::string(s) + "'");
            const auto parts = detail::split_top_level(s.substr(1, s.size() - 2));
            if (parts.size() != p.parts().size()) throw parse_error("tuple arity mismatch in '" + std::string(s) + "'");
            std::vector<Element> xs;
            for (std::size_t k = 0; k < parts.size(); ++k) xs.push_back(parse_element(*p.parts()[k], parts[k]));
            return Element::tuple(std::move(xs));
        }
        case PosetSpec::kind_t::opposite: return parse_element(*p.inner(), s);
    }
    throw parse_error("unsupported poset kind");
}

// ---- cover-list text format -------------------------------------------------
// One "a < b" cover per line; a line with a single token declares an isolated
// element; '#' starts a comment.

inline Poset parse_cover_list(std::istream& in, FiniteOptions opts = {}) {
    std::vector<std::string> names;
    std::unordered_map<std::string, std::size_t> ids;
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    auto intern = [&](const std::string& s, std::size_t line) {
        for (char c : s) {
            if (static_cast<unsigned char>(c) > 127 || c == '<' || c == '#')
                throw parse_error("line " + std::to_string(line) + ": invalid element id '" + s + "'");
        }
        auto [it, fresh] = ids.emplace(s, names.size());
        if (fresh) names.push_back(s);
        return it->second;
    };
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        auto lt = raw.find('<');
        if (lt == std::string::npos) {
            std::istringstream ss(raw);
            std::string tok, extra;
            if (!(ss >> tok)) continue;
            if (ss >> extra) throw parse_error("line " + std::to_string(line) + ": expected 'a < b'");
            intern(tok, line);
            continue;
        }
        std::istringstream lhs(raw.substr(0, lt)), rhs(raw.substr(lt + 1));
        std::string a, b, extra;
        if (!(lhs >> a) || (lhs >> extra) || !(rhs >> b) || (rhs >> extra))
            throw parse_error("line " + std::to_string(line) + ": expected 'a < b'");
        std::size_t ia = intern(a, line);
        std::size_t ib = intern(b, line);
        covers.emplace_back(ia, ib);
    }
    if (names.empty()) throw parse_error("cover list declares no elements");
    try {
        return PosetSpec::finite(std::move(names), covers, opts);
    } catch (const contract_violation& e) {
        throw parse_error(e.what());
    }
}

inline Poset load_cover_list(const std::string& path, FiniteOptions opts = {}) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open poset file '" + path + "'");
    return parse_cover_list(in, opts);
}

inline void write_cover_list(std::ostream& out, const PosetSpec& p) {
    if (p.kind() != PosetSpec::kind_t::finite) throw contract_violation("only finite posets have a cover list");
    std::vector<bool> mentioned(p.size(), false);
    for (auto [a, b] : p.covers()) mentioned[a] = mentioned[b] = true;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!mentioned[i]) out << p.name(i) << '\n';
    for (auto [a, b] : p.covers()) out << p.name(a) << " < " << p.name(b) << '\n';
}

}  // namespace codesign
