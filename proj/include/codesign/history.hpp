#pragma once

// Append-only log of evaluated implementations.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "codesign/design_problem.hpp"

namespace codesign {

struct Record {
    QueryResult result;
    std::size_t iteration = 0;   // sampler step that produced the record
    std::size_t rejections = 0;  // proposals rejected before the accepted one

    const Impl& implementation() const { return result.implementation; }
    const Element& functionality() const { return result.functionality; }
    const Element& resource() const { return result.resource; }

    friend bool operator==(const Record&, const Record&) = default;
};

enum class Axis { I, F, R, IF, IR, FR };

class History {
public:
    History(Poset fun, Poset res) : fun_(std::move(fun)), res_(std::move(res)), tracked_(res_) {}

    // Keeps the target-feasible antichain for `target` up to date on every append.
    History(Poset fun, Poset res, Element target) : History(std::move(fun), std::move(res)) {
        fun_->check(target);
        target_ = std::move(target);
    }

    const Poset& fun_poset() const { return fun_; }
    const Poset& res_poset() const { return res_; }
    const std::optional<Element>& tracked_target() const { return target_; }

    void append(QueryResult qr, std::size_t iteration = 0, std::size_t rejections = 0) {
        if (index_.count(qr.implementation)) throw duplicate_record("implementation already in history");
        fun_->check(qr.functionality);
        res_->check(qr.resource);
        index_.emplace(qr.implementation, records_.size());
        if (target_ && leq(*fun_, *target_, qr.functionality)) tracked_.insert(qr.resource);
        records_.push_back(Record{std::move(qr), iteration, rejections});
    }

    bool contains(const Impl& i) const { return index_.count(i) > 0; }
    std::optional<std::size_t> position(const Impl& i) const {
        auto it = index_.find(i);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::vector<Record>& records() const { return records_; }
    const Record& operator[](std::size_t k) const { return records_[k]; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

    // Target-feasible antichain maintained on append (requires a tracked target).
    const Antichain& tracked_antichain() const {
        if (!target_) throw contract_violation("history does not track a target");
        return tracked_;
    }

    // Minimal resources among records whose functionality meets f.
    Antichain induced_antichain(const Element& f) const {
        if (target_ && *target_ == f) return tracked_;
        fun_->check(f);
        Antichain ac(res_);
        for (const auto& rec : records_)
            if (leq(*fun_, f, rec.functionality())) ac.insert(rec.resource());
        return ac;
    }

    // First n records as a new history with the same tracked target.
    History prefix(std::size_t n) const {
        History h = target_ ? History(fun_, res_, *target_) : History(fun_, res_);
        for (std::size_t k = 0; k < n && k < records_.size(); ++k)
            h.append(records_[k].result, records_[k].iteration, records_[k].rejections);
        return h;
    }

    // Coordinate projection with set semantics; implementations appear as real-vector elements.
    std::set<std::vector<Element>> project(Axis axis) const {
        std::set<std::vector<Element>> out;
        for (const auto& rec : records_) {
            Element i = Element::real(rec.implementation());
            switch (axis) {
                case Axis::I: out.insert({i}); break;
                case Axis::F: out.insert({rec.functionality()}); break;
                case Axis::R: out.insert({rec.resource()}); break;
                case Axis::IF: out.insert({i, rec.functionality()}); break;
                case Axis::IR: out.insert({i, rec.resource()}); break;
                case Axis::FR: out.insert({rec.functionality(), rec.resource()}); break;
            }
        }
        return out;
    }

private:
    Poset fun_, res_;
    std::vector<Record> records_;
    std::map<Impl, std::size_t> index_;
    std::optional<Element> target_;
    Antichain tracked_;
};

inline void append(History& h, QueryResult qr) { h.append(std::move(qr)); }

inline Antichain induced_antichain(const History& h, const Element& f) { return h.induced_antichain(f); }

}  // namespace codesign
