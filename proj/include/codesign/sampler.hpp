#pragma once

// Rejection sampling over the admissible set: draw from the base measure (a Halton
// sequence on boxes, uniform draws without replacement on finite spaces), reject
// candidates whose optimistic bounds cannot improve the target-feasible antichain,
// and evaluate the first candidate that survives.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "codesign/evaluators.hpp"
#include "codesign/random.hpp"

namespace codesign {

// ---- Halton sequence ---------------------------------------------------------

inline double radical_inverse(std::uint64_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0 / double(base);
    while (index > 0) {
        result += f * double(index % base);
        index /= base;
        f /= double(base);
    }
    return result;
}

inline std::vector<unsigned> first_primes(std::size_t n) {
    std::vector<unsigned> primes;
    for (unsigned c = 2; primes.size() < n; ++c) {
        bool prime = true;
        for (unsigned p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

inline std::vector<double> halton_point(std::uint64_t index, const std::vector<unsigned>& bases) {
    if (index == 0) throw contract_violation("Halton index starts at 1");
    std::vector<double> x;
    x.reserve(bases.size());
    for (unsigned b : bases) x.push_back(radical_inverse(index, b));
    return x;
}

// ---- configuration and trace -------------------------------------------------

struct SamplerConfig {
    std::size_t budget = 100;
    double delta = 0.0;           // probability of accepting a proposal without testing it
    std::size_t reject_cap = 50;  // the proposal that reaches this many rejections is accepted
    std::uint64_t seed = 0;
    std::vector<unsigned> halton_bases;  // empty means the first d primes
    EvaluatorConfig evaluator;

    void validate() const {
        if (budget < 1) throw configuration_error("budget must be >= 1");
        if (!(delta >= 0.0 && delta <= 1.0)) throw configuration_error("delta must lie in [0, 1]");
        if (reject_cap < 1) throw configuration_error("reject_cap must be >= 1");
    }
};

enum class AcceptReason { admissible, forced, capped };
enum class ProposalOutcome { forced, admissible, rejected };

inline std::string to_string(AcceptReason r) {
    switch (r) {
        case AcceptReason::admissible: return "admissible";
        case AcceptReason::forced: return "forced";
        case AcceptReason::capped: return "capped";
    }
    return "?";
}

struct StepRecord {
    std::size_t iteration = 0;
    Impl implementation;
    AcceptReason reason = AcceptReason::admissible;
    std::size_t rejections = 0;
};

struct SamplerHooks {
    // Called for every proposal with the history it was tested against.
    std::function<void(const Impl&, const History&, ProposalOutcome)> on_proposal;
    // Called after every accepted evaluation; returning false ends the run.
    std::function<bool(const History&)> on_step;
};

struct RunTrace {
    std::vector<StepRecord> steps;
    History history;
    Antichain antichain;
    std::vector<Impl> implementations;  // one witness per antichain member, same order
    std::size_t evaluations = 0;
    bool exhausted = false;  // finite space ran out before the budget
    bool stopped = false;    // on_step ended the run early
    std::optional<History> local_history;  // expensive-node records when sampling a graph
};

// ---- proposal stream ---------------------------------------------------------

class ProposalStream {
public:
    ProposalStream(Space space, std::uint64_t seed, std::vector<unsigned> bases = {})
        : space_(std::move(space)), rng_(seed ^ 0x5bd1e995ULL) {
        if (space_->is_finite()) {
            pool_.resize(space_->size());
            for (std::size_t k = 0; k < pool_.size(); ++k) {
                pool_[k] = k;
                where_[k] = k;
            }
        } else {
            const std::size_t d = space_->dimension();
            bases_ = bases.empty() ? first_primes(d) : std::move(bases);
            if (bases_.size() < d) throw configuration_error("fewer Halton bases than dimensions");
            bases_.resize(d);
            next_index_ = 1 + splitmix64(seed) % (std::uint64_t(1) << 20);
        }
    }

    const std::vector<unsigned>& bases() const { return bases_; }
    bool exhausted() const { return space_->is_finite() && pool_.empty(); }

    void start_round() { round_pos_ = 0; }

    // Next candidate of the current round; nullopt once every unqueried item has been
    // proposed in this round (finite spaces only).
    std::optional<Impl> next() {
        if (space_->is_finite()) {
            if (round_pos_ >= pool_.size()) return std::nullopt;
            const std::size_t pick = round_pos_ + std::size_t(rng_.below(pool_.size() - round_pos_));
            swap_slots(round_pos_, pick);
            return space_->items()[pool_[round_pos_++]];
        }
        while (true) {
            auto u = halton_point(next_index_++, bases_);
            Impl x(u.size());
            for (std::size_t k = 0; k < u.size(); ++k)
                x[k] = space_->lower()[k] + (space_->upper()[k] - space_->lower()[k]) * u[k];
            if (!queried_.count(x)) return x;
        }
    }

    void mark_queried(const Impl& i) {
        if (!space_->is_finite()) {
            queried_.insert(i);
            return;
        }
        auto idx = space_->index_of(i);
        if (!idx) throw domain_error("queried implementation is not an item of the space");
        auto it = where_.find(*idx);
        if (it == where_.end()) return;
        const std::size_t slot = it->second;
        swap_slots(slot, pool_.size() - 1);
        pool_.pop_back();
        where_.erase(*idx);
        if (round_pos_ > pool_.size()) round_pos_ = pool_.size();
    }

private:
    void swap_slots(std::size_t a, std::size_t b) {
        std::swap(pool_[a], pool_[b]);
        where_[pool_[a]] = a;
        where_[pool_[b]] = b;
    }

    Space space_;
    Rng rng_;
    std::vector<std::size_t> pool_;  // unqueried item indices
    std::unordered_map<std::size_t, std::size_t> where_;
    std::size_t round_pos_ = 0;
    std::vector<unsigned> bases_;
    std::uint64_t next_index_ = 1;
    std::set<Impl> queried_;
};

// Stream of the forced-acceptance draws for a seed.
inline Rng delta_stream(std::uint64_t seed) { return Rng(splitmix64(seed) ^ 0x2545f4914f6cdd1dULL); }

struct Acceptance {
    Impl implementation;
    AcceptReason reason;
    std::size_t rejections;
};

// One rejection loop. `admissible` decides proposals that were not force-accepted;
// `observe` sees every proposal. Returns nullopt only when no candidate exists at all.
inline std::optional<Acceptance> draw_accepted(ProposalStream& stream, Rng& delta_rng, const SamplerConfig& cfg,
                                               const std::function<bool(const Impl&)>& admissible,
                                               const std::function<void(const Impl&, ProposalOutcome)>& observe) {
    stream.start_round();
    std::size_t rejections = 0;
    std::optional<Impl> last;
    while (true) {
        auto cand = stream.next();
        if (!cand) {
            if (!last) return std::nullopt;
            return Acceptance{std::move(*last), AcceptReason::capped, rejections};
        }
        const bool forced = delta_rng.uniform() < cfg.delta;
        if (forced) {
            if (observe) observe(*cand, ProposalOutcome::forced);
            return Acceptance{std::move(*cand), AcceptReason::forced, rejections};
        }
        if (admissible(*cand)) {
            if (observe) observe(*cand, ProposalOutcome::admissible);
            return Acceptance{std::move(*cand), AcceptReason::admissible, rejections};
        }
        if (observe) observe(*cand, ProposalOutcome::rejected);
        if (++rejections >= cfg.reject_cap) return Acceptance{std::move(*cand), AcceptReason::capped, rejections};
        last = std::move(cand);
    }
}

// ---- admissibility and the sampler -------------------------------------------

inline bool is_admissible(const Impl& i, const History& h, const Element& target, const Evaluator& ev) {
    if (h.contains(i)) throw contract_violation("implementation was already queried");
    return !ev.eliminates(i, h, target, h.induced_antichain(target));
}

// Witness implementations for the members of the target-feasible antichain of h.
inline std::vector<Impl> antichain_witnesses(const History& h, const Antichain& ac, const Element& target) {
    std::vector<Impl> out;
    for (const auto& a : ac) {
        for (const auto& rec : h) {
            if (rec.resource() == a && leq(*h.fun_poset(), target, rec.functionality())) {
                out.push_back(rec.implementation());
                break;
            }
        }
    }
    return out;
}

inline RunTrace run_elimination_sampler(const Dpi& problem, const Element& target, const SamplerConfig& cfg,
                                        const SamplerHooks& hooks = {}) {
    cfg.validate();
    Dpi dpi = problem.fresh();
    Evaluator ev(cfg.evaluator, dpi);
    RunTrace trace{{}, History(dpi.fun_poset(), dpi.res_poset(), target), Antichain(dpi.res_poset()), {}, 0, false,
                   false, std::nullopt};
    History& h = trace.history;
    ProposalStream stream(dpi.space_ptr(), cfg.seed, cfg.halton_bases);
    Rng delta_rng = delta_stream(cfg.seed);

    auto admissible = [&](const Impl& i) { return !ev.eliminates(i, h, target, h.tracked_antichain()); };
    std::function<void(const Impl&, ProposalOutcome)> observe;
    if (hooks.on_proposal) observe = [&](const Impl& i, ProposalOutcome o) { hooks.on_proposal(i, h, o); };

    for (std::size_t t = 1; t <= cfg.budget; ++t) {
        auto acc = draw_accepted(stream, delta_rng, cfg, admissible, observe);
        if (!acc) {
            trace.exhausted = true;
            break;
        }
        h.append(dpi.evaluate(acc->implementation), t, acc->rejections);
        stream.mark_queried(acc->implementation);
        ev.observe(h);
        trace.steps.push_back({t, std::move(acc->implementation), acc->reason, acc->rejections});
        if (hooks.on_step && !hooks.on_step(h)) {
            trace.stopped = true;
            break;
        }
    }
    trace.evaluations = dpi.evaluation_count();
    trace.antichain = h.tracked_antichain();
    trace.implementations = antichain_witnesses(h, trace.antichain, target);
    return trace;
}

}  // namespace codesign
