#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "../fixtures.hpp"
#include "codesign/order.hpp"

using namespace codesign;

namespace {

Element R(std::initializer_list<double> v) { return Element::real(v); }

std::set<Element> as_set(const Antichain& ac) { return {ac.begin(), ac.end()}; }

Poset random_finite(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
    std::vector<std::pair<std::size_t, std::size_t>> covers;
    std::bernoulli_distribution coin(0.3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) covers.emplace_back(i, j);
    return PosetSpec::finite(names, covers);
}

}  // namespace

TEST_CASE("componentwise leq", "[order]") {
    auto p = PosetSpec::real(2);
    CHECK(leq(p, R({1, 2}), R({1, 3})));
    CHECK_FALSE(leq(p, R({1, 3}), R({2, 1})));
    CHECK_FALSE(leq(p, R({2, 1}), R({1, 3})));
    CHECK_THROWS_AS(leq(p, R({1, 2, 3}), R({1, 3})), invalid_element);
    CHECK_THROWS_AS(leq(p, Element::finite(0), R({1, 3})), invalid_element);
}

TEST_CASE("order tolerance", "[order]") {
    RealOptions o;
    o.tolerance = 0.1;
    auto p = PosetSpec::real(1, o);
    CHECK(leq(p, R({1.05}), R({1.0})));
    CHECK_FALSE(leq(p, R({1.2}), R({1.0})));
}

TEST_CASE("twelve-element lattice leq", "[order]") {
    auto p = fixtures::hasse_twelve();
    auto e = p->element("e");
    CHECK(leq(p, e, p->element("l")));
    CHECK_FALSE(leq(p, e, p->element("h")));
    CHECK(leq(p, p->element("d"), p->element("g")));
    CHECK(p->height() == 4);
    CHECK(p->top() == p->element("l"));
    CHECK(p->bottom() == p->element("a"));
}

TEST_CASE("sentinels are greatest and least", "[order]") {
    auto p = PosetSpec::real(2);
    for (auto x : {R({-1e300, 5}), R({0, 0}), R({1e300, 1e300})}) {
        CHECK(leq(p, Element::bottom(), x));
        CHECK(leq(p, x, Element::top()));
        CHECK_FALSE(leq(p, Element::top(), x));
        CHECK_FALSE(leq(p, x, Element::bottom()));
    }
    CHECK(leq(p, Element::bottom(), Element::top()));
    CHECK(p->top().is_top());
    CHECK(p->bottom().is_bottom());

    RealOptions closed;
    closed.augment_top = false;
    closed.augment_bottom = false;
    auto q = PosetSpec::real(2, closed);
    CHECK_FALSE(q->has_top());
    CHECK_THROWS_AS(leq(q, Element::top(), R({0, 0})), invalid_element);

    RealOptions floor;
    floor.lower = std::vector<double>{0.0, 0.0};
    auto r = PosetSpec::real(2, floor);
    CHECK(r->bottom() == R({0, 0}));
    CHECK(leq(r, Element::bottom(), r->bottom()));
}

TEST_CASE("opposite and product posets", "[order]") {
    auto p = PosetSpec::real(2);
    auto op = PosetSpec::opposite(p);
    auto opop = PosetSpec::opposite(op);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> d(0, 3);
    for (int t = 0; t < 500; ++t) {
        auto x = R({double(d(rng)), double(d(rng))});
        auto y = R({double(d(rng)), double(d(rng))});
        CHECK(leq(opop, x, y) == leq(p, x, y));
        CHECK(leq(op, x, y) == leq(p, y, x));
    }
    CHECK(op->top().is_bottom());
    CHECK(leq(op, R({3, 3}), Element::bottom()));

    auto h = fixtures::hasse_twelve();
    auto prod = PosetSpec::product({p, h});
    auto a = Element::tuple({R({1, 1}), h->element("b")});
    auto b = Element::tuple({R({2, 1}), h->element("f")});
    auto c = Element::tuple({R({2, 1}), h->element("h")});
    CHECK(leq(prod, a, b));
    CHECK_FALSE(leq(prod, a, c));
    CHECK_THROWS_AS(leq(prod, R({1, 1}), a), invalid_element);
}

TEST_CASE("minimal elements", "[order]") {
    auto p = PosetSpec::real(2);
    auto m = minimal_elements(p, {R({1, 3}), R({2, 1}), R({2, 3})});
    CHECK(as_set(m) == std::set<Element>{R({1, 3}), R({2, 1})});
    CHECK(as_set(minimal_elements(p, {R({4, 4})})) == std::set<Element>{R({4, 4})});
    CHECK(minimal_elements(p, {}).empty());
    auto again = minimal_elements(p, m.members());
    CHECK(again.same_members(m));
    CHECK(minimal_elements(p, {R({1, 1}), R({1, 1})}).size() == 1);

    auto h = fixtures::hasse_twelve();
    std::vector<Element> all;
    for (std::size_t i = 0; i < h->size(); ++i) all.push_back(Element::finite(i));
    CHECK(as_set(minimal_elements(h, all)) == std::set<Element>{h->element("a")});
}

TEST_CASE("antichain insert and upper closure", "[order]") {
    auto p = PosetSpec::real(2);
    auto base = [&] {
        Antichain ac(p);
        ac.insert(R({1, 3}));
        ac.insert(R({2, 1}));
        return ac;
    };
    {
        auto ac = base();
        CHECK_FALSE(antichain_insert(ac, R({3, 3})));
        CHECK(ac.size() == 2);
    }
    {
        auto ac = base();
        CHECK(antichain_insert(ac, R({0, 0})));
        CHECK(as_set(ac) == std::set<Element>{R({0, 0})});
    }
    {
        auto ac = base();
        CHECK_FALSE(antichain_insert(ac, R({2, 2})));
        CHECK(as_set(ac) == std::set<Element>{R({1, 3}), R({2, 1})});
    }
    CHECK(in_upper_closure(base(), R({2, 4})));
    CHECK_FALSE(in_upper_closure(Antichain(p), R({2, 4})));

    auto h = fixtures::hasse_twelve();
    Antichain ac(h);
    for (auto n : {"e", "f", "d"}) ac.insert(h->element(n));
    CHECK(in_upper_closure(ac, h->element("g")));
    CHECK_FALSE(in_upper_closure(ac, h->element("c")));
}

TEST_CASE("join and meet", "[order]") {
    auto p = PosetSpec::real(2);
    CHECK(join(*p, {R({1, 3}), R({2, 1})}) == R({2, 3}));
    CHECK(meet(*p, {R({1, 3}), R({2, 1})}) == R({1, 1}));
    CHECK(join(*p, {R({5, 6})}) == R({5, 6}));
    CHECK(meet(*p, {R({5, 6})}) == R({5, 6}));
    CHECK(join(*p, {Element::bottom(), R({1, 2})}) == R({1, 2}));
    CHECK(join(*p, {Element::top(), R({1, 2})}).is_top());
    CHECK_THROWS_AS(join(*p, {}), contract_violation);

    auto d = fixtures::diamond();
    CHECK(join(*d, {d->element("a"), d->element("b")}) == d->element("top"));
    CHECK(meet(*d, {d->element("a"), d->element("b")}) == d->element("bot"));

    // Two maximal elements with no common upper bound.
    std::istringstream in("x < y\nx < z\n");
    auto v = parse_cover_list(in);
    CHECK_THROWS_AS(join(*v, {v->element("y"), v->element("z")}), no_join);
    CHECK(meet(*v, {v->element("y"), v->element("z")}) == v->element("x"));

    auto op = PosetSpec::opposite(d);
    CHECK(join(*op, {d->element("a"), d->element("b")}) == d->element("bot"));
}

TEST_CASE("cover list parsing", "[order]") {
    {
        std::istringstream in("a < b\nb < a\n");
        CHECK_THROWS_AS(parse_cover_list(in), parse_error);
    }
    {
        std::istringstream in("a b c\n");
        CHECK_THROWS_AS(parse_cover_list(in), parse_error);
    }
    {
        std::istringstream in("# comment\nsolo\np < q # trailing\n");
        auto p = parse_cover_list(in);
        CHECK(p->size() == 3);
        CHECK(p->reaches(*p->find("p"), *p->find("q")));
        std::ostringstream out;
        write_cover_list(out, *p);
        std::istringstream back(out.str());
        CHECK(same_structure(*parse_cover_list(back), *p));
    }
}

TEST_CASE("leq is a partial order on random real pairs", "[order][property]") {
    auto p = PosetSpec::real(3);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> d(0, 2);
    auto draw = [&] { return R({double(d(rng)), double(d(rng)), double(d(rng))}); };
    for (int t = 0; t < 10000; ++t) {
        auto x = draw(), y = draw(), z = draw();
        REQUIRE(leq(p, x, x));
        if (leq(p, x, y) && leq(p, y, x)) REQUIRE(x == y);
        if (leq(p, x, y) && leq(p, y, z)) REQUIRE(leq(p, x, z));
    }
}

TEST_CASE("incremental insertion matches minimal elements", "[order][property]") {
    auto p = PosetSpec::real(2);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(0, 9);
    for (int trial = 0; trial < 300; ++trial) {
        Antichain ac(p);
        std::vector<Element> seen;
        for (int k = 0; k < 25; ++k) {
            auto x = R({double(d(rng)), double(d(rng))});
            const bool covered_before = ac.covers(x);
            const bool was_member = ac.contains(x);
            auto before = as_set(ac);
            seen.push_back(x);
            ac.insert(x);
            REQUIRE(as_set(ac) == as_set(minimal_elements(p, seen)));
            for (const auto& a : ac)
                for (const auto& b : ac)
                    if (!(a == b)) REQUIRE_FALSE(leq(p, a, b));
            if (!was_member) {
                std::vector<Element> with(before.begin(), before.end());
                with.push_back(x);
                REQUIRE(covered_before == (as_set(minimal_elements(p, with)) == before));
            }
        }
    }
}

TEST_CASE("join and meet are least and greatest bounds on small finite posets", "[order][property]") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 2 + trial % 11;
        auto p = random_finite(rng, n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                std::vector<Element> s{Element::finite(a), Element::finite(b)};
                for (bool upper : {true, false}) {
                    std::vector<std::size_t> bounds;
                    for (std::size_t u = 0; u < n; ++u)
                        if (upper ? (p->reaches(a, u) && p->reaches(b, u)) : (p->reaches(u, a) && p->reaches(u, b)))
                            bounds.push_back(u);
                    std::optional<std::size_t> best;
                    for (std::size_t u : bounds) {
                        bool all = true;
                        for (std::size_t v : bounds) all = all && (upper ? p->reaches(u, v) : p->reaches(v, u));
                        if (all) best = u;
                    }
                    if (best) {
                        auto got = upper ? join(*p, s) : meet(*p, s);
                        REQUIRE(got == Element::finite(*best));
                    } else {
                        REQUIRE_THROWS_AS(upper ? join(*p, s) : meet(*p, s), no_join);
                    }
                }
            }
        }
    }
}
