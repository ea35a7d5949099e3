#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "flatgeom/brute.hpp"
#include "flatgeom/dimension.hpp"
#include "fixtures.hpp"

using namespace flatgeom;
using namespace fixtures;

namespace {

Structure random_structure(std::mt19937_64& rng, int n, int symbols, double edge_rate) {
    SignaturePtr sig = symbols == 1 ? sig3() : sig34();
    Elems elems;
    for (int i = 1; i <= n; ++i) elems.push_back(i);
    std::vector<std::vector<Elems>> rels(sig->size());
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t sym = 0; sym < sig->size(); ++sym) {
        int arity = sig->symbol(sym).arity;
        std::vector<int> idx(arity);
        // walk all arity-subsets of 1..n
        std::function<void(int, int)> walk = [&](int pos, int from) {
            if (pos == arity) {
                if (coin(rng) < edge_rate) {
                    Elems e(idx.begin(), idx.end());
                    rels[sym].push_back(e);
                }
                return;
            }
            for (int v = from; v <= n; ++v) {
                idx[pos] = v;
                walk(pos + 1, v + 1);
            }
        };
        if (n >= arity) walk(0, 1);
    }
    return Structure(sig, elems, std::move(rels));
}

Elems random_subset(std::mt19937_64& rng, const Elems& from, double rate) {
    Elems out;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (Element x : from)
        if (coin(rng) < rate) out.push_back(x);
    return out;
}

} // namespace

TEST_CASE("self-sufficiency spec cases") {
    auto r = is_self_sufficient({1, 2}, f1());
    CHECK_FALSE(r.self_sufficient);
    REQUIRE(r.violator.has_value());
    CHECK(*r.violator == Elems{1, 2, 3, 4});
    CHECK(predimension(f1(), *r.violator) == 0);

    CHECK(is_self_sufficient({}, triangle()).self_sufficient);
    CHECK(is_self_sufficient({1, 2}, triangle()).self_sufficient);
}

TEST_CASE("self-sufficient closure spec cases") {
    CHECK(self_sufficient_closure({1}, f1()) == Elems{1, 2, 3, 4});
    CHECK(self_sufficient_closure({1, 2}, triangle()) == Elems{1, 2});
    CHECK(self_sufficient_closure({}, isolated(3)) == Elems{});
}

TEST_CASE("dimension spec cases") {
    CHECK(dimension_value({1}, f1()) == 0);
    CHECK(dimension_value({1, 2}, triangle()) == 2);
    auto iso = isolated(4);
    CHECK(dimension_value(iso.elements(), iso) == 4);

    auto rep = dimension({1}, f1());
    CHECK(rep.witness == Elems{1, 2, 3, 4});
    CHECK(predimension(f1(), rep.witness) == rep.dimension);
}

TEST_CASE("d-closure spec cases") {
    CHECK(d_closure({}, f1()) == Elems{1, 2, 3, 4});
    CHECK(d_closure({1, 2}, triangle()) == Elems{1, 2, 3});
    CHECK(d_closure({1}, isolated(4)) == Elems{1});
}

TEST_CASE("relative dimension") {
    CHECK(dimension_over({3}, {1, 2}, triangle()) == 0);
    CHECK(dimension_over({3}, {1}, isolated(4)) == 1);
}

TEST_CASE("flow engine agrees with the brute-force oracle") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 400; ++round) {
        int n = 1 + static_cast<int>(rng() % 7);
        auto s = random_structure(rng, n, 1 + static_cast<int>(rng() % 2), 0.25);
        auto a = random_subset(rng, s.elements(), 0.4);
        auto md = detail::min_delta_over_supersets(s, a);
        auto oracle = brute::min_delta(s, a);
        REQUIRE(md.value == oracle.value);
        REQUIRE(md.least == brute::self_sufficient_closure(a, s));
        REQUIRE(md.greatest == brute::d_closure(a, s));
        REQUIRE(is_self_sufficient(a, s).self_sufficient == brute::is_self_sufficient(a, s));
    }
}

TEST_CASE("delta is additive over closure: delta(A/C) + delta(C) = delta(AuC)") {
    std::mt19937_64 rng(43);
    for (int round = 0; round < 100; ++round) {
        auto s = random_structure(rng, 1 + static_cast<int>(rng() % 7), 1, 0.3);
        auto a = random_subset(rng, s.elements(), 0.5);
        auto c = random_subset(rng, s.elements(), 0.5);
        CHECK(predimension_over(s, a, c) + predimension(s, c) == predimension(s, set_union(a, c)));
    }
}

TEST_CASE("transitivity of self-sufficiency on small structures") {
    std::mt19937_64 rng(44);
    int checked = 0;
    while (checked < 60) {
        auto s = random_structure(rng, 5, 1, 0.3);
        auto bp = random_subset(rng, s.elements(), 0.7);
        auto a = random_subset(rng, bp, 0.6);
        auto inner = induced_substructure(s, bp);
        if (!is_self_sufficient(a, inner).self_sufficient) continue;
        if (!is_self_sufficient(bp, s).self_sufficient) continue;
        CHECK(is_self_sufficient(a, s).self_sufficient);
        ++checked;
    }
}

TEST_CASE("matroid rank axioms for d on C0 structures") {
    std::mt19937_64 rng(45);
    int tested = 0;
    while (tested < 40) {
        auto s = random_structure(rng, 1 + static_cast<int>(rng() % 6), 1, 0.25);
        if (detail::min_delta_over_supersets(s, {}).value < 0) continue; // keep C0 only
        ++tested;
        const Elems& all = s.elements();
        const std::size_t n = all.size();
        std::vector<Elems> subsets;
        std::vector<long long> rank;
        for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
            Elems x;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1ull << i)) x.push_back(all[i]);
            subsets.push_back(x);
            rank.push_back(dimension_value(x, s));
        }
        for (std::size_t i = 0; i < subsets.size(); ++i) {
            CHECK(rank[i] >= 0);
            CHECK(rank[i] <= static_cast<long long>(subsets[i].size()));
        }
        for (std::uint64_t m1 = 0; m1 < (1ull << n); ++m1)
            for (std::uint64_t m2 = m1; m2 < (1ull << n); ++m2) {
                if ((m1 & m2) == m1) CHECK(rank[m1] <= rank[m2]); // monotone
                CHECK(rank[m1 | m2] + rank[m1 & m2] <= rank[m1] + rank[m2]); // submodular
            }
    }
}

TEST_CASE("d-closure is a closure operator with exchange") {
    std::mt19937_64 rng(46);
    int tested = 0;
    while (tested < 30) {
        auto s = random_structure(rng, 1 + static_cast<int>(rng() % 6), 1, 0.25);
        if (detail::min_delta_over_supersets(s, {}).value < 0) continue;
        ++tested;
        const Elems& all = s.elements();
        const std::size_t n = all.size();
        for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
            Elems a;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1ull << i)) a.push_back(all[i]);
            Elems cl = d_closure(a, s);
            CHECK(is_subset(a, cl));                  // extensive
            CHECK(d_closure(cl, s) == cl);            // idempotent
            for (Element x : all) {                   // monotone (one-step)
                Elems bigger = with_element(a, x);
                CHECK(is_subset(cl, d_closure(bigger, s)));
            }
            for (Element x : all) {                   // exchange
                if (contains(cl, x)) continue;
                Elems ax = with_element(a, x);
                Elems cl_ax = d_closure(ax, s);
                for (Element y : all) {
                    if (contains(cl_ax, y) && !contains(cl, y)) {
                        Elems ay = with_element(a, y);
                        CHECK(contains(d_closure(ay, s), x));
                    }
                }
            }
        }
    }
}

TEST_CASE("dimension computed inside a self-sufficient part matches the ambient") {
    std::mt19937_64 rng(47);
    int checked = 0;
    while (checked < 60) {
        auto s = random_structure(rng, 6, 1, 0.3);
        auto part = random_subset(rng, s.elements(), 0.6);
        if (!is_self_sufficient(part, s).self_sufficient) continue;
        auto inner = induced_substructure(s, part);
        auto x = random_subset(rng, part, 0.5);
        CHECK(dimension_value(x, inner) == dimension_value(x, s));
        ++checked;
    }
}
