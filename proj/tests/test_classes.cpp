#include <catch2/catch_amalgamated.hpp>

#include "flatgeom/classes.hpp"
#include "flatgeom/geometry.hpp"
#include "flatgeom/random_gen.hpp"
#include "fixtures.hpp"

using namespace flatgeom;
using namespace fixtures;

namespace {

std::shared_ptr<MuFunction> default_mu() { return std::make_shared<MuFunction>(); }

// definitional brute force over every (Y', D') labeling, used as the oracle
ExtensionKind brute_classify(const Elems& y, const Structure& z) {
    Elems d = set_difference(z.elements(), y);
    if (d.empty()) return ExtensionKind::NotExtension;
    auto delta = [&](const Elems& e) { return predimension(z, e); };
    // self-sufficiency by scanning all intermediates
    for (std::uint64_t m = 0; m < (1ull << d.size()); ++m) {
        Elems mid = y;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (m & (1ull << i)) mid = with_element(mid, d[i]);
        if (delta(mid) < delta(y)) return ExtensionKind::NotExtension;
    }
    if (delta(z.elements()) != delta(y)) return ExtensionKind::NotAlgebraic;
    auto simply = [&](const Elems& base, const Elems& ext) {
        Structure sub = induced_substructure(z, set_union(base, ext));
        auto sd = [&](const Elems& e) { return predimension(sub, e); };
        if (ext.empty()) return false;
        for (std::uint64_t m = 0; m < (1ull << ext.size()); ++m) {
            Elems mid = base;
            for (std::size_t i = 0; i < ext.size(); ++i)
                if (m & (1ull << i)) mid = with_element(mid, ext[i]);
            if (mid == base || static_cast<std::size_t>(mid.size()) == base.size() + ext.size()) continue;
            if (sd(mid) <= sd(base)) return false;
        }
        if (sd(set_union(base, ext)) != sd(base)) return false;
        for (std::uint64_t m = 0; m < (1ull << ext.size()); ++m) {
            Elems mid = base;
            for (std::size_t i = 0; i < ext.size(); ++i)
                if (m & (1ull << i)) mid = with_element(mid, ext[i]);
            if (sd(mid) < sd(base)) return false;
        }
        return true;
    };
    if (!simply(y, d)) return ExtensionKind::Algebraic;
    for (std::uint64_t m = 0; m + 1 < (1ull << y.size()); ++m) {
        Elems yp;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (m & (1ull << i)) yp.push_back(y[i]);
        if (simply(yp, d)) return ExtensionKind::SimplyAlgebraic;
    }
    return ExtensionKind::MinimallySimplyAlgebraic;
}

} // namespace

TEST_CASE("classify_extension spec cases") {
    CHECK(classify_extension({1, 2}, triangle()) == ExtensionKind::MinimallySimplyAlgebraic);
    CHECK(classify_extension({}, f1()) == ExtensionKind::MinimallySimplyAlgebraic);
    Structure two(sig3(), {1, 2}, std::vector<std::vector<Elems>>(1));
    CHECK(classify_extension({1}, two) == ExtensionKind::NotAlgebraic);
    CHECK(classify_extension({1, 2, 3}, triangle()) == ExtensionKind::NotExtension);
    CHECK_THROWS_AS(classify_extension({9}, triangle()), InputError);
}

TEST_CASE("classify_extension agrees with definitional brute force") {
    Rng rng(314);
    for (int round = 0; round < 300; ++round) {
        auto z = random_structure(rng, sig3(), 2 + rng.pick(0, 4), 0.3);
        Elems y = rng.subset(z.elements(), 0.5);
        CHECK(classify_extension(y, z) == brute_classify(y, z));
    }
}

TEST_CASE("lemma21_check spec cases") {
    CHECK(lemma21_check({1, 2}, triangle()));
    CHECK(lemma21_check({}, f1()));
    Structure two(sig3(), {1, 2}, std::vector<std::vector<Elems>>(1));
    CHECK_THROWS_AS(lemma21_check({1}, two), InputError);
}

TEST_CASE("enumerate_msa_within on the named structures") {
    auto f5_result = enumerate_msa_within(f5(), 5, 5);
    CHECK(f5_result.complete);
    // the three copies over the spine...
    for (Element k : {3, 4, 5})
        CHECK(std::count(f5_result.instances.begin(), f5_result.instances.end(),
                         MsaInstance{{1, 2}, {k}}) == 1);
    // ...plus the rebased instances inside each triangle ({1,k}+{2}, {2,k}+{1})
    // and the spine-over-leaves family ({k,l} + {1,2})
    CHECK(f5_result.instances.size() == 12);
    CHECK(std::count(f5_result.instances.begin(), f5_result.instances.end(),
                     MsaInstance{{3, 4}, {1, 2}}) == 1);

    auto iso_result = enumerate_msa_within(isolated(4), 4, 4);
    CHECK(iso_result.instances.empty());

    auto tri_result = enumerate_msa_within(triangle(), 3, 3);
    CHECK(tri_result.instances.size() == 3);
    for (const auto& inst : tri_result.instances) CHECK(inst.base.size() == 2);
}

TEST_CASE("every enumerated msa is msa by definition and satisfies the lemma facts") {
    Rng rng(1001);
    for (int round = 0; round < 500; ++round) {
        auto s = random_structure(rng, sig3(), 3 + rng.pick(0, 4), 0.25);
        auto found = enumerate_msa_within(s, static_cast<int>(s.size()), static_cast<int>(s.size()));
        for (const auto& inst : found.instances) {
            Structure z = induced_substructure(s, set_union(inst.base, inst.ext));
            REQUIRE(classify_extension(inst.base, z) ==
                    ExtensionKind::MinimallySimplyAlgebraic);
            REQUIRE(lemma21_check(inst.base, z));
        }
    }
}

TEST_CASE("enumeration is complete against definitional search on small structures") {
    Rng rng(1002);
    for (int round = 0; round < 120; ++round) {
        auto s = random_structure(rng, sig3(), 3 + rng.pick(0, 2), 0.3);
        auto found = enumerate_msa_within(s, static_cast<int>(s.size()), static_cast<int>(s.size()));
        // brute force: every (Y, D) pair
        std::vector<MsaInstance> expected;
        const Elems all = s.elements();
        for (std::uint64_t my = 0; my < (1ull << all.size()); ++my) {
            Elems y;
            for (std::size_t i = 0; i < all.size(); ++i)
                if (my & (1ull << i)) y.push_back(all[i]);
            Elems rest = set_difference(all, y);
            for (std::uint64_t md = 1; md < (1ull << rest.size()); ++md) {
                Elems d;
                for (std::size_t i = 0; i < rest.size(); ++i)
                    if (md & (1ull << i)) d.push_back(rest[i]);
                Structure z = induced_substructure(s, set_union(y, d));
                if (brute_classify(y, z) == ExtensionKind::MinimallySimplyAlgebraic)
                    expected.push_back({y, d});
            }
        }
        std::sort(expected.begin(), expected.end());
        REQUIRE(found.instances == expected);
    }
}

TEST_CASE("max_disjoint_copies spec cases") {
    auto pat = triangle_over_pair();
    CHECK(max_disjoint_copies(f5(), pat, identity_embedding({1, 2})) == 3);
    CHECK(max_disjoint_copies(triangle(), pat, identity_embedding({1, 2})) == 1);
    CHECK(max_disjoint_copies(isolated(3), pat, identity_embedding({1, 2})) == 0);
}

TEST_CASE("mu default policy and overrides") {
    MuFunction mu;
    PointedStructure tri_type(triangle(), {1, 2});
    CHECK(mu.value_of(tri_type) == 2); // delta(Y) = 2
    PointedStructure tetra_type(f1(), {});
    CHECK(mu.value_of(tetra_type) == 1); // delta(empty) = 0 -> max(0,1)
    auto v = mu.validity();
    CHECK(v.amalgamation_bound);
    CHECK(v.extension_bound);
    CHECK(v.queried_types == 2);

    mu.set_override(canonical_form(tri_type), 5);
    CHECK(mu.value_of(tri_type) == 5);
    // relabeled copies of the type hit the same override
    std::map<Element, Element> ren{{1, 7}, {2, 8}, {3, 9}};
    PointedStructure moved(triangle().relabeled(ren), {7, 8});
    CHECK(mu.value_of(moved) == 5);

    MuFunction bad;
    bad.set_override(canonical_form(tri_type), 0);
    CHECK(bad.value_of(tri_type) == 0);
    CHECK_FALSE(bad.validity().extension_bound);
}

TEST_CASE("membership spec cases") {
    auto mu = default_mu();
    auto f5_report = membership(f5(), ClassSpec::cmu(mu));
    CHECK_FALSE(f5_report.member);
    REQUIRE(f5_report.violation.has_value());
    CHECK(f5_report.violation->base == Elems{1, 2});
    CHECK(f5_report.violation->disjoint_copies == 3);
    CHECK(f5_report.violation->mu_value == 2);

    CHECK(membership(f1(), ClassSpec::c0()).member);
    auto k0_report = membership(f1(), ClassSpec::k0());
    CHECK_FALSE(k0_report.member);
    REQUIRE(k0_report.bad_subset.has_value());

    CHECK(membership(triangle(), ClassSpec::c0prime(2)).member);

    Structure empty(sig3(), {}, std::vector<std::vector<Elems>>(1));
    CHECK(membership(empty, ClassSpec::c0()).member);
    CHECK(membership(empty, ClassSpec::k0()).member);
    CHECK(membership(empty, ClassSpec::cmu(mu)).member);
    CHECK(membership(empty, ClassSpec::kmu(mu)).member);
    CHECK(membership(empty, ClassSpec::c0prime(2)).member);
}

TEST_CASE("membership rejects incompatible signatures") {
    auto mu = default_mu();
    Structure two_sym(sig34(), {1, 2, 3}, std::vector<std::vector<Elems>>(2));
    CHECK_THROWS_AS(membership(two_sym, ClassSpec::k0()), InputError);
    CHECK_THROWS_AS(membership(two_sym, ClassSpec::c0prime(2)), InputError);
    CHECK_NOTHROW(membership(two_sym, ClassSpec::c0()));
    CHECK_NOTHROW(membership(two_sym, ClassSpec::cmu(mu)));
}

TEST_CASE("membership monotonicity across classes") {
    Rng rng(2002);
    auto mu = default_mu();
    for (int round = 0; round < 200; ++round) {
        auto s = random_structure(rng, sig3(), 2 + rng.pick(0, 5), 0.25);
        if (membership(s, ClassSpec::cmu(mu)).member) CHECK(membership(s, ClassSpec::c0()).member);
        if (membership(s, ClassSpec::kmu(mu)).member) {
            CHECK(membership(s, ClassSpec::k0()).member);
            CHECK(membership(s, ClassSpec::c0()).member);
        }
        if (membership(s, ClassSpec::k0()).member) CHECK(membership(s, ClassSpec::c0()).member);
    }
}

TEST_CASE("K0 members: pairs are self-sufficient and pair closures stay small") {
    Rng rng(2003);
    int tested = 0;
    while (tested < 40) {
        Structure s = random_member(rng, sig3(), 4 + rng.pick(0, 3), 0.1, ClassSpec::k0());
        if (s.size() < 2) continue;
        ++tested;
        const Elems& all = s.elements();
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                Elems pair{all[i], all[j]};
                CHECK(is_self_sufficient(pair, s).self_sufficient);
                CHECK(predimension(s, pair) == 2);
                CHECK(d_closure(pair, s).size() <= 3);
            }
    }
}

TEST_CASE("K0 line property: rank-2 triples of points are exactly the hyperedges") {
    Rng rng(2005);
    int tested = 0;
    while (tested < 25) {
        Structure s = random_member(rng, sig3(), 5 + rng.pick(0, 2), 0.12, ClassSpec::k0());
        if (!membership(s, ClassSpec::k0()).member) continue;
        auto g = geometry_of(s);
        if (g.point_count() < 3) continue;
        ++tested;
        auto reps = g.reps();
        for (std::size_t i = 0; i < reps.size(); ++i)
            for (std::size_t j = i + 1; j < reps.size(); ++j)
                for (std::size_t l = j + 1; l < reps.size(); ++l) {
                    Elems triple{reps[i], reps[j], reps[l]};
                    bool edge = s.has_edge(0, triple);
                    bool rank2 = dimension_value(triple, s) == 2;
                    CHECK(edge == rank2);
                }
    }
}
