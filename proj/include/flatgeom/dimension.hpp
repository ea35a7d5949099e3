#pragma once

#include <cassert>
#include <optional>

#include "flatgeom/flow.hpp"
#include "flatgeom/structure.hpp"

namespace flatgeom {

namespace detail {

struct MinDelta {
    long long value = 0; // min delta(X) over A <= X <= universe
    Elems least;         // the unique smallest minimizer (the self-sufficient closure)
    Elems greatest;      // the unique largest minimizer (the d-closure)
};

// Minimizing delta over supersets of A is a maximum-weight closure problem:
// each hyperedge inside the universe is a project worth its weight, requiring
// its members outside A (cost 1 each). Min cut solves it exactly, and the
// minimal/maximal min-cuts give the smallest and largest minimizing sets.
inline MinDelta min_delta_over_supersets(const Structure& s, const Elems& a,
                                         const Elems& universe) {
    check_size_cap(universe.size(), "min_delta_over_supersets");
    Elems free_elems = set_difference(universe, a);
    std::vector<std::pair<int, Elems>> projects; // (weight, required free members)
    long long inside_weight = 0;
    for (std::size_t sym = 0; sym < s.symbol_count(); ++sym) {
        const int w = s.signature().symbol(sym).weight;
        for (const auto& e : s.edges_of(sym)) {
            if (!is_subset(e, universe)) continue;
            inside_weight += w;
            Elems need = set_difference(e, a);
            if (!need.empty()) projects.push_back({w, std::move(need)});
        }
    }

    const int source = 0, sink = 1;
    const int project_base = 2;
    const int vertex_base = project_base + static_cast<int>(projects.size());
    MaxFlowNetwork net(vertex_base + static_cast<int>(free_elems.size()));
    auto vertex_node = [&](Element x) {
        auto it = std::lower_bound(free_elems.begin(), free_elems.end(), x);
        return vertex_base + static_cast<int>(it - free_elems.begin());
    };
    for (std::size_t p = 0; p < projects.size(); ++p) {
        net.add_arc(source, project_base + static_cast<int>(p), projects[p].first);
        for (Element x : projects[p].second)
            net.add_arc(project_base + static_cast<int>(p), vertex_node(x),
                        MaxFlowNetwork::kInf);
    }
    for (std::size_t i = 0; i < free_elems.size(); ++i)
        net.add_arc(vertex_base + static_cast<int>(i), sink, 1);

    long long cut = net.max_flow(source, sink);
    MinDelta out;
    out.value = static_cast<long long>(a.size()) - inside_weight + cut;

    std::vector<bool> reach_s = net.source_side();
    std::vector<bool> reach_t = net.sink_side();
    out.least = a;
    out.greatest = a;
    for (std::size_t i = 0; i < free_elems.size(); ++i) {
        if (reach_s[vertex_base + i]) out.least = with_element(out.least, free_elems[i]);
        if (!reach_t[vertex_base + i]) out.greatest = with_element(out.greatest, free_elems[i]);
    }
    assert(predimension(s, out.least) == out.value);
    assert(predimension(s, out.greatest) == out.value);
    return out;
}

inline MinDelta min_delta_over_supersets(const Structure& s, const Elems& a) {
    return min_delta_over_supersets(s, a, s.elements());
}

} // namespace detail

struct SelfSufficiencyResult {
    bool self_sufficient = false;
    std::optional<Elems> violator; // a minimal intermediate set with smaller delta
};

/// A is self-sufficient in B when no intermediate superset has smaller
/// predimension. On failure the result carries a violating set that is minimal
/// under single-element removal.
inline SelfSufficiencyResult is_self_sufficient(const Elems& a, const Structure& b) {
    require_subset(b, a, "is_self_sufficient");
    const long long base = predimension(b, a);
    auto md = detail::min_delta_over_supersets(b, a);
    if (md.value >= base) return {true, std::nullopt};
    Elems v = md.least;
    bool shrunk = true;
    while (shrunk) {
        shrunk = false;
        for (Element x : set_difference(v, a)) {
            Elems cand = without_element(v, x);
            if (predimension(b, cand) < base) {
                v = std::move(cand);
                shrunk = true;
                break;
            }
        }
    }
    return {false, v};
}

/// The smallest C with A <= C self-sufficient in B. delta(C) equals the
/// dimension of A.
inline Elems self_sufficient_closure(const Elems& a, const Structure& b) {
    require_subset(b, a, "self_sufficient_closure");
    return detail::min_delta_over_supersets(b, a).least;
}

struct DimensionReport {
    Elems subset;
    long long dimension = 0;
    Elems witness; // the self-sufficient closure realizing the minimum
};

inline DimensionReport dimension(const Elems& a, const Structure& b) {
    require_subset(b, a, "dimension");
    auto md = detail::min_delta_over_supersets(b, a);
    return {a, md.value, md.least};
}

inline long long dimension_value(const Elems& a, const Structure& b) {
    return dimension(a, b).dimension;
}

/// Relative dimension d(A/C) = d(A u C) - d(C).
inline long long dimension_over(const Elems& a, const Elems& c, const Structure& b) {
    return dimension_value(set_union(a, c), b) - dimension_value(c, b);
}

/// All elements whose addition to A does not raise the dimension. Equals the
/// largest superset of A with the same minimal predimension.
inline Elems d_closure(const Elems& a, const Structure& b) {
    require_subset(b, a, "d_closure");
    return detail::min_delta_over_supersets(b, a).greatest;
}

inline bool is_d_closed(const Elems& a, const Structure& b) {
    return d_closure(a, b) == a;
}

} // namespace flatgeom
