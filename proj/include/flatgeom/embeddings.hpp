#pragma once

#include <functional>
#include <map>
#include <vector>

#include "flatgeom/structure.hpp"

namespace flatgeom {

using Embedding = std::map<Element, Element>;

namespace detail {

// Shared state for the embedding backtracker. Embedding semantics are those of
// the positive diagram: every pattern hyperedge must land on a target hyperedge
// of the same symbol; extra target hyperedges among image elements are allowed.
struct EmbeddingSearch {
    const Structure& pattern;
    const Structure& target;
    std::vector<Element> order;                 // non-base pattern elements, search order
    std::vector<Hyperedge> pattern_edges;
    Embedding current;
    std::vector<bool> used_target;              // indexed by target element position
    std::function<bool(const Embedding&)> sink; // return false to stop the search

    bool image_used(Element t) const {
        auto it = std::lower_bound(target.elements().begin(), target.elements().end(), t);
        return used_target[static_cast<std::size_t>(it - target.elements().begin())];
    }

    void mark(Element t, bool v) {
        auto it = std::lower_bound(target.elements().begin(), target.elements().end(), t);
        used_target[static_cast<std::size_t>(it - target.elements().begin())] = v;
    }

    // Every pattern edge whose members are all mapped must be a target edge.
    bool edges_consistent(Element just_assigned) const {
        for (const auto& e : pattern_edges) {
            if (!contains(e.members, just_assigned)) continue;
            Elems image;
            image.reserve(e.members.size());
            bool complete = true;
            for (Element x : e.members) {
                auto it = current.find(x);
                if (it == current.end()) {
                    complete = false;
                    break;
                }
                image.push_back(it->second);
            }
            if (!complete) continue;
            image = sorted_unique(std::move(image));
            if (image.size() != e.members.size()) return false; // injectivity collapsed an edge
            if (!target.has_edge(e.symbol, image)) return false;
        }
        return true;
    }

    bool run(std::size_t depth) {
        if (depth == order.size()) return sink(current);
        Element p = order[depth];
        for (Element t : target.elements()) {
            if (image_used(t)) continue;
            current[p] = t;
            mark(t, true);
            bool keep_going = true;
            if (edges_consistent(p)) keep_going = run(depth + 1);
            mark(t, false);
            current.erase(p);
            if (!keep_going) return false;
        }
        return true;
    }
};

inline void for_each_embedding_over(const PointedStructure& pattern, const Structure& target,
                                    const Embedding& base_map,
                                    const std::function<bool(const Embedding&)>& sink) {
    if (!(pattern.structure.signature() == target.signature()))
        throw InputError("find_embeddings_over: pattern and target signatures differ");
    if (base_map.size() != pattern.base.size())
        throw InputError("find_embeddings_over: base_map does not cover the base exactly");
    Elems image;
    for (const auto& [from, to] : base_map) {
        if (!contains(pattern.base, from))
            throw InputError("find_embeddings_over: base_map key outside the base");
        if (!target.has_element(to))
            throw InputError("find_embeddings_over: base_map value outside the target");
        image.push_back(to);
    }
    image = sorted_unique(std::move(image));
    if (image.size() != pattern.base.size())
        throw InputError("find_embeddings_over: base_map is not injective");

    // The anchor must be an isomorphism between the induced base structures.
    Structure base_side = induced_substructure(pattern.structure, pattern.base);
    std::map<Element, Element> renaming(base_map.begin(), base_map.end());
    if (!(base_side.relabeled(renaming) == induced_substructure(target, image)))
        throw InputError("find_embeddings_over: base_map is not an induced isomorphism");

    EmbeddingSearch search{pattern.structure, target, {}, pattern.structure.all_edges(),
                           Embedding(base_map), std::vector<bool>(target.size(), false),
                           sink};
    for (Element t : image) search.mark(t, true);
    for (Element x : pattern.structure.elements())
        if (!contains(pattern.base, x)) search.order.push_back(x);
    // Put elements sharing edges with already-placed ones first; cheap heuristic,
    // exact result either way.
    std::stable_sort(search.order.begin(), search.order.end(), [&](Element a, Element b) {
        auto deg = [&](Element x) {
            int d = 0;
            for (const auto& e : search.pattern_edges)
                if (contains(e.members, x)) ++d;
            return d;
        };
        return deg(a) > deg(b);
    });
    search.run(0);
}

} // namespace detail

/// All injections of the pattern into the target that extend `base_map` and carry
/// every pattern hyperedge onto a target hyperedge.
inline std::vector<Embedding> find_embeddings_over(const PointedStructure& pattern,
                                                   const Structure& target,
                                                   const Embedding& base_map) {
    std::vector<Embedding> out;
    detail::for_each_embedding_over(pattern, target, base_map, [&](const Embedding& e) {
        out.push_back(e);
        return true;
    });
    return out;
}

inline bool has_embedding_over(const PointedStructure& pattern, const Structure& target,
                               const Embedding& base_map) {
    bool found = false;
    detail::for_each_embedding_over(pattern, target, base_map, [&](const Embedding&) {
        found = true;
        return false;
    });
    return found;
}

inline Embedding identity_embedding(const Elems& on) {
    Embedding e;
    for (Element x : on) e[x] = x;
    return e;
}

} // namespace flatgeom
