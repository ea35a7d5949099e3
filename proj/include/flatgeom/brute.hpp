#pragma once

#include <optional>

#include "flatgeom/structure.hpp"

namespace flatgeom {

// Deliberately naive subset-scan oracles. These share no machinery with the
// flow-based dimension engine and exist so tests can cross-check it; they are
// exponential and only usable on small structures.
namespace brute {

inline void require_small(const Elems& free_part, const char* op) {
    if (free_part.size() > 24)
        throw ResourceError(std::string(op) + ": brute-force oracle limited to 24 free elements");
}

/// Enumerates every superset of `a` inside the structure and reports the
/// minimum predimension together with all sets attaining it.
struct BruteMinDelta {
    long long value = 0;
    std::vector<Elems> minimizers;
};

inline BruteMinDelta min_delta(const Structure& s, const Elems& a) {
    require_subset(s, a, "brute::min_delta");
    Elems free_part = set_difference(s.elements(), a);
    require_small(free_part, "brute::min_delta");
    BruteMinDelta out;
    out.value = predimension(s, a);
    out.minimizers = {a};
    const std::size_t k = free_part.size();
    for (std::uint64_t mask = 1; mask < (1ull << k); ++mask) {
        Elems x = a;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1ull << i)) x = with_element(x, free_part[i]);
        long long d = predimension(s, x);
        if (d < out.value) {
            out.value = d;
            out.minimizers = {x};
        } else if (d == out.value) {
            out.minimizers.push_back(x);
        }
    }
    return out;
}

inline long long dimension(const Elems& a, const Structure& s) { return min_delta(s, a).value; }

inline bool is_self_sufficient(const Elems& a, const Structure& s) {
    return min_delta(s, a).value == predimension(s, a);
}

inline Elems self_sufficient_closure(const Elems& a, const Structure& s) {
    auto md = min_delta(s, a);
    Elems least = md.minimizers.front();
    for (const auto& m : md.minimizers)
        if (m.size() < least.size()) least = m;
    // sanity: the smallest minimizer must be contained in every minimizer
    for (const auto& m : md.minimizers)
        if (!is_subset(least, m)) throw std::logic_error("brute: minimizers not intersection-closed");
    return least;
}

inline Elems d_closure(const Elems& a, const Structure& s) {
    long long base = dimension(a, s);
    Elems out = a;
    for (Element c : s.elements())
        if (!contains(a, c) && dimension(with_element(a, c), s) == base)
            out = with_element(out, c);
    return out;
}

} // namespace brute
} // namespace flatgeom
