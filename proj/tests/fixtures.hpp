#pragma once

// Small structures shared across the test suites.

#include "flatgeom/structure.hpp"

namespace fixtures {

using namespace flatgeom;

inline SignaturePtr sig3() {
    static SignaturePtr s = Signature::single("R", 3);
    return s;
}

inline SignaturePtr sig34() {
    static SignaturePtr s = std::make_shared<const Signature>(
        std::vector<RelationSymbol>{{"R3", 3, 1}, {"R4", 4, 1}});
    return s;
}

inline Structure isolated(int n, SignaturePtr sig = sig3()) {
    Elems e;
    for (int i = 1; i <= n; ++i) e.push_back(i);
    return Structure(sig, e, std::vector<std::vector<Elems>>(sig->size()));
}

/// {1,2,3} carrying the single hyperedge {1,2,3}.
inline Structure triangle() {
    return Structure(sig3(), {1, 2, 3}, {{std::vector<Elems>{{1, 2, 3}}}});
}

/// Tetrahedron: {1,2,3,4} with all four triples.
inline Structure f1() {
    return Structure(sig3(), {1, 2, 3, 4},
                     {{std::vector<Elems>{{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}}}});
}

/// {1,2} with three msa copies hanging off it: edges {1,2,k} for k in {3,4,5}.
inline Structure f5() {
    return Structure(sig3(), {1, 2, 3, 4, 5},
                     {{std::vector<Elems>{{1, 2, 3}, {1, 2, 4}, {1, 2, 5}}}});
}

/// Triangle pattern pointed at a two-element base.
inline PointedStructure triangle_over_pair() { return PointedStructure(triangle(), {1, 2}); }

} // namespace fixtures
