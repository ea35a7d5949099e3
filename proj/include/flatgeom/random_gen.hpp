#pragma once

#include <random>

#include "flatgeom/classes.hpp"

namespace flatgeom {

/// Seeded randomness for generators; a fixed seed reproduces every artifact.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < p; }

    int pick(int lo, int hi) { // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    Elems subset(const Elems& from, double rate) {
        Elems out;
        for (Element x : from)
            if (coin(rate)) out.push_back(x);
        return out;
    }

    Element choice(const Elems& from) { return from.at(static_cast<std::size_t>(pick(0, static_cast<int>(from.size()) - 1))); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Random structure on elements 1..n with each possible hyperedge drawn
/// independently. No class constraint.
inline Structure random_structure(Rng& rng, const SignaturePtr& sig, int n, double edge_rate) {
    Elems elems;
    for (int i = 1; i <= n; ++i) elems.push_back(i);
    std::vector<std::vector<Elems>> rels(sig->size());
    for (std::size_t sym = 0; sym < sig->size(); ++sym) {
        const int arity = sig->symbol(sym).arity;
        if (n < arity) continue;
        std::vector<int> idx(arity);
        std::function<void(int, int)> walk = [&](int pos, int from) {
            if (pos == arity) {
                if (rng.coin(edge_rate)) rels[sym].push_back(Elems(idx.begin(), idx.end()));
                return;
            }
            for (int v = from; v <= n; ++v) {
                idx[pos] = v;
                walk(pos + 1, v + 1);
            }
        };
        walk(0, 1);
    }
    return Structure(sig, elems, std::move(rels));
}

/// Random member of the given class: sparse rejection sampling, dropping edges
/// from the membership witness region until the structure passes.
inline Structure random_member(Rng& rng, const SignaturePtr& sig, int n, double edge_rate,
                               const ClassSpec& spec, int tries = 200) {
    for (int attempt = 0; attempt < tries; ++attempt) {
        Structure s = random_structure(rng, sig, n, edge_rate);
        for (int fix = 0; fix < 64; ++fix) {
            auto report = membership(s, spec);
            if (report.member) return s;
            // remove one offending hyperedge and retry
            Elems region = report.bad_subset ? *report.bad_subset
                                             : (report.violation ? set_union(report.violation->base,
                                                                             report.violation->example_ext)
                                                                 : Elems{});
            bool removed = false;
            for (std::size_t sym = 0; sym < s.symbol_count() && !removed; ++sym)
                for (const auto& e : s.edges_of(sym))
                    if (region.empty() || !set_intersection(e, region).empty()) {
                        s = s.without_edge(static_cast<int>(sym), e);
                        removed = true;
                        break;
                    }
            if (!removed) break;
        }
        auto report = membership(s, spec);
        if (report.member) return s;
    }
    throw ResourceError("random_member: could not sample a member structure");
}

/// Random subset that is self-sufficient in s (its own closure).
inline Elems random_self_sufficient_subset(Rng& rng, const Structure& s, double rate) {
    return self_sufficient_closure(rng.subset(s.elements(), rate), s);
}

} // namespace flatgeom
