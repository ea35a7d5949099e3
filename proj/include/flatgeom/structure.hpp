#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "flatgeom/core.hpp"
#include "flatgeom/signature.hpp"

namespace flatgeom {

/// A hyperedge: the owning symbol (index into the signature) plus its member set.
struct Hyperedge {
    int symbol = 0;
    Elems members;

    auto operator<=>(const Hyperedge&) const = default;
};

/// A finite symmetric relational structure: a sorted element set plus, for each
/// relation symbol, a sorted set of hyperedges (element subsets of the symbol's
/// arity). Structures are immutable values; "mutations" build new structures.
class Structure {
public:
    Structure() : sig_(Signature::single("R", 3)) { relations_.resize(1); }

    Structure(SignaturePtr sig, Elems elements,
              std::vector<std::vector<Elems>> relations_per_symbol)
        : sig_(std::move(sig)),
          elements_(std::move(elements)),
          relations_(std::move(relations_per_symbol)) {
        validate();
    }

    /// Convenience builder from (symbol name -> edge list).
    Structure(SignaturePtr sig, Elems elements,
              const std::map<std::string, std::vector<Elems>>& relations)
        : sig_(std::move(sig)), elements_(std::move(elements)) {
        relations_.resize(sig_->size());
        for (const auto& [name, edges] : relations) {
            int idx = sig_->index_of(name);
            if (idx < 0) throw InputError("structure: unknown relation symbol '" + name + "'");
            relations_[idx] = edges;
        }
        validate();
    }

    const SignaturePtr& signature_ptr() const { return sig_; }
    const Signature& signature() const { return *sig_; }
    const Elems& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }

    const std::vector<Elems>& edges_of(int symbol) const { return relations_.at(symbol); }
    std::size_t symbol_count() const { return relations_.size(); }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& r : relations_) n += r.size();
        return n;
    }

    std::vector<Hyperedge> all_edges() const {
        std::vector<Hyperedge> out;
        out.reserve(edge_count());
        for (std::size_t s = 0; s < relations_.size(); ++s)
            for (const auto& e : relations_[s]) out.push_back({static_cast<int>(s), e});
        return out;
    }

    bool has_element(Element x) const { return contains(elements_, x); }

    bool has_edge(int symbol, const Elems& members) const {
        const auto& r = relations_.at(symbol);
        return std::binary_search(r.begin(), r.end(), members);
    }

    /// New structure with one extra hyperedge (no-op if already present).
    Structure with_edge(int symbol, Elems members) const {
        Structure out = *this;
        members = sorted_unique(std::move(members));
        auto& r = out.relations_.at(symbol);
        auto it = std::lower_bound(r.begin(), r.end(), members);
        if (it == r.end() || *it != members) r.insert(it, std::move(members));
        out.validate();
        return out;
    }

    Structure without_edge(int symbol, const Elems& members) const {
        Structure out = *this;
        auto& r = out.relations_.at(symbol);
        auto it = std::lower_bound(r.begin(), r.end(), members);
        if (it != r.end() && *it == members) r.erase(it);
        return out;
    }

    Structure with_elements(const Elems& extra) const {
        Structure out = *this;
        out.elements_ = set_union(out.elements_, extra);
        return out;
    }

    /// Apply an element renaming (must be injective on the element set).
    Structure relabeled(const std::map<Element, Element>& renaming) const {
        auto rename = [&](Element x) {
            auto it = renaming.find(x);
            return it == renaming.end() ? x : it->second;
        };
        Elems new_elems;
        new_elems.reserve(elements_.size());
        for (Element x : elements_) new_elems.push_back(rename(x));
        new_elems = sorted_unique(std::move(new_elems));
        if (new_elems.size() != elements_.size())
            throw InputError("relabeled: renaming is not injective on the element set");
        std::vector<std::vector<Elems>> rels(relations_.size());
        for (std::size_t s = 0; s < relations_.size(); ++s) {
            for (const auto& e : relations_[s]) {
                Elems img;
                img.reserve(e.size());
                for (Element x : e) img.push_back(rename(x));
                rels[s].push_back(sorted_unique(std::move(img)));
            }
            std::sort(rels[s].begin(), rels[s].end());
            rels[s].erase(std::unique(rels[s].begin(), rels[s].end()), rels[s].end());
        }
        return Structure(sig_, std::move(new_elems), std::move(rels));
    }

    Element max_element() const { return elements_.empty() ? -1 : elements_.back(); }

    bool operator==(const Structure& other) const {
        return *sig_ == *other.sig_ && elements_ == other.elements_ &&
               relations_ == other.relations_;
    }

private:
    void validate() {
        if (!sig_) throw InputError("structure: missing signature");
        if (relations_.size() != sig_->size())
            throw InputError("structure: relation table does not match signature");
        if (!is_sorted_unique(elements_)) elements_ = sorted_unique(std::move(elements_));
        for (std::size_t s = 0; s < relations_.size(); ++s) {
            const int arity = sig_->symbol(s).arity;
            for (auto& e : relations_[s]) {
                if (!is_sorted_unique(e))
                    throw InputError("structure: hyperedge of '" + sig_->symbol(s).name +
                                     "' has repeated or unsorted members " + elems_to_string(e));
                if (static_cast<int>(e.size()) != arity)
                    throw InputError("structure: hyperedge " + elems_to_string(e) +
                                     " has wrong arity for '" + sig_->symbol(s).name + "'");
                if (!is_subset(e, elements_))
                    throw InputError("structure: hyperedge " + elems_to_string(e) +
                                     " mentions elements outside the structure");
            }
            std::sort(relations_[s].begin(), relations_[s].end());
            auto dup = std::adjacent_find(relations_[s].begin(), relations_[s].end());
            if (dup != relations_[s].end())
                throw InputError("structure: duplicate hyperedge " + elems_to_string(*dup));
        }
    }

    SignaturePtr sig_;
    Elems elements_;
    std::vector<std::vector<Elems>> relations_;
};

/// A structure with a distinguished base set (the Y / X / W of extension pairs).
struct PointedStructure {
    Structure structure;
    Elems base;

    PointedStructure() = default;
    PointedStructure(Structure s, Elems b) : structure(std::move(s)), base(std::move(b)) {
        base = sorted_unique(std::move(base));
        if (!is_subset(base, structure.elements()))
            throw InputError("pointed structure: base is not a subset of the elements");
    }
};

inline void require_subset(const Structure& s, const Elems& subset, const char* op) {
    if (!is_subset(subset, s.elements()))
        throw InputError(std::string(op) + ": subset " + elems_to_string(subset) +
                         " contains elements outside the structure");
}

/// Weighted predimension of a subset: |subset| minus the total weight of the
/// hyperedges lying entirely inside it.
inline long long predimension(const Structure& s, const Elems& subset) {
    require_subset(s, subset, "predimension");
    long long value = static_cast<long long>(subset.size());
    for (std::size_t sym = 0; sym < s.symbol_count(); ++sym) {
        const int w = s.signature().symbol(sym).weight;
        for (const auto& e : s.edges_of(sym))
            if (is_subset(e, subset)) value -= w;
    }
    return value;
}

inline long long predimension(const Structure& s) { return predimension(s, s.elements()); }

/// Relative predimension over a context set: delta(A u C) - delta(C).
inline long long predimension_over(const Structure& s, const Elems& a, const Elems& c) {
    return predimension(s, set_union(a, c)) - predimension(s, c);
}

inline Structure induced_substructure(const Structure& s, const Elems& subset) {
    require_subset(s, subset, "induced_substructure");
    std::vector<std::vector<Elems>> rels(s.symbol_count());
    for (std::size_t sym = 0; sym < s.symbol_count(); ++sym)
        for (const auto& e : s.edges_of(sym))
            if (is_subset(e, subset)) rels[sym].push_back(e);
    return Structure(s.signature_ptr(), subset, std::move(rels));
}

/// Free amalgam of B1 and B2 over the shared part A: union of elements and
/// hyperedges, no new relations. Requires B1 n B2 = A and agreeing induced
/// structures on A.
inline Structure free_amalgam(const Structure& b1, const Structure& b2, const Elems& a) {
    if (!(b1.signature() == b2.signature()))
        throw InputError("free_amalgam: signatures differ");
    require_subset(b1, a, "free_amalgam");
    require_subset(b2, a, "free_amalgam");
    Elems overlap = set_intersection(b1.elements(), b2.elements());
    if (overlap != a)
        throw InputError("free_amalgam: element overlap " + elems_to_string(overlap) +
                         " is not the declared shared part " + elems_to_string(a));
    if (!(induced_substructure(b1, a) == induced_substructure(b2, a)))
        throw InputError("free_amalgam: induced structures on the shared part disagree");
    std::vector<std::vector<Elems>> rels(b1.symbol_count());
    for (std::size_t sym = 0; sym < b1.symbol_count(); ++sym) {
        rels[sym] = b1.edges_of(sym);
        for (const auto& e : b2.edges_of(sym)) rels[sym].push_back(e);
        std::sort(rels[sym].begin(), rels[sym].end());
        rels[sym].erase(std::unique(rels[sym].begin(), rels[sym].end()), rels[sym].end());
    }
    return Structure(b1.signature_ptr(), set_union(b1.elements(), b2.elements()),
                     std::move(rels));
}

} // namespace flatgeom
