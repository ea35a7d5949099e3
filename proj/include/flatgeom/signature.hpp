#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flatgeom/core.hpp"

namespace flatgeom {

/// One relation symbol: a name, an arity (always >= 3) and a positive integer
/// weight used by the weighted predimension (default weight 1).
struct RelationSymbol {
    std::string name;
    int arity = 3;
    int weight = 1;

    bool operator==(const RelationSymbol&) const = default;
};

/// A finite relational language. Symbols keep their declaration order; lookups
/// by name are linear (signatures are tiny).
class Signature {
public:
    Signature() = default;

    explicit Signature(std::vector<RelationSymbol> symbols) : symbols_(std::move(symbols)) {
        if (symbols_.empty()) throw InputError("signature: at least one relation symbol required");
        for (const auto& s : symbols_) {
            if (s.arity < 3)
                throw InputError("signature: symbol '" + s.name + "' has arity " +
                                 std::to_string(s.arity) + " but arities must be >= 3");
            if (s.weight < 1)
                throw InputError("signature: symbol '" + s.name + "' has non-positive weight");
            if (s.name.empty()) throw InputError("signature: empty symbol name");
        }
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            for (std::size_t j = i + 1; j < symbols_.size(); ++j)
                if (symbols_[i].name == symbols_[j].name)
                    throw InputError("signature: duplicate symbol name '" + symbols_[i].name + "'");
    }

    const std::vector<RelationSymbol>& symbols() const { return symbols_; }
    std::size_t size() const { return symbols_.size(); }
    const RelationSymbol& symbol(std::size_t i) const { return symbols_.at(i); }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            if (symbols_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    bool has_symbol(const std::string& name) const { return index_of(name) >= 0; }

    int min_arity_index() const {
        int best = 0;
        for (std::size_t i = 1; i < symbols_.size(); ++i) {
            if (symbols_[i].arity < symbols_[best].arity) best = static_cast<int>(i);
            // ties resolved by name order so the choice is deterministic
            else if (symbols_[i].arity == symbols_[best].arity &&
                     symbols_[i].name < symbols_[best].name)
                best = static_cast<int>(i);
        }
        return best;
    }

    int max_arity() const {
        int m = 0;
        for (const auto& s : symbols_) m = std::max(m, s.arity);
        return m;
    }

    /// Smallest-arity symbol whose arity is still >= `needed`; -1 if none.
    int lift_index_for_arity(int needed) const {
        int best = -1;
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (symbols_[i].arity < needed) continue;
            if (best < 0 || symbols_[i].arity < symbols_[best].arity ||
                (symbols_[i].arity == symbols_[best].arity && symbols_[i].name < symbols_[best].name))
                best = static_cast<int>(i);
        }
        return best;
    }

    bool operator==(const Signature& other) const { return symbols_ == other.symbols_; }

    static std::shared_ptr<const Signature> single(const std::string& name, int arity,
                                                   int weight = 1) {
        return std::make_shared<const Signature>(
            std::vector<RelationSymbol>{RelationSymbol{name, arity, weight}});
    }

private:
    std::vector<RelationSymbol> symbols_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

} // namespace flatgeom
