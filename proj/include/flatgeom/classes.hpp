#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <set>

#include "flatgeom/canonical.hpp"
#include "flatgeom/dimension.hpp"
#include "flatgeom/embeddings.hpp"

namespace flatgeom {

enum class ExtensionKind {
    NotExtension,
    NotAlgebraic,
    Algebraic,
    SimplyAlgebraic,
    MinimallySimplyAlgebraic,
};

inline const char* to_string(ExtensionKind k) {
    switch (k) {
        case ExtensionKind::NotExtension: return "not-extension";
        case ExtensionKind::NotAlgebraic: return "not-algebraic";
        case ExtensionKind::Algebraic: return "algebraic";
        case ExtensionKind::SimplyAlgebraic: return "simply-algebraic";
        case ExtensionKind::MinimallySimplyAlgebraic: return "minimally-simply-algebraic";
    }
    return "?";
}

namespace detail {

// delta(Y u D') for every D' <= D, evaluated inside Z. Subset scans drive the
// simple/minimal checks below; inputs stay desk-sized.
inline bool simply_algebraic_scan(const Structure& z, const Elems& y, const Elems& d) {
    if (d.empty()) return false;
    const long long base = predimension(z, y);
    if (predimension(z, set_union(y, d)) != base) return false;
    if (d.size() > 22) throw ResourceError("extension scan: too many new elements");
    for (std::uint64_t mask = 1; mask + 1 < (1ull << d.size()); ++mask) {
        Elems part = y;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (mask & (1ull << i)) part = with_element(part, d[i]);
        if (predimension(z, part) <= base) return false;
    }
    return true;
}

} // namespace detail

/// Classify the extension Y <= Z by the definitional subset checks.
inline ExtensionKind classify_extension(const Elems& y, const Structure& z) {
    require_subset(z, y, "classify_extension");
    Elems d = set_difference(z.elements(), y);
    if (d.empty()) return ExtensionKind::NotExtension;
    if (!is_self_sufficient(y, z).self_sufficient) return ExtensionKind::NotExtension;
    if (predimension(z, z.elements()) != predimension(z, y)) return ExtensionKind::NotAlgebraic;
    if (!detail::simply_algebraic_scan(z, y, d)) return ExtensionKind::Algebraic;
    // minimality: no proper part of the base supports the same new elements
    if (y.size() > 20) throw ResourceError("classify_extension: base too large");
    for (std::uint64_t mask = 0; mask + 1 < (1ull << y.size()); ++mask) {
        Elems yprime;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (mask & (1ull << i)) yprime.push_back(y[i]);
        Structure zprime = induced_substructure(z, set_union(yprime, d));
        // the strict subset scan subsumes Y' <= Z'
        if (detail::simply_algebraic_scan(zprime, yprime, d))
            return ExtensionKind::SimplyAlgebraic;
    }
    return ExtensionKind::MinimallySimplyAlgebraic;
}

/// Structural facts every msa extension satisfies: each base element sits in a
/// hyperedge reaching the new part, and (when the new part is not a singleton)
/// each new element sits in at least two hyperedges.
inline bool lemma21_check(const Elems& y, const Structure& z) {
    if (classify_extension(y, z) != ExtensionKind::MinimallySimplyAlgebraic)
        throw InputError("lemma21_check: extension is not minimally simply algebraic");
    Elems d = set_difference(z.elements(), y);
    auto edges = z.all_edges();
    for (Element yy : y) {
        bool ok = false;
        for (const auto& e : edges)
            if (contains(e.members, yy) && !set_intersection(e.members, d).empty()) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    if (d.size() >= 2) {
        for (Element zz : d) {
            int count = 0;
            for (const auto& e : edges)
                if (contains(e.members, zz)) ++count;
            if (count < 2) return false;
        }
    }
    return true;
}

struct MsaInstance {
    Elems base; // Y
    Elems ext;  // D = Z \ Y; the instance structure is induced(base u ext)
    auto operator<=>(const MsaInstance&) const = default;
};

struct MsaEnumeration {
    std::vector<MsaInstance> instances;
    bool complete = true; // false when the internal search budget ran out
};

/// All pairs (Y, D) realized inside S such that Y <= induced(Y u D) is a
/// minimally simply algebraic extension, with |Y| <= max_base, |D| <= max_ext.
///
/// Enumeration works per candidate new-part D (connected under edge sharing):
/// the edge set F of an instance must consist of edges meeting D with total
/// weight |D|, and then Y is forced to be the union of the F-edges minus D.
/// Minimality is automatic for such (D, F); the simple-algebraicity scan is a
/// subset walk over D only.
inline MsaEnumeration enumerate_msa_within(const Structure& s, int max_base, int max_ext) {
    if (max_base < 0 || max_ext < 0) throw InputError("enumerate_msa_within: negative cap");
    MsaEnumeration out;
    const auto edges = s.all_edges();
    const Elems& all = s.elements();
    std::map<Element, std::vector<int>> edges_at;
    for (std::size_t ei = 0; ei < edges.size(); ++ei)
        for (Element x : edges[ei].members) edges_at[x].push_back(static_cast<int>(ei));
    std::map<Element, Elems> neighbors;
    for (const auto& e : edges)
        for (Element x : e.members)
            neighbors[x] = set_union(neighbors[x], without_element(e.members, x));

    long long budget = 30'000'000;
    std::set<std::pair<Elems, Elems>> emitted;

    auto weight_of = [&](int ei) { return s.signature().symbol(edges[ei].symbol).weight; };

    // Check one candidate new-part D.
    auto process_d = [&](const Elems& d) {
        // candidate edges: all S-edges meeting D
        std::vector<int> cand;
        {
            std::set<int> seen;
            for (Element x : d)
                for (int ei : edges_at[x]) seen.insert(ei);
            cand.assign(seen.begin(), seen.end());
        }
        const long long need = static_cast<long long>(d.size());
        // quick filter: each new element needs weighted degree >= 2 inside the
        // instance when |D| >= 2, so total weighted incidence must reach 2|D|
        if (d.size() >= 2) {
            long long incid = 0;
            for (int ei : cand)
                incid += weight_of(ei) *
                         static_cast<long long>(set_intersection(edges[ei].members, d).size());
            if (incid < 2 * need) return;
        }
        std::vector<int> chosen;
        std::function<void(std::size_t, long long)> pick = [&](std::size_t idx, long long w) {
            if (--budget < 0) {
                out.complete = false;
                return;
            }
            if (w == need) {
                // coverage of D (weighted: a weight-w edge counts w times)
                std::vector<long long> deg(d.size(), 0);
                for (int ei : chosen)
                    for (std::size_t i = 0; i < d.size(); ++i)
                        if (contains(edges[ei].members, d[i])) deg[i] += weight_of(ei);
                for (std::size_t i = 0; i < d.size(); ++i) {
                    if (deg[i] < 1) return;
                    if (d.size() >= 2 && deg[i] < 2) return;
                }
                Elems y;
                for (int ei : chosen) y = set_union(y, set_difference(edges[ei].members, d));
                if (static_cast<int>(y.size()) > max_base) return;
                if (!set_intersection(y, d).empty()) return;
                Elems z = set_union(y, d);
                // consistency: the chosen edges must be exactly the S-edges inside Z meeting D
                std::vector<int> inside;
                for (int ei : cand)
                    if (is_subset(edges[ei].members, z)) inside.push_back(ei);
                std::vector<int> want = chosen;
                std::sort(want.begin(), want.end());
                if (inside != want) return;
                // simple algebraicity: every proper nonempty D' must add positive delta
                // over Y; delta(Y u D') - delta(Y) = |D'| - (weight of chosen edges with
                // D-part inside D')
                for (std::uint64_t mask = 1; mask + 1 < (1ull << d.size()); ++mask) {
                    Elems dpart;
                    for (std::size_t i = 0; i < d.size(); ++i)
                        if (mask & (1ull << i)) dpart.push_back(d[i]);
                    long long inside_w = 0;
                    for (int ei : chosen)
                        if (is_subset(set_intersection(edges[ei].members, d), dpart)) inside_w += weight_of(ei);
                    if (static_cast<long long>(dpart.size()) - inside_w <= 0) return;
                }
                if (emitted.insert({y, d}).second) out.instances.push_back({y, d});
                return;
            }
            if (idx == cand.size() || w > need) return;
            long long rest = 0;
            for (std::size_t j = idx; j < cand.size(); ++j) rest += weight_of(cand[j]);
            if (w + rest < need) return;
            chosen.push_back(cand[idx]);
            pick(idx + 1, w + weight_of(cand[idx]));
            chosen.pop_back();
            pick(idx + 1, w);
        };
        pick(0, 0);
    };

    // connected subsets of the element set, each enumerated once (minimum first)
    std::function<void(Elems&, const Elems&, const Elems&)> grow = [&](Elems& cur,
                                                                       const Elems& frontier,
                                                                       const Elems& banned) {
        if (--budget < 0) {
            out.complete = false;
            return;
        }
        process_d(cur);
        if (static_cast<int>(cur.size()) >= max_ext) return;
        Elems local_ban = banned;
        for (Element f : frontier) {
            if (contains(local_ban, f)) continue;
            Elems next_frontier = frontier;
            for (Element nb : neighbors[f])
                if (!contains(cur, nb) && nb != f) next_frontier = with_element(next_frontier, nb);
            next_frontier = without_element(next_frontier, f);
            Elems bigger = with_element(cur, f);
            grow(bigger, set_difference(next_frontier, bigger), local_ban);
            local_ban = with_element(local_ban, f);
        }
    };

    if (max_ext >= 1) {
        for (Element v : all) {
            Elems cur{v};
            Elems frontier;
            for (Element nb : neighbors[v])
                if (nb > v) frontier = with_element(frontier, nb);
            Elems banned;
            for (Element u : all)
                if (u < v) banned = with_element(banned, u);
            grow(cur, frontier, banned);
        }
    }
    std::sort(out.instances.begin(), out.instances.end());
    return out;
}

/// Largest family of embeddings of the pattern over the anchored base whose
/// images outside the base are pairwise disjoint. Exact via backtracking on the
/// overlap graph of distinct images.
inline int max_disjoint_copies(const Structure& s, const PointedStructure& pattern,
                               const Embedding& anchor) {
    std::set<Elems> images;
    detail::for_each_embedding_over(pattern, s, anchor, [&](const Embedding& e) {
        Elems img;
        for (const auto& [from, to] : e)
            if (!contains(pattern.base, from)) img = with_element(img, to);
        images.insert(img);
        return true;
    });
    std::vector<Elems> imgs(images.begin(), images.end());
    const int n = static_cast<int>(imgs.size());
    if (n > 60) throw ResourceError("max_disjoint_copies: too many embeddings");
    std::vector<std::uint64_t> conflict(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!set_intersection(imgs[i], imgs[j]).empty()) {
                conflict[i] |= 1ull << j;
                conflict[j] |= 1ull << i;
            }
    int best = 0;
    std::function<void(int, std::uint64_t, int)> go = [&](int idx, std::uint64_t blocked,
                                                          int size) {
        best = std::max(best, size);
        if (idx == n || size + (n - idx) <= best) return;
        if (!(blocked & (1ull << idx))) go(idx + 1, blocked | conflict[idx], size + 1);
        go(idx + 1, blocked, size);
    };
    go(0, 0, 0);
    return best;
}

/// Policy assigning a copy bound to each isomorphism type of msa extension:
/// explicit overrides by canonical code, defaulting to max(delta(Y), 1).
/// Queried types are logged so the policy's side conditions can be audited.
class MuFunction {
public:
    MuFunction() = default;

    void set_override(const std::string& code, int value) {
        if (value < 0) throw InputError("mu override must be non-negative");
        overrides_[code] = value;
    }

    const std::map<std::string, int>& overrides() const { return overrides_; }

    /// mu(Y, Z) for the msa type of `ext.structure` over `ext.base`.
    int value_of(const PointedStructure& ext) const {
        std::string code = canonical_form(ext);
        long long dy = predimension(ext.structure, ext.base);
        int value;
        auto it = overrides_.find(code);
        if (it != overrides_.end()) value = it->second;
        else value = static_cast<int>(std::max<long long>(dy, 1));
        std::lock_guard<std::mutex> lock(log_mutex_);
        queried_[code] = {dy, value};
        return value;
    }

    struct Validity {
        bool amalgamation_bound = true; // mu(Y,Z) >= delta(Y) on every queried type
        bool extension_bound = true;    // mu >= 2 when delta(Y) >= 2, mu >= 1 when delta(Y) = 1
        bool collapse3_bound = true;    // mu >= 3 when delta(Y) >= 3
        std::size_t queried_types = 0;
    };

    /// Audits the queried types against the sufficient conditions used by the
    /// amalgamation and isomorphism-extension machinery.
    Validity validity() const {
        std::lock_guard<std::mutex> lock(log_mutex_);
        Validity v;
        v.queried_types = queried_.size();
        for (const auto& [code, rec] : queried_) {
            auto [dy, value] = rec;
            if (value < dy) v.amalgamation_bound = false;
            if (dy >= 2 && value < 2) v.extension_bound = false;
            if (dy == 1 && value < 1) v.extension_bound = false;
            if (dy >= 3 && value < 3) v.collapse3_bound = false;
        }
        return v;
    }

    /// The default formula itself satisfies every bound; only overrides can
    /// break them. Checks overrides without needing a structure.
    bool overrides_respect_extension_bounds() const {
        // override values are keyed by opaque codes; delta(Y) is only known once
        // queried, so this is a necessary check on the recorded queries
        return validity().extension_bound;
    }

private:
    std::map<std::string, int> overrides_;
    mutable std::map<std::string, std::pair<long long, int>> queried_;
    mutable std::mutex log_mutex_;
};

/// Which amalgamation class a structure is tested against.
struct ClassSpec {
    enum class Kind { C0, Cmu, K0, Kmu, C0prime };
    Kind kind = Kind::C0;
    std::shared_ptr<MuFunction> mu; // Cmu / Kmu
    int k = 2;                      // C0prime

    static ClassSpec c0() { return {Kind::C0, nullptr, 0}; }
    static ClassSpec cmu(std::shared_ptr<MuFunction> m) { return {Kind::Cmu, std::move(m), 0}; }
    static ClassSpec k0() { return {Kind::K0, nullptr, 0}; }
    static ClassSpec kmu(std::shared_ptr<MuFunction> m) { return {Kind::Kmu, std::move(m), 0}; }
    static ClassSpec c0prime(int kk) { return {Kind::C0prime, nullptr, kk}; }

    bool uses_mu() const { return kind == Kind::Cmu || kind == Kind::Kmu; }

    std::string name() const {
        switch (kind) {
            case Kind::C0: return "c0";
            case Kind::Cmu: return "cmu";
            case Kind::K0: return "k0";
            case Kind::Kmu: return "kmu";
            case Kind::C0prime: return "c0prime(" + std::to_string(k) + ")";
        }
        return "?";
    }

    void check_compatible(const Signature& sig) const {
        if (kind == Kind::K0 || kind == Kind::Kmu) {
            if (sig.size() != 1 || sig.symbol(0).arity != 3 || sig.symbol(0).weight != 1)
                throw InputError("class " + name() + " requires a single unweighted 3-ary symbol");
        }
        if (kind == Kind::C0prime) {
            if (k < 2) throw InputError("c0prime requires k >= 2");
            if (sig.size() != 1 || sig.symbol(0).arity != k + 1 || sig.symbol(0).weight != 1)
                throw InputError("class " + name() + " requires a single unweighted " +
                                 std::to_string(k + 1) + "-ary symbol");
        }
        if (uses_mu() && !mu) throw InputError("class " + name() + " requires a mu function");
    }
};

struct MsaViolation {
    Elems base;
    std::string type_code;      // canonical code of the offending msa type
    Elems example_ext;          // one new-part D of that type
    int disjoint_copies = 0;
    int mu_value = 0;
};

struct MembershipReport {
    bool member = false;
    std::optional<Elems> bad_subset;       // predimension / self-sufficiency witness
    std::optional<MsaViolation> violation; // copy-bound witness
    bool exhaustive = true;                // false when msa search was capped
    std::string detail;
};

struct MembershipOptions {
    int max_base = -1; // -1: choose from the structure size
    int max_ext = -1;
};

namespace detail {

inline MembershipReport check_c0(const Structure& s) {
    MembershipReport r;
    auto md = min_delta_over_supersets(s, {});
    if (md.value < 0) {
        r.member = false;
        r.bad_subset = md.least;
        r.detail = "subset with negative predimension";
        return r;
    }
    r.member = true;
    return r;
}

// Copy-cap violations shared by Cmu and Kmu; min_base_delta filters which types
// are constrained (0 for Cmu, 3 for Kmu). Stops after `limit` violations.
inline std::vector<MsaViolation> collect_mu_violations(const Structure& s, const MuFunction& mu,
                                                       long long min_base_delta, int max_base,
                                                       int max_ext, bool* exhaustive,
                                                       std::size_t limit = 1) {
    std::vector<MsaViolation> out;
    auto enumeration = enumerate_msa_within(s, max_base, max_ext);
    if (!enumeration.complete) *exhaustive = false;
    if (max_base < static_cast<int>(s.size()) || max_ext < static_cast<int>(s.size()))
        *exhaustive = false;
    std::set<std::pair<Elems, std::string>> seen; // (Y, pointwise type) already counted
    for (const auto& inst : enumeration.instances) {
        if (out.size() >= limit) break;
        Structure z = induced_substructure(s, set_union(inst.base, inst.ext));
        if (predimension(z, inst.base) < min_base_delta) continue;
        PointedStructure pattern(z, inst.base);
        std::string pointwise = canonical_form_over(pattern);
        if (!seen.insert({inst.base, pointwise}).second) continue;
        int cap = mu.value_of(pattern);
        int copies = max_disjoint_copies(s, pattern, identity_embedding(inst.base));
        if (copies > cap) {
            MsaViolation v;
            v.base = inst.base;
            v.type_code = canonical_form(pattern);
            v.example_ext = inst.ext;
            v.disjoint_copies = copies;
            v.mu_value = cap;
            out.push_back(std::move(v));
        }
    }
    return out;
}

inline std::optional<MsaViolation> check_mu_caps(const Structure& s, const MuFunction& mu,
                                                 long long min_base_delta, int max_base,
                                                 int max_ext, bool* exhaustive) {
    auto v = collect_mu_violations(s, mu, min_base_delta, max_base, max_ext, exhaustive, 1);
    if (v.empty()) return std::nullopt;
    return v.front();
}

// K0: every subset of size <= 3 is self-sufficient. Uses closure tables rather
// than one search per triple.
inline MembershipReport check_k0(const Structure& s) {
    MembershipReport r;
    r = check_c0(s);
    if (!r.member) return r;
    const Elems& all = s.elements();
    Elems cl0 = d_closure({}, s);
    if (!cl0.empty()) {
        r.member = false;
        r.bad_subset = Elems{cl0.front()};
        r.detail = "singleton inside cl(empty)";
        return r;
    }
    std::map<Element, Elems> cl1;
    for (Element a : all) cl1[a] = d_closure({a}, s);
    for (Element a : all)
        for (Element b : all) {
            if (b <= a) continue;
            if (contains(cl1[a], b)) {
                r.member = false;
                r.bad_subset = Elems{a, b};
                r.detail = "dependent pair";
                return r;
            }
        }
    // triples: an edge-triple needs rank 2 (pairwise independence gives it);
    // a non-edge triple additionally needs the third point outside cl(pair)
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            Elems pair{all[i], all[j]};
            Elems clp = d_closure(pair, s);
            for (std::size_t l = j + 1; l < all.size(); ++l) {
                Elems triple{all[i], all[j], all[l]};
                bool edge = false;
                for (std::size_t sym = 0; sym < s.symbol_count(); ++sym)
                    if (s.has_edge(static_cast<int>(sym), triple)) edge = true;
                if (!edge && contains(clp, all[l])) {
                    r.member = false;
                    r.bad_subset = triple;
                    r.detail = "dependent non-edge triple";
                    return r;
                }
            }
        }
    r.member = true;
    return r;
}

inline MembershipReport check_c0prime(const Structure& s, int k) {
    MembershipReport r;
    r = check_c0(s);
    if (!r.member) return r;
    // every subset containing a hyperedge must keep predimension >= k; edge-free
    // subsets have delta = |subset| >= min(|subset|, k) automatically
    for (const auto& e : s.all_edges()) {
        auto md = min_delta_over_supersets(s, e.members);
        if (md.value < k) {
            r.member = false;
            r.bad_subset = md.least;
            r.detail = "subset with predimension below k";
            return r;
        }
    }
    r.member = true;
    return r;
}

} // namespace detail

/// Membership of S in the class described by `spec`, with a witness on failure.
inline MembershipReport membership(const Structure& s, const ClassSpec& spec,
                                   const MembershipOptions& opts = {}) {
    spec.check_compatible(s.signature());
    const int n = static_cast<int>(s.size());
    int max_base = opts.max_base >= 0 ? opts.max_base : std::min(n, 12);
    int max_ext = opts.max_ext >= 0 ? opts.max_ext : (n <= 14 ? n : 6);

    switch (spec.kind) {
        case ClassSpec::Kind::C0: return detail::check_c0(s);
        case ClassSpec::Kind::K0: return detail::check_k0(s);
        case ClassSpec::Kind::C0prime: return detail::check_c0prime(s, spec.k);
        case ClassSpec::Kind::Cmu: {
            MembershipReport r = detail::check_c0(s);
            if (!r.member) return r;
            auto v = detail::check_mu_caps(s, *spec.mu, 0, max_base, max_ext, &r.exhaustive);
            if (v) {
                r.member = false;
                r.violation = v;
                r.detail = "msa copy bound exceeded";
            }
            return r;
        }
        case ClassSpec::Kind::Kmu: {
            MembershipReport r = detail::check_k0(s);
            if (!r.member) return r;
            // types with delta(Y) <= 2 are already controlled by the K0 shape
            auto v = detail::check_mu_caps(s, *spec.mu, 3, max_base, max_ext, &r.exhaustive);
            if (v) {
                r.member = false;
                r.violation = v;
                r.detail = "msa copy bound exceeded";
            }
            return r;
        }
    }
    throw std::logic_error("membership: unhandled class kind");
}

} // namespace flatgeom
