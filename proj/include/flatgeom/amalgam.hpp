#pragma once

#include "flatgeom/classes.hpp"
#include "flatgeom/geometry.hpp"

namespace flatgeom {

namespace detail {

/// Quotient of a structure by a merge map (removed element -> kept element).
/// Fails (nullopt) when some hyperedge would collapse below its arity.
inline std::optional<Structure> quotient(const Structure& s,
                                         const std::map<Element, Element>& merge) {
    auto target = [&](Element x) {
        auto it = merge.find(x);
        return it == merge.end() ? x : it->second;
    };
    Elems elems;
    for (Element x : s.elements())
        if (!merge.count(x)) elems.push_back(x);
    std::vector<std::vector<Elems>> rels(s.symbol_count());
    for (std::size_t sym = 0; sym < s.symbol_count(); ++sym) {
        for (const auto& e : s.edges_of(sym)) {
            Elems img;
            for (Element x : e) img.push_back(target(x));
            img = sorted_unique(std::move(img));
            if (img.size() != e.size()) return std::nullopt;
            rels[sym].push_back(std::move(img));
        }
        std::sort(rels[sym].begin(), rels[sym].end());
        rels[sym].erase(std::unique(rels[sym].begin(), rels[sym].end()), rels[sym].end());
    }
    return Structure(s.signature_ptr(), std::move(elems), std::move(rels));
}

/// f is injective, carries hyperedges onto hyperedges, and its image is
/// self-sufficient in the host.
inline bool is_strong_embedding(const Structure& src, const Structure& host,
                                const Embedding& f) {
    Elems image;
    for (Element x : src.elements()) {
        auto it = f.find(x);
        if (it == f.end() || !host.has_element(it->second)) return false;
        image.push_back(it->second);
    }
    image = sorted_unique(std::move(image));
    if (image.size() != src.elements().size()) return false;
    for (const auto& e : src.all_edges()) {
        Elems img;
        for (Element x : e.members) img.push_back(f.at(x));
        img = sorted_unique(std::move(img));
        if (img.size() != e.members.size()) return false;
        if (!host.has_edge(e.symbol, img)) return false;
    }
    return is_self_sufficient(image, host).self_sufficient;
}

} // namespace detail

struct AmalgamResult {
    bool success = false;
    Structure result;
    Embedding f1, f2;
    std::string failure_reason;
    std::optional<MembershipReport> obstruction;
};

/// Amalgamate B1 and B2 over A inside the class: free amalgam first, then
/// repeated identification of matching msa copies (or, for the K classes, of
/// cross-side third points over shared pairs) while the membership witness
/// certifies a violation, then a bounded quotient search. Failures return the
/// obstruction rather than throwing.
inline AmalgamResult amalgamate(const Structure& b1, const Structure& b2, const Elems& a,
                                const ClassSpec& spec) {
    spec.check_compatible(b1.signature());
    if (!is_self_sufficient(a, b1).self_sufficient ||
        !is_self_sufficient(a, b2).self_sufficient)
        throw InputError("amalgamate: shared part is not self-sufficient in both sides");
    if (!membership(b1, spec).member || !membership(b2, spec).member)
        throw InputError("amalgamate: inputs are not members of " + spec.name());

    AmalgamResult out;
    Structure e = free_amalgam(b1, b2, a);
    Embedding f2 = identity_embedding(b2.elements());

    auto side2_only = [&]() {
        Elems s2;
        for (Element x : set_difference(b2.elements(), a)) {
            Element img = f2.at(x);
            if (!b1.has_element(img)) s2 = with_element(s2, img);
        }
        return s2;
    };

    auto finish = [&](Structure c) -> AmalgamResult {
        Embedding f1 = identity_embedding(b1.elements());
        auto rep = membership(c, spec);
        if (rep.member && detail::is_strong_embedding(b1, c, f1) &&
            detail::is_strong_embedding(b2, c, f2)) {
            out.success = true;
            out.result = std::move(c);
            out.f1 = f1;
            out.f2 = f2;
            return out;
        }
        out.success = false;
        out.failure_reason = "verification failed after amalgamation";
        out.obstruction = rep;
        return out;
    };

    // one merge of pure-side copies over the given pattern; returns false when
    // no applicable pair exists
    auto try_merge_copies = [&](const PointedStructure& pattern) -> bool {
        Elems s2 = side2_only();
        Elems f2_targets; // side1 elements already shared by earlier merges
        for (const auto& [from, to] : f2)
            if (b1.has_element(to) && !contains(a, to)) f2_targets = with_element(f2_targets, to);
        std::vector<Embedding> embs =
            find_embeddings_over(pattern, e, identity_embedding(pattern.base));
        Elems pat_new = set_difference(pattern.structure.elements(), pattern.base);
        auto new_image = [&](const Embedding& emb) {
            Elems img;
            for (Element z : pat_new) img = with_element(img, emb.at(z));
            return img;
        };
        for (const auto& left : embs) {
            Elems li = new_image(left);
            if (!set_intersection(li, s2).empty()) continue;      // must avoid side2
            if (!set_intersection(li, f2_targets).empty()) continue; // keep f2 injective
            if (!set_intersection(li, a).empty()) continue;
            for (const auto& right : embs) {
                Elems ri = new_image(right);
                if (!is_subset(ri, s2)) continue; // pure side2
                if (!set_intersection(li, ri).empty()) continue;
                std::map<Element, Element> merge;
                for (Element z : pat_new) merge[right.at(z)] = left.at(z);
                auto merged = detail::quotient(e, merge);
                if (!merged) continue;
                e = std::move(*merged);
                for (auto& [from, to] : f2) {
                    auto it = merge.find(to);
                    if (it != merge.end()) to = it->second;
                }
                return true;
            }
        }
        return false;
    };

    const int max_steps = static_cast<int>(b2.size()) + 2;
    for (int step = 0; step <= max_steps; ++step) {
        auto rep = membership(e, spec);
        if (rep.member) return finish(e);

        bool progressed = false;
        if (rep.violation) {
            // identify one copy from each side of the offending msa type
            Structure z = induced_substructure(
                e, set_union(rep.violation->base, rep.violation->example_ext));
            progressed = try_merge_copies(PointedStructure(z, rep.violation->base));
            if (!progressed) {
                // the reported type may be one-sided; look for other violations
                bool exhaustive = true;
                long long min_dy = spec.kind == ClassSpec::Kind::Kmu ? 3 : 0;
                auto more = detail::collect_mu_violations(
                    e, *spec.mu, min_dy, std::min<int>(static_cast<int>(e.size()), 12),
                    static_cast<int>(e.size()) <= 14 ? static_cast<int>(e.size()) : 6,
                    &exhaustive, 8);
                for (const auto& v : more) {
                    Structure zz = induced_substructure(e, set_union(v.base, v.example_ext));
                    if ((progressed = try_merge_copies(PointedStructure(zz, v.base)))) break;
                }
            }
        } else if ((spec.kind == ClassSpec::Kind::K0 || spec.kind == ClassSpec::Kind::Kmu) &&
                   rep.bad_subset) {
            // K-shape obstruction: R(a, a', b_i) with b_i on opposite sides
            Elems s2 = side2_only();
            for (std::size_t i = 0; i < a.size() && !progressed; ++i)
                for (std::size_t j = i + 1; j < a.size() && !progressed; ++j) {
                    Elems w1, w2;
                    for (const auto& edge : e.edges_of(0)) {
                        if (!contains(edge, a[i]) || !contains(edge, a[j])) continue;
                        for (Element w : edge)
                            if (w != a[i] && w != a[j]) {
                                if (contains(s2, w)) w2 = with_element(w2, w);
                                else if (b1.has_element(w) && !contains(a, w))
                                    w1 = with_element(w1, w);
                            }
                    }
                    for (Element x1 : w1) {
                        if (progressed) break;
                        for (Element x2 : w2) {
                            std::map<Element, Element> merge{{x2, x1}};
                            auto merged = detail::quotient(e, merge);
                            if (!merged) continue;
                            e = std::move(*merged);
                            for (auto& [from, to] : f2)
                                if (to == x2) to = x1;
                            progressed = true;
                            break;
                        }
                    }
                }
        }

        if (!progressed) {
            // bounded fallback: small quotient searches mapping remaining side2
            // elements onto side1
            Elems s2 = side2_only();
            Elems s1;
            for (Element x : set_difference(b1.elements(), a)) s1 = with_element(s1, x);
            long long budget = 4000;
            std::function<bool(Structure&, std::map<Element, Element>&, std::size_t, int)> dfs =
                [&](Structure& cur, std::map<Element, Element>& f2cur, std::size_t s2idx,
                    int depth) -> bool {
                if (--budget < 0 || depth > 4) return false;
                auto r = membership(cur, spec);
                if (r.member) {
                    Embedding f2save = f2;
                    f2 = f2cur;
                    auto fin = finish(cur);
                    if (fin.success) {
                        out = fin;
                        return true;
                    }
                    f2 = f2save;
                }
                for (std::size_t i = s2idx; i < s2.size(); ++i) {
                    if (!cur.has_element(s2[i])) continue;
                    for (Element t : s1) {
                        std::map<Element, Element> merge{{s2[i], t}};
                        auto merged = detail::quotient(cur, merge);
                        if (!merged) continue;
                        Structure next = std::move(*merged);
                        std::map<Element, Element> f2next = f2cur;
                        for (auto& [from, to] : f2next)
                            if (to == s2[i]) to = t;
                        // f2 must stay injective
                        Elems vals;
                        for (const auto& [from, to] : f2next) vals.push_back(to);
                        if (sorted_unique(vals).size() != f2next.size()) continue;
                        if (dfs(next, f2next, i + 1, depth + 1)) return true;
                    }
                }
                return false;
            };
            Structure cur = e;
            std::map<Element, Element> f2cur = f2;
            if (dfs(cur, f2cur, 0, 0)) return out;
            out.success = false;
            out.failure_reason = "no amalgam found within identification and search budget";
            out.obstruction = rep;
            return out;
        }
    }
    out.success = false;
    out.failure_reason = "identification did not converge";
    out.obstruction = membership(e, spec);
    return out;
}

struct ExtensionCatalogue {
    std::vector<Structure> extensions;
    bool complete = true;
};

/// All B in the class with A <= B and at most `size_bound` new elements, up to
/// isomorphism over A (A itself included). New elements get ids following A's.
inline ExtensionCatalogue enumerate_extensions(const Structure& a, int size_bound,
                                               const ClassSpec& spec,
                                               long long budget = 500000) {
    spec.check_compatible(a.signature());
    if (!membership(a, spec).member)
        throw InputError("enumerate_extensions: base structure is not in " + spec.name());
    ExtensionCatalogue out;
    std::set<std::string> seen;

    for (int k = 0; k <= size_bound; ++k) {
        Elems fresh;
        for (int i = 1; i <= k; ++i) fresh.push_back(a.max_element() + i);
        Elems elems = set_union(a.elements(), fresh);
        // candidate hyperedges touching at least one new element
        std::vector<Hyperedge> candidates;
        for (std::size_t sym = 0; sym < a.symbol_count(); ++sym) {
            const int arity = a.signature().symbol(sym).arity;
            if (static_cast<int>(elems.size()) < arity) continue;
            std::vector<Element> idx(arity);
            std::function<void(int, std::size_t)> walk = [&](int pos, std::size_t from) {
                if (pos == arity) {
                    Elems members(idx.begin(), idx.end());
                    if (!set_intersection(members, fresh).empty())
                        candidates.push_back({static_cast<int>(sym), members});
                    return;
                }
                for (std::size_t i = from; i < elems.size(); ++i) {
                    idx[pos] = elems[i];
                    walk(pos + 1, i + 1);
                }
            };
            walk(0, 0);
        }

        std::vector<Hyperedge> chosen;
        std::function<void(std::size_t)> dfs = [&](std::size_t from) {
            if (--budget < 0) {
                out.complete = false;
                return;
            }
            Structure b = a.with_elements(fresh);
            for (const auto& he : chosen) b = b.with_edge(he.symbol, he.members);
            // subsets only gain edges deeper in the search, so a failed
            // nonnegativity check prunes the whole subtree
            if (detail::min_delta_over_supersets(b, {}).value < 0) return;
            if (membership(b, spec).member &&
                is_self_sufficient(a.elements(), b).self_sufficient) {
                std::string code = canonical_form_over(PointedStructure(b, a.elements()));
                if (seen.insert(code).second) out.extensions.push_back(b);
            }
            for (std::size_t i = from; i < candidates.size(); ++i) {
                chosen.push_back(candidates[i]);
                dfs(i + 1);
                chosen.pop_back();
            }
        };
        dfs(0);
    }
    std::sort(out.extensions.begin(), out.extensions.end(),
              [](const Structure& x, const Structure& y) {
                  return std::make_pair(x.size(), x.all_edges()) <
                         std::make_pair(y.size(), y.all_edges());
              });
    return out;
}

/// One extension problem scheduled while growing a generic chain.
struct ChainProblem {
    int round = 0;
    int stage_index = 0;     // stage against which the problem was enumerated
    Elems base;              // concrete A inside that stage
    Structure extension;     // B with base <= B, new elements fresh
    std::string code;        // canonical code of (B, base), the dedup key
    bool already_satisfied = false;
    int solved_in_stage = -1;
    Embedding solution;      // g: B -> stage, identity on base, image self-sufficient
};

/// A finite approximation to the generic structure: a chain of members with
/// self-sufficient inclusions, together with the log of served extension
/// problems.
struct GenericChain {
    SignaturePtr sig;
    ClassSpec spec;
    std::vector<Structure> stages;
    std::vector<ChainProblem> realized;

    const Structure& current() const { return stages.back(); }

    Element fresh_id() const {
        Element m = 0;
        for (const auto& s : stages) m = std::max(m, s.max_element());
        return m + 1;
    }
};

/// Grow a chain for `rounds` rounds: each round enumerates the extension
/// problems (A <= stage, A <= B in the class, |B| <= size_budget) of the newest
/// stage, deduplicated by (stage, canonical code), then serves every problem
/// not already satisfied by amalgamating it on. Element ids only grow, so each
/// stage literally contains the previous one.
inline GenericChain build_generic_approx(const ClassSpec& spec, const SignaturePtr& sig,
                                         int size_budget, int rounds) {
    spec.check_compatible(*sig);
    GenericChain chain;
    chain.sig = sig;
    chain.spec = spec;
    chain.stages.push_back(Structure(sig, {}, std::vector<std::vector<Elems>>(sig->size())));
    std::set<std::pair<int, std::string>> enqueued;

    for (int round = 1; round <= rounds; ++round) {
        const int stage_index = static_cast<int>(chain.stages.size()) - 1;
        Structure stage = chain.stages.back();
        std::vector<ChainProblem> todo;

        // all self-sufficient bases up to the budget
        std::vector<Elems> bases{{}};
        const Elems& all = stage.elements();
        std::function<void(std::size_t, Elems&)> pick = [&](std::size_t from, Elems& cur) {
            if (static_cast<int>(cur.size()) >= size_budget) return;
            for (std::size_t i = from; i < all.size(); ++i) {
                cur.push_back(all[i]);
                bases.push_back(cur);
                pick(i + 1, cur);
                cur.pop_back();
            }
        };
        Elems scratch;
        pick(0, scratch);

        for (const Elems& base : bases) {
            if (!is_self_sufficient(base, stage).self_sufficient) continue;
            Structure a = induced_substructure(stage, base);
            auto cat = enumerate_extensions(a, size_budget - static_cast<int>(base.size()), spec);
            for (const auto& b : cat.extensions) {
                if (b.size() == base.size()) continue; // trivial problem
                std::string code = canonical_form(PointedStructure(b, base));
                if (!enqueued.insert({stage_index, code}).second) continue;
                ChainProblem p;
                p.round = round;
                p.stage_index = stage_index;
                p.base = base;
                p.extension = b;
                p.code = code;
                todo.push_back(std::move(p));
            }
        }

        Structure working = stage;
        for (auto& p : todo) {
            // move the new part of B onto globally fresh ids
            Element next = std::max(chain.fresh_id(), working.max_element() + 1);
            std::map<Element, Element> ren;
            for (Element x : set_difference(p.extension.elements(), p.base)) ren[x] = next++;
            Structure b = p.extension.relabeled(ren);
            p.extension = b;

            auto res = amalgamate(working, b, p.base, spec);
            if (!res.success)
                throw ResourceError("build_generic_approx: amalgamation failed: " +
                                    res.failure_reason);
            working = res.result;
            p.solved_in_stage = static_cast<int>(chain.stages.size());
            p.solution = res.f2;
            chain.realized.push_back(p);
        }

        if (!(working == stage)) {
            if (!membership(working, spec).member)
                throw ResourceError("build_generic_approx: stage left the class");
            if (!is_self_sufficient(stage.elements(), working).self_sufficient)
                throw ResourceError("build_generic_approx: stage inclusion not self-sufficient");
            chain.stages.push_back(std::move(working));
        }
    }
    return chain;
}

struct AlgebraicExtResult {
    bool success = false;
    Structure v;
    std::string reason;
};

namespace detail {

// Pick `count` elements of x that are independent (dimension = count), smallest
// ids first; empty result when impossible.
inline Elems independent_tuple(const Structure& x, int count) {
    Elems picked;
    for (Element c : x.elements()) {
        if (static_cast<int>(picked.size()) == count) break;
        Elems trial = with_element(picked, c);
        if (dimension_value(trial, x) == static_cast<long long>(trial.size())) picked = trial;
    }
    return static_cast<int>(picked.size()) == count ? picked : Elems{};
}

} // namespace detail

/// Large algebraic extension: V in the class with X <= V, delta(V) = delta(X)
/// and at least `target_size` new elements. Built by stacking cyclically
/// decorated extensions of distinct sizes over a base tuple, then validated.
/// `size_offset` shifts the sizes used, so separate calls can be kept to
/// disjoint extension types.
inline AlgebraicExtResult algebraic_extension_generator(const Structure& x, int target_size,
                                                        const ClassSpec& spec,
                                                        int size_offset = 0) {
    spec.check_compatible(x.signature());
    if (!membership(x, spec).member)
        throw InputError("algebraic_extension_generator: X is not in " + spec.name());
    if (target_size <= 0) return {true, x, ""};

    Elems ybase;
    switch (spec.kind) {
        case ClassSpec::Kind::C0:
        case ClassSpec::Kind::Cmu:
            ybase = x.elements(); // whole-base decoration; empty X uses plain cycles
            break;
        case ClassSpec::Kind::K0:
        case ClassSpec::Kind::Kmu:
            ybase = detail::independent_tuple(x, 3);
            if (ybase.empty()) return {false, x, "X has dimension below 3"};
            break;
        case ClassSpec::Kind::C0prime:
            ybase = detail::independent_tuple(x, spec.k);
            if (ybase.empty()) return {false, x, "X has dimension below k"};
            break;
    }

    const int sym = x.signature().min_arity_index();
    const int arity = x.signature().symbol(sym).arity;
    if (!ybase.empty() && x.signature().symbol(sym).weight != 1)
        return {false, x, "decorated cycles need an unweighted symbol"};
    const int window = ybase.empty() ? arity : arity - 1;
    const int q_min = ybase.empty() ? arity + 1
                                    : std::max({3, arity, static_cast<int>(ybase.size())});

    for (int attempt = 0; attempt < 6; ++attempt) {
        Structure v = x;
        Element next = x.max_element() + 1;
        int q = q_min + size_offset + attempt * 13;
        int added = 0;
        while (added < target_size) {
            Elems ring;
            for (int i = 0; i < q; ++i) ring.push_back(next++);
            v = v.with_elements(ring);
            for (int i = 0; i < q; ++i) {
                Elems members;
                for (int w = 0; w < window; ++w) members.push_back(ring[(i + w) % q]);
                if (!ybase.empty())
                    members.push_back(ybase[static_cast<std::size_t>(i) % ybase.size()]);
                v = v.with_edge(sym, sorted_unique(std::move(members)));
            }
            added += q;
            ++q; // distinct sizes give distinct extension types
        }
        if (predimension(v) != predimension(x)) continue;
        if (!is_self_sufficient(x.elements(), v).self_sufficient) continue;
        if (!membership(v, spec).member) continue;
        return {true, v, ""};
    }
    return {false, x, "could not reach target size within the class constraints"};
}

} // namespace flatgeom
