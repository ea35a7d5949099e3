#pragma once

#include "flatgeom/amalgam.hpp"

namespace flatgeom {

enum class Variant { Standard, Kmu, C0prime, LanguageChange };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::Standard: return "standard";
        case Variant::Kmu: return "kmu";
        case Variant::C0prime: return "c0prime";
        case Variant::LanguageChange: return "language-change";
    }
    return "?";
}

/// Decomposition of B over a self-sufficient W: the closure of W, the
/// interdependence classes over W, and the hyperedges crossing between classes
/// (optionally also excluding the edges inside a marked substructure A).
struct Decomposition {
    Elems closure;               // cl_B(W)
    std::vector<Elems> classes;  // d-dependence classes over W, ordered by least member
    std::vector<Hyperedge> cross_edges;
};

inline Decomposition decompose(const Structure& b, const Elems& w,
                               const std::optional<Elems>& a_marking = std::nullopt) {
    require_subset(b, w, "decompose");
    if (!is_self_sufficient(w, b).self_sufficient)
        throw InputError("decompose: W is not self-sufficient in B");
    Decomposition out;
    Geometry g = geometry_of(b, w);
    out.closure = g.closure_of_base();
    out.classes = g.points();
    for (const auto& e : b.all_edges()) {
        if (a_marking && is_subset(e.members, *a_marking)) continue;
        if (is_subset(e.members, out.closure)) continue;
        bool inside_class = false;
        for (const auto& cls : out.classes)
            if (is_subset(e.members, set_union(out.closure, cls))) {
                inside_class = true;
                break;
            }
        if (!inside_class) out.cross_edges.push_back(e);
    }
    return out;
}

/// An isomorphism-extension problem: W <= A <= B on the source side, X <= A' on
/// the target side, f an isomorphism of the localized geometries.
struct ExtensionProblem {
    Elems w;
    Structure a;
    Structure b;
    Elems x;
    Structure aprime;
    std::map<Element, Element> f; // point rep in G_W(A) -> point rep in G_X(A')
    Variant variant = Variant::Standard;
    int k = 2;                        // C0prime only
    SignaturePtr target_language;     // LanguageChange only (sublanguage of the source)
    bool into_c0_only = false;        // backward direction: target class is plain C0
    Element fresh_start = 0;          // smallest id for new target elements (0 = auto)
    int generator_offset = 0;         // shifts the step-1 extension types (see the generator)
};

struct ClaimReport {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ClassArtifacts {
    bool case1 = false;          // class extends an A-class
    bool passthrough = false;    // degenerate run: class copied unchanged
    Element attach_point = -1;   // b_{i0} (case 1)
    Elems new_elems;             // b_{i1..im}
    std::vector<Elems> s_sets;   // the (n-2)-sets used by this class's edges
    std::vector<Hyperedge> step2_edges;
};

struct ConstructionTrace {
    // source decomposition
    Elems b0;
    std::vector<Elems> b_classes; // A-matched classes first
    int r = 0;
    int s = 0;
    std::vector<Hyperedge> rho;
    Elems a0;
    // target decomposition
    Elems a0prime;
    std::vector<Elems> aprime_classes; // ordered to match via f
    // step 1
    int m = 0;
    Structure v;
    Structure a_second;
    // step 2
    std::vector<ClassArtifacts> classes;
    std::vector<Elems> bprime_classes;
    // step 3
    std::vector<Hyperedge> rho_prime;
    // result
    Structure bprime;
    std::map<Element, Element> fprime; // rep of B_i -> rep of B'_i
    std::vector<ClaimReport> claims;
};

class ConstructionError : public std::runtime_error {
public:
    ConstructionError(const std::string& what, ConstructionTrace t)
        : std::runtime_error(what), trace(std::move(t)) {}
    ConstructionTrace trace;
};

struct VerifyOptions {
    int max_base = -1; // msa search caps for the collapse claims
    int max_ext = -1;
};

namespace detail {

inline void validate_problem(const ExtensionProblem& p) {
    if (!is_subset(p.w, p.a.elements()) || !is_subset(p.a.elements(), p.b.elements()))
        throw InputError("extension problem: need W <= A <= B as element sets");
    if (!(p.a.signature() == p.b.signature()))
        throw InputError("extension problem: A and B signatures differ");
    if (!(induced_substructure(p.b, p.a.elements()) == p.a))
        throw InputError("extension problem: A is not the induced substructure of B");
    if (!is_self_sufficient(p.w, p.a).self_sufficient ||
        !is_self_sufficient(p.a.elements(), p.b).self_sufficient)
        throw InputError("extension problem: W <= A <= B fails self-sufficiency");
    if (detail::min_delta_over_supersets(p.b, {}).value < 0)
        throw InputError("extension problem: B is not in C0");
    if (!is_subset(p.x, p.aprime.elements()) ||
        !is_self_sufficient(p.x, p.aprime).self_sufficient)
        throw InputError("extension problem: X <= A' fails");

    switch (p.variant) {
        case Variant::Standard:
            if (!(p.aprime.signature() == p.b.signature()))
                throw InputError("extension problem: target signature differs");
            break;
        case Variant::Kmu:
            if (!(p.aprime.signature() == p.b.signature()))
                throw InputError("extension problem: target signature differs");
            if (!p.w.empty())
                throw InputError("kmu variant: source geometry must be unlocalized (W empty)");
            if (p.x.size() != 3 || induced_substructure(p.aprime, p.x).edge_count() != 0 ||
                dimension_value(p.x, p.aprime) != 3)
                throw InputError("kmu variant: X must be 3 independent relation-free points");
            break;
        case Variant::C0prime:
            if (!(p.aprime.signature() == p.b.signature()))
                throw InputError("extension problem: target signature differs");
            if (!p.w.empty())
                throw InputError("c0prime variant: source geometry must be unlocalized");
            if (static_cast<int>(p.x.size()) != p.k ||
                induced_substructure(p.aprime, p.x).edge_count() != 0 ||
                dimension_value(p.x, p.aprime) != p.k)
                throw InputError("c0prime variant: X must be k independent relation-free points");
            break;
        case Variant::LanguageChange: {
            if (!p.target_language)
                throw InputError("language-change variant: missing target language");
            if (!(p.aprime.signature() == *p.target_language))
                throw InputError("language-change variant: A' must be over the target language");
            for (const auto& sym : p.target_language->symbols()) {
                int idx = p.b.signature().index_of(sym.name);
                if (idx < 0 || p.b.signature().symbol(idx).arity != sym.arity ||
                    p.b.signature().symbol(idx).weight != sym.weight)
                    throw InputError("language-change variant: target is not a sublanguage");
            }
            for (const auto& sym : p.b.signature().symbols())
                if (p.target_language->lift_index_for_arity(sym.arity) < 0)
                    throw InputError(
                        "language-change variant: no target symbol dominates arity " +
                        std::to_string(sym.arity));
            break;
        }
    }
}

/// The class B' must land in, for membership checks and step-1 amalgamation.
inline ClassSpec target_class(const ExtensionProblem& p, const std::shared_ptr<MuFunction>& mu) {
    if (p.into_c0_only || p.variant == Variant::LanguageChange) return ClassSpec::c0();
    switch (p.variant) {
        case Variant::Standard: return ClassSpec::cmu(mu);
        case Variant::Kmu: return ClassSpec::kmu(mu);
        case Variant::C0prime: return ClassSpec::c0prime(p.k);
        default: return ClassSpec::c0();
    }
}

inline std::map<Element, int> rep_to_index(const std::vector<Elems>& classes) {
    std::map<Element, int> out;
    for (std::size_t i = 0; i < classes.size(); ++i) out[classes[i].front()] = static_cast<int>(i);
    return out;
}

/// Validate that f maps the points of ga onto the points of ga2 preserving the
/// rank of every point subset.
inline void validate_geometry_iso(const Geometry& ga, const Geometry& ga2,
                                  const std::map<Element, Element>& f, const char* what) {
    if (f.size() != static_cast<std::size_t>(ga.point_count()) ||
        ga.point_count() != ga2.point_count())
        throw InputError(std::string(what) + ": point map does not cover the points");
    std::vector<int> image(ga.point_count(), -1);
    std::vector<bool> used(ga2.point_count(), false);
    for (const auto& [from, to] : f) {
        int i = ga.point_of(from);
        int j = ga2.point_of(to);
        if (i < 0 || j < 0 || used[j] || image[i] >= 0)
            throw InputError(std::string(what) + ": point map is not a bijection of points");
        image[i] = j;
        used[j] = true;
    }
    const int n = ga.point_count();
    if (n > 16) throw ResourceError(std::string(what) + ": too many points");
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        std::uint64_t mapped = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1ull << i)) mapped |= 1ull << image[i];
        if (ga.rank_of_mask(mask) != ga2.rank_of_mask(mapped))
            throw InputError(std::string(what) + ": point map does not preserve rank");
    }
}

} // namespace detail

std::vector<ClaimReport> verify_claims(const ConstructionTrace& t, const ExtensionProblem& p,
                                       const std::shared_ptr<MuFunction>& mu,
                                       const VerifyOptions& opts = {});

namespace detail {

struct StepPlan {
    int m = 0;
    int v_needed = 0;
    int step2_symbol = 0; // index in the target signature
};

inline StepPlan plan_sizes(const Signature& target_sig, int s, int t, int scale) {
    StepPlan plan;
    plan.step2_symbol = target_sig.min_arity_index();
    const int n = target_sig.symbol(plan.step2_symbol).arity;
    const int maxar = target_sig.max_arity();
    plan.m = (std::max({s, t * maxar, 2}) + 2) * scale;
    plan.v_needed = s * plan.m * (n - 2) + t * maxar;
    return plan;
}

inline ConstructionTrace construct_once(const ExtensionProblem& p,
                                        const std::shared_ptr<MuFunction>& mu, int scale) {
    ConstructionTrace tr;
    const SignaturePtr target_sig =
        p.variant == Variant::LanguageChange ? p.target_language : p.b.signature_ptr();
    const ClassSpec tclass = target_class(p, mu);

    // decompositions, with B-classes reordered so the A-matched ones come first
    Geometry ga = geometry_of(p.a, p.w);
    Geometry gap = geometry_of(p.aprime, p.x);
    validate_geometry_iso(ga, gap, p.f, "extension problem f");
    Decomposition db = decompose(p.b, p.w, p.a.elements());
    tr.a0 = ga.closure_of_base();
    tr.a0prime = gap.closure_of_base();
    tr.b0 = db.closure;
    tr.rho = db.cross_edges;

    std::vector<Elems> unmatched = db.classes;
    tr.r = ga.point_count();
    for (int i = 0; i < tr.r; ++i) {
        const Elems& acls = ga.points()[i];
        int found = -1;
        for (std::size_t j = 0; j < unmatched.size(); ++j)
            if (is_subset(acls, unmatched[j])) {
                found = static_cast<int>(j);
                break;
            }
        if (found < 0)
            throw InputError("extension problem: A-class does not embed into a B-class");
        tr.b_classes.push_back(unmatched[found]);
        unmatched.erase(unmatched.begin() + found);
        // the matched A'-class via f
        Element arep = acls.front();
        Element image = p.f.at(arep);
        int pi = gap.point_of(image);
        tr.aprime_classes.push_back(gap.points()[pi]);
    }
    for (auto& cls : unmatched) tr.b_classes.push_back(cls);
    tr.s = static_cast<int>(tr.b_classes.size());

    const bool degenerate = (p.b == p.a);
    StepPlan plan = plan_sizes(*target_sig, tr.s, static_cast<int>(tr.rho.size()), scale);
    tr.m = plan.m;
    const int n = target_sig->symbol(plan.step2_symbol).arity;

    // ---- Step 1: A'' = A' u B'_0, an algebraic extension of X glued over cl(X)
    Structure xstruct = induced_substructure(p.aprime, p.x);
    Structure a0p_struct = induced_substructure(p.aprime, tr.a0prime);
    if (p.variant == Variant::LanguageChange) {
        // A' is already over the target language; nothing to convert
    }
    Element fresh = std::max<Element>(p.fresh_start, p.aprime.max_element() + 1);
    Structure v;
    for (int grow = 0;; ++grow) {
        if (grow >= 4)
            throw ConstructionError("step 1: could not grow a large enough closure", tr);
        auto gen = algebraic_extension_generator(
            xstruct, plan.v_needed + 8 + grow * plan.v_needed, tclass,
            p.generator_offset + grow);
        if (!gen.success)
            throw ConstructionError("step 1: algebraic extension generator failed: " + gen.reason,
                                    tr);
        // move the generated part onto fresh ids
        std::map<Element, Element> ren;
        Element next = fresh;
        for (Element e : set_difference(gen.v.elements(), p.x)) ren[e] = next++;
        Structure bigext = gen.v.relabeled(ren);
        auto am = amalgamate(a0p_struct, bigext, p.x, tclass);
        if (!am.success)
            throw ConstructionError("step 1: amalgamation of the closure with the extension "
                                    "failed: " + am.failure_reason, tr);
        v = am.result;
        if (static_cast<int>(set_difference(v.elements(), tr.a0prime).size()) >= plan.v_needed)
            break;
    }
    tr.v = v;
    tr.a_second = free_amalgam(p.aprime, v, tr.a0prime);
    if (predimension(tr.a_second) != predimension(p.aprime))
        throw ConstructionError("step 1: predimension of A'' moved", tr);
    if (!is_self_sufficient(p.aprime.elements(), tr.a_second).self_sufficient)
        throw ConstructionError("step 1: A' is not self-sufficient in A''", tr);
    if (!is_d_closed(v.elements(), tr.a_second))
        throw ConstructionError("step 1: B'_0 is not d-closed in A''", tr);

    Structure bprime = tr.a_second;
    const Elems b0prime = v.elements();

    if (degenerate) {
        for (int i = 0; i < tr.s; ++i) {
            ClassArtifacts art;
            art.passthrough = true;
            art.case1 = i < tr.r;
            tr.classes.push_back(art);
            tr.bprime_classes.push_back(tr.aprime_classes[i]);
        }
    } else {
        // ---- Step 2: one class at a time, drawing disjoint (n-2)-sets from B'_0 \ A'_0
        Elems pool = set_difference(b0prime, tr.a0prime);
        std::size_t pool_at = 0;
        auto take_sset = [&]() {
            if (pool_at + static_cast<std::size_t>(n - 2) > pool.size())
                throw ConstructionError("step 2: ran out of room in B'_0", tr);
            Elems sset(pool.begin() + pool_at, pool.begin() + pool_at + (n - 2));
            pool_at += n - 2;
            return sset;
        };
        Element next_id = std::max<Element>(bprime.max_element() + 1, p.fresh_start);
        const bool distinct_ssets =
            p.variant == Variant::Kmu || p.variant == Variant::C0prime;

        for (int i = 0; i < tr.s; ++i) {
            ClassArtifacts art;
            art.case1 = i < tr.r;
            Elems new_elems;
            for (int j = 0; j < tr.m; ++j) new_elems.push_back(next_id++);
            art.new_elems = new_elems;
            bprime = bprime.with_elements(new_elems);
            if (art.case1) {
                art.attach_point = tr.aprime_classes[i].front();
                for (int j = 0; j < tr.m; ++j) {
                    Elems sset = take_sset();
                    art.s_sets.push_back(sset);
                    Elems members = sorted_unique(
                        set_union(sset, Elems{art.attach_point, new_elems[j]}));
                    bprime = bprime.with_edge(plan.step2_symbol, members);
                    art.step2_edges.push_back({plan.step2_symbol, members});
                }
                tr.bprime_classes.push_back(set_union(tr.aprime_classes[i], new_elems));
            } else {
                Elems shared = distinct_ssets ? Elems{} : take_sset();
                for (int j = 0; j + 1 < tr.m; ++j) {
                    Elems sset = distinct_ssets ? take_sset() : shared;
                    art.s_sets.push_back(sset);
                    Elems members = sorted_unique(
                        set_union(sset, Elems{new_elems[j], new_elems[j + 1]}));
                    bprime = bprime.with_edge(plan.step2_symbol, members);
                    art.step2_edges.push_back({plan.step2_symbol, members});
                }
                tr.bprime_classes.push_back(new_elems);
            }
            tr.classes.push_back(art);

            // step-2 local facts
            Elems with_class = set_union(b0prime, tr.bprime_classes.back());
            Structure local = induced_substructure(bprime, with_class);
            if (predimension(local) - predimension(v) != 1)
                throw ConstructionError("step 2: class does not sit at relative predimension 1",
                                        tr);
            if (!is_d_closed(b0prime, local))
                throw ConstructionError("step 2: B'_0 is not d-closed next to a class", tr);
        }

        // ---- Step 3: cross relations, placed disjointly on fresh class elements
        std::set<Element> used_by_rho;
        for (const auto& rho : tr.rho) {
            std::vector<int> met;
            for (int i = 0; i < tr.s; ++i)
                if (!set_intersection(rho.members, tr.b_classes[i]).empty()) met.push_back(i);
            int sym_out;
            if (p.variant == Variant::LanguageChange) {
                sym_out = target_sig->lift_index_for_arity(
                    static_cast<int>(rho.members.size()));
            } else {
                sym_out = target_sig->index_of(p.b.signature().symbol(rho.symbol).name);
            }
            if (sym_out < 0) throw ConstructionError("step 3: no symbol for a cross relation", tr);
            const int arity_out = target_sig->symbol(sym_out).arity;
            Elems members;
            auto take_from_class = [&](int i) -> bool {
                for (Element cand : tr.classes[i].new_elems)
                    if (!used_by_rho.count(cand)) {
                        used_by_rho.insert(cand);
                        members = with_element(members, cand);
                        return true;
                    }
                return false;
            };
            for (int i : met)
                if (!take_from_class(i))
                    throw ConstructionError("step 3: class ran out of fresh elements", tr);
            int guard = 0;
            while (static_cast<int>(members.size()) < arity_out) {
                bool ok = false;
                for (int i : met)
                    if (take_from_class(i)) {
                        ok = true;
                        break;
                    }
                if (!ok || ++guard > 4 * arity_out)
                    throw ConstructionError("step 3: not enough room for a cross relation", tr);
            }
            bprime = bprime.with_edge(sym_out, members);
            tr.rho_prime.push_back({sym_out, members});
        }
    }

    tr.bprime = bprime;
    for (int i = 0; i < tr.s; ++i)
        tr.fprime[tr.b_classes[i].front()] = tr.bprime_classes[i].front();
    return tr;
}

} // namespace detail

/// Build B' and f' : G_W(B) -> G_X(B') extending f, per the three-step
/// construction, and verify every claim before returning. A failed claim
/// triggers one retry with doubled sizes, then a ConstructionError carrying the
/// trace.
inline ConstructionTrace construct_extension(const ExtensionProblem& p,
                                             const std::shared_ptr<MuFunction>& mu,
                                             const VerifyOptions& opts = {}) {
    if (!mu) throw InputError("construct_extension: missing mu function");
    detail::validate_problem(p);
    if (!mu->validity().extension_bound)
        throw InputError("construct_extension: mu violates the extension-theorem bounds on "
                         "queried types");
    if ((p.variant == Variant::Kmu) && !mu->validity().collapse3_bound)
        throw InputError("construct_extension: kmu variant needs mu >= 3 on base predimension 3");
    if (!membership(p.aprime, detail::target_class(p, mu)).member)
        throw InputError("construct_extension: A' is not in the target class");

    ConstructionTrace last;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ConstructionTrace tr = detail::construct_once(p, mu, attempt + 1);
        tr.claims = verify_claims(tr, p, mu, opts);
        bool all = true;
        for (const auto& c : tr.claims) all = all && c.passed;
        if (all) return tr;
        last = std::move(tr);
    }
    std::string failed;
    for (const auto& c : last.claims)
        if (!c.passed) failed += " [" + c.name + ": " + c.detail + "]";
    throw ConstructionError("construct_extension: claims failed after retry:" + failed,
                            std::move(last));
}

/// Claim verifiers. Claim 1: for unions of classes, d-closedness transfers
/// between the two sides and the relative predimensions over the closures
/// agree. Claim 2: B' is in C0, the closure pieces are d-closed, A'' <= B', and
/// the class map is a geometry isomorphism extending f. Claim 3: B' lands in
/// the collapsed class (variant-specific; skipped toward plain C0).
inline std::vector<ClaimReport> verify_claims(const ConstructionTrace& t,
                                              const ExtensionProblem& p,
                                              const std::shared_ptr<MuFunction>& mu,
                                              const VerifyOptions& opts) {
    std::vector<ClaimReport> out;
    const int s = t.s;

    // ---- Claim 1
    {
        ClaimReport c{"claim1", true, ""};
        if (s > 16) {
            c.passed = false;
            c.detail = "too many classes to scan";
        }
        for (std::uint64_t u = 0; c.passed && u < (1ull << s); ++u) {
            Elems y = t.b0, yp = t.v.elements();
            for (int i = 0; i < s; ++i)
                if (u & (1ull << i)) {
                    y = set_union(y, t.b_classes[i]);
                    yp = set_union(yp, t.bprime_classes[i]);
                }
            Elems ya = set_intersection(y, p.a.elements());
            Elems ypa = set_intersection(yp, p.aprime.elements());
            bool closed_a = is_d_closed(ya, p.a);
            bool closed_ap = is_d_closed(ypa, p.aprime);
            if (closed_a != closed_ap) {
                c.passed = false;
                c.detail = "d-closedness transfer fails at class set " + std::to_string(u);
                break;
            }
            if (closed_a) {
                long long left = predimension(p.b, y) - predimension(p.b, t.b0);
                long long right =
                    predimension(t.bprime, yp) - predimension(t.bprime, t.v.elements());
                if (left != right) {
                    c.passed = false;
                    c.detail = "relative predimension mismatch at class set " +
                               std::to_string(u) + " (" + std::to_string(left) +
                               " vs " + std::to_string(right) + ")";
                    break;
                }
            }
        }
        out.push_back(c);
    }

    // ---- Claim 2
    {
        ClaimReport c{"claim2", true, ""};
        auto fail = [&](const std::string& why) {
            if (c.passed) {
                c.passed = false;
                c.detail = why;
            }
        };
        if (detail::min_delta_over_supersets(t.bprime, {}).value < 0)
            fail("B' leaves C0");
        if (c.passed && !is_self_sufficient(t.a_second.elements(), t.bprime).self_sufficient)
            fail("A'' is not self-sufficient in B'");
        if (c.passed && !is_d_closed(t.v.elements(), t.bprime)) fail("B'_0 is not d-closed in B'");
        for (int i = 0; c.passed && i < s; ++i)
            if (!is_d_closed(set_union(t.v.elements(), t.bprime_classes[i]), t.bprime))
                fail("B'_0 u B'_i is not d-closed in B' at class " + std::to_string(i));
        if (c.passed) {
            Geometry gb = geometry_of(p.b, p.w);
            Geometry gbp = geometry_of(t.bprime, p.x);
            // the points must be exactly the recorded classes on both sides
            auto sorted_classes = [](std::vector<Elems> v) {
                std::sort(v.begin(), v.end(),
                          [](const Elems& a, const Elems& b) { return a.front() < b.front(); });
                return v;
            };
            if (gb.points() != sorted_classes(t.b_classes))
                fail("source points differ from the decomposition classes");
            else if (gbp.closure_of_base() != t.v.elements())
                fail("cl(X) in B' is not B'_0");
            else if (gbp.points() != sorted_classes(t.bprime_classes))
                fail("target points differ from the constructed classes");
            else {
                // closed-set correspondence under the class bijection
                if (s > 16) fail("too many classes to scan");
                for (std::uint64_t u = 0; c.passed && u < (1ull << s); ++u) {
                    Elems y = t.b0, yp = t.v.elements();
                    for (int i = 0; i < s; ++i)
                        if (u & (1ull << i)) {
                            y = set_union(y, t.b_classes[i]);
                            yp = set_union(yp, t.bprime_classes[i]);
                        }
                    if (is_d_closed(y, p.b) != is_d_closed(yp, t.bprime))
                        fail("closed-set correspondence fails at class set " + std::to_string(u));
                }
                // f' extends f: matched classes contain the A'-classes
                for (int i = 0; c.passed && i < t.r; ++i)
                    if (!is_subset(t.aprime_classes[i], t.bprime_classes[i]))
                        fail("f' does not extend f at class " + std::to_string(i));
            }
        }
        out.push_back(c);
    }

    // ---- Claim 3 (variant-specific collapse membership)
    if (!(p.into_c0_only || p.variant == Variant::LanguageChange)) {
        ClaimReport c{"claim3", true, ""};
        MembershipOptions mo;
        mo.max_base = opts.max_base;
        mo.max_ext = opts.max_ext;
        const auto& mu_shared = mu;
        switch (p.variant) {
            case Variant::Standard: {
                auto rep = membership(t.bprime, ClassSpec::cmu(mu_shared), mo);
                c.passed = rep.member;
                if (!rep.member && rep.violation)
                    c.detail = "copy bound exceeded over " + elems_to_string(rep.violation->base);
                else if (!rep.member)
                    c.detail = rep.detail;
                else if (!rep.exhaustive)
                    c.detail = "capped msa search";
                break;
            }
            case Variant::Kmu: {
                // Claims 3-5 of the collapsed-line theorem
                for (int i = 0; c.passed && i < s; ++i)
                    for (int j = i + 1; c.passed && j < s; ++j) {
                        Elems triple = set_union(t.v.elements(),
                                                 set_union(t.bprime_classes[i],
                                                           t.bprime_classes[j]));
                        Structure sub = induced_substructure(t.bprime, triple);
                        if (!membership(sub, ClassSpec::kmu(mu_shared), mo).member) {
                            c.passed = false;
                            c.detail = "B'_0 u B'_i u B'_j leaves the class at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")";
                        } else if (!is_self_sufficient(triple, t.bprime).self_sufficient) {
                            c.passed = false;
                            c.detail = "B'_0 u B'_i u B'_j not self-sufficient";
                        }
                    }
                if (c.passed) {
                    auto rep = membership(t.bprime, ClassSpec::kmu(mu_shared), mo);
                    c.passed = rep.member;
                    if (!rep.member)
                        c.detail = rep.bad_subset ? ("small set fails: " +
                                                     elems_to_string(*rep.bad_subset))
                                                  : rep.detail;
                }
                break;
            }
            case Variant::C0prime: {
                auto rep = membership(t.bprime, ClassSpec::c0prime(p.k), mo);
                c.passed = rep.member;
                if (!rep.member) c.detail = "predimension floor fails";
                if (c.passed) {
                    bool exhaustive = true;
                    int n_el = static_cast<int>(t.bprime.size());
                    auto viols = detail::collect_mu_violations(
                        t.bprime, *mu, p.k,
                        mo.max_base >= 0 ? mo.max_base : std::min(n_el, 12),
                        mo.max_ext >= 0 ? mo.max_ext : (n_el <= 14 ? n_el : 6), &exhaustive, 1);
                    if (!viols.empty()) {
                        c.passed = false;
                        c.detail = "copy bound exceeded over " + elems_to_string(viols[0].base);
                    }
                }
                break;
            }
            default: break;
        }
        out.push_back(c);
    }
    return out;
}

/// One partial isomorphism of localized geometries produced by back_and_forth.
struct PartialIso {
    Elems source_domain;  // self-sufficient in the source chain
    Elems target_domain;  // self-sufficient in the target chain
    std::map<Element, Element> point_map; // source point reps -> target elements
};

struct BackAndForthResult {
    std::vector<PartialIso> maps;
    bool budget_exhausted = false;
    GenericChain source;
    GenericChain target;
};

/// True when the partial map is an independence-preserving bijection between
/// the localized geometries of its domains (checked over every point subset).
inline bool independence_preserving(const PartialIso& iso, const Structure& source_stage,
                                    const Structure& target_stage, const Elems& x) {
    Structure a_src = induced_substructure(source_stage, iso.source_domain);
    Structure a_tgt = induced_substructure(target_stage, iso.target_domain);
    Geometry gs = geometry_of(a_src, {});
    Geometry gt = geometry_of(a_tgt, set_intersection(x, iso.target_domain));
    if (gs.point_count() != gt.point_count() ||
        iso.point_map.size() != static_cast<std::size_t>(gs.point_count()))
        return false;
    std::vector<int> image(gs.point_count(), -1);
    std::vector<bool> used(gt.point_count(), false);
    for (const auto& [from, to] : iso.point_map) {
        int i = gs.point_of(from);
        int j = gt.point_of(to);
        if (i < 0 || j < 0 || used[j] || image[i] >= 0) return false;
        image[i] = j;
        used[j] = true;
    }
    const int n = gs.point_count();
    if (n > 16) throw ResourceError("independence_preserving: too many points");
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        std::uint64_t mapped = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1ull << i)) mapped |= 1ull << image[i];
        if (gs.rank_of_mask(mask) != gt.rank_of_mask(mapped)) return false;
    }
    return true;
}

namespace detail {

// The image of b under the amalgamation embedding must be induced-exact in the
// new stage, otherwise geometries computed later inside the chain drift away
// from the constructed ones.
inline bool reembeds_exactly(const Structure& b, const AmalgamResult& res) {
    std::map<Element, Element> ren(res.f2.begin(), res.f2.end());
    Elems image;
    for (const auto& [from, to] : res.f2) image = with_element(image, to);
    return induced_substructure(res.result, image) == b.relabeled(ren);
}

// Grow the chain by one fresh isolated point (always a legal extension problem).
inline void chain_add_point(GenericChain& chain) {
    Structure pt(chain.sig, {chain.fresh_id()},
                 std::vector<std::vector<Elems>>(chain.sig->size()));
    auto res = amalgamate(chain.current(), pt, {}, chain.spec);
    if (!res.success) throw ResourceError("back_and_forth: could not add a point to a chain");
    chain.stages.push_back(res.result);
}

// An element of the current stage outside cl(context), adding one if needed.
inline Element chain_pick_new_point(GenericChain& chain, const Elems& context) {
    for (int tries = 0; tries < 3; ++tries) {
        Elems cl = d_closure(context, chain.current());
        for (Element e : chain.current().elements())
            if (!contains(cl, e)) return e;
        chain_add_point(chain);
    }
    throw ResourceError("back_and_forth: chain refuses to grow");
}

} // namespace detail

/// Back-and-forth between a plain chain (class C0, geometry over the empty set)
/// and a collapsed chain (Cmu or Kmu, geometry localized over X): a growing
/// sequence of partial isomorphisms of the localized geometries, alternating
/// the direction of extension. Chains are grown in place as solutions are
/// realized.
inline BackAndForthResult back_and_forth(GenericChain source, GenericChain target,
                                         const Elems& x, int steps,
                                         const VerifyOptions& opts = {}) {
    if (source.spec.kind != ClassSpec::Kind::C0)
        throw InputError("back_and_forth: source chain must be over C0");
    if (!(target.spec.kind == ClassSpec::Kind::C0 || target.spec.kind == ClassSpec::Kind::Cmu ||
          target.spec.kind == ClassSpec::Kind::Kmu))
        throw InputError("back_and_forth: target chain must be over C0, Cmu or Kmu");
    if (!is_subset(x, target.current().elements()) ||
        !is_self_sufficient(x, target.current()).self_sufficient)
        throw InputError("back_and_forth: X must be self-sufficient in the target chain");
    if (steps < 0) throw InputError("back_and_forth: negative step count");
    auto mu = target.spec.mu ? target.spec.mu : std::make_shared<MuFunction>();

    BackAndForthResult out;
    Elems a_src;      // current source-side domain (self-sufficient)
    Elems a_tgt = self_sufficient_closure(x, target.current());
    std::map<Element, Element> f; // source point reps -> target class members
    out.maps.push_back({a_src, a_tgt, f});

    for (int step = 1; step <= steps; ++step) {
        const bool forward = (step % 2) == 1;
        try {
            if (forward) {
                Element c = detail::chain_pick_new_point(source, a_src);
                Elems b_set = self_sufficient_closure(with_element(a_src, c), source.current());
                ExtensionProblem prob;
                prob.w = {};
                prob.a = induced_substructure(source.current(), a_src);
                prob.b = induced_substructure(source.current(), b_set);
                prob.x = x;
                prob.aprime = induced_substructure(target.current(), a_tgt);
                prob.f = f;
                prob.variant = target.spec.kind == ClassSpec::Kind::Kmu ? Variant::Kmu
                                                                        : Variant::Standard;
                prob.into_c0_only = target.spec.kind == ClassSpec::Kind::C0;
                prob.fresh_start = target.fresh_id();
                prob.generator_offset = static_cast<int>(target.current().size()) + 8 * step;
                auto trace = construct_extension(prob, mu, opts);
                auto res = amalgamate(target.current(), trace.bprime, a_tgt, target.spec);
                if (!res.success || !detail::reembeds_exactly(trace.bprime, res)) {
                    out.budget_exhausted = true;
                    break;
                }
                target.stages.push_back(res.result);
                a_src = b_set;
                a_tgt.clear();
                for (Element e : trace.bprime.elements())
                    a_tgt = with_element(a_tgt, res.f2.at(e));
                f.clear();
                for (const auto& [src_rep, dst_rep] : trace.fprime)
                    f[src_rep] = res.f2.at(dst_rep);
            } else {
                Element c = detail::chain_pick_new_point(target, set_union(a_tgt, x));
                Elems b_set = self_sufficient_closure(
                    set_union(with_element(a_tgt, c), x), target.current());
                ExtensionProblem prob;
                prob.w = x;
                prob.a = induced_substructure(target.current(), set_union(a_tgt, x));
                prob.b = induced_substructure(target.current(), b_set);
                prob.x = {};
                prob.aprime = induced_substructure(source.current(), a_src);
                // invert the point map, rekeying on the localized point reps
                prob.f.clear();
                Geometry ga_tgt = geometry_of(prob.a, x);
                for (const auto& [src_rep, tgt_el] : f) {
                    int pi = ga_tgt.point_of(tgt_el);
                    if (pi < 0) throw std::logic_error("back_and_forth: stale point map");
                    prob.f[ga_tgt.points()[pi].front()] = src_rep;
                }
                prob.variant = Variant::Standard;
                prob.into_c0_only = true;
                prob.fresh_start = source.fresh_id();
                prob.generator_offset = static_cast<int>(source.current().size()) + 8 * step;
                auto trace = construct_extension(prob, mu, opts);
                auto res = amalgamate(source.current(), trace.bprime, a_src, source.spec);
                if (!res.success || !detail::reembeds_exactly(trace.bprime, res)) {
                    out.budget_exhausted = true;
                    break;
                }
                source.stages.push_back(res.result);
                a_tgt = b_set;
                a_src.clear();
                for (Element e : trace.bprime.elements())
                    a_src = with_element(a_src, res.f2.at(e));
                // trace.fprime maps target-side reps -> source-side reps; invert back
                f.clear();
                for (const auto& [tgt_rep, src_rep] : trace.fprime)
                    f[res.f2.at(src_rep)] = tgt_rep;
            }
        } catch (const ResourceError&) {
            out.budget_exhausted = true;
            break;
        } catch (const ConstructionError&) {
            out.budget_exhausted = true;
            break;
        }
        out.maps.push_back({a_src, a_tgt, f});
    }
    out.source = std::move(source);
    out.target = std::move(target);
    return out;
}

} // namespace flatgeom
