#pragma once

#include <optional>

#include "flatgeom/dimension.hpp"

namespace flatgeom {

/// The combinatorial geometry of a structure, optionally localized over a base
/// set: points are the interdependence classes of elements outside cl(base),
/// and the rank of a point set is the relative dimension over the base.
class Geometry {
public:
    Geometry() = default;

    Geometry(Structure ambient, Elems base, Elems closure0, std::vector<Elems> points,
             long long base_dim)
        : ambient_(std::move(ambient)),
          base_(std::move(base)),
          closure0_(std::move(closure0)),
          points_(std::move(points)),
          base_dim_(base_dim) {}

    const Structure& ambient() const { return ambient_; }
    const Elems& base() const { return base_; }
    const Elems& closure_of_base() const { return closure0_; }
    const std::vector<Elems>& points() const { return points_; }
    int point_count() const { return static_cast<int>(points_.size()); }

    /// Points are identified by their least member.
    Element rep(int point_index) const { return points_.at(point_index).front(); }

    Elems reps() const {
        Elems out;
        for (const auto& p : points_) out.push_back(p.front());
        return out;
    }

    /// Index of the point class containing x, or -1 when x is in cl(base).
    int point_of(Element x) const {
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (contains(points_[i], x)) return static_cast<int>(i);
        return -1;
    }

    int point_index_of_rep(Element r) const {
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (points_[i].front() == r) return static_cast<int>(i);
        return -1;
    }

    long long rank_of_indices(const std::vector<int>& point_indices) const {
        Elems set = base_;
        for (int i : point_indices) set = with_element(set, rep(i));
        return dimension_value(set, ambient_) - base_dim_;
    }

    long long rank_of_mask(std::uint64_t mask) const {
        std::vector<int> idx;
        for (int i = 0; i < point_count(); ++i)
            if (mask & (1ull << i)) idx.push_back(i);
        return rank_of_indices(idx);
    }

    long long rank() const {
        std::vector<int> all(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i) all[i] = static_cast<int>(i);
        return rank_of_indices(all);
    }

    /// Closure of a set of points inside the geometry, as point indices.
    std::vector<int> closure_of_points(const std::vector<int>& point_indices) const {
        Elems set = base_;
        for (int i : point_indices) set = with_element(set, rep(i));
        Elems cl = d_closure(set, ambient_);
        std::vector<int> out;
        for (int i = 0; i < point_count(); ++i)
            if (contains(cl, rep(i))) out.push_back(i);
        return out;
    }

    bool same_points_and_ranks(const Geometry& other) const {
        if (points_ != other.points_) return false;
        if (point_count() > 20) throw ResourceError("geometry comparison: too many points");
        for (std::uint64_t mask = 0; mask < (1ull << point_count()); ++mask)
            if (rank_of_mask(mask) != other.rank_of_mask(mask)) return false;
        return true;
    }

private:
    Structure ambient_;
    Elems base_;
    Elems closure0_;
    std::vector<Elems> points_;
    long long base_dim_ = 0;
};

/// Extract the geometry of B localized over `base` (the plain geometry when the
/// base is empty).
inline Geometry geometry_of(const Structure& b, const Elems& base) {
    require_subset(b, base, "geometry_of");
    Elems cl0 = d_closure(base, b);
    long long base_dim = dimension_value(base, b);
    std::vector<Elems> points;
    Elems assigned = cl0;
    for (Element x : b.elements()) {
        if (contains(assigned, x)) continue;
        Elems cls = set_difference(d_closure(with_element(base, x), b), cl0);
        points.push_back(cls);
        assigned = set_union(assigned, cls);
    }
    std::sort(points.begin(), points.end(),
              [](const Elems& a, const Elems& b2) { return a.front() < b2.front(); });
    return Geometry(b, base, std::move(cl0), std::move(points), base_dim);
}

inline Geometry geometry_of(const Structure& b) { return geometry_of(b, {}); }

/// True when the listed points (given by their representatives) are independent:
/// no repeats and rank equal to the count.
inline bool independent(const Geometry& g, const std::vector<Element>& point_reps) {
    std::vector<int> idx;
    for (Element r : point_reps) {
        int i = g.point_index_of_rep(r);
        if (i < 0) throw InputError("independent: " + std::to_string(r) + " is not a point");
        idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) return false;
    return g.rank_of_indices(idx) == static_cast<long long>(idx.size());
}

struct Flat {
    std::vector<Element> point_reps;
    long long rank = 0;
};

/// All closed point-sets of a finite geometry, ordered by (rank, reps).
inline std::vector<Flat> closed_sets(const Geometry& g, std::size_t cap = 100000) {
    std::vector<std::vector<int>> flats;
    std::vector<std::vector<int>> frontier{g.closure_of_points({})};
    std::set<std::vector<int>> seen(frontier.begin(), frontier.end());
    while (!frontier.empty()) {
        std::vector<std::vector<int>> next;
        for (const auto& f : frontier) {
            flats.push_back(f);
            if (flats.size() + next.size() > cap)
                throw ResourceError("closed_sets: flat count exceeds cap");
            for (int p = 0; p < g.point_count(); ++p) {
                if (std::binary_search(f.begin(), f.end(), p)) continue;
                auto grown = f;
                grown.insert(std::lower_bound(grown.begin(), grown.end(), p), p);
                auto cl = g.closure_of_points(grown);
                if (seen.insert(cl).second) next.push_back(cl);
            }
        }
        frontier = std::move(next);
    }
    std::vector<Flat> out;
    for (const auto& f : flats) {
        Flat fl;
        for (int i : f) fl.point_reps.push_back(g.rep(i));
        fl.rank = g.rank_of_indices(f);
        out.push_back(std::move(fl));
    }
    std::sort(out.begin(), out.end(), [](const Flat& a, const Flat& b) {
        return std::tie(a.rank, a.point_reps) < std::tie(b.rank, b.point_reps);
    });
    return out;
}

/// Rank-preserving bijection between two finite geometries (a matroid
/// isomorphism), or nothing when none exists. Exhaustive backtracking over
/// rank tables, pruned by per-point flat-degree signatures.
inline std::optional<std::map<Element, Element>> geometry_isomorphic(const Geometry& g1,
                                                                     const Geometry& g2) {
    const int n = g1.point_count();
    if (n != g2.point_count()) return std::nullopt;
    if (n > 16) throw ResourceError("geometry_isomorphic: too many points");
    const std::uint64_t full = 1ull << n;
    std::vector<long long> r1(full), r2(full);
    for (std::uint64_t m = 0; m < full; ++m) {
        r1[m] = g1.rank_of_mask(m);
        r2[m] = g2.rank_of_mask(m);
    }

    // flat-degree signature: for each point, the sorted list of (rank, count)
    // over closed sets through it
    auto signatures = [n](const Geometry& g, const std::vector<long long>& ranks) {
        std::vector<std::map<long long, int>> sig(n);
        for (std::uint64_t m = 0; m < ranks.size(); ++m) {
            bool is_closed = true;
            for (int p = 0; p < n && is_closed; ++p)
                if (!(m & (1ull << p)) && ranks[m | (1ull << p)] == ranks[m]) is_closed = false;
            if (!is_closed) continue;
            for (int p = 0; p < n; ++p)
                if (m & (1ull << p)) sig[p][ranks[m]]++;
        }
        (void)g;
        return sig;
    };
    auto sig1 = signatures(g1, r1);
    auto sig2 = signatures(g2, r2);

    std::vector<int> image(n, -1);
    std::vector<bool> used(n, false);
    std::function<bool(int)> place = [&](int i) -> bool {
        if (i == n) return true;
        for (int j = 0; j < n; ++j) {
            if (used[j] || sig1[i] != sig2[j]) continue;
            image[i] = j;
            used[j] = true;
            bool ok = true;
            // every subset of the mapped prefix must keep its rank
            for (std::uint64_t m = 0; ok && m < (1ull << (i + 1)); ++m) {
                if (!(m & (1ull << i))) continue;
                std::uint64_t mapped = 0;
                for (int k = 0; k <= i; ++k)
                    if (m & (1ull << k)) mapped |= 1ull << image[k];
                if (r1[m] != r2[mapped]) ok = false;
            }
            if (ok && place(i + 1)) return true;
            used[j] = false;
            image[i] = -1;
        }
        return false;
    };
    if (!place(0)) return std::nullopt;
    std::map<Element, Element> out;
    for (int i = 0; i < n; ++i) out[g1.rep(i)] = g2.rep(image[i]);
    return out;
}

} // namespace flatgeom
