#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "flatgeom/structure.hpp"

namespace flatgeom {
namespace detail {

// Exact canonical labeling of a pointed structure by individualization +
// iterative color refinement on the element/hyperedge incidence structure.
// Backtracking explores every refinement tie, with one pruning rule: if the
// transposition of two tied elements is an automorphism fixing everything else,
// only one of them is individualized (the branches are provably equal).
class Canonicalizer {
public:
    Canonicalizer(const Structure& s, const Elems& base, bool pointwise_base)
        : s_(s), n_(static_cast<int>(s.elements().size())) {
        index_of_.clear();
        for (int i = 0; i < n_; ++i) index_of_[s.elements()[i]] = i;
        for (const auto& e : s.all_edges()) {
            std::vector<int> m;
            m.reserve(e.members.size());
            for (Element x : e.members) m.push_back(index_of_.at(x));
            edges_.push_back({e.symbol, std::move(m)});
        }
        for (int i = 0; i < n_; ++i) incidence_.emplace_back();
        for (std::size_t ei = 0; ei < edges_.size(); ++ei)
            for (int v : edges_[ei].second) incidence_[v].push_back(static_cast<int>(ei));

        base_flag_.assign(n_, 0);
        initial_.assign(n_, 1);
        int next = 0;
        if (pointwise_base) {
            for (Element b : base) {
                initial_[index_of_.at(b)] = next++;
                base_flag_[index_of_.at(b)] = 1;
            }
            for (int i = 0; i < n_; ++i)
                if (!base_flag_[i]) initial_[i] = next;
        } else {
            for (Element b : base) {
                initial_[index_of_.at(b)] = 0;
                base_flag_[index_of_.at(b)] = 1;
            }
        }
        base_size_ = static_cast<int>(base.size());
    }

    std::string run() {
        std::vector<int> colors = initial_;
        refine(colors);
        best_.clear();
        nodes_ = 0;
        descend(colors);
        return best_;
    }

private:
    using Edge = std::pair<int, std::vector<int>>; // (symbol, member indices)

    void refine(std::vector<int>& colors) const {
        if (n_ == 0) return;
        while (true) {
            // signature of v: old color + multiset of (symbol, colors of co-members).
            std::vector<std::vector<int>> sig(n_);
            for (int v = 0; v < n_; ++v) {
                sig[v].push_back(colors[v]);
                std::vector<std::vector<int>> parts;
                for (int ei : incidence_[v]) {
                    std::vector<int> p{edges_[ei].first};
                    std::vector<int> rest;
                    for (int u : edges_[ei].second)
                        if (u != v) rest.push_back(colors[u]);
                    std::sort(rest.begin(), rest.end());
                    p.insert(p.end(), rest.begin(), rest.end());
                    parts.push_back(std::move(p));
                }
                std::sort(parts.begin(), parts.end());
                for (auto& p : parts) {
                    sig[v].push_back(-1); // separator
                    sig[v].insert(sig[v].end(), p.begin(), p.end());
                }
            }
            std::vector<int> order(n_);
            for (int i = 0; i < n_; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](int a, int b) { return sig[a] < sig[b]; });
            std::vector<int> next(n_);
            int rank = 0;
            for (int i = 0; i < n_; ++i) {
                if (i > 0 && sig[order[i]] != sig[order[i - 1]]) ++rank;
                next[order[i]] = rank;
            }
            if (next == colors) return;
            colors = std::move(next);
        }
    }

    // True when swapping u and v (fixing everything else) maps the edge set to itself.
    bool transposition_is_automorphism(int u, int v) const {
        auto mapped = [&](const Edge& e) {
            Edge out = e;
            for (int& x : out.second) {
                if (x == u) x = v;
                else if (x == v) x = u;
            }
            std::sort(out.second.begin(), out.second.end());
            return out;
        };
        std::vector<Edge> orig = edges_, image;
        image.reserve(edges_.size());
        for (const auto& e : edges_) image.push_back(mapped(e));
        for (auto& e : orig) std::sort(e.second.begin(), e.second.end());
        std::sort(orig.begin(), orig.end());
        std::sort(image.begin(), image.end());
        return orig == image;
    }

    void descend(std::vector<int> colors) {
        if (++nodes_ > node_budget_)
            throw ResourceError("canonical_form: search budget exceeded");
        // first (= smallest-color) cell with more than one member
        int target_color = -1;
        std::vector<int> cell;
        for (int c = 0; c < n_ && target_color < 0; ++c) {
            cell.clear();
            for (int v = 0; v < n_; ++v)
                if (colors[v] == c) cell.push_back(v);
            if (cell.size() > 1) target_color = c;
        }
        if (target_color < 0) {
            emit(colors);
            return;
        }
        std::vector<int> candidates;
        for (int v : cell) {
            bool twin_of_earlier = false;
            for (int u : candidates)
                if (transposition_is_automorphism(u, v)) {
                    twin_of_earlier = true;
                    break;
                }
            if (!twin_of_earlier) candidates.push_back(v);
        }
        for (int v : candidates) {
            std::vector<int> branch = colors;
            for (int u = 0; u < n_; ++u)
                if (branch[u] > target_color || (branch[u] == target_color && u != v))
                    ++branch[u];
            refine(branch);
            descend(std::move(branch));
        }
    }

    void emit(const std::vector<int>& colors) {
        std::string cert;
        cert.reserve(64 + edges_.size() * 12);
        cert += "n" + std::to_string(n_) + ";b" + std::to_string(base_size_) + ";";
        for (std::size_t sym = 0; sym < s_.symbol_count(); ++sym) {
            const auto& rs = s_.signature().symbol(sym);
            cert += rs.name + "/" + std::to_string(rs.arity) + "*" + std::to_string(rs.weight) + ":";
            std::vector<std::vector<int>> relabeled;
            for (const auto& e : edges_) {
                if (e.first != static_cast<int>(sym)) continue;
                std::vector<int> img;
                img.reserve(e.second.size());
                for (int v : e.second) img.push_back(colors[v]);
                std::sort(img.begin(), img.end());
                relabeled.push_back(std::move(img));
            }
            std::sort(relabeled.begin(), relabeled.end());
            for (const auto& e : relabeled) {
                for (std::size_t i = 0; i < e.size(); ++i)
                    cert += (i ? "." : "") + std::to_string(e[i]);
                cert += "|";
            }
            cert += ";";
        }
        if (best_.empty() || cert < best_) best_ = cert;
    }

    const Structure& s_;
    int n_;
    int base_size_ = 0;
    std::map<Element, int> index_of_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> incidence_;
    std::vector<int> initial_;
    std::vector<char> base_flag_;
    std::string best_;
    long long nodes_ = 0;
    static constexpr long long node_budget_ = 2'000'000;
};

} // namespace detail

/// Canonical code of a pointed structure. Codes are equal exactly when there is
/// an isomorphism of structures carrying base onto base (as a set), and are
/// stable across runs and element relabelings.
inline std::string canonical_form(const PointedStructure& p) {
    return detail::Canonicalizer(p.structure, p.base, /*pointwise_base=*/false).run();
}

inline std::string canonical_form(const Structure& s) {
    return canonical_form(PointedStructure(s, {}));
}

/// Variant that fixes the base pointwise (base elements are pinned in id order).
/// Two extensions of the same concrete base get equal codes exactly when they are
/// isomorphic over that base.
inline std::string canonical_form_over(const PointedStructure& p) {
    return detail::Canonicalizer(p.structure, p.base, /*pointwise_base=*/true).run();
}

} // namespace flatgeom
