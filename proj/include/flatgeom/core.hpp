#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatgeom {

// Element ids are opaque integers. Element sets are kept sorted and duplicate-free
// so that set algebra is cheap and every container iterates deterministically.
using Element = int;
using Elems = std::vector<Element>;

class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

inline Elems sorted_unique(Elems v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool is_sorted_unique(const Elems& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i - 1] >= v[i]) return false;
    return true;
}

inline bool contains(const Elems& v, Element x) {
    return std::binary_search(v.begin(), v.end(), x);
}

inline bool is_subset(const Elems& a, const Elems& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline Elems set_union(const Elems& a, const Elems& b) {
    Elems out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Elems set_intersection(const Elems& a, const Elems& b) {
    Elems out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Elems set_difference(const Elems& a, const Elems& b) {
    Elems out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Elems with_element(const Elems& a, Element x) {
    if (contains(a, x)) return a;
    Elems out = a;
    out.insert(std::upper_bound(out.begin(), out.end(), x), x);
    return out;
}

inline Elems without_element(const Elems& a, Element x) {
    Elems out = a;
    auto it = std::lower_bound(out.begin(), out.end(), x);
    if (it != out.end() && *it == x) out.erase(it);
    return out;
}

inline std::string elems_to_string(const Elems& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    s += "}";
    return s;
}

// Global element-count guard. Operations that walk a whole structure refuse inputs
// larger than this; FLATGEOM_MAX_ELEMENTS in the environment overrides it.
inline int max_elements_cap() {
    static int cap = [] {
        if (const char* env = std::getenv("FLATGEOM_MAX_ELEMENTS")) {
            int v = std::atoi(env);
            if (v > 0) return v;
        }
        return 512;
    }();
    return cap;
}

inline void check_size_cap(std::size_t n, const char* where) {
    if (n > static_cast<std::size_t>(max_elements_cap()))
        throw ResourceError(std::string(where) + ": structure exceeds element cap (" +
                            std::to_string(n) + " > " + std::to_string(max_elements_cap()) +
                            "); set FLATGEOM_MAX_ELEMENTS to raise");
}

} // namespace flatgeom
