// Shared vocabulary: vertex sets, binomials, subset enumeration, seeded randomness.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace designforge {

// A vertex set is a sorted vector of distinct vertex labels.
using VSet = std::vector<int>;

struct VSetHash {
    std::size_t operator()(const VSet& v) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
        for (int x : v) {
            h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

template <class V>
using VSetMap = std::unordered_map<VSet, V, VSetHash>;
using VSetSet = std::unordered_set<VSet, VSetHash>;

class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline VSet make_set(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
        throw DesignError("vertex set has repeated vertices");
    return v;
}

inline bool is_subset(const VSet& a, const VSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool disjoint(const VSet& a, const VSet& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return false;
        if (a[i] < b[j]) ++i; else ++j;
    }
    return true;
}

inline VSet set_union(const VSet& a, const VSet& b) {
    VSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VSet set_minus(const VSet& a, const VSet& b) {
    VSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VSet set_intersection(const VSet& a, const VSet& b) {
    VSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::string set_str(const VSet& s) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << '}';
    return os.str();
}

inline std::int64_t binom(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Calls f on every k-subset of `items` (positions kept in order), lexicographically.
template <class F>
void for_each_subset(const std::vector<int>& items, int k, F&& f) {
    const int n = static_cast<int>(items.size());
    if (k < 0 || k > n) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    VSet cur(k);
    while (true) {
        for (int i = 0; i < k; ++i) cur[i] = items[idx[i]];
        f(static_cast<const VSet&>(cur));
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

inline std::vector<VSet> subsets(const std::vector<int>& items, int k) {
    std::vector<VSet> out;
    for_each_subset(items, k, [&](const VSet& s) { out.push_back(s); });
    return out;
}

inline std::vector<int> iota_vec(int n, int start = 0) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = start + i;
    return v;
}

// splitmix64 finaliser; used as a keyed hash wherever a value must depend only on (seed, key).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t keyed_hash(std::uint64_t seed, const VSet& key) {
    std::uint64_t h = mix64(seed ^ 0x5bd1e995ULL);
    for (int x : key) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)));
    return mix64(h ^ key.size());
}

// Child seed for an independent stream; identical (seed, tag) always gives the same child.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix64(mix64(seed) ^ mix64(tag * 0xd1342543de82ef95ULL + 1));
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01(rng) < p;
}

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

template <class T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
    // Fisher-Yates with our own draws so results do not depend on the library's shuffle.
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace designforge
