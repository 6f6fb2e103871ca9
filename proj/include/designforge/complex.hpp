// Leveled simplicial complexes, signed edge vectors, densities, restrictions and boundedness.
#pragma once

#include <boost/rational.hpp>

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "designforge/core.hpp"

namespace designforge {

using Rational = boost::rational<long long>;

class Complex {
public:
    Complex() : Complex(0, 0) {}
    Complex(int n, int q) : n_(n), q_(q), levels_(q + 1) {
        if (n < 0 || q < 0) throw DesignError("complex needs n >= 0 and q >= 0");
        levels_[0].insert(VSet{});
        index_.insert(VSet{});
    }

    int n() const { return n_; }
    int q() const { return q_; }

    const std::set<VSet>& level(int i) const {
        static const std::set<VSet> empty;
        if (i < 0 || i > q_) return empty;
        return levels_[i];
    }
    std::size_t level_size(int i) const { return level(i).size(); }

    bool contains(const VSet& e) const { return index_.count(e) != 0; }

    // Adds e together with all of its subsets.
    void add(const VSet& e) {
        if (contains(e)) return;
        check_set(e);
        insert_raw(e);
        if (e.empty()) return;
        for_each_subset(e, static_cast<int>(e.size()) - 1, [&](const VSet& s) { add(s); });
    }

    // Adds e assuming every proper subset is already present.
    void add_closed(const VSet& e) {
        if (contains(e)) return;
        check_set(e);
        insert_raw(e);
    }

    int mult_level() const { return mult_level_; }
    long long mult(const VSet& e) const {
        auto it = mult_.find(e);
        return it == mult_.end() ? 1 : it->second;
    }
    const std::map<VSet, long long>& multiplicities() const { return mult_; }

    void set_mult(const VSet& e, long long m) {
        if (m < 1) throw DesignError("multiplicities must be positive");
        if (!contains(e)) throw DesignError("multiplicity on a set outside the complex");
        int lv = static_cast<int>(e.size());
        if (mult_level_ >= 0 && mult_level_ != lv)
            throw DesignError("multiplicities are allowed on one level only");
        mult_level_ = lv;
        if (m == 1) mult_.erase(e); else mult_[e] = m;
    }

    bool operator==(const Complex& o) const {
        return n_ == o.n_ && q_ == o.q_ && levels_ == o.levels_ && mult_ == o.mult_;
    }

    // Checks downward closure level by level; returns a missing subset on failure.
    std::optional<VSet> closure_violation() const {
        for (int i = 1; i <= q_; ++i)
            for (const VSet& e : levels_[i]) {
                std::optional<VSet> bad;
                for_each_subset(e, i - 1, [&](const VSet& s) {
                    if (!bad && !contains(s)) bad = s;
                });
                if (bad) return bad;
            }
        return std::nullopt;
    }

private:
    void check_set(const VSet& e) const {
        if (static_cast<int>(e.size()) > q_) throw DesignError("set larger than top level: " + set_str(e));
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] < 0 || e[i] >= n_) throw DesignError("vertex out of range in " + set_str(e));
            if (i && e[i - 1] >= e[i]) throw DesignError("set not sorted/distinct: " + set_str(e));
        }
    }
    void insert_raw(const VSet& e) {
        levels_[e.size()].insert(e);
        index_.insert(e);
    }

    int n_;
    int q_;
    std::vector<std::set<VSet>> levels_;
    VSetSet index_;
    int mult_level_ = -1;
    std::map<VSet, long long> mult_;
};

// Sparse integer vector over the r-sets of a host.
struct EdgeVector {
    int r = 0;
    std::map<VSet, long long> entries;

    EdgeVector() = default;
    explicit EdgeVector(int level) : r(level) {}

    long long get(const VSet& e) const {
        auto it = entries.find(e);
        return it == entries.end() ? 0 : it->second;
    }
    void add(const VSet& e, long long c) {
        if (c == 0) return;
        if (static_cast<int>(e.size()) != r) throw DesignError("edge vector level mismatch at " + set_str(e));
        auto& v = entries[e];
        v += c;
        if (v == 0) entries.erase(e);
    }
    bool zero() const { return entries.empty(); }
    std::size_t support() const { return entries.size(); }

    EdgeVector& operator+=(const EdgeVector& o) {
        for (auto& [e, c] : o.entries) add(e, c);
        return *this;
    }
    EdgeVector& operator-=(const EdgeVector& o) {
        for (auto& [e, c] : o.entries) add(e, -c);
        return *this;
    }
    EdgeVector operator-(const EdgeVector& o) const { EdgeVector t = *this; t -= o; return t; }
    EdgeVector operator+(const EdgeVector& o) const { EdgeVector t = *this; t += o; return t; }
    EdgeVector scaled(long long k) const {
        EdgeVector t(r);
        if (k != 0) for (auto& [e, c] : entries) t.entries[e] = c * k;
        return t;
    }
    bool operator==(const EdgeVector& o) const { return r == o.r && entries == o.entries; }

    EdgeVector positive() const {
        EdgeVector t(r);
        for (auto& [e, c] : entries) if (c > 0) t.entries[e] = c;
        return t;
    }
    EdgeVector negative() const {
        EdgeVector t(r);
        for (auto& [e, c] : entries) if (c < 0) t.entries[e] = -c;
        return t;
    }
    // |J| = sum of absolute entries.
    long long mass() const {
        long long s = 0;
        for (auto& [e, c] : entries) s += c < 0 ? -c : c;
        return s;
    }
    long long max_abs() const {
        long long m = 0;
        for (auto& [e, c] : entries) m = std::max(m, c < 0 ? -c : c);
        return m;
    }
};

inline EdgeVector indicator(int r, const std::vector<VSet>& sets) {
    EdgeVector J(r);
    for (const VSet& e : sets) J.add(e, 1);
    return J;
}

inline Complex complete_complex(int n, int q) {
    if (q < 0 || q > n) throw DesignError("complete complex needs 0 <= q <= n");
    Complex K(n, q);
    auto all = iota_vec(n);
    for (int i = 1; i <= q; ++i) for_each_subset(all, i, [&](const VSet& s) { K.add_closed(s); });
    return K;
}

// Calls f on each i-set whose (i-1)-subsets all lie in G, in lexicographic order.
template <class F>
void for_each_candidate(const Complex& G, int i, F&& f) {
    if (i == 0) { f(VSet{}); return; }
    std::set<VSet> cands;
    for (const VSet& s : G.level(i - 1)) {
        int start = s.empty() ? 0 : s.back() + 1;
        for (int v = start; v < G.n(); ++v) {
            VSet e = s;
            e.push_back(v);
            bool ok = true;
            for (std::size_t drop = 0; drop + 1 < e.size() && ok; ++drop) {
                VSet sub;
                sub.reserve(e.size() - 1);
                for (std::size_t k = 0; k < e.size(); ++k) if (k != drop) sub.push_back(e[k]);
                ok = G.contains(sub);
            }
            if (ok) f(static_cast<const VSet&>(e));
        }
    }
}

inline long long candidate_count(const Complex& G, int i) {
    long long c = 0;
    for_each_candidate(G, i, [&](const VSet&) { ++c; });
    return c;
}

inline Rational relative_density(const Complex& G, int i) {
    if (i < 0 || i > G.q()) throw DesignError("density level out of range");
    long long den = candidate_count(G, i);
    if (den == 0) return Rational(1);
    return Rational(static_cast<long long>(G.level_size(i)), den);
}

// G(n,d): level i keeps each candidate i-set independently with probability d[i-1].
inline Complex random_complex(int n, const std::vector<double>& d, std::uint64_t seed) {
    const int q = static_cast<int>(d.size());
    for (double x : d)
        if (x < 0.0 || x > 1.0) throw DesignError("densities must lie in [0,1]");
    Complex G(n, q);
    Rng rng(seed);
    for (int i = 1; i <= q; ++i) {
        std::vector<VSet> chosen;
        for_each_candidate(G, i, [&](const VSet& e) {
            if (bernoulli(rng, d[i - 1])) chosen.push_back(e);
        });
        for (const VSet& e : chosen) G.add_closed(e);
    }
    return G;
}

// G(e): sets f disjoint from e with e ∪ f in G, as a (q-|e|)-complex on the same labels.
inline Complex neighborhood(const Complex& G, const VSet& e) {
    if (!G.contains(e)) throw DesignError("neighborhood root not in complex: " + set_str(e));
    const int k = static_cast<int>(e.size());
    Complex out(G.n(), G.q() - k);
    for (int j = 1; j + k <= G.q(); ++j)
        for (const VSet& s : G.level(j + k))
            if (is_subset(e, s)) out.add_closed(set_minus(s, e));
    if (G.mult_level() >= k)
        for (auto& [s, m] : G.multiplicities())
            if (is_subset(e, s)) out.set_mult(set_minus(s, e), m);
    return out;
}

namespace detail {
template <class Pred>
Complex restrict_by(const Complex& G, int s, Pred&& good) {
    Complex out(G.n(), G.q());
    for (int i = 1; i <= G.q(); ++i)
        for (const VSet& e : G.level(i)) {
            bool keep = true;
            if (i <= s) {
                keep = good(e);
            } else {
                for_each_subset(e, s, [&](const VSet& f) { if (keep && !good(f)) keep = false; });
            }
            if (keep) out.add_closed(e);
        }
    for (auto& [e, m] : G.multiplicities())
        if (out.contains(e)) out.set_mult(e, m);
    return out;
}
}  // namespace detail

// G[G2]: sets of G whose subsets of size at most s all lie in G2.
inline Complex restrict(const Complex& G, const Complex& G2, int s) {
    return detail::restrict_by(G, s, [&](const VSet& f) { return G2.contains(f); });
}

// G[J] = G[J ∪ G_{<s}] for a family J of s-sets.
inline Complex restrict_level(const Complex& G, const std::set<VSet>& J, int s) {
    return detail::restrict_by(G, s, [&](const VSet& f) {
        return static_cast<int>(f.size()) < s ? G.contains(f) : J.count(f) != 0;
    });
}

struct BoundedReport {
    bool ok = true;
    VSet witness;          // (r-1)-set attaining the maximum
    long long max_plus = 0;
    long long max_minus = 0;
    long long max_degree = 0;
    double bound = 0.0;    // theta * n
};

// Max over (r-1)-sets of |J+(e)| and |J-(e)|, compared strictly against theta*n.
inline BoundedReport check_bounded(const EdgeVector& J, double theta, int n) {
    BoundedReport rep;
    rep.bound = theta * n;
    if (J.r == 0) {
        long long p = 0, m = 0;
        for (auto& [e, c] : J.entries) (c > 0 ? p : m) += c > 0 ? c : -c;
        rep.max_plus = p; rep.max_minus = m; rep.max_degree = std::max(p, m);
        rep.ok = rep.max_degree < rep.bound;
        return rep;
    }
    VSetMap<std::pair<long long, long long>> deg;
    for (auto& [e, c] : J.entries)
        for_each_subset(e, J.r - 1, [&](const VSet& f) {
            auto& d = deg[f];
            if (c > 0) d.first += c; else d.second -= c;
        });
    std::vector<VSet> keys;
    keys.reserve(deg.size());
    for (auto& kv : deg) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (const VSet& f : keys) {
        auto [p, m] = deg[f];
        rep.max_plus = std::max(rep.max_plus, p);
        rep.max_minus = std::max(rep.max_minus, m);
        long long d = std::max(p, m);
        if (d > rep.max_degree) { rep.max_degree = d; rep.witness = f; }
    }
    rep.ok = rep.max_degree < rep.bound;
    return rep;
}

inline BoundedReport check_bounded(const std::vector<VSet>& sets, int r, double theta, int n) {
    return check_bounded(indicator(r, sets), theta, n);
}

// ---- text format -------------------------------------------------------------------------

inline std::vector<VSet> maximal_sets(const Complex& G) {
    VSetSet covered;
    std::vector<VSet> out;
    for (int i = G.q(); i >= 0; --i)
        for (const VSet& e : G.level(i)) {
            if (!covered.count(e)) out.push_back(e);
            if (i > 0) for_each_subset(e, i - 1, [&](const VSet& s) { covered.insert(s); });
        }
    return out;
}

inline bool tuple_less(const VSet& a, const VSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

inline void write_complex(std::ostream& os, const Complex& G) {
    os << "COMPLEX n=" << G.n() << " q=" << G.q() << "\n";
    std::vector<VSet> lines = maximal_sets(G);
    for (auto& [e, m] : G.multiplicities())
        if (std::find(lines.begin(), lines.end(), e) == lines.end()) lines.push_back(e);
    std::sort(lines.begin(), lines.end(), tuple_less);
    for (const VSet& e : lines) {
        os << e.size();
        for (int v : e) os << ' ' << v;
        long long m = G.mult(e);
        if (m != 1 || (G.mult_level() == static_cast<int>(e.size()) && G.multiplicities().count(e)))
            os << " m=" << m;
        os << "\n";
    }
}

namespace detail {
inline std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline long long parse_kv(const std::string& tok, const std::string& key) {
    if (tok.rfind(key + "=", 0) != 0) throw DesignError("expected " + key + "=<int>, got '" + tok + "'");
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok.substr(key.size() + 1), &used);
        if (used != tok.size() - key.size() - 1) throw DesignError("bad integer in '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        throw DesignError("bad integer in '" + tok + "'");
    }
}

inline long long parse_int(const std::string& tok) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw DesignError("bad integer '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        throw DesignError("bad integer '" + tok + "'");
    }
}
}  // namespace detail

inline Complex read_complex(std::istream& is) {
    std::string line;
    std::optional<Complex> G;
    std::vector<std::pair<VSet, long long>> mults;
    while (std::getline(is, line)) {
        std::string s = detail::strip_comment(line);
        if (s.empty()) continue;
        std::istringstream ls(s);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (!G) {
            if (toks.size() != 3 || toks[0] != "COMPLEX") throw DesignError("expected 'COMPLEX n=<int> q=<int>' header");
            long long n = detail::parse_kv(toks[1], "n"), q = detail::parse_kv(toks[2], "q");
            if (n < 0 || q < 0 || q > n) throw DesignError("invalid complex header");
            G.emplace(static_cast<int>(n), static_cast<int>(q));
            continue;
        }
        long long size = detail::parse_int(toks[0]);
        std::vector<int> vs;
        long long m = 1;
        bool has_m = false;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            if (toks[i].rfind("m=", 0) == 0) {
                if (i + 1 != toks.size()) throw DesignError("m=<mult> must end the line");
                m = detail::parse_kv(toks[i], "m");
                has_m = true;
            } else {
                vs.push_back(static_cast<int>(detail::parse_int(toks[i])));
            }
        }
        if (static_cast<long long>(vs.size()) != size) throw DesignError("set size does not match vertex count: " + s);
        VSet e = make_set(vs);
        G->add(e);
        if (has_m) mults.emplace_back(e, m);
    }
    if (!G) throw DesignError("missing COMPLEX header");
    for (auto& [e, m] : mults) G->set_mult(e, m);
    return *G;
}

}  // namespace designforge
