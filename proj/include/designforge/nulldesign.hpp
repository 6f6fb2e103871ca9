// Signed patterns, embedding combinations, boundaries, null designs, the integral octahedral
// basis and the octahedral decomposition pipeline.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <climits>
#include <memory>
#include <mutex>

#include "designforge/extensions.hpp"

namespace designforge {

using BigInt = boost::multiprecision::cpp_int;

struct SignedPattern {
    Complex H;
    std::map<VSet, int> sign;  // nonzero signs only

    int s(const VSet& e) const {
        auto it = sign.find(e);
        return it == sign.end() ? 0 : it->second;
    }
    int level() const {
        if (sign.empty()) return 0;
        int lv = static_cast<int>(sign.begin()->first.size());
        for (auto& [e, v] : sign)
            if (static_cast<int>(e.size()) != lv) throw DesignError("signed pattern spans several levels");
        return lv;
    }
};

// Octahedron vertex (j, x) is pattern vertex 2j + x.
inline int oct_vertex(int j, int x) { return 2 * j + x; }

inline SignedPattern octahedron(int r) {
    if (r < 1) throw DesignError("octahedron needs r >= 1");
    SignedPattern P{Complex(2 * r, r), {}};
    for (int mask = 0; mask < (1 << r); ++mask) {
        VSet e;
        int par = 0;
        for (int j = 0; j < r; ++j) {
            int x = (mask >> j) & 1;
            par ^= x;
            e.push_back(oct_vertex(j, x));
        }
        P.H.add(e);
        P.sign[e] = par ? -1 : 1;
    }
    return P;
}

// K^s_q: the complete q-complex on [q] with sign +1 on s-sets.
inline SignedPattern clique_pattern(int q, int s) {
    SignedPattern P{complete_complex(q, q), {}};
    for_each_subset(iota_vec(q), s, [&](const VSet& e) { P.sign[e] = 1; });
    return P;
}

// Integer combination of embeddings, each a tuple of host vertices indexed by pattern vertex.
struct EmbCombo {
    int k = 0;
    std::map<std::vector<int>, long long> terms;

    EmbCombo() = default;
    explicit EmbCombo(int width) : k(width) {}

    void add(const std::vector<int>& t, long long c) {
        if (c == 0) return;
        if (static_cast<int>(t.size()) != k) throw DesignError("embedding width mismatch");
        auto& v = terms[t];
        v += c;
        if (v == 0) terms.erase(t);
    }
    long long coeff(const std::vector<int>& t) const {
        auto it = terms.find(t);
        return it == terms.end() ? 0 : it->second;
    }
    bool zero() const { return terms.empty(); }
    long long mass() const {
        long long s = 0;
        for (auto& [t, c] : terms) s += c < 0 ? -c : c;
        return s;
    }
    EmbCombo& operator+=(const EmbCombo& o) {
        if (k == 0 && terms.empty()) k = o.k;
        for (auto& [t, c] : o.terms) add(t, c);
        return *this;
    }
    EmbCombo& operator-=(const EmbCombo& o) {
        if (k == 0 && terms.empty()) k = o.k;
        for (auto& [t, c] : o.terms) add(t, -c);
        return *this;
    }
    EmbCombo scaled(long long s) const {
        EmbCombo out(k);
        if (s) for (auto& [t, c] : terms) out.terms[t] = c * s;
        return out;
    }
    bool operator==(const EmbCombo& o) const { return terms == o.terms && (terms.empty() || k == o.k); }
    EmbCombo positive() const {
        EmbCombo out(k);
        for (auto& [t, c] : terms) if (c > 0) out.terms[t] = c;
        return out;
    }
    EmbCombo negative() const {
        EmbCombo out(k);
        for (auto& [t, c] : terms) if (c < 0) out.terms[t] = -c;
        return out;
    }
};

// Canonical octahedron: phi(j,0) < phi(j,1) in every coordinate (each swap flips the sign),
// coordinates ordered by phi(j,0).
inline std::pair<std::vector<int>, int> canon_oct(const std::vector<int>& phi) {
    const int r = static_cast<int>(phi.size()) / 2;
    std::vector<std::pair<int, int>> coords(r);
    int sg = 1;
    for (int j = 0; j < r; ++j) {
        int a = phi[2 * j], b = phi[2 * j + 1];
        if (a > b) { std::swap(a, b); sg = -sg; }
        coords[j] = {a, b};
    }
    std::sort(coords.begin(), coords.end());
    std::vector<int> out(2 * r);
    for (int j = 0; j < r; ++j) { out[2 * j] = coords[j].first; out[2 * j + 1] = coords[j].second; }
    return {out, sg};
}

inline void add_oct(EmbCombo& Phi, const std::vector<int>& phi, long long c) {
    auto [t, sg] = canon_oct(phi);
    Phi.add(t, sg * c);
}

inline void add_clique(EmbCombo& Phi, std::vector<int> qset, long long c) {
    std::sort(qset.begin(), qset.end());
    Phi.add(qset, c);
}

// Signed r-edges of one octahedron term.
inline std::vector<std::pair<VSet, int>> oct_edges(const std::vector<int>& phi) {
    const int r = static_cast<int>(phi.size()) / 2;
    std::vector<std::pair<VSet, int>> out;
    out.reserve(1u << r);
    for (int mask = 0; mask < (1 << r); ++mask) {
        VSet e(r);
        int par = 0;
        for (int j = 0; j < r; ++j) {
            int x = (mask >> j) & 1;
            par ^= x;
            e[j] = phi[2 * j + x];
        }
        std::sort(e.begin(), e.end());
        out.emplace_back(std::move(e), par ? -1 : 1);
    }
    return out;
}

struct BoundaryParts {
    EdgeVector total;
    EdgeVector plus;   // all positive contributions
    EdgeVector minus;  // all negative contributions, as magnitudes
};

inline BoundaryParts boundary_parts(const EmbCombo& Phi, const SignedPattern& P) {
    const int lv = P.level();
    BoundaryParts out{EdgeVector(lv), EdgeVector(lv), EdgeVector(lv)};
    std::vector<std::pair<VSet, int>> signed_sets(P.sign.begin(), P.sign.end());
    for (auto& [t, c] : Phi.terms) {
        if (static_cast<int>(t.size()) < P.H.n()) throw DesignError("embedding shorter than pattern");
        for (auto& [s, sg] : signed_sets) {
            VSet im(s.size());
            for (std::size_t k = 0; k < s.size(); ++k) im[k] = t[s[k]];
            std::sort(im.begin(), im.end());
            long long v = c * sg;
            out.total.add(im, v);
            if (v > 0) out.plus.add(im, v); else out.minus.add(im, -v);
        }
    }
    return out;
}

inline EdgeVector boundary(const EmbCombo& Phi, const SignedPattern& P) {
    const int lv = P.level();
    EdgeVector out(lv);
    for (auto& [t, c] : Phi.terms)
        for (auto& [s, sg] : P.sign) {
            VSet im(s.size());
            for (std::size_t k = 0; k < s.size(); ++k) im[k] = t[s[k]];
            std::sort(im.begin(), im.end());
            out.add(im, c * sg);
        }
    return out;
}

// Fast path for combinations over O(r).
inline BoundaryParts oct_boundary_parts(const EmbCombo& Phi, int r) {
    BoundaryParts out{EdgeVector(r), EdgeVector(r), EdgeVector(r)};
    for (auto& [t, c] : Phi.terms)
        for (auto& [e, sg] : oct_edges(t)) {
            long long v = c * sg;
            out.total.add(e, v);
            if (v > 0) out.plus.add(e, v); else out.minus.add(e, -v);
        }
    return out;
}

inline EdgeVector oct_boundary(const EmbCombo& Phi, int r) { return oct_boundary_parts(Phi, r).total; }

// ∂_{K^s_r} J: sums of J over the r-sets containing each s-set.
inline EdgeVector shadow(const EdgeVector& J, int s) {
    EdgeVector out(s);
    if (s < 0 || s > J.r) throw DesignError("shadow level out of range");
    for (auto& [e, c] : J.entries) for_each_subset(e, s, [&](const VSet& f) { out.add(f, c); });
    return out;
}

struct NullReport {
    bool ok = true;
    VSet witness;
    long long imbalance = 0;
};

inline NullReport check_null(const EdgeVector& J, int s) {
    if (s > J.r) throw DesignError("check_null needs s <= r");
    NullReport rep;
    if (s < 0) return rep;
    EdgeVector sh = shadow(J, s);
    if (!sh.zero()) {
        rep.ok = false;
        rep.witness = sh.entries.begin()->first;
        rep.imbalance = sh.entries.begin()->second;
    }
    return rep;
}

// J(e): the vector f -> J(e ∪ f) over sets f disjoint from e.
inline EdgeVector link(const EdgeVector& J, const VSet& e) {
    EdgeVector out(J.r - static_cast<int>(e.size()));
    for (auto& [f, c] : J.entries)
        if (is_subset(e, f)) out.add(set_minus(f, e), c);
    return out;
}

// ---- integral octahedral basis ---------------------------------------------------------

// Echelon Z-basis of the lattice spanned by all octahedra of the complete r-complex on [R],
// built by inserting generators one by one with gcd row operations. Each basis row keeps its
// expression in the generators, so integer solves come out as octahedron combinations.
class OctBasis {
public:
    OctBasis(int R, int r) : R_(R), r_(r) {
        if (r < 1 || R < 2 * r) throw DesignError("octahedral basis needs R >= 2r >= 2");
        cols_ = subsets(iota_vec(R), r);
        for (std::size_t i = 0; i < cols_.size(); ++i) col_index_[cols_[i]] = static_cast<int>(i);
        enumerate_generators();
        build();
    }

    int rank() const { return static_cast<int>(rows_.size()); }
    int columns() const { return static_cast<int>(cols_.size()); }
    std::size_t generators() const { return gens_.size(); }

    // Some Φ over O(r) on [R] with ∂Φ = J, or nullopt when J is outside the lattice.
    std::optional<EmbCombo> solve(const EdgeVector& J) const {
        std::vector<BigInt> x(cols_.size());
        for (auto& [e, c] : J.entries) {
            auto it = col_index_.find(e);
            if (it == col_index_.end()) throw DesignError("edge outside the clique: " + set_str(e));
            x[it->second] = c;
        }
        std::map<int, BigInt> coef;
        for (std::size_t c = 0; c < x.size(); ++c) {
            if (x[c] == 0) continue;
            auto it = pivot_of_.find(static_cast<int>(c));
            if (it == pivot_of_.end()) return std::nullopt;
            const Row& h = rows_[it->second];
            if (x[c] % h.v[c] != 0) return std::nullopt;
            BigInt t = x[c] / h.v[c];
            for (std::size_t j = c; j < x.size(); ++j) x[j] -= t * h.v[j];
            for (auto& [g, u] : h.u) coef[g] += t * u;
        }
        EmbCombo Phi(2 * r_);
        for (auto& [g, u] : coef) {
            if (u == 0) continue;
            if (u > BigInt(LLONG_MAX / 4) || u < BigInt(-(LLONG_MAX / 4)))
                throw DesignError("octahedral solve coefficient overflow");
            add_oct(Phi, gens_[g], static_cast<long long>(u));
        }
        return Phi;
    }

private:
    struct Row {
        std::vector<BigInt> v;
        std::map<int, BigInt> u;
    };

    void enumerate_generators() {
        // r disjoint pairs {a<b}, pairs sorted by a: every octahedron up to sign.
        std::vector<int> cur;
        std::vector<char> used(R_, 0);
        std::function<void(int)> rec = [&](int depth) {
            if (depth == r_) { gens_.push_back(cur); return; }
            int start = depth == 0 ? 0 : cur[2 * (depth - 1)] + 1;
            for (int a = start; a < R_; ++a) {
                if (used[a]) continue;
                used[a] = 1;
                for (int b = a + 1; b < R_; ++b) {
                    if (used[b]) continue;
                    used[b] = 1;
                    cur.push_back(a);
                    cur.push_back(b);
                    rec(depth + 1);
                    cur.pop_back();
                    cur.pop_back();
                    used[b] = 0;
                }
                used[a] = 0;
            }
        };
        rec(0);
    }

    static void axpy(std::vector<BigInt>& y, const BigInt& a, const std::vector<BigInt>& x) {
        for (std::size_t i = 0; i < y.size(); ++i) if (x[i] != 0) y[i] += a * x[i];
    }
    static void axpy(std::map<int, BigInt>& y, const BigInt& a, const std::map<int, BigInt>& x) {
        for (auto& [k, v] : x) {
            BigInt& t = y[k];
            t += a * v;
            if (t == 0) y.erase(k);
        }
    }

    void build() {
        for (std::size_t g = 0; g < gens_.size(); ++g) {
            Row cand{std::vector<BigInt>(cols_.size()), {{static_cast<int>(g), BigInt(1)}}};
            for (auto& [e, sg] : oct_edges(gens_[g])) cand.v[col_index_.at(e)] += sg;
            for (std::size_t c = 0; c < cols_.size(); ++c) {
                if (cand.v[c] == 0) continue;
                auto it = pivot_of_.find(static_cast<int>(c));
                if (it == pivot_of_.end()) {
                    if (cand.v[c] < 0) {
                        for (auto& x : cand.v) x = -x;
                        for (auto& [k, x] : cand.u) x = -x;
                    }
                    pivot_of_[static_cast<int>(c)] = static_cast<int>(rows_.size());
                    rows_.push_back(std::move(cand));
                    break;
                }
                Row& h = rows_[it->second];
                BigInt a = h.v[c], b = cand.v[c];
                if (b % a == 0) {
                    BigInt t = -(b / a);
                    axpy(cand.v, t, h.v);
                    axpy(cand.u, t, h.u);
                    continue;
                }
                // extended gcd: s a + t b = d
                BigInt s0 = 1, s1 = 0, t0 = 0, t1 = 1, x = a, y = b;
                while (y != 0) {
                    BigInt qq = x / y;
                    BigInt tmp = x - qq * y; x = y; y = tmp;
                    tmp = s0 - qq * s1; s0 = s1; s1 = tmp;
                    tmp = t0 - qq * t1; t0 = t1; t1 = tmp;
                }
                if (x < 0) { x = -x; s0 = -s0; t0 = -t0; }
                Row nh{std::vector<BigInt>(cols_.size()), {}};
                axpy(nh.v, s0, h.v);
                axpy(nh.v, t0, cand.v);
                axpy(nh.u, s0, h.u);
                axpy(nh.u, t0, cand.u);
                Row nc{std::vector<BigInt>(cols_.size()), {}};
                axpy(nc.v, b / x, h.v);
                axpy(nc.v, -(a / x), cand.v);
                axpy(nc.u, b / x, h.u);
                axpy(nc.u, -(a / x), cand.u);
                h = std::move(nh);
                cand = std::move(nc);
            }
        }
    }

    int R_, r_;
    std::vector<VSet> cols_;
    VSetMap<int> col_index_;
    std::vector<std::vector<int>> gens_;
    std::vector<Row> rows_;
    std::map<int, int> pivot_of_;
};

inline std::shared_ptr<const OctBasis> oct_basis(int R, int r) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const OctBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{R, r}];
    if (!slot) slot = std::make_shared<const OctBasis>(R, r);
    return slot;
}

inline int octahedral_span_rank(int n, int r) {
    if (n < 2 * r) throw DesignError("octahedral span rank needs n >= 2r");
    return oct_basis(n, r)->rank();
}

struct FinishCliqueResult {
    EmbCombo Phi;
    long long size = 0;  // |Φ|
};

// Φ over O(r) inside the complete r-complex on `verts` with ∂Φ = J exactly.
inline FinishCliqueResult finish_clique(const EdgeVector& J, const VSet& verts) {
    const int r = J.r;
    const int R = static_cast<int>(verts.size());
    if (r < 1) throw DesignError("finish_clique needs r >= 1");
    if (R < 2 * r) throw DesignError("finish_clique needs at least 2r vertices");
    auto nr = check_null(J, r - 1);
    if (!nr.ok) throw DesignError("finish_clique input is not null at " + set_str(nr.witness));
    std::unordered_map<int, int> loc;
    for (int i = 0; i < R; ++i) loc[verts[i]] = i;
    EdgeVector Jl(r);
    for (auto& [e, c] : J.entries) {
        VSet le;
        for (int v : e) {
            auto it = loc.find(v);
            if (it == loc.end()) throw DesignError("finish_clique input leaves the vertex set");
            le.push_back(it->second);
        }
        Jl.add(le, c);
    }
    auto sol = oct_basis(R, r)->solve(Jl);
    if (!sol) throw DesignError("internal: null vector has no integral octahedral solution");
    FinishCliqueResult out{EmbCombo(2 * r), 0};
    for (auto& [t, c] : sol->terms) {
        std::vector<int> g(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) g[k] = verts[t[k]];
        add_oct(out.Phi, g, c);
    }
    out.size = out.Phi.mass();
    return out;
}

inline FinishCliqueResult finish_clique(const EdgeVector& J, int R) { return finish_clique(J, iota_vec(R)); }

// ---- octahedral decomposition -----------------------------------------------------------

struct OctOptions {
    int N = 1;
    VSetSet B;                 // edges whose unforced use is forbidden
    double target_theta = 0;   // reported against, never enforced
    double nu = 0.2;           // thinning rate in the cancel stage
    int anchors = 200;         // anchors averaged in the cancel stage
    bool simplify = true;
    bool cancel = true;
    double cancel_theta = 1.0;   // cancel only when J± has an (r-1)-degree above cancel_theta * n
    bool simpliphi = true;
    int finish_anchor_cap = 16;
    long long elimination_budget = 200000;  // vertex eliminations per anchor, recursion included
    int replace_tries = 1000;       // search nodes per (φ, φ') pair
    long long replace_cap = 200000;
    long long attempt_cap = 50000;
};

struct OctReport {
    bool exact = false;
    bool simple = false;       // N-simple
    bool avoiding = false;     // B-avoiding
    double theta_prime = 0;    // max (r-1)-degree of ∂+ and ∂- over n
    bool within_target = true;
    long long mass = 0;
    long long simplify_placed = 0, simplify_roots = 0;
    long long cancel_first = 0, cancel_skipped = 0;
    int cancel_anchors = 0;
    VSet finish_anchor;
    std::string finish_method;
    int finish_attempts = 0;
    std::vector<long long> finish_profile;  // max |∂±Φ(e)| over (r-1)-sets e, by |e ∩ X|
    long long replacements = 0;
    long long attempts = 0;
    long long bad_left = 0;
    bool simpliphi_feasible = true;
};

struct OctResult {
    EmbCombo Phi;
    OctReport report;
};

inline OctResult oct_decompose(const Complex& G, const EdgeVector& J, const OctOptions& opt, std::uint64_t seed);

namespace detail {

inline bool is_bad(long long p, long long m, bool inB, int N) {
    return p > 0 && m > 0 && (inB || p > N || m > N);
}

inline bool all_edges_in(const Complex& G, const std::vector<int>& phi) {
    for (auto& [e, sg] : oct_edges(phi))
        if (!G.contains(e)) return false;
    return true;
}

// Places X vertices on the 1-sides of coordinates [from, r): returns false if no choice keeps
// every edge in G. phi has 2r entries, free slots are -1.
inline bool complete_in_X(const Complex& G, std::vector<int>& phi, int from, const VSet& X) {
    const int r = static_cast<int>(phi.size()) / 2;
    std::vector<char> taken(X.size(), 0);
    for (std::size_t k = 0; k < X.size(); ++k)
        for (int v : phi) if (v == X[k]) taken[k] = 1;
    std::function<bool(int)> rec = [&](int j) -> bool {
        if (j == r) return all_edges_in(G, phi);
        for (std::size_t k = 0; k < X.size(); ++k) {
            if (taken[k]) continue;
            bool clash = false;
            for (int v : phi) if (v == X[k]) clash = true;
            if (clash) continue;
            taken[k] = 1;
            phi[2 * j + 1] = X[k];
            if (rec(j + 1)) return true;
            taken[k] = 0;
        }
        phi[2 * j + 1] = -1;
        return false;
    };
    return rec(from);
}


// A set T is good for the anchor X when T ∪ e' ∈ G for every e' ⊆ X with |T ∪ e'| <= r.
struct AnchorGoodness {
    const Complex& G;
    VSet X;
    int r;
    std::map<VSet, bool> memo;

    bool good(const VSet& T) {
        auto it = memo.find(T);
        if (it != memo.end()) return it->second;
        bool ok = G.contains(T);
        for (int k = 1; ok && k <= r; ++k)
            for_each_subset(X, k, [&](const VSet& e) {
                if (!ok) return;
                VSet U = set_union(T, e);
                if (static_cast<int>(U.size()) <= r && !G.contains(U)) ok = false;
            });
        memo.emplace(T, ok);
        return ok;
    }
    // union of the bad i-subsets of f
    VSet bad_union(const VSet& f, int i) {
        VSet u;
        for_each_subset(f, i, [&](const VSet& S) {
            if (!good(S)) u = set_union(u, S);
        });
        return u;
    }
};

// Moves J onto sets that are good for X, level by level: each union f' of bad i-sets is cleared
// by decomposing the link J(f') in a restricted link complex and pairing f' with fresh good vertices.
inline std::optional<EmbCombo> focus_on_anchor(const Complex& G, EdgeVector& J, const VSet& X, const OctOptions& opt,
                                               Rng& rng, int step_cap = 20000) {
    const int r = J.r;
    const int n = G.n();
    AnchorGoodness A{G, X, r, {}};
    EmbCombo Phi(2 * r);
    for (int i = 1; i <= r; ++i) {
        while (true) {
            VSet fp;
            for (auto& [f, c] : J.entries) {
                VSet u = A.bad_union(f, i);
                if (u.size() > fp.size()) fp = u;
            }
            if (fp.empty()) break;
            const int jr = r - static_cast<int>(fp.size());
            EdgeVector Js = link(J, fp);
            // sets S ⊆ g ∪ f' of size <= i not inside f' must be good
            auto admissible = [&](const VSet& g) {
                VSet all = set_union(g, fp);
                bool ok = G.contains(all);
                for (int k = 1; ok && k <= std::min<int>(i, static_cast<int>(all.size())); ++k)
                    for_each_subset(all, k, [&](const VSet& S) {
                        if (ok && !is_subset(S, fp) && !A.good(S)) ok = false;
                    });
                return ok;
            };
            EmbCombo Psi(2 * jr);
            if (jr == 0) {
                Psi.add({}, Js.get({}));
            } else {
                Complex Gs(n, jr);
                for (int k = 1; k <= jr; ++k)
                    for (const VSet& s : G.level(k + static_cast<int>(fp.size()))) {
                        if (!is_subset(fp, s)) continue;
                        VSet g = set_minus(s, fp);
                        if (admissible(g)) Gs.add_closed(g);
                    }
                for (auto& [g, c] : Js.entries)
                    if (!Gs.contains(g)) return std::nullopt;
                OctOptions sub = opt;
                sub.B.clear();
                sub.cancel = false;
                try {
                    Psi = oct_decompose(Gs, Js, sub, rng()).Phi;
                } catch (const DesignError&) {
                    return std::nullopt;
                }
            }
            // pair f' with fresh vertices: coordinates jr..r-1 are (f'_k, w_k)
            EmbCombo stage(2 * r);
            std::vector<int> cand = iota_vec(n);
            for (auto& [psi, c] : Psi.terms) {
                for (long long u = 0; u < (c < 0 ? -c : c); ++u) {
                    std::vector<int> phi(2 * r, -1);
                    std::vector<char> used(n, 0);
                    for (int k = 0; k < 2 * jr; ++k) { phi[k] = psi[k]; used[psi[k]] = 1; }
                    for (int k = jr; k < r; ++k) { phi[2 * k] = fp[k - jr]; used[fp[k - jr]] = 1; }
                    shuffle_vec(cand, rng);
                    int steps = 0;
                    std::function<bool(int)> place = [&](int k) -> bool {
                        if (k == r) return true;
                        for (int w : cand) {
                            if (used[w]) continue;
                            if (++steps > step_cap) return false;
                            phi[2 * k + 1] = w;
                            bool ok = true;
                            // transversals through (k,1) using coordinates <= k
                            for (int mask = 0; ok && mask < (1 << k) * (1 << k); ++mask) {
                                VSet S{w};
                                bool valid = true;
                                for (int c2 = 0; c2 < k; ++c2) {
                                    int pick = (mask >> (2 * c2)) & 3;  // 0 absent, 1 side 0, 2 side 1
                                    if (pick == 3) { valid = false; break; }
                                    if (pick) S.push_back(phi[2 * c2 + pick - 1]);
                                }
                                if (!valid) continue;
                                std::sort(S.begin(), S.end());
                                if (!G.contains(S)) ok = false;
                                else if (static_cast<int>(S.size()) <= i && !A.good(S)) ok = false;
                            }
                            if (!ok) continue;
                            used[w] = 1;
                            if (place(k + 1)) return true;
                            used[w] = 0;
                        }
                        phi[2 * k + 1] = -1;
                        return false;
                    };
                    if (!place(jr)) return std::nullopt;
                    if (!all_edges_in(G, phi)) return std::nullopt;
                    add_oct(stage, phi, c > 0 ? 1 : -1);
                }
            }
            J -= oct_boundary(stage, r);
            Phi += stage;
            if (!link(J, fp).zero()) throw DesignError("internal: focus left residue on " + set_str(fp));
        }
    }
    return Phi;
}

// Focus onto X, then clear J in stages by |f ∩ X| using finish_clique on the anchor X.
inline std::optional<EmbCombo> finish_on_anchor(const Complex& G, const EdgeVector& J0, const VSet& X,
                                                const OctOptions& opt, Rng& rng) {
    const int r = J0.r;
    EdgeVector J = J0;
    auto focused = focus_on_anchor(G, J, X, opt, rng);
    if (!focused) return std::nullopt;
    EmbCombo Phi = std::move(*focused);
    for (int i = 1; i <= r + 1; ++i) {
        std::map<VSet, std::vector<std::pair<VSet, long long>>> groups;  // f' -> (f ∩ X, J(f))
        for (auto& [f, c] : J.entries) {
            VSet fx = set_intersection(f, X);
            if (static_cast<int>(fx.size()) < i - 1) return std::nullopt;  // earlier stage left residue
            if (static_cast<int>(fx.size()) == i - 1) groups[set_minus(f, X)].push_back({fx, c});
        }
        EmbCombo stage(2 * r);
        for (auto& [fp, entries] : groups) {
            if (i == 1) {
                long long c = entries[0].second;
                std::vector<int> phi(2 * r, -1);
                for (int j = 0; j < r; ++j) phi[2 * j] = fp[j];
                if (!complete_in_X(G, phi, 0, X)) return std::nullopt;
                add_oct(stage, phi, c);
                continue;
            }
            EdgeVector Jp(i - 1);
            for (auto& [g, c] : entries) Jp.add(g, c);
            if (Jp.zero()) continue;
            if (i == r + 1) {
                stage += finish_clique(Jp, X).Phi;
                continue;
            }
            auto sol = finish_clique(Jp, X);
            for (auto& [psi, c] : sol.Phi.terms) {
                std::vector<int> phi(2 * r, -1);
                for (int k = 0; k < 2 * (i - 1); ++k) phi[k] = psi[k];
                for (int k = i - 1; k < r; ++k) phi[2 * k] = fp[k - (i - 1)];
                if (!complete_in_X(G, phi, i - 1, X)) return std::nullopt;
                add_oct(stage, phi, c);
            }
        }
        J -= oct_boundary(stage, r);
        Phi += stage;
    }
    if (!J.zero()) return std::nullopt;
    return Phi;
}

// Exact fallback finish by vertex elimination towards Y (2r vertices, complete r-level in K).
// A support vertex v outside Y is cleared by decomposing its link among the remaining vertices
// and pairing v with a remaining vertex w; v is then retired for good, so this terminates, and
// what is left lives on Y where finish_clique applies.
inline std::optional<EmbCombo> eliminate_towards(const Complex& K, const EdgeVector& J, std::vector<char> alive,
                                                 const VSet& Y, Rng& rng, long long& budget) {
    const int r = J.r;
    const int n = K.n();
    EmbCombo Phi(2 * r);
    EdgeVector R = J;
    for (auto& [f, c] : R.entries)
        for (int v : f) if (!alive[v]) return std::nullopt;
    auto in_Y = [&](int v) { return std::binary_search(Y.begin(), Y.end(), v); };
    // one attempt at clearing v; returns the octahedra or nullopt
    auto clear = [&](int v) -> std::optional<EmbCombo> {
        EdgeVector L = link(R, {v});
        std::vector<char> rest = alive;
        rest[v] = 0;
        std::vector<char> in_supp(n, 0);
        for (auto& [f, c] : R.entries) for (int u : f) in_supp[u] = 1;
        // w candidates: Y, then current support, then fresh vertices
        std::vector<int> ys(Y.begin(), Y.end()), sp, fresh;
        for (int u = 0; u < n; ++u) {
            if (!rest[u] || in_Y(u)) continue;
            (in_supp[u] ? sp : fresh).push_back(u);
        }
        shuffle_vec(ys, rng);
        shuffle_vec(sp, rng);
        shuffle_vec(fresh, rng);
        std::vector<int> wcand = ys;
        wcand.insert(wcand.end(), sp.begin(), sp.end());
        wcand.insert(wcand.end(), fresh.begin(), fresh.end());
        EmbCombo Psi(2 * (r - 1));
        if (r == 1) {
            Psi.add({}, L.get({}));
        } else {
            Complex Kv(n, r - 1);
            for (int k = 1; k <= r - 1; ++k)
                for (const VSet& s : K.level(k + 1)) {
                    if (!std::binary_search(s.begin(), s.end(), v)) continue;
                    VSet g = set_minus(s, {v});
                    bool ok = true;
                    for (int u : g) if (!rest[u]) ok = false;
                    if (ok) Kv.add_closed(g);
                }
            for (auto& [g, c] : L.entries) if (!Kv.contains(g)) return std::nullopt;
            // sub-anchor: complete 2(r-1)-set in Kv, drawn from Y, then support, then fresh
            auto complete_in = [&](const VSet& S) {
                bool ok = true;
                for_each_subset(S, r - 1, [&](const VSet& e) { if (ok && !Kv.contains(e)) ok = false; });
                return ok;
            };
            std::optional<VSet> Yv;
            std::vector<int> pool = wcand;
            for (int limit : {static_cast<int>(ys.size()), static_cast<int>(ys.size() + sp.size()), static_cast<int>(pool.size())}) {
                if (Yv) break;
                std::vector<int> pl(pool.begin(), pool.begin() + limit);
                std::sort(pl.begin(), pl.end());
                long long steps = 0;
                VSet cur;
                std::function<bool(std::size_t)> grow = [&](std::size_t idx) -> bool {
                    if (static_cast<int>(cur.size()) == 2 * (r - 1)) return true;
                    if (++steps > 20000) return false;
                    for (std::size_t k = idx; k < pl.size(); ++k) {
                        cur.push_back(pl[k]);
                        bool ok = true;
                        if (static_cast<int>(cur.size()) >= r - 1) {
                            VSet rest_set(cur.begin(), cur.end() - 1);
                            for_each_subset(rest_set, r - 2, [&](const VSet& e) {
                                if (!ok) return;
                                VSet ee = e;
                                ee.push_back(pl[k]);
                                std::sort(ee.begin(), ee.end());
                                if (!Kv.contains(ee)) ok = false;
                            });
                        } else if (!Kv.contains({pl[k]})) {
                            ok = false;
                        }
                        if (ok && grow(k + 1)) return true;
                        cur.pop_back();
                    }
                    return false;
                };
                if (grow(0) && complete_in(cur)) Yv = cur;
            }
            if (!Yv) return std::nullopt;
            auto got = eliminate_towards(Kv, L, rest, *Yv, rng, budget);
            if (!got) return std::nullopt;
            Psi = std::move(*got);
        }
        // w per unit, greedily: prefer the w whose new edges cancel residual mass
        EmbCombo stage(2 * r);
        EdgeVector Rl = R;
        for (auto& [psi, c] : Psi.terms) {
            std::vector<std::pair<VSet, int>> pedges;
            if (r > 1) pedges = oct_edges(psi);
            else pedges.push_back({{}, 1});
            const int unit = c > 0 ? 1 : -1;
            for (long long u = 0; u < (c < 0 ? -c : c); ++u) {
                int w = -1;
                long long best = LLONG_MIN;
                for (int x : wcand) {
                    if (std::find(psi.begin(), psi.end(), x) != psi.end()) continue;
                    bool ok = true;
                    long long score = 0;
                    for (auto& [e, sg] : pedges) {
                        VSet ew = e;
                        ew.insert(std::upper_bound(ew.begin(), ew.end(), x), x);
                        if (!K.contains(ew)) { ok = false; break; }
                        // this edge gets -sg*unit in ∂φ, so R changes by +sg*unit
                        long long cur = Rl.get(ew), nxt = cur + sg * unit;
                        score += (cur < 0 ? -cur : cur) - (nxt < 0 ? -nxt : nxt);
                    }
                    if (ok && score > best) { best = score; w = x; }
                }
                if (w < 0) return std::nullopt;
                std::vector<int> phi = psi;
                phi.push_back(v);
                phi.push_back(w);
                EmbCombo one(2 * r);
                add_oct(one, phi, unit);
                Rl -= oct_boundary(one, r);
                stage += one;
            }
        }
        return stage;
    };
    while (true) {
        std::vector<std::pair<long long, int>> cands;  // (link mass, v)
        {
            std::map<int, long long> lm;
            for (auto& [f, c] : R.entries)
                for (int u : f) if (!in_Y(u)) lm[u] += c < 0 ? -c : c;
            for (auto& [u, m] : lm) cands.push_back({m, u});
        }
        if (cands.empty()) break;
        std::sort(cands.begin(), cands.end());
        bool progressed = false;
        for (auto& [m, v] : cands) {
            if (--budget < 0) return std::nullopt;
            auto stage = clear(v);
            if (!stage) continue;
            R -= oct_boundary(*stage, r);
            Phi += *stage;
            if (!link(R, {v}).zero()) throw DesignError("internal: elimination left residue at vertex " + std::to_string(v));
            alive[v] = 0;
            progressed = true;
            break;
        }
        if (!progressed) return std::nullopt;
    }
    if (!R.zero()) Phi += finish_clique(R, Y).Phi;
    return Phi;
}

// Elimination towards the anchor first (it keeps the mass low); the staged anchor finish with
// its focus pass when elimination gets stuck.
inline std::optional<EmbCombo> finish_any(const Complex& G, const EdgeVector& J, const VSet& X, const OctOptions& opt,
                                          Rng& rng, bool* eliminated = nullptr) {
    if (eliminated) *eliminated = true;
    long long budget = opt.elimination_budget;
    for (int t = 0; t < 4 && budget >= 0; ++t) {
        std::vector<char> alive(G.n(), 0);
        for (const VSet& v : G.level(1)) alive[v[0]] = 1;
        auto PhiX = eliminate_towards(G, J, alive, X, rng, budget);
        if (PhiX) return PhiX;
    }
    if (eliminated) *eliminated = false;
    return finish_on_anchor(G, J, X, opt, rng);
}

inline bool clique_complete(const Complex& G, const VSet& X, int r, const VSetSet* level = nullptr) {
    bool ok = true;
    for_each_subset(X, r, [&](const VSet& e) {
        if (ok && !(level ? level->count(e) != 0 : G.contains(e))) ok = false;
    });
    return ok;
}

// 2r-sets whose r-sets all lie in the given level, in lexicographic order, up to `limit`.
inline std::vector<VSet> lex_anchors(const Complex& G, int r, std::size_t limit, const VSetSet* level = nullptr) {
    std::vector<VSet> out;
    const int n = G.n();
    std::vector<int> cur;
    std::function<bool(int)> rec = [&](int start) -> bool {
        if (static_cast<int>(cur.size()) == 2 * r) {
            out.push_back(cur);
            return out.size() < limit;
        }
        for (int v = start; v < n; ++v) {
            cur.push_back(v);
            bool ok = true;
            if (static_cast<int>(cur.size()) >= r) {
                // new r-sets all contain v
                VSet rest(cur.begin(), cur.end() - 1);
                for_each_subset(rest, r - 1, [&](const VSet& s) {
                    if (!ok) return;
                    VSet e = s;
                    e.push_back(v);
                    if (!(level ? level->count(e) != 0 : G.contains(e))) ok = false;
                });
            }
            if (ok && !rec(v + 1)) { cur.pop_back(); return false; }
            cur.pop_back();
        }
        return true;
    };
    rec(0);
    return out;
}

inline std::vector<VSet> sample_anchors(const Complex& G, int r, int want, Rng& rng, const VSetSet* level) {
    const int n = G.n();
    if (binom(n, 2 * r) <= 400000) {
        auto all = lex_anchors(G, r, static_cast<std::size_t>(-1), level);
        if (static_cast<int>(all.size()) > want) {
            shuffle_vec(all, rng);
            all.resize(want);
            std::sort(all.begin(), all.end());
        }
        return all;
    }
    std::set<VSet> got;
    for (int t = 0; t < 200000 && static_cast<int>(got.size()) < want; ++t) {
        std::vector<int> all = iota_vec(n);
        for (int k = 0; k < 2 * r; ++k) std::swap(all[k], all[uniform_int(rng, k, n - 1)]);
        VSet X = make_set(std::vector<int>(all.begin(), all.begin() + 2 * r));
        if (clique_complete(G, X, r, level)) got.insert(X);
    }
    return {got.begin(), got.end()};
}

inline RootedExtension oct_root(int r, const VSet& e) {
    RootedExtension E{octahedron(r).H, std::nullopt, {}, e};
    for (int j = 0; j < r; ++j) E.F.push_back(oct_vertex(j, 0));
    return E;
}

inline std::vector<int> oct_from_image(int r, const std::vector<int>& img) { return std::vector<int>(img.begin(), img.begin() + 2 * r); }

// simplify: one octahedron per unit of J on its edge, with the N-cap extension process.
inline EmbCombo simplify_stage(const Complex& G, const EdgeVector& J, int N, Rng& rng, OctReport& rep) {
    const int r = J.r;
    std::vector<RootedExtension> roots;
    std::vector<int> signs;
    for (auto& [e, c] : J.entries)
        for (long long k = 0; k < (c < 0 ? -c : c); ++k) {
            roots.push_back(oct_root(r, e));
            signs.push_back(c > 0 ? 1 : -1);
        }
    rep.simplify_roots = static_cast<long long>(roots.size());
    ProcessConfig cfg;
    cfg.N = N;
    cfg.r = r;
    auto res = run_extension_process(G, nullptr, roots, cfg, rng());
    EmbCombo Phi(2 * r);
    for (std::size_t i = 0; i < res.embeddings.size(); ++i) add_oct(Phi, oct_from_image(r, res.embeddings[i]), signs[i]);
    rep.simplify_placed = static_cast<long long>(res.embeddings.size());
    return Phi;
}

// cancel: push J onto a thinned level, then average finish over anchors and round.
inline EmbCombo cancel_stage(const Complex& G, const EdgeVector& J, const OctOptions& opt, Rng& rng, OctReport& rep) {
    const int r = J.r;
    Complex Gp(G.n(), r);
    for (int i = 1; i < r; ++i) for (const VSet& e : G.level(i)) Gp.add_closed(e);
    VSetSet thin;
    for (const VSet& e : G.level(r))
        if (bernoulli(rng, opt.nu)) {
            Gp.add_closed(e);
            thin.insert(e);
        }
    // H2 = every r-set of O(r) except e_0
    Complex H2(2 * r, r);
    for (int mask = 1; mask < (1 << r); ++mask) {
        VSet e;
        for (int j = 0; j < r; ++j) e.push_back(oct_vertex(j, (mask >> j) & 1));
        H2.add(e);
    }
    EmbCombo Phi1(2 * r);
    auto no_extra = [](const VSet&, const VSet&) { return true; };
    for (auto& [e, c] : J.entries) {
        RootedExtension E = oct_root(r, e);
        E.H2 = H2;
        auto P = make_plan(G, &Gp, E);
        for (long long k = 0; k < (c < 0 ? -c : c); ++k) {
            auto pick = sample_completion(P, no_extra, rng, 200000, 2000);
            if (!pick) { ++rep.cancel_skipped; continue; }
            add_oct(Phi1, oct_from_image(r, *pick), c > 0 ? 1 : -1);
            ++rep.cancel_first;
        }
    }
    EdgeVector J1 = J - oct_boundary(Phi1, r);
    if (J1.zero()) return Phi1;

    auto anchors = sample_anchors(G, r, opt.anchors, rng, &thin);
    if (anchors.empty()) anchors = sample_anchors(G, r, opt.anchors, rng, nullptr);
    std::map<std::vector<int>, long long> num;
    long long k = 0;
    for (const VSet& X : anchors) {
        auto PhiX = finish_any(G, J1, X, opt, rng);
        if (!PhiX) continue;
        ++k;
        for (auto& [t, c] : PhiX->terms) num[t] += c;
    }
    rep.cancel_anchors = static_cast<int>(k);
    EmbCombo Phi2(2 * r);
    if (k > 0)
        for (auto& [t, c] : num) {
            long long a = c < 0 ? -c : c;
            long long m = a / k, rem = a % k;
            long long v = m + (rem && uniform_int(rng, 0, k - 1) < rem ? 1 : 0);
            Phi2.add(t, c < 0 ? -v : v);
        }
    Phi1 += Phi2;
    return Phi1;
}

// Mutable combination with per-edge (+,-) usage and an edge -> terms index.
struct OctState {
    int r;
    EmbCombo Psi;
    VSetMap<std::pair<long long, long long>> use;
    VSetMap<std::set<std::vector<int>>> by_edge;

    void set_coeff(const std::vector<int>& t, long long nc) {
        long long oc = Psi.coeff(t);
        if (oc == nc) return;
        for (auto& [e, sg] : oct_edges(t)) {
            auto& u = use[e];
            long long ov = oc * sg, nv = nc * sg;
            if (ov > 0) u.first -= ov; else u.second += ov;
            if (nv > 0) u.first += nv; else u.second -= nv;
            if (nc == 0) by_edge[e].erase(t); else by_edge[e].insert(t);
        }
        Psi.add(t, nc - oc);
    }
};

// H on [r] x [4] (label 4i + y); O_x maps (i,y) to 4i + 2x_i + y, O'_x to 4i + 2y + x_i.
inline EmbCombo double_octahedron(int r) {
    EmbCombo PhiH(2 * r);
    for (int x = 0; x < (1 << r); ++x) {
        int sg = (__builtin_popcount(x) & 1) ? -1 : 1;
        std::vector<int> o(2 * r), op(2 * r);
        for (int i = 0; i < r; ++i) {
            int xi = (x >> i) & 1;
            for (int y = 0; y < 2; ++y) {
                o[2 * i + y] = 4 * i + 2 * xi + y;
                op[2 * i + y] = 4 * i + 2 * y + xi;
            }
        }
        PhiH.add(o, sg);   // raw labels, mapped before canonicalisation
        PhiH.add(op, -sg);
    }
    return PhiH;
}

inline EmbCombo push_forward(const EmbCombo& PhiH, const std::vector<int>& psi) {
    EmbCombo out(PhiH.k);
    for (auto& [t, c] : PhiH.terms) {
        std::vector<int> g(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) g[k] = psi[t[k]];
        add_oct(out, g, c);
    }
    return out;
}

// φ re-coordinatised so that φ(e_0) = e, coordinates in the order of e's vertices.
inline std::vector<int> focus_on(const std::vector<int>& phi, const VSet& e) {
    const int r = static_cast<int>(phi.size()) / 2;
    std::vector<std::pair<int, int>> coords;
    for (int j = 0; j < r; ++j) {
        int a = phi[2 * j], b = phi[2 * j + 1];
        if (std::binary_search(e.begin(), e.end(), b)) std::swap(a, b);
        coords.push_back({a, b});
    }
    std::sort(coords.begin(), coords.end());
    std::vector<int> out(2 * r);
    for (int j = 0; j < r; ++j) { out[2 * j] = coords[j].first; out[2 * j + 1] = coords[j].second; }
    return out;
}

// Bad-pair elimination via the [r] x [4] double-octahedron gadget. Three copies are glued on
// (φ, φ', 5r fresh vertices); the fresh vertices are found by backtracking so that every gadget
// edge lies in G, and a replacement is kept only if it lowers the bad-edge potential.
struct GadgetShape {
    int r;
    std::vector<std::vector<int>> copy_map;       // three label maps H -> labels
    std::vector<std::vector<std::vector<int>>> checks;  // per free label (in order): label sets to test
};

inline GadgetShape gadget_shape(int r, const EmbCombo& PhiH) {
    GadgetShape g{r, std::vector<std::vector<int>>(3, std::vector<int>(4 * r)), {}};
    for (int i = 0; i < r; ++i) {
        const int a = 4 * r + i, b = 5 * r + i, c = 6 * r + i, d = 7 * r + i, gg = 8 * r + i;
        int m1[4] = {2 * i, 2 * i + 1, a, b};
        int m2[4] = {2 * r + 2 * i, 2 * r + 2 * i + 1, c, d};
        int m3[4] = {2 * i, a, c, gg};
        for (int y = 0; y < 4; ++y) {
            g.copy_map[0][4 * i + y] = m1[y];
            g.copy_map[1][4 * i + y] = m2[y];
            g.copy_map[2][4 * i + y] = m3[y];
        }
    }
    // free labels are 4r..9r-1, placed in that order
    std::vector<std::set<std::vector<int>>> sets(5 * r);
    for (const auto& cm : g.copy_map)
        for (auto& [t, c] : PhiH.terms) {
            std::vector<int> lab(t.size());
            for (std::size_t k = 0; k < t.size(); ++k) lab[k] = cm[t[k]];
            for (int mask = 0; mask < (1 << r); ++mask) {
                std::vector<int> e(r);
                for (int j = 0; j < r; ++j) e[j] = lab[2 * j + ((mask >> j) & 1)];
                for (int sub = 1; sub < (1 << r); ++sub) {
                    std::vector<int> S;
                    int top = -1;
                    for (int j = 0; j < r; ++j)
                        if ((sub >> j) & 1) { S.push_back(e[j]); top = std::max(top, e[j]); }
                    if (top < 4 * r) continue;
                    std::sort(S.begin(), S.end());
                    S.erase(std::unique(S.begin(), S.end()), S.end());
                    sets[top - 4 * r].insert(S);
                }
            }
        }
    for (auto& st : sets) g.checks.emplace_back(st.begin(), st.end());
    return g;
}

inline void simpliphi_stage(const Complex& G, OctState& S, const OctOptions& opt, Rng& rng, OctReport& rep) {
    const int r = S.r;
    const int n = G.n();
    const EmbCombo PhiH = double_octahedron(r);
    const GadgetShape shape = gadget_shape(r, PhiH);
    auto inB = [&](const VSet& e) { return opt.B.count(e) != 0; };
    auto bad = [&](const VSet& e) {
        auto it = S.use.find(e);
        if (it == S.use.end()) return false;
        return is_bad(it->second.first, it->second.second, inB(e), opt.N);
    };
    auto budget_left = [&] { return rep.replacements < opt.replace_cap && rep.attempts < opt.attempt_cap; };

    // Builds D for a full labelling and applies it if acceptable.
    auto try_apply = [&](const VSet& e, const std::vector<int>& val, const std::vector<int>& phi, const std::vector<int>& phip,
                         int sigma, int sigmap) -> bool {
        std::vector<EmbCombo> C;
        for (const auto& cm : shape.copy_map) {
            std::vector<int> psi(4 * r);
            for (int k = 0; k < 4 * r; ++k) psi[k] = val[cm[k]];
            C.push_back(push_forward(PhiH, psi));
        }
        const long long s1 = -sigma * C[0].coeff(phi);
        const long long s2 = -sigmap * C[1].coeff(phip);
        if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1))
            throw DesignError("internal: double octahedron does not contain the bad pair");
        std::optional<EmbCombo> D;
        for (int s3 : {1, -1}) {
            EmbCombo cand = C[0].scaled(s1);
            cand += C[1].scaled(s2);
            cand += C[2].scaled(s3);
            EmbCombo full = cand;
            full.add(phi, sigma);
            full.add(phip, sigmap);
            bool uses_e = false;
            for (auto& [t, c] : full.terms)
                for (auto& [f, sg] : oct_edges(t)) if (f == e) uses_e = true;
            if (!uses_e) { D = cand; break; }
        }
        if (!D) throw DesignError("internal: no sign clears the bad edge");
        if (!oct_boundary(*D, r).zero()) throw DesignError("internal: replacement changes the boundary");
        VSetMap<std::pair<long long, long long>> after;
        for (auto& [t, d] : D->terms) {
            long long oc = S.Psi.coeff(t), nc = oc + d;
            for (auto& [f, sg] : oct_edges(t)) {
                auto it = after.find(f);
                if (it == after.end()) {
                    auto u = S.use.find(f);
                    it = after.emplace(f, u == S.use.end() ? std::make_pair(0LL, 0LL) : u->second).first;
                }
                long long ov = oc * sg, nv = nc * sg;
                if (ov > 0) it->second.first -= ov; else it->second.second += ov;
                if (nv > 0) it->second.first += nv; else it->second.second -= nv;
            }
        }
        for (auto& [f, na] : after) {
            auto u = S.use.find(f);
            auto before = u == S.use.end() ? std::make_pair(0LL, 0LL) : u->second;
            bool bb = is_bad(before.first, before.second, inB(f), opt.N);
            bool ba = is_bad(na.first, na.second, inB(f), opt.N);
            if (!bb && ba) return false;
            if (bb && ba && std::min(na.first, na.second) > std::min(before.first, before.second)) return false;
        }
        for (auto& [t, d] : D->terms) S.set_coeff(t, S.Psi.coeff(t) + d);
        ++rep.replacements;
        return true;
    };

    bool progress = true;
    while (progress && budget_left()) {
        progress = false;
        std::vector<VSet> bads;
        for (auto& [e, u] : S.use)
            if (is_bad(u.first, u.second, inB(e), opt.N)) bads.push_back(e);
        std::sort(bads.begin(), bads.end());
        for (const VSet& e : bads) {
            while (bad(e) && budget_left()) {
                std::vector<std::vector<int>> pos, neg;
                for (const auto& t : S.by_edge[e]) {
                    long long c = S.Psi.coeff(t);
                    int sg = 0;
                    for (auto& [f, s2] : oct_edges(t)) if (f == e) sg = s2;
                    (c * sg > 0 ? pos : neg).push_back(t);
                }
                bool done = false;
                for (std::size_t a = 0; a < pos.size() && a < 3 && !done; ++a)
                    for (std::size_t b = 0; b < neg.size() && b < 3 && !done; ++b) {
                        const auto phi = pos[a];
                        const auto phip = neg[b];
                        const int sigma = S.Psi.coeff(phi) > 0 ? 1 : -1;
                        const int sigmap = S.Psi.coeff(phip) > 0 ? 1 : -1;
                        std::vector<int> ft = focus_on(phi, e), fpt = focus_on(phip, e);
                        std::vector<char> used(n, 0);
                        for (int v : phi) used[v] = 1;
                        for (int v : phip) used[v] = 1;
                        std::vector<int> val(9 * r, -1);
                        for (int k = 0; k < 2 * r; ++k) { val[k] = ft[k]; val[2 * r + k] = fpt[k]; }
                        std::vector<int> cand;
                        for (int v = 0; v < n; ++v) if (!used[v] && G.contains({v})) cand.push_back(v);
                        if (static_cast<int>(cand.size()) < 5 * r) { rep.simpliphi_feasible = false; continue; }
                        shuffle_vec(cand, rng);
                        long long nodes = 0;
                        std::function<bool(int)> place = [&](int k) -> bool {
                            if (k == 5 * r) return try_apply(e, val, phi, phip, sigma, sigmap);
                            for (int v : cand) {
                                if (used[v]) continue;
                                if (++nodes > opt.replace_tries || !budget_left()) return false;
                                ++rep.attempts;
                                val[4 * r + k] = v;
                                bool ok = true;
                                for (const auto& lab : shape.checks[k]) {
                                    VSet im(lab.size());
                                    for (std::size_t z = 0; z < lab.size(); ++z) im[z] = val[lab[z]];
                                    std::sort(im.begin(), im.end());
                                    if (!G.contains(im)) { ok = false; break; }
                                }
                                if (!ok) continue;
                                used[v] = 1;
                                bool got = place(k + 1);
                                used[v] = 0;
                                if (got) return true;
                            }
                            val[4 * r + k] = -1;
                            return false;
                        };
                        done = place(0);
                    }
                if (!done) break;
                progress = true;
            }
        }
    }
    rep.bad_left = 0;
    for (auto& [e, u] : S.use)
        if (is_bad(u.first, u.second, inB(e), opt.N)) ++rep.bad_left;
}
}  // namespace detail

inline bool is_n_simple(const BoundaryParts& bp, long long N) { return bp.plus.max_abs() <= N && bp.minus.max_abs() <= N; }

inline bool is_avoiding(const BoundaryParts& bp, const VSetSet& B) {
    for (auto& [e, c] : bp.plus.entries)
        if (B.count(e) && bp.minus.get(e) != 0) return false;
    return true;
}

// Φ over O(r) in G with ∂Φ = J: simplify, cancel, finish on an anchor, then bad-pair elimination.
inline OctResult oct_decompose(const Complex& G, const EdgeVector& J, const OctOptions& opt, std::uint64_t seed) {
    const int r = J.r;
    if (r < 1 || r > G.q()) throw DesignError("oct_decompose level out of range");
    if (opt.N < 1) throw DesignError("oct_decompose needs N >= 1");
    auto nr = check_null(J, r - 1);
    if (!nr.ok) throw DesignError("oct_decompose input is not null at " + set_str(nr.witness));
    for (auto& [e, c] : J.entries)
        if (!G.contains(e)) throw DesignError("oct_decompose input leaves the host at " + set_str(e));
    OctResult out{EmbCombo(2 * r), {}};
    OctReport& rep = out.report;
    Rng rng(seed);
    EdgeVector R = J;
    if (!R.zero()) {
        if (opt.simplify && R.max_abs() > opt.N) {
            out.Phi += detail::simplify_stage(G, R, opt.N, rng, rep);
            R = J - oct_boundary(out.Phi, r);
        }
        auto deg_hi = [&](const EdgeVector& V) {
            return std::max(check_bounded(V.positive(), 1.0, G.n()).max_degree, check_bounded(V.negative(), 1.0, G.n()).max_degree);
        };
        if (opt.cancel && !R.zero() && static_cast<double>(deg_hi(R)) > opt.cancel_theta * G.n()) {
            out.Phi += detail::cancel_stage(G, R, opt, rng, rep);
            R = J - oct_boundary(out.Phi, r);
        }
        if (!R.zero()) {
            auto anchors = detail::lex_anchors(G, r, static_cast<std::size_t>(opt.finish_anchor_cap));
            if (anchors.empty()) throw DesignError("no anchor: no 2r-set with complete r-level in the host");
            bool ok = false;
            for (const VSet& X : anchors) {
                ++rep.finish_attempts;
                bool elim = false;
                auto PhiX = detail::finish_any(G, R, X, opt, rng, &elim);
                if (!PhiX) continue;
                rep.finish_anchor = X;
                rep.finish_method = elim ? "elimination" : "anchor";
                auto bp = oct_boundary_parts(*PhiX, r);
                rep.finish_profile.assign(r, 0);
                for (const EdgeVector* V : {&bp.plus, &bp.minus}) {
                    VSetMap<long long> deg;
                    for (auto& [e, c] : V->entries) for_each_subset(e, r - 1, [&](const VSet& f) { deg[f] += c; });
                    for (auto& [f, d] : deg) {
                        int k = static_cast<int>(set_intersection(f, X).size());
                        rep.finish_profile[k] = std::max(rep.finish_profile[k], d);
                    }
                }
                out.Phi += *PhiX;
                ok = true;
                break;
            }
            if (!ok) throw DesignError("finish stage failed on every anchor tried");
        }
    }
    if (!(oct_boundary(out.Phi, r) == J)) throw DesignError("internal: octahedral decomposition is not exact");

    auto bp = oct_boundary_parts(out.Phi, r);
    if (opt.simpliphi && (!is_n_simple(bp, opt.N) || !is_avoiding(bp, opt.B))) {
        detail::OctState S{r, EmbCombo(2 * r), {}, {}};
        for (auto& [t, c] : out.Phi.terms) S.set_coeff(t, c);
        detail::simpliphi_stage(G, S, opt, rng, rep);
        out.Phi = S.Psi;
        bp = oct_boundary_parts(out.Phi, r);
        if (!(bp.total == J)) throw DesignError("internal: bad-pair elimination broke exactness");
    }
    rep.exact = true;
    rep.simple = is_n_simple(bp, opt.N);
    rep.avoiding = is_avoiding(bp, opt.B);
    rep.mass = out.Phi.mass();
    auto bplus = check_bounded(bp.plus, 1.0, G.n());
    auto bminus = check_bounded(bp.minus, 1.0, G.n());
    rep.theta_prime = static_cast<double>(std::max(bplus.max_degree, bminus.max_degree)) / G.n();
    rep.within_target = opt.target_theta <= 0 || rep.theta_prime < opt.target_theta;
    return out;
}

// EmbCombo text form: "<coeff> : v1 ... vk", lexicographic by tuple.
inline void write_combo(std::ostream& os, const EmbCombo& Phi) {
    for (auto& [t, c] : Phi.terms) {
        os << c << " :";
        for (int v : t) os << ' ' << v;
        os << "\n";
    }
}

inline EmbCombo read_combo(std::istream& is, int k) {
    EmbCombo Phi(k);
    std::string line;
    while (std::getline(is, line)) {
        std::string s = detail::strip_comment(line);
        if (s.empty()) continue;
        auto colon = s.find(':');
        if (colon == std::string::npos) throw DesignError("combo line lacks ':'");
        long long c = detail::parse_int(detail::strip_comment(s.substr(0, colon)));
        std::istringstream ls(s.substr(colon + 1));
        std::vector<int> t;
        for (std::string tok; ls >> tok;) t.push_back(static_cast<int>(detail::parse_int(tok)));
        Phi.add(t, c);
    }
    return Phi;
}

}  // namespace designforge
