// Auxiliary clique hypergraph, the random nibble and greedy completion.
#pragma once

#include <climits>

#include "designforge/complex.hpp"

namespace designforge {

// Vertices are the r-sets of a host level; each edge is the set of r-subsets of one q-clique.
struct AuxHypergraph {
    int q = 0, r = 0;
    int arity = 0;                  // C(q,r)
    std::vector<VSet> vertices;
    std::vector<int> edge_verts;    // arity entries per edge, ascending vertex ids

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_edges() const { return arity ? edge_verts.size() / arity : 0; }
    const int* edge(std::size_t i) const { return edge_verts.data() + i * arity; }

    // The q-clique behind an edge.
    VSet clique(std::size_t i) const {
        VSet out;
        for (int k = 0; k < arity; ++k) {
            const VSet& e = vertices[edge(i)[k]];
            out.insert(out.end(), e.begin(), e.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

inline void push_edge(AuxHypergraph& A, std::vector<int>& ids) {
    std::sort(ids.begin(), ids.end());
    A.edge_verts.insert(A.edge_verts.end(), ids.begin(), ids.end());
}

// Colex rank of a sorted set.
inline long long colex_rank(const VSet& s) {
    long long rk = 0;
    for (std::size_t k = 0; k < s.size(); ++k) rk += binom(s[k], static_cast<std::int64_t>(k) + 1);
    return rk;
}

}  // namespace detail

inline AuxHypergraph aux_hypergraph(const Complex& G, int q, int r) {
    if (r < 1 || r > q || q > G.q()) throw DesignError("aux_hypergraph needs 1 <= r <= q <= top level");
    AuxHypergraph A;
    A.q = q;
    A.r = r;
    A.arity = static_cast<int>(binom(q, r));
    VSetMap<int> id;
    for (const VSet& e : G.level(r)) {
        id.emplace(e, static_cast<int>(A.vertices.size()));
        A.vertices.push_back(e);
    }
    std::vector<int> ids;
    for (const VSet& Q : G.level(q)) {
        ids.clear();
        bool ok = true;
        for_each_subset(Q, r, [&](const VSet& e) {
            auto it = id.find(e);
            if (it == id.end()) ok = false; else ids.push_back(it->second);
        });
        if (ok) detail::push_edge(A, ids);
    }
    return A;
}

// A for the complete complex K_n^{(q)} without materialising it; vertices in colex order.
inline AuxHypergraph aux_hypergraph_complete(int n, int q, int r) {
    if (r < 1 || r > q || q > n) throw DesignError("aux_hypergraph needs 1 <= r <= q <= n");
    AuxHypergraph A;
    A.q = q;
    A.r = r;
    A.arity = static_cast<int>(binom(q, r));
    const long long nv = binom(n, r);
    A.vertices.assign(static_cast<std::size_t>(nv), VSet{});
    for_each_subset(iota_vec(n), r, [&](const VSet& e) { A.vertices[detail::colex_rank(e)] = e; });
    A.edge_verts.reserve(static_cast<std::size_t>(binom(n, q) * A.arity));
    std::vector<int> ids;
    for_each_subset(iota_vec(n), q, [&](const VSet& Q) {
        ids.clear();
        for_each_subset(Q, r, [&](const VSet& e) { ids.push_back(static_cast<int>(detail::colex_rank(e))); });
        detail::push_edge(A, ids);
    });
    return A;
}

struct NibbleOptions {
    double bite = 0.01;
    int max_bites = 200;
    bool final_greedy = true;
};

struct BiteStats {
    int bite = 0;
    long long surviving_vertices = 0;
    long long surviving_edges = 0;
    double mean_degree = 0;
    long long activated = 0;
    long long accepted = 0;
};

struct NibbleResult {
    std::vector<std::size_t> matching;   // edge ids
    std::vector<VSet> blocks;            // the matched q-cliques
    std::vector<VSet> leftover;          // uncovered r-sets
    long long leftover_max_degree = 0;   // max (r-1)-degree of the leftover
    std::vector<BiteStats> bites;
    long long greedy_added = 0;
};

inline bool matching_disjoint(const AuxHypergraph& A, const std::vector<std::size_t>& M) {
    std::vector<char> used(A.num_vertices(), 0);
    for (std::size_t e : M)
        for (int k = 0; k < A.arity; ++k) {
            const int v = A.edge(e)[k];
            if (used[v]) return false;
            used[v] = 1;
        }
    return true;
}

// Nibble: each bite activates every surviving edge with probability bite / mean degree, keeps the
// activated edges that meet no other activated edge, and drops edges touching covered vertices.
inline NibbleResult nibble_cover(const AuxHypergraph& A, std::uint64_t seed, const NibbleOptions& opt = {}) {
    if (A.num_vertices() == 0) throw DesignError("nibble needs a nonempty hypergraph");
    if (!(opt.bite > 0)) throw DesignError("bite must be positive");
    NibbleResult res;
    const int k = A.arity;
    std::vector<char> covered(A.num_vertices(), 0);
    std::vector<std::uint32_t> alive;
    alive.reserve(A.num_edges());
    for (std::size_t e = 0; e < A.num_edges(); ++e) alive.push_back(static_cast<std::uint32_t>(e));
    long long free_vertices = static_cast<long long>(A.num_vertices());
    std::vector<int> hits(A.num_vertices(), 0);
    std::vector<std::uint32_t> act;
    for (int b = 1; b <= opt.max_bites && !alive.empty(); ++b) {
        const double mean_deg = static_cast<double>(alive.size()) * k / static_cast<double>(free_vertices);
        if (mean_deg < 1.0 / opt.bite) break;
        const double prob = opt.bite / mean_deg;
        const auto thresh = static_cast<std::uint64_t>(prob * 18446744073709551615.0);
        const std::uint64_t bseed = derive_seed(seed, static_cast<std::uint64_t>(b));
        act.clear();
        for (std::uint32_t e : alive)
            if (mix64(bseed ^ (static_cast<std::uint64_t>(e) * 0x9e3779b97f4a7c15ULL)) < thresh) act.push_back(e);
        for (std::uint32_t e : act)
            for (int j = 0; j < k; ++j) ++hits[A.edge(e)[j]];
        BiteStats st;
        st.bite = b;
        st.mean_degree = mean_deg;
        st.activated = static_cast<long long>(act.size());
        for (std::uint32_t e : act) {
            bool alone = true;
            for (int j = 0; j < k; ++j) if (hits[A.edge(e)[j]] != 1) alone = false;
            if (!alone) continue;
            res.matching.push_back(e);
            ++st.accepted;
        }
        for (std::uint32_t e : act)
            for (int j = 0; j < k; ++j) hits[A.edge(e)[j]] = 0;
        for (std::size_t m = res.matching.size() - static_cast<std::size_t>(st.accepted); m < res.matching.size(); ++m)
            for (int j = 0; j < k; ++j) covered[A.edge(res.matching[m])[j]] = 1;
        free_vertices -= st.accepted * k;
        std::size_t w = 0;
        for (std::uint32_t e : alive) {
            bool ok = true;
            for (int j = 0; j < k; ++j) if (covered[A.edge(e)[j]]) { ok = false; break; }
            if (ok) alive[w++] = e;
        }
        alive.resize(w);
        st.surviving_vertices = free_vertices;
        st.surviving_edges = static_cast<long long>(alive.size());
        res.bites.push_back(st);
    }
    if (opt.final_greedy) {
        Rng rng(derive_seed(seed, 0xf1a1));
        shuffle_vec(alive, rng);
        for (std::uint32_t e : alive) {
            bool ok = true;
            for (int j = 0; j < k; ++j) if (covered[A.edge(e)[j]]) { ok = false; break; }
            if (!ok) continue;
            for (int j = 0; j < k; ++j) covered[A.edge(e)[j]] = 1;
            res.matching.push_back(e);
            ++res.greedy_added;
        }
    }
    if (!matching_disjoint(A, res.matching)) throw DesignError("nibble produced an overlapping matching");
    for (std::size_t e : res.matching) res.blocks.push_back(A.clique(e));
    for (std::size_t v = 0; v < A.num_vertices(); ++v)
        if (!covered[v]) res.leftover.push_back(A.vertices[v]);
    std::map<VSet, long long> deg;
    for (const VSet& e : res.leftover)
        for_each_subset(e, A.r - 1, [&](const VSet& f) {
            res.leftover_max_degree = std::max(res.leftover_max_degree, ++deg[f]);
        });
    return res;
}

// ---- greedy completion -----------------------------------------------------------------

struct GreedyPolicy {
    int lambda = 1;
    long long fullness_cap = LLONG_MAX;  // added blocks allowed through any (r-1)-set
    int retries = 20;
    long long candidate_limit = 5000;    // q-sets collected per uncovered r-set
};

struct GreedyResult {
    std::vector<VSet> blocks;      // partial blocks followed by the additions
    long long added = 0;
    EdgeVector uncovered;          // remaining deficit per r-set
    int best_round = 0;
};

namespace detail {

// q-sets of G containing e whose r-subsets all pass ok(); at most limit of them.
template <class Ok>
std::vector<VSet> cliques_through(const Complex& G, const VSet& e, int q, int r, long long limit, Ok&& ok) {
    std::vector<VSet> out;
    std::vector<int> cur = e;
    std::function<void(int)> rec = [&](int from) {
        if (static_cast<long long>(out.size()) >= limit) return;
        if (static_cast<int>(cur.size()) == q) {
            VSet s = cur;
            std::sort(s.begin(), s.end());
            bool good = true;
            for_each_subset(s, r, [&](const VSet& f) { if (good && !ok(f)) good = false; });
            if (good) out.push_back(s);
            return;
        }
        for (int v = from; v < G.n(); ++v) {
            if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
            cur.push_back(v);
            VSet s = cur;
            std::sort(s.begin(), s.end());
            if (G.contains(s)) rec(v + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

}  // namespace detail

// Randomized greedy: visit deficient r-sets in random order and add a random admissible q-set
// through each; keep the best of several rounds.
inline GreedyResult greedy_complete(const Complex& G, int q, int r, const std::vector<VSet>& partial,
                                    const GreedyPolicy& pol, std::uint64_t seed) {
    if (r < 1 || r >= q || q > G.q()) throw DesignError("greedy_complete needs 1 <= r < q <= top level");
    std::map<VSet, long long> base_cov;
    for (const VSet& b : partial) {
        if (static_cast<int>(b.size()) != q || !G.contains(b)) throw DesignError("partial block is not a q-set of G");
        for_each_subset(b, r, [&](const VSet& e) {
            if (++base_cov[e] > pol.lambda) throw DesignError("partial blocks exceed the coverage at " + set_str(e));
        });
    }
    std::vector<VSet> rsets(G.level(r).begin(), G.level(r).end());
    GreedyResult best;
    long long best_deficit = LLONG_MAX;
    const int rounds = std::max(1, pol.retries);
    for (int round = 0; round < rounds; ++round) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(round)));
        auto cov = base_cov;
        std::map<VSet, long long> full;
        std::vector<VSet> added;
        auto ok = [&](const VSet& f) {
            auto it = cov.find(f);
            return it == cov.end() || it->second < pol.lambda;
        };
        auto room = [&](const VSet& b) {
            bool good = true;
            for_each_subset(b, r - 1, [&](const VSet& f) {
                auto it = full.find(f);
                if (it != full.end() && it->second >= pol.fullness_cap) good = false;
            });
            return good && pol.fullness_cap > 0;
        };
        std::vector<VSet> order = rsets;
        shuffle_vec(order, rng);
        for (const VSet& e : order) {
            while (ok(e)) {
                auto cands = detail::cliques_through(G, e, q, r, pol.candidate_limit, ok);
                std::vector<VSet> usable;
                for (auto& c : cands) if (room(c)) usable.push_back(c);
                if (usable.empty()) break;
                const VSet& b = usable[uniform_int(rng, 0, static_cast<std::int64_t>(usable.size()) - 1)];
                for_each_subset(b, r, [&](const VSet& f) { ++cov[f]; });
                for_each_subset(b, r - 1, [&](const VSet& f) { ++full[f]; });
                added.push_back(b);
            }
        }
        long long deficit = 0;
        EdgeVector un(r);
        for (const VSet& e : rsets) {
            auto it = cov.find(e);
            const long long c = it == cov.end() ? 0 : it->second;
            if (c < pol.lambda) {
                un.add(e, pol.lambda - c);
                deficit += pol.lambda - c;
            }
        }
        if (deficit < best_deficit) {
            best_deficit = deficit;
            best.blocks = partial;
            best.blocks.insert(best.blocks.end(), added.begin(), added.end());
            best.added = static_cast<long long>(added.size());
            best.uncovered = un;
            best.best_round = round;
        }
        if (deficit == 0) break;
    }
    return best;
}

}  // namespace designforge
