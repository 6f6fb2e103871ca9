// Suspension, the (q,r)-move gadgets, the shuffle gadget and the staged integral design.
#pragma once

#include "designforge/gf.hpp"
#include "designforge/nulldesign.hpp"

namespace designforge {

// ---- suspension -----------------------------------------------------------------------

// SH: two new vertices x+ = |V(H)|, x- = |V(H)|+1; s(e+) = s(e), s(e-) = -s(e).
inline SignedPattern suspend(const SignedPattern& P) {
    const int n = P.H.n();
    SignedPattern S{Complex(n + 2, P.H.q() + 1), {}};
    for (int i = 0; i <= P.H.q(); ++i)
        for (const VSet& e : P.H.level(i)) {
            S.H.add(e);
            VSet a = e, b = e;
            a.push_back(n);
            b.push_back(n + 1);
            S.H.add(a);
            S.H.add(b);
        }
    for (auto& [e, sg] : P.sign) {
        VSet a = e, b = e;
        a.push_back(n);
        b.push_back(n + 1);
        S.sign[a] = sg;
        S.sign[b] = -sg;
    }
    return S;
}

// SΦ over SH into SG, where G has host_n vertices: x+ -> host_n, x- -> host_n + 1.
inline EmbCombo suspend(const EmbCombo& Phi, int host_n) {
    EmbCombo out(Phi.k + 2);
    for (auto& [t, c] : Phi.terms) {
        auto u = t;
        u.push_back(host_n);
        u.push_back(host_n + 1);
        out.add(u, c);
    }
    return out;
}

// SJ: e -> J(e) (e ∪ {n} - e ∪ {n+1}).
inline EdgeVector suspend(const EdgeVector& J, int host_n) {
    EdgeVector out(J.r + 1);
    for (auto& [e, c] : J.entries) {
        VSet a = e, b = e;
        a.push_back(host_n);
        b.push_back(host_n + 1);
        out.add(a, c);
        out.add(b, -c);
    }
    return out;
}

inline Complex suspend(const Complex& G) {
    const int n = G.n();
    Complex S(n + 2, G.q() + 1);
    for (int i = 0; i <= G.q(); ++i)
        for (const VSet& e : G.level(i)) {
            S.add_closed(e);
        }
    for (int i = 0; i <= G.q(); ++i)
        for (const VSet& e : G.level(i)) {
            VSet a = e, b = e;
            a.push_back(n);
            b.push_back(n + 1);
            S.add_closed(a);
            S.add_closed(b);
        }
    return S;
}

// ---- clique boundaries ----------------------------------------------------------------

// ∂_{K^r_q} of a combination of q-tuples, split by sign.
inline BoundaryParts clique_boundary_parts(const EmbCombo& Phi, int r) {
    BoundaryParts out{EdgeVector(r), EdgeVector(r), EdgeVector(r)};
    std::map<VSet, long long> tot, pl, mi;
    for (auto& [t, c] : Phi.terms) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        for_each_subset(s, r, [&](const VSet& e) {
            tot[e] += c;
            if (c > 0) pl[e] += c; else mi[e] -= c;
        });
    }
    for (auto& [e, c] : tot) if (c) out.total.entries.emplace(e, c);
    out.plus.entries = std::move(pl);
    out.minus.entries = std::move(mi);
    return out;
}

inline EdgeVector clique_boundary(const EmbCombo& Phi, int r) { return clique_boundary_parts(Phi, r).total; }

inline bool is_simple_wrt_clique(const EmbCombo& Phi, int r) {
    auto bp = clique_boundary_parts(Phi, r);
    return bp.plus.max_abs() <= 1 && bp.minus.max_abs() <= 1;
}

// ---- gadgets --------------------------------------------------------------------------

struct Gadget {
    std::string name;
    int q = 0, r = 0;
    Complex complex;
    EmbCombo combo;
    // Move gadgets: root_face[2j+x] carries O(r) vertex (j,x). Shuffle gadget: the tuple f^0.
    std::vector<int> root_face;
};

// O(r)_r placed on the root face.
inline EdgeVector root_octahedron(const Gadget& g) {
    EmbCombo o(2 * g.r);
    o.add(g.root_face, 1);
    return oct_boundary(o, g.r);
}

inline void assert_move_boundary(const Gadget& g) {
    if (clique_boundary(g.combo, g.r) != root_octahedron(g))
        throw DesignError("gadget " + g.name + " boundary is not O(r)_r on its root face");
}

namespace detail {

inline Complex complex_of_terms(int n, int q, const EmbCombo& Phi) {
    Complex C(n, q);
    for (auto& [t, c] : Phi.terms) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        C.add(s);
    }
    return C;
}

}  // namespace detail

// Unmodified (q,r)-move. Base grid vertex (i,j) (1-based) is (i-1)q + (j-1), ∞ is q².
inline Gadget move_gadget(int q, int r) {
    if (r < 1 || r >= q) throw DesignError("move_gadget needs 1 <= r < q");
    Gadget g;
    g.name = "move(" + std::to_string(q) + "," + std::to_string(r) + ")";
    g.q = q;
    g.r = r;
    if (r == 1) {
        const int inf = q * q;
        auto grid = [q](int i, int j) { return (i - 1) * q + (j - 1); };
        EmbCombo Phi(q);
        for (int j = 1; j <= q; ++j) {
            VSet c;
            for (int i = 1; i <= q; ++i) c.push_back(grid(i, j));
            add_clique(Phi, c, 1);
        }
        for (int i = 2; i <= q; ++i) {
            VSet row;
            for (int j = 1; j <= q; ++j) row.push_back(grid(i, j));
            add_clique(Phi, row, -1);
        }
        VSet r1{inf};
        for (int j = 2; j <= q; ++j) r1.push_back(grid(1, j));
        add_clique(Phi, r1, -1);
        g.combo = Phi;
        g.complex = detail::complex_of_terms(q * q + 1, q, Phi);
        g.root_face = {grid(1, 1), inf};
    } else {
        Gadget b = move_gadget(q - 1, r - 1);
        const int V = b.complex.n();
        g.complex = suspend(b.complex);
        EmbCombo Phi(q);
        for (auto& [t, c] : b.combo.terms) {
            auto p = t, m = t;
            p.push_back(V);
            m.push_back(V + 1);
            add_clique(Phi, p, c);
            add_clique(Phi, m, -c);
        }
        g.combo = Phi;
        g.root_face = b.root_face;
        g.root_face.push_back(V);
        g.root_face.push_back(V + 1);
    }
    assert_move_boundary(g);
    return g;
}

inline int shuffle_vertex(int p, int q, int i, const std::vector<int>& v) {
    int id = 0, pw = 1;
    for (int k = 0; k < q; ++k) { id += v[k] * pw; pw *= p; }
    return i * pw + id;
}

inline long long ipow(long long b, int e) {
    long long x = 1;
    for (int k = 0; k < e; ++k) {
        x *= b;
        if (x > (1LL << 50)) throw DesignError("gadget size overflow");
    }
    return x;
}

// Shuffle gadget over F_p (p prime) with the least generic q x r matrix M.
// f^Q = {x_i^{(MQ)_i}}, g^Q = {x_i^{(MQ)_i + e^i}}, Φ^S = Σ_Q f^Q - g^Q.
inline Gadget shuffle_gadget(int p, int q, int r, long long max_terms = 4000000) {
    if (r < 1 || r > q) throw DesignError("shuffle_gadget needs 1 <= r <= q");
    const long long nQ = ipow(p, r * q);
    if (2 * nQ > max_terms) throw DesignError("shuffle gadget too large");
    Mat M = find_generic_matrix(p, q, r);
    const int pq = static_cast<int>(ipow(p, q));
    Gadget g;
    g.name = "shuffle(" + std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(r) + ")";
    g.q = q;
    g.r = r;
    g.complex = Complex(q * pq, q);
    g.combo = EmbCombo(q);
    std::vector<int> Q(r * q, 0);
    for (long long idx = 0; idx < nQ; ++idx) {
        long long x = idx;
        for (int k = 0; k < r * q; ++k) { Q[k] = static_cast<int>(x % p); x /= p; }
        std::vector<int> f(q), gq(q);
        for (int i = 0; i < q; ++i) {
            std::vector<int> v(q, 0);
            for (int k = 0; k < q; ++k) {
                long long s = 0;
                for (int l = 0; l < r; ++l) s += static_cast<long long>(M[i][l]) * Q[l * q + k];
                v[k] = static_cast<int>(s % p);
            }
            f[i] = shuffle_vertex(p, q, i, v);
            v[i] = (v[i] + 1) % p;
            gq[i] = shuffle_vertex(p, q, i, v);
        }
        if (idx == 0) g.root_face = f;
        g.combo.add(f, 1);
        g.combo.add(gq, -1);
        g.complex.add(f);
        g.complex.add(gq);
    }
    if (!clique_boundary(g.combo, r).zero()) throw DesignError("shuffle gadget boundary is not zero");
    return g;
}

struct ShuffleCheck {
    bool unique_f = false;    // every q-partite r-set in exactly one f^Q
    bool unique_g = false;    // ... and exactly one g^Q
    bool sparse = false;      // every (r+1)-set in at most one edge
    long long partite_rsets = 0;
};

// Exhaustive check of the shuffle covering properties.
inline ShuffleCheck check_shuffle(const Gadget& g, int p) {
    const int q = g.q, r = g.r;
    ShuffleCheck out;
    out.partite_rsets = binom(q, r) * ipow(ipow(p, q), r);
    VSetMap<int> cf, cg, cup;
    bool multi_f = false, multi_g = false, multi_up = false;
    for (auto& [t, c] : g.combo.terms) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        auto& cnt = c > 0 ? cf : cg;
        bool& multi = c > 0 ? multi_f : multi_g;
        for_each_subset(s, r, [&](const VSet& e) { if (++cnt[e] > 1) multi = true; });
        if (r + 1 <= q)
            for_each_subset(s, r + 1, [&](const VSet& e) { if (++cup[e] > 1) multi_up = true; });
    }
    out.unique_f = !multi_f && static_cast<long long>(cf.size()) == out.partite_rsets;
    out.unique_g = !multi_g && static_cast<long long>(cg.size()) == out.partite_rsets;
    out.sparse = !multi_up;
    return out;
}

// Terms of the modified (q,r)-move at p, computed without building it.
inline long long modified_move_terms(int p, int q, int r) {
    if (r == 1) return 2 * q;  // q columns, q rows incl. r'_1
    long long star = 2 * modified_move_terms(p, q - 1, r - 1);
    return star * (2 * ipow(p, r * q) - 1);
}

// Modified (q,r)-move: Φ* = suspension of Φ'_{(q-1)(r-1)}, then one shuffle copy per term e
// of Φ* glued along f^0 -> e, Φ' = Φ* - Σ Φ*(e) φ^e(Φ^S).
inline Gadget modified_move(int p, int q, int r, long long max_terms = 2000000) {
    if (r < 1 || r >= q) throw DesignError("modified_move needs 1 <= r < q");
    if (r == 1) {
        Gadget g = move_gadget(q, 1);
        g.name = "modified(" + std::to_string(p) + "," + std::to_string(q) + ",1)";
        return g;
    }
    if (modified_move_terms(p, q, r) > max_terms) throw DesignError("modified move too large");
    Gadget b = modified_move(p, q - 1, r - 1, max_terms);
    Gadget hs = shuffle_gadget(p, q, r, max_terms);
    const int V = b.complex.n();
    EmbCombo star(q);
    for (auto& [t, c] : b.combo.terms) {
        auto a = t, m = t;
        a.push_back(V);
        m.push_back(V + 1);
        star.add(a, c);
        star.add(m, -c);
    }
    const int hn = hs.complex.n();
    const int fresh = hn - q;
    const int total = V + 2 + static_cast<int>(star.terms.size()) * fresh;
    Gadget g;
    g.name = "modified(" + std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(r) + ")";
    g.q = q;
    g.r = r;
    g.complex = Complex(total, q);
    Complex sb = suspend(b.complex);
    for (int i = 0; i <= sb.q(); ++i)
        for (const VSet& e : sb.level(i)) g.complex.add_closed(e);
    EmbCombo Phi(q);
    std::vector<char> is_root(hn, 0);
    for (int v : hs.root_face) is_root[v] = 1;
    int next = V + 2;
    for (auto& [e, c] : star.terms) {
        std::vector<int> map(hn, -1);
        for (int i = 0; i < q; ++i) map[hs.root_face[i]] = e[i];
        for (int v = 0; v < hn; ++v) if (!is_root[v]) map[v] = next++;
        Phi.add(e, c);
        for (auto& [t, d] : hs.combo.terms) {
            std::vector<int> u(q);
            for (int k = 0; k < q; ++k) u[k] = map[t[k]];
            Phi.add(u, -c * d);
            VSet s = u;
            std::sort(s.begin(), s.end());
            g.complex.add(s);
        }
    }
    // Canonicalise tuples to sets; f^0 copies cancel their Φ* term.
    EmbCombo canon(q);
    for (auto& [t, c] : Phi.terms) add_clique(canon, t, c);
    g.combo = canon;
    g.root_face = b.root_face;
    g.root_face.push_back(V);
    g.root_face.push_back(V + 1);
    assert_move_boundary(g);
    if (!is_simple_wrt_clique(g.combo, r)) throw DesignError("modified move " + g.name + " is not simple");
    return g;
}

// ---- integral designs -----------------------------------------------------------------

struct IntegralOptions {
    std::string move = "auto";              // auto | unmodified | modified
    long long modified_term_cap = 400000;
    long long process_enum_limit = 200000;
    long long hom_node_cap = 200000;        // search nodes per gadget attempt
    int hom_restarts = 50;
    OctOptions oct;
};

struct IntegralStage {
    int level = 0;
    long long psi_terms = 0;
    long long psi_mass = 0;
    bool psi_simple = false;
    std::string gadget;
    std::string placement;   // process | process-noB | homomorphism
    long long gadgets = 0;
};

struct IntegralReport {
    bool exact = false;
    bool simple = false;
    long long stage0 = 0;
    bool stage0_disjoint = true;
    double theta_prime = 0;
    long long mass = 0;
    std::vector<IntegralStage> stages;
};

struct IntegralResult {
    EmbCombo Phi;  // q-sets (sorted tuples)
    IntegralReport report;
};

// K^r_q-divisibility: C(q-i, r-i) | |J(e)| for every i-set e, i < r.
inline std::optional<VSet> divisibility_violation(const EdgeVector& J, int q) {
    const int r = J.r;
    for (int i = 0; i < r; ++i) {
        EdgeVector sh = shadow(J, i);
        const long long d = binom(q - i, r - i);
        if (i == 0 && J.zero()) continue;
        for (auto& [e, c] : sh.entries)
            if (c % d != 0) return e;
    }
    return std::nullopt;
}

namespace detail {

// Maps every gadget vertex so that each term q-set lands on a q-set of G; the root face is
// fixed. Injective on each term only.
inline std::optional<std::vector<int>> embed_gadget_hom(const Complex& G, const Gadget& g, const std::vector<int>& root_img,
                                                        Rng& rng, long long node_cap) {
    const int h = g.complex.n();
    std::vector<VSet> sets;
    for (auto& [t, c] : g.combo.terms) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        sets.push_back(s);
    }
    std::vector<std::vector<int>> of(h);
    for (std::size_t k = 0; k < sets.size(); ++k)
        for (int v : sets[k]) of[v].push_back(static_cast<int>(k));
    std::vector<int> img(h, -1);
    std::vector<char> placed(h, 0);
    for (std::size_t k = 0; k < g.root_face.size(); ++k) {
        img[g.root_face[k]] = root_img[k];
        placed[g.root_face[k]] = 1;
    }
    // Placement order: greedily the vertex sharing most term sets with placed vertices.
    std::vector<int> order;
    {
        std::vector<char> pl = placed;
        std::vector<int> score(h, 0);
        for (int v = 0; v < h; ++v)
            if (pl[v]) for (int k : of[v]) for (int u : sets[k]) if (!pl[u]) ++score[u];
        for (int step = 0; step < h; ++step) {
            int best = -1;
            for (int v = 0; v < h; ++v)
                if (!pl[v] && !of[v].empty() && (best < 0 || score[v] > score[best])) best = v;
            if (best < 0) break;
            pl[best] = 1;
            order.push_back(best);
            for (int k : of[best]) for (int u : sets[k]) if (!pl[u]) ++score[u];
        }
    }
    auto ok_at = [&](int v) {
        for (int k : of[v]) {
            VSet im;
            for (int u : sets[k]) if (placed[u]) im.push_back(img[u]);
            std::sort(im.begin(), im.end());
            if (std::adjacent_find(im.begin(), im.end()) != im.end()) return false;
            if (!G.contains(im)) return false;
        }
        return true;
    };
    long long nodes = 0;
    std::vector<int> cand = iota_vec(G.n());
    std::function<bool(std::size_t)> rec = [&](std::size_t d) -> bool {
        if (d == order.size()) return true;
        const int v = order[d];
        std::vector<int> c = cand;
        shuffle_vec(c, rng);
        for (int x : c) {
            if (++nodes > node_cap) return false;
            img[v] = x;
            placed[v] = 1;
            if (ok_at(v) && rec(d + 1)) return true;
            placed[v] = 0;
            img[v] = -1;
        }
        return false;
    };
    if (!rec(0)) return std::nullopt;
    return img;
}

inline std::optional<std::pair<int, Mat>> least_generic_prime(int q, int r) {
    for (int p = 2; p <= 4 * q + 8; ++p) {
        if (!is_prime(p)) continue;
        if (auto M = find_generic_matrix_opt(p, q, r)) return std::make_pair(p, *M);
    }
    return std::nullopt;
}

}  // namespace detail

// Integral Φ over the q-sets of G with ∂_{K^r_q} Φ = J, staged: random Φ⁰, then for each level
// i the octahedral decomposition of the rescaled shadow of J^{i-1}, each octahedron replaced
// by a (q,i)-move gadget.
inline IntegralResult integral_design(const Complex& G, const EdgeVector& J, int q, std::uint64_t seed,
                                      const IntegralOptions& opt = {}) {
    const int r = J.r;
    if (r < 1 || r >= q) throw DesignError("integral_design needs 1 <= r < q");
    if (q > G.q()) throw DesignError("integral_design needs q-sets in the host");
    for (auto& [e, c] : J.entries) {
        if (c != 1) throw DesignError("integral_design needs a 0/1 vector");
        if (!G.contains(e)) throw DesignError("integral_design input leaves the host at " + set_str(e));
    }
    if (auto bad = divisibility_violation(J, q)) throw DesignError("J is not K^r_q-divisible at " + set_str(*bad));
    IntegralResult out{EmbCombo(q), {}};
    IntegralReport& rep = out.report;
    Rng rng(seed);

    // Stage 0: ⌊|J| / C(q,r)⌋ random q-sets with pairwise disjoint r-shadows where possible.
    const long long want = J.mass() / binom(q, r);
    if (want > 0) {
        std::vector<VSet> qsets(G.level(q).begin(), G.level(q).end());
        if (qsets.empty()) throw DesignError("host has no q-sets");
        VSetSet used;
        long long got = 0, tries = 0;
        const long long cap = 200 * want + 1000;
        while (got < want) {
            const VSet& f = qsets[uniform_int(rng, 0, static_cast<std::int64_t>(qsets.size()) - 1)];
            bool clash = false;
            if (++tries <= cap)
                for_each_subset(f, r, [&](const VSet& e) { if (used.count(e)) clash = true; });
            else
                rep.stage0_disjoint = false;
            if (clash) continue;
            for_each_subset(f, r, [&](const VSet& e) { used.insert(e); });
            add_clique(out.Phi, f, 1);
            ++got;
        }
        rep.stage0 = got;
    }
    EdgeVector Ji = J - clique_boundary(out.Phi, r);

    for (int i = 1; i <= r; ++i) {
        IntegralStage st;
        st.level = i;
        const long long d = binom(q - i, r - i);
        EdgeVector sh = shadow(Ji, i);
        EdgeVector Jp(i);
        for (auto& [e, c] : sh.entries) {
            if (c % d != 0) throw DesignError("stage " + std::to_string(i) + " shadow not divisible at " + set_str(e));
            Jp.add(e, c / d);
        }
        OctOptions oo = opt.oct;
        oo.N = static_cast<int>(std::min<long long>(ipow(G.n(), r - i), 1 << 30));
        auto od = oct_decompose(G, Jp, oo, derive_seed(seed, 100 + i));
        st.psi_terms = static_cast<long long>(od.Phi.terms.size());
        st.psi_mass = od.Phi.mass();
        st.psi_simple = od.report.simple;

        // Gadget for this level.
        Gadget gad;
        bool want_mod = opt.move == "modified" || (opt.move == "auto" && q > r + 1 && i >= 2);
        bool built = false;
        if (want_mod && i >= 2) {
            if (auto pm = detail::least_generic_prime(q, i)) {
                if (modified_move_terms(pm->first, q, i) <= opt.modified_term_cap) {
                    gad = modified_move(pm->first, q, i, opt.modified_term_cap);
                    built = true;
                }
            }
            if (!built && opt.move == "modified")
                throw DesignError("modified move unavailable for q=" + std::to_string(q) + ", i=" + std::to_string(i));
        }
        if (!built) gad = move_gadget(q, i);
        st.gadget = gad.name;

        // One rooted extension per unit of Ψ.
        std::vector<RootedExtension> roots;
        std::vector<int> signs;
        for (auto& [t, c] : od.Phi.terms) {
            const long long m = c < 0 ? -c : c;
            for (long long u = 0; u < m; ++u) {
                roots.push_back(RootedExtension{gad.complex, std::nullopt, gad.root_face, t});
                signs.push_back(c > 0 ? 1 : -1);
            }
        }
        st.gadgets = static_cast<long long>(roots.size());

        auto place = [&](const std::vector<int>& emb, int sg) {
            for (auto& [t, c] : gad.combo.terms) {
                VSet s(t.size());
                for (std::size_t k = 0; k < t.size(); ++k) s[k] = emb[t[k]];
                add_clique(out.Phi, s, sg * c);
            }
        };

        std::vector<std::vector<int>> embs;
        if (!roots.empty() && gad.complex.n() <= G.n()) {
            auto bp = clique_boundary_parts(out.Phi, r);
            VSetSet B;
            for (auto& [e, c] : bp.plus.entries) B.insert(e);
            for (auto& [e, c] : bp.minus.entries) B.insert(e);
            if (i == r)
                for (auto& [e, c] : Ji.entries) B.insert(e);
            ProcessConfig cfg;
            cfg.N = 1;
            cfg.r = r;
            cfg.enum_limit = opt.process_enum_limit;
            cfg.forbidden.push_back(B);
            auto pr = run_extension_process(G, nullptr, roots, cfg, derive_seed(seed, 200 + i));
            st.placement = "process";
            if (pr.aborted) {
                cfg.forbidden.clear();
                pr = run_extension_process(G, nullptr, roots, cfg, derive_seed(seed, 300 + i));
                st.placement = "process-noB";
            }
            if (!pr.aborted) embs = pr.embeddings;
        }
        if (embs.size() != roots.size()) {
            embs.clear();
            st.placement = "homomorphism";
            for (std::size_t u = 0; u < roots.size(); ++u) {
                std::optional<std::vector<int>> e;
                for (int t = 0; t < opt.hom_restarts && !e; ++t)
                    e = detail::embed_gadget_hom(G, gad, roots[u].phi, rng, opt.hom_node_cap);
                if (!e) throw DesignError("gadget placement aborted at level " + std::to_string(i));
                embs.push_back(*e);
            }
        }
        EmbCombo before = out.Phi;
        for (std::size_t u = 0; u < embs.size(); ++u) place(embs[u], signs[u]);
        EmbCombo stage = out.Phi;
        stage -= before;
        Ji -= clique_boundary(stage, r);
        if (!check_null(Ji, i - 1).ok || !shadow(Ji, i).zero())
            throw DesignError("stage " + std::to_string(i) + " left a non-null remainder");
        rep.stages.push_back(st);
    }
    auto bp = clique_boundary_parts(out.Phi, r);
    rep.exact = bp.total == J;
    if (!rep.exact) throw DesignError("integral_design boundary mismatch");
    rep.simple = bp.plus.max_abs() <= 1 && bp.minus.max_abs() <= 1;
    long long deg = std::max(check_bounded(bp.plus, 1.0, G.n()).max_degree, check_bounded(bp.minus, 1.0, G.n()).max_degree);
    rep.theta_prime = G.n() ? static_cast<double>(deg) / G.n() : 0.0;
    rep.mass = out.Phi.mass();
    return out;
}

}  // namespace designforge
