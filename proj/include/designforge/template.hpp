// The algebraic M-template over F_{p^a}, its resolver, M-properties and cascades.
#pragma once

#include "designforge/moves.hpp"

namespace designforge {

struct TemplateOptions {
    bool random_sigma = false;
    long long eager_limit = 10000000;  // enumerate D when p^{ar} is at most this
};

struct Template {
    FieldPtr F;
    Mat M;
    int q = 0, r = 0;
    std::shared_ptr<const Complex> G;  // null: the complete q-complex on the field
    std::uint64_t seed = 0;
    std::vector<int> sigma, sigma_inv;
    std::map<VSet, std::vector<int>> pi_override;  // e -> positions of e's elements
    bool eager = false;
    std::map<VSet, VSet> block_of;  // covered r-set -> its block
    std::set<VSet> blocks;

    int n() const { return F->size(); }
    bool in_host(const VSet& s) const { return G ? G->contains(s) : true; }
    long long host_level_size(int i) const { return G ? static_cast<long long>(G->level_size(i)) : binom(n(), i); }

    // π_e as positions in [q] of the sorted elements of e.
    std::vector<int> pi(const VSet& e) const {
        auto it = pi_override.find(e);
        if (it != pi_override.end()) return it->second;
        // Fisher-Yates driven by a splitmix stream keyed on (seed, e).
        std::uint64_t h = keyed_hash(seed, e);
        std::vector<int> perm = iota_vec(q);
        for (int i = q; i > 1; --i) {
            h = mix64(h + 0x9e3779b97f4a7c15ULL);
            std::swap(perm[i - 1], perm[h % static_cast<std::uint64_t>(i)]);
        }
        perm.resize(e.size());
        return perm;
    }

    std::size_t covered_count() const {
        if (!eager) throw DesignError("covered set is only materialised for eager templates");
        return block_of.size();
    }
};

namespace detail {

// dim over F_p of the span of y; direct for r <= 2.
inline int span_dim(const Field& F, const std::vector<int>& y) {
    if (y.size() == 1) return y[0] != 0;
    if (y.size() == 2) {
        if (!y[0] || !y[1]) return (y[0] != 0) + (y[1] != 0);
        for (int c = 1; c < F.p(); ++c)
            if (F.mul(c, y[0]) == y[1]) return 1;
        return 2;
    }
    return field_dim(F, y);
}

inline int dot_prime(const Field& F, const std::vector<int>& row, const std::vector<int>& y) {
    int s = 0;
    for (std::size_t l = 0; l < row.size(); ++l) s = F.add(s, F.mul(row[l], y[l]));
    return s;
}

// φ(i) = σ(e^i M y) when it is a block of D, else empty.
inline std::optional<VSet> block_from_y(const Template& T, const std::vector<int>& y) {
    const Field& F = *T.F;
    if (span_dim(F, y) != T.r) return std::nullopt;
    std::vector<int> phi(T.q);
    for (int i = 0; i < T.q; ++i) phi[i] = T.sigma[dot_prime(F, T.M[i], y)];
    VSet s = phi;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) return std::nullopt;
    if (!T.in_host(s)) return std::nullopt;
    bool ok = true;
    for_each_subset(iota_vec(T.q), T.r, [&](const VSet& pos) {
        if (!ok) return;
        std::vector<std::pair<int, int>> ev;
        for (int i : pos) ev.emplace_back(phi[i], i);
        std::sort(ev.begin(), ev.end());
        VSet e;
        for (auto& [x, i] : ev) e.push_back(x);
        auto pe = T.pi(e);
        for (std::size_t k = 0; k < ev.size(); ++k)
            if (pe[k] != ev[k].second) { ok = false; return; }
    });
    if (!ok) return std::nullopt;
    return s;
}

inline void enumerate_blocks(Template& T) {
    const Field& F = *T.F;
    T.block_of.clear();
    T.blocks.clear();
    const long long total = ipow(T.n(), T.r);
    std::vector<int> y(T.r, 0);
    for (long long idx = 0; idx < total; ++idx) {
        long long u = idx;
        for (int l = 0; l < T.r; ++l) { y[l] = static_cast<int>(u % F.size()); u /= F.size(); }
        auto b = block_from_y(T, y);
        if (!b) continue;
        if (!T.blocks.insert(*b).second) throw DesignError("template block produced twice");
        for_each_subset(*b, T.r, [&](const VSet& e) {
            if (!T.block_of.emplace(e, *b).second) throw DesignError("template blocks overlap at " + set_str(e));
        });
    }
}

}  // namespace detail

// Block through e from π_e and σ alone: y(e) = (e^I M)^{-1} σ^{-1}(v(e)).
inline std::optional<VSet> template_formula_resolve(const Template& T, const VSet& e) {
    if (static_cast<int>(e.size()) != T.r || !T.in_host(e)) return std::nullopt;
    const Field& F = *T.F;
    Field Fp(F.p(), 1);
    auto pe = T.pi(e);
    std::vector<std::pair<int, int>> iv;
    for (int k = 0; k < T.r; ++k) iv.emplace_back(pe[k], T.sigma_inv[e[k]]);
    std::sort(iv.begin(), iv.end());
    VSet I;
    std::vector<int> w;
    for (auto& [i, x] : iv) { I.push_back(i); w.push_back(x); }
    Mat EIM;
    for (int i : I) EIM.push_back(T.M[i]);
    auto inv = mat_inverse(Fp, EIM);
    if (!inv) return std::nullopt;
    std::vector<int> y(T.r);
    for (int l = 0; l < T.r; ++l) y[l] = detail::dot_prime(F, (*inv)[l], w);
    auto b = detail::block_from_y(T, y);
    if (!b || !is_subset(e, *b)) return std::nullopt;
    return b;
}

inline std::optional<VSet> template_resolve(const Template& T, const VSet& e) {
    if (!T.eager) return template_formula_resolve(T, e);
    auto it = T.block_of.find(e);
    if (it == T.block_of.end()) return std::nullopt;
    return it->second;
}

// Decomposition and dimension invariants; returns a description of the first failure.
inline std::optional<std::string> template_invariant_violation(const Template& T) {
    if (!T.eager) return std::string("invariants are checked on eager templates only");
    std::size_t shadow_total = 0;
    for (const VSet& b : T.blocks) {
        if (static_cast<int>(b.size()) != T.q) return "block of wrong size " + set_str(b);
        if (!T.in_host(b)) return "block outside the host " + set_str(b);
        std::optional<std::string> bad;
        for_each_subset(b, T.r, [&](const VSet& e) {
            ++shadow_total;
            auto it = T.block_of.find(e);
            if (!bad && (it == T.block_of.end() || it->second != b)) bad = "resolver disagrees at " + set_str(e);
        });
        if (bad) return bad;
    }
    if (shadow_total != T.block_of.size()) return std::string("covered set is not the union of block shadows");
    return std::nullopt;
}

// dim(σ^{-1}(e)) = r for all covered e.
inline bool template_dimension_ok(const Template& T) {
    for (auto& [e, b] : T.block_of) {
        std::vector<int> v;
        for (int x : e) v.push_back(T.sigma_inv[x]);
        if (field_dim(*T.F, v) != T.r) return false;
    }
    return true;
}

inline Template build_template(std::shared_ptr<const Complex> G, FieldPtr F, const Mat& M, std::uint64_t seed,
                               const TemplateOptions& opt = {}) {
    if (!F) throw DesignError("template needs a field");
    if (G && G->n() != F->size()) throw DesignError("template host must have p^a vertices");
    Field Fp(F->p(), 1);
    if (!is_generic(Fp, M)) throw DesignError("template matrix is not generic");
    Template T;
    T.F = F;
    T.M = M;
    T.q = static_cast<int>(M.size());
    T.r = mat_cols(M);
    if (T.r < 1 || T.r >= T.q) throw DesignError("template needs 1 <= r < q");
    if (G && G->q() < T.q) throw DesignError("template host must be a q-complex");
    T.G = std::move(G);
    T.seed = seed;
    T.sigma = iota_vec(T.n());
    if (opt.random_sigma) {
        Rng rng(derive_seed(seed, 0x5167));
        shuffle_vec(T.sigma, rng);
    }
    T.sigma_inv.assign(T.n(), 0);
    for (int x = 0; x < T.n(); ++x) T.sigma_inv[T.sigma[x]] = x;
    long long total = 1;
    T.eager = true;
    for (int l = 0; l < T.r; ++l) {
        total *= T.n();
        if (total > opt.eager_limit) { T.eager = false; break; }
    }
    if (T.eager) {
        detail::enumerate_blocks(T);
        if (auto bad = template_invariant_violation(T)) throw DesignError("template invariant: " + *bad);
        if (!template_dimension_ok(T)) throw DesignError("template dimension invariant fails");
    }
    return T;
}

inline Template build_template(const Complex& G, int p, int a, const Mat& M, std::uint64_t seed,
                               const TemplateOptions& opt = {}) {
    return build_template(std::make_shared<const Complex>(G), make_field(p, a), M, seed, opt);
}

// z_qr = Π_{i=1}^r (q+1-i)^{-1}.
inline double z_qr(int q, int r) {
    double z = 1;
    for (int i = 1; i <= r; ++i) z /= (q + 1 - i);
    return z;
}

// d*_r / d_r(G) on a host with densities d[1..q] (d[0] ignored).
inline double predicted_covered_fraction(int q, int r, const std::vector<double>& d) {
    double f = std::pow(z_qr(q, r), static_cast<double>(binom(q, r) - 1));
    for (int i = 1; i <= r; ++i) f *= std::pow(d.at(i), static_cast<double>(binom(q, i) - binom(r, i)));
    return f;
}

inline double covered_fraction(const Template& T) {
    return static_cast<double>(T.covered_count()) / static_cast<double>(T.host_level_size(T.r));
}

// G(M): levels below r need dim(σ^{-1}(e)) = |e|, level r is the covered set, above r the sets
// of G whose r-subsets are all covered.
inline Complex template_complex(const Template& T) {
    if (!T.G) throw DesignError("template_complex needs an explicit host");
    Complex C(T.n(), T.q);
    for (int i = 1; i < T.r; ++i)
        for (const VSet& e : T.G->level(i)) {
            std::vector<int> v;
            for (int x : e) v.push_back(T.sigma_inv[x]);
            if (field_dim(*T.F, v) == i) C.add_closed(e);
        }
    for (auto& [e, b] : T.block_of) {
        bool ok = true;
        for_each_subset(e, T.r - 1, [&](const VSet& f) { if (!C.contains(f)) ok = false; });
        if (ok) C.add_closed(e);
    }
    for (int i = T.r + 1; i <= T.q; ++i)
        for (const VSet& e : T.G->level(i)) {
            bool ok = true;
            for_each_subset(e, i - 1, [&](const VSet& f) { if (ok && !C.contains(f)) ok = false; });
            if (ok) C.add_closed(e);
        }
    return C;
}

// ---- M-properties ----------------------------------------------------------------------

struct MReport {
    bool M_simple = true;
    VSet witness;              // block meeting J twice
    long long max_line_mass = 0;
    double theta_hat = 0;      // max_line_mass / n
};

// Max over basic lines L(v,d) in F^s of the mass of v(J) on L.
inline long long max_basic_line_mass(const Field& F, const std::vector<VSet>& sets, int s) {
    Field Fp(F.p(), 1);
    std::vector<std::vector<int>> dirs;
    const long long nd = ipow(F.p(), s);
    for (long long idx = 1; idx < nd; ++idx) {
        std::vector<int> d(s);
        long long u = idx;
        for (int k = 0; k < s; ++k) { d[k] = static_cast<int>(u % F.p()); u /= F.p(); }
        int lead = 0;
        while (d[lead] == 0) ++lead;
        if (d[lead] == 1) dirs.push_back(d);  // one representative per projective point
    }
    std::vector<std::vector<int>> vecs;
    for (const VSet& e : sets) {
        std::vector<int> v = e;
        std::sort(v.begin(), v.end());
        do vecs.push_back(v); while (std::next_permutation(v.begin(), v.end()));
    }
    long long best = 0;
    for (auto& d : dirs) {
        int lead = 0;
        while (d[lead] == 0) ++lead;
        std::map<std::vector<int>, long long> cnt;
        for (auto& v : vecs) {
            const int mu = v[lead];  // d[lead] = 1
            std::vector<int> key(s);
            for (int k = 0; k < s; ++k) key[k] = F.sub(v[k], F.mul(mu, d[k]));
            best = std::max(best, ++cnt[key]);
        }
    }
    return best;
}

inline MReport check_M_properties(const Template& T, const std::vector<VSet>& J) {
    MReport rep;
    std::map<VSet, int> hits;
    std::set<VSet> uni;
    for (const VSet& e : J) {
        auto b = template_resolve(T, e);
        if (!b) throw DesignError("check_M_properties: " + set_str(e) + " is not covered");
        if (++hits[*b] > 1 && rep.M_simple) {
            rep.M_simple = false;
            rep.witness = *b;
        }
        for_each_subset(*b, T.r, [&](const VSet& f) { uni.insert(f); });
    }
    rep.max_line_mass = max_basic_line_mass(*T.F, std::vector<VSet>(uni.begin(), uni.end()), T.r);
    rep.theta_hat = static_cast<double>(rep.max_line_mass) / T.n();
    return rep;
}

// ---- cascades --------------------------------------------------------------------------

// Linear extension E^C = (L^C, H^C). Variables: z^{1b}_i at i*p^q + b, then t^Q_j at
// nz1 + Q*r + j. Forms have coefficients in F_p.
struct CascadeExtension {
    int p = 0, q = 0, r = 0;
    Mat M;
    int pq = 0;
    long long nQ = 0;
    int nz1 = 0, nvars = 0;
    int nverts = 0;
    std::vector<std::vector<int>> form;      // per vertex, length nvars
    std::vector<std::vector<int>> x2_id;     // [i][Q*pq + b]
    std::vector<int> f1e;
    std::vector<std::vector<int>> f1Q, g1Q;  // [Q]
    std::vector<std::vector<int>> f2, g2;    // [Q*nQ + Q']
    VSet FC;
    Complex H;

    int x1(int i, int b) const { return i * pq + b; }
    int x2(int i, long long Q, int b) const { return x2_id[i][Q * pq + b]; }
};

namespace detail {

inline std::vector<int> digits_of(long long idx, int p, int len) {
    std::vector<int> v(len);
    for (int k = 0; k < len; ++k) { v[k] = static_cast<int>(idx % p); idx /= p; }
    return v;
}

inline int index_of(const std::vector<int>& v, int p) {
    int id = 0, pw = 1;
    for (int x : v) { id += x * pw; pw *= p; }
    return id;
}

// Row i of M Q for Q given by its r*q digits (row-major r x q).
inline std::vector<int> MQ_row(const Mat& M, const std::vector<int>& Q, int i, int q, int r, int p) {
    std::vector<int> row(q, 0);
    for (int k = 0; k < q; ++k) {
        long long s = 0;
        for (int l = 0; l < r; ++l) s += static_cast<long long>(M[i][l]) * Q[l * q + k];
        row[k] = static_cast<int>(s % p);
    }
    return row;
}

// Every r-subset of the family's q-sets appears once and they exhaust H_r.
inline bool decomposes(const std::vector<std::vector<int>>& fam, const Complex& H, int r) {
    VSetSet seen;
    for (auto& t : fam) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        bool dup = false;
        for_each_subset(s, r, [&](const VSet& e) { if (!seen.insert(e).second) dup = true; });
        if (dup) return false;
    }
    return seen.size() == H.level_size(r);
}

}  // namespace detail

inline CascadeExtension cascade_extension(int p, int q, int r, std::optional<Mat> Mopt = std::nullopt,
                                          long long max_vertices = 200000) {
    if (r < 1 || r >= q) throw DesignError("cascade needs 1 <= r < q");
    CascadeExtension E;
    E.p = p;
    E.q = q;
    E.r = r;
    E.M = Mopt ? *Mopt : find_generic_matrix(p, q, r);
    Field Fp(p, 1);
    if (!is_generic(Fp, E.M)) throw DesignError("cascade matrix is not generic");
    E.pq = static_cast<int>(ipow(p, q));
    E.nQ = ipow(p, r * q);
    if (static_cast<long long>(q) * E.nQ * E.pq > max_vertices) throw DesignError("cascade extension too large");
    E.nz1 = q * E.pq;
    E.nvars = E.nz1 + static_cast<int>(r * E.nQ);
    auto zvar = [&](int i, int b) { return i * E.pq + b; };
    auto tvar = [&](long long Q, int j) { return E.nz1 + static_cast<int>(Q * r + j); };

    for (int i = 0; i < q; ++i)
        for (int b = 0; b < E.pq; ++b) {
            std::vector<int> f(E.nvars, 0);
            f[zvar(i, b)] = 1;
            E.form.push_back(f);
        }
    E.x2_id.assign(q, std::vector<int>(static_cast<std::size_t>(E.nQ * E.pq), -1));
    int next = E.nz1;
    for (long long Qi = 0; Qi < E.nQ; ++Qi) {
        auto Q = detail::digits_of(Qi, p, r * q);
        // w^Q_k = z^{1(e^k M Q)}_k - e^k M t^Q
        std::vector<std::vector<int>> w(q, std::vector<int>(E.nvars, 0));
        for (int k = 0; k < q; ++k) {
            w[k][zvar(k, detail::index_of(detail::MQ_row(E.M, Q, k, q, r, p), p))] = 1;
            for (int l = 0; l < r; ++l) w[k][tvar(Qi, l)] = (w[k][tvar(Qi, l)] + p - E.M[k][l]) % p;
        }
        for (int i = 0; i < q; ++i) {
            const int ident = detail::index_of(detail::MQ_row(E.M, Q, i, q, r, p), p);
            for (int b = 0; b < E.pq; ++b) {
                auto bv = detail::digits_of(b, p, q);
                std::vector<int> f(E.nvars, 0);
                for (int l = 0; l < r; ++l) f[tvar(Qi, l)] = E.M[i][l] % p;
                for (int k = 0; k < q; ++k)
                    if (bv[k])
                        for (int v = 0; v < E.nvars; ++v) f[v] = (f[v] + bv[k] * w[k][v]) % p;
                std::vector<int> unit(q, 0);
                unit[i] = 1;
                if (b == detail::index_of(unit, p)) {
                    // x^{2iQe^i} is x^{1i(e^i MQ)}; the forms must agree.
                    const int id = E.x1(i, ident);
                    if (E.form[id] != f) throw DesignError("cascade extension forms disagree on an identified vertex");
                    E.x2_id[i][Qi * E.pq + b] = id;
                } else {
                    E.x2_id[i][Qi * E.pq + b] = next++;
                    E.form.push_back(f);
                }
            }
        }
    }
    E.nverts = next;

    auto plus_unit = [&](std::vector<int> v, int i) { v[i] = (v[i] + 1) % p; return v; };
    std::vector<std::vector<int>> rowsQ(static_cast<std::size_t>(E.nQ * q));
    for (long long Qi = 0; Qi < E.nQ; ++Qi) {
        auto Q = detail::digits_of(Qi, p, r * q);
        for (int i = 0; i < q; ++i) rowsQ[Qi * q + i] = detail::MQ_row(E.M, Q, i, q, r, p);
    }
    for (int i = 0; i < q; ++i) {
        std::vector<int> unit(q, 0);
        unit[i] = 1;
        E.f1e.push_back(E.x1(i, detail::index_of(unit, p)));
    }
    for (long long Qi = 0; Qi < E.nQ; ++Qi) {
        std::vector<int> f(q), g(q);
        for (int i = 0; i < q; ++i) {
            const auto& row = rowsQ[Qi * q + i];
            f[i] = E.x1(i, detail::index_of(row, p));
            g[i] = E.x1(i, detail::index_of(plus_unit(row, i), p));
        }
        E.f1Q.push_back(f);
        E.g1Q.push_back(g);
    }
    for (long long Qi = 0; Qi < E.nQ; ++Qi)
        for (long long Qj = 0; Qj < E.nQ; ++Qj) {
            std::vector<int> f(q), g(q);
            for (int i = 0; i < q; ++i) {
                const auto& row = rowsQ[Qj * q + i];
                f[i] = E.x2(i, Qi, detail::index_of(row, p));
                g[i] = E.x2(i, Qi, detail::index_of(plus_unit(row, i), p));
            }
            E.f2.push_back(f);
            E.g2.push_back(g);
        }
    // F^C = union of f^{2Q^I Q^I}.
    std::set<int> fc;
    for_each_subset(iota_vec(q), r, [&](const VSet& I) {
        Mat QI = Q_of(Fp, E.M, I);
        std::vector<int> digits(r * q);
        for (int l = 0; l < r; ++l)
            for (int k = 0; k < q; ++k) digits[l * q + k] = QI[l][k];
        const long long Qi = detail::index_of(digits, p);
        for (int v : E.f2[Qi * E.nQ + Qi]) fc.insert(v);
    });
    E.FC.assign(fc.begin(), fc.end());
    E.H = Complex(E.nverts, q);
    auto add = [&](const std::vector<int>& t) {
        VSet s = t;
        std::sort(s.begin(), s.end());
        E.H.add(s);
    };
    add(E.f1e);
    for (auto& t : E.f1Q) add(t);
    for (auto& t : E.g1Q) add(t);
    for (auto& t : E.f2) add(t);
    for (auto& t : E.g2) add(t);
    return E;
}

struct CascadeCheck {
    bool well_defined = true;   // forms agree on identified vertices (checked at build)
    bool f2_decomposes = false;
    bool g_decomposes = false;  // g^{2QQ'} (Q' != 0) with all g^{1Q}
    bool f1Q_is_g2Q0 = false;
    bool closed_form_fc = false;  // L_{f^{2Q^IQ^I}} = M (e^I M)^{-1} z^{1e^I}
    bool span_f1e_is_fc = false;
    bool g10_is_f1e = false;
};

inline CascadeCheck check_cascade(const CascadeExtension& E) {
    CascadeCheck c;
    c.f2_decomposes = detail::decomposes(E.f2, E.H, E.r);
    std::vector<std::vector<int>> gfam;
    for (long long Qi = 0; Qi < E.nQ; ++Qi)
        for (long long Qj = 1; Qj < E.nQ; ++Qj) gfam.push_back(E.g2[Qi * E.nQ + Qj]);
    for (auto& t : E.g1Q) gfam.push_back(t);
    c.g_decomposes = detail::decomposes(gfam, E.H, E.r);
    c.f1Q_is_g2Q0 = true;
    for (long long Qi = 0; Qi < E.nQ; ++Qi)
        if (E.f1Q[Qi] != E.g2[Qi * E.nQ]) c.f1Q_is_g2Q0 = false;
    c.g10_is_f1e = E.g1Q[0] == E.f1e;
    Field Fp(E.p, 1);
    c.closed_form_fc = true;
    for_each_subset(iota_vec(E.q), E.r, [&](const VSet& I) {
        Mat QI = Q_of(Fp, E.M, I);
        std::vector<int> digits(E.r * E.q);
        for (int l = 0; l < E.r; ++l)
            for (int k = 0; k < E.q; ++k) digits[l * E.q + k] = QI[l][k];
        const long long Qi = detail::index_of(digits, E.p);
        Mat EIM;
        for (int i : I) EIM.push_back(E.M[i]);
        Mat A = mat_mul(Fp, E.M, *mat_inverse(Fp, EIM));  // q x r
        for (int i = 0; i < E.q; ++i) {
            std::vector<int> want(E.nvars, 0);
            for (std::size_t k = 0; k < I.size(); ++k) {
                const auto& z = E.form[E.f1e[I[k]]];
                for (int v = 0; v < E.nvars; ++v) want[v] = (want[v] + A[i][k] * z[v]) % E.p;
            }
            if (E.form[E.f2[Qi * E.nQ + Qi][i]] != want) c.closed_form_fc = false;
        }
    });
    Mat base, both;
    for (int v : E.f1e) base.push_back(E.form[v]);
    both = base;
    for (int v : E.FC) both.push_back(E.form[v]);
    c.span_f1e_is_fc = mat_rank(Fp, base) == mat_rank(Fp, both);
    // F^C ⊇ f^{1e} and every F^C form lies in the span, so the spans coincide.
    for (int v : E.f1e)
        if (!std::binary_search(E.FC.begin(), E.FC.end(), v)) c.span_f1e_is_fc = false;
    return c;
}

struct CascadeResult {
    bool success = false;
    std::string reason;
    int attempts = 0;
    std::vector<int> y;
    std::vector<VSet> removed, added;
};

namespace detail {

inline std::vector<int> cascade_images(const Template& T, const CascadeExtension& E, const std::vector<int>& y) {
    std::vector<int> img(E.nverts);
    for (int v = 0; v < E.nverts; ++v) img[v] = T.sigma[dot_prime(*T.F, E.form[v], y)];
    return img;
}

inline VSet image_set(const std::vector<int>& img, const std::vector<int>& t) {
    VSet s;
    for (int v : t) s.push_back(img[v]);
    std::sort(s.begin(), s.end());
    return s;
}

inline std::vector<int> sample_y(const Template& T, const CascadeExtension& E, const std::vector<int>& target, Rng& rng) {
    std::vector<int> y(E.nvars);
    for (int& x : y) x = static_cast<int>(uniform_int(rng, 0, T.n() - 1));
    for (int i = 0; i < E.q; ++i) y[E.f1e[i]] = T.sigma_inv[target[i]];  // L_{x^{1ie^i}} = z^{1e^i}_i
    return y;
}

// Why y does not define an admissible cascade in the current block set, or empty.
inline std::string cascade_obstacle(const Template& T, const CascadeExtension& E, const std::vector<int>& y,
                                    const VSetSet* forbidden) {
    auto img = cascade_images(T, E, y);
    std::vector<int> s = img;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) return "embedding not injective";
    for (auto& t : E.f2)
        if (!T.blocks.count(image_set(img, t))) return "f2 image is not a current block";
    for (auto& t : E.g2)
        if (!T.in_host(image_set(img, t))) return "g2 image outside the host";
    for (auto& t : E.g1Q)
        if (!T.in_host(image_set(img, t))) return "g1 image outside the host";
    if (forbidden)
        for (const VSet& e : E.H.level(E.r)) {
            VSet im;
            for (int v : e) im.push_back(img[v]);
            std::sort(im.begin(), im.end());
            if (forbidden->count(im)) return "touches a forbidden set";
        }
    return {};
}

}  // namespace detail

// The y-cascade: every f^{2QQ'} image becomes g^{2QQ'}, then every f^{1Q} image becomes g^{1Q}.
inline CascadeResult apply_y_cascade(Template& T, const CascadeExtension& E, const std::vector<int>& y,
                                     const VSetSet* forbidden = nullptr) {
    if (!T.eager) throw DesignError("cascades need an eager template");
    if (E.q != T.q || E.r != T.r || E.M != T.M || E.p != T.F->p()) throw DesignError("cascade does not match the template");
    CascadeResult res;
    res.y = y;
    res.reason = detail::cascade_obstacle(T, E, y, forbidden);
    if (!res.reason.empty()) return res;
    auto img = detail::cascade_images(T, E, y);
    std::set<VSet> before_cov;
    for (auto& [e, b] : T.block_of) before_cov.insert(e);
    auto remove_block = [&](const VSet& b) {
        if (!T.blocks.erase(b)) throw DesignError("cascade removes a missing block " + set_str(b));
        for_each_subset(b, T.r, [&](const VSet& e) { T.block_of.erase(e); });
        res.removed.push_back(b);
    };
    auto add_block = [&](const VSet& b) {
        if (!T.blocks.insert(b).second) throw DesignError("cascade adds an existing block " + set_str(b));
        for_each_subset(b, T.r, [&](const VSet& e) {
            if (!T.block_of.emplace(e, b).second) throw DesignError("cascade overlaps at " + set_str(e));
        });
        res.added.push_back(b);
    };
    for (auto& t : E.f2) remove_block(detail::image_set(img, t));
    for (auto& t : E.g2) add_block(detail::image_set(img, t));
    for (auto& t : E.f1Q) remove_block(detail::image_set(img, t));
    for (auto& t : E.g1Q) add_block(detail::image_set(img, t));
    std::set<VSet> after_cov;
    for (auto& [e, b] : T.block_of) after_cov.insert(e);
    if (before_cov != after_cov) throw DesignError("cascade changed the covered set");
    if (auto bad = template_invariant_violation(T)) throw DesignError("cascade broke the template: " + *bad);
    if (!T.blocks.count(detail::image_set(img, E.f1e))) throw DesignError("cascade did not create its target");
    res.success = true;
    return res;
}

// Rejection search for y with L_{f^{1e}}(y) = target (some ordering), then the y-cascade.
inline CascadeResult apply_cascade(Template& T, const CascadeExtension& E, const VSet& target, std::uint64_t seed,
                                   int tries = 20000, const VSetSet* forbidden = nullptr) {
    if (static_cast<int>(target.size()) != T.q) throw DesignError("cascade target must be a q-set");
    bool pre = true;
    for_each_subset(target, T.r, [&](const VSet& e) { if (!T.block_of.count(e)) pre = false; });
    CascadeResult res;
    if (!pre) {
        res.reason = "target has an uncovered r-subset";
        return res;
    }
    if (T.blocks.count(target)) {
        res.success = true;
        res.reason = "already a block";
        return res;
    }
    Rng rng(seed);
    std::string last;
    for (int a = 0; a < tries; ++a) {
        std::vector<int> order = target;
        shuffle_vec(order, rng);
        auto y = detail::sample_y(T, E, order, rng);
        last = detail::cascade_obstacle(T, E, y, forbidden);
        if (last.empty()) {
            auto out = apply_y_cascade(T, E, y, forbidden);
            out.attempts = a + 1;
            return out;
        }
    }
    res.attempts = tries;
    res.reason = "no admissible embedding within the retry cap (last: " + last + ")";
    return res;
}

// Plants a cascade configuration: draws y for the target, then rewrites π on the r-sets of the
// f^{2QQ'} images so that each becomes a template block, and re-enumerates the template.
// Returns y, or nullopt if no draw gives an injective embedding with template-form blocks.
inline std::optional<std::vector<int>> plant_cascade(Template& T, const CascadeExtension& E, const VSet& target,
                                                     std::uint64_t seed, int tries = 200) {
    if (!T.eager) throw DesignError("planting needs an eager template");
    Rng rng(seed);
    for (int a = 0; a < tries; ++a) {
        auto y = detail::sample_y(T, E, target, rng);
        auto img = detail::cascade_images(T, E, y);
        std::vector<int> s = img;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) continue;
        bool ok = true;
        for (auto& t : E.g2) if (!T.in_host(detail::image_set(img, t))) ok = false;
        for (auto& t : E.g1Q) if (!T.in_host(detail::image_set(img, t))) ok = false;
        if (!ok) continue;
        auto saved = T.pi_override;
        for (auto& t : E.f2) {
            for_each_subset(iota_vec(T.q), T.r, [&](const VSet& pos) {
                std::vector<std::pair<int, int>> ev;
                for (int i : pos) ev.emplace_back(img[t[i]], i);
                std::sort(ev.begin(), ev.end());
                VSet e;
                std::vector<int> pe;
                for (auto& [x, i] : ev) { e.push_back(x); pe.push_back(i); }
                T.pi_override[e] = pe;
            });
        }
        detail::enumerate_blocks(T);
        bool all = true;
        for (auto& t : E.f2) if (!T.blocks.count(detail::image_set(img, t))) all = false;
        if (all) return y;
        T.pi_override = saved;
        detail::enumerate_blocks(T);
    }
    return std::nullopt;
}

}  // namespace designforge
