// Rooted extensions: embedding counts, typicality checks and the randomized extension process.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "designforge/complex.hpp"

namespace designforge {

// Pattern H on vertices 0..h-1, root F (sorted pattern vertices) with images phi[k] of F[k].
// H2, when present, lists the pattern sets that must land in the second host G2.
struct RootedExtension {
    Complex H;
    std::optional<Complex> H2;
    VSet F;
    std::vector<int> phi;

    int size() const { return H.n(); }
    bool in_H2(const VSet& s) const { return !H2 || H2->contains(s); }
};

namespace detail {

struct EmbedPlan {
    const Complex* G;
    const Complex* G2;
    const RootedExtension* E;
    std::vector<int> order;                        // free pattern vertices, placement order
    std::vector<std::vector<VSet>> checks;         // pattern sets completed at each step
    std::vector<int> img;                          // pattern vertex -> host vertex, -1 if unset
    std::vector<char> used;                        // host vertex already an image

    VSet image(const VSet& s) const {
        VSet out(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) out[k] = img[s[k]];
        std::sort(out.begin(), out.end());
        return out;
    }
    bool set_ok(const VSet& s, const VSet& im) const {
        if (!G->contains(im)) return false;
        if (G2 && E->in_H2(s) && !G2->contains(im)) return false;
        return true;
    }
};

inline EmbedPlan make_plan(const Complex& G, const Complex* G2, const RootedExtension& E) {
    const int h = E.H.n();
    if (E.F.size() != E.phi.size()) throw DesignError("root map size does not match F");
    EmbedPlan P{&G, G2, &E, {}, {}, std::vector<int>(h, -1), std::vector<char>(G.n(), 0)};
    for (std::size_t k = 0; k < E.F.size(); ++k) {
        int v = E.F[k], x = E.phi[k];
        if (v < 0 || v >= h) throw DesignError("invalid root: pattern vertex out of range");
        if (x < 0 || x >= G.n()) throw DesignError("invalid root: host vertex out of range");
        if (P.used[x]) throw DesignError("invalid root: map is not injective");
        P.img[v] = x;
        P.used[x] = 1;
    }
    // H[F] must embed.
    for (int i = 1; i <= E.H.q(); ++i)
        for (const VSet& s : E.H.level(i))
            if (is_subset(s, E.F) && !P.set_ok(s, P.image(s)))
                throw DesignError("invalid root: H[F] does not embed at " + set_str(s));
    std::vector<char> placed(h, 0);
    for (int v : E.F) placed[v] = 1;
    std::vector<int> free;
    for (int v = 0; v < h; ++v) if (!placed[v]) free.push_back(v);
    // Most constrained first: the free vertex closing the most pattern sets with placed ones.
    while (!free.empty()) {
        int best = -1, best_score = -1;
        for (int v : free) {
            int score = 0;
            for (int i = 2; i <= E.H.q(); ++i)
                for (const VSet& s : E.H.level(i)) {
                    if (!std::binary_search(s.begin(), s.end(), v)) continue;
                    bool all = true;
                    for (int u : s) if (u != v && !placed[u]) { all = false; break; }
                    if (all) ++score;
                }
            if (score > best_score) { best_score = score; best = v; }
        }
        std::vector<VSet> cks;
        for (int i = 1; i <= E.H.q(); ++i)
            for (const VSet& s : E.H.level(i)) {
                if (!std::binary_search(s.begin(), s.end(), best)) continue;
                bool all = true;
                for (int u : s) if (u != best && !placed[u]) { all = false; break; }
                if (all) cks.push_back(s);
            }
        P.order.push_back(best);
        P.checks.push_back(cks);
        placed[best] = 1;
        free.erase(std::find(free.begin(), free.end(), best));
    }
    return P;
}

// Depth-first enumeration of completions; extra(set, image) may veto; visit returns false to stop.
template <class Extra, class Visit>
bool enumerate_completions(EmbedPlan& P, std::size_t depth, Extra& extra, Visit& visit) {
    if (depth == P.order.size()) return visit(static_cast<const std::vector<int>&>(P.img));
    const int v = P.order[depth];
    for (int x = 0; x < P.G->n(); ++x) {
        if (P.used[x]) continue;
        P.img[v] = x;
        bool ok = true;
        for (const VSet& s : P.checks[depth]) {
            VSet im = P.image(s);
            if (!P.set_ok(s, im) || !extra(s, im)) { ok = false; break; }
        }
        if (ok) {
            P.used[x] = 1;
            bool go = enumerate_completions(P, depth + 1, extra, visit);
            P.used[x] = 0;
            if (!go) { P.img[v] = -1; return false; }
        }
        P.img[v] = -1;
    }
    return true;
}

inline double falling(long long n, long long k) {
    double out = 1;
    for (long long i = 0; i < k; ++i) out *= static_cast<double>(n - i);
    return out;
}

// Uniform random injection of the free vertices; returns true when every check passes.
template <class Extra>
bool random_completion(EmbedPlan& P, Rng& rng, Extra& extra) {
    std::vector<int> chosen;
    for (int v : P.order) {
        int x;
        int guard = 0;
        do {
            x = static_cast<int>(uniform_int(rng, 0, P.G->n() - 1));
            if (++guard > 1000000) throw DesignError("not enough host vertices for an injection");
        } while (P.used[x]);
        P.img[v] = x;
        P.used[x] = 1;
        chosen.push_back(x);
    }
    bool ok = true;
    for (std::size_t d = 0; d < P.order.size() && ok; ++d)
        for (const VSet& s : P.checks[d]) {
            VSet im = P.image(s);
            if (!P.set_ok(s, im) || !extra(s, im)) { ok = false; break; }
        }
    if (!ok) {
        for (std::size_t d = 0; d < P.order.size(); ++d) {
            P.used[chosen[d]] = 0;
            P.img[P.order[d]] = -1;
        }
    }
    return ok;
}

inline void release(EmbedPlan& P) {
    for (int v : P.order) {
        if (P.img[v] >= 0) P.used[P.img[v]] = 0;
        P.img[v] = -1;
    }
}
}  // namespace detail

struct CountMode {
    bool exact = true;
    long long samples = 0;
    std::uint64_t seed = 0;

    static CountMode Exact() { return {}; }
    static CountMode Sampled(long long k, std::uint64_t seed) { return {false, k, seed}; }
    // exact for small hosts and patterns, sampled otherwise
    static CountMode Auto(int n, int h, long long k = 20000, std::uint64_t seed = 0) {
        return (n <= 80 && h <= 4) ? Exact() : Sampled(k, seed);
    }
};

struct CountResult {
    double value = 0;
    double stderr_ = 0;
    bool exact = true;
};

// X_E(G) (or X_E(G,G2) when G2 is given): embeddings of H extending the root.
inline CountResult count_extensions(const Complex& G, const Complex* G2, const RootedExtension& E, CountMode mode = {}) {
    auto P = detail::make_plan(G, G2, E);
    auto no_extra = [](const VSet&, const VSet&) { return true; };
    if (mode.exact) {
        long long c = 0;
        auto visit = [&](const std::vector<int>&) { ++c; return true; };
        detail::enumerate_completions(P, 0, no_extra, visit);
        return {static_cast<double>(c), 0.0, true};
    }
    if (mode.samples <= 0) throw DesignError("sampled count needs k > 0");
    Rng rng(mode.seed);
    long long hits = 0;
    for (long long t = 0; t < mode.samples; ++t) {
        if (detail::random_completion(P, rng, no_extra)) {
            ++hits;
            detail::release(P);
        }
    }
    const double total = detail::falling(G.n() - static_cast<long long>(E.F.size()), static_cast<long long>(P.order.size()));
    const double p = static_cast<double>(hits) / static_cast<double>(mode.samples);
    return {p * total, total * std::sqrt(p * (1 - p) / static_cast<double>(mode.samples)), false};
}

// ---- typicality ----------------------------------------------------------------------

struct TypicalityRow {
    VSet root;
    std::vector<int> family;   // subset masks S of the root with S ∪ {x} in the pattern
    std::vector<int> family2;  // masks whose sets must also lie in G2
    long long count = 0;
    double expected = 0;
    double ratio = 1;
};

struct TypicalityReport {
    bool typical = true;
    double c = 0;
    int h = 0;
    long long roots_checked = 0;
    long long extensions_checked = 0;
    double worst_ratio = 1;
    TypicalityRow worst;
    std::vector<TypicalityRow> failures;  // first few failing rows
};

struct TypicalityOptions {
    double c = 0.1;
    int h = 3;
    long long max_roots_per_size = 50000;  // all roots when C(n,f) is at most this, else sampled
    std::uint64_t seed = 0;
    std::size_t keep_failures = 10;
};

namespace detail {
// Down-closed families of masks over `allowed` that contain the empty mask.
inline std::vector<std::vector<int>> down_families(const std::vector<int>& allowed) {
    std::vector<std::vector<int>> out;
    std::vector<int> nonempty;
    for (int m : allowed) if (m) nonempty.push_back(m);
    std::sort(nonempty.begin(), nonempty.end(), [](int a, int b) {
        int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    std::vector<int> cur{0};
    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (idx == nonempty.size()) { out.push_back(cur); return; }
        rec(idx + 1);
        int m = nonempty[idx];
        for (int b = 0; b < 31; ++b)
            if ((m >> b) & 1)
                if (std::find(cur.begin(), cur.end(), m & ~(1 << b)) == cur.end()) return;
        cur.push_back(m);
        rec(idx + 1);
        cur.pop_back();
    };
    rec(0);
    return out;
}

inline std::string family_str(const VSet& root, const std::vector<int>& fam) {
    std::string s = "{";
    for (std::size_t i = 0; i < fam.size(); ++i) {
        VSet S;
        for (std::size_t b = 0; b < root.size(); ++b) if ((fam[i] >> b) & 1) S.push_back(root[b]);
        s += (i ? "," : "") + set_str(S) + "+x";
    }
    return s + "}";
}
}  // namespace detail

inline std::string describe(const TypicalityRow& row) {
    std::ostringstream os;
    os << "root=" << set_str(row.root) << " new=" << detail::family_str(row.root, row.family);
    if (row.family2 != row.family) os << " in2=" << detail::family_str(row.root, row.family2);
    return os.str();
}

// Checks all simple rooted extensions of size <= h against (1 ± c)·π_E·X_E(K).
inline TypicalityReport check_typicality(const Complex& G, const Complex* G2, const TypicalityOptions& opt) {
    TypicalityReport rep;
    rep.c = opt.c;
    rep.h = opt.h;
    const int n = G.n();
    const bool pair = G2 != nullptr && !(*G2 == G);
    std::vector<double> d(G.q() + 1, 1.0), d2(G.q() + 1, 1.0);
    for (int i = 1; i <= G.q(); ++i) {
        d[i] = boost::rational_cast<double>(relative_density(G, i));
        if (pair) d2[i] = boost::rational_cast<double>(relative_density(*G2, i));
    }
    Rng rng(opt.seed);
    double worst_dev = -1;
    for (int f = 0; f + 1 <= opt.h && f < n; ++f) {
        // masks S of the root with |S| + 1 <= q
        std::vector<int> allowed;
        for (int m = 0; m < (1 << f); ++m)
            if (__builtin_popcount(m) + 1 <= G.q()) allowed.push_back(m);
        if (allowed.empty()) continue;
        auto fams = detail::down_families(allowed);
        std::vector<VSet> roots;
        if (binom(n, f) <= opt.max_roots_per_size) {
            roots = subsets(iota_vec(n), f);
        } else {
            std::set<VSet> pick;
            while (static_cast<long long>(pick.size()) < opt.max_roots_per_size) {
                std::vector<int> all = iota_vec(n);
                for (int k = 0; k < f; ++k) std::swap(all[k], all[uniform_int(rng, k, n - 1)]);
                pick.insert(make_set(std::vector<int>(all.begin(), all.begin() + f)));
            }
            roots.assign(pick.begin(), pick.end());
        }
        for (const VSet& root : roots) {
            ++rep.roots_checked;
            std::vector<VSet> sub(1 << f);
            std::vector<char> inG(1 << f, 0), inG2(1 << f, 0);
            for (int m : allowed) {
                for (int b = 0; b < f; ++b) if ((m >> b) & 1) sub[m].push_back(root[b]);
                inG[m] = G.contains(sub[m]);
                inG2[m] = pair ? G2->contains(sub[m]) : inG[m];
            }
            std::map<std::pair<int, int>, long long> hist;
            for (int x = 0; x < n; ++x) {
                if (std::binary_search(root.begin(), root.end(), x)) continue;
                int A = 0, A2 = 0;
                for (int m : allowed) {
                    if (!inG[m]) continue;
                    VSet e = sub[m];
                    e.insert(std::upper_bound(e.begin(), e.end(), x), x);
                    if (G.contains(e)) {
                        A |= 1 << m;
                        if (!pair || G2->contains(e)) A2 |= 1 << m;
                    }
                }
                ++hist[{A, A2}];
            }
            for (const auto& T : fams) {
                bool valid = true;
                int Tmask = 0;
                for (int m : T) { valid = valid && inG[m]; Tmask |= 1 << m; }
                if (!valid) continue;
                std::vector<std::vector<int>> t2s;
                if (pair) {
                    std::vector<int> allowed2;
                    for (int m : T) if (inG2[m]) allowed2.push_back(m);
                    if (!allowed2.empty() && allowed2[0] == 0) t2s = detail::down_families(allowed2);
                    t2s.insert(t2s.begin(), std::vector<int>{});
                } else {
                    t2s.push_back(T);
                }
                for (const auto& T2 : t2s) {
                    int T2mask = 0;
                    for (int m : T2) T2mask |= 1 << m;
                    double pi = 1.0;
                    for (int m : T) {
                        int lv = __builtin_popcount(m) + 1;
                        pi *= ((T2mask >> m) & 1) ? (pair ? d2[lv] : d[lv]) : d[lv];
                    }
                    long long X = 0;
                    for (auto& [key, cnt] : hist)
                        if ((key.first & Tmask) == Tmask && (key.second & T2mask) == T2mask) X += cnt;
                    const double expected = pi * static_cast<double>(n - f);
                    const double ratio = expected > 0 ? static_cast<double>(X) / expected : (X == 0 ? 1.0 : INFINITY);
                    ++rep.extensions_checked;
                    const double dev = std::fabs(ratio - 1.0);
                    TypicalityRow row{root, T, T2, X, expected, ratio};
                    if (dev > worst_dev) {
                        worst_dev = dev;
                        rep.worst_ratio = ratio;
                        rep.worst = row;
                    }
                    if (dev > opt.c) {
                        rep.typical = false;
                        if (rep.failures.size() < opt.keep_failures) rep.failures.push_back(row);
                    }
                }
            }
        }
    }
    return rep;
}

inline void write_typicality(std::ostream& os, const TypicalityReport& rep) {
    os << "# c=" << rep.c << " h=" << rep.h << " roots=" << rep.roots_checked
       << " extensions=" << rep.extensions_checked << " typical=" << (rep.typical ? "yes" : "no") << "\n";
    os << "extension\tcount\texpected\tratio\tbound\n";
    auto line = [&](const TypicalityRow& r) {
        os << describe(r) << "\t" << r.count << "\t" << r.expected << "\t" << r.ratio << "\t1±" << rep.c << "\n";
    };
    line(rep.worst);
    for (const auto& r : rep.failures) line(r);
}

// ---- extension process ---------------------------------------------------------------

// Uniform legal completion: exact enumeration with reservoir sampling when the raw injection
// count is at most enum_limit, rejection sampling with reject_cap tries otherwise.
template <class Extra>
std::optional<std::vector<int>> sample_completion(detail::EmbedPlan& P, Extra& extra, Rng& rng,
                                                  long long enum_limit = 1000000, int reject_cap = 10000) {
    const long long nf = static_cast<long long>(P.G->n()) - static_cast<long long>(P.E->F.size());
    const double raw = detail::falling(nf, static_cast<long long>(P.order.size()));
    std::optional<std::vector<int>> pick;
    if (raw <= static_cast<double>(enum_limit)) {
        long long seen = 0;
        auto visit = [&](const std::vector<int>& img) {
            ++seen;
            if (uniform_int(rng, 1, seen) == 1) pick = img;
            return true;
        };
        detail::enumerate_completions(P, 0, extra, visit);
    } else if (nf >= static_cast<long long>(P.order.size())) {
        for (int t = 0; t < reject_cap && !pick; ++t)
            if (detail::random_completion(P, rng, extra)) {
                pick = P.img;
                detail::release(P);
            }
    }
    return pick;
}

struct ProcessConfig {
    int N = 1;
    int r = 2;
    // B^i: one entry applies to every step, otherwise one entry per step
    std::vector<VSetSet> forbidden;
    bool m_mode = false;
    // extra veto on images (template-aware forbidden sets in m_mode)
    std::function<bool(int step, const VSet& image)> extra_forbid;
    long long enum_limit = 1000000;
    int reject_cap = 10000;
};

struct ProcessResult {
    std::vector<std::vector<int>> embeddings;  // full pattern->host maps, one per placed step
    bool aborted = false;
    int abort_step = -1;
    std::map<VSet, long long> usage;           // r-level use counts of images of H_r \ H[F]
};

inline ProcessResult run_extension_process(const Complex& G, const Complex* G2, const std::vector<RootedExtension>& roots,
                                           const ProcessConfig& cfg, std::uint64_t seed) {
    if (cfg.N < 1) throw DesignError("process cap N must be >= 1");
    if (cfg.m_mode && !cfg.extra_forbid) throw DesignError("m_mode needs a template-aware forbid rule");
    ProcessResult res;
    Rng rng(seed);
    VSetMap<long long> use;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const RootedExtension& E = roots[i];
        auto P = detail::make_plan(G, G2, E);
        const VSetSet* B = nullptr;
        if (cfg.forbidden.size() == 1) B = &cfg.forbidden[0];
        else if (i < cfg.forbidden.size()) B = &cfg.forbidden[i];
        const int step = static_cast<int>(i);
        auto extra = [&](const VSet& s, const VSet& im) {
            if (B && B->count(im)) return false;
            if (static_cast<int>(s.size()) == cfg.r) {
                auto it = use.find(im);
                if (it != use.end() && it->second >= cfg.N) return false;
            }
            if (cfg.extra_forbid && cfg.extra_forbid(step, im)) return false;
            return true;
        };
        auto pick = sample_completion(P, extra, rng, cfg.enum_limit, cfg.reject_cap);
        if (!pick) {
            res.aborted = true;
            res.abort_step = step;
            break;
        }
        for (const VSet& s : E.H.level(cfg.r)) {
            if (is_subset(s, E.F)) continue;
            VSet im(s.size());
            for (std::size_t k = 0; k < s.size(); ++k) im[k] = (*pick)[s[k]];
            std::sort(im.begin(), im.end());
            ++use[im];
        }
        res.embeddings.push_back(*pick);
    }
    for (auto& [e, c] : use) res.usage[e] = c;
    return res;
}

// ∂_f Φ*: the images of one pattern set across all placed steps.
inline EdgeVector face_boundary(const ProcessResult& res, const VSet& face) {
    EdgeVector out(static_cast<int>(face.size()));
    for (const auto& emb : res.embeddings) {
        VSet im(face.size());
        for (std::size_t k = 0; k < face.size(); ++k) im[k] = emb[face[k]];
        std::sort(im.begin(), im.end());
        out.add(im, 1);
    }
    return out;
}

}  // namespace designforge
