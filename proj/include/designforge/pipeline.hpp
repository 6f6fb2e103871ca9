// Designs: file format, divisibility, verification, exact-cover search, enumeration and the
// construction driver.
#pragma once

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "designforge/nibble.hpp"
#include "designforge/template.hpp"

namespace designforge {

class TimeoutError : public DesignError {
public:
    using DesignError::DesignError;
};

// Parameters are fine but no design can be produced (divisibility, exhausted search).
class InfeasibleError : public DesignError {
public:
    using DesignError::DesignError;
};

struct Design {
    int n = 0, q = 0, r = 0;
    long long lambda = 1;
    std::vector<VSet> blocks;  // multiset
};

inline void validate_params(long long n, long long q, long long r, long long lambda) {
    if (n < 0 || q < 0 || r < 0 || r > q || q > n) throw DesignError("need 0 <= r <= q <= n");
    if (lambda < 1) throw DesignError("lambda must be at least 1");
    if (n > 1000) throw DesignError("n is beyond desk scale");
}

inline void canonicalize(Design& D) {
    for (VSet& b : D.blocks) std::sort(b.begin(), b.end());
    std::sort(D.blocks.begin(), D.blocks.end());
}

inline void check_blocks(const Design& D) {
    for (const VSet& b : D.blocks) {
        if (static_cast<int>(b.size()) != D.q) throw DesignError("block of wrong size: " + set_str(b));
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i] < 0 || b[i] >= D.n) throw DesignError("vertex out of range in " + set_str(b));
            if (i && b[i - 1] >= b[i]) throw DesignError("block not ascending/distinct: " + set_str(b));
        }
    }
}

inline void write_design(std::ostream& os, Design D) {
    canonicalize(D);
    os << "DESIGN n=" << D.n << " q=" << D.q << " r=" << D.r << " lambda=" << D.lambda << "\n";
    for (const VSet& b : D.blocks) {
        for (std::size_t i = 0; i < b.size(); ++i) os << (i ? " " : "") << b[i];
        os << "\n";
    }
}

inline std::string design_to_string(const Design& D) {
    std::ostringstream os;
    write_design(os, D);
    return os.str();
}

inline Design read_design(std::istream& is) {
    std::string line;
    std::optional<Design> D;
    while (std::getline(is, line)) {
        std::string s = detail::strip_comment(line);
        if (s.empty()) continue;
        std::istringstream ls(s);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (!D) {
            if (toks.size() != 5 || toks[0] != "DESIGN")
                throw DesignError("expected 'DESIGN n=<int> q=<int> r=<int> lambda=<int>' header");
            long long n = detail::parse_kv(toks[1], "n"), q = detail::parse_kv(toks[2], "q");
            long long r = detail::parse_kv(toks[3], "r"), l = detail::parse_kv(toks[4], "lambda");
            validate_params(n, q, r, l);
            D.emplace();
            D->n = static_cast<int>(n);
            D->q = static_cast<int>(q);
            D->r = static_cast<int>(r);
            D->lambda = l;
            continue;
        }
        VSet b;
        for (auto& t : toks) {
            long long v = detail::parse_int(t);
            if (v < 0 || v >= D->n) throw DesignError("vertex out of range: " + t);
            b.push_back(static_cast<int>(v));
        }
        D->blocks.push_back(b);
    }
    if (!D) throw DesignError("missing DESIGN header");
    check_blocks(*D);
    return *D;
}

// ---- divisibility ----------------------------------------------------------------------

struct DivisibilityResult {
    bool ok = true;
    int failing_i = -1;
    long long modulus = 0, value = 0;  // at the failing index
};

// C(q-i, r-i) | lambda * C(n-i, r-i) for 0 <= i < r.
inline DivisibilityResult check_divisibility(long long n, long long q, long long r, long long lambda) {
    validate_params(n, q, r, lambda);
    for (long long i = 0; i < r; ++i) {
        const long long m = binom(q - i, r - i);
        const long long c = binom(n - i, r - i);
        if (c > 0 && lambda > LLONG_MAX / c) throw DesignError("divisibility values overflow");
        if ((lambda * c) % m != 0) return {false, static_cast<int>(i), m, lambda * c};
    }
    return {};
}

// Complex variant: C(q-i, r-i) divides the (multi)degree of every i-set into level r.
inline DivisibilityResult check_divisibility_complex(const Complex& G, int q, int r) {
    if (r < 0 || r > q) throw DesignError("need 0 <= r <= q");
    if (r > G.q()) throw DesignError("complex has no level r");
    std::map<VSet, long long> deg;
    for (const VSet& e : G.level(r)) {
        const long long m = G.mult(e);
        for (int i = 0; i < r; ++i) for_each_subset(e, i, [&](const VSet& f) { deg[f] += m; });
    }
    for (int i = 0; i < r; ++i) {
        const long long mod = binom(q - i, r - i);
        for (const VSet& f : G.level(i)) {
            auto it = deg.find(f);
            const long long d = it == deg.end() ? 0 : it->second;
            if (d % mod != 0) return {false, i, mod, d};
        }
    }
    return {};
}

// ---- verification ----------------------------------------------------------------------

struct VerifyReport {
    bool valid = true;
    long long rsets = 0;
    std::vector<std::pair<VSet, long long>> violations;  // r-set, observed coverage
};

inline VerifyReport verify_design(const Design& D) {
    validate_params(D.n, D.q, D.r, D.lambda);
    check_blocks(D);
    const long long total = binom(D.n, D.r);
    if (total > 50000000) throw DesignError("too many r-sets to verify");
    std::vector<long long> cov(static_cast<std::size_t>(total), 0);
    for (const VSet& b : D.blocks) for_each_subset(b, D.r, [&](const VSet& e) { ++cov[detail::colex_rank(e)]; });
    VerifyReport rep;
    rep.rsets = total;
    for_each_subset(iota_vec(D.n), D.r, [&](const VSet& e) {
        const long long c = cov[detail::colex_rank(e)];
        if (c != D.lambda) rep.violations.emplace_back(e, c);
    });
    rep.valid = rep.violations.empty();
    return rep;
}

// ---- deadlines -------------------------------------------------------------------------

struct Deadline {
    std::chrono::steady_clock::time_point end;
    explicit Deadline(double secs)
        : end(std::chrono::steady_clock::now() +
              std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(secs))) {}
    bool passed() const { return std::chrono::steady_clock::now() >= end; }
    void check() const {
        if (passed()) throw TimeoutError("time limit exceeded");
    }
};

// ---- exact cover (dancing links) -------------------------------------------------------

class ExactCover {
public:
    enum class Status { Exhausted, Stopped, NodeCap };

    ExactCover(int ncols, const std::vector<std::vector<int>>& rows) : ncols_(ncols) {
        L_.resize(ncols + 1);
        R_.resize(ncols + 1);
        U_.resize(ncols + 1);
        D_.resize(ncols + 1);
        C_.resize(ncols + 1);
        row_.assign(ncols + 1, -1);
        S_.assign(ncols + 1, 0);
        for (int c = 0; c <= ncols; ++c) {
            L_[c] = c == 0 ? ncols : c - 1;
            R_[c] = c == ncols ? 0 : c + 1;
            U_[c] = D_[c] = C_[c] = c;
        }
        for (std::size_t ri = 0; ri < rows.size(); ++ri) {
            int first = -1;
            for (int c : rows[ri]) {
                if (c < 0 || c >= ncols) throw DesignError("exact cover column out of range");
                const int col = c + 1, x = static_cast<int>(L_.size());
                L_.push_back(x);
                R_.push_back(x);
                U_.push_back(U_[col]);
                D_.push_back(col);
                C_.push_back(col);
                row_.push_back(static_cast<int>(ri));
                D_[U_[col]] = x;
                U_[col] = x;
                ++S_[col];
                if (first < 0) first = x;
                else {
                    L_[x] = L_[first];
                    R_[x] = first;
                    R_[L_[first]] = x;
                    L_[first] = x;
                }
            }
        }
    }

    // Calls visit(chosen rows) on each exact cover; visit returns false to stop.
    template <class Visit>
    Status search(Visit&& visit, long long node_cap = LLONG_MAX, const Deadline* dl = nullptr) {
        nodes_ = 0;
        sol_.clear();
        stop_ = false;
        capped_ = false;
        rec(visit, node_cap, dl);
        if (capped_) return Status::NodeCap;
        return stop_ ? Status::Stopped : Status::Exhausted;
    }

    long long nodes() const { return nodes_; }

private:
    void cover(int c) {
        L_[R_[c]] = L_[c];
        R_[L_[c]] = R_[c];
        for (int i = D_[c]; i != c; i = D_[i])
            for (int j = R_[i]; j != i; j = R_[j]) {
                U_[D_[j]] = U_[j];
                D_[U_[j]] = D_[j];
                --S_[C_[j]];
            }
    }
    void uncover(int c) {
        for (int i = U_[c]; i != c; i = U_[i])
            for (int j = L_[i]; j != i; j = L_[j]) {
                ++S_[C_[j]];
                U_[D_[j]] = j;
                D_[U_[j]] = j;
            }
        L_[R_[c]] = c;
        R_[L_[c]] = c;
    }

    template <class Visit>
    void rec(Visit& visit, long long node_cap, const Deadline* dl) {
        if (R_[0] == 0) {
            if (!visit(static_cast<const std::vector<int>&>(sol_))) stop_ = true;
            return;
        }
        if (++nodes_ > node_cap) { capped_ = true; return; }
        if (dl && (nodes_ & 4095) == 0) dl->check();
        int c = R_[0];
        for (int j = R_[c]; j != 0; j = R_[j]) if (S_[j] < S_[c]) c = j;
        if (S_[c] == 0) return;
        cover(c);
        for (int i = D_[c]; i != c && !stop_ && !capped_; i = D_[i]) {
            sol_.push_back(row_[i]);
            for (int j = R_[i]; j != i; j = R_[j]) cover(C_[j]);
            rec(visit, node_cap, dl);
            for (int j = L_[i]; j != i; j = L_[j]) uncover(C_[j]);
            sol_.pop_back();
        }
        uncover(c);
    }

    int ncols_;
    std::vector<int> L_, R_, U_, D_, C_, row_, S_;
    std::vector<int> sol_;
    long long nodes_ = 0;
    bool stop_ = false, capped_ = false;
};

namespace detail {

// Rows = admissible q-sets in lex order, columns = r-sets by colex rank.
inline std::vector<VSet> admissible_qsets(int n, int q, const std::set<VSet>& excluded) {
    std::vector<VSet> out;
    for_each_subset(iota_vec(n), q, [&](const VSet& b) { if (!excluded.count(b)) out.push_back(b); });
    return out;
}

inline std::vector<std::vector<int>> cover_rows(const std::vector<VSet>& qsets, int r) {
    std::vector<std::vector<int>> rows;
    rows.reserve(qsets.size());
    for (const VSet& b : qsets) {
        std::vector<int> row;
        for_each_subset(b, r, [&](const VSet& e) { row.push_back(static_cast<int>(colex_rank(e))); });
        rows.push_back(row);
    }
    return rows;
}

}  // namespace detail

// Number of Steiner systems S(n,q,r) on the labeled set, counted as exact covers.
inline long long exact_cover_count(int n, int q, int r, const Deadline* dl = nullptr) {
    validate_params(n, q, r, 1);
    auto qsets = detail::admissible_qsets(n, q, {});
    ExactCover X(static_cast<int>(binom(n, r)), detail::cover_rows(qsets, r));
    long long count = 0;
    X.search([&](const std::vector<int>&) { ++count; return true; }, LLONG_MAX, dl);
    return count;
}

// ---- enumeration -----------------------------------------------------------------------

constexpr long long kEnumerateGuard = 40;

// Canonical backtracking: always branch on the lexicographically first uncovered r-set.
// visit(blocks) may return false to stop early.
template <class Visit>
long long enumerate_designs(int n, int q, int r, Visit&& visit, const Deadline* dl = nullptr) {
    validate_params(n, q, r, 1);
    if (binom(n, r) > kEnumerateGuard) throw DesignError("enumeration guard: C(n,r) must be at most 40");
    std::vector<VSet> rsets = subsets(iota_vec(n), r);  // lex order
    std::map<VSet, int> idx;
    for (std::size_t i = 0; i < rsets.size(); ++i) idx[rsets[i]] = static_cast<int>(i);
    // q-sets through each r-set, as lists of r-set indices.
    std::vector<std::vector<std::pair<VSet, std::vector<int>>>> through(rsets.size());
    for_each_subset(iota_vec(n), q, [&](const VSet& b) {
        std::vector<int> ids;
        for_each_subset(b, r, [&](const VSet& e) { ids.push_back(idx.at(e)); });
        for (int id : ids) through[id].emplace_back(b, ids);
    });
    std::vector<char> used(rsets.size(), 0);
    std::vector<VSet> chosen;
    long long count = 0, nodes = 0;
    bool stop = false;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (stop) return;
        if (dl && (++nodes & 4095) == 0) dl->check();
        while (from < rsets.size() && used[from]) ++from;
        if (from == rsets.size()) {
            ++count;
            if (!visit(static_cast<const std::vector<VSet>&>(chosen))) stop = true;
            return;
        }
        for (auto& [b, ids] : through[from]) {
            bool free = true;
            for (int id : ids) if (used[id]) { free = false; break; }
            if (!free) continue;
            for (int id : ids) used[id] = 1;
            chosen.push_back(b);
            rec(from + 1);
            chosen.pop_back();
            for (int id : ids) used[id] = 0;
            if (stop) return;
        }
    };
    rec(0);
    return count;
}

inline long long enumerate_designs(int n, int q, int r, const Deadline* dl = nullptr) {
    return enumerate_designs(n, q, r, [](const std::vector<VSet>&) { return true; }, dl);
}

// C(q,r)^{-1} C(n,r) (q-r) ln n; an asymptotic estimate of ln(number of designs).
inline double estimate_log_count(int n, int q, int r) {
    validate_params(n, q, r, 1);
    if (n == 0) return 0.0;
    return static_cast<double>(binom(n, r)) / static_cast<double>(binom(q, r)) * (q - r) * std::log(static_cast<double>(n));
}

// ---- switching local search ------------------------------------------------------------

struct SwitchOptions {
    long long max_steps = 2000000;
    int full_scan_limit = 512;  // enumerate all extensions when there are at most this many
    int samples = 128;
    double noise = 0.05;
};

struct SwitchResult {
    bool complete = false;
    long long steps = 0;
    std::vector<VSet> blocks;
    long long deficit = 0;
};

namespace detail {

// Multiset of q-sets with coverage <= lambda on every r-set; an uncovered r-set is repaired by
// adding a q-set through it and evicting the blocks that now over-cover.
class SwitchState {
public:
    SwitchState(int n, int q, int r, long long lambda, const std::set<VSet>& excluded)
        : n_(n), q_(q), r_(r), lambda_(lambda), excluded_(excluded) {
        const auto total = static_cast<std::size_t>(binom(n, r));
        cov_.assign(total, 0);
        owners_.assign(total, {});
        pos_.assign(total, -1);
        for (std::size_t i = 0; i < total; ++i) push_deficient(static_cast<int>(i));
        rsets_.resize(total);
        for_each_subset(iota_vec(n), r, [&](const VSet& e) { rsets_[colex_rank(e)] = e; });
    }

    void add(const VSet& b) {
        int id;
        if (!free_.empty()) { id = free_.back(); free_.pop_back(); blocks_[id] = b; alive_[id] = 1; }
        else { id = static_cast<int>(blocks_.size()); blocks_.push_back(b); alive_.push_back(1); }
        for_each_subset(b, r_, [&](const VSet& e) {
            const int k = static_cast<int>(colex_rank(e));
            owners_[k].push_back(id);
            if (++cov_[k] >= lambda_) pop_deficient(k);
        });
        last_ = id;
    }

    void remove(int id) {
        for_each_subset(blocks_[id], r_, [&](const VSet& e) {
            const int k = static_cast<int>(colex_rank(e));
            auto& o = owners_[k];
            o.erase(std::find(o.begin(), o.end(), id));
            if (--cov_[k] < lambda_) push_deficient(k);
        });
        alive_[id] = 0;
        free_.push_back(id);
    }

    bool complete() const { return deficient_.empty(); }
    long long deficit() const {
        long long d = 0;
        for (int c : cov_) d += lambda_ - c;
        return d;
    }

    std::vector<VSet> blocks() const {
        std::vector<VSet> out;
        for (std::size_t i = 0; i < blocks_.size(); ++i) if (alive_[i]) out.push_back(blocks_[i]);
        return out;
    }

    void step(Rng& rng, const SwitchOptions& opt) {
        const int k = deficient_[uniform_int(rng, 0, static_cast<std::int64_t>(deficient_.size()) - 1)];
        const VSet& e = rsets_[k];
        std::vector<int> rest;
        for (int v = 0; v < n_; ++v) if (!std::binary_search(e.begin(), e.end(), v)) rest.push_back(v);
        const int ext = q_ - r_;
        std::vector<VSet> cands;
        if (binom(static_cast<std::int64_t>(rest.size()), ext) <= opt.full_scan_limit) {
            for_each_subset(rest, ext, [&](const VSet& x) { cands.push_back(set_union(e, x)); });
        } else {
            for (int s = 0; s < opt.samples; ++s) {
                std::vector<int> pick = rest;
                for (int i = 0; i < ext; ++i)
                    std::swap(pick[i], pick[uniform_int(rng, i, static_cast<std::int64_t>(pick.size()) - 1)]);
                pick.resize(ext);
                std::sort(pick.begin(), pick.end());
                cands.push_back(set_union(e, pick));
            }
        }
        std::vector<int> best;
        int best_conf = INT_MAX;
        std::vector<int> conf(cands.size(), 0);
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (excluded_.count(cands[c])) { conf[c] = -1; continue; }
            int bad = 0;
            for_each_subset(cands[c], r_, [&](const VSet& f) { if (cov_[colex_rank(f)] >= lambda_) ++bad; });
            conf[c] = bad;
            if (bad < best_conf) { best_conf = bad; best.clear(); }
            if (bad == best_conf) best.push_back(static_cast<int>(c));
        }
        if (best.empty()) return;  // every extension excluded
        int choice = best[uniform_int(rng, 0, static_cast<std::int64_t>(best.size()) - 1)];
        if (bernoulli(rng, opt.noise)) {
            std::vector<int> ok;
            for (std::size_t c = 0; c < cands.size(); ++c) if (conf[c] >= 0) ok.push_back(static_cast<int>(c));
            choice = ok[uniform_int(rng, 0, static_cast<std::int64_t>(ok.size()) - 1)];
        }
        const VSet b = cands[choice];
        add(b);
        const int me = last_;
        for_each_subset(b, r_, [&](const VSet& f) {
            const int fk = static_cast<int>(colex_rank(f));
            while (cov_[fk] > lambda_) {
                std::vector<int> others;
                for (int o : owners_[fk]) if (o != me) others.push_back(o);
                remove(others[uniform_int(rng, 0, static_cast<std::int64_t>(others.size()) - 1)]);
            }
        });
    }

private:
    void push_deficient(int k) {
        if (pos_[k] >= 0) return;
        pos_[k] = static_cast<int>(deficient_.size());
        deficient_.push_back(k);
    }
    void pop_deficient(int k) {
        if (pos_[k] < 0) return;
        const int last = deficient_.back();
        deficient_[pos_[k]] = last;
        pos_[last] = pos_[k];
        deficient_.pop_back();
        pos_[k] = -1;
    }

    int n_, q_, r_;
    long long lambda_;
    const std::set<VSet>& excluded_;
    std::vector<int> cov_;
    std::vector<std::vector<int>> owners_;
    std::vector<int> deficient_, pos_;
    std::vector<VSet> rsets_;
    std::vector<VSet> blocks_;
    std::vector<char> alive_;
    std::vector<int> free_;
    int last_ = -1;
};

}  // namespace detail

// Starts from a partial design (coverage <= lambda) and switches until every r-set is covered
// lambda times or the step budget runs out.
inline SwitchResult switching_search(int n, int q, int r, long long lambda, const std::vector<VSet>& start,
                                     const std::set<VSet>& excluded, std::uint64_t seed,
                                     const SwitchOptions& opt = {}, const Deadline* dl = nullptr) {
    if (r < 1 || r >= q) throw DesignError("switching needs 1 <= r < q");
    if (binom(n, r) > 5000000) throw DesignError("too many r-sets for switching search");
    detail::SwitchState S(n, q, r, lambda, excluded);
    std::map<VSet, long long> cov;
    for (const VSet& b : start) {
        if (excluded.count(b)) throw DesignError("starting block is excluded");
        for_each_subset(b, r, [&](const VSet& e) {
            if (++cov[e] > lambda) throw DesignError("starting blocks over-cover " + set_str(e));
        });
        S.add(b);
    }
    Rng rng(seed);
    SwitchResult res;
    while (!S.complete() && res.steps < opt.max_steps) {
        if (dl && (res.steps & 1023) == 0) dl->check();
        S.step(rng, opt);
        ++res.steps;
    }
    res.complete = S.complete();
    res.blocks = S.blocks();
    res.deficit = S.deficit();
    return res;
}

// ---- construction ----------------------------------------------------------------------

enum class Method { Auto, Pipeline, Backtrack };

inline Method parse_method(const std::string& s) {
    if (s == "auto") return Method::Auto;
    if (s == "pipeline") return Method::Pipeline;
    if (s == "backtrack") return Method::Backtrack;
    throw DesignError("unknown method '" + s + "'");
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Auto: return "auto";
        case Method::Pipeline: return "pipeline";
        case Method::Backtrack: return "backtrack";
    }
    return "?";
}

struct RunConfig {
    std::uint64_t seed = 1;
    Method method = Method::Auto;
    double timeout_secs = 600;
    int disjoint = 1;                     // number of pairwise block-disjoint designs
    long long backtrack_threshold = 150;  // auto: exact cover when C(n,r) is at most this
    double bite = 0.01;
    int restarts = 8;
    bool use_template = true;
    SwitchOptions repair{};
    long long backtrack_nodes = 100000;   // first node budget; doubles per restart

    void validate() const {
        if (!(timeout_secs > 0)) throw DesignError("timeout must be positive");
        if (disjoint < 1) throw DesignError("disjoint count must be at least 1");
        if (restarts < 1) throw DesignError("restarts must be at least 1");
        if (!(bite > 0 && bite <= 1)) throw DesignError("bite must lie in (0,1]");
    }
};

struct ConstructResult {
    std::vector<Design> designs;
    std::vector<std::string> log;
};

namespace detail {

inline std::string fmt_count(const std::string& what, long long v) { return what + "=" + std::to_string(v); }

// Template blocks over F_n for prime-power n, when a generic q x r matrix over F_p exists.
inline std::vector<VSet> template_stage(int n, int q, int r, std::uint64_t seed, const std::set<VSet>& excluded,
                                        std::vector<std::string>& log) {
    auto pp = prime_power(n);
    if (!pp) { log.push_back("template: skipped (n is not a prime power)"); return {}; }
    if (pp->second < r) { log.push_back("template: skipped (F_n has dimension below r over its prime field)"); return {}; }
    auto M = find_generic_matrix_opt(pp->first, q, r);
    if (!M) { log.push_back("template: skipped (no generic matrix over F_" + std::to_string(pp->first) + ")"); return {}; }
    TemplateOptions topt;
    if (std::pow(static_cast<double>(n), r) > static_cast<double>(topt.eager_limit)) {
        log.push_back("template: skipped (field too large to enumerate)");
        return {};
    }
    Template T = build_template(nullptr, make_field(pp->first, pp->second), *M, seed, topt);
    std::vector<VSet> out;
    for (const VSet& b : T.blocks) if (!excluded.count(b)) out.push_back(b);
    log.push_back("template: F_" + std::to_string(n) + " gives " + std::to_string(out.size()) + " blocks");
    return out;
}

// Nibble over the q-sets avoiding the already covered r-sets and the excluded q-sets.
inline std::vector<VSet> nibble_stage(int n, int q, int r, const std::vector<VSet>& partial, double bite,
                                      std::uint64_t seed, const std::set<VSet>& excluded, std::vector<std::string>& log) {
    std::vector<char> covered(static_cast<std::size_t>(binom(n, r)), 0);
    for (const VSet& b : partial) for_each_subset(b, r, [&](const VSet& e) { covered[colex_rank(e)] = 1; });
    AuxHypergraph A;
    A.q = q;
    A.r = r;
    A.arity = static_cast<int>(binom(q, r));
    std::vector<int> id(covered.size(), -1);
    for_each_subset(iota_vec(n), r, [&](const VSet& e) {
        const auto k = colex_rank(e);
        if (covered[k]) return;
        id[k] = static_cast<int>(A.vertices.size());
        A.vertices.push_back(e);
    });
    std::vector<int> ids;
    for_each_subset(iota_vec(n), q, [&](const VSet& b) {
        if (excluded.count(b)) return;
        ids.clear();
        bool ok = true;
        for_each_subset(b, r, [&](const VSet& e) {
            const int v = id[colex_rank(e)];
            if (v < 0) ok = false; else ids.push_back(v);
        });
        if (ok) push_edge(A, ids);
    });
    if (A.num_vertices() == 0 || A.num_edges() == 0) return {};
    NibbleOptions nopt;
    nopt.bite = bite;
    NibbleResult N = nibble_cover(A, seed, nopt);
    log.push_back("nibble: " + fmt_count("bites", static_cast<long long>(N.bites.size())) + " " +
                  fmt_count("blocks", static_cast<long long>(N.blocks.size())) + " " +
                  fmt_count("greedy", N.greedy_added) + " " +
                  fmt_count("leftover", static_cast<long long>(N.leftover.size())));
    return N.blocks;
}

inline std::optional<std::vector<VSet>> run_pipeline(int n, int q, int r, const RunConfig& cfg, std::uint64_t seed,
                                                     const std::set<VSet>& excluded, const Deadline& dl,
                                                     std::vector<std::string>& log) {
    if (r < 1 || r >= q) return std::nullopt;
    std::vector<VSet> base;
    if (cfg.use_template) base = template_stage(n, q, r, derive_seed(seed, 0x7e), excluded, log);
    for (int a = 0; a < cfg.restarts; ++a) {
        dl.check();
        const std::uint64_t s = derive_seed(seed, 0x100 + static_cast<std::uint64_t>(a));
        std::vector<VSet> blocks = base;
        auto more = nibble_stage(n, q, r, blocks, cfg.bite, derive_seed(s, 1), excluded, log);
        blocks.insert(blocks.end(), more.begin(), more.end());
        SwitchResult sw = switching_search(n, q, r, 1, blocks, excluded, derive_seed(s, 2), cfg.repair, &dl);
        log.push_back("repair: attempt " + std::to_string(a) + " " + fmt_count("steps", sw.steps) + " " +
                      fmt_count("deficit", sw.deficit));
        if (sw.complete) return sw.blocks;
    }
    return std::nullopt;
}

inline std::optional<std::vector<VSet>> run_backtrack(int n, int q, int r, const RunConfig& cfg, std::uint64_t seed,
                                                      const std::set<VSet>& excluded, const Deadline& dl,
                                                      std::vector<std::string>& log) {
    std::vector<VSet> qsets = admissible_qsets(n, q, excluded);
    long long cap = cfg.backtrack_nodes;
    for (int a = 0;; ++a) {
        dl.check();
        std::vector<VSet> order = qsets;
        Rng rng(derive_seed(seed, 0x200 + static_cast<std::uint64_t>(a)));
        shuffle_vec(order, rng);
        ExactCover X(static_cast<int>(binom(n, r)), cover_rows(order, r));
        std::vector<VSet> found;
        auto st = X.search([&](const std::vector<int>& rows) {
            for (int i : rows) found.push_back(order[i]);
            return false;
        }, cap, &dl);
        log.push_back("backtrack: attempt " + std::to_string(a) + " " + fmt_count("nodes", X.nodes()));
        if (st == ExactCover::Status::Stopped) return found;
        if (st == ExactCover::Status::Exhausted) return std::nullopt;
        if (cap < LLONG_MAX / 2) cap *= 2;
    }
}

// One Steiner system (lambda = 1) avoiding the excluded q-sets.
inline std::vector<VSet> construct_steiner(int n, int q, int r, const RunConfig& cfg, std::uint64_t seed,
                                           const std::set<VSet>& excluded, const Deadline& dl,
                                           std::vector<std::string>& log) {
    if (r == 0 || r == q) {
        // r = 0: any single q-set; r = q: every q-set.
        auto qsets = admissible_qsets(n, q, excluded);
        if (r == 0) {
            if (qsets.empty()) throw InfeasibleError("every q-set is excluded");
            return {qsets.front()};
        }
        if (qsets.size() != static_cast<std::size_t>(binom(n, q))) throw InfeasibleError("r = q design needs every q-set");
        return qsets;
    }
    Method m = cfg.method;
    if (m == Method::Auto) {
        m = binom(n, r) <= cfg.backtrack_threshold ? Method::Backtrack : Method::Pipeline;
        log.push_back("auto: " + method_name(m));
    }
    if (m == Method::Pipeline) {
        if (auto b = run_pipeline(n, q, r, cfg, seed, excluded, dl, log)) return *b;
        if (cfg.method == Method::Pipeline) throw InfeasibleError("pipeline failed after all restarts");
        log.push_back("auto: pipeline failed, falling back to backtracking");
    }
    if (auto b = run_backtrack(n, q, r, cfg, seed, excluded, dl, log)) return *b;
    throw InfeasibleError("exact cover search exhausted: no design avoids the excluded blocks");
}

}  // namespace detail

inline ConstructResult construct_design(const RunConfig& cfg, int n, int q, int r, long long lambda) {
    validate_params(n, q, r, lambda);
    cfg.validate();
    auto div = check_divisibility(n, q, r, lambda);
    if (!div.ok)
        throw InfeasibleError("divisibility fails at i=" + std::to_string(div.failing_i) + ": " +
                              std::to_string(div.modulus) + " does not divide " + std::to_string(div.value));
    const Deadline dl(cfg.timeout_secs);
    ConstructResult res;
    std::set<VSet> used;
    const bool merge = check_divisibility(n, q, r, 1).ok;
    for (int k = 0; k < cfg.disjoint; ++k) {
        const std::uint64_t bseed = derive_seed(cfg.seed, 0xd000 + static_cast<std::uint64_t>(k));
        Design D;
        D.n = n;
        D.q = q;
        D.r = r;
        D.lambda = lambda;
        if (merge) {
            for (long long j = 0; j < lambda; ++j) {
                auto part = detail::construct_steiner(n, q, r, cfg, derive_seed(bseed, static_cast<std::uint64_t>(j)),
                                                      used, dl, res.log);
                D.blocks.insert(D.blocks.end(), part.begin(), part.end());
            }
        } else {
            // lambda-fold multiset directly.
            bool done = false;
            for (int a = 0; a < cfg.restarts && !done; ++a) {
                SwitchResult sw = switching_search(n, q, r, lambda, {}, used,
                                                   derive_seed(bseed, 0x300 + static_cast<std::uint64_t>(a)),
                                                   cfg.repair, &dl);
                res.log.push_back("multiset: attempt " + std::to_string(a) + " " +
                                  detail::fmt_count("steps", sw.steps) + " " + detail::fmt_count("deficit", sw.deficit));
                if (sw.complete) { D.blocks = sw.blocks; done = true; }
            }
            if (!done) throw InfeasibleError("lambda-fold search failed after all restarts");
        }
        canonicalize(D);
        auto rep = verify_design(D);
        if (!rep.valid) throw DesignError("internal error: constructed design failed verification");
        for (const VSet& b : D.blocks) {
            if (used.count(b)) throw DesignError("internal error: batches share a block");
        }
        for (const VSet& b : D.blocks) used.insert(b);
        res.designs.push_back(std::move(D));
    }
    return res;
}

}  // namespace designforge
