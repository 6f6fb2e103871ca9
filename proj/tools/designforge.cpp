// designforge command line: check, construct, verify, enumerate, nibble, template, estimate-count.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "designforge/designforge.hpp"

namespace df = designforge;

namespace {

enum Exit { kOk = 0, kFail = 1, kTimeout = 2, kInvalid = 3 };

std::uint64_t default_seed() {
    const char* env = std::getenv("DESIGNFORGE_SEED");
    if (!env || !*env) return 1;
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw df::DesignError(std::string("DESIGNFORGE_SEED is not an unsigned integer: ") + env);
    }
}

int cmd_check(int n, int q, int r, long long lambda) {
    auto d = df::check_divisibility(n, q, r, lambda);
    if (d.ok) {
        std::cout << "divisible: yes\n";
        return kOk;
    }
    std::cout << "divisible: no (i=" << d.failing_i << ": " << d.modulus << " does not divide " << d.value << ")\n";
    return kFail;
}

int cmd_construct(int n, int q, int r, long long lambda, const df::RunConfig& cfg, const std::string& out) {
    auto res = df::construct_design(cfg, n, q, r, lambda);
    for (const auto& line : res.log) std::cerr << line << "\n";
    for (std::size_t k = 0; k < res.designs.size(); ++k) {
        const std::string path = res.designs.size() == 1 ? out : out + "." + std::to_string(k + 1);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw df::DesignError("cannot write " + path);
        df::write_design(f, res.designs[k]);
        if (!f) throw df::DesignError("write failed for " + path);
        std::cout << path << ": " << res.designs[k].blocks.size() << " blocks, verified\n";
    }
    return kOk;
}

int cmd_verify(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw df::DesignError("cannot read " + path);
    df::Design D = df::read_design(f);
    auto rep = df::verify_design(D);
    if (rep.valid) {
        if (!df::check_divisibility(D.n, D.q, D.r, D.lambda).ok)
            throw std::logic_error("valid design with failing divisibility");
        std::cout << "valid: " << D.blocks.size() << " blocks cover all " << rep.rsets << " r-sets exactly "
                  << D.lambda << " times\n";
        return kOk;
    }
    std::cout << "invalid: " << rep.violations.size() << " of " << rep.rsets << " r-sets have coverage != "
              << D.lambda << "\n";
    std::size_t shown = 0;
    for (auto& [e, c] : rep.violations) {
        if (shown++ == 50) { std::cout << "  ...\n"; break; }
        std::cout << "  " << df::set_str(e) << " coverage " << c << "\n";
    }
    return kFail;
}

int cmd_enumerate(int n, int q, int r, bool count_only) {
    long long idx = 0;
    long long count = df::enumerate_designs(n, q, r, [&](const std::vector<df::VSet>& blocks) {
        if (!count_only) {
            df::Design D{n, q, r, 1, blocks};
            std::cout << "# design " << ++idx << "\n";
            df::write_design(std::cout, D);
        }
        return true;
    });
    const long long dlx = df::exact_cover_count(n, q, r);
    std::cout << "count: " << count << "\n";
    std::cout << "exact-cover count: " << dlx << (dlx == count ? " (agrees)" : " (DISAGREES)") << "\n";
    return dlx == count ? kOk : kFail;
}

int cmd_nibble(int n, int q, int r, double bite, std::uint64_t seed) {
    if (n > 2000) throw df::DesignError("n too large for the auxiliary hypergraph");
    auto A = df::aux_hypergraph_complete(n, q, r);
    df::NibbleOptions opt;
    opt.bite = bite;
    auto res = df::nibble_cover(A, seed, opt);
    std::cout << "aux hypergraph: " << A.num_vertices() << " vertices, " << A.num_edges() << " edges\n";
    std::cout << std::setw(5) << "bite" << std::setw(12) << "mean_deg" << std::setw(11) << "activated"
              << std::setw(10) << "accepted" << std::setw(12) << "free_rsets" << std::setw(12) << "live_edges" << "\n";
    for (const auto& b : res.bites)
        std::cout << std::setw(5) << b.bite << std::setw(12) << std::fixed << std::setprecision(2) << b.mean_degree
                  << std::setw(11) << b.activated << std::setw(10) << b.accepted << std::setw(12)
                  << b.surviving_vertices << std::setw(12) << b.surviving_edges << "\n";
    const double frac = static_cast<double>(res.leftover.size()) / static_cast<double>(A.num_vertices());
    std::cout << "matching: " << res.matching.size() << " cliques (" << res.greedy_added << " by final greedy), disjoint: "
              << (df::matching_disjoint(A, res.matching) ? "yes" : "no") << "\n";
    std::cout << "leftover: " << res.leftover.size() << " r-sets (" << std::setprecision(4) << 100 * frac
              << "%), max (r-1)-degree " << res.leftover_max_degree << "\n";
    return kOk;
}

int cmd_template(int p, int a, int q, int r, std::uint64_t seed) {
    if (!df::is_prime(p) || a < 1) throw df::DesignError("need a prime p and a >= 1");
    auto F = df::make_field(p, a);
    auto M = df::find_generic_matrix_opt(p, q, r);
    std::cout << "field: F_" << F->size() << " = F_" << p << "[x]/(";
    const auto& mod = F->modulus();
    bool first = true;
    for (int k = static_cast<int>(mod.size()) - 1; k >= 0; --k) {
        if (!mod[k]) continue;
        std::cout << (first ? "" : " + ");
        first = false;
        if (k == 0 || mod[k] != 1) std::cout << mod[k];
        if (k >= 1) std::cout << "x";
        if (k > 1) std::cout << "^" << k;
    }
    std::cout << ")\n";
    if (!M) {
        std::cout << "no generic " << q << "x" << r << " matrix over F_" << p << "\n";
        return kFail;
    }
    std::cout << "M:\n" << df::mat_str(*M);
    df::Template T = df::build_template(nullptr, F, *M, seed);
    if (!T.eager) throw df::DesignError("field too large to enumerate the template");
    const double frac = df::covered_fraction(T);
    const double pred = df::predicted_covered_fraction(q, r, std::vector<double>(q + 1, 1.0));
    std::cout << "blocks: " << T.blocks.size() << "\n";
    std::cout << "covered r-sets: " << T.covered_count() << " of " << T.host_level_size(r) << "\n";
    std::cout << std::setprecision(6) << "covered fraction: " << frac << ", predicted " << pred << ", ratio "
              << frac / pred << "\n";
    auto bad = df::template_invariant_violation(T);
    std::cout << "decomposition invariant: " << (bad ? "FAIL (" + *bad + ")" : std::string("ok")) << "\n";
    const bool dim = df::template_dimension_ok(T);
    std::cout << "dimension invariant: " << (dim ? "ok" : "FAIL") << "\n";
    return bad || !dim ? kFail : kOk;
}

int cmd_estimate(int n, int q, int r) {
    const double est = df::estimate_log_count(n, q, r);
    std::cout << std::setprecision(6) << "estimated ln(count): " << est << "\n";
    if (df::binom(n, r) <= df::kEnumerateGuard) {
        const long long c = df::enumerate_designs(n, q, r);
        std::cout << "exact count: " << c;
        if (c > 0) std::cout << ", ln(count) = " << std::log(static_cast<double>(c));
        std::cout << "\n";
    }
    std::cout << "note: the estimate is asymptotic in n and is not expected to match exact counts at small n\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"designforge: construct, verify and study combinatorial designs"};
    app.require_subcommand(1);
    int n = 0, q = 0, r = 0, p = 0, a = 0, disjoint = 1;
    long long lambda = 1;
    std::uint64_t seed = 0;
    double timeout = 600, bite = 0.01;
    std::string method = "auto", out, file;
    bool count_only = false;

    auto add_nqr = [&](CLI::App* s) {
        s->add_option("--n", n, "number of points")->required();
        s->add_option("--q", q, "block size")->required();
        s->add_option("--r", r, "strength")->required();
    };
    auto* check = app.add_subcommand("check", "check the divisibility conditions");
    add_nqr(check);
    check->add_option("--lambda", lambda, "index")->required();

    auto* construct = app.add_subcommand("construct", "construct a verified design");
    add_nqr(construct);
    construct->add_option("--lambda", lambda, "index")->required();
    construct->add_option("--seed", seed, "random seed (default: DESIGNFORGE_SEED or 1)");
    construct->add_option("--method", method, "auto|pipeline|backtrack")
        ->check(CLI::IsMember({"auto", "pipeline", "backtrack"}));
    construct->add_option("--timeout-secs", timeout, "time limit");
    construct->add_option("--disjoint", disjoint, "number of pairwise block-disjoint designs");
    construct->add_option("--out", out, "output file (FILE.1..FILE.K when K > 1)")->required();

    auto* verify = app.add_subcommand("verify", "verify a design file");
    verify->add_option("file", file, "design file")->required();

    auto* enumerate = app.add_subcommand("enumerate", "enumerate labeled Steiner systems (C(n,r) <= 40)");
    add_nqr(enumerate);
    enumerate->add_flag("--count-only", count_only, "print only the count");

    auto* nibble = app.add_subcommand("nibble", "run the nibble on the complete clique hypergraph");
    add_nqr(nibble);
    nibble->add_option("--bite", bite, "bite size");
    nibble->add_option("--seed", seed, "random seed");

    auto* tmpl = app.add_subcommand("template", "build the algebraic template on the complete complex");
    tmpl->add_option("--p", p, "prime")->required();
    tmpl->add_option("--a", a, "extension degree")->required();
    tmpl->add_option("--q", q, "block size")->required();
    tmpl->add_option("--r", r, "strength")->required();
    tmpl->add_option("--seed", seed, "random seed");

    auto* estimate = app.add_subcommand("estimate-count", "asymptotic estimate of ln(number of designs)");
    add_nqr(estimate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        auto seed_opt = [&](CLI::App* s) { return s->count("--seed") ? seed : default_seed(); };
        if (*check) return cmd_check(n, q, r, lambda);
        if (*construct) {
            df::RunConfig cfg;
            cfg.seed = seed_opt(construct);
            cfg.method = df::parse_method(method);
            cfg.timeout_secs = timeout;
            cfg.disjoint = disjoint;
            return cmd_construct(n, q, r, lambda, cfg, out);
        }
        if (*verify) return cmd_verify(file);
        if (*enumerate) return cmd_enumerate(n, q, r, count_only);
        if (*nibble) return cmd_nibble(n, q, r, bite, seed_opt(nibble));
        if (*tmpl) return cmd_template(p, a, q, r, seed_opt(tmpl));
        if (*estimate) return cmd_estimate(n, q, r);
    } catch (const df::TimeoutError& e) {
        std::cerr << "timeout: " << e.what() << "\n";
        return kTimeout;
    } catch (const df::InfeasibleError& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kFail;
    } catch (const df::DesignError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
    return kInvalid;
}
