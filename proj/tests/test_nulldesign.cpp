#include <catch_amalgamated.hpp>

#include <sstream>

#include "designforge/nulldesign.hpp"

using namespace designforge;

namespace {

// Rank over F_P of a set of integer vectors (P large prime); equals the rational rank for the
// small 0/±1 matrices used here with overwhelming margin.
int rank_mod_p(std::vector<std::vector<long long>> rows) {
    const long long P = 1000000007LL;
    auto pw = [&](long long b, long long e) {
        long long r = 1;
        b %= P;
        for (; e; e >>= 1, b = b * b % P) if (e & 1) r = r * b % P;
        return r;
    };
    int rank = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (auto& row : rows) for (auto& x : row) x = ((x % P) + P) % P;
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
        int piv = -1;
        for (std::size_t i = rank; i < rows.size(); ++i) if (rows[i][c]) { piv = static_cast<int>(i); break; }
        if (piv < 0) continue;
        std::swap(rows[rank], rows[piv]);
        const long long inv = pw(rows[rank][c], P - 2);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == rank || !rows[i][c]) continue;
            const long long f = rows[i][c] * inv % P;
            for (std::size_t k = 0; k < cols; ++k) rows[i][k] = ((rows[i][k] - f * rows[rank][k]) % P + P) % P;
        }
        ++rank;
    }
    return rank;
}

// All octahedron boundaries of the complete r-complex on n vertices as dense vectors.
int oracle_span_rank(int n, int r) {
    auto cols = subsets(iota_vec(n), r);
    std::map<VSet, int> idx;
    for (std::size_t i = 0; i < cols.size(); ++i) idx[cols[i]] = static_cast<int>(i);
    std::vector<std::vector<long long>> rows;
    std::vector<int> phi(2 * r);
    std::function<void(int, std::vector<char>&)> rec = [&](int j, std::vector<char>& used) {
        if (j == r) {
            std::vector<long long> row(cols.size(), 0);
            for (int mask = 0; mask < (1 << r); ++mask) {
                VSet e;
                int par = 0;
                for (int t = 0; t < r; ++t) {
                    const int x = (mask >> t) & 1;
                    par ^= x;
                    e.push_back(phi[2 * t + x]);
                }
                std::sort(e.begin(), e.end());
                row[idx[e]] += par ? -1 : 1;
            }
            rows.push_back(row);
            return;
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                if (used[a] || used[b]) continue;
                used[a] = used[b] = 1;
                phi[2 * j] = a;
                phi[2 * j + 1] = b;
                rec(j + 1, used);
                used[a] = used[b] = 0;
            }
    };
    std::vector<char> used(n, 0);
    rec(0, used);
    return rank_mod_p(rows);
}

std::vector<int> random_oct(int n, int r, Rng& rng) {
    std::vector<int> v = iota_vec(n);
    shuffle_vec(v, rng);
    v.resize(2 * r);
    return v;
}

}  // namespace

TEST_CASE("octahedron signs", "[nulldesign]") {
    auto O1 = octahedron(1);
    CHECK(O1.H.n() == 2);
    CHECK(O1.s({0}) == 1);
    CHECK(O1.s({1}) == -1);
    auto O2 = octahedron(2);
    CHECK(O2.s({0, 2}) == 1);
    CHECK(O2.s({1, 2}) == -1);
    CHECK(O2.s({0, 3}) == -1);
    CHECK(O2.s({1, 3}) == 1);
    auto O3 = octahedron(3);
    int pos = 0, neg = 0;
    for (auto& [e, s] : O3.sign) (s > 0 ? pos : neg)++;
    CHECK(pos == 4);
    CHECK(neg == 4);
    CHECK_THROWS_AS(octahedron(0), DesignError);
}

TEST_CASE("clique boundaries and null checks", "[nulldesign]") {
    EmbCombo T(3);
    T.add({2, 5, 7}, 1);
    auto J = boundary(T, clique_pattern(3, 2));
    CHECK(J.support() == 3);
    CHECK(J.get({2, 5}) == 1);
    CHECK(J.get({5, 7}) == 1);
    CHECK(J.get({2, 7}) == 1);

    EdgeVector one(2);
    one.add({0, 1}, 1);
    auto nr = check_null(one, 1);
    CHECK_FALSE(nr.ok);
    CHECK(!nr.witness.empty());

    EdgeVector sq(2);
    sq.add({1, 3}, 1);
    sq.add({2, 4}, 1);
    sq.add({1, 4}, -1);
    sq.add({2, 3}, -1);
    CHECK(check_null(sq, 1).ok);
    CHECK(check_null(sq, 0).ok);
    // links of null vectors are null one level down
    CHECK(check_null(link(sq, {1}), 0).ok);
}

TEST_CASE("boundary of octahedral combinations is null", "[nulldesign]") {
    Rng rng(17);
    for (int trial = 0; trial < 150; ++trial) {
        const int r = 1 + trial % 3;
        const int n = 2 * r + static_cast<int>(uniform_int(rng, 0, 10));
        EmbCombo Phi(2 * r);
        const int terms = static_cast<int>(uniform_int(rng, 1, 6));
        for (int t = 0; t < terms; ++t) add_oct(Phi, random_oct(n, r, rng), uniform_int(rng, -3, 3));
        auto bp = oct_boundary_parts(Phi, r);
        CHECK(check_null(bp.total, r - 1).ok);
        CHECK(bp.total == bp.plus - bp.minus);
        CHECK(bp.total == boundary(Phi, octahedron(r)));
        CHECK(oct_boundary(Phi.positive(), r) - oct_boundary(Phi.negative(), r) == bp.total);
    }
}

TEST_CASE("octahedral span rank", "[nulldesign]") {
    CHECK(octahedral_span_rank(5, 2) == 5);
    CHECK(octahedral_span_rank(4, 2) == 2);
    CHECK(octahedral_span_rank(2, 1) == 1);
    for (int r = 1; r <= 2; ++r)
        for (int n = 2 * r; n <= 7; ++n) {
            INFO("n=" << n << " r=" << r);
            const int rk = octahedral_span_rank(n, r);
            CHECK(rk == oracle_span_rank(n, r));
            CHECK(rk == binom(n, r) - binom(n, r - 1));
        }
    CHECK_THROWS_AS(octahedral_span_rank(3, 2), DesignError);
}

TEST_CASE("finish clique", "[nulldesign]") {
    EdgeVector sq(2);
    sq.add({1, 3}, 1);
    sq.add({2, 4}, 1);
    sq.add({1, 4}, -1);
    sq.add({2, 3}, -1);
    auto one = finish_clique(sq, VSet{1, 2, 3, 4});
    CHECK(oct_boundary(one.Phi, 2) == sq);
    CHECK(one.size == 1);
    auto zero = finish_clique(EdgeVector(2), 4);
    CHECK(zero.Phi.zero());

    Rng rng(3);
    for (int r = 1; r <= 3; ++r)
        for (int R = 2 * r; R <= 2 * r + 2; ++R)
            for (int t = 0; t < 10; ++t) {
                EmbCombo gen(2 * r);
                for (int k = 0; k < 4; ++k) add_oct(gen, random_oct(R, r, rng), uniform_int(rng, -3, 3));
                auto J = oct_boundary(gen, r);
                auto res = finish_clique(J, R);
                CHECK(oct_boundary(res.Phi, r) == J);
            }
    EdgeVector bad(2);
    bad.add({0, 1}, 1);
    CHECK_THROWS_AS(finish_clique(bad, 4), DesignError);
}

TEST_CASE("octahedral decomposition", "[nulldesign]") {
    auto G = random_complex(50, {1.0, 0.8}, 4);
    OctOptions opt;
    auto z = oct_decompose(G, EdgeVector(2), opt, 1);
    CHECK(z.Phi.zero());
    CHECK(z.report.exact);

    Rng rng(6);
    EmbCombo gen(4);
    while (gen.terms.size() < 5) {
        auto phi = random_oct(50, 2, rng);
        bool inside = true;
        for (auto& [e, s] : oct_edges(phi)) if (!G.contains(e)) inside = false;
        if (inside) add_oct(gen, phi, 1);
    }
    auto J = oct_boundary(gen, 2);
    auto res = oct_decompose(G, J, opt, 2);
    CHECK(res.report.exact);
    CHECK(oct_boundary(res.Phi, 2) == J);
    CHECK(res.report.simple);
    for (auto& [t, c] : res.Phi.terms)
        for (auto& [e, s] : oct_edges(t)) CHECK(G.contains(e));

    EdgeVector bad(2);
    bad.add({0, 1}, 1);
    CHECK_THROWS_AS(oct_decompose(G, bad, opt, 3), DesignError);
}

TEST_CASE("combination text round trip", "[nulldesign]") {
    EmbCombo Phi(4);
    add_oct(Phi, {0, 3, 1, 2}, 2);
    add_oct(Phi, {4, 5, 6, 7}, -1);
    std::stringstream ss;
    write_combo(ss, Phi);
    CHECK(read_combo(ss, 4) == Phi);
}
