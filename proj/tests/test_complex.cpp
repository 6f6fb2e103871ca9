#include <catch_amalgamated.hpp>

#include <sstream>

#include "designforge/complex.hpp"

using namespace designforge;

namespace {

// Pascal's triangle, independent of binom().
long long pascal(int n, int k) {
    std::vector<std::vector<long long>> t(n + 1, std::vector<long long>(n + 1, 0));
    for (int i = 0; i <= n; ++i) {
        t[i][0] = 1;
        for (int j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return k < 0 || k > n ? 0 : t[n][k];
}

void require_closed(const Complex& G) { REQUIRE_FALSE(G.closure_violation().has_value()); }

}  // namespace

TEST_CASE("complete complex level sizes", "[complex]") {
    auto K = complete_complex(4, 2);
    CHECK(K.level_size(0) == 1);
    CHECK(K.level_size(1) == 4);
    CHECK(K.level_size(2) == 6);
    auto K3 = complete_complex(3, 3);
    CHECK(K3.level(3) == std::set<VSet>{{0, 1, 2}});
    auto K0 = complete_complex(5, 0);
    CHECK(K0.level_size(0) == 1);
    CHECK(K0.q() == 0);
    for (int n = 0; n <= 9; ++n)
        for (int q = 0; q <= n && q <= 4; ++q) {
            auto G = complete_complex(n, q);
            for (int i = 0; i <= q; ++i) CHECK(static_cast<long long>(G.level_size(i)) == pascal(n, i));
            require_closed(G);
        }
    CHECK_THROWS_AS(complete_complex(3, 4), DesignError);
}

TEST_CASE("relative density", "[complex]") {
    Complex G(4, 2);
    for_each_subset(iota_vec(4), 2, [&](const VSet& e) { if (e != VSet{2, 3}) G.add(e); });
    CHECK(relative_density(G, 2) == Rational(5, 6));
    auto K = complete_complex(7, 3);
    for (int i = 0; i <= 3; ++i) CHECK(relative_density(K, i) == Rational(1));
    // empty candidate set: convention d = 1
    Complex E(5, 2);
    CHECK(relative_density(E, 2) == Rational(1));
}

TEST_CASE("random complex densities", "[complex]") {
    auto G = random_complex(60, {1.0, 0.5, 0.5}, 1);
    require_closed(G);
    const double d2 = boost::rational_cast<double>(relative_density(G, 2));
    CHECK(std::abs(d2 - 0.5) <= 0.05);
    auto H = random_complex(40, {1.0, 0.3, 0.9}, 7);
    require_closed(H);
    CHECK(std::abs(boost::rational_cast<double>(relative_density(H, 3)) - 0.9) <= 0.1);
    // density one everywhere is the complete complex
    CHECK(random_complex(8, {1.0, 1.0, 1.0}, 3) == complete_complex(8, 3));
    // reproducible from the seed
    CHECK(random_complex(30, {1.0, 0.4}, 11) == random_complex(30, {1.0, 0.4}, 11));
    CHECK_THROWS_AS(random_complex(5, {1.5}, 1), DesignError);
}

TEST_CASE("neighborhood", "[complex]") {
    auto K = complete_complex(5, 3);
    auto N = neighborhood(K, {1});
    CHECK(N.q() == 2);
    CHECK(N.level_size(1) == 4);
    CHECK(N.level_size(2) == 6);
    for (const VSet& v : N.level(1)) CHECK(v != VSet{1});
    CHECK(neighborhood(K, {}) == K);
    CHECK_THROWS_AS(neighborhood(Complex(5, 2), {0, 1}), DesignError);

    auto G = random_complex(60, {1.0, 0.5, 0.5}, 5);
    const VSet e = *G.level(1).begin();
    auto Ne = neighborhood(G, e);
    require_closed(Ne);
    for (int j = 0; j <= Ne.q(); ++j) {
        long long cnt = 0;
        for (const VSet& s : G.level(j + 1)) cnt += is_subset(e, s);
        CHECK(static_cast<long long>(Ne.level_size(j)) == cnt);
    }
}

TEST_CASE("restriction", "[complex]") {
    auto K = complete_complex(6, 3);
    Complex V(6, 1);
    for (int v = 0; v < 6; ++v) if (v != 2) V.add({v});
    auto R = restrict(K, V, 1);
    CHECK(R == restrict(complete_complex(6, 3), V, 1));
    for (int i = 1; i <= 3; ++i)
        for (const VSet& e : R.level(i)) CHECK_FALSE(std::binary_search(e.begin(), e.end(), 2));
    CHECK(R.level_size(3) == 10);

    // J = G_s leaves G unchanged
    CHECK(restrict_level(K, K.level(2), 2) == K);

    auto K4 = complete_complex(4, 3);
    auto T = restrict_level(K4, {{0, 1}, {2, 3}}, 2);
    CHECK(T.level_size(3) == 0);
    CHECK(T.level_size(2) == 2);

    // idempotent
    auto G = random_complex(25, {1.0, 0.6, 0.6}, 9);
    std::set<VSet> J;
    Rng rng(4);
    for (const VSet& e : G.level(2)) if (bernoulli(rng, 0.7)) J.insert(e);
    auto once = restrict_level(G, J, 2);
    require_closed(once);
    CHECK(restrict_level(once, J, 2) == once);
    auto G2 = random_complex(25, {1.0, 0.8}, 10);
    auto r1 = restrict(G, G2, 2);
    CHECK(restrict(r1, G2, 2) == r1);
}

TEST_CASE("boundedness", "[complex]") {
    const int n = 10;
    auto one = check_bounded(std::vector<VSet>{{0, 1}}, 2, 2.0 / n, n);
    CHECK(one.ok);
    CHECK(one.max_degree == 1);
    std::vector<VSet> star;
    for (int v = 1; v < n; ++v) star.push_back({0, v});
    auto st = check_bounded(star, 2, 0.5, n);
    CHECK_FALSE(st.ok);
    CHECK(st.witness == VSet{0});
    CHECK(st.max_degree == n - 1);
    EdgeVector J(2);
    J.add({0, 1}, 2);
    J.add({0, 2}, -3);
    auto sg = check_bounded(J, 1.0, n);
    CHECK(sg.max_plus == 2);
    CHECK(sg.max_minus == 3);
}

TEST_CASE("edge vectors", "[complex]") {
    EdgeVector J(2);
    J.add({0, 1}, 3);
    J.add({1, 2}, -2);
    J.add({0, 1}, -3);
    CHECK(J.support() == 1);
    CHECK(J.mass() == 2);
    CHECK(J.negative().get({1, 2}) == 2);
    CHECK(J.positive().zero());
    CHECK_THROWS_AS(J.add({0}, 1), DesignError);
}

TEST_CASE("complex text round trip", "[complex]") {
    auto G = random_complex(12, {1.0, 0.5, 0.5}, 2);
    const VSet top = *G.level(2).begin();
    G.set_mult(top, 3);
    std::stringstream ss;
    write_complex(ss, G);
    auto H = read_complex(ss);
    CHECK(H == G);
    std::stringstream bad("COMPLEX n=3 q=2\n2 0 5\n");
    CHECK_THROWS_AS(read_complex(bad), DesignError);
    CHECK_THROWS_AS(G.set_mult(*G.level(1).begin(), 2), DesignError);
}
