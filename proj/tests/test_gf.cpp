#include <catch_amalgamated.hpp>

#include "designforge/gf.hpp"

using namespace designforge;

namespace {

// Schoolbook polynomial product reduced by the field modulus, on digit vectors.
int oracle_mul(const Field& F, int x, int y) {
    const int p = F.p(), a = F.a();
    std::vector<int> X(a), Y(a), prod(2 * a, 0);
    for (int k = 0; k < a; ++k) { X[k] = F.digit(x, k); Y[k] = F.digit(y, k); }
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < a; ++j) prod[i + j] = (prod[i + j] + X[i] * Y[j]) % p;
    const auto& m = F.modulus();  // monic, degree a
    for (int d = 2 * a - 1; d >= a; --d) {
        const int c = prod[d];
        if (!c) continue;
        for (int k = 0; k <= a; ++k) prod[d - a + k] = ((prod[d - a + k] - c * m[k]) % p + p) % p;
    }
    int out = 0, pw = 1;
    for (int k = 0; k < a; ++k, pw *= p) out += prod[k] * pw;
    return out;
}

int det2(const Mat& M, int i, int j, int p) { return ((M[i][0] * M[j][1] - M[i][1] * M[j][0]) % p + p) % p; }

}  // namespace

TEST_CASE("field construction", "[gf]") {
    Field F8(2, 3);
    CHECK(F8.modulus() == std::vector<int>{1, 1, 0, 1});  // x^3 + x + 1
    const int x = 2;
    CHECK(F8.mul(F8.mul(x, x), x) == 3);  // x + 1
    Field F5(5, 1);
    CHECK(F5.mul(3, 2) == 1);
    Field F9(3, 2);
    CHECK(F9.size() == 9);
    for (int e = 1; e < 9; ++e) CHECK(8 % F9.order(e) == 0);
    CHECK_THROWS_AS(Field(4, 1), DesignError);
}

TEST_CASE("field multiplication matches polynomial arithmetic", "[gf]") {
    for (auto [p, a] : std::vector<std::pair<int, int>>{{2, 3}, {2, 4}, {3, 2}, {5, 2}, {7, 1}}) {
        Field F(p, a);
        for (int x = 0; x < F.size(); ++x)
            for (int y = 0; y < F.size(); ++y) REQUIRE(F.mul(x, y) == oracle_mul(F, x, y));
    }
    Field F(5, 3);
    Rng rng(2);
    for (int t = 0; t < 2000; ++t) {
        int x = static_cast<int>(uniform_int(rng, 0, 124)), y = static_cast<int>(uniform_int(rng, 0, 124));
        REQUIRE(F.mul(x, y) == oracle_mul(F, x, y));
    }
}

TEST_CASE("field axioms", "[gf]") {
    for (auto [p, a] : std::vector<std::pair<int, int>>{{2, 5}, {3, 3}, {5, 3}, {13, 1}}) {
        Field F(p, a);
        Rng rng(p * 100 + a);
        for (int t = 0; t < 1000; ++t) {
            int x = static_cast<int>(uniform_int(rng, 0, F.size() - 1));
            int y = static_cast<int>(uniform_int(rng, 0, F.size() - 1));
            int z = static_cast<int>(uniform_int(rng, 0, F.size() - 1));
            REQUIRE(F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z)));
            REQUIRE(F.add(F.add(x, y), z) == F.add(x, F.add(y, z)));
            REQUIRE(F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z)));
            REQUIRE(F.pow(F.add(x, y), p) == F.add(F.pow(x, p), F.pow(y, p)));
            if (x) REQUIRE(F.mul(x, F.inv(x)) == 1);
            REQUIRE(F.sub(F.add(x, y), y) == x);
        }
    }
}

TEST_CASE("prime-field dimension", "[gf]") {
    Field F8(2, 3);
    CHECK(field_dim(F8, {1, 2, 3}) == 2);
    CHECK(field_dim(F8, {0}) == 0);
    CHECK(field_dim(F8, {1, 2, 4}) == 3);
    // random pairs: full dimension becomes the rule as a grows
    double prev = -1;
    for (int a = 1; a <= 4; ++a) {
        Field F(5, a);
        Rng rng(a);
        int full = 0;
        for (int t = 0; t < 2000; ++t) {
            int u = static_cast<int>(uniform_int(rng, 0, F.size() - 1)), v = static_cast<int>(uniform_int(rng, 0, F.size() - 1));
            full += field_dim(F, {u, v}) == 2;
        }
        const double freq = full / 2000.0;
        CHECK(freq >= prev);
        prev = freq;
    }
    CHECK(prev > 0.98);
}

TEST_CASE("basic lines", "[gf]") {
    Field F4(2, 2);
    auto L = basic_line(F4, {0, 0}, {1, 1});
    CHECK(L.size() == 4);
    for (auto& pt : L) CHECK(pt[0] == pt[1]);
    Field F9(3, 2);
    auto L2 = basic_line(F9, {4, 7}, {1, 0});
    std::set<int> firsts;
    for (auto& pt : L2) {
        CHECK(pt[1] == 7);
        firsts.insert(pt[0]);
    }
    CHECK(firsts.size() == 9);
    CHECK_THROWS_AS(basic_line(F4, {0, 0}, {0, 0}), DesignError);
    CHECK_THROWS_AS(basic_line(F4, {0, 0}, {2, 1}), DesignError);
}

TEST_CASE("specialisation", "[gf]") {
    auto F = make_field(5, 1);
    LinearSystem L{F, {{1, 0}, {0, 1}, {1, 1}}, {0, 0, 0}, 2};
    auto sp = specialize(L, {2}, {0});
    REQUIRE(sp);
    auto img = sp->result.image();
    CHECK(img.size() == 5);
    for (auto& v : img) {
        CHECK(v[2] == 0);
        CHECK(F->add(v[0], v[1]) == 0);
    }
    CHECK(sp->result.dim() == 1);
    auto id = specialize(L, {}, {});
    REQUIRE(id);
    CHECK(id->result.image() == L.image());
    LinearSystem L2{F, {{1, 0}, {1, 0}}, {0, 1}, 2};
    CHECK_FALSE(specialize(L2, {0, 1}, {0, 0}).has_value());
}

TEST_CASE("specialisation identities on random basic systems", "[gf]") {
    auto F = make_field(2, 5);
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        LinearSystem L{F, zero_mat(6, 3), std::vector<int>(6), 3};
        for (auto& row : L.M) for (auto& x : row) x = static_cast<int>(uniform_int(rng, 0, 1));
        for (auto& c : L.C) c = static_cast<int>(uniform_int(rng, 0, F->size() - 1));
        REQUIRE(L.basic());
        std::vector<int> S, Sp;
        for (int v = 0; v < 6; ++v) {
            if (bernoulli(rng, 0.4)) S.push_back(v);
            else if (bernoulli(rng, 0.5)) Sp.push_back(v);
        }
        std::vector<int> z(3);
        for (auto& x : z) x = static_cast<int>(uniform_int(rng, 0, F->size() - 1));
        auto val = L.eval(z);
        std::vector<int> e;
        for (int v : S) e.push_back(val[v]);
        auto sp = specialize(L, S, e);
        REQUIRE(sp);
        const auto& R = sp->result;
        CHECK(R.basic());
        CHECK(R.M == mat_mul(*F, L.M, sp->Lz.M, 3));
        auto C = mat_vec(*F, L.M, sp->Lz.C);
        for (int v = 0; v < 6; ++v) C[v] = F->add(C[v], L.C[v]);
        CHECK(R.C == C);
        std::vector<int> SSp = S;
        SSp.insert(SSp.end(), Sp.begin(), Sp.end());
        CHECK(R.restrict_to(Sp).dim() == L.restrict_to(SSp).dim() - L.restrict_to(S).dim());
        for (std::size_t k = 0; k < S.size(); ++k) CHECK(R.C[S[k]] == e[k]);
    }
}

TEST_CASE("generic matrices", "[gf]") {
    CHECK(find_generic_matrix(5, 3, 2) == Mat{{1, 1}, {1, 2}, {1, 3}});
    CHECK(find_generic_matrix(2, 2, 1) == Mat{{1}, {1}});
    CHECK_FALSE(find_generic_matrix_opt(2, 3, 2).has_value());
    CHECK_THROWS_AS(find_generic_matrix(2, 3, 2), DesignError);

    // determinant-scan oracle for q x 2 over small primes
    for (int p : {3, 5, 7})
        for (int q = 2; q <= 4; ++q) {
            std::optional<Mat> first;
            const int cells = 2 * q;
            long long total = 1;
            for (int k = 0; k < cells; ++k) total *= p;
            for (long long code = 0; code < total && !first; ++code) {
                Mat M = zero_mat(q, 2);
                long long u = code;
                for (int k = cells - 1; k >= 0; --k) { M[k / 2][k % 2] = static_cast<int>(u % p); u /= p; }
                bool ok = true;
                for (auto& row : M) for (int x : row) ok = ok && x != 0;
                for (int i = 0; i < q && ok; ++i)
                    for (int j = i + 1; j < q && ok; ++j) ok = det2(M, i, j, p) != 0;
                if (ok) first = M;
            }
            INFO("p=" << p << " q=" << q);
            CHECK(find_generic_matrix_opt(p, q, 2) == first);
        }
}

TEST_CASE("Q matrices", "[gf]") {
    struct Case { int p, q, r; };
    for (auto c : {Case{2, 2, 1}, Case{2, 3, 1}, Case{2, 4, 1}, Case{3, 2, 1}, Case{3, 4, 1}, Case{3, 2, 2}}) {
        Field F(c.p, 1);
        Mat M = find_generic_matrix(c.p, c.q, c.r);
        std::set<Mat> Qs;
        for_each_subset(iota_vec(c.q), c.r, [&](const VSet& I) {
            Mat Q = Q_of(F, M, I);
            Qs.insert(Q);
            // e^I M Q^I = e^I
            Mat EIM;
            for (int i : I) EIM.push_back(M[i]);
            CHECK(mat_mul(F, EIM, Q) == unit_rows(I, c.q));
        });
        CHECK(static_cast<long long>(Qs.size()) == binom(c.q, c.r));
        // every Q in F_p^{r x q} fixes at most r unit vectors
        const int cells = c.r * c.q;
        long long total = 1;
        for (int k = 0; k < cells; ++k) total *= c.p;
        int worst = 0;
        for (long long code = 0; code < total; ++code) {
            Mat Q = zero_mat(c.r, c.q);
            long long u = code;
            for (int k = 0; k < cells; ++k) { Q[k / c.q][k % c.q] = static_cast<int>(u % c.p); u /= c.p; }
            Mat MQ = mat_mul(F, M, Q);
            int fixed = 0;
            for (int i = 0; i < c.q; ++i) {
                bool unit = true;
                for (int j = 0; j < c.q; ++j) unit = unit && MQ[i][j] == (i == j ? 1 : 0);
                fixed += unit;
            }
            worst = std::max(worst, fixed);
        }
        CHECK(worst <= c.r);
    }
}
