#include <catch_amalgamated.hpp>

#include "designforge/template.hpp"

using namespace designforge;

namespace {

Template complete_template(int p, int a, int q, int r, std::uint64_t seed) {
    return build_template(nullptr, make_field(p, a), find_generic_matrix(p, q, r), seed);
}

// Max line mass by scanning every (point, direction) pair.
long long brute_line_mass(const Field& F, const std::vector<VSet>& sets, int s) {
    std::vector<std::vector<int>> vecs;
    for (const VSet& e : sets) {
        std::vector<int> v = e;
        std::sort(v.begin(), v.end());
        do vecs.push_back(v); while (std::next_permutation(v.begin(), v.end()));
    }
    long long best = 0;
    const int n = F.size();
    std::vector<int> v(s, 0), d(s, 0);
    long long npts = 1, ndirs = 1;
    for (int k = 0; k < s; ++k) { npts *= n; ndirs *= F.p(); }
    for (long long pi = 0; pi < npts; ++pi) {
        long long u = pi;
        for (int k = 0; k < s; ++k) { v[k] = static_cast<int>(u % n); u /= n; }
        for (long long di = 1; di < ndirs; ++di) {
            long long w = di;
            for (int k = 0; k < s; ++k) { d[k] = static_cast<int>(w % F.p()); w /= F.p(); }
            std::set<std::vector<int>> line;
            for (auto& pt : basic_line(F, v, d)) line.insert(pt);
            long long m = 0;
            for (auto& x : vecs) m += line.count(x);
            best = std::max(best, m);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("template on the complete complex", "[template]") {
    double sum = 0;
    const double pred = predicted_covered_fraction(3, 2, {1, 1, 1, 1});
    CHECK(pred == Catch::Approx(1.0 / 36));
    for (std::uint64_t s = 1; s <= 5; ++s) {
        auto T = complete_template(5, 3, 3, 2, s);
        CHECK_FALSE(template_invariant_violation(T).has_value());
        CHECK(template_dimension_ok(T));
        const double f = covered_fraction(T);
        CHECK(std::abs(f / pred - 1) <= 0.2);
        sum += f;
        CHECK(T.covered_count() == 3 * T.blocks.size());
    }
    CHECK(std::abs(sum / 5 / pred - 1) <= 0.2);
}

TEST_CASE("template resolver", "[template]") {
    auto T = complete_template(5, 2, 3, 2, 7);
    for (auto& [e, b] : T.block_of) {
        auto f = template_formula_resolve(T, e);
        REQUIRE(f);
        CHECK(*f == b);
        CHECK(is_subset(e, b));
        CHECK(b.size() == 3u);
    }
    // dependent pair: 0 and 1 span one dimension
    CHECK_FALSE(template_resolve(T, {0, 1}).has_value());
    CHECK_FALSE(template_formula_resolve(T, {0, 1}).has_value());
    // every r-subset of a block resolves to it
    for (const VSet& b : T.blocks)
        for_each_subset(b, 2, [&](const VSet& e) { CHECK(template_resolve(T, e) == b); });
}

TEST_CASE("template on a random host", "[template]") {
    auto G = std::make_shared<const Complex>(random_complex(125, {1.0, 0.9, 0.9}, 3));
    auto T = build_template(G, make_field(5, 3), find_generic_matrix(5, 3, 2), 4);
    for (auto& [e, b] : T.block_of) CHECK(G->contains(e));
    for (const VSet& b : T.blocks) CHECK(G->contains(b));
    CHECK_FALSE(template_invariant_violation(T).has_value());
    const double f = covered_fraction(T);
    const double pred = predicted_covered_fraction(3, 2, {1, 1, 0.9, 0.9});
    CHECK(std::abs(f / pred - 1) <= 0.3);
    CHECK_THROWS_AS(build_template(std::make_shared<const Complex>(complete_complex(100, 3)), make_field(5, 3),
                                   find_generic_matrix(5, 3, 2), 1),
                    DesignError);
}

TEST_CASE("random sigma keeps the invariants", "[template]") {
    TemplateOptions opt;
    opt.random_sigma = true;
    auto T = build_template(nullptr, make_field(7, 2), find_generic_matrix(7, 3, 2), 9, opt);
    CHECK_FALSE(template_invariant_violation(T).has_value());
    CHECK(template_dimension_ok(T));
    for (auto& [e, b] : T.block_of) CHECK(template_formula_resolve(T, e) == b);
}

TEST_CASE("M-properties", "[template]") {
    auto T = complete_template(5, 2, 3, 2, 2);
    const VSet b = *T.blocks.begin();
    auto one = check_M_properties(T, {{b[0], b[1]}});
    CHECK(one.M_simple);
    auto two = check_M_properties(T, {{b[0], b[1]}, {b[0], b[2]}});
    CHECK_FALSE(two.M_simple);
    CHECK(two.witness == b);
    std::vector<VSet> J;
    for (auto& [e, blk] : T.block_of) {
        if (J.size() == 40) break;
        J.push_back(e);
    }
    auto rep = check_M_properties(T, J);
    CHECK(rep.theta_hat == Catch::Approx(static_cast<double>(rep.max_line_mass) / T.n()));
}

TEST_CASE("basic line mass matches brute force", "[template]") {
    Field F(2, 4);
    Rng rng(8);
    for (int t = 0; t < 5; ++t) {
        std::set<VSet> sets;
        while (sets.size() < 12) {
            int a = static_cast<int>(uniform_int(rng, 0, 15)), b = static_cast<int>(uniform_int(rng, 0, 15));
            if (a != b) sets.insert(make_set({a, b}));
        }
        std::vector<VSet> v(sets.begin(), sets.end());
        CHECK(max_basic_line_mass(F, v, 2) == brute_line_mass(F, v, 2));
    }
}

TEST_CASE("cascade extensions", "[template]") {
    for (auto [p, q, r] : std::vector<std::tuple<int, int, int>>{{2, 3, 1}, {2, 2, 1}, {3, 2, 1}, {3, 3, 1}}) {
        INFO("p=" << p << " q=" << q << " r=" << r);
        auto E = cascade_extension(p, q, r);
        auto c = check_cascade(E);
        CHECK(c.well_defined);
        CHECK(c.f2_decomposes);
        CHECK(c.g_decomposes);
        CHECK(c.f1Q_is_g2Q0);
        CHECK(c.closed_form_fc);
        CHECK(c.span_f1e_is_fc);
        CHECK(c.g10_is_f1e);
    }
    CHECK_THROWS_AS(cascade_extension(2, 3, 2), DesignError);
}

TEST_CASE("applying cascades", "[template]") {
    const Mat M{{1}, {2}};
    auto E = cascade_extension(3, 2, 1, M);
    auto F = make_field(3, 10);
    int ok = 0;
    for (int s = 0; s < 5; ++s) {
        auto T = build_template(nullptr, F, M, 100 + s);
        Rng rng(s);
        VSet tgt;
        while (tgt.size() < 2) {
            int x = static_cast<int>(uniform_int(rng, 0, F->size() - 1));
            if (std::find(tgt.begin(), tgt.end(), x) == tgt.end()) tgt.push_back(x);
        }
        std::sort(tgt.begin(), tgt.end());
        auto y = plant_cascade(T, E, tgt, s);
        REQUIRE(y);
        std::set<VSet> before;
        for (auto& [e, b] : T.block_of) before.insert(e);
        auto R = apply_y_cascade(T, E, *y);
        REQUIRE(R.success);
        ok += T.blocks.count(tgt) == 1;
        std::set<VSet> after;
        for (auto& [e, b] : T.block_of) after.insert(e);
        CHECK(before == after);
        CHECK_FALSE(template_invariant_violation(T).has_value());
        for_each_subset(tgt, 1, [&](const VSet& e) { CHECK(template_resolve(T, e) == tgt); });
    }
    CHECK(ok == 5);
}

TEST_CASE("disjoint cascades commute", "[template]") {
    const Mat M{{1}, {2}};
    auto E = cascade_extension(3, 2, 1, M);
    auto F = make_field(3, 10);
    auto T = build_template(nullptr, F, M, 42);
    auto y1 = plant_cascade(T, E, {10, 20000}, 1);
    REQUIRE(y1);
    auto y2 = plant_cascade(T, E, {30000, 50000}, 2);
    REQUIRE(y2);
    // planting the second must not disturb the first
    REQUIRE(detail::cascade_obstacle(T, E, *y1, nullptr).empty());
    auto i1 = detail::cascade_images(T, E, *y1), i2 = detail::cascade_images(T, E, *y2);
    std::set<int> s1(i1.begin(), i1.end());
    for (int v : i2) REQUIRE_FALSE(s1.count(v));
    Template A = T, B = T;
    REQUIRE(apply_y_cascade(A, E, *y1).success);
    REQUIRE(apply_y_cascade(A, E, *y2).success);
    REQUIRE(apply_y_cascade(B, E, *y2).success);
    REQUIRE(apply_y_cascade(B, E, *y1).success);
    CHECK(A.blocks == B.blocks);
}

TEST_CASE("unplanted cascade search reports failure honestly", "[template]") {
    const Mat M{{1}, {2}};
    auto E = cascade_extension(3, 2, 1, M);
    auto T = build_template(nullptr, make_field(3, 10), M, 5);
    auto before = T.blocks;
    auto R = apply_cascade(T, E, {3, 4}, 1, 200);
    if (!R.success) {
        CHECK_FALSE(R.reason.empty());
        CHECK(T.blocks == before);
    } else {
        CHECK(T.blocks.count({3, 4}) == 1);
    }
}
