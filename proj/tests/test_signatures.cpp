#include <catch2/catch_amalgamated.hpp>

#include "cnplab/signatures.hpp"
#include "oracles.hpp"

using namespace cnplab;

namespace {
std::vector<std::vector<int>> parts_of(const std::vector<Signature>& v) {
    std::vector<std::vector<int>> out;
    for (const auto& s : v) out.push_back(s.parts);
    return out;
}
Signature sig(std::vector<int> p) { return Signature(std::move(p)); }
} // namespace

TEST_CASE("signature enumeration matches frozen examples") {
    CHECK(parts_of(enumerate_signatures(2, 2)) ==
          std::vector<std::vector<int>>{{2, 0}, {1, 1}});
    CHECK(parts_of(enumerate_signatures(1, 3)) == std::vector<std::vector<int>>{{3}});
    CHECK(parts_of(enumerate_signatures(3, 3)) ==
          std::vector<std::vector<int>>{{3, 0, 0}, {2, 1, 0}, {1, 1, 1}});
    CHECK(parts_of(enumerate_signatures(2, 0)) == std::vector<std::vector<int>>{{0, 0}});
}

TEST_CASE("signature enumeration: counts and shape invariants") {
    for (int r = 1; r <= 4; ++r) {
        for (int n = 0; n <= 12; ++n) {
            const auto sigs = enumerate_signatures(r, n);
            CHECK(static_cast<long>(sigs.size()) == oracles::partition_count(n, r));
            for (std::size_t i = 0; i < sigs.size(); ++i) {
                CHECK(sigs[i].length() == r);
                CHECK(is_weakly_decreasing(sigs[i].parts));
                CHECK(sigs[i].degree() == n);
                // descending lexicographic within a degree block
                if (i + 1 < sigs.size()) CHECK(sigs[i].parts > sigs[i + 1].parts);
            }
        }
    }
}

TEST_CASE("canonical order sorts by degree then descending lex") {
    CHECK(canonical_less({1}, {2}));
    CHECK(canonical_less({2, 0}, {1, 1}));
    CHECK_FALSE(canonical_less({1, 1}, {2, 0}));
    CHECK_FALSE(canonical_less({2, 1}, {2, 1}));
    // trailing zeros are immaterial
    CHECK_FALSE(canonical_less({1, 0}, {1}));
    CHECK_FALSE(canonical_less({1}, {1, 0}));
}

TEST_CASE("dominance order agrees with canonical order within a degree") {
    CHECK(dominated_by({1, 1}, {2, 0}));
    CHECK_FALSE(dominated_by({2, 0}, {1, 1}));
    CHECK(dominated_by({2, 1}, {3, 0}));
    CHECK(dominated_by({2, 1}, {2, 1}));
    CHECK_FALSE(dominated_by({3}, {2, 1}));
    for (int n = 1; n <= 6; ++n) {
        for (const auto& lam : enumerate_signatures(3, n))
            for (const auto& mu : enumerate_signatures(3, n)) {
                if (lam.parts != mu.parts && dominated_by(mu.key(), lam.key()))
                    CHECK(canonical_less(lam.key(), mu.key()));
            }
    }
}

TEST_CASE("generalized Pochhammer frozen values") {
    CHECK(generalized_pochhammer(Rat(3), sig({1, 1}), 2) == Rat(6)); // 3 * (3 - 1)
    CHECK(generalized_pochhammer(Rat(2), sig({2}), 2) == Rat(6));    // 2 * 3
    CHECK(generalized_pochhammer(Rat(2), sig({2}), 1) == Rat(6)); // one row: a plays no role
    CHECK(generalized_pochhammer(Rat(5), sig({}), 2) == Rat(1));
    CHECK(generalized_pochhammer(Rat(5), sig({0, 0}), 2) == Rat(1));
    CHECK(generalized_pochhammer(rat(1, 2), sig({1}), 2) == rat(1, 2));
    // a = 1 shifts rows by halves: (nu)_(1,1) = nu * (nu - 1/2)
    CHECK(generalized_pochhammer(Rat(2), sig({1, 1}), 1) == Rat(3));
    // zeros at integer truncation points
    CHECK(generalized_pochhammer(Rat(0), sig({1}), 2) == Rat(0));
    CHECK(generalized_pochhammer(Rat(1), sig({1, 1}), 2) == Rat(0));
}

TEST_CASE("generalized Pochhammer is a monic polynomial of degree |s| in nu") {
    // the |s|-th finite difference at unit steps of a monic degree-|s|
    // polynomial equals |s|!
    const std::vector<std::vector<int>> shapes = {{3}, {2, 1}, {2, 2}, {3, 1, 1}};
    for (int a = 0; a <= 3; ++a) {
        for (const auto& sp : shapes) {
            const Signature s = sig(sp);
            const int n = s.degree();
            std::vector<Rat> vals;
            for (int t = 0; t <= n; ++t)
                vals.push_back(generalized_pochhammer(Rat(t), s, a));
            for (int level = 0; level < n; ++level)
                for (std::size_t i = 0; i + 1 + static_cast<std::size_t>(level) < vals.size(); ++i)
                    vals[i] = vals[i + 1] - vals[i];
            CHECK(vals[0] == factorial_rat(n));
        }
    }
}

TEST_CASE("lower neighbors") {
    CHECK(parts_of(lower_neighbors(sig({2, 0}))) == std::vector<std::vector<int>>{{1, 0}});
    CHECK(parts_of(lower_neighbors(sig({1, 1}))) == std::vector<std::vector<int>>{{1, 0}});
    CHECK(parts_of(lower_neighbors(sig({2, 1}))) ==
          std::vector<std::vector<int>>{{1, 1}, {2, 0}});
    CHECK(parts_of(lower_neighbors(sig({1}))) == std::vector<std::vector<int>>{{0}});
    CHECK_THROWS_AS(lower_neighbors(sig({0, 0})), validation_error);

    for (int n = 1; n <= 6; ++n)
        for (const auto& s : enumerate_signatures(3, n)) {
            const auto down = lower_neighbors(s);
            CHECK_FALSE(down.empty());
            for (const auto& t : down) {
                CHECK(t.degree() == n - 1);
                CHECK(is_weakly_decreasing(t.parts));
                CHECK(t.length() == s.length());
            }
        }
}

TEST_CASE("componentwise signature comparison") {
    CHECK(signature_order(sig({2, 1}), sig({1, 1})) == SigOrder::greater);
    CHECK(signature_order(sig({1, 1}), sig({2, 1})) == SigOrder::less);
    CHECK(signature_order(sig({2, 0}), sig({1, 1})) == SigOrder::incomparable);
    CHECK(signature_order(sig({2, 1}), sig({2, 1})) == SigOrder::equal);
    CHECK_THROWS_AS(signature_order(sig({1}), sig({1, 0})), validation_error);
}

TEST_CASE("Cartan parameter validation and derived quantities") {
    const CartanParams ball(1, 0, 4); // unit ball in C^5: rank one, b = d - 1
    CHECK(ball.dimension() == 5);
    CHECK(ball.genus() == 6);

    const CartanParams c22(2, 2, 0); // 2x2 matrix ball, genus m + n
    CHECK(c22.dimension() == 4);
    CHECK(c22.genus() == 4);
    CHECK(c22.alpha() == Rat(1));

    const CartanParams c21(2, 1, 0); // symmetric 2x2 matrices, genus r + 1
    CHECK(c21.dimension() == 3);
    CHECK(c21.genus() == 3);
    CHECK(c21.alpha() == Rat(2));

    const CartanParams c32(3, 2, 0); // 3x3 matrix ball
    CHECK(c32.dimension() == 9);
    CHECK(c32.genus() == 6);

    CHECK_THROWS_AS(CartanParams(0, 2, 0), validation_error);
    CHECK_THROWS_AS(CartanParams(2, -1, 0), validation_error);
    CHECK_THROWS_AS(CartanParams(2, 2, -1), validation_error);
    // alpha is only defined for rank >= 2 with positive off-diagonal multiplicity
    CHECK_THROWS_AS(CartanParams(2, 0, 0).alpha(), validation_error);
    CHECK_THROWS_AS(CartanParams(1, 0, 0).alpha(), validation_error);
}

TEST_CASE("signature struct basics") {
    const Signature s = sig({2, 1});
    CHECK(s.degree() == 3);
    CHECK(s.key() == Partition{2, 1});
    CHECK(sig({2, 1, 0}).key() == s.key());
    CHECK(s.str() == "(2,1)");
    CHECK_THROWS_AS(sig({1, 2}), validation_error);
    CHECK_THROWS_AS(sig({1, -1}), validation_error);
    CHECK(signature_from_partition({2, 1}, 3).parts == std::vector<int>{2, 1, 0});
    CHECK_THROWS_AS(signature_from_partition({2, 1}, 1), validation_error);
}
