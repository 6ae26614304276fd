#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "tilelat/sparse_vector.hpp"

using namespace tilelat;

static SparseVector vec(std::initializer_list<std::pair<std::uint64_t, Rat>> ts) {
    std::vector<SparseVector::Term> v(ts.begin(), ts.end());
    return SparseVector::from_terms(std::move(v));
}

TEST_CASE("norm_pow on fixed vectors") {
    CHECK(norm_pow(SparseVector{}, PNorm{1}) == 0);
    CHECK(norm_pow(SparseVector{}, PNorm{2}) == 0);
    CHECK(norm_pow(vec({{0, 1}, {1, 1}}), PNorm{1}) == 2);
    CHECK(norm_pow(vec({{0, Rat(3, 5)}, {1, Rat(4, 5)}}), PNorm{2}) == 1);
    CHECK(norm_pow(vec({{0, 2}, {1, 1}}), PNorm{2}) == 5);
    CHECK(norm_pow(vec({{0, Rat(-3, 2)}}), PNorm{3}) == Rat(27, 8));
}

TEST_CASE("compare_norm orders against the p-th power of the threshold") {
    CHECK(compare_norm(vec({{0, 1}, {1, 1}}), PNorm{2}, PowThreshold{Rat(2)}) ==
          NormOrder::Equal);
    CHECK(compare_norm(SparseVector::unit(0), PNorm{1}, PowThreshold{Rat(2)}) ==
          NormOrder::Less);
    CHECK(compare_norm(vec({{0, 2}, {1, 1}}), PNorm{2}, PowThreshold{Rat(2)}) ==
          NormOrder::Greater);
}

TEST_CASE("compare_norm matches the sign of norm_pow minus c") {
    std::mt19937_64 rng(7001);
    for (int it = 0; it < 200; ++it) {
        SparseVector v = oracle::random_vector(rng, 6, 8, 2);
        for (unsigned p : {1u, 2u, 3u}) {
            Rat c = Rat(it % 13, 4);
            Rat n = oracle::naive_norm_pow(v, p);
            NormOrder expect = n < c   ? NormOrder::Less
                               : n > c ? NormOrder::Greater
                                       : NormOrder::Equal;
            CHECK(compare_norm(v, PNorm{p}, PowThreshold{c}) == expect);
        }
    }
}

TEST_CASE("arithmetic: add, scale, distance") {
    CHECK((SparseVector::unit(0) + (-SparseVector::unit(0))).is_zero());
    CHECK(distance_pow(SparseVector::unit(0), SparseVector::unit(1), PNorm{1}) == 2);
    CHECK(Rat(3, 2) * vec({{0, 1}, {1, 1}}) ==
          vec({{0, Rat(3, 2)}, {1, Rat(3, 2)}}));
    CHECK(vec({{0, 1}, {2, Rat(1, 2)}}) - vec({{0, 1}, {5, -1}}) ==
          vec({{2, Rat(1, 2)}, {5, 1}}));
}

TEST_CASE("distance_pow equals norm_pow of the difference") {
    std::mt19937_64 rng(7002);
    for (int it = 0; it < 300; ++it) {
        SparseVector a = oracle::random_vector(rng, 5, 6, 1);
        SparseVector b = oracle::random_vector(rng, 5, 6, 1);
        for (unsigned p : {1u, 2u, 3u})
            CHECK(distance_pow(a, b, PNorm{p}) ==
                  oracle::naive_norm_pow(a - b, p));
    }
}

TEST_CASE("disjoint supports split the norm additively") {
    std::mt19937_64 rng(7003);
    for (int it = 0; it < 200; ++it) {
        SparseVector a = oracle::random_vector(rng, 4, 6, 1);
        SparseVector braw = oracle::random_vector(rng, 4, 6, 1);
        // shift b's support above a's
        std::vector<SparseVector::Term> shifted;
        for (const auto& [i, c] : braw.terms()) shifted.emplace_back(i + 10, c);
        SparseVector b = SparseVector::from_terms(std::move(shifted));
        for (unsigned p : {1u, 2u, 3u})
            CHECK(norm_pow(a + b, PNorm{p}) ==
                  norm_pow(a, PNorm{p}) + norm_pow(b, PNorm{p}));
    }
}

TEST_CASE("triangle inequality holds under exact p-th power comparison") {
    std::mt19937_64 rng(7004);
    for (int it = 0; it < 150; ++it) {
        SparseVector a = oracle::random_vector(rng, 5, 8, 2);
        SparseVector b = oracle::random_vector(rng, 5, 8, 2);
        for (unsigned p : {1u, 2u, 3u}) {
            Rat t = norm_pow(a + b, PNorm{p});
            Rat s = norm_pow(a, PNorm{p});
            Rat r = norm_pow(b, PNorm{p});
            // Exact ties (e.g. proportional vectors) satisfy the inequality.
            CHECK(oracle::root_sum_leq(t, s, r, p, /*tie_means_equal=*/true));
        }
    }
}

TEST_CASE("homogeneity of norm_pow") {
    std::mt19937_64 rng(7005);
    for (int it = 0; it < 100; ++it) {
        SparseVector v = oracle::random_vector(rng, 5, 8, 2);
        Rat k(it - 50, 3);
        for (unsigned p : {1u, 2u, 3u})
            CHECK(norm_pow(k * v, PNorm{p}) ==
                  abs_pow(k, p) * norm_pow(v, PNorm{p}));
    }
}

TEST_CASE("no zero entries are ever stored") {
    SparseVector v = vec({{3, Rat(1, 2)}, {3, Rat(-1, 2)}, {1, 0}, {2, 5}});
    CHECK(v.support_size() == 1);
    CHECK(v.coeff(2) == 5);
    CHECK(v.coeff(3) == 0);
    SparseVector w = vec({{2, -5}});
    CHECK((v + w).is_zero());
}

TEST_CASE("canonical vector order is a strict total order on samples") {
    CHECK(vec_less(SparseVector{}, SparseVector::unit(0)));
    CHECK(vec_less(-SparseVector::unit(0), SparseVector{}));
    CHECK(vec_less(vec({{0, -2}}), vec({{0, 2}})));
    CHECK(!vec_less(SparseVector{}, SparseVector{}));
    // index 0 value decides before index 1
    CHECK(vec_less(vec({{0, 1}, {1, 9}}), vec({{0, 2}, {1, -9}})));
    // missing coordinate reads as zero
    CHECK(vec_less(vec({{1, 1}}), vec({{0, 1}})));

    std::mt19937_64 rng(7006);
    for (int it = 0; it < 200; ++it) {
        SparseVector a = oracle::random_vector(rng, 4, 4, 1);
        SparseVector b = oracle::random_vector(rng, 4, 4, 1);
        int rel = vec_less(a, b) + 2 * vec_less(b, a) + 4 * (a == b);
        CHECK((rel == 1 || rel == 2 || rel == 4));  // exactly one holds
    }
}
