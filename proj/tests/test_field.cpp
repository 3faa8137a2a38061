#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ame/field.hpp"
#include "ame/rng.hpp"

#include <array>
#include <vector>

using namespace ame;

namespace {

// Test-only oracle: rank as the size of the largest linearly independent row
// subset, with independence decided by enumerating all p^k coefficient vectors.
unsigned brute_force_rank(const FieldMatrix& m) {
    const FieldSpec& f = m.field();
    const std::size_t rows = m.rows(), cols = m.cols();
    unsigned best = 0;
    for (std::uint32_t subset = 0; subset < (1u << rows); ++subset) {
        std::vector<std::size_t> members;
        for (std::size_t r = 0; r < rows; ++r)
            if (subset >> r & 1) members.push_back(r);
        if (members.size() <= best) continue;

        std::uint64_t combos = 1;
        for (std::size_t i = 0; i < members.size(); ++i) combos *= f.cardinality();
        bool independent = true;
        for (std::uint64_t code = 1; code < combos && independent; ++code) {
            std::uint64_t c = code;
            std::vector<FieldElement> coef(members.size());
            for (auto& x : coef) {
                x = c % f.cardinality();
                c /= f.cardinality();
            }
            bool all_zero = true;
            for (std::size_t col = 0; col < cols && all_zero; ++col) {
                FieldElement acc = 0;
                for (std::size_t i = 0; i < members.size(); ++i)
                    acc = f.add(acc, f.mul(coef[i], m.at(members[i], col)));
                if (acc != 0) all_zero = false;
            }
            if (all_zero) independent = false; // nontrivial kernel vector found
        }
        if (independent) best = static_cast<unsigned>(members.size());
    }
    return best;
}

FieldMatrix random_matrix(std::size_t rows, std::size_t cols, const FieldSpec& f, CounterRng& rng) {
    FieldMatrix m(rows, cols, f);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.next_below(f.cardinality()));
    return m;
}

} // namespace

TEST_CASE("prime field basics") {
    const auto f7 = FieldSpec::prime(7);
    CHECK(f7.inv(3) == 5); // 3*5 = 15 = 1 mod 7
    CHECK(f7.mul(3, f7.inv(3)) == 1);

    const auto f73 = FieldSpec::prime(73);
    CHECK(f73.add(59, 14) == 0);
    CHECK(f73.sub(0, 14) == 59);
    CHECK(f73.neg(0) == 0);
}

TEST_CASE("F4 multiplication table") {
    // F_4 = F_2[x]/(x^2+x+1); encodings 0,1,x=2,x+1=3
    const auto f4 = FieldSpec::prime_power(2, 2);
    CHECK(f4.modulus() == std::vector<std::uint64_t>{1, 1, 1});
    CHECK(f4.mul(2, 2) == 3); // x * x = x + 1
    CHECK(f4.mul(2, 3) == 1); // x * (x+1) = x^2 + x = 1
    CHECK(f4.mul(3, 3) == 2); // (x+1)^2 = x
    CHECK(f4.add(2, 3) == 1);
    CHECK(f4.inv(2) == 3);
    CHECK(f4.inv(3) == 2);
}

TEST_CASE("division by zero and non-units") {
    const auto f5 = FieldSpec::prime(5);
    CHECK_THROWS_AS((void)f5.inv(0), DivisionByZero);
    const auto f4 = FieldSpec::prime_power(2, 2);
    CHECK_THROWS_AS((void)f4.inv(0), DivisionByZero);
    const auto z6 = FieldSpec::composite({2, 3});
    CHECK_THROWS_AS((void)z6.inv(2), DivisionByZero); // 2 is a zero divisor mod 6
    CHECK(z6.inv(5) == 5);                            // 5*5 = 25 = 1 mod 6
}

TEST_CASE("mixed-field operands rejected") {
    const auto f5 = FieldSpec::prime(5);
    const auto f7 = FieldSpec::prime(7);
    CHECK_THROWS_AS((void)field_add(f5, 1, f7, 1), MixedField);
    CHECK_THROWS_AS((void)field_mul(f5, 1, f7, 1), MixedField);
    CHECK(field_add(f5, 3, f5, 4) == 2);
}

TEST_CASE("a * inv(a) == 1 across field kinds") {
    CounterRng rng = CounterRng::derive(11, 0);
    for (const auto& f : {FieldSpec::prime(2), FieldSpec::prime(3), FieldSpec::prime(73),
                          FieldSpec::prime(4294967291ULL), // largest prime < 2^32
                          FieldSpec::prime_power(2, 2), FieldSpec::prime_power(3, 2),
                          FieldSpec::prime_power(2, 4)}) {
        for (int i = 0; i < 200; ++i) {
            FieldElement a = rng.next_below(f.cardinality());
            if (a == 0) continue;
            CHECK(f.mul(a, f.inv(a)) == f.one());
        }
    }
}

TEST_CASE("ring axioms hold on random samples") {
    CounterRng rng = CounterRng::derive(12, 0);
    for (const auto& f : {FieldSpec::prime(73), FieldSpec::prime_power(2, 3),
                          FieldSpec::prime_power(5, 2), FieldSpec::composite({2, 3, 5})}) {
        for (int i = 0; i < 300; ++i) {
            const FieldElement a = rng.next_below(f.cardinality());
            const FieldElement b = rng.next_below(f.cardinality());
            const FieldElement c = rng.next_below(f.cardinality());
            CHECK(f.add(a, b) == f.add(b, a));
            CHECK(f.mul(a, b) == f.mul(b, a));
            CHECK(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)));
            CHECK(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)));
            CHECK(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)));
            CHECK(f.add(a, f.neg(a)) == 0);
        }
    }
}

TEST_CASE("trace map: F4 values") {
    const auto f4 = FieldSpec::prime_power(2, 2);
    CHECK(f4.trace_to_prime(0) == 0);
    CHECK(f4.trace_to_prime(1) == 0); // 1 + 1^2 = 0 over F_2
    CHECK(f4.trace_to_prime(2) == 1); // x + x^2 = x + (x+1) = 1
    CHECK(f4.trace_to_prime(3) == 1);

    const auto f5 = FieldSpec::prime(5);
    CHECK_THROWS_AS((void)f5.trace_to_prime(1), WrongFieldKind);
}

TEST_CASE("trace map is F_p-linear") {
    CounterRng rng = CounterRng::derive(13, 0);
    for (const auto& f : {FieldSpec::prime_power(2, 2), FieldSpec::prime_power(2, 4),
                          FieldSpec::prime_power(3, 3), FieldSpec::prime_power(7, 2)}) {
        const std::uint64_t p = f.characteristic();
        for (int i = 0; i < 1000; ++i) {
            const FieldElement x = rng.next_below(f.cardinality());
            const FieldElement y = rng.next_below(f.cardinality());
            const FieldElement alpha = rng.next_below(p); // scalar from the prime subfield
            const FieldElement lhs = f.trace_to_prime(f.add(f.mul(alpha, x), y));
            const FieldElement rhs =
                (alpha * f.trace_to_prime(x) + f.trace_to_prime(y)) % p;
            CHECK(lhs == rhs);
            CHECK(f.trace_to_prime(x) < p);
        }
    }
}

TEST_CASE("crt combine/split: published entries") {
    const std::array<std::uint64_t, 2> primes{73, 137};

    const std::array<std::uint64_t, 2> r12{14, 87};
    CHECK(crt_combine(r12, primes) == 87);

    const std::array<std::uint64_t, 2> r13{59, 48};
    CHECK(crt_combine(r13, primes) == 2103);

    const std::array<std::uint64_t, 2> zeros{0, 0};
    CHECK(crt_combine(zeros, primes) == 0);

    CHECK(crt_split(2103, primes) == std::vector<std::uint64_t>{59, 48});
    CHECK(crt_split(87, primes) == std::vector<std::uint64_t>{14, 87});
    CHECK(crt_split(0, primes) == std::vector<std::uint64_t>{0, 0});
}

TEST_CASE("crt round trips") {
    CounterRng rng = CounterRng::derive(14, 0);
    const std::vector<std::uint64_t> primes{2, 3, 5, 7, 73, 137};
    std::uint64_t d = 1;
    for (auto q : primes) d *= q;
    for (int i = 0; i < 500; ++i) {
        const std::uint64_t x = rng.next_below(d);
        CHECK(crt_combine(crt_split(x, primes), primes) == x);
    }
    for (int i = 0; i < 500; ++i) {
        std::vector<std::uint64_t> residues;
        for (auto q : primes) residues.push_back(rng.next_below(q));
        CHECK(crt_split(crt_combine(residues, primes), primes) == residues);
    }
}

TEST_CASE("crt error paths") {
    const std::array<std::uint64_t, 2> primes{73, 137};
    const std::array<std::uint64_t, 1> one_residue{5};
    CHECK_THROWS_AS((void)crt_combine(one_residue, primes), DimensionMismatch);

    const std::array<std::uint64_t, 2> dup{73, 73};
    const std::array<std::uint64_t, 2> r{1, 2};
    CHECK_THROWS_AS((void)crt_combine(r, dup), NonDistinctPrimes);

    const std::array<std::uint64_t, 2> bad_res{73, 0};
    CHECK_THROWS_AS((void)crt_combine(bad_res, primes), OutOfRange);
    CHECK_THROWS_AS((void)crt_split(10001, primes), OutOfRange);
}

TEST_CASE("rank: pinned examples") {
    const auto f5 = FieldSpec::prime(5);
    FieldMatrix zero(3, 4, f5);
    CHECK(rank(zero) == 0);

    const auto f2 = FieldSpec::prime(2);
    FieldMatrix id(3, 4, f2);
    for (std::size_t i = 0; i < 3; ++i) id.set(i, i, 1);
    CHECK(rank(id) == 3);

    const auto f3 = FieldSpec::prime(3);
    FieldMatrix dep(2, 2, f3);
    dep.set(0, 0, 2);
    dep.set(0, 1, 4 % 3);
    dep.set(1, 0, 1);
    dep.set(1, 1, 2);
    CHECK(rank(dep) == 1); // row 0 = 2 * row 1 mod 3
}

TEST_CASE("rank rejects composite rings") {
    FieldMatrix m(2, 2, FieldSpec::composite({2, 3}));
    CHECK_THROWS_AS((void)rank(m), CompositeFieldRank);
}

TEST_CASE("rank invariants: swaps, scaling, transpose") {
    CounterRng rng = CounterRng::derive(15, 0);
    for (const auto& f : {FieldSpec::prime(2), FieldSpec::prime(3), FieldSpec::prime(73),
                          FieldSpec::prime_power(2, 2)}) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t rows = 1 + rng.next_below(10);
            const std::size_t cols = 1 + rng.next_below(10);
            FieldMatrix m = random_matrix(rows, cols, f, rng);
            const unsigned rk = rank(m);
            CHECK(rk <= std::min(rows, cols));
            CHECK(rank(m.transposed()) == rk);

            FieldMatrix swapped = m;
            const std::size_t r1 = rng.next_below(rows), r2 = rng.next_below(rows);
            for (std::size_t c = 0; c < cols; ++c) {
                const FieldElement t = swapped.at(r1, c);
                swapped.set(r1, c, swapped.at(r2, c));
                swapped.set(r2, c, t);
            }
            CHECK(rank(swapped) == rk);

            FieldMatrix scaled = m;
            const FieldElement s = 1 + rng.next_below(f.cardinality() - 1);
            const std::size_t rs = rng.next_below(rows);
            for (std::size_t c = 0; c < cols; ++c) scaled.set(rs, c, f.mul(s, scaled.at(rs, c)));
            CHECK(rank(scaled) == rk);
        }
    }
}

TEST_CASE("rank agrees with brute-force independence oracle") {
    CounterRng rng = CounterRng::derive(16, 0);
    for (const auto& f : {FieldSpec::prime(2), FieldSpec::prime(3)}) {
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t rows = 1 + rng.next_below(5);
            const std::size_t cols = 1 + rng.next_below(5);
            FieldMatrix m = random_matrix(rows, cols, f, rng);
            CHECK(rank(m) == brute_force_rank(m));
        }
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((void)FieldSpec::prime(4), OutOfRange);
    CHECK_THROWS_AS((void)FieldSpec::prime(1), OutOfRange);
    CHECK_NOTHROW((void)FieldSpec::prime(4294967291ULL));
    CHECK_THROWS_AS((void)FieldSpec::prime(4294967296ULL), OutOfRange);

    // x^2 + 1 = (x+1)^2 over F_2
    CHECK_THROWS_AS((void)FieldSpec::prime_power(2, 2, {1, 0, 1}), OutOfRange);
    CHECK_THROWS_AS((void)FieldSpec::prime_power(2, 1, {1, 1}), OutOfRange);
    CHECK_NOTHROW((void)FieldSpec::prime_power(2, 3, {1, 1, 0, 1}));

    CHECK_THROWS_AS((void)FieldSpec::composite({2, 2}), NonDistinctPrimes);
    CHECK_THROWS_AS((void)FieldSpec::composite({4, 3}), OutOfRange);
    CHECK(FieldSpec::composite({137, 73}).cardinality() == 10001);
    CHECK(FieldSpec::composite({137, 73}).primes() == std::vector<std::uint64_t>{73, 137});
}

TEST_CASE("default modulus is the lexicographically smallest irreducible") {
    // F_9: x^2 has root 0, x^2+1 has no root over F_3 -> first hit is (1,0)
    const auto f9 = FieldSpec::prime_power(3, 2);
    CHECK(f9.modulus() == std::vector<std::uint64_t>{1, 0, 1});

    // brute-force the minimum for F_8 and compare
    const auto f8 = FieldSpec::prime_power(2, 3);
    std::vector<std::vector<std::uint64_t>> candidates;
    for (std::uint64_t c0 = 0; c0 < 2; ++c0)
        for (std::uint64_t c1 = 0; c1 < 2; ++c1)
            for (std::uint64_t c2 = 0; c2 < 2; ++c2)
                candidates.push_back({c0, c1, c2, 1});
    for (const auto& cand : candidates) {
        bool irreducible = true;
        try {
            (void)FieldSpec::prime_power(2, 3, cand);
        } catch (const OutOfRange&) {
            irreducible = false;
        }
        if (irreducible) {
            CHECK(f8.modulus() == cand); // first in lexicographic order must be the default
            break;
        }
    }
}
