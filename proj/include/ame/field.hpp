#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ame/errors.hpp"

namespace ame {

// Canonical encoded residue. Prime fields store the residue in [0, p); extension
// fields store the coefficient vector of the polynomial representative read as a
// base-p integer (low-degree digit least significant), so the encoding ranges over
// [0, p^m); square-free composite rings store the integer in [0, d).
using FieldElement = std::uint64_t;

enum class FieldKind { Prime, PrimePower, CompositeSquareFree };

bool is_prime(std::uint64_t n);

// Arithmetic context: F_p, F_{p^m}, or the ring Z_d for square-free d.
// Immutable after construction; all operations are const and thread-safe.
class FieldSpec {
public:
    static FieldSpec prime(std::uint64_t p);

    // Extension field with an explicit monic irreducible modulus (coefficients
    // low-to-high, length m+1). Irreducibility over F_p is verified.
    static FieldSpec prime_power(std::uint64_t p, unsigned m, std::vector<std::uint64_t> modulus);

    // Extension field with the default modulus: the lexicographically smallest
    // monic irreducible of degree m, coefficients compared low-degree-first.
    static FieldSpec prime_power(std::uint64_t p, unsigned m);

    static FieldSpec composite(std::vector<std::uint64_t> primes);

    FieldKind kind() const { return kind_; }
    std::uint64_t cardinality() const { return cardinality_; }

    // p for Prime and PrimePower; smallest prime factor is not meaningful for
    // composite rings, so this throws WrongFieldKind there.
    std::uint64_t characteristic() const;

    unsigned degree() const { return degree_; }                       // m (1 for Prime)
    const std::vector<std::uint64_t>& modulus() const;                // PrimePower only
    const std::vector<std::uint64_t>& primes() const;                 // Composite only

    bool contains(FieldElement a) const { return a < cardinality_; }

    FieldElement zero() const { return 0; }
    FieldElement one() const { return 1 % cardinality_; }

    FieldElement add(FieldElement a, FieldElement b) const;
    FieldElement sub(FieldElement a, FieldElement b) const;
    FieldElement mul(FieldElement a, FieldElement b) const;
    FieldElement neg(FieldElement a) const;
    FieldElement inv(FieldElement a) const; // throws DivisionByZero on 0 / non-units

    // Tr_{F_{p^m}/F_p}(x) = x + x^p + ... + x^{p^{m-1}}; result is in the prime
    // subfield, returned as a residue < p. Throws WrongFieldKind unless PrimePower.
    FieldElement trace_to_prime(FieldElement a) const;

    bool operator==(const FieldSpec& other) const;
    bool operator!=(const FieldSpec& other) const { return !(*this == other); }

private:
    FieldSpec() = default;

    FieldKind kind_ = FieldKind::Prime;
    std::uint64_t p_ = 0;           // characteristic (Prime/PrimePower)
    unsigned degree_ = 1;
    std::uint64_t cardinality_ = 0;
    std::vector<std::uint64_t> modulus_; // monic, length degree_+1, PrimePower only
    std::vector<std::uint64_t> primes_;  // sorted, Composite only
};

// Checked binary ops for values tagged with possibly different specs.
FieldElement field_add(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b);
FieldElement field_sub(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b);
FieldElement field_mul(const FieldSpec& sa, FieldElement a, const FieldSpec& sb, FieldElement b);

// CRT: unique x in [0, prod primes) with x = residues[i] mod primes[i].
std::uint64_t crt_combine(std::span<const std::uint64_t> residues,
                          std::span<const std::uint64_t> primes);
std::vector<std::uint64_t> crt_split(std::uint64_t x, std::span<const std::uint64_t> primes);

// Dense row-major matrix over a single field.
class FieldMatrix {
public:
    FieldMatrix(std::size_t rows, std::size_t cols, FieldSpec field);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const FieldSpec& field() const { return field_; }

    FieldElement at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, FieldElement v);

    std::span<const FieldElement> entries() const { return entries_; }

    FieldMatrix transposed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    FieldSpec field_;
    std::vector<FieldElement> entries_;
};

// Row-space dimension via Gaussian elimination on a working copy. Pivots are the
// first nonzero entry in column order; exact arithmetic needs no magnitude
// heuristics. Throws CompositeFieldRank for composite rings (split first).
unsigned rank(const FieldMatrix& m);

} // namespace ame
