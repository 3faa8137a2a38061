#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "ame/field.hpp"

namespace ame {

enum class EntropyUnit { Bits, Nats };

// Nonempty proper subset S of the parties, encoded as an n-bit mask.
struct Bipartition {
    std::uint64_t mask = 0;

    int size() const { return std::popcount(mask); }
    bool contains(int party) const { return mask >> party & 1; }
    bool operator==(const Bipartition&) const = default;
};

inline std::uint64_t full_mask(int n) { return (std::uint64_t{1} << n) - 1; }

inline std::uint64_t complement_mask(std::uint64_t mask, int n) {
    return ~mask & full_mask(n);
}

// Canonical representative of the complement class {S, S-bar}: the smaller side,
// with the numerically smaller mask breaking the |S| = n/2 tie.
inline bool is_canonical(std::uint64_t mask, int n) {
    const std::uint64_t comp = complement_mask(mask, n);
    const int k = std::popcount(mask), kc = std::popcount(comp);
    if (k != kc) return k < kc;
    return mask < comp;
}

inline std::uint64_t canonical_mask(std::uint64_t mask, int n) {
    return is_canonical(mask, n) ? mask : complement_mask(mask, n);
}

// Dense class index in [0, 2^{n-1}): each class has exactly one side containing
// party 0; drop that known bit. Used for the search module's rank cache.
inline std::size_t class_index(std::uint64_t mask, int n) {
    const std::uint64_t with0 = (mask & 1) ? mask : complement_mask(mask, n);
    return static_cast<std::size_t>(with0 >> 1);
}

// Symmetric zero-diagonal N x N matrix of field residues; the generator of the
// quadratic phase state.
class PhaseMatrix {
public:
    // Empty placeholder (0 parties); any real use requires the sized constructor.
    PhaseMatrix() : field_(FieldSpec::prime(2)) {}

    PhaseMatrix(int n_parties, FieldSpec field);

    static PhaseMatrix from_entries(int n_parties, FieldSpec field,
                                    const std::vector<FieldElement>& entries);

    int n_parties() const { return n_; }
    const FieldSpec& field() const { return field_; }

    FieldElement at(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * n_ + j];
    }

    // Writes both (i,j) and (j,i); the diagonal is pinned to zero.
    void set_symmetric(int i, int j, FieldElement v);

    const std::vector<FieldElement>& entries() const { return entries_; }

    bool operator==(const PhaseMatrix&) const = default;

private:
    int n_ = 0;
    FieldSpec field_;
    std::vector<FieldElement> entries_;
};

// All subsets with 1 <= |S| <= max_size in ascending mask order; with dedup,
// only canonical complement-class representatives.
std::vector<Bipartition> enumerate_bipartitions(int n, int max_size, bool dedup);

// The |S| x (N-|S|) block with rows in S (ascending) and columns in the complement.
FieldMatrix cut_submatrix(const PhaseMatrix& p, Bipartition s);

unsigned cut_rank(const PhaseMatrix& p, Bipartition s);

// Exact product representation prod_i base_i^{-rank_i}; survives regimes where
// the plain float underflows precision (10001^-8 and beyond).
struct ExactPurity {
    std::vector<std::pair<std::uint64_t, unsigned>> factors; // (base, rank exponent)

    double value() const;
    double neg_log(EntropyUnit unit) const; // the Renyi-2 entropy of this purity
};

// Tr(rho_S^2) = q^{-rk(P_{S,S-bar})}
ExactPurity purity(const PhaseMatrix& p, Bipartition s);

double renyi2_entropy(const PhaseMatrix& p, Bipartition s, EntropyUnit unit);

// Sum of squared rank deficits over deduplicated classes with |S| <= floor(N/2).
// Zero exactly on AME certificates.
std::uint64_t cost(const PhaseMatrix& p);

struct SizeRecord {
    int size = 0;
    std::uint64_t class_count = 0;   // deduplicated complement classes
    std::uint64_t subset_count = 0;  // raw subsets of this size (non-dedup convention)
    std::uint64_t saturated = 0;     // classes at full rank
    std::uint64_t failed_subsets = 0;
    unsigned min_rank = 0;
    double entropy_bits = 0;         // worst-case S2 over the size class
    double entropy_nats = 0;
    double target_bits = 0;
    double target_nats = 0;
};

struct FailedCut {
    std::uint64_t mask = 0;
    unsigned rank = 0;
    unsigned deficit = 0;
};

struct CertificationReport {
    int n_parties = 0;
    std::uint64_t local_dimension = 0;
    std::vector<SizeRecord> sizes;
    std::vector<FailedCut> failed; // ascending mask, capped at failed_cap
    std::uint64_t failed_total = 0;
    bool is_ame = false;
    int k_uniformity = 0;          // largest k with every cut of size <= k full rank
    int code_distance = 1;         // k_uniformity + 1
    std::vector<CertificationReport> components; // per-prime sub-reports (composite only)
};

// Full sweep over deduplicated classes with |S| <= floor(N/2), run in parallel
// chunks with deterministic aggregation. failed_cap bounds the stored failure
// list; counters always cover everything.
CertificationReport certify_ame(const PhaseMatrix& p, unsigned threads = 0,
                                std::size_t failed_cap = 1024);

} // namespace ame
