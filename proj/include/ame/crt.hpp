#pragma once

#include <span>
#include <string>
#include <vector>

#include "ame/phase.hpp"

namespace ame {

// Phase state over square-free d = p_1 * ... * p_r, stored as one prime-field
// component per factor. All entanglement analysis happens on the components;
// the collapsed Z_d matrix is only an interchange format.
struct CompositePhase {
    int n_parties = 0;
    std::vector<std::uint64_t> primes;   // sorted, distinct
    std::vector<PhaseMatrix> components; // components[i] over Prime(primes[i])

    std::uint64_t local_dimension() const;
};

// Validates and sorts components by prime.
CompositePhase make_composite(std::vector<PhaseMatrix> components);

// Entrywise CRT combination into a matrix over the composite ring.
PhaseMatrix compose_matrices(const std::vector<PhaseMatrix>& components);

// Entrywise reduction mod each prime factor; inverse of compose_matrices.
std::vector<PhaseMatrix> split_matrix(const PhaseMatrix& p);
CompositePhase split_to_composite(const PhaseMatrix& p);

// Tr(rho_S^2) = prod_a p_a^{-rk_a}, kept as per-prime integer exponents.
ExactPurity composite_purity(const CompositePhase& c, Bipartition s);

// S2 = sum_a rk_a * log(p_a); exactly the negated log of composite_purity.
double composite_entropy(const CompositePhase& c, Bipartition s, EntropyUnit unit);

// AME iff every component certifies for the same bipartition set. The top-level
// report counts a class as saturated only when all components are full rank;
// per-component reports are attached under .components.
CertificationReport certify_composite(const CompositePhase& c, unsigned threads = 0,
                                      std::size_t failed_cap = 1024);

// Known-nonexistence entry for AME(n, prime); data, not logic, so users can
// extend the table without touching code.
struct GateRule {
    int n_min = 0;
    int n_max = 0; // 0 = unbounded above
    std::uint64_t prime = 0;
    std::string reason;
    std::string citation;

    bool applies(int n, std::uint64_t p) const {
        return p == prime && n >= n_min && (n_max == 0 || n <= n_max);
    }
};

struct GateResult {
    bool pass = true;
    std::uint64_t blocking_prime = 0;
    std::string reason;
    std::string citation;
};

// Ships only facts the established nonexistence results give us.
std::span<const GateRule> builtin_gate_rules();

// Necessary condition: a CRT product AME(N, prod p_a) needs AME(N, p_a) for
// every factor. Blocks when any factor hits a known-nonexistent (N, p).
GateResult crt_gate(int n_parties, std::span<const std::uint64_t> primes,
                    std::span<const GateRule> extra_rules = {});

} // namespace ame
