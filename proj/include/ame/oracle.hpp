#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ame/crt.hpp"
#include "ame/phase.hpp"

namespace ame::oracle {

// Desk-scale cap on explicit amplitude vectors (16 MB of complex doubles).
inline constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 20;

// Explicit state vector of the quadratic phase state. Index encoding is
// big-endian positional: party 0 is the most significant base-q digit, field
// elements enumerated by canonical residue.
struct StateVector {
    std::uint64_t q = 0;
    int n_parties = 0;
    std::vector<std::complex<double>> amplitudes;
};

// Dense reduced density matrix on the parties in `subsystem`.
struct DensityMatrix {
    std::uint64_t dim = 0;
    Bipartition subsystem;
    std::vector<std::complex<double>> entries; // row-major dim x dim

    std::complex<double> at(std::uint64_t r, std::uint64_t c) const {
        return entries[r * dim + c];
    }
};

// Amplitude at enc(q-vector) is q^{-N/2} * omega^chi with chi the quadratic form
// of P (traced down to F_p for extension fields) and omega = exp(2*pi*i/p).
// Composite-field matrices are split and built as the per-prime tensor product.
StateVector build_state(const PhaseMatrix& p, std::uint64_t cap = kDefaultCap);

// Tensor product of per-prime phase states under the CRT digit map.
StateVector build_composite_state(const CompositePhase& c, std::uint64_t cap = kDefaultCap);

// rho_S[a,b] = sum_e psi(a,e) * conj(psi(b,e)); strictly sequential summation
// order, so results are bit-for-bit reproducible.
DensityMatrix reduce(const StateVector& psi, Bipartition s, std::uint64_t cap = kDefaultCap);

// Tr(rho^2) as the squared Frobenius norm.
double purity_exact(const DensityMatrix& rho);

struct CutCheck {
    std::uint64_t mask = 0;
    unsigned cut_rank = 0;
    double oracle_purity = 0;
    double predicted_purity = 0;   // q^{-rank}
    double purity_residual = 0;
    double flatness_residual = 0;  // max |rho^2 - q^{-rk} rho|
    double ame_residual = -1;      // max |rho - q^{-|S|} I|; -1 when not applicable
};

struct DualityReport {
    std::vector<CutCheck> cuts;    // every subset, sizes 1..N-1, ascending mask
    double max_purity_residual = 0;
    double max_flatness_residual = 0;
    double max_ame_residual = -1;  // over cuts with |S| <= floor(N/2) when AME-certified
    double max_eigen_residual = -1;
    bool rank_certified_ame = false;
    bool ok = false;
    double tolerance = 0;
};

// End-to-end validation of the rank-purity correspondence on one matrix: purity,
// spectrum flatness, and (for rank-certified AME instances) the maximally-mixed
// identity including an eigenvalue check at dimension <= 256.
DualityReport verify_duality(const PhaseMatrix& p, double tolerance = 1e-10,
                             std::uint64_t cap = kDefaultCap);
DualityReport verify_duality(const CompositePhase& c, double tolerance = 1e-10,
                             std::uint64_t cap = kDefaultCap);

// Same checks, throwing DualityViolation instead of reporting.
void assert_duality(const PhaseMatrix& p, double tolerance = 1e-10,
                    std::uint64_t cap = kDefaultCap);

} // namespace ame::oracle
