#include "ame/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

namespace ame::oracle {

namespace {

using cd = std::complex<double>;

std::uint64_t checked_dim(std::uint64_t q, int n, std::uint64_t cap, const char* what) {
    unsigned __int128 d = 1;
    for (int i = 0; i < n; ++i) {
        d *= q;
        if (d > cap)
            throw InstanceTooLarge(std::string(what) + " needs " + std::to_string(q) + "^" +
                                   std::to_string(n) + " amplitudes, cap is " +
                                   std::to_string(cap));
    }
    return static_cast<std::uint64_t>(d);
}

// roots of unity from the reduced integer exponent, never by repeated products
std::vector<cd> root_table(std::uint64_t p) {
    std::vector<cd> w(p);
    for (std::uint64_t k = 0; k < p; ++k) {
        const double arg = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p);
        w[k] = cd(std::cos(arg), std::sin(arg));
    }
    return w;
}

std::vector<std::uint64_t> decode_digits(std::uint64_t idx, std::uint64_t q, int n) {
    std::vector<std::uint64_t> digits(n);
    for (int i = n; i-- > 0;) {
        digits[i] = idx % q;
        idx /= q;
    }
    return digits;
}

} // namespace

StateVector build_state(const PhaseMatrix& p, std::uint64_t cap) {
    const FieldSpec& f = p.field();
    if (f.kind() == FieldKind::CompositeSquareFree)
        return build_composite_state(split_to_composite(p), cap);

    const int n = p.n_parties();
    const std::uint64_t q = f.cardinality();
    const std::uint64_t total = checked_dim(q, n, cap, "build_state");

    const std::uint64_t char_p = f.characteristic();
    const std::vector<cd> omega = root_table(char_p);
    const double norm = std::pow(static_cast<double>(q), -0.5 * n);

    StateVector psi;
    psi.q = q;
    psi.n_parties = n;
    psi.amplitudes.resize(total);

    std::vector<std::uint64_t> digits(n, 0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        // chi = sum_{i<j} P_ij q_i q_j evaluated in the field
        FieldElement chi = 0;
        for (int i = 0; i < n; ++i) {
            if (digits[i] == 0) continue;
            for (int j = i + 1; j < n; ++j) {
                if (digits[j] == 0) continue;
                const FieldElement pij = p.at(i, j);
                if (pij == 0) continue;
                chi = f.add(chi, f.mul(pij, f.mul(digits[i], digits[j])));
            }
        }
        const std::uint64_t phase = f.kind() == FieldKind::Prime ? chi : f.trace_to_prime(chi);
        psi.amplitudes[idx] = norm * omega[phase];

        // odometer over party digits, party N-1 fastest (big-endian index order)
        for (int i = n; i-- > 0;) {
            if (++digits[i] < q) break;
            digits[i] = 0;
        }
    }
    return psi;
}

StateVector build_composite_state(const CompositePhase& c, std::uint64_t cap) {
    const int n = c.n_parties;
    const std::uint64_t d = c.local_dimension();
    const std::uint64_t total = checked_dim(d, n, cap, "build_composite_state");

    std::vector<StateVector> parts;
    parts.reserve(c.components.size());
    for (const auto& comp : c.components) parts.push_back(build_state(comp, cap));

    StateVector psi;
    psi.q = d;
    psi.n_parties = n;
    psi.amplitudes.resize(total);

    for (std::uint64_t idx = 0; idx < total; ++idx) {
        const auto digits = decode_digits(idx, d, n);
        cd amp = 1.0;
        for (std::size_t a = 0; a < parts.size(); ++a) {
            const std::uint64_t pa = c.primes[a];
            std::uint64_t sub_idx = 0;
            for (int i = 0; i < n; ++i) sub_idx = sub_idx * pa + digits[i] % pa;
            amp *= parts[a].amplitudes[sub_idx];
        }
        psi.amplitudes[idx] = amp;
    }
    return psi;
}

DensityMatrix reduce(const StateVector& psi, Bipartition s, std::uint64_t cap) {
    const int n = psi.n_parties;
    const std::uint64_t q = psi.q;
    if (s.mask == 0 || s.mask >= full_mask(n))
        throw OutOfRange("bipartition must be a nonempty proper subset");

    std::vector<int> kept, traced;
    for (int i = 0; i < n; ++i) (s.contains(i) ? kept : traced).push_back(i);

    // party strides in the full index
    std::vector<std::uint64_t> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * q;

    std::uint64_t dim = 1, env = 1;
    for (std::size_t i = 0; i < kept.size(); ++i) dim *= q;
    for (std::size_t i = 0; i < traced.size(); ++i) env *= q;
    if (dim > cap || dim > cap / dim)
        throw InstanceTooLarge("reduce: density matrix dimension " + std::to_string(dim) +
                               " exceeds cap " + std::to_string(cap));

    // offset tables: full index = kept_offset[a] + traced_offset[e]
    auto offsets = [&](const std::vector<int>& parties, std::uint64_t count) {
        std::vector<std::uint64_t> off(count, 0);
        for (std::uint64_t v = 0; v < count; ++v) {
            std::uint64_t rest = v, acc = 0;
            for (std::size_t i = parties.size(); i-- > 0;) {
                acc += (rest % q) * stride[parties[i]];
                rest /= q;
            }
            off[v] = acc;
        }
        return off;
    };
    const auto kept_off = offsets(kept, dim);
    const auto traced_off = offsets(traced, env);

    DensityMatrix rho;
    rho.dim = dim;
    rho.subsystem = s;
    rho.entries.assign(dim * dim, cd{0.0, 0.0});
    for (std::uint64_t a = 0; a < dim; ++a) {
        for (std::uint64_t b = 0; b < dim; ++b) {
            cd acc = 0.0;
            for (std::uint64_t e = 0; e < env; ++e)
                acc += psi.amplitudes[kept_off[a] + traced_off[e]] *
                       std::conj(psi.amplitudes[kept_off[b] + traced_off[e]]);
            rho.entries[a * dim + b] = acc;
        }
    }
    return rho;
}

double purity_exact(const DensityMatrix& rho) {
    double acc = 0.0;
    for (const cd& e : rho.entries) acc += std::norm(e);
    return acc;
}

namespace {

double flatness_residual(const DensityMatrix& rho, double scale) {
    // max |(rho^2 - scale * rho)_{ab}|
    const std::uint64_t dim = rho.dim;
    double worst = 0.0;
    for (std::uint64_t a = 0; a < dim; ++a) {
        for (std::uint64_t b = 0; b < dim; ++b) {
            cd acc = 0.0;
            for (std::uint64_t k = 0; k < dim; ++k) acc += rho.at(a, k) * rho.at(k, b);
            worst = std::max(worst, std::abs(acc - scale * rho.at(a, b)));
        }
    }
    return worst;
}

double identity_residual(const DensityMatrix& rho, double scale) {
    double worst = 0.0;
    for (std::uint64_t a = 0; a < rho.dim; ++a)
        for (std::uint64_t b = 0; b < rho.dim; ++b) {
            const cd want = a == b ? cd{scale, 0.0} : cd{0.0, 0.0};
            worst = std::max(worst, std::abs(rho.at(a, b) - want));
        }
    return worst;
}

double eigen_residual(const DensityMatrix& rho, double want) {
    const auto dim = static_cast<Eigen::Index>(rho.dim);
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a)
        for (Eigen::Index b = 0; b < dim; ++b) m(a, b) = rho.at(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        worst = std::max(worst, std::abs(solver.eigenvalues()[i] - want));
    return worst;
}

// shared sweep: predictor(s) gives the predicted purity for each cut
template <typename Predictor>
DualityReport run_verify(const StateVector& psi, int n, bool certified, Predictor&& predict,
                         double tolerance, std::uint64_t cap) {
    DualityReport rep;
    rep.tolerance = tolerance;
    rep.rank_certified_ame = certified;

    const double qd = static_cast<double>(psi.q);
    for (const Bipartition& s : enumerate_bipartitions(n, n - 1, false)) {
        const DensityMatrix rho = reduce(psi, s, cap);
        CutCheck check;
        check.mask = s.mask;
        const auto [rk, predicted] = predict(s);
        check.cut_rank = rk;
        check.predicted_purity = predicted;
        check.oracle_purity = purity_exact(rho);
        check.purity_residual = std::abs(check.oracle_purity - check.predicted_purity);
        check.flatness_residual = flatness_residual(rho, check.predicted_purity);
        rep.max_purity_residual = std::max(rep.max_purity_residual, check.purity_residual);
        rep.max_flatness_residual = std::max(rep.max_flatness_residual, check.flatness_residual);

        if (certified && s.size() <= n / 2) {
            const double want = std::pow(qd, -static_cast<double>(s.size()));
            check.ame_residual = identity_residual(rho, want);
            rep.max_ame_residual = std::max(rep.max_ame_residual, check.ame_residual);
            if (rho.dim <= 256)
                rep.max_eigen_residual =
                    std::max(rep.max_eigen_residual, eigen_residual(rho, want));
        }
        rep.cuts.push_back(check);
    }

    rep.ok = rep.max_purity_residual < tolerance && rep.max_flatness_residual < tolerance;
    if (certified)
        rep.ok = rep.ok && rep.max_ame_residual < tolerance &&
                 (rep.max_eigen_residual < 0 || rep.max_eigen_residual < tolerance);
    return rep;
}

} // namespace

DualityReport verify_duality(const PhaseMatrix& p, double tolerance, std::uint64_t cap) {
    if (p.field().kind() == FieldKind::CompositeSquareFree)
        return verify_duality(split_to_composite(p), tolerance, cap);
    const StateVector psi = build_state(p, cap);
    const bool certified = certify_ame(p).is_ame;
    const double qd = static_cast<double>(p.field().cardinality());
    return run_verify(
        psi, p.n_parties(), certified,
        [&](Bipartition s) {
            const unsigned rk = cut_rank(p, s);
            return std::pair<unsigned, double>{rk, std::pow(qd, -static_cast<double>(rk))};
        },
        tolerance, cap);
}

DualityReport verify_duality(const CompositePhase& c, double tolerance, std::uint64_t cap) {
    const StateVector psi = build_composite_state(c, cap);
    const bool certified = certify_composite(c).is_ame;
    return run_verify(
        psi, c.n_parties, certified,
        [&](Bipartition s) {
            const ExactPurity pur = composite_purity(c, s);
            unsigned min_rank = ~0u; // reported rank: minimum over components
            for (const auto& [base, rk] : pur.factors) min_rank = std::min(min_rank, rk);
            return std::pair<unsigned, double>{min_rank, pur.value()};
        },
        tolerance, cap);
}

void assert_duality(const PhaseMatrix& p, double tolerance, std::uint64_t cap) {
    const DualityReport rep = verify_duality(p, tolerance, cap);
    if (!rep.ok)
        throw DualityViolation(
            "rank-purity duality violated: purity residual " +
            std::to_string(rep.max_purity_residual) + ", flatness residual " +
            std::to_string(rep.max_flatness_residual));
}

} // namespace ame::oracle
