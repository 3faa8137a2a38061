#include "ame/crt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ame/parallel.hpp"

namespace ame {

std::uint64_t CompositePhase::local_dimension() const {
    std::uint64_t d = 1;
    for (std::uint64_t p : primes) d *= p;
    return d;
}

CompositePhase make_composite(std::vector<PhaseMatrix> components) {
    if (components.empty()) throw DimensionMismatch("composite needs at least one component");
    for (const auto& c : components) {
        if (c.field().kind() != FieldKind::Prime)
            throw WrongFieldKind("composite components must be prime-field matrices");
        if (c.n_parties() != components.front().n_parties())
            throw MixedDimensions("components disagree on party count");
    }
    std::sort(components.begin(), components.end(),
              [](const PhaseMatrix& a, const PhaseMatrix& b) {
                  return a.field().cardinality() < b.field().cardinality();
              });
    CompositePhase out;
    out.n_parties = components.front().n_parties();
    for (const auto& c : components) {
        const std::uint64_t p = c.field().cardinality();
        if (!out.primes.empty() && out.primes.back() == p)
            throw DuplicatePrimes("components share the prime " + std::to_string(p));
        out.primes.push_back(p);
    }
    out.components = std::move(components);
    return out;
}

PhaseMatrix compose_matrices(const std::vector<PhaseMatrix>& components) {
    const CompositePhase c = make_composite(components);
    const FieldSpec ring = FieldSpec::composite(c.primes);
    PhaseMatrix out(c.n_parties, ring);
    std::vector<std::uint64_t> residues(c.primes.size());
    for (int i = 0; i < c.n_parties; ++i) {
        for (int j = i + 1; j < c.n_parties; ++j) {
            for (std::size_t a = 0; a < c.components.size(); ++a)
                residues[a] = c.components[a].at(i, j);
            out.set_symmetric(i, j, crt_combine(residues, c.primes));
        }
    }
    return out;
}

std::vector<PhaseMatrix> split_matrix(const PhaseMatrix& p) {
    if (p.field().kind() != FieldKind::CompositeSquareFree)
        throw NotComposite("split requires a composite-ring matrix");
    const auto& primes = p.field().primes();
    std::vector<PhaseMatrix> out;
    out.reserve(primes.size());
    for (std::uint64_t q : primes) out.emplace_back(p.n_parties(), FieldSpec::prime(q));
    for (int i = 0; i < p.n_parties(); ++i)
        for (int j = i + 1; j < p.n_parties(); ++j)
            for (std::size_t a = 0; a < primes.size(); ++a)
                out[a].set_symmetric(i, j, p.at(i, j) % primes[a]);
    return out;
}

CompositePhase split_to_composite(const PhaseMatrix& p) {
    return make_composite(split_matrix(p));
}

ExactPurity composite_purity(const CompositePhase& c, Bipartition s) {
    ExactPurity pur;
    pur.factors.reserve(c.components.size());
    for (std::size_t a = 0; a < c.components.size(); ++a)
        pur.factors.emplace_back(c.primes[a], cut_rank(c.components[a], s));
    return pur;
}

double composite_entropy(const CompositePhase& c, Bipartition s, EntropyUnit unit) {
    return composite_purity(c, s).neg_log(unit);
}

CertificationReport certify_composite(const CompositePhase& c, unsigned threads,
                                      std::size_t failed_cap) {
    const int n = c.n_parties;
    const int k_max = n / 2;
    const std::size_t r = c.components.size();
    const std::vector<Bipartition> classes = enumerate_bipartitions(n, k_max, true);

    struct ChunkAcc {
        // index [component][size]; component r is the composite roll-up
        std::vector<std::vector<std::uint64_t>> saturated;
        std::vector<std::vector<unsigned>> min_rank;
        std::vector<std::uint64_t> class_count;
        std::vector<std::vector<FailedCut>> failed; // per component + composite
        std::vector<double> min_entropy_bits;       // composite, per size
        std::vector<double> min_entropy_nats;
    };

    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(
        1, std::min<std::size_t>(resolve_threads(threads), classes.size())));
    std::vector<ChunkAcc> acc(workers);
    for (auto& a : acc) {
        a.saturated.assign(r + 1, std::vector<std::uint64_t>(k_max + 1, 0));
        a.min_rank.assign(r + 1, std::vector<unsigned>(k_max + 1, ~0u));
        a.class_count.assign(k_max + 1, 0);
        a.failed.assign(r + 1, {});
        a.min_entropy_bits.assign(k_max + 1, std::numeric_limits<double>::infinity());
        a.min_entropy_nats.assign(k_max + 1, std::numeric_limits<double>::infinity());
    }

    std::vector<double> log2p(r), lnp(r);
    for (std::size_t a = 0; a < r; ++a) {
        log2p[a] = std::log2(static_cast<double>(c.primes[a]));
        lnp[a] = std::log(static_cast<double>(c.primes[a]));
    }

    parallel_chunks(classes.size(), workers,
                    [&](std::size_t begin, std::size_t end, std::size_t chunk_idx) {
        ChunkAcc& a = acc[chunk_idx];
        std::vector<unsigned> ranks(r);
        for (std::size_t i = begin; i < end; ++i) {
            const Bipartition s = classes[i];
            const unsigned k = static_cast<unsigned>(s.size());
            ++a.class_count[k];
            bool all_full = true;
            unsigned min_rk = ~0u;
            double ent_bits = 0, ent_nats = 0;
            for (std::size_t comp = 0; comp < r; ++comp) {
                const unsigned rk = cut_rank(c.components[comp], s);
                ranks[comp] = rk;
                min_rk = std::min(min_rk, rk);
                ent_bits += rk * log2p[comp];
                ent_nats += rk * lnp[comp];
                a.min_rank[comp][k] = std::min(a.min_rank[comp][k], rk);
                if (rk == k) {
                    ++a.saturated[comp][k];
                } else {
                    all_full = false;
                    a.failed[comp].push_back(FailedCut{s.mask, rk, k - rk});
                }
            }
            a.min_rank[r][k] = std::min(a.min_rank[r][k], min_rk);
            a.min_entropy_bits[k] = std::min(a.min_entropy_bits[k], ent_bits);
            a.min_entropy_nats[k] = std::min(a.min_entropy_nats[k], ent_nats);
            if (all_full) {
                ++a.saturated[r][k];
            } else {
                a.failed[r].push_back(FailedCut{s.mask, min_rk, k - min_rk});
            }
        }
    });

    const std::uint64_t d = c.local_dimension();

    auto build = [&](std::size_t comp, std::uint64_t dim, double log2q, double lnq) {
        CertificationReport rep;
        rep.n_parties = n;
        rep.local_dimension = dim;
        for (int k = 1; k <= k_max; ++k) {
            SizeRecord rec;
            rec.size = k;
            unsigned min_rank = ~0u;
            for (const auto& a : acc) {
                rec.class_count += a.class_count[k];
                rec.saturated += a.saturated[comp][k];
                min_rank = std::min(min_rank, a.min_rank[comp][k]);
            }
            if (min_rank == ~0u) min_rank = 0;
            rec.min_rank = min_rank;
            std::uint64_t cnk = 1;
            for (int i = 1; i <= k; ++i)
                cnk = cnk * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
            rec.subset_count = cnk;
            const std::uint64_t failed_classes = rec.class_count - rec.saturated;
            rec.failed_subsets = (2 * k == n) ? 2 * failed_classes : failed_classes;
            if (comp < r) {
                rec.entropy_bits = static_cast<double>(min_rank) * log2q;
                rec.entropy_nats = static_cast<double>(min_rank) * lnq;
            } else {
                double eb = std::numeric_limits<double>::infinity();
                double en = std::numeric_limits<double>::infinity();
                for (const auto& a : acc) {
                    eb = std::min(eb, a.min_entropy_bits[k]);
                    en = std::min(en, a.min_entropy_nats[k]);
                }
                rec.entropy_bits = std::isfinite(eb) ? eb : 0.0;
                rec.entropy_nats = std::isfinite(en) ? en : 0.0;
            }
            rec.target_bits = static_cast<double>(k) * log2q;
            rec.target_nats = static_cast<double>(k) * lnq;
            rep.sizes.push_back(rec);
        }
        for (const auto& a : acc) {
            for (const FailedCut& f : a.failed[comp]) {
                ++rep.failed_total;
                if (rep.failed.size() < failed_cap) rep.failed.push_back(f);
            }
        }
        rep.is_ame = rep.failed_total == 0;
        rep.k_uniformity = 0;
        for (int k = 1; k <= k_max; ++k) {
            if (rep.sizes[k - 1].saturated != rep.sizes[k - 1].class_count) break;
            rep.k_uniformity = k;
        }
        rep.code_distance = rep.k_uniformity + 1;
        return rep;
    };

    CertificationReport rep = build(r, d, std::log2(static_cast<double>(d)),
                                    std::log(static_cast<double>(d)));
    for (std::size_t comp = 0; comp < r; ++comp)
        rep.components.push_back(build(comp, c.primes[comp], log2p[comp], lnp[comp]));
    return rep;
}

namespace {

const GateRule kBuiltinRules[] = {
    {4, 4, 2, "AME(4,2) does not exist",
     "Higuchi & Sudbery, Phys. Lett. A 273, 213 (2000)"},
    {7, 0, 2, "AME(N,2) does not exist for N >= 7",
     "Huber, Guehne & Siewert, Phys. Rev. Lett. 118, 200502 (2017)"},
};

} // namespace

std::span<const GateRule> builtin_gate_rules() { return kBuiltinRules; }

GateResult crt_gate(int n_parties, std::span<const std::uint64_t> primes,
                    std::span<const GateRule> extra_rules) {
    for (std::size_t i = 0; i < primes.size(); ++i)
        for (std::size_t j = i + 1; j < primes.size(); ++j)
            if (primes[i] == primes[j])
                throw NonDistinctPrimes("gate: primes must be distinct");
    for (std::uint64_t p : primes) {
        for (const GateRule& rule : builtin_gate_rules()) {
            if (rule.applies(n_parties, p))
                return GateResult{false, p, rule.reason, rule.citation};
        }
        for (const GateRule& rule : extra_rules) {
            if (rule.applies(n_parties, p))
                return GateResult{false, p, rule.reason, rule.citation};
        }
    }
    return GateResult{};
}

} // namespace ame
