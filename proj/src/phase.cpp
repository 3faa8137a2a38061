#include "ame/phase.hpp"

#include <cmath>
#include <string>

#include "ame/parallel.hpp"

namespace ame {

PhaseMatrix::PhaseMatrix(int n_parties, FieldSpec field)
    : n_(n_parties), field_(std::move(field)),
      entries_(static_cast<std::size_t>(n_parties) * n_parties, 0) {
    if (n_parties < 2 || n_parties > 63)
        throw OutOfRange("party count must be in [2, 63]");
}

PhaseMatrix PhaseMatrix::from_entries(int n_parties, FieldSpec field,
                                      const std::vector<FieldElement>& entries) {
    PhaseMatrix p(n_parties, std::move(field));
    const std::size_t n = static_cast<std::size_t>(n_parties);
    if (entries.size() != n * n) throw DimensionMismatch("entry count must be N*N");
    for (std::size_t i = 0; i < n; ++i) {
        if (entries[i * n + i] != 0)
            throw OutOfRange("diagonal entry (" + std::to_string(i) + "," +
                             std::to_string(i) + ") must be zero");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (entries[i * n + j] != entries[j * n + i])
                throw OutOfRange("matrix must be symmetric: entry (" + std::to_string(i) +
                                 "," + std::to_string(j) + ")");
            if (!p.field_.contains(entries[i * n + j]))
                throw OutOfRange("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") not reduced for the field");
        }
    }
    p.entries_ = entries;
    return p;
}

void PhaseMatrix::set_symmetric(int i, int j, FieldElement v) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j)
        throw OutOfRange("set_symmetric requires distinct off-diagonal indices");
    if (!field_.contains(v)) throw OutOfRange("value not in field");
    entries_[static_cast<std::size_t>(i) * n_ + j] = v;
    entries_[static_cast<std::size_t>(j) * n_ + i] = v;
}

std::vector<Bipartition> enumerate_bipartitions(int n, int max_size, bool dedup) {
    if (n < 2 || n > 63) throw OutOfRange("party count must be in [2, 63]");
    if (max_size < 1 || max_size > n - 1)
        throw InvalidMaxSize("max_size must be in [1, n-1]");
    std::vector<Bipartition> out;
    const std::uint64_t end = full_mask(n);
    for (std::uint64_t mask = 1; mask < end; ++mask) {
        const int k = std::popcount(mask);
        if (k > max_size) continue;
        if (dedup && !is_canonical(mask, n)) continue;
        out.push_back(Bipartition{mask});
    }
    return out;
}

FieldMatrix cut_submatrix(const PhaseMatrix& p, Bipartition s) {
    const int n = p.n_parties();
    if (s.mask == 0 || s.mask >= full_mask(n))
        throw OutOfRange("bipartition must be a nonempty proper subset");
    std::vector<int> rows, cols;
    for (int i = 0; i < n; ++i) (s.contains(i) ? rows : cols).push_back(i);
    FieldMatrix m(rows.size(), cols.size(), p.field());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) m.set(a, b, p.at(rows[a], cols[b]));
    return m;
}

unsigned cut_rank(const PhaseMatrix& p, Bipartition s) {
    return rank(cut_submatrix(p, s));
}

double ExactPurity::value() const {
    double v = 1.0;
    for (const auto& [base, rk] : factors)
        v *= std::pow(static_cast<double>(base), -static_cast<double>(rk));
    return v;
}

double ExactPurity::neg_log(EntropyUnit unit) const {
    // computed from the integer exponents, never from the float product
    double s = 0.0;
    for (const auto& [base, rk] : factors) {
        const double lg = unit == EntropyUnit::Bits ? std::log2(static_cast<double>(base))
                                                    : std::log(static_cast<double>(base));
        s += static_cast<double>(rk) * lg;
    }
    return s;
}

ExactPurity purity(const PhaseMatrix& p, Bipartition s) {
    return ExactPurity{{{p.field().cardinality(), cut_rank(p, s)}}};
}

double renyi2_entropy(const PhaseMatrix& p, Bipartition s, EntropyUnit unit) {
    return purity(p, s).neg_log(unit);
}

std::uint64_t cost(const PhaseMatrix& p) {
    const int n = p.n_parties();
    std::uint64_t total = 0;
    for (const Bipartition& s : enumerate_bipartitions(n, n / 2, true)) {
        const std::uint64_t deficit = static_cast<std::uint64_t>(s.size()) - cut_rank(p, s);
        total += deficit * deficit;
    }
    return total;
}

namespace {

std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

} // namespace

CertificationReport certify_ame(const PhaseMatrix& p, unsigned threads, std::size_t failed_cap) {
    const int n = p.n_parties();
    const int k_max = n / 2;
    const std::vector<Bipartition> classes = enumerate_bipartitions(n, k_max, true);

    // Per-chunk accumulators merged in chunk order: the aggregate is independent
    // of scheduling and of the worker count.
    struct ChunkAcc {
        std::vector<std::uint64_t> saturated;
        std::vector<std::uint64_t> class_count;
        std::vector<unsigned> min_rank;
        std::vector<FailedCut> failed;
    };

    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(
        1, std::min<std::size_t>(resolve_threads(threads), classes.size())));
    std::vector<ChunkAcc> acc(workers);
    for (auto& a : acc) {
        a.saturated.assign(k_max + 1, 0);
        a.class_count.assign(k_max + 1, 0);
        a.min_rank.assign(k_max + 1, ~0u);
    }

    parallel_chunks(classes.size(), workers,
                    [&](std::size_t begin, std::size_t end, std::size_t chunk_idx) {
        ChunkAcc& a = acc[chunk_idx];
        for (std::size_t i = begin; i < end; ++i) {
            const Bipartition s = classes[i];
            const int k = s.size();
            const unsigned rk = cut_rank(p, s);
            ++a.class_count[k];
            a.min_rank[k] = std::min(a.min_rank[k], rk);
            if (rk == static_cast<unsigned>(k)) {
                ++a.saturated[k];
            } else {
                a.failed.push_back(FailedCut{s.mask, rk, static_cast<unsigned>(k) - rk});
            }
        }
    });

    CertificationReport rep;
    rep.n_parties = n;
    rep.local_dimension = p.field().cardinality();
    const double log2q = std::log2(static_cast<double>(rep.local_dimension));
    const double lnq = std::log(static_cast<double>(rep.local_dimension));

    for (int k = 1; k <= k_max; ++k) {
        SizeRecord rec;
        rec.size = k;
        rec.subset_count = binomial(n, k);
        unsigned min_rank = ~0u;
        for (const auto& a : acc) {
            rec.class_count += a.class_count[k];
            rec.saturated += a.saturated[k];
            min_rank = std::min(min_rank, a.min_rank[k]);
        }
        if (min_rank == ~0u) min_rank = 0;
        rec.min_rank = min_rank;
        const std::uint64_t failed_classes = rec.class_count - rec.saturated;
        // the raw convention counts the balanced size from both sides
        const bool balanced = (2 * k == n);
        rec.failed_subsets = balanced ? 2 * failed_classes : failed_classes;
        rec.entropy_bits = static_cast<double>(min_rank) * log2q;
        rec.entropy_nats = static_cast<double>(min_rank) * lnq;
        rec.target_bits = static_cast<double>(k) * log2q;
        rec.target_nats = static_cast<double>(k) * lnq;
        rep.sizes.push_back(rec);
    }

    for (const auto& a : acc) {
        for (const FailedCut& f : a.failed) {
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
}

} // namespace ame
