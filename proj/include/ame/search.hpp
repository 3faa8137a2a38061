#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ame/phase.hpp"
#include "ame/rng.hpp"

namespace ame {

// Parallel-tempering minimization of the bipartition cost over symmetric
// zero-diagonal matrices. One step is a sweep: every replica makes one move.
struct SearchConfig {
    int n_parties = 0;
    FieldSpec field = FieldSpec::prime(2);
    unsigned replicas = 8;
    double t_min = 0.2;
    double t_max = 5.0;
    std::uint64_t max_steps = 100000;
    std::uint64_t stall_limit = 5000;     // sweeps without improvement before a reheat
    std::uint64_t exchange_interval = 50; // sweeps between exchange barriers
    double guide_probability = 0.05;      // cold half copies the global best
    std::uint64_t rng_seed = 0;
    std::uint64_t restarts = std::numeric_limits<std::uint64_t>::max(); // reheat cap per replica
    bool auto_ladder = false;             // percentile pre-pass for t_min/t_max
    std::uint64_t cache_check_interval = 10000;
    unsigned threads = 0;                 // 0: AMEPHASE_THREADS or hardware
};

// T_r = t_min * (t_max/t_min)^{r/(R-1)}, strictly increasing; {t_min} for R = 1.
std::vector<double> temperature_ladder(const SearchConfig& config);

struct Move {
    int i = 0;
    int j = 0;
    FieldElement value = 0;
};

struct RankUpdate {
    std::uint64_t mask = 0; // canonical class representative
    unsigned new_rank = 0;
};

struct DeltaCost {
    std::int64_t delta = 0;
    std::vector<RankUpdate> updates;
};

// One replica: configuration, cached per-class cut ranks, and its own rng
// stream. The epoch pair detects cache/matrix divergence.
struct ReplicaState {
    PhaseMatrix matrix;
    std::vector<std::uint8_t> rank_cache; // indexed by class_index, 2^{n-1} slots
    std::uint64_t current_cost = 0;
    double temperature = 0;
    std::uint64_t steps_since_improvement = 0;
    std::uint64_t best_since_restart = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t restarts_used = 0;
    CounterRng rng;
    std::uint64_t matrix_epoch = 0;
    std::uint64_t cache_epoch = 0;

    static ReplicaState initialize(PhaseMatrix matrix, double temperature, CounterRng rng);

    // Replaces the configuration without touching the cache; callers must
    // rebuild_cache() before the next delta_cost.
    void overwrite_matrix(PhaseMatrix m);
    void rebuild_cache();
};

// Uniform off-diagonal pair, uniform new value among the q-1 others.
Move propose_move(ReplicaState& state);

// Recomputes ranks only for canonical classes separating move.i and move.j;
// exact integer cost change. Throws StaleCache if the cache epoch lags.
DeltaCost delta_cost(const ReplicaState& state, const Move& move);

void apply_move(ReplicaState& state, const Move& move, const DeltaCost& dc);

// min(1, exp(-delta/T)); non-positive deltas accept without consuming rng.
bool metropolis_accept(std::int64_t delta, double temperature, CounterRng& rng);

// One exchange sweep over adjacent pairs at the given parity: configurations
// swap with probability min(1, exp((1/T_r - 1/T_{r+1}) (C_r - C_{r+1})));
// temperatures and rng streams stay with their slots. Returns swapped pairs.
std::vector<std::pair<unsigned, unsigned>> replica_exchange(std::vector<ReplicaState>& states,
                                                            bool odd_parity, CounterRng& rng);

enum class Termination { CostZero, StepBudget };

struct TracePoint {
    std::uint64_t step = 0;
    std::uint64_t best_cost = 0;
};

struct TraceRecord {
    std::uint64_t step = 0;
    unsigned replica = 0;
    double temperature = 0;
    std::uint64_t cost = 0;
    std::uint64_t best_cost = 0;
};
using TraceSink = std::function<void(const TraceRecord&)>;

struct SearchResult {
    PhaseMatrix best;
    std::uint64_t best_cost = 0;
    std::uint64_t best_step = 0;
    std::uint64_t steps_taken = 0;
    std::uint64_t restarts_used = 0;
    std::vector<TracePoint> cost_trace; // sampled at exchange barriers
    Termination terminated_by = Termination::StepBudget;
};

// Full state at an exchange barrier; JSON round trip enables exact resume.
struct SearchCheckpoint {
    SearchConfig config;
    std::uint64_t step = 0;
    bool odd_parity = false;
    std::vector<ReplicaState> replicas;
    PhaseMatrix best;
    std::uint64_t best_cost = 0;
    std::uint64_t best_step = 0;
    unsigned best_replica = 0;
    CounterRng exchange_rng;
    std::vector<TracePoint> cost_trace;

    std::string to_json() const;
    static SearchCheckpoint from_json(std::string_view text);
};

// Deterministic given the seed, including across thread counts. A zero-cost
// result is always re-certified from scratch before returning.
SearchResult run_search(const SearchConfig& config, const TraceSink& sink = {},
                        SearchCheckpoint* final_state = nullptr);

// Continues a checkpoint; max_steps_override extends the step budget (0 keeps
// the checkpointed config's budget). Resume is bit-for-bit identical to an
// uninterrupted run when the checkpoint step is a multiple of exchange_interval.
SearchResult resume_search(const SearchCheckpoint& checkpoint,
                           std::uint64_t max_steps_override = 0, const TraceSink& sink = {},
                           SearchCheckpoint* final_state = nullptr);

} // namespace ame
