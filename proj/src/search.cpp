#include "ame/search.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "ame/io.hpp"
#include "ame/parallel.hpp"

namespace ame {

namespace {

void validate(const SearchConfig& c) {
    if (c.n_parties < 2 || c.n_parties > 63)
        throw InvalidConfig("n_parties must be in [2, 63]");
    if (c.field.kind() == FieldKind::CompositeSquareFree)
        throw InvalidConfig("search runs per prime component; split composite fields first");
    if (c.replicas < 1) throw InvalidConfig("need at least one replica");
    if (!(c.t_min > 0)) throw InvalidConfig("t_min must be positive");
    if (c.replicas > 1 && !(c.t_max > c.t_min))
        throw InvalidConfig("t_max must exceed t_min");
    if (c.max_steps == 0) throw InvalidConfig("max_steps must be positive");
    if (c.exchange_interval == 0) throw InvalidConfig("exchange_interval must be positive");
    if (c.guide_probability < 0 || c.guide_probability > 1)
        throw InvalidConfig("guide_probability must be in [0, 1]");
    if (c.cache_check_interval == 0) throw InvalidConfig("cache_check_interval must be positive");
}

PhaseMatrix random_matrix(int n, const FieldSpec& f, CounterRng& rng) {
    PhaseMatrix p(n, f);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            p.set_symmetric(i, j, rng.next_below(f.cardinality()));
    return p;
}

// rng stream ids; arbitrary but fixed so checkpoints stay compatible
constexpr std::uint64_t kExchangeStream = 0xE0C0FFEE;
constexpr std::uint64_t kLadderStream = 0xCA11B7A7;

} // namespace

std::vector<double> temperature_ladder(const SearchConfig& config) {
    std::vector<double> t(config.replicas);
    if (config.replicas == 1) {
        t[0] = config.t_min;
        return t;
    }
    const double ratio = config.t_max / config.t_min;
    for (unsigned r = 0; r < config.replicas; ++r)
        t[r] = config.t_min *
               std::pow(ratio, static_cast<double>(r) / static_cast<double>(config.replicas - 1));
    return t;
}

ReplicaState ReplicaState::initialize(PhaseMatrix matrix, double temperature, CounterRng rng) {
    ReplicaState s;
    s.matrix = std::move(matrix);
    s.temperature = temperature;
    s.rng = rng;
    s.rebuild_cache();
    s.best_since_restart = s.current_cost;
    return s;
}

void ReplicaState::overwrite_matrix(PhaseMatrix m) {
    matrix = std::move(m);
    ++matrix_epoch;
}

void ReplicaState::rebuild_cache() {
    const int n = matrix.n_parties();
    rank_cache.assign(std::size_t{1} << (n - 1), 0);
    std::uint64_t total = 0;
    for (const Bipartition& s : enumerate_bipartitions(n, n / 2, true)) {
        const unsigned rk = cut_rank(matrix, s);
        rank_cache[class_index(s.mask, n)] = static_cast<std::uint8_t>(rk);
        const std::uint64_t deficit = static_cast<std::uint64_t>(s.size()) - rk;
        total += deficit * deficit;
    }
    current_cost = total;
    cache_epoch = matrix_epoch;
}

Move propose_move(ReplicaState& state) {
    const int n = state.matrix.n_parties();
    const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t idx = state.rng.next_below(pairs);
    int i = 0;
    std::uint64_t row_len = static_cast<std::uint64_t>(n) - 1;
    while (idx >= row_len) {
        idx -= row_len;
        --row_len;
        ++i;
    }
    const int j = i + 1 + static_cast<int>(idx);

    const std::uint64_t q = state.matrix.field().cardinality();
    const FieldElement current = state.matrix.at(i, j);
    FieldElement v = state.rng.next_below(q - 1);
    if (v >= current) ++v;
    return Move{i, j, v};
}

DeltaCost delta_cost(const ReplicaState& state, const Move& move) {
    if (state.cache_epoch != state.matrix_epoch)
        throw StaleCache("rank cache does not match the matrix epoch");
    DeltaCost dc;
    if (move.value == state.matrix.at(move.i, move.j)) return dc;

    const int n = state.matrix.n_parties();
    PhaseMatrix changed = state.matrix;
    changed.set_symmetric(move.i, move.j, move.value);

    const std::uint64_t end = full_mask(n);
    for (std::uint64_t mask = 1; mask < end; ++mask) {
        const int k = std::popcount(mask);
        if (k > n / 2 || !is_canonical(mask, n)) continue;
        // only cuts separating i and j see the changed entry
        const bool has_i = mask >> move.i & 1;
        const bool has_j = mask >> move.j & 1;
        if (has_i == has_j) continue;
        const unsigned old_rank = state.rank_cache[class_index(mask, n)];
        const unsigned new_rank = cut_rank(changed, Bipartition{mask});
        if (new_rank == old_rank) continue;
        dc.updates.push_back(RankUpdate{mask, new_rank});
        const std::int64_t od = k - static_cast<std::int64_t>(old_rank);
        const std::int64_t nd = k - static_cast<std::int64_t>(new_rank);
        dc.delta += nd * nd - od * od;
    }
    return dc;
}

void apply_move(ReplicaState& state, const Move& move, const DeltaCost& dc) {
    state.matrix.set_symmetric(move.i, move.j, move.value);
    const int n = state.matrix.n_parties();
    for (const RankUpdate& u : dc.updates)
        state.rank_cache[class_index(u.mask, n)] = static_cast<std::uint8_t>(u.new_rank);
    state.current_cost = static_cast<std::uint64_t>(
        static_cast<std::int64_t>(state.current_cost) + dc.delta);
    ++state.matrix_epoch;
    state.cache_epoch = state.matrix_epoch;
}

bool metropolis_accept(std::int64_t delta, double temperature, CounterRng& rng) {
    if (delta <= 0) return true;
    return rng.next_double() < std::exp(-static_cast<double>(delta) / temperature);
}

std::vector<std::pair<unsigned, unsigned>> replica_exchange(std::vector<ReplicaState>& states,
                                                            bool odd_parity, CounterRng& rng) {
    std::vector<std::pair<unsigned, unsigned>> swapped;
    for (unsigned r = odd_parity ? 1 : 0; r + 1 < states.size(); r += 2) {
        ReplicaState& a = states[r];
        ReplicaState& b = states[r + 1];
        const double exponent = (1.0 / a.temperature - 1.0 / b.temperature) *
                                (static_cast<double>(a.current_cost) -
                                 static_cast<double>(b.current_cost));
        bool accept = exponent >= 0;
        if (!accept) accept = rng.next_double() < std::exp(exponent);
        if (!accept) continue;
        // configurations swap; temperatures, rng streams, and stall counters
        // stay with their ladder slots
        std::swap(a.matrix, b.matrix);
        std::swap(a.rank_cache, b.rank_cache);
        std::swap(a.current_cost, b.current_cost);
        std::swap(a.matrix_epoch, b.matrix_epoch);
        std::swap(a.cache_epoch, b.cache_epoch);
        swapped.emplace_back(r, r + 1);
    }
    return swapped;
}

namespace {

struct BestRecord {
    PhaseMatrix matrix;
    std::uint64_t cost = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t step = 0;
    unsigned replica = 0;

    bool better_than(const BestRecord& other) const {
        if (cost != other.cost) return cost < other.cost;
        if (step != other.step) return step < other.step;
        return replica < other.replica;
    }
};

// auto ladder: percentiles of |delta C| along a short random walk
void calibrate_ladder(SearchConfig& config) {
    CounterRng rng = CounterRng::derive(config.rng_seed, kLadderStream);
    ReplicaState probe = ReplicaState::initialize(
        random_matrix(config.n_parties, config.field, rng), 1.0, rng);
    std::vector<double> magnitudes;
    magnitudes.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
        const Move move = propose_move(probe);
        const DeltaCost dc = delta_cost(probe, move);
        magnitudes.push_back(std::abs(static_cast<double>(dc.delta)));
        apply_move(probe, move, dc);
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    const double hi = magnitudes[899];
    const double lo = magnitudes[99] / 10.0;
    if (hi > 0) config.t_max = hi;
    config.t_min = lo > 0 ? lo : config.t_max / 100.0;
    if (!(config.t_max > config.t_min)) config.t_min = config.t_max / 25.0;
}

struct Engine {
    SearchConfig config;
    std::vector<ReplicaState> replicas;
    BestRecord best;
    CounterRng exchange_rng;
    std::uint64_t step = 0;
    bool odd_parity = false;
    std::uint64_t restarts_used = 0;
    std::vector<TracePoint> cost_trace;

    // window-local candidate bests, merged at barriers in replica order
    struct WindowBest {
        std::uint64_t cost = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t step = 0;
        PhaseMatrix matrix;
        bool set = false;
    };

    void seed_replicas() {
        const std::vector<double> ladder = temperature_ladder(config);
        replicas.clear();
        replicas.reserve(config.replicas);
        for (unsigned r = 0; r < config.replicas; ++r) {
            CounterRng rng = CounterRng::derive(config.rng_seed, r + 1);
            replicas.push_back(ReplicaState::initialize(
                random_matrix(config.n_parties, config.field, rng), ladder[r], rng));
        }
        for (unsigned r = 0; r < config.replicas; ++r) {
            const BestRecord candidate{replicas[r].matrix, replicas[r].current_cost, 0, r};
            if (candidate.better_than(best)) best = candidate;
        }
        cost_trace.push_back(TracePoint{0, best.cost});
    }

    // advance one replica through a window of sweeps; pure function of the
    // replica state + frozen guide snapshot, so replicas parallelize freely
    WindowBest advance(unsigned r, std::uint64_t window, const PhaseMatrix* guide) {
        ReplicaState& state = replicas[r];
        WindowBest local;
        const bool cold_half = r < config.replicas / 2;
        for (std::uint64_t w = 0; w < window; ++w) {
            const std::uint64_t sweep = step + w;

            bool moved_by_guide = false;
            if (guide && cold_half && config.guide_probability > 0 &&
                state.rng.next_double() < config.guide_probability) {
                if (!(guide->entries() == state.matrix.entries())) {
                    state.overwrite_matrix(*guide);
                    state.rebuild_cache();
                }
                moved_by_guide = true;
            }
            if (!moved_by_guide) {
                const Move move = propose_move(state);
                const DeltaCost dc = delta_cost(state, move);
                if (metropolis_accept(dc.delta, state.temperature, state.rng))
                    apply_move(state, move, dc);
            }

            if (state.current_cost < local.cost) {
                local.cost = state.current_cost;
                local.step = sweep + 1;
                local.matrix = state.matrix;
                local.set = true;
            }

            if (state.current_cost < state.best_since_restart) {
                state.best_since_restart = state.current_cost;
                state.steps_since_improvement = 0;
            } else {
                ++state.steps_since_improvement;
            }

            if ((sweep + 1) % config.cache_check_interval == 0) {
                const std::uint64_t cached = state.current_cost;
                ReplicaState fresh = state;
                fresh.rebuild_cache();
                if (fresh.current_cost != cached ||
                    fresh.rank_cache != state.rank_cache)
                    throw StaleCache("rank cache diverged from the matrix at sweep " +
                                     std::to_string(sweep + 1));
            }

            if (state.current_cost == 0) break; // this replica is done

            if (state.steps_since_improvement > config.stall_limit &&
                state.restarts_used < config.restarts) {
                state.overwrite_matrix(
                    random_matrix(config.n_parties, config.field, state.rng));
                state.rebuild_cache();
                state.best_since_restart = state.current_cost;
                state.steps_since_improvement = 0;
                ++state.restarts_used;
                if (state.current_cost < local.cost) {
                    local.cost = state.current_cost;
                    local.step = sweep + 1;
                    local.matrix = state.matrix;
                    local.set = true;
                }
            }
        }
        return local;
    }

    SearchResult run(std::uint64_t max_steps, const TraceSink& sink,
                     SearchCheckpoint* final_state) {
        const unsigned workers =
            std::min<unsigned>(resolve_threads(config.threads), config.replicas);

        Termination termination = Termination::StepBudget;
        if (best.cost == 0) termination = Termination::CostZero;

        while (best.cost != 0 && step < max_steps) {
            const std::uint64_t window = std::min<std::uint64_t>(
                config.exchange_interval, max_steps - step);
            const PhaseMatrix guide = best.matrix; // frozen snapshot for this window
            const bool use_guide = best.cost != std::numeric_limits<std::uint64_t>::max();

            std::vector<WindowBest> locals(config.replicas);
            std::exception_ptr failure;
            std::mutex failure_mutex;
            parallel_chunks(config.replicas, workers,
                            [&](std::size_t begin, std::size_t end, std::size_t) {
                                try {
                                    for (std::size_t r = begin; r < end; ++r)
                                        locals[r] = advance(static_cast<unsigned>(r), window,
                                                            use_guide ? &guide : nullptr);
                                } catch (...) {
                                    const std::lock_guard<std::mutex> lock(failure_mutex);
                                    if (!failure) failure = std::current_exception();
                                }
                            });
            if (failure) std::rethrow_exception(failure);

            step += window;
            for (unsigned r = 0; r < config.replicas; ++r) {
                if (!locals[r].set) continue;
                const BestRecord candidate{locals[r].matrix, locals[r].cost, locals[r].step, r};
                if (candidate.better_than(best)) best = candidate;
            }

            cost_trace.push_back(TracePoint{step, best.cost});
            if (sink) {
                for (unsigned r = 0; r < config.replicas; ++r)
                    sink(TraceRecord{step, r, replicas[r].temperature,
                                     replicas[r].current_cost, best.cost});
            }

            if (best.cost == 0) {
                termination = Termination::CostZero;
                break;
            }

            // exchange after every completed window, including the last one, so
            // a checkpoint at the budget boundary resumes bit-for-bit
            replica_exchange(replicas, odd_parity, exchange_rng);
            odd_parity = !odd_parity;
        }

        restarts_used = 0;
        for (const auto& r : replicas) restarts_used += r.restarts_used;

        if (best.cost == 0) {
            // certificate soundness: re-verify from scratch, never trust the cache
            if (!certify_ame(best.matrix, config.threads).is_ame)
                throw Error("internal error: zero-cost result failed certification");
        }

        if (final_state) {
            final_state->config = config;
            final_state->config.max_steps = max_steps;
            final_state->step = step;
            final_state->odd_parity = odd_parity;
            final_state->replicas = replicas;
            final_state->best = best.matrix;
            final_state->best_cost = best.cost;
            final_state->best_step = best.step;
            final_state->best_replica = best.replica;
            final_state->exchange_rng = exchange_rng;
            final_state->cost_trace = cost_trace;
        }

        SearchResult result;
        result.best = best.matrix;
        result.best_cost = best.cost;
        result.best_step = best.step;
        result.steps_taken = termination == Termination::CostZero ? best.step : step;
        result.restarts_used = restarts_used;
        result.cost_trace = std::move(cost_trace);
        result.terminated_by = termination;
        return result;
    }
};

} // namespace

SearchResult run_search(const SearchConfig& config_in, const TraceSink& sink,
                        SearchCheckpoint* final_state) {
    SearchConfig config = config_in;
    validate(config);
    if (config.auto_ladder) calibrate_ladder(config);

    Engine engine;
    engine.config = config;
    engine.exchange_rng = CounterRng::derive(config.rng_seed, kExchangeStream);
    engine.seed_replicas();
    return engine.run(config.max_steps, sink, final_state);
}

SearchResult resume_search(const SearchCheckpoint& checkpoint, std::uint64_t max_steps_override,
                           const TraceSink& sink, SearchCheckpoint* final_state) {
    validate(checkpoint.config);
    Engine engine;
    engine.config = checkpoint.config;
    engine.replicas = checkpoint.replicas;
    for (auto& r : engine.replicas) r.rebuild_cache();
    engine.best = {checkpoint.best, checkpoint.best_cost, checkpoint.best_step,
                   checkpoint.best_replica};
    engine.exchange_rng = checkpoint.exchange_rng;
    engine.step = checkpoint.step;
    engine.odd_parity = checkpoint.odd_parity;
    engine.cost_trace = checkpoint.cost_trace;
    const std::uint64_t budget =
        max_steps_override > 0 ? max_steps_override : checkpoint.config.max_steps;
    return engine.run(budget, sink, final_state);
}

namespace {

nlohmann::json replica_to_json(const ReplicaState& r) {
    return nlohmann::json{{"matrix", matrix_to_string(r.matrix)},
                          {"cost", r.current_cost},
                          {"temperature", r.temperature},
                          {"steps_since_improvement", r.steps_since_improvement},
                          {"best_since_restart", r.best_since_restart},
                          {"restarts_used", r.restarts_used},
                          {"rng_key", r.rng.key()},
                          {"rng_counter", r.rng.counter()}};
}

ReplicaState replica_from_json(const nlohmann::json& j) {
    ReplicaState r;
    r.matrix = parse_matrix(j.at("matrix").get<std::string>());
    r.temperature = j.at("temperature").get<double>();
    r.steps_since_improvement = j.at("steps_since_improvement").get<std::uint64_t>();
    r.best_since_restart = j.at("best_since_restart").get<std::uint64_t>();
    r.restarts_used = j.at("restarts_used").get<std::uint64_t>();
    r.rng = CounterRng(j.at("rng_key").get<std::uint64_t>(),
                       j.at("rng_counter").get<std::uint64_t>());
    r.rebuild_cache();
    if (r.current_cost != j.at("cost").get<std::uint64_t>())
        throw ParseError("checkpoint replica cost does not match its matrix");
    return r;
}

} // namespace

std::string SearchCheckpoint::to_json() const {
    nlohmann::json j;
    j["schema"] = "amephase-checkpoint/1";
    j["config"] = {{"n_parties", config.n_parties},
                   {"field", field_to_string(config.field)},
                   {"replicas", config.replicas},
                   {"t_min", config.t_min},
                   {"t_max", config.t_max},
                   {"max_steps", config.max_steps},
                   {"stall_limit", config.stall_limit},
                   {"exchange_interval", config.exchange_interval},
                   {"guide_probability", config.guide_probability},
                   {"rng_seed", config.rng_seed},
                   {"restarts", config.restarts},
                   {"auto_ladder", config.auto_ladder},
                   {"cache_check_interval", config.cache_check_interval},
                   {"threads", config.threads}};
    j["step"] = step;
    j["odd_parity"] = odd_parity;
    j["replicas"] = nlohmann::json::array();
    for (const auto& r : replicas) j["replicas"].push_back(replica_to_json(r));
    j["best"] = {{"matrix", matrix_to_string(best)},
                 {"cost", best_cost},
                 {"step", best_step},
                 {"replica", best_replica}};
    j["exchange_rng"] = {{"key", exchange_rng.key()}, {"counter", exchange_rng.counter()}};
    j["trace"] = nlohmann::json::array();
    for (const auto& t : cost_trace) j["trace"].push_back({t.step, t.best_cost});
    return j.dump(2);
}

SearchCheckpoint SearchCheckpoint::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("schema").get<std::string>() != "amephase-checkpoint/1")
            throw ParseError("unsupported checkpoint schema");
        SearchCheckpoint c;
        const auto& jc = j.at("config");
        c.config.n_parties = jc.at("n_parties").get<int>();
        c.config.field = field_from_string(jc.at("field").get<std::string>());
        c.config.replicas = jc.at("replicas").get<unsigned>();
        c.config.t_min = jc.at("t_min").get<double>();
        c.config.t_max = jc.at("t_max").get<double>();
        c.config.max_steps = jc.at("max_steps").get<std::uint64_t>();
        c.config.stall_limit = jc.at("stall_limit").get<std::uint64_t>();
        c.config.exchange_interval = jc.at("exchange_interval").get<std::uint64_t>();
        c.config.guide_probability = jc.at("guide_probability").get<double>();
        c.config.rng_seed = jc.at("rng_seed").get<std::uint64_t>();
        c.config.restarts = jc.at("restarts").get<std::uint64_t>();
        c.config.auto_ladder = jc.at("auto_ladder").get<bool>();
        c.config.cache_check_interval = jc.at("cache_check_interval").get<std::uint64_t>();
        c.config.threads = jc.at("threads").get<unsigned>();
        c.step = j.at("step").get<std::uint64_t>();
        c.odd_parity = j.at("odd_parity").get<bool>();
        for (const auto& jr : j.at("replicas")) c.replicas.push_back(replica_from_json(jr));
        c.best = parse_matrix(j.at("best").at("matrix").get<std::string>());
        c.best_cost = j.at("best").at("cost").get<std::uint64_t>();
        c.best_step = j.at("best").at("step").get<std::uint64_t>();
        c.best_replica = j.at("best").at("replica").get<unsigned>();
        c.exchange_rng = CounterRng(j.at("exchange_rng").at("key").get<std::uint64_t>(),
                                    j.at("exchange_rng").at("counter").get<std::uint64_t>());
        for (const auto& jt : j.at("trace"))
            c.cost_trace.push_back(TracePoint{jt.at(0).get<std::uint64_t>(),
                                              jt.at(1).get<std::uint64_t>()});
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

} // namespace ame
