#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ame/search.hpp"

#include <cmath>
#include <map>

using namespace ame;

namespace {

PhaseMatrix random_phase(int n, const FieldSpec& f, CounterRng& rng) {
    PhaseMatrix p(n, f);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) p.set_symmetric(i, j, rng.next_below(f.cardinality()));
    return p;
}

SearchConfig base_config(int n, FieldSpec f, std::uint64_t seed) {
    SearchConfig c;
    c.n_parties = n;
    c.field = std::move(f);
    c.rng_seed = seed;
    c.guide_probability = 0.0;
    return c;
}

} // namespace

TEST_CASE("temperature ladder") {
    SearchConfig c = base_config(4, FieldSpec::prime(2), 1);
    c.replicas = 4;
    c.t_min = 0.5;
    c.t_max = 4.0;
    const auto t = temperature_ladder(c);
    REQUIRE(t.size() == 4);
    CHECK(t[0] == doctest::Approx(0.5));
    CHECK(t[3] == doctest::Approx(4.0));
    for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(t[i] > t[i - 1]);
        CHECK(t[i] / t[i - 1] == doctest::Approx(t[1] / t[0]).epsilon(1e-12)); // geometric
    }
    c.replicas = 1;
    CHECK(temperature_ladder(c) == std::vector<double>{0.5});
}

TEST_CASE("config validation") {
    SearchConfig c = base_config(4, FieldSpec::prime(3), 1);
    c.t_min = 0;
    CHECK_THROWS_AS((void)run_search(c), InvalidConfig);
    c = base_config(4, FieldSpec::prime(3), 1);
    c.t_max = c.t_min / 2;
    CHECK_THROWS_AS((void)run_search(c), InvalidConfig);
    c = base_config(4, FieldSpec::composite({2, 3}), 1);
    CHECK_THROWS_AS((void)run_search(c), InvalidConfig);
    c = base_config(4, FieldSpec::prime(3), 1);
    c.exchange_interval = 0;
    CHECK_THROWS_AS((void)run_search(c), InvalidConfig);
}

TEST_CASE("propose_move basics") {
    CounterRng rng = CounterRng::derive(61, 0);
    SUBCASE("N=2 always proposes the single pair with a changed value") {
        ReplicaState s = ReplicaState::initialize(
            random_phase(2, FieldSpec::prime(5), rng), 1.0, CounterRng::derive(61, 1));
        for (int t = 0; t < 50; ++t) {
            const Move m = propose_move(s);
            CHECK(m.i == 0);
            CHECK(m.j == 1);
            CHECK(m.value != s.matrix.at(0, 1));
            CHECK(m.value < 5);
        }
    }
    SUBCASE("p=2 always proposes the complement bit") {
        ReplicaState s = ReplicaState::initialize(
            random_phase(3, FieldSpec::prime(2), rng), 1.0, CounterRng::derive(61, 2));
        for (int t = 0; t < 50; ++t) {
            const Move m = propose_move(s);
            CHECK(m.value == (1 - s.matrix.at(m.i, m.j)));
        }
    }
}

TEST_CASE("propose_move pair distribution is uniform") {
    CounterRng rng = CounterRng::derive(62, 0);
    ReplicaState s = ReplicaState::initialize(
        random_phase(4, FieldSpec::prime(3), rng), 1.0, CounterRng::derive(62, 1));
    std::map<std::pair<int, int>, int> counts;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const Move m = propose_move(s);
        ++counts[{m.i, m.j}];
    }
    REQUIRE(counts.size() == 6);
    const double expect = trials / 6.0;
    const double sigma = std::sqrt(trials * (1.0 / 6.0) * (5.0 / 6.0));
    for (const auto& [pair, count] : counts)
        CHECK(std::abs(count - expect) <= 3 * sigma);
}

TEST_CASE("metropolis_accept") {
    CounterRng rng = CounterRng::derive(63, 0);
    CHECK(metropolis_accept(-3, 0.5, rng));
    CHECK(metropolis_accept(0, 0.5, rng));

    // empirical acceptance of delta=2 at T=1 is e^{-2}
    const int trials = 100000;
    int accepted = 0;
    for (int t = 0; t < trials; ++t)
        if (metropolis_accept(2, 1.0, rng)) ++accepted;
    const double want = std::exp(-2.0);
    const double sigma = std::sqrt(trials * want * (1 - want));
    CHECK(std::abs(accepted - trials * want) <= 3 * sigma);
}

TEST_CASE("delta_cost: identity move and stale cache") {
    CounterRng rng = CounterRng::derive(64, 0);
    ReplicaState s = ReplicaState::initialize(
        random_phase(4, FieldSpec::prime(3), rng), 1.0, CounterRng::derive(64, 1));

    const Move noop{0, 1, s.matrix.at(0, 1)};
    const DeltaCost dc = delta_cost(s, noop);
    CHECK(dc.delta == 0);
    CHECK(dc.updates.empty());

    s.overwrite_matrix(random_phase(4, FieldSpec::prime(3), rng));
    CHECK_THROWS_AS((void)delta_cost(s, Move{0, 1, 0}), StaleCache);
    s.rebuild_cache();
    CHECK_NOTHROW((void)delta_cost(s, Move{0, 1, 0}));
}

TEST_CASE("delta_cost: first move from the zero matrix at N=4 p=2") {
    ReplicaState s = ReplicaState::initialize(PhaseMatrix(4, FieldSpec::prime(2)), 1.0,
                                              CounterRng::derive(65, 1));
    CHECK(s.current_cost == 16);
    const Move m{0, 1, 1};
    const DeltaCost dc = delta_cost(s, m);
    PhaseMatrix moved = s.matrix;
    moved.set_symmetric(0, 1, 1);
    CHECK(static_cast<std::int64_t>(cost(moved)) - static_cast<std::int64_t>(cost(s.matrix)) ==
          dc.delta);
    // only classes separating 0 and 1 may appear in the update list
    for (const auto& u : dc.updates) {
        const bool has0 = u.mask & 1;
        const bool has1 = u.mask >> 1 & 1;
        CHECK(has0 != has1);
    }
    apply_move(s, m, dc);
    CHECK(s.current_cost == cost(s.matrix));
}

TEST_CASE("delta_cost equals full recompute on random instances") {
    CounterRng rng = CounterRng::derive(66, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(9)); // up to N=10
        const std::uint64_t q = std::vector<std::uint64_t>{2, 3, 5}[rng.next_below(3)];
        ReplicaState s = ReplicaState::initialize(
            random_phase(n, FieldSpec::prime(q), rng), 1.0,
            CounterRng::derive(66, trial + 1));
        const Move m = propose_move(s);
        const DeltaCost dc = delta_cost(s, m);
        PhaseMatrix moved = s.matrix;
        moved.set_symmetric(m.i, m.j, m.value);
        const std::int64_t full =
            static_cast<std::int64_t>(cost(moved)) - static_cast<std::int64_t>(cost(s.matrix));
        CHECK(dc.delta == full);
        apply_move(s, m, dc);
        CHECK(s.current_cost == cost(s.matrix));
        ReplicaState fresh = s;
        fresh.rebuild_cache();
        CHECK(fresh.rank_cache == s.rank_cache);
    }
}

TEST_CASE("replica_exchange probabilities") {
    CounterRng init = CounterRng::derive(67, 0);
    auto make_states = [&](std::uint64_t cost_a_edge, std::uint64_t cost_b_edge) {
        // N=2 p=2: edge value 1 has cost 0, value 0 has cost 1
        std::vector<ReplicaState> states;
        PhaseMatrix a(2, FieldSpec::prime(2));
        a.set_symmetric(0, 1, cost_a_edge);
        PhaseMatrix b(2, FieldSpec::prime(2));
        b.set_symmetric(0, 1, cost_b_edge);
        states.push_back(ReplicaState::initialize(a, 0.4, CounterRng::derive(67, 1)));
        states.push_back(ReplicaState::initialize(b, 2.0, CounterRng::derive(67, 2)));
        return states;
    };

    SUBCASE("equal costs always swap") {
        auto states = make_states(1, 1);
        CounterRng rng = CounterRng::derive(67, 3);
        const auto swaps = replica_exchange(states, false, rng);
        REQUIRE(swaps.size() == 1);
        CHECK(swaps[0] == std::pair<unsigned, unsigned>{0, 1});
    }
    SUBCASE("cold better than hot swaps only sometimes") {
        // cold cost 0, hot cost 1: exponent (1/0.4 - 1/2)(0 - 1) = -2.1 < 0
        CounterRng rng = CounterRng::derive(67, 4);
        int swapped = 0;
        const int trials = 20000;
        for (int t = 0; t < trials; ++t) {
            auto states = make_states(1, 0);
            if (!replica_exchange(states, false, rng).empty()) ++swapped;
        }
        const double want = std::exp(-2.1);
        const double sigma = std::sqrt(trials * want * (1 - want));
        CHECK(std::abs(swapped - trials * want) <= 3 * sigma);
    }
    SUBCASE("temperatures stay with slots, configurations move") {
        auto states = make_states(1, 1);
        CounterRng rng = CounterRng::derive(67, 5);
        const auto before0 = states[0].matrix;
        (void)replica_exchange(states, false, rng);
        CHECK(states[0].temperature == 0.4);
        CHECK(states[1].temperature == 2.0);
        CHECK(states[1].matrix == before0);
    }
}

TEST_CASE("two-level Gibbs occupancy with exchange enabled") {
    // N=2 p=2 is a two-state landscape: cost 1 (edge 0) and cost 0 (edge 1).
    // Running both replicas with Metropolis + exchange must reproduce each
    // replica's own Gibbs occupancy pi(cost1) = e^{-1/T}/(1 + e^{-1/T}).
    std::vector<ReplicaState> states;
    states.push_back(ReplicaState::initialize(PhaseMatrix(2, FieldSpec::prime(2)), 0.8,
                                              CounterRng::derive(68, 1)));
    states.push_back(ReplicaState::initialize(PhaseMatrix(2, FieldSpec::prime(2)), 2.0,
                                              CounterRng::derive(68, 2)));
    CounterRng xrng = CounterRng::derive(68, 3);

    const int sweeps = 1000000;
    std::vector<std::int64_t> high_count(2, 0);
    bool parity = false;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (auto& s : states) {
            const Move m = propose_move(s);
            const DeltaCost dc = delta_cost(s, m);
            if (metropolis_accept(dc.delta, s.temperature, s.rng)) apply_move(s, m, dc);
        }
        (void)replica_exchange(states, parity, xrng);
        parity = !parity;
        for (int r = 0; r < 2; ++r) high_count[r] += states[r].current_cost == 1;
    }
    for (int r = 0; r < 2; ++r) {
        const double boltz = std::exp(-1.0 / states[r].temperature);
        const double want = boltz / (1.0 + boltz);
        const double got = static_cast<double>(high_count[r]) / sweeps;
        CHECK(std::abs(got - want) / want < 0.02);
    }
}

TEST_CASE("run_search solves N=3 p=2") {
    SearchConfig c = base_config(3, FieldSpec::prime(2), 1);
    const SearchResult r = run_search(c);
    CHECK(r.terminated_by == Termination::CostZero);
    CHECK(r.best_cost == 0);
    CHECK(certify_ame(r.best).is_ame);
}

TEST_CASE("run_search is deterministic across runs and thread counts") {
    SearchConfig c = base_config(5, FieldSpec::prime(3), 42);
    c.max_steps = 400;
    c.stall_limit = 150;
    const SearchResult r1 = run_search(c);
    const SearchResult r2 = run_search(c);
    CHECK(r1.best.entries() == r2.best.entries());
    CHECK(r1.best_cost == r2.best_cost);
    CHECK(r1.steps_taken == r2.steps_taken);
    REQUIRE(r1.cost_trace.size() == r2.cost_trace.size());
    for (std::size_t i = 0; i < r1.cost_trace.size(); ++i)
        CHECK(r1.cost_trace[i].best_cost == r2.cost_trace[i].best_cost);

    SearchConfig c1 = c;
    c1.threads = 1;
    SearchConfig c8 = c;
    c8.threads = 8;
    const SearchResult t1 = run_search(c1);
    const SearchResult t8 = run_search(c8);
    CHECK(t1.best.entries() == t8.best.entries());
    CHECK(t1.best_cost == t8.best_cost);
    CHECK(t1.steps_taken == t8.steps_taken);
}

TEST_CASE("monotone best trace") {
    SearchConfig c = base_config(6, FieldSpec::prime(2), 7);
    c.max_steps = 2000;
    c.stall_limit = 300; // force reheats; best must still never regress
    const SearchResult r = run_search(c);
    for (std::size_t i = 1; i < r.cost_trace.size(); ++i)
        CHECK(r.cost_trace[i].best_cost <= r.cost_trace[i - 1].best_cost);
}

TEST_CASE("guide bias keeps results deterministic") {
    SearchConfig c = base_config(5, FieldSpec::prime(2), 13);
    c.guide_probability = 0.2;
    c.max_steps = 500;
    const SearchResult r1 = run_search(c);
    const SearchResult r2 = run_search(c);
    CHECK(r1.best.entries() == r2.best.entries());
    CHECK(r1.steps_taken == r2.steps_taken);
}

TEST_CASE("single replica degenerates to annealing") {
    SearchConfig c = base_config(3, FieldSpec::prime(2), 5);
    c.replicas = 1;
    const SearchResult r = run_search(c);
    CHECK(r.best_cost == 0);
    CHECK(certify_ame(r.best).is_ame);
}

TEST_CASE("auto ladder pre-pass") {
    SearchConfig c = base_config(5, FieldSpec::prime(3), 9);
    c.auto_ladder = true;
    c.max_steps = 2000;
    const SearchResult r = run_search(c); // must run and stay deterministic
    const SearchResult r2 = run_search(c);
    CHECK(r.best_cost == r2.best_cost);
    CHECK(r.best.entries() == r2.best.entries());
}

TEST_CASE("trace sink receives barrier records") {
    SearchConfig c = base_config(4, FieldSpec::prime(2), 3);
    c.max_steps = 100;
    c.exchange_interval = 25;
    c.replicas = 3;
    std::vector<TraceRecord> records;
    (void)run_search(c, [&](const TraceRecord& t) { records.push_back(t); });
    CHECK(!records.empty());
    CHECK(records.size() % 3 == 0); // one per replica per barrier
    for (const auto& t : records) {
        CHECK(t.step % 25 == 0);
        CHECK(t.replica < 3);
        CHECK(t.best_cost <= t.cost);
    }
}

TEST_CASE("checkpoint resume is exact") {
    SearchConfig c = base_config(4, FieldSpec::prime(2), 11); // AME(4,2) absent: never terminates early
    c.max_steps = 600;
    c.exchange_interval = 50;
    c.stall_limit = 100;
    const SearchResult straight = run_search(c);

    SearchConfig half = c;
    half.max_steps = 300;
    SearchCheckpoint mid;
    (void)run_search(half, {}, &mid);

    // JSON round trip, then continue to the full budget
    const SearchCheckpoint restored = SearchCheckpoint::from_json(mid.to_json());
    SearchCheckpoint final_state;
    const SearchResult resumed = resume_search(restored, 600, {}, &final_state);

    CHECK(resumed.best.entries() == straight.best.entries());
    CHECK(resumed.best_cost == straight.best_cost);
    CHECK(resumed.steps_taken == straight.steps_taken);
    REQUIRE(resumed.cost_trace.size() == straight.cost_trace.size());
    for (std::size_t i = 0; i < straight.cost_trace.size(); ++i) {
        CHECK(resumed.cost_trace[i].step == straight.cost_trace[i].step);
        CHECK(resumed.cost_trace[i].best_cost == straight.cost_trace[i].best_cost);
    }
    CHECK(final_state.step == 600);
}

TEST_CASE("search over N=4 p=2 exhausts the budget with positive cost") {
    SearchConfig c = base_config(4, FieldSpec::prime(2), 17);
    c.max_steps = 3000;
    c.stall_limit = 500;
    const SearchResult r = run_search(c);
    CHECK(r.terminated_by == Termination::StepBudget);
    CHECK(r.best_cost > 0);
    CHECK(r.steps_taken == 3000);
}
