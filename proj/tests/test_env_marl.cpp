#include <cmath>
#include <vector>

#include "doctest.h"
#include "sttl/env_marl.hpp"
#include "sttl/env_sarl.hpp"
#include "sttl/requests.hpp"
#include "sttl/rng.hpp"

using namespace sttl;

namespace {

Config desk_config(int num_sbs) {
  Config cfg;
  cfg.apply("rng_seed", "3");
  cfg.num_files = 2;
  cfg.num_sbs = num_sbs;
  cfg.num_slots = 2;
  cfg.update_period = 0.5;
  cfg.cache_capacity = 1.0;
  cfg.cost_update = 0.05;
  cfg.cost_sbs = 0.0;
  return cfg;
}

RequestTrace shared_trace() {
  // One file, three requests, both SBSs cover everything.
  RequestTrace trace;
  trace.num_files = 1;
  trace.num_sbs = 2;
  trace.records = {
      {1.0, 1, 0b11u, -1, true}, {2.0, 1, 0b11u, -1, true}, {3.0, 1, 0b11u, -1, true},
  };
  link_same_file(trace);
  return trace;
}

}  // namespace

TEST_CASE("single-SBS system reproduces the synchronous environment") {
  Config cfg = desk_config(1);
  cfg.num_files = 3;

  // Force full coverage so the filtered view equals the global trace.
  RequestTrace trace = generate_trace(cfg, 400, cfg.seed());
  for (TraceRecord& rec : trace.records) rec.coverage = 0b1u;
  link_same_file(trace);

  SarlEnv sync(cfg);
  MarlSystem async(cfg);
  CHECK(async.state_dim() == sync.state_dim());  // B - 1 = 0 extra entries

  sync.reset(&trace);
  async.reset(&trace);

  Rng rng(9);
  int steps = 0;
  while (true) {
    const int b = async.next_agent();
    const bool sync_done = sync.done();
    if (b == -1) {
      CHECK(sync_done);
      break;
    }
    REQUIRE(b == 1);
    REQUIRE_FALSE(sync_done);

    const std::vector<double>& sa = async.agent_state(b);
    const std::vector<double>& ss = sync.state();
    REQUIRE(sa.size() == ss.size());
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == ss[i]);

    std::vector<double> action(3);
    for (double& v : action) v = rng.uniform01();
    Transition ta = async.step_agent(action);
    Transition ts = sync.step(action);
    CHECK(ta.r_sbs == ts.r_sbs);
    CHECK(ta.r_upd == ts.r_upd);  // per-agent prefactor 1 equals B = 1
    CHECK(ta.r_mem == ts.r_mem);
    CHECK(ta.reward == ts.reward);
    CHECK(ta.done == ts.done);
    ++steps;
  }
  CHECK(steps > 100);
  CHECK(async.ledger().sbs_bytes == sync.ledger().sbs_bytes);
  CHECK(async.ledger().mbs_bytes == sync.ledger().mbs_bytes);
  CHECK(async.ledger().update_bytes == sync.ledger().update_bytes);
}

TEST_CASE("agents at a shared record step in id order with one-sided staleness") {
  Config cfg = desk_config(2);
  cfg.num_files = 1;
  MarlSystem system(cfg);
  RequestTrace trace = shared_trace();
  system.reset(&trace);

  // Record 0: both agents pending, agent 1 first.
  REQUIRE(system.next_agent() == 1);
  // Gap 1.0 -> slot 2; agent 1 caches x[2] = 0.6 and publishes it.
  Transition t1 = system.step_agent(std::vector<double>{0.9, 0.8, 0.6});
  // Agent 2 has not acted: its board row is cold, so agent 1 sees only itself.
  CHECK(t1.r_sbs == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(t1.r_upd == doctest::Approx(0.9).epsilon(1e-12));  // prefactor 1
  CHECK(system.board().get(1, 1) == doctest::Approx(0.6).epsilon(1e-12));

  REQUIRE(system.next_agent() == 2);
  // Agent 2 now reads agent 1's fresh estimate 0.6 at step time.
  Transition t2 = system.step_agent(std::vector<double>{0.5, 0.5, 0.3});
  CHECK(t2.r_sbs == doctest::Approx(std::min(0.3 + 0.6, 1.0)).epsilon(1e-12));
  CHECK(system.board().get(2, 1) == doctest::Approx(0.3).epsilon(1e-12));

  // Record 1: delivery drawn from both true caches (0.6 + 0.3), then both
  // agents act again; this is their final step (record 2 is the last).
  REQUIRE(system.next_agent() == 1);
  Transition t3 = system.step_agent(std::vector<double>{1.0, 1.0, 1.0});
  CHECK(t3.done);
  CHECK(t3.r_sbs == doctest::Approx(1.0).epsilon(1e-12));  // min(1 + 0.3, 1)
  REQUIRE(system.next_agent() == 2);
  Transition t4 = system.step_agent(std::vector<double>{0.0, 0.0, 0.0});
  CHECK(t4.done);
  // Agent 2's new cache is 0; agent 1 just published 1.0.
  CHECK(t4.r_sbs == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(system.next_agent() == -1);

  const LoadLedger& ledger = system.ledger();
  // Deliveries: record 0 cold (0), record 1 min(0.6+0.3, 1) = 0.9. Record 2
  // is never visited: every agent has taken its final step before it.
  CHECK(ledger.num_requests == 2);
  CHECK(ledger.sbs_bytes == doctest::Approx(0.0 + 0.9).epsilon(1e-12));
  CHECK(ledger.mbs_bytes == doctest::Approx(1.0 + 0.1).epsilon(1e-12));
  CHECK(ledger.elapsed_time == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a finished agent keeps serving its frozen cache") {
  Config cfg = desk_config(2);
  cfg.num_files = 1;
  RequestTrace trace;
  trace.num_files = 1;
  trace.num_sbs = 2;
  trace.records = {
      {1.0, 1, 0b11u, -1, true},  // both
      {2.0, 1, 0b11u, -1, true},  // both: agent 2's last covered record
      {3.0, 1, 0b01u, -1, true},  // agent 1 only
      {4.0, 1, 0b01u, -1, true},
  };
  link_same_file(trace);

  MarlSystem system(cfg);
  system.reset(&trace);

  REQUIRE(system.next_agent() == 1);
  system.step_agent(std::vector<double>{0.4, 0.4, 0.4});  // mu_1 = 0.4
  REQUIRE(system.next_agent() == 2);
  Transition t2 = system.step_agent(std::vector<double>{0.2, 0.2, 0.2});  // mu_2 = 0.2
  CHECK(t2.done);  // record 1 is agent 2's final filtered position

  // Record 1: delivery 0.4 + 0.2; agent 1 acts, agent 2 is done but serves.
  REQUIRE(system.next_agent() == 1);
  Transition t3 = system.step_agent(std::vector<double>{0.7, 0.7, 0.7});
  CHECK_FALSE(t3.done);
  // Record 2: only agent 1 covers; delivery 0.7. Agent 1 acts once more.
  REQUIRE(system.next_agent() == 1);
  Transition t4 = system.step_agent(std::vector<double>{0.0, 0.0, 0.0});
  CHECK(t4.done);
  CHECK(system.next_agent() == -1);

  const LoadLedger& ledger = system.ledger();
  // Deliveries: 0 (cold), 0.6, 0.7, and record 3 is reached by no live agent.
  CHECK(ledger.num_requests == 3);
  CHECK(ledger.sbs_bytes == doctest::Approx(0.0 + 0.6 + 0.7).epsilon(1e-12));

  CHECK(system.agent_steps(1) == 3);
  CHECK(system.agent_steps(2) == 1);
}

TEST_CASE("uncovered agents are inert and fully uncovered traces are rejected") {
  Config cfg = desk_config(2);
  cfg.num_files = 1;
  RequestTrace only_first;
  only_first.num_files = 1;
  only_first.num_sbs = 2;
  only_first.records = {
      {1.0, 1, 0b01u, -1, true}, {2.0, 1, 0b01u, -1, true}, {3.0, 1, 0b01u, -1, true},
  };
  link_same_file(only_first);

  MarlSystem system(cfg);
  system.reset(&only_first);
  CHECK_FALSE(system.agent_inert(1));
  CHECK(system.agent_inert(2));
  while (true) {
    const int b = system.next_agent();
    if (b == -1) break;
    CHECK(b == 1);
    system.step_agent(std::vector<double>{0.5, 0.5, 0.5});
  }

  RequestTrace nobody;
  nobody.num_files = 1;
  nobody.num_sbs = 2;
  nobody.records = {
      {1.0, 1, 0b10u, -1, true}, {2.0, 1, 0b10u, -1, true},
  };
  link_same_file(nobody);
  // Agent 2 could act, so the trace is fine; but if no agent can step at all:
  MarlSystem sys2(cfg);
  CHECK_NOTHROW(sys2.reset(&nobody));

  RequestTrace single;
  single.num_files = 1;
  single.num_sbs = 2;
  single.records = {{1.0, 1, 0b01u, -1, true}};
  link_same_file(single);
  CHECK_THROWS(sys2.reset(&single));
}

TEST_CASE("per-agent states carry the other agents' estimates") {
  Config cfg = desk_config(2);
  cfg.num_files = 2;
  MarlSystem system(cfg);
  CHECK(system.state_dim() == 3 * 2 + 1);

  RequestTrace trace;
  trace.num_files = 2;
  trace.num_sbs = 2;
  trace.records = {
      {1.0, 1, 0b11u, -1, true}, {2.0, 1, 0b11u, -1, true}, {3.0, 1, 0b11u, -1, true},
  };
  link_same_file(trace);
  system.reset(&trace);

  REQUIRE(system.next_agent() == 1);
  system.step_agent(std::vector<double>{0.8, 0.8, 0.8});
  REQUIRE(system.next_agent() == 2);
  // Agent 2's acting state was assembled at reset, before agent 1 published:
  // the estimate slot is still cold.
  const std::vector<double>& s2 = system.agent_state(2);
  CHECK(s2[6] == 0.0);
  Transition t2 = system.step_agent(std::vector<double>{0.1, 0.1, 0.1});
  // Its next state is assembled at step time and sees agent 1's estimate.
  CHECK(t2.next_state[6] == doctest::Approx(0.8).epsilon(1e-12));
}
