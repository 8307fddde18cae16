#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "thinktank/error.hpp"
#include "thinktank/llm/hash_embedding.hpp"
#include "thinktank/memory/note_store.hpp"
#include "thinktank/memory/session_memory.hpp"
#include "thinktank/persistence/store.hpp"
#include "thinktank/text.hpp"

using namespace thinktank;
using namespace thinktank::memory;
using tt_test::TempDir;

namespace {

/// Content whose rendered turn is exactly `rendered` characters long.
std::string content_for(const std::string& speaker, Phase phase, std::size_t rendered) {
  const std::size_t overhead = text::char_count(render_turn({speaker, phase, "x"})) - 1;
  return std::string(rendered - overhead, 'a');
}

}  // namespace

TEST_CASE("session memory is append-only and renders in order") {
  SessionMemory s0{"m1", {}};
  const auto s1 = append_turn(s0, "A", Phase::expert_turn, "first");
  const auto s2 = append_turn(s1, "B", Phase::critique, "second");
  CHECK(s0.turns.empty());
  CHECK(s1.turns.size() == 1);
  CHECK(s2.turns.size() == 2);
  CHECK(render_turn(s2.turns[1]) == "[B/critique] second\n");
  CHECK(session_context(s2, 1000) == "[A/expert_turn] first\n[B/critique] second\n");
  CHECK_THROWS_AS(append_turn(s2, "C", Phase::guidance, ""), Error);
}

TEST_CASE("session context keeps the newest turns that fit") {
  SessionMemory s{"m", {}};
  for (const char* who : {"A", "B", "C"}) s = append_turn(s, who, Phase::expert_turn, content_for(who, Phase::expert_turn, 400));
  const auto ctx = session_context(s, 900);
  CHECK(text::char_count(ctx) == 800);
  CHECK(ctx.rfind("[B/expert_turn]", 0) == 0);
  CHECK(ctx.find("[A/") == std::string::npos);
  CHECK(text::char_count(session_context(s, 1200)) == 1200);
  CHECK(text::char_count(session_context(s, 1199)) == 800);
}

TEST_CASE("session context truncates a newest turn larger than the budget") {
  SessionMemory s{"m", {}};
  s = append_turn(s, "A", Phase::expert_turn, "old");
  s = append_turn(s, "B", Phase::expert_turn, std::string(500, 'z') + "END");
  const auto ctx = session_context(s, 100);
  CHECK(text::char_count(ctx) == 100);
  CHECK(ctx.rfind(std::string(text::kTruncationMarker), 0) == 0);
  CHECK(ctx.ends_with("END\n"));
  CHECK(session_context(s, 0).empty());
  CHECK(session_context(SessionMemory{}, 100).empty());
}

TEST_CASE("long-term notes: recall matches a cosine oracle and persists across restart") {
  TempDir tmp;
  SteppingClock clock;
  IdGenerator ids(clock, 8);
  llm::ScriptedGateway gateway(llm::Script::builtin());
  std::string pid;
  std::vector<LongTermNote> stored;
  std::mt19937_64 rng(41);
  std::vector<ScoredNote> first;
  const std::string query = "skin render budget";
  {
    persistence::Store store(tmp.path());
    auto p = create_project("Mem", "", {}, ids, clock);
    add_expert(p, "Ada", "", ids);
    add_expert(p, "Bo", "", ids);
    store.save_project(p);
    pid = p.id;
    MemoryStore mem(store, gateway, clock, ids);
    for (int i = 0; i < 50; ++i) {
      stored.push_back(mem.store_note("Ada", pid, tt_test::random_words(rng, 6), NoteOrigin::manual));
    }
    mem.store_note("Bo", pid, "skin render budget", NoteOrigin::warmup);
    first = mem.recall_notes("Ada", pid, query, 3);
  }
  persistence::Store store(tmp.path());
  MemoryStore mem(store, gateway, clock, ids);
  const auto again = mem.recall_notes("Ada", pid, query, 3);

  const auto q = llm::hash_embedding(query, gateway.embedding_dim());
  std::vector<double> scores;
  for (const auto& n : stored) scores.push_back(tt_test::cosine_oracle(llm::hash_embedding(n.text, gateway.embedding_dim()), q));
  std::vector<std::size_t> order(stored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  REQUIRE(first.size() == 3);
  REQUIRE(again.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(first[i].note.note_id == stored[order[i]].note_id);
    CHECK(again[i].note.note_id == first[i].note.note_id);
    CHECK(again[i].score == doctest::Approx(scores[order[i]]).epsilon(1e-6));
    CHECK(again[i].note.agent_name == "Ada");
  }
  CHECK(mem.notes_of("Ada", pid).size() == 50);
  CHECK(mem.notes_of("Bo", pid).size() == 1);
  CHECK(mem.notes_of("Bo", pid)[0].origin == NoteOrigin::warmup);
}

TEST_CASE("long-term notes: unknown agents and projects") {
  TempDir tmp;
  SteppingClock clock;
  IdGenerator ids(clock, 8);
  llm::ScriptedGateway gateway(llm::Script::builtin());
  persistence::Store store(tmp.path());
  auto p = create_project("Mem", "", {}, ids, clock);
  store.save_project(p);
  MemoryStore mem(store, gateway, clock, ids);
  CHECK_THROWS_AS(mem.store_note("Nobody", p.id, "x", NoteOrigin::manual), Error);
  CHECK_THROWS_AS(mem.store_note("Ada", "prj_missing", "x", NoteOrigin::manual), Error);
  CHECK_NOTHROW(mem.store_note(std::string(kCoordinatorName), p.id, "a synthesis", NoteOrigin::round_synthesis));
  CHECK_THROWS_AS(mem.store_note(std::string(kCoordinatorName), p.id, "  ", NoteOrigin::manual), Error);
  CHECK(mem.recall_notes(std::string(kCriticName), p.id, "anything", 3).empty());
  CHECK(parse_note_origin(to_string(NoteOrigin::round_synthesis)) == NoteOrigin::round_synthesis);
}
