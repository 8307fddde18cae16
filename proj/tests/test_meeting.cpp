#include <doctest.h>

#include <atomic>
#include <fstream>
#include <mutex>

#include "support.hpp"
#include "thinktank/error.hpp"
#include "thinktank/meeting/prompts.hpp"
#include "thinktank/meeting/synthesis_parser.hpp"
#include "thinktank/persistence/fs_util.hpp"

using namespace thinktank;
using namespace thinktank::meeting;
using tt_test::Rig;

namespace {

class Collector final : public EventListener {
 public:
  void on_event(const MeetingEvent& e) override {
    std::lock_guard lock(mu_);
    events.push_back(e);
  }
  std::mutex mu_;
  std::vector<MeetingEvent> events;
};

std::vector<llm::ChatRequest> requests_for(const llm::ScriptedGateway& g, const std::string& phase, int round,
                                           const std::string& speaker = {}) {
  std::vector<llm::ChatRequest> out;
  for (const auto& r : g.captured()) {
    if (r.tags.phase == phase && r.tags.round == round && (speaker.empty() || r.tags.speaker == speaker)) {
      out.push_back(r);
    }
  }
  return out;
}

std::string user_text(const llm::ChatRequest& r) {
  for (const auto& m : r.messages) {
    if (m.role == llm::MessageRole::user) return m.content;
  }
  return {};
}

MeetingConfig team_config(const ProjectRecord& p, std::size_t n, int rounds, std::string agenda = "Plan the demo") {
  MeetingConfig c;
  c.project_id = p.id;
  c.agenda = std::move(agenda);
  c.rounds = rounds;
  c.participants = tt_test::expert_names(n);
  return c;
}

/// Builtin responses plus overrides placed in front of them.
llm::Script script_with(std::vector<llm::ScriptRule> front) {
  auto s = llm::Script::builtin();
  front.insert(front.end(), s.rules.begin(), s.rules.end());
  s.rules = std::move(front);
  return s;
}

llm::ScriptRule rule(std::optional<std::string> phase, std::string response, std::optional<int> attempt = {},
                     std::optional<int> round = {}, std::optional<std::string> contains = {}) {
  llm::ScriptRule r;
  r.match.phase = std::move(phase);
  r.match.attempt = attempt;
  r.match.round = round;
  r.match.contains = std::move(contains);
  r.response = std::move(response);
  return r;
}

}  // namespace

TEST_CASE("synthesis parser: canonical, decorated and loose forms") {
  const auto a = parse_synthesis("SYNTHESIS:\nWe agree.\nFOLLOW-UP QUESTIONS:\n1. Why?\n2. How?");
  REQUIRE(a);
  CHECK(a->synthesis == "We agree.");
  CHECK(a->follow_up_questions == std::vector<std::string>{"Why?", "How?"});

  const auto b = parse_synthesis("Intro text\n## **Synthesis:**\nLine one\nLine two\n\n### Follow-up questions\n- A\n"
                                 "  continued\n* B\n3) C");
  REQUIRE(b);
  CHECK(b->synthesis == "Line one\nLine two");
  CHECK(b->follow_up_questions == std::vector<std::string>{"A continued", "B", "C"});

  const auto c = parse_synthesis("synthesis:\nDone.\nfollow-up questions:\nNone.");
  REQUIRE(c);
  CHECK(c->follow_up_questions.empty());

  const auto d = parse_synthesis("SYNTHESIS:\nx\nFOLLOW-UP QUESTIONS:\nWhat about cost?");
  REQUIRE(d);
  CHECK(d->follow_up_questions == std::vector<std::string>{"What about cost?"});

  CHECK_FALSE(parse_synthesis("just prose"));
  CHECK_FALSE(parse_synthesis("SYNTHESIS:\n\nFOLLOW-UP QUESTIONS:\n1. q"));
  CHECK_FALSE(parse_synthesis("FOLLOW-UP QUESTIONS:\n1. q\nSYNTHESIS:\ntext"));
  CHECK_FALSE(parse_synthesis("SYNTHESIS: is what we need\nFOLLOW-UP QUESTIONS:\n1. q"));

  const ParsedSynthesis p{"Sum", {"Q1", "Q2"}};
  CHECK(render_synthesis(p) == "SYNTHESIS:\nSum\nFOLLOW-UP QUESTIONS:\n1. Q1\n2. Q2");
  CHECK(parse_synthesis(render_synthesis(p)) == p);
  CHECK(degrade_synthesis("  raw  ") == ParsedSynthesis{"raw", {}});
}

TEST_CASE("prompt sections render and extract") {
  const auto s = render_section("Agenda", "  body  ", 100);
  CHECK(s == "## Agenda\nbody\n\n");
  CHECK(render_section("Agenda", " ", 100) == "## Agenda\nnone\n\n");
  const std::string prompt = render_section("A", "one", 100) + render_section("B", "two\nlines", 100);
  CHECK(extract_section(prompt, "A") == "one");
  CHECK(extract_section(prompt, "B") == "two\nlines");
  CHECK(extract_section(prompt, "C").empty());
  CarriedContext cc{2, "synth", {"q1"}};
  CHECK(cc.render() == "Round 2 synthesis:\nsynth\n\nRound 2 follow-up questions:\n1. q1\n");
  CHECK(CarriedContext{}.render().empty());
}

TEST_CASE("turn-count law and event order") {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int rounds = 1; rounds <= 3; ++rounds) {
      CAPTURE(n);
      CAPTURE(rounds);
      Rig rig;
      const auto p = rig.project_with_experts(n);
      Collector c;
      const auto m = rig.workspace.run_meeting(team_config(p, n, rounds), &c);
      const auto events = rig.workspace.events(m.meeting_id, 1);
      CHECK(events == c.events);
      std::size_t content = 0;
      for (const auto& e : events) content += is_content_phase(e.phase) ? 1 : 0;
      CHECK(content == static_cast<std::size_t>(rounds) * (n + 3) + 1);
      CHECK(events.size() == content + 2);
      for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
      CHECK(events.front().phase == Phase::meeting_started);
      CHECK(events.back().phase == Phase::meeting_finished);
      CHECK(events[events.size() - 2].phase == Phase::final_summary);

      std::size_t i = 1;
      for (int r = 1; r <= rounds; ++r) {
        CHECK(events[i].phase == Phase::guidance);
        CHECK(events[i++].speaker == kCoordinatorName);
        for (std::size_t e = 1; e <= n; ++e) {
          CHECK(events[i].phase == Phase::expert_turn);
          CHECK(events[i].round == r);
          CHECK(events[i++].speaker == "E" + std::to_string(e));
        }
        CHECK(events[i++].speaker == kCriticName);
        CHECK(events[i].phase == Phase::synthesis);
        CHECK(events[i++].speaker == kCoordinatorName);
      }
      CHECK(m.status == MeetingStatus::completed);
      CHECK(m.per_round.size() == static_cast<std::size_t>(rounds));
      CHECK_FALSE(m.final_summary.empty());
      CHECK(rig.workspace.minutes(m.meeting_id).status == MeetingStatus::completed);
    }
  }
}

TEST_CASE("identical inputs give byte-identical logs and minutes") {
  std::string logs[2], docs[2];
  for (int run = 0; run < 2; ++run) {
    Rig rig;
    const auto p = rig.project_with_experts(3);
    const auto m = rig.workspace.run_meeting(team_config(p, 3, 2));
    logs[run] = persistence::read_file(rig.workspace.store().meeting_dir(p.id, m.meeting_id) / "events.log");
    docs[run] = rig.workspace.export_minutes(m.meeting_id);
  }
  CHECK(logs[0] == logs[1]);
  CHECK(docs[0] == docs[1]);
  CHECK_FALSE(logs[0].empty());
}

TEST_CASE("previous synthesis and follow-ups are carried verbatim into the next round") {
  Rig rig(script_with({rule("synthesis",
                            "SYNTHESIS:\nRound {round} agreed on baked lighting.\nFOLLOW-UP QUESTIONS:\n"
                            "1. What is the texture budget after round {round}?\n2. Who owns the rig?")}));
  const auto p = rig.project_with_experts(2);
  const auto m = rig.workspace.run_meeting(team_config(p, 2, 3));
  for (int r = 2; r <= 3; ++r) {
    CAPTURE(r);
    const auto& prev = m.per_round[r - 2];
    CHECK(prev.synthesis == "Round " + std::to_string(r - 1) + " agreed on baked lighting.");
    REQUIRE(prev.follow_up_questions.size() == 2);
    std::vector<llm::ChatRequest> prompts = requests_for(rig.gateway, "guidance", r);
    for (const auto* phase : {"expert_turn", "critique", "synthesis"}) {
      const auto more = requests_for(rig.gateway, phase, r);
      prompts.insert(prompts.end(), more.begin(), more.end());
    }
    CHECK(prompts.size() == 5);
    for (const auto& req : prompts) {
      const auto carried = extract_section(user_text(req), section::carried);
      CHECK(carried.find(prev.synthesis) != std::string::npos);
      for (const auto& q : prev.follow_up_questions) CHECK(carried.find(q) != std::string::npos);
      CHECK(carried.find("Round " + std::to_string(r - 1)) != std::string::npos);
    }
  }
  for (const auto& req : requests_for(rig.gateway, "guidance", 1)) {
    CHECK(extract_section(user_text(req), section::carried) == "none");
  }
}

TEST_CASE("each expert sees the earlier experts of the round and never the critique") {
  Rig rig(script_with({rule("expert_turn", "Turn by {speaker} in round {round}."),
                       rule("critique", "CRITIQUE-MARKER round {round}")}));
  const auto p = rig.project_with_experts(4);
  rig.workspace.run_meeting(team_config(p, 4, 2));
  for (int r = 1; r <= 2; ++r) {
    for (int i = 1; i <= 4; ++i) {
      CAPTURE(r);
      CAPTURE(i);
      const auto reqs = requests_for(rig.gateway, "expert_turn", r, "E" + std::to_string(i));
      REQUIRE(reqs.size() == 1);
      const std::string prompt = user_text(reqs[0]);
      const auto prior = extract_section(prompt, section::prior_turns);
      for (int j = 1; j <= 4; ++j) {
        const std::string turn = "Turn by E" + std::to_string(j) + " in round " + std::to_string(r) + ".";
        CHECK((prior.find(turn) != std::string::npos) == (j < i));
      }
      if (i == 1) CHECK(prior == "none");
      CHECK(prompt.find("CRITIQUE-MARKER") == std::string::npos);
      CHECK(prompt.find("## Critique") == std::string::npos);
    }
  }
  const auto synth = requests_for(rig.gateway, "synthesis", 1);
  CHECK(extract_section(user_text(synth[0]), section::critique) == "CRITIQUE-MARKER round 1");
}

TEST_CASE("experts retrieve from their own knowledge base only") {
  Rig rig;
  const auto p = rig.workspace.create_project("KB routing", "", {});
  rig.workspace.add_expert(p.id, "E1", "Lighting.");
  rig.workspace.add_expert(p.id, "E2", "Rigging.");
  rig.workspace.add_expert(p.id, "E3", "No documents.");
  rig.workspace.upload_document(p.id, "E1", "light.md", Media::markdown, "photometric lighting baked probes");
  rig.workspace.upload_document(p.id, "E2", "rig.md", Media::markdown, "facial rig blendshape controls");
  rig.workspace.run_meeting(team_config(rig.workspace.project(p.id), 3, 1, "lighting and rigging"));
  const auto k1 = extract_section(user_text(requests_for(rig.gateway, "expert_turn", 1, "E1")[0]), section::retrieved);
  const auto k2 = extract_section(user_text(requests_for(rig.gateway, "expert_turn", 1, "E2")[0]), section::retrieved);
  const auto k3 = extract_section(user_text(requests_for(rig.gateway, "expert_turn", 1, "E3")[0]), section::retrieved);
  CHECK(k1.find("photometric") != std::string::npos);
  CHECK(k1.find("blendshape") == std::string::npos);
  CHECK(k1.find("light.md") != std::string::npos);
  CHECK(k2.find("blendshape") != std::string::npos);
  CHECK(k2.find("photometric") == std::string::npos);
  CHECK(k3 == "none");
}

TEST_CASE("unparseable synthesis: one reformat attempt, then degrade") {
  SUBCASE("reformat succeeds") {
    Rig rig(script_with({rule("synthesis", "SYNTHESIS:\nFixed.\nFOLLOW-UP QUESTIONS:\n1. Next?", 2),
                         rule("synthesis", "I forgot the format entirely.", 1)}));
    const auto p = rig.project_with_experts(1);
    const auto m = rig.workspace.run_meeting(team_config(p, 1, 2));
    CHECK(m.per_round[0].synthesis == "Fixed.");
    CHECK(m.per_round[0].follow_up_questions == std::vector<std::string>{"Next?"});
    const auto reqs = requests_for(rig.gateway, "synthesis", 1);
    REQUIRE(reqs.size() == 2);
    CHECK(reqs[1].tags.attempt == 2);
    CHECK(reqs[1].messages.size() == reqs[0].messages.size() + 2);
    const auto events = rig.workspace.events(m.meeting_id, 1);
    std::size_t syntheses = 0;
    for (const auto& e : events) syntheses += e.phase == Phase::synthesis ? 1 : 0;
    CHECK(syntheses == 2);
  }
  SUBCASE("both attempts fail") {
    Rig rig(script_with({rule("synthesis", "Still just prose for round {round}.")}));
    const auto p = rig.project_with_experts(2);
    const auto m = rig.workspace.run_meeting(team_config(p, 2, 2));
    CHECK(m.status == MeetingStatus::completed);
    CHECK(m.per_round[0].synthesis == "Still just prose for round 1.");
    CHECK(m.per_round[0].follow_up_questions.empty());
    CHECK(requests_for(rig.gateway, "synthesis", 1).size() == 2);
    const auto events = rig.workspace.events(m.meeting_id, 1);
    const auto it = std::find_if(events.begin(), events.end(), [](const auto& e) { return e.phase == Phase::synthesis; });
    CHECK(it->content == "SYNTHESIS:\nStill just prose for round 1.\nFOLLOW-UP QUESTIONS:");
    const auto carried = extract_section(user_text(requests_for(rig.gateway, "guidance", 2)[0]), section::carried);
    CHECK(carried.find("Still just prose for round 1.") != std::string::npos);
    CHECK(carried.find("follow-up questions:\nnone") != std::string::npos);
  }
  SUBCASE("missing questions before the last round ask for a reformat; the last round does not") {
    Rig rig(script_with({rule("synthesis", "SYNTHESIS:\nAll settled.\nFOLLOW-UP QUESTIONS:\nNone.")}));
    const auto p = rig.project_with_experts(1);
    const auto m = rig.workspace.run_meeting(team_config(p, 1, 2));
    CHECK(requests_for(rig.gateway, "synthesis", 1).size() == 2);
    CHECK(requests_for(rig.gateway, "synthesis", 2).size() == 1);
    CHECK(m.per_round[0].synthesis == "All settled.");
    CHECK(m.per_round[0].follow_up_questions.empty());
  }
}

TEST_CASE("a failing call ends the meeting with a terminal failure event") {
  SUBCASE("during a round") {
    auto script = llm::Script::builtin();
    script.fail_on_calls = {3};  // guidance, E1, then E2 fails
    Rig rig(script);
    const auto p = rig.project_with_experts(2);
    Collector c;
    std::string mid;
    try {
      rig.workspace.run_meeting(team_config(p, 2, 2), &c);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::gateway);
    }
    REQUIRE_FALSE(c.events.empty());
    mid = c.events.front().meeting_id;
    CHECK(c.events.back().phase == Phase::meeting_failed);
    const auto m = rig.workspace.minutes(mid);
    CHECK(m.status == MeetingStatus::failed);
    CHECK_FALSE(m.final_summary_failed);
    CHECK(m.failure_reason.find("scripted failure") != std::string::npos);
    CHECK(m.transcript.back().phase == Phase::meeting_failed);
    CHECK_THROWS_AS(rig.workspace.export_minutes(mid), Error);
    // The project is free again.
    CHECK_NOTHROW(rig.workspace.run_meeting(team_config(p, 2, 1)));
  }
  SUBCASE("during the final summary") {
    Rig rig(script_with({rule("final_summary", "")}));
    const auto p = rig.project_with_experts(1);
    Collector c;
    CHECK_THROWS_AS(rig.workspace.run_meeting(team_config(p, 1, 1), &c), Error);
    const auto m = rig.workspace.minutes(c.events.front().meeting_id);
    CHECK(m.status == MeetingStatus::failed);
    CHECK(m.final_summary_failed);
    CHECK(m.per_round.size() == 1);
  }
}

TEST_CASE("invalid configs are rejected before anything runs") {
  Rig rig;
  const auto p = rig.project_with_experts(2);
  auto c = team_config(p, 2, 0);
  try {
    rig.workspace.run_meeting(c);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(e.details().front() == "rounds: rounds >= 1");
  }
  c = team_config(p, 2, 1);
  c.participants = {"E1", "Ghost"};
  CHECK_THROWS_AS(rig.workspace.run_meeting(c), Error);
  CHECK(rig.gateway.captured().empty());
  CHECK(rig.workspace.project(p.id).meetings.empty());
}

TEST_CASE("warm-up reads the knowledge base in batches and stores notes") {
  WorkspaceOptions opts;
  opts.chunking = {100, 20};
  Rig rig(llm::Script::builtin(), opts);
  const auto p = rig.workspace.create_project("Warm", "", {});
  rig.workspace.add_expert(p.id, "E1", "Reader.");
  rig.workspace.add_expert(p.id, "E2", "No docs.");
  const auto up = rig.workspace.upload_document(p.id, "E1", "long.txt", Media::plain_text, std::string(1970, 'x'));
  REQUIRE(up.chunk_count == 25);

  Collector c;
  const auto report = rig.workspace.run_warmup(p.id, "E1", &c);
  CHECK(report.batches == 3);
  CHECK(report.note_ids.size() == 3);
  std::vector<Phase> phases;
  for (const auto& e : c.events) phases.push_back(e.phase);
  CHECK(phases == std::vector<Phase>{Phase::meeting_started, Phase::expert_turn, Phase::expert_turn,
                                     Phase::expert_turn, Phase::final_summary, Phase::meeting_finished});
  CHECK(c.events[1].round == 1);
  CHECK(c.events[3].round == 3);
  const auto warm = requests_for(rig.gateway, "expert_turn", 3, "E1");
  REQUIRE(warm.size() == 1);
  CHECK(warm[0].tags.kind == "warmup");
  CHECK(rig.workspace.memory().notes_of("E1", p.id).size() == 3);
  CHECK(rig.workspace.project(p.id).find_expert("E1")->warmup_done);
  CHECK_FALSE(rig.workspace.project(p.id).find_expert("E2")->warmup_done);
  const auto m = rig.workspace.minutes(report.meeting_id);
  CHECK(m.config.kind == MeetingKind::warmup);
  CHECK(m.status == MeetingStatus::completed);

  try {
    rig.workspace.run_warmup(p.id, "E2");
    FAIL("expected state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::state);
  }
  CHECK_THROWS_AS(rig.workspace.run_warmup(p.id, "Ghost"), Error);

  // Warm-up notes are recalled in later meetings.
  rig.gateway.clear_captured();
  rig.workspace.run_meeting(team_config(rig.workspace.project(p.id), 1, 1, "xxxx"));
  const auto notes = extract_section(user_text(requests_for(rig.gateway, "expert_turn", 1, "E1")[0]), section::notes);
  CHECK(notes.find("Key concepts noted by E1") != std::string::npos);
}

TEST_CASE("coordinator syntheses are remembered across meetings of a project") {
  Rig rig(script_with({rule("synthesis", "SYNTHESIS:\nWe picked the lighting rig UNIQUEWORD.\nFOLLOW-UP QUESTIONS:\n1. ok?")}));
  const auto p = rig.project_with_experts(1);
  rig.workspace.run_meeting(team_config(p, 1, 1, "lighting rig"));
  rig.gateway.clear_captured();
  rig.workspace.run_meeting(team_config(p, 1, 1, "lighting rig again"));
  const auto mem = extract_section(user_text(requests_for(rig.gateway, "guidance", 1)[0]), section::project_memory);
  CHECK(mem.find("UNIQUEWORD") != std::string::npos);
  CHECK(rig.workspace.project(p.id).meetings.size() == 2);
}

TEST_CASE("one running meeting per project") {
  auto script = llm::Script::builtin();
  script.latency = std::chrono::milliseconds(30);
  Rig rig(script);
  const auto p = rig.project_with_experts(1);
  auto other = rig.workspace.create_project("Other", "", {});
  rig.workspace.add_expert(other.id, "E1", "");
  other = rig.workspace.project(other.id);

  std::atomic<int> done{0};
  const auto id = rig.workspace.start_meeting(team_config(p, 1, 2), nullptr, [&](const std::string&) { ++done; });
  CHECK(rig.workspace.is_running(id));
  try {
    rig.workspace.start_meeting(team_config(p, 1, 1), nullptr);
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::conflict);
  }
  CHECK_THROWS_AS(rig.workspace.run_meeting(team_config(p, 1, 1)), Error);
  // Other projects are unaffected.
  CHECK_NOTHROW(rig.workspace.run_meeting(team_config(other, 1, 1)));
  CHECK(rig.workspace.minutes(id).status == MeetingStatus::running);
  CHECK_THROWS_AS(rig.workspace.export_minutes(id), Error);
  rig.workspace.wait_idle();
  CHECK(done == 1);
  CHECK_FALSE(rig.workspace.is_running(id));
  CHECK(rig.workspace.minutes(id).status == MeetingStatus::completed);
  CHECK_NOTHROW(rig.workspace.run_meeting(team_config(p, 1, 1)));
}
