// Acceptance suite: one PASS/FAIL line per criterion, scripted backend only.
// Exit status is non-zero when any criterion fails. The live-model smoke check
// prints SKIP when no model server answers.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "sse_client.hpp"
#include "support.hpp"
#include "thinktank/error.hpp"
#include "thinktank/knowledge/chunker.hpp"
#include "thinktank/knowledge/knowledge_store.hpp"
#include "thinktank/llm/hash_embedding.hpp"
#include "thinktank/llm/ollama_gateway.hpp"
#include "thinktank/meeting/prompts.hpp"
#include "thinktank/persistence/codec.hpp"
#include "thinktank/persistence/event_log.hpp"
#include "thinktank/persistence/fs_util.hpp"
#include "thinktank/service/server.hpp"
#include "thinktank/text.hpp"

using namespace thinktank;
using namespace thinktank::meeting;
using tt_test::Rig;
using Wall = std::chrono::steady_clock;

namespace {

/// Outcome of one criterion. `detail` is printed after the name.
struct Outcome {
  enum class Kind { pass, fail, skip } kind = Kind::pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Kind::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Kind::fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Kind::skip, std::move(d)}; }

double seconds_since(Wall::time_point t0) { return std::chrono::duration<double>(Wall::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

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

MeetingConfig team_config(const std::string& project_id, std::vector<std::string> participants, int rounds,
                          std::string agenda = "Plan the demo") {
  MeetingConfig c;
  c.project_id = project_id;
  c.agenda = std::move(agenda);
  c.rounds = rounds;
  c.participants = std::move(participants);
  return c;
}

llm::ScriptRule rule(std::string phase, std::string response, std::optional<int> round = {},
                     std::optional<std::string> contains = {}) {
  llm::ScriptRule r;
  r.match.phase = std::move(phase);
  r.match.round = round;
  r.match.contains = std::move(contains);
  r.response = std::move(response);
  return r;
}

llm::Script script_with(std::vector<llm::ScriptRule> front) {
  auto s = llm::Script::builtin();
  front.insert(front.end(), s.rules.begin(), s.rules.end());
  s.rules = std::move(front);
  return s;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

// ---------------------------------------------------------------------------

Outcome turn_count_law() {
  double worst = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int r = 1; r <= 3; ++r) {
      const auto t0 = Wall::now();
      Rig rig;
      const auto p = rig.project_with_experts(n);
      const auto m = rig.workspace.run_meeting(team_config(p.id, tt_test::expert_names(n), r));
      const auto events = rig.workspace.events(m.meeting_id, 1);
      const double secs = seconds_since(t0);
      worst = std::max(worst, secs);
      std::size_t content = 0;
      for (const auto& e : events) content += is_content_phase(e.phase) ? 1 : 0;
      const std::size_t want = static_cast<std::size_t>(r) * (n + 3) + 1;
      if (content != want || events.size() != want + 2) {
        return fail("N=" + std::to_string(n) + " R=" + std::to_string(r) + ": " + std::to_string(content) +
                    " content events, expected " + std::to_string(want));
      }
      if (secs >= 5.0) return fail("N=" + std::to_string(n) + " R=" + std::to_string(r) + " took " + fmt("%.2fs", secs));
    }
  }
  return pass("12 cases, content events = R(N+3)+1, slowest " + fmt("%.3fs", worst) + " (limit 5s)");
}

Outcome determinism() {
  std::string logs[2], docs[2];
  for (int run = 0; run < 2; ++run) {
    Rig rig;
    const auto p = rig.project_with_experts(3);
    const auto m = rig.workspace.run_meeting(team_config(p.id, tt_test::expert_names(3), 2));
    logs[run] = persistence::read_file(rig.workspace.store().meeting_dir(p.id, m.meeting_id) / "events.log");
    docs[run] = rig.workspace.export_minutes(m.meeting_id);
  }
  if (logs[0].empty() || logs[0] != logs[1]) return fail("event logs differ");
  if (docs[0] != docs[1]) return fail("exported minutes differ");
  return pass("event log (" + std::to_string(logs[0].size()) + " bytes) and export (" +
              std::to_string(docs[0].size()) + " bytes) byte-identical across two runs");
}

Outcome carry_over() {
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int rounds = 2; rounds <= 3; ++rounds) {
      Rig rig(script_with({rule("synthesis",
                                "SYNTHESIS:\nRound {round} settled on decision D{round} for {kind}.\n"
                                "FOLLOW-UP QUESTIONS:\n1. What remains open after round {round}?")}));
      const auto p = rig.project_with_experts(n);
      const auto m = rig.workspace.run_meeting(team_config(p.id, tt_test::expert_names(n), rounds));
      for (int r = 2; r <= rounds; ++r) {
        const std::string prev = m.per_round[r - 2].synthesis;
        if (prev.empty()) return fail("empty synthesis in round " + std::to_string(r - 1));
        auto prompts = requests_for(rig.gateway, "guidance", r);
        const auto experts = requests_for(rig.gateway, "expert_turn", r);
        if (prompts.size() != 1 || experts.size() != n) return fail("unexpected prompt count");
        prompts.insert(prompts.end(), experts.begin(), experts.end());
        for (const auto& req : prompts) {
          ++checked;
          if (!contains(user_text(req), prev)) {
            return fail(req.tags.phase + " prompt of " + req.tags.speaker + " in round " + std::to_string(r) +
                        " lacks the previous synthesis");
          }
        }
      }
    }
  }
  return pass(std::to_string(checked) + " guidance and expert prompts contain the previous round's synthesis verbatim");
}

Outcome sequential_chain() {
  Rig rig(script_with({rule("expert_turn", "Turn by {speaker} in round {round}.")}));
  const std::size_t n = 4;
  const auto p = rig.project_with_experts(n);
  rig.workspace.run_meeting(team_config(p.id, tt_test::expert_names(n), 2));
  std::size_t checked = 0;
  for (int r = 1; r <= 2; ++r) {
    for (std::size_t i = 1; i <= n; ++i) {
      const auto reqs = requests_for(rig.gateway, "expert_turn", r, "E" + std::to_string(i));
      if (reqs.size() != 1) return fail("missing expert prompt");
      const auto prompt = user_text(reqs[0]);
      for (std::size_t j = 1; j <= n; ++j) {
        const std::string turn = "Turn by E" + std::to_string(j) + " in round " + std::to_string(r) + ".";
        if (contains(prompt, turn) != (j < i)) {
          return fail("E" + std::to_string(i) + " round " + std::to_string(r) + " visibility of E" +
                      std::to_string(j) + " is wrong");
        }
        ++checked;
      }
    }
  }
  return pass(std::to_string(checked) + " visibility checks: expert i sees exactly experts 1..i-1 of its round");
}

Outcome retrieval_oracle() {
  const auto t0 = Wall::now();
  WorkspaceOptions opts;
  opts.chunking = {50, 10};  // stride 40: a 400-character document yields 10 chunks
  Rig rig(llm::Script::builtin(), opts);
  const auto p = rig.workspace.create_project("Retrieval", "", {});
  rig.workspace.add_expert(p.id, "Librarian", "Keeper of documents.");
  std::mt19937_64 rng(1000);
  for (int d = 0; d < 100; ++d) {
    std::string body;
    while (text::char_count(body) < 400) body += (body.empty() ? "" : " ") + tt_test::random_words(rng, 1);
    body = body.substr(0, 400);
    if (body.back() == ' ') body.back() = 'x';
    rig.workspace.upload_document(p.id, "Librarian", "doc" + std::to_string(d) + ".txt", Media::plain_text, body);
  }
  const auto kb_id = *rig.workspace.project(p.id).find_expert("Librarian")->knowledge_base_id;
  auto kb = rig.workspace.knowledge().open(p.id, kb_id);
  const auto chunks = kb->chunks();
  if (chunks.size() != 1000) return fail("expected 1000 chunks, got " + std::to_string(chunks.size()));

  // Oracle: re-embed every chunk text and scan with double-precision cosine.
  std::vector<std::vector<float>> rows;
  for (const auto& c : chunks) rows.push_back(llm::hash_embedding(c.text, 64));
  double worst = 0;
  for (int q = 0; q < 100; ++q) {
    const std::string query = tt_test::random_words(rng, 1 + rng() % 6);
    const auto qv = llm::hash_embedding(query, 64);
    std::vector<std::tuple<double, std::string, std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      all.emplace_back(-tt_test::cosine_oracle(rows[i], qv), chunks[i].doc_id, chunks[i].ordinal, i);
    }
    std::sort(all.begin(), all.end());
    const auto got = rig.workspace.knowledge().retrieve(p.id, kb_id, query, 5);
    if (got.size() != 5) return fail("retrieve returned " + std::to_string(got.size()) + " results");
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& want = chunks[std::get<3>(all[i])];
      const double err = std::abs(got[i].score + std::get<0>(all[i]));
      worst = std::max(worst, err);
      if (got[i].chunk.chunk_id != want.chunk_id) {
        return fail("query " + std::to_string(q) + " rank " + std::to_string(i) + " differs from the oracle");
      }
      if (err > 1e-6) return fail("score error " + fmt("%.3g", err) + " exceeds 1e-6");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) return fail("took " + fmt("%.2fs", secs) + " (limit 10s)");
  return pass("1000 chunks x 100 queries, k=5: identical order, max score error " + fmt("%.2e", worst) +
              " (tol 1e-6), " + fmt("%.2fs", secs) + " (limit 10s)");
}

Outcome adaptive_filter_contract() {
  std::mt19937_64 rng(10000);
  std::uniform_real_distribution<double> score(-1, 1);
  std::size_t fallbacks = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<knowledge::ScoredChunk> in(rng() % 12);
    for (std::size_t i = 0; i < in.size(); ++i) {
      in[i].chunk.chunk_id = "c" + std::to_string(i);
      // Occasional repeated scores exercise ties at the mean.
      in[i].score = (rng() % 4 == 0 && i > 0) ? in[i - 1].score : score(rng);
    }
    std::sort(in.begin(), in.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    const auto out = knowledge::adaptive_filter(in);
    if (in.empty()) {
      if (!out.empty()) return fail("non-empty output for empty input");
      continue;
    }
    if (out.empty()) return fail("empty output for non-empty input");
    double mean = 0;
    for (const auto& c : in) mean += c.score;
    mean /= double(in.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const bool member = std::any_of(in.begin(), in.end(), [&](const auto& c) {
        return c.chunk.chunk_id == out[i].chunk.chunk_id && c.score == out[i].score;
      });
      if (!member) return fail("output is not a subset of the input");
      if (i > 0 && out[i].score > out[i - 1].score) return fail("output not sorted");
    }
    const double lowest = out.back().score;
    if (lowest < mean - 1e-12) {
      if (out.size() != 1) return fail("kept a below-mean score without fallback");
      ++fallbacks;
    }
  }
  return pass("10000 random cases: subset, sorted, non-empty, min >= mean unless fallback (" +
              std::to_string(fallbacks) + " fallbacks)");
}

Outcome chunker_reconstruction() {
  std::mt19937_64 rng(1001);
  static const std::vector<std::string> pieces = {"a", "b", "Z", "9", " ", "  ", "\t", "\n", "\r\n", "\xC3\xA9",
                                                  "\xE6\xBC\xA2", "\xF0\x9F\x99\x82", "word", ".", "\x01"};
  for (int t = 0; t < 1000; ++t) {
    std::string text;
    while (text.empty()) {  // empty documents are rejected before chunking
      std::string raw;
      const std::size_t len = 1 + rng() % 300;
      for (std::size_t i = 0; i < len; ++i) raw += pieces[rng() % pieces.size()];
      text = knowledge::normalize_whitespace(raw);
    }
    const std::size_t size = 1 + rng() % 80;
    const std::size_t overlap = rng() % size;
    const auto chunks = knowledge::chunk_text(text, size, overlap);
    const auto off = text::char_offsets(text);
    std::string rebuilt;
    std::size_t covered = 0;
    for (const auto& c : chunks) {
      if (c.span.start > covered || c.span.end < covered) return fail("chunks leave a gap");
      rebuilt += text.substr(off[covered], off[c.span.end] - off[covered]);
      covered = c.span.end;
    }
    if (rebuilt != text) {
      return fail("case " + std::to_string(t) + " (size " + std::to_string(size) + ", overlap " +
                  std::to_string(overlap) + ") does not rebuild");
    }
  }
  return pass("1000 random texts and (size, overlap): de-overlapped chunks equal the normalized text byte-exactly");
}

Outcome digital_human_demo() {
  const std::string topic = "subsurface scattering budget";
  Rig rig(script_with({
      rule("critique", "The team ignored the " + topic + " for skin rendering on mid-range GPUs.", 1),
      rule("synthesis",
           "SYNTHESIS:\nRound 1 fixed the avatar pipeline; the critique flagged the " + topic +
               ".\nFOLLOW-UP QUESTIONS:\n1. How do we fit the " + topic + " into the frame?\n"
               "2. Which facial rig drives the blend shapes?",
           1, topic),
      rule("guidance", "Round 2 focus: resolve the " + topic + " raised last round.", 2, topic),
  }));
  const auto p = rig.workspace.create_project("Digital human avatar", "Realistic digital humans", {"ship a demo"});
  const std::vector<std::pair<std::string, std::string>> experts = {
      {"Rendering", "real-time skin shading and lighting"},
      {"Animation", "facial motion capture and retargeting"},
      {"Rigging", "facial rigs and blend shapes"},
      {"Pipeline", "asset budgets and engine integration"}};
  std::vector<std::string> names;
  for (const auto& [name, field] : experts) {
    rig.workspace.add_expert(p.id, name, "Specialist in " + field + ".");
    rig.workspace.upload_document(p.id, name, name + ".md", Media::markdown, "# " + name + "\nNotes on " + field + ".");
    names.push_back(name);
  }
  const auto m = rig.workspace.run_meeting(team_config(p.id, names, 2, "Plan a realistic digital human demo"));
  const auto g2 = requests_for(rig.gateway, "guidance", 2);
  if (g2.size() != 1) return fail("no round-2 guidance prompt");
  if (!contains(extract_section(user_text(g2[0]), section::carried), topic)) {
    return fail("round-2 guidance prompt does not carry the topic");
  }
  if (!contains(m.per_round.size() == 2 ? m.per_round[1].guidance : "", topic)) {
    return fail("round-2 guidance does not mention the topic");
  }
  if (m.per_round.size() != 2) return fail("expected 2 round records");
  for (const auto& r : m.per_round) {
    if (r.synthesis.empty()) return fail("empty synthesis in round " + std::to_string(r.round));
    if (r.expert_turns.size() != 4) return fail("round " + std::to_string(r.round) + " lacks expert turns");
  }
  if (m.per_round[0].follow_up_questions.empty()) return fail("round-1 follow-ups empty");
  if (m.final_summary.empty()) return fail("no final summary");
  return pass("4 experts, R=2: critique topic reaches round-2 guidance; 2 syntheses, " +
              std::to_string(m.per_round[0].follow_up_questions.size()) + " round-1 follow-ups, final summary present");
}

Outcome crash_consistency() {
  Rig rig;
  const auto p = rig.project_with_experts(3);
  const auto m = rig.workspace.run_meeting(team_config(p.id, tt_test::expert_names(3), 2));
  const auto log_path = rig.workspace.store().meeting_dir(p.id, m.meeting_id) / "events.log";
  const std::string full = persistence::read_file(log_path);
  const auto original = persistence::EventLog::read(log_path);
  const auto scratch = rig.tmp / "scratch.log";

  std::size_t prefixes = 0, integrity = 0, silent = 0, cases = 0;
  auto probe = [&](const std::string& bytes) {
    ++cases;
    persistence::atomic_write_file(scratch, bytes);
    try {
      const auto got = persistence::EventLog::read(scratch);
      const bool is_prefix = got.size() <= original.size() && std::equal(got.begin(), got.end(), original.begin());
      if (is_prefix) {
        ++prefixes;
      } else {
        ++silent;
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::integrity) {
        ++integrity;
      } else {
        ++silent;
      }
    }
  };
  for (std::size_t cut = 0; cut <= full.size(); ++cut) probe(full.substr(0, cut));
  const std::size_t truncations = cases;
  // Single-byte damage anywhere in the committed log.
  for (std::size_t i = 0; i < full.size(); ++i) {
    std::string damaged = full;
    damaged[i] = static_cast<char>(damaged[i] ^ 0x20);
    probe(damaged);
  }
  if (silent != 0) return fail(std::to_string(silent) + " silent corruptions in " + std::to_string(cases) + " cases");
  return pass(std::to_string(truncations) + " truncations + " + std::to_string(cases - truncations) +
              " byte flips: " + std::to_string(prefixes) + " valid prefixes, " + std::to_string(integrity) +
              " integrity errors, 0 silent corruptions");
}

Outcome warmup() {
  WorkspaceOptions opts;
  opts.chunking = {100, 20};
  Rig rig(llm::Script::builtin(), opts);
  const auto p = rig.workspace.create_project("Warm-up", "", {});
  rig.workspace.add_expert(p.id, "Reader", "Reads everything first.");
  // 1970 characters at stride 80 give 25 chunks.
  std::mt19937_64 rng(25);
  std::string body;
  while (body.size() < 1970) body += (body.empty() ? "" : " ") + tt_test::random_words(rng, 1);
  body = body.substr(0, 1970);
  if (body.back() == ' ') body.back() = 'x';
  const auto up = rig.workspace.upload_document(p.id, "Reader", "long.txt", Media::plain_text, body);
  if (up.chunk_count != 25) return fail("expected 25 chunks, got " + std::to_string(up.chunk_count));
  const auto report = rig.workspace.run_warmup(p.id, "Reader");
  const auto notes = rig.workspace.memory().notes_of("Reader", p.id);
  if (report.note_ids.size() != 3 || notes.size() != 3) {
    return fail("expected 3 warm-up notes, got " + std::to_string(notes.size()));
  }
  rig.gateway.clear_captured();
  rig.workspace.run_meeting(team_config(p.id, {"Reader"}, 1, "skin shader render"));
  const auto reqs = requests_for(rig.gateway, "expert_turn", 1, "Reader");
  if (reqs.size() != 1) return fail("missing expert prompt");
  const auto recalled = extract_section(user_text(reqs[0]), section::notes);
  const bool any = std::any_of(notes.begin(), notes.end(), [&](const auto& n) { return contains(recalled, n.text); });
  if (!any) return fail("recalled-notes section holds no warm-up note");
  return pass("25 chunks -> 3 warm-up notes; next team meeting's expert prompt recalls a warm-up note");
}

Outcome stream_reconciliation() {
  auto script = llm::Script::builtin();
  script.latency = std::chrono::milliseconds(20);
  Rig rig(script);
  service::ServerOptions opts;
  opts.port = 0;
  opts.poll = std::chrono::milliseconds(50);
  service::Server server(rig.workspace, opts);
  server.start();
  httplib::Client cli("127.0.0.1", server.port());
  cli.set_read_timeout(std::chrono::seconds(30));

  const auto p = rig.project_with_experts(3);
  nlohmann::json body{{"agenda", "Stream it"}, {"rounds", 2}, {"participants", tt_test::expert_names(3)}};
  auto started = cli.Post("/projects/" + p.id + "/meetings", body.dump(), "application/json");
  if (!started || started->status != 202) return fail("meeting did not start");
  const std::string mid = nlohmann::json::parse(started->body)["meeting_id"];

  // Join mid-meeting: wait until some events are already persisted.
  const auto deadline = Wall::now() + std::chrono::seconds(10);
  while (rig.workspace.events(mid, 1).size() < 4 && Wall::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  const bool joined_mid = rig.workspace.is_running(mid);
  const auto live = tt_test::read_stream(cli, "/meetings/" + mid + "/events?from_seq=1");

  // A second subscriber drops after 5 frames and resumes from the next seq.
  auto resumed = tt_test::read_stream(cli, "/meetings/" + mid + "/events?from_seq=1", 5);
  const std::uint64_t next = resumed.empty() ? 1 : std::stoull(resumed.back().id) + 1;
  const auto rest = tt_test::read_stream(cli, "/meetings/" + mid + "/events?from_seq=" + std::to_string(next));
  resumed.insert(resumed.end(), rest.begin(), rest.end());
  rig.workspace.wait_idle();
  server.stop();

  const auto log = rig.workspace.events(mid, 1);
  auto matches = [&](const std::vector<tt_test::Frame>& frames) {
    if (frames.size() != log.size()) return false;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i].id != std::to_string(i + 1) || frames[i].data != nlohmann::json(log[i])) return false;
    }
    return true;
  };
  if (!joined_mid) return fail("meeting finished before the subscriber joined");
  if (!matches(live)) return fail("mid-meeting subscriber saw " + std::to_string(live.size()) + " of " +
                                  std::to_string(log.size()) + " events or a gap");
  if (!matches(resumed)) return fail("reconnect with from_seq=" + std::to_string(next) + " did not resume exactly");
  return pass("mid-meeting subscriber got seq 1.." + std::to_string(log.size()) +
              " with no gaps or duplicates; reconnect from seq " + std::to_string(next) + " resumed exactly");
}

Outcome live_smoke() {
  auto opts = llm::OllamaOptions::from_env();
  opts.backoff = {};
  llm::OllamaGateway gateway(opts);
  const auto status = gateway.health_check();
  if (!status.reachable) return skip("no model server at " + opts.base_url);
  tt_test::TempDir tmp;
  SteppingClock clock;
  IdGenerator ids(clock, 7);
  Workspace ws(tmp.path(), gateway, clock, ids);
  try {
    const auto p = ws.create_project("Smoke", "", {});
    ws.add_expert(p.id, "Solo", "A helpful generalist.");
    const auto m = ws.run_meeting(team_config(p.id, {"Solo"}, 1, "Name one benefit of unit tests."));
    if (m.status != MeetingStatus::completed || m.final_summary.empty()) return fail("minutes incomplete");
    return pass("R=1, N=1 against " + opts.chat_model + " at " + opts.base_url + " produced minutes");
  } catch (const std::exception& e) {
    return fail(std::string("live meeting failed: ") + e.what());
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"turn-count law", turn_count_law},
      {"determinism", determinism},
      {"carry-over", carry_over},
      {"sequential chain", sequential_chain},
      {"retrieval oracle equivalence", retrieval_oracle},
      {"adaptive filter contract", adaptive_filter_contract},
      {"chunker reconstruction", chunker_reconstruction},
      {"digital-human demo (4 experts, 2 rounds)", digital_human_demo},
      {"crash consistency", crash_consistency},
      {"warm-up", warmup},
      {"service stream reconciliation", stream_reconciliation},
      {"live model smoke (optional)", live_smoke},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::Kind::pass ? "PASS" : o.kind == Outcome::Kind::skip ? "SKIP" : "FAIL";
    if (o.kind == Outcome::Kind::fail) ++failures;
    std::printf("%s %s: %s\n", tag, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
