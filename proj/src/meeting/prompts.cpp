#include "thinktank/meeting/prompts.hpp"

#include <cstdio>

#include "thinktank/meeting/synthesis_parser.hpp"
#include "thinktank/text.hpp"

namespace thinktank::meeting {
namespace {

using llm::ChatRequest;
using llm::Message;
using llm::MessageRole;

std::string numbered(std::span<const std::string> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i + 1) + ". " + items[i] + "\n";
  return out;
}

std::string render_turns(std::span<const ExpertTurn> turns) {
  std::string out;
  for (const auto& t : turns) out += "### " + t.speaker + "\n" + t.content + "\n\n";
  return out;
}

std::string render_chunks(std::span<const knowledge::ScoredChunk> chunks) {
  std::string out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    char score[32];
    std::snprintf(score, sizeof score, "%.4f", c.score);
    out += "[" + std::to_string(i + 1) + "] " + (c.source_name.empty() ? c.chunk.doc_id : c.source_name) +
           " (chunk " + std::to_string(c.chunk.ordinal) + ", score " + score + ")\n" + c.chunk.text + "\n\n";
  }
  return out;
}

std::string render_notes(std::span<const memory::ScoredNote> notes) {
  std::string out;
  for (const auto& n : notes) out += "- [" + std::string(memory::to_string(n.note.origin)) + "] " + n.note.text + "\n";
  return out;
}

std::string render_project(const ProjectRecord& p) {
  std::string out = p.title + "\n";
  if (!p.description.empty()) out += "\n" + p.description + "\n";
  if (!p.objectives.empty()) {
    out += "\nObjectives:\n";
    for (const auto& o : p.objectives) out += "- " + o + "\n";
  }
  return out;
}

ChatRequest make_request(const PromptSettings& s, double temperature, std::string system, std::string user,
                         llm::RequestTags tags) {
  ChatRequest r;
  r.model = s.model;
  r.temperature = temperature;
  r.max_output_chars = s.max_output_chars;
  r.timeout = s.timeout;
  r.messages.push_back(Message{MessageRole::system, std::move(system)});
  r.messages.push_back(Message{MessageRole::user, std::move(user)});
  r.tags = std::move(tags);
  return r;
}

llm::RequestTags team_tags(Phase phase, std::string speaker, int round) {
  return llm::RequestTags{"team", std::string(to_string(phase)), std::move(speaker), round, 1};
}

}  // namespace

std::string CarriedContext::render() const {
  if (empty()) return {};
  std::string out = "Round " + std::to_string(from_round) + " synthesis:\n" + synthesis + "\n";
  out += "\nRound " + std::to_string(from_round) + " follow-up questions:\n";
  out += follow_up_questions.empty() ? std::string("none\n") : numbered(follow_up_questions);
  return out;
}

std::string render_section(std::string_view title, std::string_view body, std::size_t budget) {
  std::string out = "## ";
  out += title;
  out += '\n';
  const std::string_view trimmed = text::trim(body);
  out += trimmed.empty() ? std::string("none") : text::truncate_front(trimmed, budget);
  out += "\n\n";
  return out;
}

std::string extract_section(std::string_view prompt, std::string_view title) {
  const std::string header = "## " + std::string(title) + "\n";
  std::size_t at = prompt.find(header);
  if (at != 0) {
    const std::size_t nl_at = prompt.find("\n" + header);
    if (nl_at == std::string_view::npos) return {};
    at = nl_at + 1;
  }
  const std::size_t body = at + header.size();
  const std::size_t next = prompt.find("\n## ", body);
  const std::string_view raw = prompt.substr(body, next == std::string_view::npos ? std::string_view::npos : next - body);
  return std::string(text::trim(raw));
}

ChatRequest assemble_guidance_prompt(const ProjectRecord& project, const MeetingConfig& config, int round,
                                     const CarriedContext& carried, std::span<const memory::ScoredNote> project_memory,
                                     const PromptSettings& settings) {
  const auto budget = static_cast<std::size_t>(config.context_budget);
  std::string participants;
  for (const auto& name : config.participants) {
    const AgentProfile* e = project.find_expert(name);
    participants += "- " + name + (e != nullptr && !e->persona.empty() ? ": " + e->persona : std::string()) + "\n";
  }
  std::string task = "Write the guidance for round " + std::to_string(round) + " of " +
                     std::to_string(config.rounds) +
                     ". Tell the experts which aspects of the agenda to address and what you expect from each of "
                     "them.";
  if (!carried.empty()) {
    task += " Build on the carried-over synthesis and make sure every follow-up question is taken up.";
  }

  std::string user;
  user += render_section(section::project, render_project(project), budget);
  user += render_section(section::agenda, config.agenda, budget);
  user += render_section(section::participants, participants, budget);
  user += render_section(section::carried, carried.render(), budget);
  user += render_section(section::project_memory, render_notes(project_memory), budget);
  user += render_section(section::task, task, budget);

  std::string system = coordinator_profile().persona +
                       " You are facilitating a multi-round meeting of domain experts and a critical reviewer.";
  return make_request(settings, settings.coordinator_temperature, std::move(system), std::move(user),
                      team_tags(Phase::guidance, std::string(kCoordinatorName), round));
}

ChatRequest assemble_expert_prompt(const ExpertPromptInput& in, const PromptSettings& settings) {
  const std::size_t budget = in.context_budget;
  const AgentProfile& expert = *in.expert;
  const std::string retrieved = in.has_knowledge_base ? render_chunks(in.retrieved) : std::string();

  std::string user;
  user += render_section(section::persona, expert.persona, budget);
  user += render_section(section::agenda, in.agenda, budget);
  user += render_section(section::carried, in.carried != nullptr ? in.carried->render() : std::string(), budget);
  user += render_section(section::guidance, in.guidance, budget);
  user += render_section(section::prior_turns, render_turns(in.prior_turns), budget);
  user += render_section(section::retrieved, retrieved, budget);
  user += render_section(section::notes, render_notes(in.recalled_notes), budget);
  user += render_section(section::task,
                         "Contribute your analysis for round " + std::to_string(in.round) +
                             " from your area of expertise. Respond to the guidance, build on or challenge the "
                             "earlier contributions, and cite retrieved knowledge as [n] where you use it.",
                         budget);

  std::string system = "You are " + expert.name +
                       ", a domain expert in a structured team meeting. Speak only for your own field of "
                       "expertise and be concrete.";
  return make_request(settings, settings.expert_temperature, std::move(system), std::move(user),
                      team_tags(Phase::expert_turn, expert.name, in.round));
}

ChatRequest assemble_critic_prompt(std::string_view agenda, std::span<const ExpertTurn> turns,
                                   const CarriedContext& carried, std::size_t context_budget, int round,
                                   const PromptSettings& settings) {
  std::string user;
  user += render_section(section::agenda, agenda, context_budget);
  user += render_section(section::carried, carried.render(), context_budget);
  user += render_section(section::contributions, render_turns(turns), context_budget);
  user += render_section(section::task,
                         "Critique the contributions of round " + std::to_string(round) +
                             ". Name the specific topics that need deeper investigation in the next round.",
                         context_budget);
  std::string system = critic_profile().persona +
                       " Examine the contributions for fallacies, unstated assumptions, potential biases, and "
                       "implementation risks.";
  return make_request(settings, settings.critic_temperature, std::move(system), std::move(user),
                      team_tags(Phase::critique, std::string(kCriticName), round));
}

ChatRequest assemble_synthesis_prompt(std::string_view agenda, std::string_view guidance,
                                      std::span<const ExpertTurn> turns, std::string_view critique,
                                      const CarriedContext& carried, int round, int total_rounds,
                                      std::size_t context_budget, const PromptSettings& settings) {
  const bool final_round = round >= total_rounds;
  std::string task = "Summarize the key discussion points, decisions and criticisms of round " +
                     std::to_string(round) +
                     ". Resolve conflicting positions explicitly. Reply in exactly this format:\n" +
                     std::string(kSynthesisHeader) + "\n<summary>\n" + std::string(kFollowUpHeader) +
                     "\n1. <question>\n2. <question>\n";
  task += final_round ? "This is the final round; the question list may be empty."
                      : "List the questions the next round must answer, including the topics the critique flagged.";

  std::string user;
  user += render_section(section::agenda, agenda, context_budget);
  user += render_section(section::carried, carried.render(), context_budget);
  user += render_section(section::guidance, guidance, context_budget);
  user += render_section(section::contributions, render_turns(turns), context_budget);
  user += render_section(section::critique, critique, context_budget);
  user += render_section(section::task, task, context_budget);
  return make_request(settings, settings.coordinator_temperature, coordinator_profile().persona, std::move(user),
                      team_tags(Phase::synthesis, std::string(kCoordinatorName), round));
}

ChatRequest assemble_reformat_request(const ChatRequest& original, std::string_view bad_reply) {
  ChatRequest r = original;
  r.messages.push_back(Message{MessageRole::assistant, std::string(bad_reply)});
  r.messages.push_back(Message{MessageRole::user,
                               "Reformat your previous answer. Use exactly a line '" + std::string(kSynthesisHeader) +
                                   "' followed by the summary, then a line '" + std::string(kFollowUpHeader) +
                                   "' followed by a numbered list of questions."});
  r.tags.attempt = original.tags.attempt + 1;
  return r;
}

ChatRequest assemble_final_prompt(std::string_view agenda, std::span<const RoundRecord> rounds,
                                  std::size_t context_budget, const PromptSettings& settings) {
  std::string syntheses;
  for (const auto& r : rounds) {
    syntheses += "### Round " + std::to_string(r.round) + "\n" + r.synthesis + "\n";
    if (!r.follow_up_questions.empty()) syntheses += "Follow-up questions:\n" + numbered(r.follow_up_questions);
    syntheses += "\n";
  }
  std::string user;
  user += render_section(section::agenda, agenda, context_budget);
  user += render_section(section::syntheses, syntheses, context_budget);
  user += render_section(section::task,
                         "Compile the final summary of the meeting for the user: the conclusions reached, the "
                         "decisions taken, and the questions that remain open.",
                         context_budget);
  return make_request(settings, settings.coordinator_temperature, coordinator_profile().persona, std::move(user),
                      team_tags(Phase::final_summary, std::string(kCoordinatorName), 0));
}

ChatRequest assemble_warmup_prompt(const AgentProfile& expert, const ProjectRecord& project,
                                   std::span<const knowledge::ChunkRecord> batch, int batch_index, int batch_count,
                                   std::size_t context_budget, const PromptSettings& settings) {
  std::string docs;
  for (const auto& c : batch) docs += "[" + c.doc_id + " #" + std::to_string(c.ordinal) + "]\n" + c.text + "\n\n";
  std::string user;
  user += render_section(section::persona, expert.persona, context_budget);
  user += render_section(section::project, render_project(project), context_budget);
  user += render_section(section::documents, docs, context_budget);
  user += render_section(section::task,
                         "This is part " + std::to_string(batch_index) + " of " + std::to_string(batch_count) +
                             " of your knowledge base. Extract the key concepts, terminology and context you will "
                             "need in later team meetings, as concise notes.",
                         context_budget);
  std::string system = "You are " + expert.name + ", a domain expert preparing for upcoming team meetings by "
                                                  "studying your own document collection.";
  return make_request(settings, settings.expert_temperature, std::move(system), std::move(user),
                      llm::RequestTags{"warmup", std::string(to_string(Phase::expert_turn)), expert.name, batch_index,
                                       1});
}

}  // namespace thinktank::meeting
