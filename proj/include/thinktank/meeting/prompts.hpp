#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thinktank/knowledge/knowledge_store.hpp"
#include "thinktank/llm/gateway.hpp"
#include "thinktank/memory/note_store.hpp"
#include "thinktank/model.hpp"

namespace thinktank::meeting {

struct PromptSettings {
  std::string model = "llama3.1";
  double coordinator_temperature = 0.2;
  double critic_temperature = 0.2;
  double expert_temperature = 0.7;
  std::size_t max_output_chars = 16000;
  std::chrono::milliseconds timeout{120000};
};

/// Previous round's synthesis and follow-ups, injected verbatim into every prompt of the next round.
struct CarriedContext {
  int from_round = 0;
  std::string synthesis;
  std::vector<std::string> follow_up_questions;

  bool empty() const noexcept { return from_round == 0; }
  std::string render() const;
};

/// Fixed section labels shared by every prompt.
namespace section {
inline constexpr std::string_view persona = "Persona";
inline constexpr std::string_view project = "Project";
inline constexpr std::string_view agenda = "Agenda";
inline constexpr std::string_view participants = "Participants";
inline constexpr std::string_view carried = "Carried Context";
inline constexpr std::string_view guidance = "Coordinator Guidance";
inline constexpr std::string_view prior_turns = "Earlier Contributions This Round";
inline constexpr std::string_view retrieved = "Retrieved Knowledge";
inline constexpr std::string_view notes = "Recalled Notes";
inline constexpr std::string_view project_memory = "Project Memory";
inline constexpr std::string_view contributions = "Expert Contributions";
inline constexpr std::string_view critique = "Critique";
inline constexpr std::string_view syntheses = "Round Syntheses";
inline constexpr std::string_view documents = "Documents";
inline constexpr std::string_view task = "Task";
}  // namespace section

/// "## Title\n<body or 'none'>\n\n", with the body cut to the newest `budget` characters.
std::string render_section(std::string_view title, std::string_view body, std::size_t budget);

/// Body of a section as it appears in a rendered prompt, or empty when absent.
std::string extract_section(std::string_view prompt, std::string_view title);

llm::ChatRequest assemble_guidance_prompt(const ProjectRecord& project, const MeetingConfig& config, int round,
                                          const CarriedContext& carried,
                                          std::span<const memory::ScoredNote> project_memory,
                                          const PromptSettings& settings);

struct ExpertPromptInput {
  const AgentProfile* expert = nullptr;
  std::string agenda;
  std::string guidance;
  std::span<const ExpertTurn> prior_turns;
  const CarriedContext* carried = nullptr;
  std::span<const knowledge::ScoredChunk> retrieved;
  bool has_knowledge_base = false;
  std::span<const memory::ScoredNote> recalled_notes;
  std::size_t context_budget = 8000;
  int round = 1;
};

llm::ChatRequest assemble_expert_prompt(const ExpertPromptInput& in, const PromptSettings& settings);

llm::ChatRequest assemble_critic_prompt(std::string_view agenda, std::span<const ExpertTurn> turns,
                                        const CarriedContext& carried, std::size_t context_budget, int round,
                                        const PromptSettings& settings);

llm::ChatRequest assemble_synthesis_prompt(std::string_view agenda, std::string_view guidance,
                                           std::span<const ExpertTurn> turns, std::string_view critique,
                                           const CarriedContext& carried, int round, int total_rounds,
                                           std::size_t context_budget, const PromptSettings& settings);

/// Second attempt after an unparseable synthesis: the original exchange plus a format reminder.
llm::ChatRequest assemble_reformat_request(const llm::ChatRequest& original, std::string_view bad_reply);

llm::ChatRequest assemble_final_prompt(std::string_view agenda, std::span<const RoundRecord> rounds,
                                       std::size_t context_budget, const PromptSettings& settings);

llm::ChatRequest assemble_warmup_prompt(const AgentProfile& expert, const ProjectRecord& project,
                                        std::span<const knowledge::ChunkRecord> batch, int batch_index,
                                        int batch_count, std::size_t context_budget, const PromptSettings& settings);

}  // namespace thinktank::meeting
