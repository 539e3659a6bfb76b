#pragma once

// Pre-action verification and the bounded verify/retry loop that wraps every
// action in the verified process modes.

#include <optional>
#include <string>
#include <vector>

#include "autonode/decision.hpp"
#include "autonode/grounding.hpp"
#include "autonode/perception.hpp"
#include "autonode/world.hpp"

namespace autonode::verification {

struct MarkedFrame {
  world::Frame frame;
  world::BBox roi;  // area about to be acted on
};

struct Verdict {
  bool approved = false;
  std::string reason;
};

class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual Verdict verify(const MarkedFrame& marked, const std::vector<perception::DetectedElement>& perceived,
                         const decision::HistoryLog& history,
                         const std::optional<std::vector<std::string>>& instructions,
                         const decision::ParsedDecision& proposed) const = 0;
};

// When instructions are given, the proposal must match the next instruction
// step (same verb, target Jaro >= threshold). Then click/hover: some
// perceived element overlapping the roi reads like the target. Type: the roi
// marks a textfield. Scroll: always.
class RuleVerifier final : public Verifier {
 public:
  explicit RuleVerifier(double threshold = 0.75,
                        grounding::MatchWindow window = grounding::MatchWindow::paper_ceiling)
      : threshold_(threshold), window_(window) {}

  Verdict verify(const MarkedFrame& marked, const std::vector<perception::DetectedElement>& perceived,
                 const decision::HistoryLog& history, const std::optional<std::vector<std::string>>& instructions,
                 const decision::ParsedDecision& proposed) const override;

 private:
  double threshold_;
  grounding::MatchWindow window_;
};

// Rejects terminal decisions (done/fail): there is nothing to verify.
Verdict verify(const Verifier& verifier, const MarkedFrame& marked,
               const std::vector<perception::DetectedElement>& perceived, const decision::HistoryLog& history,
               const std::optional<std::vector<std::string>>& instructions, const decision::ParsedDecision& proposed);

struct Proposal {
  decision::ParsedDecision decision;
  world::ActionCommand command;
  std::string target_text;
  MarkedFrame marked;
  std::vector<perception::DetectedElement> perceived;
};

// Callbacks the loop drives. propose() returns nullopt when no verifiable
// proposal could be produced this attempt (unparseable decision, grounding
// below threshold); that still consumes an attempt.
class StepContext {
 public:
  virtual ~StepContext() = default;
  virtual std::optional<Proposal> propose(int attempt) = 0;
  virtual Verdict check(const Proposal& proposal) = 0;
  virtual void execute(const Proposal& proposal) = 0;
  virtual void reject(const Proposal& proposal, const Verdict& verdict, bool final_attempt) = 0;
  virtual void wait() = 0;
};

enum class StepStatus { executed, terminal, exhausted };

struct StepOutcome {
  StepStatus status = StepStatus::exhausted;
  int attempts = 0;
  int verify_calls = 0;
  std::optional<decision::ParsedDecision> terminal;
  std::string last_reason;
};

// verify -> execute on approval, otherwise wait, re-propose and re-verify, at
// most max_retries attempts in total. The world is only touched via
// execute() after an approving verdict.
StepOutcome verified_execute(StepContext& ctx, int max_retries);

}  // namespace autonode::verification
