#include "autonode/verification.hpp"

#include "autonode/errors.hpp"
#include "autonode/text.hpp"

namespace autonode::verification {

Verdict RuleVerifier::verify(const MarkedFrame& marked, const std::vector<perception::DetectedElement>& perceived,
                             const decision::HistoryLog& history,
                             const std::optional<std::vector<std::string>>& instructions,
                             const decision::ParsedDecision& proposed) const {
  using decision::DecisionKind;
  if (instructions && !proposed.terminal()) {
    const std::size_t k = history.applied_count();
    if (k < instructions->size()) {
      std::optional<decision::ParsedDecision> expected;
      try {
        expected = decision::parse(decision::RawDecision{(*instructions)[k]});
      } catch (const ParseError&) {
        // free-form instruction, nothing to compare against
      }
      if (expected && expected->kind != proposed.kind)
        return {false, "instruction " + std::to_string(k + 1) + " expects " + decision::to_string(expected->kind)};
      if (expected && expected->target_text) {
        const double sim = grounding::jaro(text::fold(proposed.target_text.value_or("")),
                                           text::fold(*expected->target_text), window_);
        if (sim < threshold_)
          return {false, "target '" + proposed.target_text.value_or("") + "' departs from instruction " +
                             std::to_string(k + 1) + " ('" + *expected->target_text + "')"};
      }
    }
  }
  switch (proposed.kind) {
    case DecisionKind::scroll: return {true, ""};
    case DecisionKind::type: {
      const auto c = marked.roi.center();
      for (const auto& e : perceived) {
        if (e.kind == world::ElementKind::textfield && e.bbox.contains(c.x, c.y)) return {true, ""};
      }
      return {false, "focused element is not a textfield"};
    }
    case DecisionKind::click:
    case DecisionKind::hover: {
      const std::string target = text::fold(proposed.target_text.value_or(""));
      double best = -1.0;
      std::string best_text;
      bool any = false;
      for (const auto& e : perceived) {
        if (!e.bbox.overlaps(marked.roi)) continue;
        const double sim = grounding::jaro(text::fold(e.text), target, window_);
        if (sim > best) {
          any = true;
          best = sim;
          best_text = e.text;
        }
      }
      if (best >= threshold_) return {true, ""};
      if (!any) return {false, "nothing readable under the marked area"};
      return {false, "marked area reads '" + best_text + "', jaro " + std::to_string(best) + " below " +
                         std::to_string(threshold_)};
    }
    case DecisionKind::done:
    case DecisionKind::fail: break;
  }
  return {false, "terminal decision"};
}

Verdict verify(const Verifier& verifier, const MarkedFrame& marked,
               const std::vector<perception::DetectedElement>& perceived, const decision::HistoryLog& history,
               const std::optional<std::vector<std::string>>& instructions, const decision::ParsedDecision& proposed) {
  if (proposed.terminal()) throw Error("verify requires a concrete action, got " + decision::to_string(proposed.kind));
  return verifier.verify(marked, perceived, history, instructions, proposed);
}

StepOutcome verified_execute(StepContext& ctx, int max_retries) {
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
  StepOutcome out;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    if (attempt > 0) ctx.wait();
    ++out.attempts;
    auto proposal = ctx.propose(attempt);
    if (!proposal) {
      out.last_reason = "no verifiable proposal";
      continue;
    }
    if (proposal->decision.terminal()) {
      out.status = StepStatus::terminal;
      out.terminal = proposal->decision;
      return out;
    }
    ++out.verify_calls;
    const Verdict verdict = ctx.check(*proposal);
    if (verdict.approved) {
      ctx.execute(*proposal);
      out.status = StepStatus::executed;
      return out;
    }
    out.last_reason = verdict.reason;
    ctx.reject(*proposal, verdict, attempt + 1 == max_retries);
  }
  out.status = StepStatus::exhausted;
  return out;
}

}  // namespace autonode::verification
