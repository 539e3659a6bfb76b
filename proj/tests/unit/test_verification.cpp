#include <deque>

#include "autonode/errors.hpp"
#include "autonode/verification.hpp"
#include "doctest.h"

using namespace autonode;
using namespace autonode::verification;
using decision::ParsedDecision;
using perception::DetectedElement;

namespace {

ParsedDecision p(const std::string& s) { return decision::parse(decision::RawDecision{s}); }

const std::vector<DetectedElement> kPerceived{
    DetectedElement({40, 120, 200, 48}, "Compose", 1.0, world::ElementKind::button),
    DetectedElement({400, 120, 600, 44}, "To", 1.0, world::ElementKind::textfield),
    DetectedElement({400, 600, 160, 48}, "Send", 1.0, world::ElementKind::button),
};

MarkedFrame marked(world::BBox roi) { return {world::Frame{{1280, 800}, {}}, roi}; }

// Scripted StepContext: proposals come from a queue, verdicts from a predicate.
class FakeContext final : public StepContext {
 public:
  std::deque<std::optional<Proposal>> proposals;
  std::deque<bool> verdicts;
  int waits = 0;
  int executed = 0;
  std::vector<bool> rejections;  // final_attempt flags
  std::vector<int> attempts_seen;

  std::optional<Proposal> propose(int attempt) override {
    attempts_seen.push_back(attempt);
    auto next = proposals.front();
    if (proposals.size() > 1) proposals.pop_front();
    return next;
  }
  Verdict check(const Proposal&) override {
    const bool ok = verdicts.front();
    if (verdicts.size() > 1) verdicts.pop_front();
    return {ok, ok ? "" : "nope"};
  }
  void execute(const Proposal&) override { ++executed; }
  void reject(const Proposal&, const Verdict&, bool final_attempt) override { rejections.push_back(final_attempt); }
  void wait() override { ++waits; }
};

Proposal proposal(const std::string& line) {
  Proposal pr;
  pr.decision = p(line);
  pr.command = world::Click{0, 0};
  return pr;
}

}  // namespace

TEST_CASE("click is approved when the marked area reads like the target") {
  const RuleVerifier v;
  CHECK(v.verify(marked({40, 120, 200, 48}), kPerceived, {}, std::nullopt, p("CLICK :: compose")).approved);
  CHECK(v.verify(marked({50, 130, 10, 10}), kPerceived, {}, std::nullopt, p("HOVER :: Compose")).approved);
  const auto miss = v.verify(marked({400, 600, 160, 48}), kPerceived, {}, std::nullopt, p("CLICK :: Compose"));
  CHECK_FALSE(miss.approved);
  CHECK(miss.reason.find("Send") != std::string::npos);
  const auto empty = v.verify(marked({1200, 10, 10, 10}), kPerceived, {}, std::nullopt, p("CLICK :: Compose"));
  CHECK_FALSE(empty.approved);
  CHECK(empty.reason == "nothing readable under the marked area");
}

TEST_CASE("verifier threshold is inclusive and configurable") {
  // jaro("compose","compost") = 0.904...
  const std::vector<DetectedElement> one{DetectedElement({0, 0, 50, 50}, "Compost", 1.0, world::ElementKind::button)};
  CHECK(RuleVerifier(0.9).verify(marked({0, 0, 50, 50}), one, {}, std::nullopt, p("CLICK :: Compose")).approved);
  CHECK_FALSE(
      RuleVerifier(0.95).verify(marked({0, 0, 50, 50}), one, {}, std::nullopt, p("CLICK :: Compose")).approved);
  const std::vector<DetectedElement> exact{DetectedElement({0, 0, 50, 50}, "Send", 1.0, world::ElementKind::button)};
  CHECK(RuleVerifier(1.0).verify(marked({0, 0, 50, 50}), exact, {}, std::nullopt, p("CLICK :: Send")).approved);
}

TEST_CASE("type needs a textfield under the marked area") {
  const RuleVerifier v;
  CHECK(v.verify(marked({400, 120, 600, 44}), kPerceived, {}, std::nullopt, p("TYPE :: bob")).approved);
  CHECK_FALSE(v.verify(marked({40, 120, 200, 48}), kPerceived, {}, std::nullopt, p("TYPE :: bob")).approved);
}

TEST_CASE("scroll is always approved without instructions") {
  CHECK(RuleVerifier().verify(marked({0, 0, 1, 1}), {}, {}, std::nullopt, p("SCROLL :: 3")).approved);
}

TEST_CASE("instructions pin the verb and target of the next step") {
  const RuleVerifier v;
  const std::vector<std::string> ins{"CLICK :: Compose", "TYPE :: bob", "CLICK :: Send"};
  const auto roi = marked({40, 120, 200, 48});
  CHECK(v.verify(roi, kPerceived, {}, ins, p("CLICK :: Compose")).approved);
  CHECK_FALSE(v.verify(roi, kPerceived, {}, ins, p("HOVER :: Compose")).approved);
  CHECK_FALSE(v.verify(marked({400, 600, 160, 48}), kPerceived, {}, ins, p("CLICK :: Send")).approved);

  decision::HistoryLog two;
  two = decision::append_history(two, {0, world::Click{1, 1}, "Compose", decision::Outcome::applied});
  two = decision::append_history(two, {1, world::TypeText{"bob"}, "", decision::Outcome::applied});
  CHECK(v.verify(marked({400, 600, 160, 48}), kPerceived, two, ins, p("CLICK :: Send")).approved);

  // past the end of the instructions only the frame rules apply
  decision::HistoryLog three = decision::append_history(two, {2, world::Click{1, 1}, "Send", decision::Outcome::applied});
  CHECK(v.verify(roi, kPerceived, three, ins, p("CLICK :: Compose")).approved);

  // free-form instructions do not constrain the verb
  const std::vector<std::string> prose{"open the composer"};
  CHECK(v.verify(roi, kPerceived, {}, prose, p("CLICK :: Compose")).approved);
}

TEST_CASE("verify refuses terminal decisions") {
  CHECK_THROWS_AS(verify(RuleVerifier(), marked({0, 0, 1, 1}), {}, {}, std::nullopt, p("DONE")), Error);
  CHECK_THROWS_AS(verify(RuleVerifier(), marked({0, 0, 1, 1}), {}, {}, std::nullopt, p("FAIL :: x")), Error);
}

TEST_CASE("verified_execute executes on the first approval") {
  FakeContext ctx;
  ctx.proposals = {proposal("CLICK :: A")};
  ctx.verdicts = {true};
  const auto out = verified_execute(ctx, 3);
  CHECK(out.status == StepStatus::executed);
  CHECK(out.attempts == 1);
  CHECK(out.verify_calls == 1);
  CHECK(ctx.executed == 1);
  CHECK(ctx.waits == 0);
}

TEST_CASE("verified_execute waits between attempts and succeeds on the last one") {
  FakeContext ctx;
  ctx.proposals = {proposal("CLICK :: A")};
  ctx.verdicts = {false, false, true};
  const auto out = verified_execute(ctx, 3);
  CHECK(out.status == StepStatus::executed);
  CHECK(out.attempts == 3);
  CHECK(out.verify_calls == 3);
  CHECK(ctx.waits == 2);
  CHECK(ctx.executed == 1);
  CHECK(ctx.rejections == std::vector<bool>{false, false});
  CHECK(ctx.attempts_seen == std::vector<int>{0, 1, 2});
}

TEST_CASE("verified_execute gives up after max_retries attempts without touching the world") {
  FakeContext ctx;
  ctx.proposals = {proposal("CLICK :: A")};
  ctx.verdicts = {false};
  const auto out = verified_execute(ctx, 3);
  CHECK(out.status == StepStatus::exhausted);
  CHECK(out.attempts == 3);
  CHECK(ctx.executed == 0);
  CHECK(ctx.rejections == std::vector<bool>{false, false, true});
  CHECK(out.last_reason == "nope");
}

TEST_CASE("missing proposals consume attempts but not verify calls") {
  FakeContext ctx;
  ctx.proposals = {std::nullopt, std::nullopt, proposal("CLICK :: A")};
  ctx.verdicts = {true};
  const auto out = verified_execute(ctx, 3);
  CHECK(out.status == StepStatus::executed);
  CHECK(out.attempts == 3);
  CHECK(out.verify_calls == 1);

  FakeContext none;
  none.proposals = {std::nullopt};
  none.verdicts = {true};
  const auto exhausted = verified_execute(none, 2);
  CHECK(exhausted.status == StepStatus::exhausted);
  CHECK(exhausted.verify_calls == 0);
}

TEST_CASE("terminal proposals end the step without verification") {
  FakeContext ctx;
  ctx.proposals = {proposal("DONE")};
  ctx.verdicts = {true};
  const auto out = verified_execute(ctx, 3);
  CHECK(out.status == StepStatus::terminal);
  CHECK(out.terminal->kind == decision::DecisionKind::done);
  CHECK(out.verify_calls == 0);
  CHECK(ctx.executed == 0);
}

TEST_CASE("max_retries must be positive") {
  FakeContext ctx;
  CHECK_THROWS_AS(verified_execute(ctx, 0), ConfigError);
}
