#pragma once

// Site knowledge graph learned from finalized exploration traces: mapping
// and annotation of recorded events into structured nodes, hierarchical
// traversal and node selection, graph-aided heuristic search and grounded
// retrieval over induced subgraphs.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autonode/decision.hpp"
#include "autonode/exploration.hpp"
#include "autonode/grounding.hpp"
#include "autonode/perception.hpp"
#include "autonode/world.hpp"

namespace autonode::graph {

inline constexpr const char* kFollows = "follows";
inline constexpr const char* kStarts = "starts";
inline constexpr const char* kBackEdge = "back";

struct GraphNode {
  std::string id;
  std::string element_text;
  world::ElementKind element_kind = world::ElementKind::button;
  world::Point ref_center;
  world::ScreenBounds ref_screen;
  world::ActionKind action_type = world::ActionKind::click;
  // timestamp, action_description, page (fingerprint), payload, amount,
  // element_id, provenance, confidence
  std::map<std::string, std::string> annotations;
  std::uint64_t visit_count = 0;

  std::string annotation(const std::string& key) const {
    const auto it = annotations.find(key);
    return it == annotations.end() ? std::string() : it->second;
  }
  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::string parent;
  std::string child;
  std::string relationship = kFollows;  // kBackEdge closes a cycle
  std::uint64_t traversal_count = 0;
  double norm_score = 0.0;

  bool operator==(const GraphEdge&) const = default;
};

struct SiteGraph {
  std::map<std::string, GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<std::string> roots;
  std::uint64_t version = 0;

  const GraphNode* find(const std::string& id) const {
    const auto it = nodes.find(id);
    return it == nodes.end() ? nullptr : &it->second;
  }
  bool operator==(const SiteGraph&) const = default;
};

struct EntityDescriptor {
  std::optional<exploration::ElementDescriptor> element;
  world::ActionKind action = world::ActionKind::click;
  std::string target_text;
  std::optional<std::string> payload;
  std::optional<int> scroll_amount;
  std::string page;  // pre-action fingerprint
  std::string description;
  std::uint64_t timestamp = 0;
};

struct Mapping {
  EntityDescriptor entity;
  std::string relationship;  // kStarts or kFollows
  std::string provenance;    // event id
};

// One mapping per event, in order; the first event of each workflow
// "starts", the rest "follow". Teach-mode corrections override the
// recorded target.
std::vector<Mapping> map_entities(const std::vector<exploration::ExplorationTrace>& traces);
std::vector<Mapping> map_entities(const exploration::ExplorationTrace& trace);

// Supplies the replayed frame a mapping was recorded on.
using FrameSource = std::function<world::Frame(const Mapping&)>;

std::vector<GraphNode> annotate(const std::vector<Mapping>& mappings, const FrameSource& frames,
                                const perception::PerceptionConfig& perception,
                                const grounding::GroundingParams& params);

// Merges `nodes` (parallel to `mappings`) into a copy of `base`. Nodes merge
// on (folded text, kind, page fingerprint, action); edge norm_score is the
// traversal count over the largest count among its siblings.
SiteGraph generate_site_graph(const SiteGraph& base, const std::vector<GraphNode>& nodes,
                              const std::vector<Mapping>& mappings);

// Full pipeline for finalized traces: replay, map, annotate, merge. Throws
// NotFinalized for traces that have not passed teach mode.
SiteGraph ingest_traces(const SiteGraph& base, const world::SiteModel& site,
                        const std::vector<exploration::ExplorationTrace>& traces,
                        const perception::PerceptionConfig& perception = {},
                        const grounding::GroundingParams& params = {});

// Deterministic id derived from the merge key, e.g. "compose.click@home.1f2e3d4c".
std::string node_id_for(const std::string& text, world::ElementKind kind, const std::string& page,
                        world::ActionKind action);

struct NodeCandidate {
  GraphNode node;
  double norm_score = 1.0;  // strength of the edge it was reached through
};

// Children of `prev` (the ROIs its activation unlocks); roots when empty.
std::vector<NodeCandidate> traverse(const SiteGraph& graph, const std::optional<std::string>& prev);

class NodeSelector {
 public:
  virtual ~NodeSelector() = default;
  // Index into candidates. Throws NoCandidates when nothing is selectable.
  virtual std::size_t select(const std::vector<NodeCandidate>& candidates, const decision::Objective& objective,
                             const decision::HistoryLog& history) const = 0;
};

// Picks the candidate whose text best matches the current objective step,
// preferring the step's action kind and skipping nodes already acted on.
class DeterministicSelector final : public NodeSelector {
 public:
  explicit DeterministicSelector(grounding::MatchWindow window = grounding::MatchWindow::paper_ceiling)
      : window_(window) {}
  std::size_t select(const std::vector<NodeCandidate>& candidates, const decision::Objective& objective,
                     const decision::HistoryLog& history) const override;

 private:
  grounding::MatchWindow window_;
};

GraphNode select_node(const NodeSelector& selector, const std::vector<NodeCandidate>& candidates,
                      const decision::Objective& objective, const decision::HistoryLog& history);

// Text of the objective step that should be acted on next.
std::string current_step_text(const decision::Objective& objective, const decision::HistoryLog& history);

struct SearchParams {
  double w_freq = 0.2;
  double w_edge = 0.3;
  double w_query = 0.5;
  std::size_t node_budget = 64;
  double relevance_threshold = 0.5;

  void validate() const;
  bool operator==(const SearchParams&) const = default;
};

struct ScoredNode {
  std::string id;
  double score = 0.0;
  double frequency = 0.0;
  double edge_strength = 0.0;
  double query_relevance = 0.0;
};

double search_score(const ScoredNode& components, const SearchParams& params);

// Best-first expansion from the roots, at most node_budget expansions.
// Returns expanded nodes whose query relevance clears the threshold, by
// descending score.
std::vector<ScoredNode> heuristic_search(const SiteGraph& graph, const std::string& query,
                                         const SearchParams& params);

SiteGraph induced_subgraph(const SiteGraph& graph, const std::vector<std::string>& node_ids);
SiteGraph retrieve_subgraph(const SiteGraph& graph, const std::string& query, const SearchParams& params);

inline constexpr std::size_t kGroundedTopK = 5;

struct GroundedResponse {
  std::vector<std::string> context;
  std::vector<GraphNode> grounded;
};

GroundedResponse ground_response(const SiteGraph& subgraph, const std::string& query,
                                 std::size_t top_k = kGroundedTopK);

class Responder {
 public:
  virtual ~Responder() = default;
  virtual std::string respond(const std::vector<std::string>& context,
                              const std::vector<GraphNode>& grounded) const = 0;
};

class TemplateResponder final : public Responder {
 public:
  std::string respond(const std::vector<std::string>& context, const std::vector<GraphNode>& grounded) const override;
};

std::string generate_response(const std::vector<std::string>& context, const std::vector<GraphNode>& grounded);

// Copy-on-write holder: readers take immutable snapshots, writers swap in a
// fully built successor with the version bumped.
class GraphStore {
 public:
  explicit GraphStore(SiteGraph initial = {}) : current_(std::make_shared<const SiteGraph>(std::move(initial))) {}

  std::shared_ptr<const SiteGraph> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  // `build` maps the current graph to its successor; serialized with other writers.
  std::shared_ptr<const SiteGraph> update(const std::function<SiteGraph(const SiteGraph&)>& build) {
    std::lock_guard write(write_mu_);
    auto base = snapshot();
    auto next = std::make_shared<const SiteGraph>(build(*base));
    std::lock_guard lock(mu_);
    current_ = next;
    return next;
  }

 private:
  mutable std::mutex mu_;
  std::mutex write_mu_;
  std::shared_ptr<const SiteGraph> current_;
};

nlohmann::json to_json(const SiteGraph& graph);
SiteGraph graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SearchParams& params);
SearchParams search_params_from_json(const nlohmann::json& j);

// True when the non-back edges form a DAG.
bool forward_edges_acyclic(const SiteGraph& graph);

}  // namespace autonode::graph
