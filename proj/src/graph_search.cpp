#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "autonode/errors.hpp"
#include "autonode/graph.hpp"
#include "autonode/json_io.hpp"
#include "autonode/text.hpp"

namespace autonode::graph {

void SearchParams::validate() const {
  for (double w : {w_freq, w_edge, w_query})
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("search weights must lie in [0,1]");
  if (std::abs(w_freq + w_edge + w_query - 1.0) > 1e-9) throw ConfigError("search weights must sum to 1");
  if (!(relevance_threshold >= 0.0 && relevance_threshold <= 1.0))
    throw ConfigError("relevance_threshold must lie in [0,1]");
}

double search_score(const ScoredNode& c, const SearchParams& p) {
  return p.w_freq * c.frequency + p.w_edge * c.edge_strength + p.w_query * c.query_relevance;
}

std::vector<ScoredNode> heuristic_search(const SiteGraph& graph, const std::string& query, const SearchParams& params) {
  params.validate();
  if (graph.nodes.empty()) return {};

  std::uint64_t max_visits = 0;
  for (const auto& [id, n] : graph.nodes) max_visits = std::max(max_visits, n.visit_count);
  const std::string q = text::fold(query);

  auto components = [&](const GraphNode& n, double edge) {
    ScoredNode s;
    s.id = n.id;
    s.frequency = max_visits == 0 ? 0.0 : static_cast<double>(n.visit_count) / static_cast<double>(max_visits);
    s.edge_strength = edge;
    s.query_relevance = grounding::jaro(text::fold(n.element_text), q);
    s.score = search_score(s, params);
    return s;
  };

  // Highest score first, lowest id among equals.
  auto lower_priority = [](const ScoredNode& a, const ScoredNode& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.id > b.id;
  };
  std::priority_queue<ScoredNode, std::vector<ScoredNode>, decltype(lower_priority)> frontier(lower_priority);
  std::map<std::string, double> best_queued;
  auto push = [&](const ScoredNode& s) {
    const auto it = best_queued.find(s.id);
    if (it != best_queued.end() && it->second >= s.score) return;
    best_queued[s.id] = s.score;
    frontier.push(s);
  };

  for (const auto& r : graph.roots)
    if (const auto* n = graph.find(r)) push(components(*n, 1.0));

  std::set<std::string> expanded;
  std::vector<ScoredNode> examined;
  while (!frontier.empty() && expanded.size() < params.node_budget) {
    const ScoredNode cur = frontier.top();
    frontier.pop();
    if (expanded.contains(cur.id) || best_queued[cur.id] != cur.score) continue;
    expanded.insert(cur.id);
    examined.push_back(cur);
    for (const auto& e : graph.edges) {
      if (e.parent != cur.id || expanded.contains(e.child)) continue;
      if (const auto* child = graph.find(e.child)) push(components(*child, e.norm_score));
    }
  }

  std::vector<ScoredNode> out;
  for (auto& s : examined)
    if (s.query_relevance >= params.relevance_threshold) out.push_back(std::move(s));
  std::stable_sort(out.begin(), out.end(), [](const ScoredNode& a, const ScoredNode& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return out;
}

SiteGraph induced_subgraph(const SiteGraph& graph, const std::vector<std::string>& node_ids) {
  SiteGraph sub;
  sub.version = graph.version;
  const std::set<std::string> keep(node_ids.begin(), node_ids.end());
  for (const auto& id : keep)
    if (const auto* n = graph.find(id)) sub.nodes.emplace(id, *n);
  for (const auto& e : graph.edges)
    if (sub.nodes.contains(e.parent) && sub.nodes.contains(e.child)) sub.edges.push_back(e);
  for (const auto& r : graph.roots)
    if (sub.nodes.contains(r)) sub.roots.push_back(r);
  return sub;
}

SiteGraph retrieve_subgraph(const SiteGraph& graph, const std::string& query, const SearchParams& params) {
  std::vector<std::string> ids;
  for (const auto& s : heuristic_search(graph, query, params)) ids.push_back(s.id);
  return induced_subgraph(graph, ids);
}

GroundedResponse ground_response(const SiteGraph& subgraph, const std::string& query, std::size_t top_k) {
  const std::string q = text::fold(query);
  std::vector<std::pair<double, const GraphNode*>> ranked;
  for (const auto& [id, n] : subgraph.nodes) ranked.emplace_back(grounding::jaro(text::fold(n.element_text), q), &n);
  // map iteration already orders by id, so a stable sort keeps id order among ties
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  GroundedResponse out;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) {
    out.grounded.push_back(*ranked[i].second);
    out.context.push_back(ranked[i].second->annotation("action_description"));
  }
  return out;
}

std::string TemplateResponder::respond(const std::vector<std::string>& context,
                                       const std::vector<GraphNode>& grounded) const {
  std::string out;
  for (std::size_t i = 0; i < grounded.size(); ++i) {
    if (i) out += "\n";
    const std::string desc = i < context.size() ? context[i] : grounded[i].annotation("action_description");
    out += grounded[i].element_text + " — " + desc;
  }
  return out;
}

std::string generate_response(const std::vector<std::string>& context, const std::vector<GraphNode>& grounded) {
  return TemplateResponder().respond(context, grounded);
}

nlohmann::json to_json(const SearchParams& p) {
  return {{"w_freq", p.w_freq},
          {"w_edge", p.w_edge},
          {"w_query", p.w_query},
          {"node_budget", p.node_budget},
          {"relevance_threshold", p.relevance_threshold}};
}

SearchParams search_params_from_json(const nlohmann::json& j) {
  SearchParams p;
  if (!j.is_object()) throw SchemaError("search params must be an object");
  if (j.contains("w_freq")) p.w_freq = json_io::require_number(j, "w_freq");
  if (j.contains("w_edge")) p.w_edge = json_io::require_number(j, "w_edge");
  if (j.contains("w_query")) p.w_query = json_io::require_number(j, "w_query");
  if (j.contains("node_budget")) {
    const int b = json_io::require_int(j, "node_budget");
    if (b < 0) throw ConfigError("node_budget must be non-negative");
    p.node_budget = static_cast<std::size_t>(b);
  }
  if (j.contains("relevance_threshold")) p.relevance_threshold = json_io::require_number(j, "relevance_threshold");
  p.validate();
  return p;
}

}  // namespace autonode::graph
