#include "autonode/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"
#include "autonode/text.hpp"

namespace autonode::graph {

namespace {

std::string slug(const std::string& s) {
  std::string out;
  for (char c : text::fold(s)) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (keep) {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "node" : out.substr(0, 24);
}

std::optional<world::ActionKind> to_action_kind(decision::DecisionKind k) {
  switch (k) {
    case decision::DecisionKind::click: return world::ActionKind::click;
    case decision::DecisionKind::type: return world::ActionKind::type;
    case decision::DecisionKind::scroll: return world::ActionKind::scroll;
    case decision::DecisionKind::hover: return world::ActionKind::hover;
    default: return std::nullopt;
  }
}

bool reaches(const SiteGraph& g, const std::string& from, const std::string& to) {
  std::set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (cur == to) return true;
    for (const auto& e : g.edges) {
      if (e.parent != cur || e.relationship == kBackEdge) continue;
      if (seen.insert(e.child).second) queue.push_back(e.child);
    }
  }
  return false;
}

void renormalize(SiteGraph& g) {
  std::map<std::string, std::uint64_t> max_count;
  for (const auto& e : g.edges) max_count[e.parent] = std::max(max_count[e.parent], e.traversal_count);
  for (auto& e : g.edges) {
    const auto m = max_count[e.parent];
    e.norm_score = m == 0 ? 0.0 : static_cast<double>(e.traversal_count) / static_cast<double>(m);
  }
}

}  // namespace

std::string node_id_for(const std::string& text, world::ElementKind kind, const std::string& page,
                        world::ActionKind action) {
  const std::string key =
      text::fold(text) + '\0' + world::to_string(kind) + '\0' + page + '\0' + world::to_string(action);
  return slug(text) + "." + world::to_string(action) + "@" + exploration::page_of(page) + "." +
         text::hex64(text::fnv1a(key)).substr(0, 8);
}

std::vector<Mapping> map_entities(const exploration::ExplorationTrace& trace) {
  if (trace.events.empty()) throw EmptyTrace("trace '" + trace.workflow_id + "' has no events");
  if (trace.steps.size() != trace.events.size())
    throw EmptyTrace("trace '" + trace.workflow_id + "' has not been transformed into steps");

  std::vector<Mapping> out;
  out.reserve(trace.events.size());
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& ev = trace.events[i];
    const auto& step = trace.steps[i];
    const auto& tmpl = step.command_template;
    const auto action = to_action_kind(tmpl.kind);
    if (!action) throw ReplayFailure("step '" + step.step_id + "' holds a terminal decision");

    Mapping m;
    m.entity.action = *action;
    m.entity.page = ev.pre_page;
    m.entity.timestamp = ev.timestamp;
    m.entity.payload = tmpl.payload_text;
    m.entity.scroll_amount = tmpl.scroll_amount;
    if (step.modified_from) {
      m.entity.target_text = tmpl.target_text.value_or("");
      m.entity.description = decision::format(tmpl) + " on " + exploration::page_of(ev.pre_page);
    } else {
      m.entity.element = ev.element;
      m.entity.target_text = tmpl.target_text.value_or(ev.element ? ev.element->text : std::string());
      m.entity.description = ev.action_description;
    }
    m.relationship = i == 0 ? kStarts : kFollows;
    m.provenance = ev.event_id;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Mapping> map_entities(const std::vector<exploration::ExplorationTrace>& traces) {
  if (traces.empty()) throw EmptyTrace("no traces");
  std::vector<Mapping> out;
  for (const auto& t : traces) {
    auto part = map_entities(t);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<GraphNode> annotate(const std::vector<Mapping>& mappings, const FrameSource& frames,
                                const perception::PerceptionConfig& perception,
                                const grounding::GroundingParams& params) {
  std::vector<GraphNode> out;
  out.reserve(mappings.size());
  for (const auto& m : mappings) {
    const world::Frame frame = frames(m);
    GraphNode n;
    n.action_type = m.entity.action;
    n.ref_screen = frame.screen;
    n.visit_count = 1;
    n.annotations["timestamp"] = std::to_string(m.entity.timestamp);
    n.annotations["action_description"] = m.entity.description;
    n.annotations["page"] = m.entity.page;
    n.annotations["provenance"] = m.provenance;
    if (m.entity.payload) n.annotations["payload"] = *m.entity.payload;
    if (m.entity.element) n.annotations["element_id"] = m.entity.element->id;

    if (m.entity.action == world::ActionKind::scroll) {
      const int amount = m.entity.scroll_amount.value_or(0);
      n.annotations["amount"] = std::to_string(amount);
      n.element_text = "scroll " + std::to_string(amount);
      n.element_kind = world::ElementKind::label;
      n.ref_center = {frame.screen.width / 2.0, frame.screen.height / 2.0};
    } else {
      auto cfg = perception;
      cfg.seed = derive_seed(perception.seed, {text::fnv1a(m.provenance)});
      const auto perceived = perception::perceive(frame, cfg);
      if (perceived.empty()) throw ReplayFailure("frame for '" + m.provenance + "' has no elements");
      const world::Point ref = m.entity.element
                                   ? m.entity.element->bbox.center()
                                   : world::Point{frame.screen.width / 2.0, frame.screen.height / 2.0};
      grounding::GroundingResult hit;
      try {
        hit = grounding::ground(m.entity.target_text, ref, perceived, frame.screen, params);
      } catch (const grounding::BelowThreshold& e) {
        throw ReplayFailure("cannot re-locate '" + m.entity.target_text + "' for " + m.provenance + ": " + e.what());
      }
      n.element_text = hit.chosen.text;
      n.element_kind = hit.chosen.kind;
      n.ref_center = hit.chosen.bbox.center();
      n.annotations["confidence"] = std::to_string(hit.chosen.confidence);
    }
    n.id = node_id_for(n.element_text, n.element_kind, m.entity.page, n.action_type);
    out.push_back(std::move(n));
  }
  return out;
}

SiteGraph generate_site_graph(const SiteGraph& base, const std::vector<GraphNode>& nodes,
                              const std::vector<Mapping>& mappings) {
  if (nodes.size() != mappings.size()) throw Error("annotated nodes and mappings differ in length");
  SiteGraph g = base;
  std::string prev;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (auto it = g.nodes.find(n.id); it != g.nodes.end()) {
      it->second.visit_count += n.visit_count;
    } else {
      g.nodes.emplace(n.id, n);
    }

    if (mappings[i].relationship == kStarts || prev.empty()) {
      if (std::find(g.roots.begin(), g.roots.end(), n.id) == g.roots.end()) g.roots.push_back(n.id);
    } else if (prev != n.id) {
      auto edge = std::find_if(g.edges.begin(), g.edges.end(),
                               [&](const GraphEdge& e) { return e.parent == prev && e.child == n.id; });
      if (edge != g.edges.end()) {
        ++edge->traversal_count;
      } else {
        const bool closes_cycle = reaches(g, n.id, prev);
        g.edges.push_back({prev, n.id, closes_cycle ? kBackEdge : kFollows, 1, 0.0});
      }
    }
    prev = n.id;
  }
  renormalize(g);
  ++g.version;
  return g;
}

SiteGraph ingest_traces(const SiteGraph& base, const world::SiteModel& site,
                        const std::vector<exploration::ExplorationTrace>& traces,
                        const perception::PerceptionConfig& perception, const grounding::GroundingParams& params) {
  for (const auto& t : traces) {
    if (t.status != exploration::TraceStatus::finalized)
      throw NotFinalized("trace '" + t.workflow_id + "' must pass teach mode before graph ingestion");
  }
  const auto mappings = map_entities(traces);

  std::map<std::string, world::Frame> frames;
  for (const auto& t : traces) {
    const auto replayed = exploration::replay_trace(site, t);
    for (std::size_t i = 0; i < replayed.size(); ++i) {
      const std::string& event_id = t.steps[i].source_event;
      frames[event_id] =
          world::screenshot(replayed[i].pre, site, derive_seed(perception.seed, {text::fnv1a(event_id), 1}));
    }
  }
  const FrameSource source = [&](const Mapping& m) {
    const auto it = frames.find(m.provenance);
    if (it == frames.end()) throw ReplayFailure("no replayed frame for '" + m.provenance + "'");
    return it->second;
  };
  return generate_site_graph(base, annotate(mappings, source, perception, params), mappings);
}

std::vector<NodeCandidate> traverse(const SiteGraph& graph, const std::optional<std::string>& prev) {
  std::vector<NodeCandidate> out;
  if (!prev) {
    for (const auto& id : graph.roots) {
      if (const auto* n = graph.find(id)) out.push_back({*n, 1.0});
    }
    return out;
  }
  if (!graph.find(*prev)) throw UnknownNode("'" + *prev + "'");
  for (const auto& e : graph.edges) {
    if (e.parent != *prev) continue;
    if (const auto* n = graph.find(e.child)) out.push_back({*n, e.norm_score});
  }
  return out;
}

std::string current_step_text(const decision::Objective& objective, const decision::HistoryLog& history) {
  const std::size_t k = history.applied_count();
  if (objective.instruction_set && k < objective.instruction_set->size()) return (*objective.instruction_set)[k];
  return objective.text;
}

std::size_t DeterministicSelector::select(const std::vector<NodeCandidate>& candidates,
                                          const decision::Objective& objective,
                                          const decision::HistoryLog& history) const {
  if (candidates.empty()) throw NoCandidates("nothing to select from");

  const std::string step = current_step_text(objective, history);
  std::string target = step;
  std::optional<world::ActionKind> wanted;
  try {
    const auto parsed = decision::parse(decision::RawDecision{step});
    wanted = to_action_kind(parsed.kind);
    if (parsed.target_text) {
      target = *parsed.target_text;
    } else if (parsed.kind == decision::DecisionKind::scroll) {
      target = "scroll " + std::to_string(parsed.scroll_amount.value_or(0));
    } else {
      target.clear();
    }
  } catch (const ParseError&) {
    // free-form step text; match against it as is
  }

  auto satisfied = [&](const GraphNode& n) {
    const std::string text = text::fold(n.element_text);
    for (const auto& e : history.entries) {
      if (e.outcome == decision::Outcome::applied && world::kind_of(e.command) == n.action_type &&
          text::fold(e.target_text) == text)
        return true;
    }
    return false;
  };

  // An explicit instruction step names the next action, and workflows may
  // legitimately repeat one (Save on two forms). The skip rule only guards
  // free-form objectives, where the step text never advances.
  const bool instructed = objective.instruction_set && history.applied_count() < objective.instruction_set->size();
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (instructed || !satisfied(candidates[i].node)) pool.push_back(i);
  if (pool.empty()) throw NoCandidates("every candidate was already acted on");
  if (wanted) {
    std::vector<std::size_t> same_action;
    for (auto i : pool)
      if (candidates[i].node.action_type == *wanted) same_action.push_back(i);
    if (!same_action.empty()) pool = std::move(same_action);
  }

  const std::string folded_target = text::fold(target);
  std::size_t best = pool.front();
  double best_sim = -1.0;
  for (auto i : pool) {
    const auto& c = candidates[i];
    const double sim = grounding::jaro(text::fold(c.node.element_text), folded_target, window_);
    const auto& b = candidates[best];
    const bool better = sim > best_sim ||
                        (sim == best_sim && (c.norm_score > b.norm_score ||
                                             (c.norm_score == b.norm_score && c.node.id < b.node.id)));
    if (better) {
      best = i;
      best_sim = sim;
    }
  }
  return best;
}

GraphNode select_node(const NodeSelector& selector, const std::vector<NodeCandidate>& candidates,
                      const decision::Objective& objective, const decision::HistoryLog& history) {
  if (candidates.empty()) throw NoCandidates("nothing to select from");
  const std::size_t i = selector.select(candidates, objective, history);
  if (i >= candidates.size()) throw NoCandidates("selector returned an out-of-range index");
  return candidates[i].node;
}

bool forward_edges_acyclic(const SiteGraph& g) {
  std::map<std::string, int> indegree;
  for (const auto& [id, n] : g.nodes) indegree[id] = 0;
  for (const auto& e : g.edges)
    if (e.relationship != kBackEdge) ++indegree[e.child];
  std::deque<std::string> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.push_back(id);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::string cur = ready.front();
    ready.pop_front();
    ++seen;
    for (const auto& e : g.edges) {
      if (e.parent == cur && e.relationship != kBackEdge && --indegree[e.child] == 0) ready.push_back(e.child);
    }
  }
  return seen == indegree.size();
}

// --- JSON -----------------------------------------------------------------

nlohmann::json to_json(const SiteGraph& g) {
  using nlohmann::json;
  json nodes = json::object();
  for (const auto& [id, n] : g.nodes) {
    nodes[id] = json{{"text", n.element_text},
                     {"kind", world::to_string(n.element_kind)},
                     {"ref", json::array({n.ref_center.x, n.ref_center.y})},
                     {"screen", json::array({n.ref_screen.width, n.ref_screen.height})},
                     {"action", world::to_string(n.action_type)},
                     {"annotations", n.annotations},
                     {"visits", n.visit_count}};
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back(json{{"parent", e.parent},
                         {"child", e.child},
                         {"rel", e.relationship},
                         {"count", e.traversal_count},
                         {"score", e.norm_score}});
  }
  return json{{"version", g.version}, {"roots", g.roots}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

SiteGraph graph_from_json(const nlohmann::json& j) {
  SiteGraph g;
  try {
    g.version = json_io::require(j, "version").get<std::uint64_t>();
    g.roots = json_io::require(j, "roots").get<std::vector<std::string>>();
    for (const auto& [id, n] : json_io::require(j, "nodes").items()) {
      GraphNode node;
      node.id = id;
      node.element_text = json_io::require_string(n, "text");
      node.element_kind = world::element_kind_from_string(json_io::require_string(n, "kind"));
      const auto& ref = json_io::require(n, "ref");
      node.ref_center = {ref.at(0).get<double>(), ref.at(1).get<double>()};
      const auto& screen = json_io::require(n, "screen");
      node.ref_screen = {screen.at(0).get<int>(), screen.at(1).get<int>()};
      node.action_type = world::action_kind_from_string(json_io::require_string(n, "action"));
      node.annotations = json_io::require(n, "annotations").get<std::map<std::string, std::string>>();
      node.visit_count = json_io::require(n, "visits").get<std::uint64_t>();
      g.nodes.emplace(id, std::move(node));
    }
    for (const auto& e : json_io::require(j, "edges")) {
      g.edges.push_back({json_io::require_string(e, "parent"), json_io::require_string(e, "child"),
                         json_io::require_string(e, "rel"), json_io::require(e, "count").get<std::uint64_t>(),
                         json_io::require_number(e, "score")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  }
  for (const auto& r : g.roots)
    if (!g.find(r)) throw ConsistencyError("root '" + r + "' is not a node");
  for (const auto& e : g.edges) {
    if (!g.find(e.parent) || !g.find(e.child))
      throw ConsistencyError("edge " + e.parent + " -> " + e.child + " has a dangling endpoint");
    if (e.parent == e.child) throw ConsistencyError("self-loop on '" + e.parent + "'");
    if (e.norm_score < 0.0 || e.norm_score > 1.0) throw ConsistencyError("edge score outside [0,1]");
  }
  return g;
}

}  // namespace autonode::graph
