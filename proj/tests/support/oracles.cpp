#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>

namespace prkg::oracle {

namespace {

using std::chrono::days;
using std::chrono::sys_days;

/// Every day a partial date stands for, walked one day at a time.
std::vector<sys_days> expand(const PartialDate& d) {
  using namespace std::chrono;
  std::vector<sys_days> out;
  const int y = d.year_value();
  for (unsigned m = 1; m <= 12; ++m) {
    if (d.month() && *d.month() != m) continue;
    for (unsigned day = 1; day <= 31; ++day) {
      year_month_day ymd{year{y}, month{m}, std::chrono::day{day}};
      if (!ymd.ok()) continue;
      if (d.day() && *d.day() != day) continue;
      out.push_back(sys_days{ymd});
    }
  }
  return out;
}

bool day_in_interval(sys_days day, const TemporalInterval& interval) {
  if (interval.start) {
    auto days_of_start = expand(*interval.start);
    // The interval begins on the earliest day the start can denote.
    if (day < *std::min_element(days_of_start.begin(), days_of_start.end())) return false;
  }
  if (interval.end) {
    auto days_of_end = expand(*interval.end);
    if (day > *std::max_element(days_of_end.begin(), days_of_end.end())) return false;
  }
  return true;
}

bool has_label(const Node& node, const std::string& label) {
  return std::find(node.labels.begin(), node.labels.end(), label) != node.labels.end();
}

bool rule_applies(const access::AccessRule& rule, const access::Element& element,
                  const Graph& graph) {
  using namespace access::scope;
  const auto& s = rule.scope;
  if (std::holds_alternative<WholeGraph>(s)) return true;

  if (auto* rid = std::get_if<RelId>(&element)) {
    auto* type = std::get_if<RelType>(&s);
    return type && graph.relationships().at(*rid).rel_type == type->name;
  }

  NodeId nid = std::holds_alternative<NodeId>(element)
                   ? std::get<NodeId>(element)
                   : std::get<access::PropertyRef>(element).node;
  const Node& node = graph.nodes().at(nid);
  if (auto* prop = std::get_if<NodeProperty>(&s)) {
    auto* ref = std::get_if<access::PropertyRef>(&element);
    return ref && has_label(node, prop->label) && ref->key == prop->key;
  }
  if (auto* lbl = std::get_if<NodeLabel>(&s)) return has_label(node, lbl->label);
  if (auto* inst = std::get_if<NodeInstance>(&s)) return inst->id == nid;
  if (auto* pred = std::get_if<PropertyPredicate>(&s)) {
    if (!has_label(node, pred->label)) return false;
    auto it = node.properties.find(pred->key);
    return it != node.properties.end() && pred->values.count(render_text(it->second));
  }
  return false;
}

bool node_ok(const Node& node, const query::NodePattern& pattern, const access::View& view) {
  if (pattern.label && !has_label(node, *pattern.label)) return false;
  for (const auto& filter : pattern.properties) {
    auto it = node.properties.find(filter.key);
    if (it == node.properties.end() || !view.property_visible(node.id, filter.key)) return false;
    if (!query::literal_matches(filter.value, it->second)) return false;
  }
  return true;
}

bool edge_ok(const Relationship& rel, const query::EdgePattern& pattern) {
  if (pattern.rel_type && rel.rel_type != *pattern.rel_type) return false;
  for (const auto& filter : pattern.properties) {
    auto it = rel.properties.find(filter.key);
    if (it == rel.properties.end() || !query::literal_matches(filter.value, it->second))
      return false;
  }
  return true;
}

struct Binding {
  std::vector<NodeId> nodes;
  std::vector<RelId> rels;
};

bool variables_agree(const query::QueryAst& ast, const Binding& b) {
  std::map<std::string, std::uint64_t> seen_node, seen_rel;
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    if (!ast.nodes[i].variable) continue;
    auto [it, fresh] = seen_node.emplace(*ast.nodes[i].variable, b.nodes[i].value);
    if (!fresh && it->second != b.nodes[i].value) return false;
  }
  for (std::size_t i = 0; i < ast.edges.size(); ++i) {
    if (!ast.edges[i].variable) continue;
    auto [it, fresh] = seen_rel.emplace(*ast.edges[i].variable, b.rels[i].value);
    if (!fresh && it->second != b.rels[i].value) return false;
  }
  return true;
}

query::Cell project(const Graph& graph, const access::View& view, const query::QueryAst& ast,
                    const Binding& b, const query::ReturnItem& item) {
  for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
    if (ast.nodes[i].variable != item.variable) continue;
    if (!item.key) return b.nodes[i];
    const Node& node = graph.nodes().at(b.nodes[i]);
    auto it = node.properties.find(*item.key);
    if (it == node.properties.end() || !view.property_visible(node.id, *item.key))
      return std::monostate{};
    return it->second;
  }
  for (std::size_t i = 0; i < ast.edges.size(); ++i) {
    if (ast.edges[i].variable != item.variable) continue;
    if (!item.key) return b.rels[i];
    const Relationship& rel = graph.relationships().at(b.rels[i]);
    auto it = rel.properties.find(*item.key);
    if (it == rel.properties.end()) return std::monostate{};
    return it->second;
  }
  return std::monostate{};
}

}  // namespace

bool valid_at(const TemporalInterval& interval, const PartialDate& at) {
  for (sys_days day : expand(at)) {
    if (day_in_interval(day, interval)) return true;
  }
  return false;
}

std::set<NodeId> orphans(const Graph& graph) {
  std::map<NodeId, std::vector<NodeId>> adjacency;
  for (const auto& [id, rel] : graph.relationships()) {
    adjacency[rel.src].push_back(rel.dst);
    adjacency[rel.dst].push_back(rel.src);
  }
  std::set<NodeId> seen{graph.owner()};
  std::deque<NodeId> frontier{graph.owner()};
  while (!frontier.empty()) {
    NodeId current = frontier.front();
    frontier.pop_front();
    for (NodeId next : adjacency[current]) {
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  std::set<NodeId> out;
  for (const auto& [id, node] : graph.nodes()) {
    if (!seen.count(id)) out.insert(id);
  }
  return out;
}

access::Decision resolve(const access::Role& role, access::Privilege privilege,
                         const access::Element& element, const Graph& graph) {
  std::vector<access::Effect> matching;
  for (const auto& rule : role.rules) {
    if (rule.privilege == privilege && rule_applies(rule, element, graph))
      matching.push_back(rule.effect);
  }
  if (std::count(matching.begin(), matching.end(), access::Effect::deny) > 0)
    return access::Decision::denied;
  if (std::count(matching.begin(), matching.end(), access::Effect::grant) > 0)
    return access::Decision::allowed;
  return access::Decision::denied;
}

access::View view(const Graph& graph, const access::Role& role) {
  using access::Decision;
  using access::Privilege;
  access::View v;
  for (const auto& [id, node] : graph.nodes()) {
    if (oracle::resolve(role, Privilege::read, id, graph) == Decision::allowed) v.nodes.insert(id);
  }
  for (NodeId id : v.nodes) {
    const Node& node = graph.nodes().at(id);
    for (const auto& [key, value] : node.properties) {
      for (const auto& rule : role.rules) {
        auto* prop = std::get_if<access::scope::NodeProperty>(&rule.scope);
        if (prop && rule.effect == access::Effect::deny && rule.privilege == Privilege::read &&
            prop->key == key && has_label(node, prop->label))
          v.masked_properties[id].insert(key);
      }
    }
  }
  for (const auto& [id, rel] : graph.relationships()) {
    bool ends = v.nodes.count(rel.src) && v.nodes.count(rel.dst);
    if (ends && oracle::resolve(role, Privilege::traverse, id, graph) == Decision::allowed)
      v.relationships.insert(id);
  }
  return v;
}

std::vector<query::Row> evaluate(const Graph& graph, const access::View& view,
                                 const query::QueryAst& ast) {
  const std::size_t hops = ast.edges.size();
  std::vector<RelId> rels(view.relationships.begin(), view.relationships.end());
  std::vector<std::pair<std::vector<std::uint64_t>, query::Row>> found;

  auto consider = [&](const Binding& b) {
    for (std::size_t i = 0; i <= hops; ++i) {
      if (!view.node_visible(b.nodes[i])) return;
      if (!node_ok(graph.nodes().at(b.nodes[i]), ast.nodes[i], view)) return;
    }
    for (std::size_t i = 0; i < hops; ++i) {
      const Relationship& rel = graph.relationships().at(b.rels[i]);
      if (!edge_ok(rel, ast.edges[i])) return;
      if (ast.at && !valid_at(rel.validity, *ast.at)) return;
    }
    if (!variables_agree(ast, b)) return;
    std::vector<std::uint64_t> key;
    for (std::size_t i = 0; i <= hops; ++i) {
      key.push_back(b.nodes[i].value);
      if (i < hops) key.push_back(b.rels[i].value);
    }
    query::Row row;
    for (const auto& item : ast.items) row.cells.push_back(project(graph, view, ast, b, item));
    found.emplace_back(std::move(key), std::move(row));
  };

  if (hops == 0) {
    for (NodeId id : view.nodes) consider(Binding{{id}, {}});
  } else {
    // Odometer over rels^hops.
    std::vector<std::size_t> digit(hops, 0);
    while (!rels.empty()) {
      Binding b;
      b.rels.resize(hops);
      b.nodes.resize(hops + 1);
      bool chain = true;
      for (std::size_t i = 0; i < hops && chain; ++i) {
        const Relationship& rel = graph.relationships().at(rels[digit[i]]);
        b.rels[i] = rel.id;
        bool forward = ast.edges[i].direction == query::EdgeDirection::forward;
        NodeId left = forward ? rel.src : rel.dst;
        NodeId right = forward ? rel.dst : rel.src;
        if (i > 0 && b.nodes[i] != left) chain = false;
        b.nodes[i] = left;
        b.nodes[i + 1] = right;
      }
      if (chain) consider(b);
      std::size_t pos = 0;
      while (pos < hops && ++digit[pos] == rels.size()) digit[pos++] = 0;
      if (pos == hops) break;
    }
  }

  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<query::Row> rows;
  for (auto& [key, row] : found) {
    bool duplicate = false;
    for (const auto& kept : rows) duplicate = duplicate || kept == row;
    if (!duplicate) rows.push_back(row);
  }
  return rows;
}

std::size_t rdf_triple_count(const Graph& graph, const access::View& view) {
  std::size_t count = 0;
  for (NodeId id : view.nodes) {
    const Node& node = graph.nodes().at(id);
    count += node.labels.size() + node.external_links.size();
    for (const auto& [key, value] : node.properties)
      if (view.property_visible(id, key)) ++count;
  }
  for (RelId id : view.relationships) {
    const Relationship& rel = graph.relationships().at(id);
    count += 3 + (rel.validity.start ? 1 : 0) + (rel.validity.end ? 1 : 0) + rel.properties.size();
  }
  return count;
}

}  // namespace prkg::oracle
