#include "prkg/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>

#include "prkg/error.hpp"

namespace prkg {

namespace {

constexpr std::string_view kOwnerLabel = "Researcher";

template <typename Id>
std::optional<Id> parse_prefixed(std::string_view text, char prefix) {
  if (!text.empty() && text.front() == prefix) text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) return std::nullopt;
  return Id{value};
}

void require(const MutationGuard* guard, MutationKind kind, const WriteTarget& target) {
  if (guard && !guard->permits(kind, target)) throw Error(Errc::denied, "denied: write");
}

bool is_ascii_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

void apply_updates(PropertyMap& properties, const PropertyUpdates& updates) {
  for (const auto& [key, value] : updates) {
    if (value) {
      properties[key] = *value;
    } else {
      properties.erase(key);
    }
  }
}

void check_updates(const PropertyUpdates& updates) {
  for (const auto& [key, value] : updates) {
    if (value) {
      check_value(key, *value);
    } else if (key.empty()) {
      throw Error(Errc::invalid_argument, "empty property key");
    }
  }
}

std::set<std::string> update_keys(const PropertyUpdates& updates) {
  std::set<std::string> keys;
  for (const auto& entry : updates) keys.insert(entry.first);
  return keys;
}

}  // namespace

std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }
std::string to_string(RelId id) { return "r" + std::to_string(id.value); }

std::optional<NodeId> parse_node_id(std::string_view text) {
  return parse_prefixed<NodeId>(text, 'n');
}

std::optional<RelId> parse_rel_id(std::string_view text) {
  return parse_prefixed<RelId>(text, 'r');
}

std::string_view to_string(LinkSource source) {
  switch (source) {
    case LinkSource::wikidata:
      return "wikidata";
    case LinkSource::orkg:
      return "orkg";
    case LinkSource::twitter:
      return "twitter";
    case LinkSource::other:
      return "other";
  }
  return "other";
}

std::optional<LinkSource> parse_link_source(std::string_view text) {
  if (text == "wikidata") return LinkSource::wikidata;
  if (text == "orkg") return LinkSource::orkg;
  if (text == "twitter") return LinkSource::twitter;
  if (text == "other") return LinkSource::other;
  return std::nullopt;
}

bool is_absolute_uri(std::string_view uri) {
  auto colon = uri.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == uri.size()) return false;
  if (!std::isalpha(static_cast<unsigned char>(uri[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = uri[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  for (char c : uri.substr(colon + 1)) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7f) return false;
    if (std::string_view("<>\"{}|^`\\").find(c) != std::string_view::npos) return false;
  }
  return true;
}

bool is_valid_rel_type(std::string_view name) {
  return !name.empty() && std::none_of(name.begin(), name.end(), is_ascii_space);
}

const PropertyValue* Node::property(const std::string& key) const {
  auto it = properties.find(key);
  return it == properties.end() ? nullptr : &it->second;
}

const PropertyValue* Relationship::property(const std::string& key) const {
  auto it = properties.find(key);
  return it == properties.end() ? nullptr : &it->second;
}

NodeTarget node_target(const Node& node) { return {node.id, node.labels, node.properties, {}}; }

RelTarget rel_target(const Relationship& rel) { return {rel.id, rel.rel_type}; }

Graph Graph::create(std::string_view owner_name) {
  if (owner_name.empty()) throw Error(Errc::invalid_argument, "owner name must not be empty");
  Graph graph;
  NodeId id{graph.fresh_id()};
  graph.nodes_.emplace(id, Node{id, {std::string(kOwnerLabel)}, {{"name", std::string(owner_name)}}, {}});
  graph.owner_ = id;
  return graph;
}

Graph Graph::restore(NodeId owner, std::vector<Node> nodes,
                     std::vector<Relationship> relationships, std::uint64_t next_id) {
  Graph graph;
  graph.owner_ = owner;
  graph.next_id_ = next_id;
  std::set<std::uint64_t> used;
  auto claim = [&](std::uint64_t value, const std::string& what) {
    if (value == 0 || value >= next_id)
      throw Error(Errc::integrity, what + ": id outside the allocated range");
    if (!used.insert(value).second) throw Error(Errc::integrity, what + ": duplicate id");
  };
  for (auto& node : nodes) {
    const std::string what = "node " + to_string(node.id);
    claim(node.id.value, what);
    if (node.labels.empty()) throw Error(Errc::integrity, what + ": no labels");
    try {
      check_properties(node.properties);
    } catch (const Error& e) {
      throw Error(Errc::integrity, what + ": " + e.what());
    }
    for (const auto& link : node.external_links) {
      if (!is_absolute_uri(link.uri))
        throw Error(Errc::integrity, what + ": malformed link uri '" + link.uri + "'");
    }
    graph.nodes_.emplace(node.id, std::move(node));
  }
  auto owner_it = graph.nodes_.find(owner);
  if (owner_it == graph.nodes_.end() || !owner_it->second.has_label(std::string(kOwnerLabel))) {
    throw Error(Errc::integrity, "owner " + to_string(owner) + " missing or not a Researcher");
  }
  for (auto& rel : relationships) {
    const std::string what = "relationship " + to_string(rel.id);
    claim(rel.id.value, what);
    if (!graph.nodes_.count(rel.src) || !graph.nodes_.count(rel.dst))
      throw Error(Errc::integrity, what + ": dangling endpoint");
    if (!is_valid_rel_type(rel.rel_type)) throw Error(Errc::integrity, what + ": bad type");
    if (!rel.validity.well_formed()) throw Error(Errc::integrity, what + ": start after end");
    try {
      check_properties(rel.properties);
    } catch (const Error& e) {
      throw Error(Errc::integrity, what + ": " + e.what());
    }
    graph.relationships_.emplace(rel.id, std::move(rel));
  }
  return graph;
}

const Node* Graph::find_node(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const Relationship* Graph::find_relationship(RelId id) const {
  auto it = relationships_.find(id);
  return it == relationships_.end() ? nullptr : &it->second;
}

const Node& Graph::node(NodeId id) const {
  if (const Node* n = find_node(id)) return *n;
  throw Error(Errc::not_found, "no node " + to_string(id));
}

const Relationship& Graph::relationship(RelId id) const {
  if (const Relationship* r = find_relationship(id)) return *r;
  throw Error(Errc::not_found, "no relationship " + to_string(id));
}

Node& Graph::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::not_found, "no node " + to_string(id));
  return it->second;
}

Relationship& Graph::mutable_relationship(RelId id) {
  auto it = relationships_.find(id);
  if (it == relationships_.end()) throw Error(Errc::not_found, "no relationship " + to_string(id));
  return it->second;
}

NodeId Graph::add_node(std::set<std::string> labels, PropertyMap properties,
                       const MutationGuard* guard) {
  if (labels.empty()) throw Error(Errc::invalid_argument, "a node needs at least one label");
  for (const auto& label : labels) {
    if (label.empty()) throw Error(Errc::invalid_argument, "empty label");
  }
  check_properties(properties);
  NodeTarget target{std::nullopt, labels, properties, {}};
  for (const auto& entry : properties) target.keys.insert(entry.first);
  require(guard, MutationKind::create, target);
  NodeId id{fresh_id()};
  nodes_.emplace(id, Node{id, std::move(labels), std::move(properties), {}});
  return id;
}

RelId Graph::add_relationship(NodeId src, NodeId dst, std::string rel_type,
                              TemporalInterval validity, PropertyMap properties,
                              const MutationGuard* guard) {
  if (!nodes_.count(src)) throw Error(Errc::not_found, "no node " + to_string(src));
  if (!nodes_.count(dst)) throw Error(Errc::not_found, "no node " + to_string(dst));
  if (!is_valid_rel_type(rel_type))
    throw Error(Errc::invalid_argument, "relationship type must be a non-empty token");
  if (!validity.well_formed())
    throw Error(Errc::invalid_argument, "interval start is after end " + to_string(validity));
  check_properties(properties);
  if (auto dup = find_duplicate(src, dst, rel_type, validity)) {
    throw Error(Errc::conflict, "duplicate of relationship " + to_string(*dup));
  }
  require(guard, MutationKind::create, RelTarget{std::nullopt, rel_type});
  RelId id{fresh_id()};
  relationships_.emplace(
      id, Relationship{id, src, dst, std::move(rel_type), validity, std::move(properties)});
  return id;
}

const Relationship& Graph::end_relationship(RelId id, PartialDate end, const MutationGuard* guard) {
  Relationship& rel = mutable_relationship(id);
  if (rel.validity.end) {
    throw Error(Errc::conflict, "relationship " + to_string(id) + " already ended at " +
                                    rel.validity.end->to_string());
  }
  TemporalInterval ended{rel.validity.start, end};
  if (!ended.well_formed())
    throw Error(Errc::invalid_argument, "end " + end.to_string() + " is before the start");
  if (auto dup = find_duplicate(rel.src, rel.dst, rel.rel_type, ended))
    throw Error(Errc::conflict, "ending would duplicate relationship " + to_string(*dup));
  require(guard, MutationKind::modify, rel_target(rel));
  rel.validity = ended;
  return rel;
}

const Node& Graph::set_properties(NodeId id, const PropertyUpdates& updates,
                                  const MutationGuard* guard) {
  Node& node = mutable_node(id);
  check_updates(updates);
  NodeTarget target = node_target(node);
  target.keys = update_keys(updates);
  require(guard, MutationKind::modify, target);
  apply_updates(node.properties, updates);
  return node;
}

const Relationship& Graph::set_properties(RelId id, const PropertyUpdates& updates,
                                          const MutationGuard* guard) {
  Relationship& rel = mutable_relationship(id);
  check_updates(updates);
  require(guard, MutationKind::modify, rel_target(rel));
  apply_updates(rel.properties, updates);
  return rel;
}

const Node& Graph::add_external_link(NodeId id, ExternalLink link, const MutationGuard* guard) {
  Node& node = mutable_node(id);
  if (!is_absolute_uri(link.uri))
    throw Error(Errc::invalid_argument, "not an absolute URI: '" + link.uri + "'");
  if (std::find(node.external_links.begin(), node.external_links.end(), link) !=
      node.external_links.end()) {
    throw Error(Errc::conflict, "link already present on " + to_string(id));
  }
  require(guard, MutationKind::modify, node_target(node));
  node.external_links.push_back(std::move(link));
  return node;
}

std::vector<RelId> Graph::incident(NodeId id) const {
  std::vector<RelId> out;
  for (const auto& [rid, rel] : relationships_) {
    if (rel.src == id || rel.dst == id) out.push_back(rid);
  }
  return out;
}

std::size_t Graph::delete_node(NodeId id, bool cascade, const MutationGuard* guard) {
  const Node& node = this->node(id);
  require(guard, MutationKind::remove, node_target(node));
  if (id == owner_) throw Error(Errc::forbidden, "the owner node cannot be deleted");
  auto edges = incident(id);
  if (!edges.empty() && !cascade) {
    throw Error(Errc::conflict, "node " + to_string(id) + " has " + std::to_string(edges.size()) +
                                    " incident relationship(s); use cascade");
  }
  for (RelId rid : edges) require(guard, MutationKind::remove, rel_target(relationships_.at(rid)));
  for (RelId rid : edges) relationships_.erase(rid);
  nodes_.erase(id);
  return edges.size() + 1;
}

std::size_t Graph::delete_relationship(RelId id, const MutationGuard* guard) {
  const Relationship& rel = relationship(id);
  require(guard, MutationKind::remove, rel_target(rel));
  relationships_.erase(id);
  return 1;
}

std::vector<Neighbor> Graph::neighbors(NodeId id, Direction direction,
                                       const std::optional<std::string>& rel_type,
                                       const std::optional<PartialDate>& at) const {
  node(id);
  std::vector<Neighbor> out;
  for (const auto& [rid, rel] : relationships_) {
    if (rel_type && rel.rel_type != *rel_type) continue;
    if (at && !is_valid_at(rel.validity, *at)) continue;
    const bool outgoing = rel.src == id && direction != Direction::in;
    const bool incoming = rel.dst == id && direction != Direction::out;
    if (outgoing) {
      out.push_back({&rel, &nodes_.at(rel.dst)});
    } else if (incoming) {
      out.push_back({&rel, &nodes_.at(rel.src)});
    }
  }
  return out;
}

std::optional<RelId> Graph::find_duplicate(NodeId src, NodeId dst, const std::string& rel_type,
                                           const TemporalInterval& validity) const {
  for (const auto& [rid, rel] : relationships_) {
    if (rel.src == src && rel.dst == dst && rel.rel_type == rel_type && rel.validity == validity)
      return rid;
  }
  return std::nullopt;
}

std::set<NodeId> Graph::reachable_from_owner() const {
  std::map<NodeId, std::vector<NodeId>> adjacency;
  for (const auto& [rid, rel] : relationships_) {
    adjacency[rel.src].push_back(rel.dst);
    adjacency[rel.dst].push_back(rel.src);
  }
  std::set<NodeId> seen{owner_};
  std::deque<NodeId> frontier{owner_};
  while (!frontier.empty()) {
    NodeId current = frontier.front();
    frontier.pop_front();
    for (NodeId next : adjacency[current]) {
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  return seen;
}

std::set<NodeId> Graph::orphans() const {
  auto reachable = reachable_from_owner();
  std::set<NodeId> out;
  for (const auto& [id, node] : nodes_) {
    if (!reachable.count(id)) out.insert(id);
  }
  return out;
}

}  // namespace prkg
