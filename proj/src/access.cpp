#include "prkg/access.hpp"

#include "prkg/error.hpp"

namespace prkg::access {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool predicate_holds(const scope::PropertyPredicate& p, const std::set<std::string>& labels,
                     const PropertyMap& properties) {
  if (!labels.count(p.label)) return false;
  auto it = properties.find(p.key);
  return it != properties.end() && p.values.count(render_text(it->second)) != 0;
}

bool node_scope_matches(const Scope& scope, const Node& node) {
  return std::visit(overloaded{
                        [](const scope::WholeGraph&) { return true; },
                        [&](const scope::NodeLabel& s) { return node.has_label(s.label); },
                        [](const scope::RelType&) { return false; },
                        [&](const scope::NodeInstance& s) { return s.id == node.id; },
                        [](const scope::NodeProperty&) { return false; },
                        [&](const scope::PropertyPredicate& s) {
                          return predicate_holds(s, node.labels, node.properties);
                        },
                    },
                    scope);
}

bool target_matches(const Scope& scope, const WriteTarget& target) {
  if (const auto* rel = std::get_if<RelTarget>(&target)) {
    return std::visit(overloaded{
                          [](const scope::WholeGraph&) { return true; },
                          [&](const scope::RelType& s) { return s.name == rel->rel_type; },
                          [](const auto&) { return false; },
                      },
                      scope);
  }
  const auto& node = std::get<NodeTarget>(target);
  return std::visit(
      overloaded{
          [](const scope::WholeGraph&) { return true; },
          [&](const scope::NodeLabel& s) { return node.labels.count(s.label) != 0; },
          [](const scope::RelType&) { return false; },
          [&](const scope::NodeInstance& s) { return node.id && *node.id == s.id; },
          [&](const scope::NodeProperty& s) {
            return node.labels.count(s.label) != 0 && node.keys.count(s.key) != 0;
          },
          [&](const scope::PropertyPredicate& s) {
            return predicate_holds(s, node.labels, node.properties);
          },
      },
      scope);
}

}  // namespace

std::string_view to_string(Privilege privilege) {
  switch (privilege) {
    case Privilege::read:
      return "read";
    case Privilege::traverse:
      return "traverse";
    case Privilege::write:
      return "write";
    case Privilege::append:
      return "append";
    case Privilege::control:
      return "control";
  }
  return "read";
}

std::optional<Privilege> parse_privilege(std::string_view text) {
  for (Privilege p : kAllPrivileges) {
    if (to_string(p) == text) return p;
  }
  // Neo4j spells read access MATCH.
  if (text == "match") return Privilege::read;
  return std::nullopt;
}

std::string to_string(const Scope& s) {
  return std::visit(overloaded{
                        [](const scope::WholeGraph&) -> std::string { return "graph"; },
                        [](const scope::NodeLabel& v) { return "node-label " + v.label; },
                        [](const scope::RelType& v) { return "rel-type " + v.name; },
                        [](const scope::NodeInstance& v) { return "node " + to_string(v.id); },
                        [](const scope::NodeProperty& v) { return "prop " + v.label + " " + v.key; },
                        [](const scope::PropertyPredicate& v) {
                          std::string out = "prop-pred " + v.label + " " + v.key + " ";
                          bool first = true;
                          for (const auto& value : v.values) {
                            if (!first) out += ",";
                            out += value;
                            first = false;
                          }
                          return out;
                        },
                    },
                    s);
}

void AccessRule::check() const {
  std::visit(overloaded{
                 [](const scope::WholeGraph&) {},
                 [](const scope::NodeLabel& v) {
                   if (v.label.empty()) throw Error(Errc::invalid_argument, "empty label in scope");
                 },
                 [](const scope::RelType& v) {
                   if (v.name.empty()) throw Error(Errc::invalid_argument, "empty type in scope");
                 },
                 [](const scope::NodeInstance&) {},
                 [](const scope::NodeProperty& v) {
                   if (v.label.empty() || v.key.empty())
                     throw Error(Errc::invalid_argument, "property scope needs label and key");
                 },
                 [](const scope::PropertyPredicate& v) {
                   if (v.label.empty() || v.key.empty())
                     throw Error(Errc::invalid_argument, "predicate scope needs label and key");
                   if (v.values.empty())
                     throw Error(Errc::invalid_argument, "predicate scope needs at least one value");
                 },
             },
             scope);
}

std::string to_string(const AccessRule& rule) {
  return std::string(rule.effect == Effect::grant ? "grant " : "deny ") +
         std::string(to_string(rule.privilege)) + " " + to_string(rule.scope);
}

Role admin_role() {
  Role admin{std::string(kAdminRole), {}};
  for (Privilege p : kAllPrivileges) admin.rules.push_back({Effect::grant, p, scope::WholeGraph{}});
  return admin;
}

RoleTable::RoleTable() { roles_.emplace(std::string(kAdminRole), admin_role()); }

const Role* RoleTable::find(const std::string& name) const {
  auto it = roles_.find(name);
  return it == roles_.end() ? nullptr : &it->second;
}

const Role& RoleTable::role(const std::string& name) const {
  if (const Role* r = find(name)) return *r;
  throw Error(Errc::not_found, "no role '" + name + "'");
}

void RoleTable::require_control(const Role* actor) const {
  if (actor && !has_control(*actor)) throw Error(Errc::denied, "denied: control");
}

const Role& RoleTable::create_role(const std::string& name, const Role* actor) {
  if (name.empty()) throw Error(Errc::invalid_argument, "role name must not be empty");
  if (roles_.count(name)) throw Error(Errc::conflict, "role '" + name + "' already exists");
  require_control(actor);
  return roles_.emplace(name, Role{name, {}}).first->second;
}

const Role& RoleTable::copy_role(const std::string& new_name, const std::string& from_name,
                                 const Role* actor) {
  if (new_name.empty()) throw Error(Errc::invalid_argument, "role name must not be empty");
  const Role& source = role(from_name);
  if (roles_.count(new_name)) throw Error(Errc::conflict, "role '" + new_name + "' already exists");
  require_control(actor);
  Role copy{new_name, source.rules};
  return roles_.emplace(new_name, std::move(copy)).first->second;
}

const Role& RoleTable::add_rule(const std::string& name, AccessRule rule, const Role* actor) {
  auto it = roles_.find(name);
  if (it == roles_.end()) throw Error(Errc::not_found, "no role '" + name + "'");
  if (name == kAdminRole) throw Error(Errc::forbidden, "the built-in admin role cannot be edited");
  rule.check();
  require_control(actor);
  it->second.rules.push_back(std::move(rule));
  return it->second;
}

void RoleTable::insert(Role role) {
  if (role.name.empty()) throw Error(Errc::integrity, "role with empty name");
  for (const auto& rule : role.rules) {
    try {
      rule.check();
    } catch (const Error& e) {
      throw Error(Errc::integrity, "role '" + role.name + "': " + e.what());
    }
  }
  if (role.name == kAdminRole) {
    if (role != admin_role()) throw Error(Errc::integrity, "admin role was altered");
    return;
  }
  if (!roles_.emplace(role.name, role).second)
    throw Error(Errc::integrity, "duplicate role '" + role.name + "'");
}

bool scope_matches(const Scope& s, const Element& element, const Graph& graph) {
  if (const auto* rid = std::get_if<RelId>(&element)) {
    const Relationship& rel = graph.relationship(*rid);
    return std::visit(overloaded{
                          [](const scope::WholeGraph&) { return true; },
                          [&](const scope::RelType& v) { return v.name == rel.rel_type; },
                          [](const auto&) { return false; },
                      },
                      s);
  }
  if (const auto* nid = std::get_if<NodeId>(&element)) {
    return node_scope_matches(s, graph.node(*nid));
  }
  const auto& ref = std::get<PropertyRef>(element);
  const Node& node = graph.node(ref.node);
  if (const auto* p = std::get_if<scope::NodeProperty>(&s)) {
    return node.has_label(p->label) && p->key == ref.key;
  }
  return node_scope_matches(s, node);
}

Decision resolve(const Role& role, Privilege privilege, const Element& element,
                 const Graph& graph) {
  bool granted = false;
  for (const auto& rule : role.rules) {
    if (rule.privilege != privilege || !scope_matches(rule.scope, element, graph)) continue;
    if (rule.effect == Effect::deny) return Decision::denied;
    granted = true;
  }
  return granted ? Decision::allowed : Decision::denied;
}

bool View::property_visible(NodeId id, const std::string& key) const {
  if (!node_visible(id)) return false;
  auto it = masked_properties.find(id);
  return it == masked_properties.end() || !it->second.count(key);
}

View view_as(const Graph& graph, const Role& role) {
  View view;
  for (const auto& [id, node] : graph.nodes()) {
    if (resolve(role, Privilege::read, id, graph) != Decision::allowed) continue;
    view.nodes.insert(id);
    std::set<std::string> masked;
    for (const auto& rule : role.rules) {
      const auto* prop = std::get_if<scope::NodeProperty>(&rule.scope);
      if (rule.effect == Effect::deny && rule.privilege == Privilege::read && prop &&
          node.has_label(prop->label) && node.properties.count(prop->key)) {
        masked.insert(prop->key);
      }
    }
    if (!masked.empty()) view.masked_properties.emplace(id, std::move(masked));
  }
  for (const auto& [id, rel] : graph.relationships()) {
    if (!view.nodes.count(rel.src) || !view.nodes.count(rel.dst)) continue;
    if (resolve(role, Privilege::traverse, id, graph) == Decision::allowed)
      view.relationships.insert(id);
  }
  return view;
}

View full_view(const Graph& graph) {
  View view;
  for (const auto& entry : graph.nodes()) view.nodes.insert(entry.first);
  for (const auto& entry : graph.relationships()) view.relationships.insert(entry.first);
  return view;
}

Decision check_write(const Graph&, const Role& role, MutationKind kind,
                     const WriteTarget& target) {
  bool write_granted = false;
  bool append_granted = false;
  for (const auto& rule : role.rules) {
    if (rule.privilege != Privilege::write && rule.privilege != Privilege::append) continue;
    if (!target_matches(rule.scope, target)) continue;
    if (rule.effect == Effect::deny) {
      if (rule.privilege == Privilege::write) return Decision::denied;
      if (kind == MutationKind::create) return Decision::denied;
      continue;
    }
    (rule.privilege == Privilege::write ? write_granted : append_granted) = true;
  }
  if (write_granted) return Decision::allowed;
  if (append_granted && kind == MutationKind::create) return Decision::allowed;
  return Decision::denied;
}

bool has_control(const Role& role) {
  bool granted = false;
  for (const auto& rule : role.rules) {
    bool whole = std::holds_alternative<scope::WholeGraph>(rule.scope);
    // A role that may not write the graph may not rewrite its own rules either.
    if (rule.effect == Effect::deny && whole && rule.privilege == Privilege::write) return false;
    if (rule.privilege != Privilege::control) continue;
    if (rule.effect == Effect::deny) return false;
    if (whole) granted = true;
  }
  return granted;
}

bool RoleGuard::permits(MutationKind kind, const WriteTarget& target) const {
  return check_write(graph_, role_, kind, target) == Decision::allowed;
}

Scope parse_scope(const std::vector<std::string>& words) {
  auto usage = [](const std::string& why) {
    return Error(Errc::invalid_argument,
                 "bad scope (" + why +
                     "); expected graph | node-label L | rel-type T | node ID | prop L KEY | "
                     "prop-pred L KEY V1,V2");
  };
  if (words.empty()) throw usage("missing");
  const std::string& kind = words[0];
  auto arity = [&](std::size_t n) {
    if (words.size() != n + 1) throw usage(kind + " takes " + std::to_string(n) + " argument(s)");
  };
  if (kind == "graph") {
    arity(0);
    return scope::WholeGraph{};
  }
  if (kind == "node-label") {
    arity(1);
    return scope::NodeLabel{words[1]};
  }
  if (kind == "rel-type") {
    arity(1);
    return scope::RelType{words[1]};
  }
  if (kind == "node") {
    arity(1);
    auto id = parse_node_id(words[1]);
    if (!id) throw usage("'" + words[1] + "' is not a node id");
    return scope::NodeInstance{*id};
  }
  if (kind == "prop") {
    arity(2);
    return scope::NodeProperty{words[1], words[2]};
  }
  if (kind == "prop-pred") {
    arity(3);
    scope::PropertyPredicate predicate{words[1], words[2], {}};
    std::size_t pos = 0;
    const std::string& list = words[3];
    while (pos <= list.size()) {
      auto comma = list.find(',', pos);
      std::string value = list.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (!value.empty()) predicate.values.insert(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (predicate.values.empty()) throw usage("prop-pred needs at least one value");
    return predicate;
  }
  throw usage("unknown kind '" + kind + "'");
}

}  // namespace prkg::access
