#include "prkg/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prkg/error.hpp"

namespace prkg::store {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Encoding -------------------------------------------------------------

ordered_json encode_value(const PropertyValue& value) {
  return std::visit(overloaded{
                        [](const std::string& s) { return ordered_json(s); },
                        [](std::int64_t i) { return ordered_json(i); },
                        [](double d) { return ordered_json(d); },
                        [](bool b) { return ordered_json(b); },
                        [](const PartialDate& d) {
                          ordered_json o = ordered_json::object();
                          o["date"] = d.to_string();
                          return o;
                        },
                        [](const TextList& list) {
                          ordered_json a = ordered_json::array();
                          for (const auto& item : list) a.push_back(item);
                          return a;
                        },
                    },
                    value);
}

ordered_json encode_properties(const PropertyMap& properties) {
  ordered_json o = ordered_json::object();
  for (const auto& [key, value] : properties) o[key] = encode_value(value);
  return o;
}

ordered_json encode_date(const std::optional<PartialDate>& date) {
  return date ? ordered_json(date->to_string()) : ordered_json(nullptr);
}

ordered_json encode_scope(const access::Scope& scope) {
  namespace s = access::scope;
  ordered_json o = ordered_json::object();
  std::visit(overloaded{
                 [&](const s::WholeGraph&) { o["kind"] = "graph"; },
                 [&](const s::NodeLabel& v) {
                   o["kind"] = "node-label";
                   o["label"] = v.label;
                 },
                 [&](const s::RelType& v) {
                   o["kind"] = "rel-type";
                   o["type"] = v.name;
                 },
                 [&](const s::NodeInstance& v) {
                   o["kind"] = "node";
                   o["id"] = to_string(v.id);
                 },
                 [&](const s::NodeProperty& v) {
                   o["kind"] = "prop";
                   o["label"] = v.label;
                   o["key"] = v.key;
                 },
                 [&](const s::PropertyPredicate& v) {
                   o["kind"] = "prop-pred";
                   o["label"] = v.label;
                   o["key"] = v.key;
                   o["values"] = ordered_json(std::vector<std::string>(v.values.begin(), v.values.end()));
                 },
             },
             scope);
  return o;
}

ordered_json encode_candidate(const ingest::CandidateTriple& c) {
  ordered_json o = ordered_json::object();
  o["head"] = c.head;
  o["head_label"] = c.head_label;
  o["rel"] = c.rel;
  o["tail"] = c.tail;
  o["tail_label"] = c.tail_label;
  o["confidence"] = c.confidence;
  o["source"] = std::string(ingest::to_string(c.source));
  o["prov"] = c.provenance;
  return o;
}

// Decoding -------------------------------------------------------------

[[noreturn]] void integrity(const std::string& where, const std::string& what) {
  throw Error(Errc::integrity, where + ": " + what);
}

const json& member(const json& object, const char* key, const std::string& where) {
  if (!object.is_object()) integrity(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) integrity(where, std::string("missing `") + key + "`");
  return *it;
}

std::string text_member(const json& object, const char* key, const std::string& where) {
  const json& value = member(object, key, where);
  if (!value.is_string()) integrity(where, std::string("`") + key + "` must be a string");
  return value.get<std::string>();
}

std::uint64_t count_member(const json& object, const char* key, const std::string& where) {
  const json& value = member(object, key, where);
  if (!value.is_number_unsigned()) integrity(where, std::string("`") + key + "` must be a count");
  return value.get<std::uint64_t>();
}

NodeId node_id(const std::string& text, const std::string& where) {
  auto id = parse_node_id(text);
  if (!id || text.front() != 'n') integrity(where, "bad node id '" + text + "'");
  return *id;
}

RelId rel_id(const std::string& text, const std::string& where) {
  auto id = parse_rel_id(text);
  if (!id || text.front() != 'r') integrity(where, "bad relationship id '" + text + "'");
  return *id;
}

PropertyValue decode_value(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>();
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) return value.get<double>();
  if (value.is_array()) {
    TextList list;
    for (const auto& item : value) {
      if (!item.is_string()) integrity(where, "list elements must be strings");
      list.push_back(item.get<std::string>());
    }
    return list;
  }
  if (value.is_object() && value.size() == 1 && value.contains("date") && value["date"].is_string()) {
    auto date = PartialDate::try_parse(value["date"].get<std::string>());
    if (!date) integrity(where, "bad date value");
    return *date;
  }
  integrity(where, "unsupported property value");
}

PropertyMap decode_properties(const json& object, const std::string& where) {
  if (!object.is_object()) integrity(where, "properties must be an object");
  PropertyMap properties;
  for (const auto& [key, value] : object.items()) {
    properties.emplace(key, decode_value(value, where + " property '" + key + "'"));
  }
  return properties;
}

std::optional<PartialDate> decode_date(const json& value, const std::string& where) {
  if (value.is_null()) return std::nullopt;
  if (!value.is_string()) integrity(where, "date must be a string or null");
  auto date = PartialDate::try_parse(value.get<std::string>());
  if (!date) integrity(where, "bad date '" + value.get<std::string>() + "'");
  return date;
}

access::Scope decode_scope(const json& o, const std::string& where) {
  namespace s = access::scope;
  std::string kind = text_member(o, "kind", where);
  if (kind == "graph") return s::WholeGraph{};
  if (kind == "node-label") return s::NodeLabel{text_member(o, "label", where)};
  if (kind == "rel-type") return s::RelType{text_member(o, "type", where)};
  if (kind == "node") return s::NodeInstance{node_id(text_member(o, "id", where), where)};
  if (kind == "prop") return s::NodeProperty{text_member(o, "label", where), text_member(o, "key", where)};
  if (kind == "prop-pred") {
    s::PropertyPredicate p{text_member(o, "label", where), text_member(o, "key", where), {}};
    const json& values = member(o, "values", where);
    if (!values.is_array()) integrity(where, "`values` must be an array");
    for (const auto& v : values) {
      if (!v.is_string()) integrity(where, "predicate values must be strings");
      p.values.insert(v.get<std::string>());
    }
    return p;
  }
  integrity(where, "unknown scope kind '" + kind + "'");
}

ingest::CandidateTriple decode_candidate(const json& o, const std::string& where) {
  ingest::CandidateTriple c;
  c.head = text_member(o, "head", where);
  c.head_label = text_member(o, "head_label", where);
  c.rel = text_member(o, "rel", where);
  c.tail = text_member(o, "tail", where);
  c.tail_label = text_member(o, "tail_label", where);
  const json& conf = member(o, "confidence", where);
  if (!conf.is_number()) integrity(where, "`confidence` must be a number");
  c.confidence = conf.get<double>();
  auto source = ingest::parse_candidate_source(text_member(o, "source", where));
  if (!source) integrity(where, "unknown candidate source");
  c.source = *source;
  c.provenance = text_member(o, "prov", where);
  return c;
}

// RDF ------------------------------------------------------------------

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

std::string iri_segment(std::string_view text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

std::string literal(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

std::string typed(std::string_view text, std::string_view type) {
  return literal(text) + "^^<" + std::string(kXsd) + std::string(type) + ">";
}

std::string date_literal(const PartialDate& date) {
  if (date.day()) return typed(date.to_string(), "date");
  if (date.month()) return typed(date.to_string(), "gYearMonth");
  return typed(date.to_string(), "gYear");
}

std::string value_literal(const PropertyValue& value) {
  return std::visit(overloaded{
                        [](const std::string& s) { return literal(s); },
                        [](std::int64_t i) { return typed(std::to_string(i), "integer"); },
                        [](double d) { return typed(render_decimal(d), "double"); },
                        [](bool b) { return typed(b ? "true" : "false", "boolean"); },
                        [](const PartialDate& d) { return date_literal(d); },
                        [&](const TextList&) { return literal(render_text(value)); },
                    },
                    value);
}

}  // namespace

State State::fresh(std::string_view owner_name) {
  return State{Graph::create(owner_name), access::RoleTable{}, ingest::Inbox{},
               ingest::Thresholds{}};
}

std::string serialize_snapshot(const State& state) {
  ordered_json root = ordered_json::object();
  root["format"] = std::string(kFormatTag);
  root["version"] = kFormatVersion;
  root["owner"] = to_string(state.graph.owner());
  root["next_id"] = state.graph.next_id();

  ordered_json thresholds = ordered_json::object();
  thresholds["accept"] = state.thresholds.accept;
  thresholds["reject"] = state.thresholds.reject;
  root["thresholds"] = thresholds;

  ordered_json nodes = ordered_json::array();
  for (const auto& [id, node] : state.graph.nodes()) {
    ordered_json o = ordered_json::object();
    o["id"] = to_string(id);
    o["labels"] = ordered_json(std::vector<std::string>(node.labels.begin(), node.labels.end()));
    o["properties"] = encode_properties(node.properties);
    ordered_json links = ordered_json::array();
    for (const auto& link : node.external_links) {
      ordered_json l = ordered_json::object();
      l["source"] = std::string(to_string(link.source));
      l["uri"] = link.uri;
      links.push_back(l);
    }
    o["links"] = links;
    nodes.push_back(o);
  }
  root["nodes"] = nodes;

  ordered_json rels = ordered_json::array();
  for (const auto& [id, rel] : state.graph.relationships()) {
    ordered_json o = ordered_json::object();
    o["id"] = to_string(id);
    o["src"] = to_string(rel.src);
    o["dst"] = to_string(rel.dst);
    o["type"] = rel.rel_type;
    o["start"] = encode_date(rel.validity.start);
    o["end"] = encode_date(rel.validity.end);
    o["properties"] = encode_properties(rel.properties);
    rels.push_back(o);
  }
  root["relationships"] = rels;

  ordered_json roles = ordered_json::array();
  for (const auto& [name, role] : state.roles.roles()) {
    if (name == access::kAdminRole) continue;
    ordered_json o = ordered_json::object();
    o["name"] = name;
    ordered_json rules = ordered_json::array();
    for (const auto& rule : role.rules) {
      ordered_json r = ordered_json::object();
      r["effect"] = rule.effect == access::Effect::grant ? "grant" : "deny";
      r["privilege"] = std::string(access::to_string(rule.privilege));
      r["scope"] = encode_scope(rule.scope);
      rules.push_back(r);
    }
    o["rules"] = rules;
    roles.push_back(o);
  }
  root["roles"] = roles;

  ordered_json inbox = ordered_json::object();
  inbox["next_id"] = state.inbox.next_id();
  ordered_json entries = ordered_json::array();
  for (const auto& [id, entry] : state.inbox.entries()) {
    ordered_json o = ordered_json::object();
    o["id"] = id;
    o["state"] = std::string(ingest::to_string(entry.state));
    o["decided_at"] = encode_date(entry.decided_at);
    o["candidate"] = encode_candidate(entry.candidate);
    entries.push_back(o);
  }
  inbox["entries"] = entries;
  root["inbox"] = inbox;

  return root.dump(2) + "\n";
}

State parse_snapshot(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, std::string("snapshot is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("format") || root["format"] != kFormatTag) {
    throw Error(Errc::unsupported, "not a prkg snapshot (missing format tag)");
  }
  const json& version = member(root, "version", "snapshot");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kFormatVersion) {
    throw Error(Errc::unsupported, "unsupported snapshot version " + version.dump());
  }

  const std::string top = "snapshot";
  NodeId owner = node_id(text_member(root, "owner", top), top);
  std::uint64_t next_id = count_member(root, "next_id", top);

  State state = State::fresh("placeholder");
  const json& thresholds = member(root, "thresholds", top);
  const json& accept = member(thresholds, "accept", "thresholds");
  const json& reject = member(thresholds, "reject", "thresholds");
  if (!accept.is_number() || !reject.is_number()) integrity("thresholds", "must be numbers");
  state.thresholds = {accept.get<double>(), reject.get<double>()};
  try {
    state.thresholds.check();
  } catch (const Error& e) {
    integrity("thresholds", e.what());
  }

  std::vector<Node> nodes;
  const json& node_list = member(root, "nodes", top);
  if (!node_list.is_array()) integrity(top, "`nodes` must be an array");
  for (const auto& o : node_list) {
    std::string where = "node " + (o.is_object() && o.contains("id") ? o["id"].dump() : "?");
    Node node;
    node.id = node_id(text_member(o, "id", where), where);
    const json& labels = member(o, "labels", where);
    if (!labels.is_array()) integrity(where, "`labels` must be an array");
    for (const auto& label : labels) {
      if (!label.is_string()) integrity(where, "labels must be strings");
      node.labels.insert(label.get<std::string>());
    }
    node.properties = decode_properties(member(o, "properties", where), where);
    const json& links = member(o, "links", where);
    if (!links.is_array()) integrity(where, "`links` must be an array");
    for (const auto& l : links) {
      auto source = parse_link_source(text_member(l, "source", where));
      if (!source) integrity(where, "unknown link source");
      node.external_links.push_back({*source, text_member(l, "uri", where)});
    }
    nodes.push_back(std::move(node));
  }

  std::vector<Relationship> rels;
  const json& rel_list = member(root, "relationships", top);
  if (!rel_list.is_array()) integrity(top, "`relationships` must be an array");
  for (const auto& o : rel_list) {
    std::string where =
        "relationship " + (o.is_object() && o.contains("id") ? o["id"].dump() : "?");
    Relationship rel;
    rel.id = rel_id(text_member(o, "id", where), where);
    rel.src = node_id(text_member(o, "src", where), where);
    rel.dst = node_id(text_member(o, "dst", where), where);
    rel.rel_type = text_member(o, "type", where);
    rel.validity.start = decode_date(member(o, "start", where), where);
    rel.validity.end = decode_date(member(o, "end", where), where);
    rel.properties = decode_properties(member(o, "properties", where), where);
    rels.push_back(std::move(rel));
  }
  state.graph = Graph::restore(owner, std::move(nodes), std::move(rels), next_id);

  const json& role_list = member(root, "roles", top);
  if (!role_list.is_array()) integrity(top, "`roles` must be an array");
  for (const auto& o : role_list) {
    access::Role role;
    role.name = text_member(o, "name", "role");
    std::string where = "role '" + role.name + "'";
    const json& rules = member(o, "rules", where);
    if (!rules.is_array()) integrity(where, "`rules` must be an array");
    for (const auto& r : rules) {
      access::AccessRule rule;
      std::string effect = text_member(r, "effect", where);
      if (effect != "grant" && effect != "deny") integrity(where, "bad effect '" + effect + "'");
      rule.effect = effect == "grant" ? access::Effect::grant : access::Effect::deny;
      auto privilege = access::parse_privilege(text_member(r, "privilege", where));
      if (!privilege) integrity(where, "unknown privilege");
      rule.privilege = *privilege;
      rule.scope = decode_scope(member(r, "scope", where), where);
      role.rules.push_back(std::move(rule));
    }
    state.roles.insert(std::move(role));
  }

  const json& inbox = member(root, "inbox", top);
  std::vector<ingest::InboxEntry> entries;
  const json& entry_list = member(inbox, "entries", "inbox");
  if (!entry_list.is_array()) integrity("inbox", "`entries` must be an array");
  for (const auto& o : entry_list) {
    ingest::InboxEntry entry;
    entry.id = count_member(o, "id", "inbox entry");
    std::string where = "inbox entry " + std::to_string(entry.id);
    auto entry_state = ingest::parse_entry_state(text_member(o, "state", where));
    if (!entry_state) integrity(where, "unknown state");
    entry.state = *entry_state;
    entry.decided_at = decode_date(member(o, "decided_at", where), where);
    entry.candidate = decode_candidate(member(o, "candidate", where), where);
    entries.push_back(std::move(entry));
  }
  state.inbox = ingest::Inbox::restore(std::move(entries), count_member(inbox, "next_id", "inbox"));
  return state;
}

void atomic_write(const std::filesystem::path& path, std::string_view content,
                  const std::function<void()>& before_commit) {
  std::filesystem::path temp = path;
  temp += ".tmp-" + std::to_string(::getpid());
  int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(Errc::io, "cannot create " + temp.string() + ": " + std::strerror(errno));
  auto fail = [&](const std::string& what) {
    int saved = errno;
    ::close(fd);
    std::filesystem::remove(temp);
    throw Error(Errc::io, what + " " + temp.string() + ": " + std::strerror(saved));
  };
  std::size_t written = 0;
  while (written < content.size()) {
    ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("cannot write");
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) fail("cannot sync");
  ::close(fd);
  try {
    if (before_commit) before_commit();
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(temp, ec);
    throw;
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(Errc::io, "cannot replace " + path.string() + ": " + ec.message());
  }
}

std::size_t save_snapshot(const State& state, const std::filesystem::path& path) {
  std::string text = serialize_snapshot(state);
  atomic_write(path, text);
  return text.size();
}

State load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open snapshot " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_snapshot(buffer.str());
}

std::vector<std::string> rdf_lines(const Graph& graph, const access::View& view,
                                   std::string_view base_view) {
  const std::string base(base_view);
  auto iri = [&](const std::string& kind, std::string_view local) {
    return "<" + base + kind + "/" + iri_segment(local) + ">";
  };
  auto meta = [&](std::string_view name) { return iri("meta", name); };

  std::vector<std::string> lines;
  auto emit = [&](const std::string& s, const std::string& p, const std::string& o) {
    lines.push_back(s + " " + p + " " + o + " .");
  };

  for (const auto& [id, node] : graph.nodes()) {
    if (!view.node_visible(id)) continue;
    const std::string subject = iri("node", to_string(id));
    for (const auto& label : node.labels) emit(subject, meta("label"), iri("label", label));
    for (const auto& [key, value] : node.properties) {
      if (!view.property_visible(id, key)) continue;
      emit(subject, iri("prop", key), value_literal(value));
    }
    for (const auto& link : node.external_links) emit(subject, meta("sameAs"), "<" + link.uri + ">");
  }
  for (const auto& [id, rel] : graph.relationships()) {
    if (!view.relationship_visible(id)) continue;
    const std::string subject = iri("rel", to_string(id));
    emit(subject, meta("subject"), iri("node", to_string(rel.src)));
    emit(subject, meta("predicate"), iri("reltype", rel.rel_type));
    emit(subject, meta("object"), iri("node", to_string(rel.dst)));
    if (rel.validity.start) emit(subject, meta("start"), date_literal(*rel.validity.start));
    if (rel.validity.end) emit(subject, meta("end"), date_literal(*rel.validity.end));
    for (const auto& [key, value] : rel.properties) {
      emit(subject, iri("prop", key), value_literal(value));
    }
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::size_t export_rdf(const Graph& graph, const access::RoleTable& roles,
                       const std::optional<std::string>& role, const std::filesystem::path& path,
                       std::string_view base) {
  access::View view = role ? access::view_as(graph, roles.role(*role)) : access::full_view(graph);
  auto lines = rdf_lines(graph, view, base);
  std::string content;
  for (const auto& line : lines) content += line + "\n";
  atomic_write(path, content);
  return lines.size();
}

}  // namespace prkg::store
