#include "prkg/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prkg/access.hpp"
#include "prkg/error.hpp"
#include "prkg/query.hpp"
#include "prkg/store.hpp"

namespace prkg::cli {

namespace {

using nlohmann::json;

std::string env_value(const Environment& env, const std::string& key) {
  auto it = env.find(key);
  return it == env.end() ? std::string() : it->second;
}

std::set<std::string> string_set(const json& value, const std::string& what) {
  if (!value.is_array()) throw Error(Errc::parse, what + " must be an array of labels");
  std::set<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) throw Error(Errc::parse, what + " must be an array of labels");
    out.insert(item.get<std::string>());
  }
  return out;
}

void apply_config_json(Config& config, const json& doc, const std::string& origin) {
  if (!doc.is_object()) throw Error(Errc::parse, origin + ": top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    auto where = origin + ": " + key;
    if (key == "data_path") {
      if (!value.is_string() || value.get<std::string>().empty())
        throw Error(Errc::parse, where + " must be a non-empty string");
      config.data_path = value.get<std::string>();
    } else if (key == "default_role") {
      if (!value.is_string() || value.get<std::string>().empty())
        throw Error(Errc::parse, where + " must be a non-empty string");
      config.default_role = value.get<std::string>();
    } else if (key == "rdf_base") {
      if (!value.is_string() || !is_absolute_uri(value.get<std::string>()))
        throw Error(Errc::parse, where + " must be an absolute URI");
      config.rdf_base = value.get<std::string>();
    } else if (key == "thresholds") {
      if (!value.is_object()) throw Error(Errc::parse, where + " must be an object");
      ingest::Thresholds t;
      for (const auto& [name, number] : value.items()) {
        if (!number.is_number())
          throw Error(Errc::parse, where + "." + name + " must be a number");
        if (name == "accept") {
          t.accept = number.get<double>();
        } else if (name == "reject") {
          t.reject = number.get<double>();
        } else {
          throw Error(Errc::parse, where + ": unknown key '" + name + "'");
        }
      }
      try {
        t.check();
      } catch (const Error& e) {
        throw Error(Errc::parse, where + ": " + e.what());
      }
      config.thresholds = t;
      config.thresholds_configured = true;
    } else if (key == "extra_relations") {
      if (!value.is_array()) throw Error(Errc::parse, where + " must be an array");
      for (const auto& item : value) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string())
          throw Error(Errc::parse, where + ": each relation needs a name");
        schema::RelationSpec spec;
        spec.name = item["name"].get<std::string>();
        if (!is_valid_rel_type(spec.name))
          throw Error(Errc::parse, where + ": bad relation name '" + spec.name + "'");
        if (item.contains("src")) spec.expected_src_labels = string_set(item["src"], where);
        if (item.contains("dst")) spec.expected_dst_labels = string_set(item["dst"], where);
        if (item.contains("temporal")) {
          if (!item["temporal"].is_boolean())
            throw Error(Errc::parse, where + ": temporal must be a boolean");
          spec.temporal_expected = item["temporal"].get<bool>();
        }
        config.extra_relations.push_back(std::move(spec));
      }
    } else {
      throw Error(Errc::parse, origin + ": unknown key '" + key + "'");
    }
  }
}

/// Advisory lock on `<data>.lock`, released on destruction.
class FileLock {
 public:
  FileLock(const std::filesystem::path& data, bool exclusive) {
    auto path = data;
    path += ".lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(Errc::io, "cannot open lock file " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw Error(Errc::io, "cannot lock " + path.string());
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

NodeId node_arg(const std::string& text) {
  auto id = parse_node_id(text);
  if (!id) throw Error(Errc::invalid_argument, "'" + text + "' is not a node id");
  return *id;
}

RelId rel_arg(const std::string& text) {
  auto id = parse_rel_id(text);
  if (!id) throw Error(Errc::invalid_argument, "'" + text + "' is not a relationship id");
  return *id;
}

std::uint64_t entry_arg(const std::string& text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value == 0)
    throw Error(Errc::invalid_argument, "'" + text + "' is not an inbox entry id");
  return value;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(Errc::invalid_argument, "expected KEY=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

PropertyMap property_args(const std::vector<std::string>& props) {
  PropertyMap out;
  for (const auto& p : props) {
    auto [key, value] = split_assignment(p);
    out[key] = parse_cli_value(value);
  }
  check_properties(out);
  return out;
}

std::optional<PartialDate> date_arg(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return PartialDate::parse(text);
}

json entry_json(const ingest::InboxEntry& e) {
  json j = json::object();
  j["id"] = e.id;
  j["state"] = std::string(to_string(e.state));
  j["decided_at"] = e.decided_at ? json(e.decided_at->to_string()) : json(nullptr);
  j["candidate"] = json::parse(ingest::format_triple_line(e.candidate));
  return j;
}

std::string entry_human(const ingest::InboxEntry& e) {
  std::ostringstream out;
  const auto& c = e.candidate;
  out << "#" << e.id << " " << to_string(e.state) << " " << render_decimal(c.confidence) << " ("
      << c.head << ":" << c.head_label << ") -" << c.rel << "-> (" << c.tail << ":"
      << c.tail_label << ") [" << to_string(c.source) << "]";
  if (e.decided_at) out << " decided " << e.decided_at->to_string();
  return out.str();
}

json cell_json(const query::Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return nullptr;
  if (auto* v = std::get_if<PropertyValue>(&cell)) {
    if (auto* i = std::get_if<std::int64_t>(v)) return *i;
    if (auto* d = std::get_if<double>(v)) return *d;
    if (auto* b = std::get_if<bool>(v)) return *b;
    if (auto* l = std::get_if<TextList>(v)) return *l;
  }
  return query::render(cell);
}

/// Creating an unlabeled node is matched only by whole-graph rules, so this
/// asks whether the role may add to the graph at large.
void require_general_write(const Graph& graph, const access::Role& role) {
  if (access::check_write(graph, role, MutationKind::create, NodeTarget{}) !=
      access::Decision::allowed)
    throw Error(Errc::denied, "denied: write");
}

struct Invocation {
  std::optional<std::string> as_role;
  std::optional<std::string> data;
  std::optional<std::string> config_path;
  std::string format = "human";
};

}  // namespace

Config load_config(const std::optional<std::filesystem::path>& path, const Environment& env) {
  Config config;
  std::optional<std::filesystem::path> file = path;
  if (!file) {
    auto from_env = env_value(env, "PRKG_CONFIG");
    if (!from_env.empty()) file = from_env;
  }
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(Errc::io, "cannot read config " + file->string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(Errc::parse, "config " + file->string() + ": " + e.what());
    }
    apply_config_json(config, doc, "config " + file->string());
  }
  if (auto data = env_value(env, "PRKG_DATA"); !data.empty()) config.data_path = data;
  if (auto role = env_value(env, "PRKG_ROLE"); !role.empty()) config.default_role = role;
  return config;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::not_found:
    case Errc::conflict:
    case Errc::forbidden:
    case Errc::denied:
      return kDomain;
    case Errc::io:
    case Errc::parse:
    case Errc::unsupported:
    case Errc::integrity:
      return kIoOrParse;
  }
  return kIoOrParse;
}

int run(const std::vector<std::string>& args, const Environment& env, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Personal research knowledge graph", "prkg"};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  app.add_option("--as", inv.as_role, "Act as ROLE");
  app.add_option("--data", inv.data, "Snapshot file");
  app.add_option("--config", inv.config_path, "JSON config file");
  app.add_option("--format", inv.format, "Output format")
      ->check(CLI::IsMember({"human", "lines"}));

  // Each subcommand installs the action to perform once flags are parsed.
  // `mutating` actions run under an exclusive lock and save afterwards.
  struct Action {
    bool mutating = false;
    std::function<void(store::State&, const access::Role&, const schema::Registry&,
                       const Config&)>
        body;
  };
  Action action;
  std::string init_owner;
  bool is_init = false;

  auto* init = app.add_subcommand("init", "Create a new graph");
  init->add_option("--owner", init_owner, "Owner name")->required();
  init->callback([&] { is_init = true; });

  // node ---------------------------------------------------------------
  auto* node = app.add_subcommand("node", "Node operations");
  node->require_subcommand(1);
  std::vector<std::string> node_labels, node_props, node_unset;
  std::string node_id;
  bool cascade = false;

  auto* node_add = node->add_subcommand("add", "Add a node");
  node_add->add_option("--label", node_labels, "Label (repeatable)")->required();
  node_add->add_option("--prop", node_props, "KEY=VALUE (repeatable)");
  node_add->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                access::RoleGuard guard(s.graph, role);
                std::set<std::string> labels(node_labels.begin(), node_labels.end());
                NodeId id = s.graph.add_node(labels, property_args(node_props), &guard);
                out << to_string(id) << "\n";
              }};
  });

  auto* node_delete = node->add_subcommand("delete", "Delete a node");
  node_delete->add_option("id", node_id)->required();
  node_delete->add_flag("--cascade", cascade, "Also delete incident relationships");
  node_delete->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                access::RoleGuard guard(s.graph, role);
                std::size_t removed = s.graph.delete_node(node_arg(node_id), cascade, &guard);
                if (inv.format == "lines")
                  out << removed << "\n";
                else
                  out << "removed " << removed << (removed == 1 ? " element\n" : " elements\n");
              }};
  });

  auto* node_set = node->add_subcommand("set", "Set or unset node properties");
  node_set->add_option("id", node_id)->required();
  node_set->add_option("--prop", node_props, "KEY=VALUE (repeatable)");
  node_set->add_option("--unset", node_unset, "KEY (repeatable)");
  node_set->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                access::RoleGuard guard(s.graph, role);
                PropertyUpdates updates;
                for (auto& [k, v] : property_args(node_props)) updates[k] = v;
                for (const auto& k : node_unset) updates[k] = std::nullopt;
                s.graph.set_properties(node_arg(node_id), updates, &guard);
              }};
  });

  // rel ----------------------------------------------------------------
  auto* rel = app.add_subcommand("rel", "Relationship operations");
  rel->require_subcommand(1);
  std::string rel_src, rel_dst, rel_type, rel_start, rel_end, rel_id, end_date;
  std::vector<std::string> rel_props;

  auto* rel_add = rel->add_subcommand("add", "Add a relationship");
  rel_add->add_option("src", rel_src)->required();
  rel_add->add_option("dst", rel_dst)->required();
  rel_add->add_option("type", rel_type)->required();
  rel_add->add_option("--start", rel_start, "Start date");
  rel_add->add_option("--end", rel_end, "End date");
  rel_add->add_option("--prop", rel_props, "KEY=VALUE (repeatable)");
  rel_add->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role,
                        const schema::Registry& registry, const Config&) {
                access::RoleGuard guard(s.graph, role);
                auto validity = TemporalInterval::make(date_arg(rel_start), date_arg(rel_end));
                NodeId src = node_arg(rel_src), dst = node_arg(rel_dst);
                RelId id = s.graph.add_relationship(src, dst, rel_type, validity,
                                                    property_args(rel_props), &guard);
                out << to_string(id) << "\n";
                for (const auto& w : registry.check_triple(s.graph.node(src).labels, rel_type,
                                                           s.graph.node(dst).labels))
                  err << "warning: " << w << "\n";
              }};
  });

  auto* rel_end_cmd = rel->add_subcommand("end", "Close a relationship's validity");
  rel_end_cmd->add_option("id", rel_id)->required();
  rel_end_cmd->add_option("date", end_date)->required();
  rel_end_cmd->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                access::RoleGuard guard(s.graph, role);
                s.graph.end_relationship(rel_arg(rel_id), PartialDate::parse(end_date), &guard);
              }};
  });

  // link ---------------------------------------------------------------
  auto* link_cmd = app.add_subcommand("link", "External links");
  link_cmd->require_subcommand(1);
  std::string link_node, link_source, link_uri;
  auto* link_add = link_cmd->add_subcommand("add", "Link a node to an external resource");
  link_add->add_option("node", link_node)->required();
  link_add->add_option("source", link_source)->required();
  link_add->add_option("uri", link_uri)->required();
  link_add->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                auto source = parse_link_source(link_source);
                if (!source)
                  throw Error(Errc::invalid_argument,
                              "unknown link source '" + link_source +
                                  "' (expected wikidata, orkg, twitter or other)");
                access::RoleGuard guard(s.graph, role);
                schema::set_external_link(s.graph, node_arg(link_node), *source, link_uri, &guard);
              }};
  });

  // import -------------------------------------------------------------
  auto* import_cmd = app.add_subcommand("import", "Import facts");
  import_cmd->require_subcommand(1);
  std::string import_file;

  auto* import_triples = import_cmd->add_subcommand("triples", "Import candidate triples");
  import_triples->add_option("file", import_file)->required();
  import_triples->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role,
                        const schema::Registry& registry, const Config&) {
                require_general_write(s.graph, role);
                access::RoleGuard guard(s.graph, role);
                auto report = ingest::import_triples(s.graph, s.inbox, s.thresholds, import_file,
                                                     registry, &guard);
                for (const auto& w : report.warnings) err << "warning: " << w << "\n";
                if (inv.format == "lines") {
                  out << report.merged << "\t" << report.queued << "\t" << report.dropped << "\t"
                      << report.duplicates << "\n";
                } else {
                  out << "merged " << report.merged << ", queued " << report.queued
                      << ", dropped " << report.dropped;
                  if (report.duplicates) out << " (" << report.duplicates << " already known)";
                  out << "\n";
                }
              }};
  });

  auto* import_bibtex = import_cmd->add_subcommand("bibtex", "Import a BibTeX file");
  import_bibtex->add_option("file", import_file)->required();
  import_bibtex->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                access::RoleGuard guard(s.graph, role);
                const auto* owner_name = as_text(*s.graph.node(s.graph.owner()).property("name"));
                auto report =
                    ingest::import_bibtex(s.graph, import_file, owner_name ? *owner_name : "",
                                          &guard);
                for (const auto& w : report.warnings) err << "warning: " << w << "\n";
                if (inv.format == "lines")
                  out << report.papers << "\t" << report.writes_edges << "\n";
                else
                  out << report.papers << " papers, " << report.writes_edges
                      << " writes edges\n";
              }};
  });

  // inbox --------------------------------------------------------------
  auto* inbox = app.add_subcommand("inbox", "Validation inbox");
  inbox->require_subcommand(1);
  std::string inbox_state, inbox_id;

  auto* inbox_list = inbox->add_subcommand("list", "List inbox entries");
  inbox_list->add_option("--state", inbox_state, "pending, accepted or rejected");
  inbox_list->callback([&] {
    action = {false, [&](store::State& s, const access::Role&, const schema::Registry&,
                         const Config&) {
                std::optional<ingest::EntryState> state;
                if (!inbox_state.empty()) {
                  state = ingest::parse_entry_state(inbox_state);
                  if (!state)
                    throw Error(Errc::invalid_argument, "unknown state '" + inbox_state + "'");
                }
                for (const auto& e : ingest::inbox_list(s.inbox, state)) {
                  if (inv.format == "lines")
                    out << entry_json(e).dump() << "\n";
                  else
                    out << entry_human(e) << "\n";
                }
              }};
  });

  auto* inbox_accept = inbox->add_subcommand("accept", "Accept an inbox entry");
  inbox_accept->add_option("id", inbox_id)->required();
  inbox_accept->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role,
                        const schema::Registry& registry, const Config&) {
                require_general_write(s.graph, role);
                access::RoleGuard guard(s.graph, role);
                auto report = ingest::inbox_accept(s.graph, s.inbox, entry_arg(inbox_id),
                                                   registry, std::nullopt, &guard);
                for (const auto& w : report.warnings) err << "warning: " << w << "\n";
                if (report.relationship)
                  out << to_string(*report.relationship) << "\n";
                else
                  out << "already known\n";
              }};
  });

  auto* inbox_reject = inbox->add_subcommand("reject", "Reject an inbox entry");
  inbox_reject->add_option("id", inbox_id)->required();
  inbox_reject->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) {
                require_general_write(s.graph, role);
                ingest::inbox_reject(s.graph, s.inbox, entry_arg(inbox_id));
              }};
  });

  // roles --------------------------------------------------------------
  auto* role_cmd = app.add_subcommand("role", "Role management");
  role_cmd->require_subcommand(1);
  std::string role_name, role_from;

  auto* role_create = role_cmd->add_subcommand("create", "Create an empty role");
  role_create->add_option("name", role_name)->required();
  role_create->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) { s.roles.create_role(role_name, &role); }};
  });

  auto* role_copy = role_cmd->add_subcommand("copy", "Copy a role's rules");
  role_copy->add_option("new", role_name)->required();
  role_copy->add_option("from", role_from)->required();
  role_copy->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) { s.roles.copy_role(role_name, role_from, &role); }};
  });

  std::string rule_role, rule_priv;
  std::vector<std::string> rule_scope;
  auto add_rule_command = [&](const std::string& name, access::Effect effect) {
    auto* cmd = app.add_subcommand(name, name == "grant" ? "Grant a privilege" : "Deny a privilege");
    cmd->add_option("role", rule_role)->required();
    cmd->add_option("privilege", rule_priv)->required();
    cmd->add_option("scope", rule_scope)->required();
    cmd->callback([&, effect] {
      action = {true, [&, effect](store::State& s, const access::Role& role,
                                  const schema::Registry&, const Config&) {
                  auto privilege = access::parse_privilege(rule_priv);
                  if (!privilege)
                    throw Error(Errc::invalid_argument, "unknown privilege '" + rule_priv + "'");
                  access::AccessRule rule{effect, *privilege, access::parse_scope(rule_scope)};
                  s.roles.add_rule(rule_role, rule, &role);
                }};
    });
  };
  add_rule_command("grant", access::Effect::grant);
  add_rule_command("deny", access::Effect::deny);

  // read commands ------------------------------------------------------
  std::string query_text;
  auto* query_cmd = app.add_subcommand("query", "Run a pattern query");
  query_cmd->add_option("text", query_text)->required();
  query_cmd->callback([&] {
    action = {false, [&](store::State& s, const access::Role& role, const schema::Registry&,
                         const Config&) {
                auto ast = query::parse_query(query_text);
                std::vector<query::Row> rows;
                if (ast.as_role) {
                  if (role.name != access::kAdminRole && *ast.as_role != role.name)
                    throw Error(Errc::denied, "denied: only admin may query as another role");
                  rows = query::evaluate(s.graph, s.roles, ast);
                } else {
                  rows = query::evaluate_in_view(s.graph, access::view_as(s.graph, role), ast);
                }
                for (const auto& row : rows) {
                  if (inv.format == "lines") {
                    json record = json::array();
                    for (const auto& cell : row.cells) record.push_back(cell_json(cell));
                    out << record.dump() << "\n";
                  } else {
                    for (std::size_t i = 0; i < row.cells.size(); ++i)
                      out << (i ? " | " : "") << query::render(row.cells[i]);
                    out << "\n";
                  }
                }
              }};
  });

  auto* validate_cmd = app.add_subcommand("validate", "Report orphans and schema warnings");
  validate_cmd->callback([&] {
    action = {false, [&](store::State& s, const access::Role& role,
                         const schema::Registry& registry, const Config&) {
                auto view = access::view_as(s.graph, role);
                std::vector<NodeId> orphans;
                for (auto id : s.graph.orphans())
                  if (view.node_visible(id)) orphans.push_back(id);
                std::vector<std::string> warnings;
                for (const auto& [id, r] : s.graph.relationships()) {
                  if (!view.relationship_visible(id)) continue;
                  for (auto& w : registry.check_triple(s.graph.node(r.src).labels, r.rel_type,
                                                       s.graph.node(r.dst).labels))
                    warnings.push_back(to_string(id) + ": " + w);
                }
                if (inv.format == "lines") {
                  for (auto id : orphans) out << "orphan\t" << to_string(id) << "\n";
                  for (const auto& w : warnings) out << "warning\t" << w << "\n";
                  return;
                }
                out << orphans.size() << (orphans.size() == 1 ? " orphan\n" : " orphans\n");
                for (auto id : orphans) out << "  " << to_string(id) << "\n";
                out << warnings.size()
                    << (warnings.size() == 1 ? " schema warning\n" : " schema warnings\n");
                for (const auto& w : warnings) out << "  " << w << "\n";
              }};
  });

  auto* export_cmd = app.add_subcommand("export", "Export the graph");
  export_cmd->require_subcommand(1);
  std::string export_file;
  auto* export_rdf = export_cmd->add_subcommand("rdf", "Write N-Triples");
  export_rdf->add_option("file", export_file)->required();
  export_rdf->callback([&] {
    action = {false, [&](store::State& s, const access::Role& role, const schema::Registry&,
                         const Config& config) {
                std::size_t n =
                    store::export_rdf(s.graph, s.roles, role.name, export_file, config.rdf_base);
                if (inv.format == "lines")
                  out << n << "\n";
                else
                  out << "wrote " << n << " triples to " << export_file << "\n";
              }};
  });

  auto* save_cmd = app.add_subcommand("save", "Rewrite the snapshot in canonical form");
  save_cmd->callback([&] {
    action = {true, [&](store::State& s, const access::Role& role, const schema::Registry&,
                        const Config&) { require_general_write(s.graph, role); }};
  });

  std::vector<std::string> argv_storage{"prkg"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "prkg: " << e.what() << "\n";
    err << "run 'prkg --help' for usage\n";
    return kUsage;
  }

  try {
    std::optional<std::filesystem::path> config_path;
    if (inv.config_path) config_path = *inv.config_path;
    Config config = load_config(config_path, env);
    if (inv.data) config.data_path = *inv.data;
    if (inv.as_role) config.default_role = *inv.as_role;
    if (config.data_path.empty()) throw Error(Errc::invalid_argument, "empty data path");

    schema::Registry registry = schema::builtin_registry();
    for (const auto& spec : config.extra_relations) registry.register_relation(spec);

    if (is_init) {
      FileLock lock(config.data_path, true);
      if (std::filesystem::exists(config.data_path))
        throw Error(Errc::conflict, config.data_path.string() + " already exists");
      store::State state = store::State::fresh(init_owner);
      if (config.thresholds_configured) state.thresholds = config.thresholds;
      state.roles.role(config.default_role);
      store::save_snapshot(state, config.data_path);
      out << to_string(state.graph.owner()) << "\n";
      return kOk;
    }

    FileLock lock(config.data_path, action.mutating);
    if (!std::filesystem::exists(config.data_path))
      throw Error(Errc::io, "no snapshot at " + config.data_path.string() +
                                " (run 'prkg init --owner NAME' first)");
    store::State state = store::load_snapshot(config.data_path);
    if (config.thresholds_configured) state.thresholds = config.thresholds;
    const access::Role role = state.roles.role(config.default_role);
    action.body(state, role, registry, config);
    if (action.mutating) store::save_snapshot(state, config.data_path);
    return kOk;
  } catch (const query::QueryError& e) {
    err << "prkg: query:" << e.line() << ":" << e.column() << ": " << e.detail();
    if (!e.expected().empty()) {
      err << " (expected";
      std::size_t i = 0;
      for (const auto& token : e.expected()) err << (i++ ? ", " : " ") << token;
      err << ")";
    }
    err << "\n";
    return exit_code_for(e.code());
  } catch (const Error& e) {
    err << "prkg: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "prkg: " << e.what() << "\n";
    return kIoOrParse;
  }
}

}  // namespace prkg::cli
