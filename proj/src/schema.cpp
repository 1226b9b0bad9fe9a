#include "prkg/schema.hpp"

#include <cctype>

#include "prkg/error.hpp"

namespace prkg::schema {

namespace {

std::string join(const std::set<std::string>& items) {
  std::string out = "{";
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += ", ";
    out += item;
    first = false;
  }
  return out + "}";
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& item : a) {
    if (b.count(item)) return true;
  }
  return false;
}

}  // namespace

Registry::Registry() {
  labels_ = {"Researcher", "Institution", "Topic",      "Task",       "Method",  "Tool",
             "Dataset",    "Metric",      "Paper",      "Lab",        "Machine", "Committee",
             "Conference", "Course",      "Project",    "Talk",       "Equipment"};

  const std::vector<RelationSpec> builtins = {
      {"worksFor", {"Researcher"}, {"Institution"}, true},
      {"interest", {"Researcher"}, {"Topic"}, false},
      {"task", {"Researcher", "Paper"}, {"Task"}, false},
      {"method", {"Task"}, {"Method"}, false},
      {"tool", {"Task", "Researcher"}, {"Tool"}, false},
      {"dataset", {"Task"}, {"Dataset"}, false},
      {"metric", {"Task"}, {"Metric"}, false},
      {"writes", {"Researcher"}, {"Paper"}, false},
      {"reads", {"Researcher"}, {"Paper"}, false},
      {"reviewerOf", {"Researcher"}, {"Paper"}, false},
      {"memberOf", {"Researcher"}, {"Committee"}, false},
      {"manages", {"Researcher"}, {"Lab"}, false},
      {"hasMachine", {"Lab"}, {"Machine"}, false},
      {"attends", {"Researcher"}, {"Conference"}, true},
      {"teaches", {"Researcher"}, {"Course"}, true},
      {"participatesIn", {"Researcher"}, {"Project"}, true},
      {"gives", {"Researcher"}, {"Talk"}, false},
  };
  for (const auto& spec : builtins) {
    builtin_relations_.insert(spec.name);
    relations_.emplace(spec.name, spec);
  }
}

const RelationSpec* Registry::find(const std::string& name) const {
  auto it = relations_.find(name);
  return it == relations_.end() ? nullptr : &it->second;
}

bool Registry::is_builtin(const std::string& name) const {
  return builtin_relations_.count(name) != 0;
}

Registry& Registry::register_relation(RelationSpec spec) {
  if (!is_valid_rel_type(spec.name))
    throw Error(Errc::invalid_argument, "relation name must be a non-empty token");
  if (is_builtin(spec.name))
    throw Error(Errc::conflict, "'" + spec.name + "' is a built-in relation");
  if (relations_.count(spec.name))
    throw Error(Errc::conflict, "relation '" + spec.name + "' already registered");
  for (const auto& label : spec.expected_src_labels) labels_.insert(label);
  for (const auto& label : spec.expected_dst_labels) labels_.insert(label);
  relations_.emplace(spec.name, std::move(spec));
  return *this;
}

std::vector<std::string> Registry::check_triple(const std::set<std::string>& src_labels,
                                                const std::string& rel_type,
                                                const std::set<std::string>& dst_labels) const {
  std::vector<std::string> warnings;
  const RelationSpec* spec = find(rel_type);
  if (!spec) {
    // `usesTool` and friends spell a stored bare name with its implied prefix.
    if (rel_type.size() > 4 && rel_type.rfind("uses", 0) == 0) {
      std::string bare = rel_type.substr(4);
      bare[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(bare[0])));
      if (find(bare)) {
        warnings.push_back("'" + rel_type + "' is not canonical; the relation is stored as '" +
                           bare + "'");
      }
    }
    return warnings;
  }
  const bool src_ok =
      spec->expected_src_labels.empty() || intersects(src_labels, spec->expected_src_labels);
  const bool dst_ok =
      spec->expected_dst_labels.empty() || intersects(dst_labels, spec->expected_dst_labels);
  if (!src_ok || !dst_ok) {
    warnings.push_back("'" + rel_type + "' expects " + join(spec->expected_src_labels) + " -> " +
                       join(spec->expected_dst_labels) + ", got " + join(src_labels) + " -> " +
                       join(dst_labels));
  }
  return warnings;
}

const Registry& builtin_registry() {
  static const Registry registry;
  return registry;
}

const Node& set_external_link(Graph& graph, NodeId node, LinkSource source, const std::string& uri,
                              const MutationGuard* guard) {
  return graph.add_external_link(node, ExternalLink{source, uri}, guard);
}

ValidationReport validate(const Graph& graph, const Registry& registry) {
  ValidationReport report;
  report.orphans = graph.orphans();
  for (const auto& [id, rel] : graph.relationships()) {
    const Node& src = graph.node(rel.src);
    const Node& dst = graph.node(rel.dst);
    for (auto& warning : registry.check_triple(src.labels, rel.rel_type, dst.labels)) {
      report.schema_warnings.push_back(to_string(id) + ": " + warning);
    }
  }
  return report;
}

}  // namespace prkg::schema
