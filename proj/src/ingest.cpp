#include "prkg/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prkg/error.hpp"

namespace prkg::ingest {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

NodeId resolve_or_create(Graph& graph, const std::string& name, const std::string& label,
                         std::size_t& created, const MutationGuard* guard) {
  if (auto found = resolve_entity(graph, name, label)) return *found;
  ++created;
  return graph.add_node({label}, {{"name", name}}, guard);
}

MergeReport merge(Graph& graph, const CandidateTriple& candidate, const schema::Registry& registry,
                  const MutationGuard* guard) {
  MergeReport report;
  auto head = resolve_entity(graph, candidate.head, candidate.head_label);
  auto tail = resolve_entity(graph, candidate.tail, candidate.tail_label);
  const auto unbounded = TemporalInterval::unbounded();
  if (head && tail) {
    if (graph.find_duplicate(*head, *tail, candidate.rel, unbounded)) {
      report.head = *head;
      report.tail = *tail;
      report.duplicate = true;
      return report;
    }
  }
  if (guard && !guard->permits(MutationKind::create, RelTarget{std::nullopt, candidate.rel}))
    throw Error(Errc::denied, "denied: write");
  report.head = resolve_or_create(graph, candidate.head, candidate.head_label,
                                  report.nodes_created, guard);
  report.tail = resolve_or_create(graph, candidate.tail, candidate.tail_label,
                                  report.nodes_created, guard);
  report.relationship =
      graph.add_relationship(report.head, report.tail, candidate.rel, unbounded, {}, guard);
  report.warnings = registry.check_triple(graph.node(report.head).labels, candidate.rel,
                                          graph.node(report.tail).labels);
  return report;
}

InboxEntry& pending_entry(Inbox& inbox, std::uint64_t id) {
  InboxEntry& entry = mutable_entry(inbox, id);
  if (entry.state != EntryState::pending) {
    throw Error(Errc::conflict, "inbox entry " + std::to_string(id) + " is already " +
                                    std::string(to_string(entry.state)));
  }
  return entry;
}

}  // namespace

InboxEntry& mutable_entry(Inbox& inbox, std::uint64_t id) {
  auto it = inbox.entries_.find(id);
  if (it == inbox.entries_.end())
    throw Error(Errc::not_found, "no inbox entry " + std::to_string(id));
  return it->second;
}

std::string_view to_string(CandidateSource source) {
  switch (source) {
    case CandidateSource::paper:
      return "paper";
    case CandidateSource::conversation:
      return "conversation";
    case CandidateSource::activity:
      return "activity";
    case CandidateSource::manual:
      return "manual";
  }
  return "manual";
}

std::optional<CandidateSource> parse_candidate_source(std::string_view text) {
  for (auto s : {CandidateSource::paper, CandidateSource::conversation, CandidateSource::activity,
                 CandidateSource::manual}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(EntryState state) {
  switch (state) {
    case EntryState::pending:
      return "pending";
    case EntryState::accepted:
      return "accepted";
    case EntryState::rejected:
      return "rejected";
  }
  return "pending";
}

std::optional<EntryState> parse_entry_state(std::string_view text) {
  for (auto s : {EntryState::pending, EntryState::accepted, EntryState::rejected}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

void CandidateTriple::check() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::invalid_argument, what);
  };
  require(!head.empty(), "candidate head is empty");
  require(!rel.empty(), "candidate rel is empty");
  require(!tail.empty(), "candidate tail is empty");
  require(!head_label.empty(), "candidate head_label is empty");
  require(!tail_label.empty(), "candidate tail_label is empty");
  require(is_valid_rel_type(rel), "candidate rel '" + rel + "' contains whitespace");
  require(std::isfinite(confidence) && confidence >= 0.0 && confidence <= 1.0,
          "candidate confidence must lie in [0, 1]");
}

void Thresholds::check() const {
  if (!(reject >= 0.0 && reject < accept && accept <= 1.0)) {
    throw Error(Errc::invalid_argument,
                "thresholds must satisfy 0 <= reject < accept <= 1 (reject=" +
                    render_decimal(reject) + ", accept=" + render_decimal(accept) + ")");
  }
}

const InboxEntry& Inbox::enqueue(CandidateTriple candidate) {
  std::uint64_t id = next_id_++;
  return entries_.emplace(id, InboxEntry{id, std::move(candidate), EntryState::pending, {}})
      .first->second;
}

const InboxEntry& Inbox::entry(std::uint64_t id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(Errc::not_found, "no inbox entry " + std::to_string(id));
  return it->second;
}

std::vector<InboxEntry> Inbox::list(std::optional<EntryState> state) const {
  std::vector<InboxEntry> out;
  for (const auto& [id, entry] : entries_) {
    if (!state || entry.state == *state) out.push_back(entry);
  }
  return out;
}

Inbox Inbox::restore(std::vector<InboxEntry> entries, std::uint64_t next_id) {
  Inbox inbox;
  inbox.next_id_ = next_id;
  for (auto& entry : entries) {
    const std::string what = "inbox entry " + std::to_string(entry.id);
    if (entry.id == 0 || entry.id >= next_id)
      throw Error(Errc::integrity, what + ": id outside the allocated range");
    try {
      entry.candidate.check();
    } catch (const Error& e) {
      throw Error(Errc::integrity, what + ": " + e.what());
    }
    if (entry.state == EntryState::pending && entry.decided_at)
      throw Error(Errc::integrity, what + ": pending entry carries a decision date");
    std::uint64_t id = entry.id;
    if (!inbox.entries_.emplace(id, std::move(entry)).second)
      throw Error(Errc::integrity, what + ": duplicate id");
  }
  return inbox;
}

std::optional<NodeId> resolve_entity(const Graph& graph, const std::string& name,
                                     const std::string& label) {
  const std::string wanted = lower(name);
  for (const auto& [id, node] : graph.nodes()) {
    if (!node.has_label(label)) continue;
    const PropertyValue* value = node.property("name");
    const std::string* text = value ? as_text(*value) : nullptr;
    if (text && lower(*text) == wanted) return id;
  }
  return std::nullopt;
}

bool is_anchored(const Graph& graph, const CandidateTriple& candidate) {
  auto reachable = graph.reachable_from_owner();
  for (const auto& [name, label] : {std::pair{candidate.head, candidate.head_label},
                                    std::pair{candidate.tail, candidate.tail_label}}) {
    auto id = resolve_entity(graph, name, label);
    if (id && reachable.count(*id)) return true;
  }
  return false;
}

SubmitReport submit_candidates(Graph& graph, Inbox& inbox, const Thresholds& thresholds,
                               const std::vector<CandidateTriple>& candidates,
                               const schema::Registry& registry, const MutationGuard* guard) {
  thresholds.check();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      candidates[i].check();
    } catch (const Error& e) {
      throw Error(Errc::invalid_argument,
                  "candidate " + std::to_string(i + 1) + ": " + e.what() + "; batch rejected");
    }
  }
  SubmitReport report;
  for (const auto& candidate : candidates) {
    if (candidate.confidence <= thresholds.reject) {
      ++report.dropped;
    } else if (candidate.confidence < thresholds.accept) {
      inbox.enqueue(candidate);
      ++report.queued;
    } else if (!is_anchored(graph, candidate)) {
      report.warnings.push_back("(" + candidate.head + ", " + candidate.rel + ", " +
                                candidate.tail +
                                ") does not touch the owner's graph; queued for review");
      inbox.enqueue(candidate);
      ++report.queued;
    } else {
      MergeReport merged = merge(graph, candidate, registry, guard);
      ++report.merged;
      if (merged.duplicate) ++report.duplicates;
      for (auto& w : merged.warnings) report.warnings.push_back(std::move(w));
    }
  }
  return report;
}

MergeReport inbox_accept(Graph& graph, Inbox& inbox, std::uint64_t entry_id,
                         const schema::Registry& registry, std::optional<PartialDate> decided_at,
                         const MutationGuard* guard) {
  InboxEntry& entry = pending_entry(inbox, entry_id);
  if (!is_anchored(graph, entry.candidate)) {
    throw Error(Errc::conflict, "inbox entry " + std::to_string(entry_id) +
                                    " has no endpoint connected to the owner; accepting it would "
                                    "create orphans");
  }
  MergeReport report = merge(graph, entry.candidate, registry, guard);
  entry.state = EntryState::accepted;
  entry.decided_at = decided_at.value_or(PartialDate::today());
  return report;
}

const InboxEntry& inbox_reject(Graph&, Inbox& inbox, std::uint64_t entry_id,
                               std::optional<PartialDate> decided_at) {
  InboxEntry& entry = pending_entry(inbox, entry_id);
  entry.state = EntryState::rejected;
  entry.decided_at = decided_at.value_or(PartialDate::today());
  return entry;
}

std::vector<InboxEntry> inbox_list(const Inbox& inbox, std::optional<EntryState> state) {
  return inbox.list(state);
}

CandidateTriple parse_triple_line(std::string_view line) {
  nlohmann::json object;
  try {
    object = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse, std::string("malformed JSON: ") + e.what());
  }
  if (!object.is_object()) throw Error(Errc::parse, "record is not an object");

  auto text = [&](const char* key) -> std::string {
    auto it = object.find(key);
    if (it == object.end()) throw Error(Errc::parse, std::string("missing `") + key + "` field");
    if (!it->is_string()) throw Error(Errc::parse, std::string("`") + key + "` must be a string");
    return it->get<std::string>();
  };

  CandidateTriple candidate;
  candidate.head = text("head");
  candidate.head_label = text("head_label");
  candidate.rel = text("rel");
  candidate.tail = text("tail");
  candidate.tail_label = text("tail_label");
  auto conf = object.find("confidence");
  if (conf == object.end()) throw Error(Errc::parse, "missing `confidence` field");
  if (!conf->is_number()) throw Error(Errc::parse, "`confidence` must be a number");
  candidate.confidence = conf->get<double>();
  std::string source = text("source");
  auto parsed_source = parse_candidate_source(source);
  if (!parsed_source) throw Error(Errc::parse, "unknown source '" + source + "'");
  candidate.source = *parsed_source;
  if (object.contains("prov")) candidate.provenance = text("prov");
  try {
    candidate.check();
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
  return candidate;
}

std::string format_triple_line(const CandidateTriple& candidate) {
  nlohmann::ordered_json object;
  object["head"] = candidate.head;
  object["head_label"] = candidate.head_label;
  object["rel"] = candidate.rel;
  object["tail"] = candidate.tail;
  object["tail_label"] = candidate.tail_label;
  object["confidence"] = candidate.confidence;
  object["source"] = std::string(to_string(candidate.source));
  if (!candidate.provenance.empty()) object["prov"] = candidate.provenance;
  return object.dump();
}

std::vector<CandidateTriple> parse_triples(std::string_view text) {
  std::vector<CandidateTriple> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto newline = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, newline == std::string_view::npos ? text.size() - pos : newline - pos);
    pos = newline == std::string_view::npos ? text.size() : newline + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isspace(c) != 0; }))
      continue;
    try {
      out.push_back(parse_triple_line(line));
    } catch (const Error& e) {
      throw Error(Errc::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

SubmitReport import_triples(Graph& graph, Inbox& inbox, const Thresholds& thresholds,
                            const std::filesystem::path& path, const schema::Registry& registry,
                            const MutationGuard* guard) {
  auto candidates = parse_triples(read_file(path));
  return submit_candidates(graph, inbox, thresholds, candidates, registry, guard);
}

// BibTeX ----------------------------------------------------------------

const std::string* BibEntry::field(const std::string& name) const {
  for (const auto& [key, value] : fields) {
    if (key == name) return &value;
  }
  return nullptr;
}

namespace {

class BibParser {
 public:
  explicit BibParser(std::string_view text) : text_(text) {}

  std::vector<BibEntry> parse() {
    std::vector<BibEntry> entries;
    while (true) {
      auto at = text_.find('@', pos_);
      if (at == std::string_view::npos) break;
      pos_ = at + 1;
      entries.push_back(parse_entry(at));
    }
    return entries;
  }

 private:
  [[noreturn]] void fail(std::size_t offset, const std::string& message) const {
    auto [line, column] = position(offset);
    throw Error(Errc::parse, std::to_string(line) + ":" + std::to_string(column) + ": " + message);
  }

  std::pair<std::size_t, std::size_t> position(std::size_t offset) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    return {line, column};
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string word() {
    skip_ws();
    std::size_t begin = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_-:.+/").find(c) != std::string_view::npos)
        ++pos_;
      else
        break;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  // Returns the offset just past the brace matching the one at `open`.
  std::size_t match_brace(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open; i < text_.size(); ++i) {
      if (text_[i] == '\\') {
        ++i;
        continue;
      }
      if (text_[i] == '{') ++depth;
      if (text_[i] == '}' && --depth == 0) return i + 1;
    }
    fail(open, "unbalanced '{'");
  }

  std::string value_part() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, "unexpected end of input in field value");
    char c = text_[pos_];
    if (c == '{') {
      std::size_t end = match_brace(pos_);
      std::string inner(text_.substr(pos_ + 1, end - pos_ - 2));
      pos_ = end;
      return inner;
    }
    if (c == '"') {
      std::size_t open = pos_++;
      int depth = 0;
      std::string inner;
      while (true) {
        if (pos_ >= text_.size()) fail(open, "unterminated quoted value");
        char d = text_[pos_++];
        if (d == '{') ++depth;
        if (d == '}') {
          if (depth == 0) fail(pos_ - 1, "unbalanced '}'");
          --depth;
        }
        if (d == '"' && depth == 0) break;
        inner += d;
      }
      return inner;
    }
    std::string bare = word();
    if (bare.empty()) fail(pos_, "expected a field value");
    return bare;
  }

  static std::string clean(const std::string& raw) {
    std::string out;
    bool space = false;
    for (char c : raw) {
      if (c == '{' || c == '}') continue;
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !out.empty();
        continue;
      }
      if (space) out += ' ';
      space = false;
      out += c;
    }
    return out;
  }

  BibEntry parse_entry(std::size_t at) {
    BibEntry entry;
    entry.line = position(at).first;
    entry.type = lower(word());
    if (entry.type.empty()) fail(at, "expected an entry type after '@'");
    skip_ws();
    if (pos_ >= text_.size() || (text_[pos_] != '{' && text_[pos_] != '(')) {
      fail(pos_, "expected '{' after @" + entry.type);
    }
    const char open_char = text_[pos_];
    const char close_char = open_char == '{' ? '}' : ')';
    std::size_t open = pos_;
    if (entry.type == "comment" || entry.type == "string" || entry.type == "preamble") {
      if (open_char == '{') {
        pos_ = match_brace(open);
      } else {
        auto close = text_.find(')', open);
        if (close == std::string_view::npos) fail(open, "unbalanced '('");
        pos_ = close + 1;
      }
      return entry;
    }
    if (open_char == '{') match_brace(open);  // reports imbalance at the entry's brace
    ++pos_;
    skip_ws();
    std::size_t key_begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != close_char &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    entry.key = std::string(text_.substr(key_begin, pos_ - key_begin));
    if (entry.key.empty()) fail(key_begin, "missing citation key");
    while (true) {
      skip_ws();
      if (pos_ >= text_.size()) fail(open, "unterminated entry");
      if (text_[pos_] == close_char) {
        ++pos_;
        break;
      }
      if (text_[pos_] != ',') fail(pos_, "expected ',' or closing delimiter");
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == close_char) continue;
      std::size_t name_at = pos_;
      std::string name = lower(word());
      if (name.empty()) fail(name_at, "expected a field name");
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '=') fail(pos_, "expected '=' after " + name);
      ++pos_;
      std::string value = value_part();
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] == '#') {
        ++pos_;
        value += value_part();
        skip_ws();
      }
      entry.fields.emplace_back(name, clean(value));
    }
    return entry;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool author_matches(const std::string& author, const std::string& owner_name) {
  if (iequals(author, owner_name)) return true;
  std::string token;
  auto flush = [&] {
    bool hit = !token.empty() && iequals(token, owner_name);
    token.clear();
    return hit;
  };
  for (char c : author) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (flush()) return true;
    } else {
      token += c;
    }
  }
  return flush();
}

}  // namespace

std::vector<BibEntry> parse_bibtex(std::string_view text) { return BibParser(text).parse(); }

std::vector<std::string> split_authors(const std::string& field) {
  std::vector<std::string> authors;
  std::istringstream in(field);
  std::string word;
  std::string current;
  while (in >> word) {
    if (word == "and") {
      if (!current.empty()) authors.push_back(current);
      current.clear();
    } else {
      current += (current.empty() ? "" : " ") + word;
    }
  }
  if (!current.empty()) authors.push_back(current);
  return authors;
}

BibtexReport import_bibtex_text(Graph& graph, std::string_view text, const std::string& owner_name,
                                const MutationGuard* guard) {
  static const std::set<std::string> supported_types = {"article", "inproceedings", "book"};
  static const std::set<std::string> used_fields = {"author", "title", "year"};

  auto entries = parse_bibtex(text);
  BibtexReport report;
  for (const auto& entry : entries) {
    const std::string where = "line " + std::to_string(entry.line) + ": ";
    if (entry.type == "comment" || entry.type == "string" || entry.type == "preamble") {
      report.warnings.push_back(where + "@" + entry.type + " skipped");
      continue;
    }
    if (!supported_types.count(entry.type)) {
      report.warnings.push_back(where + "unsupported entry type @" + entry.type + " (" +
                                entry.key + ") skipped");
      continue;
    }
    for (const auto& [name, value] : entry.fields) {
      if (!used_fields.count(name))
        report.warnings.push_back(where + entry.key + ": field '" + name + "' ignored");
    }

    PropertyUpdates props;
    if (const auto* title = entry.field("title")) props["title"] = *title;
    if (const auto* year = entry.field("year")) {
      bool numeric = !year->empty() && std::all_of(year->begin(), year->end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
      });
      if (numeric) {
        props["year"] = static_cast<std::int64_t>(std::stoll(*year));
      } else {
        props["year"] = *year;
      }
    }

    NodeId paper;
    if (auto existing = resolve_entity(graph, entry.key, "Paper")) {
      paper = *existing;
    } else {
      paper = graph.add_node({"Paper"}, {{"name", entry.key}}, guard);
    }
    if (!props.empty()) graph.set_properties(paper, props, guard);
    ++report.papers;

    bool authored = false;
    if (const auto* authors = entry.field("author")) {
      for (const auto& author : split_authors(*authors)) {
        if (author_matches(author, owner_name)) authored = true;
      }
    }
    if (authored) {
      if (graph.find_duplicate(graph.owner(), paper, "writes", TemporalInterval::unbounded())) {
        report.warnings.push_back(where + entry.key + ": writes edge already present");
      } else {
        graph.add_relationship(graph.owner(), paper, "writes", TemporalInterval::unbounded(), {},
                               guard);
        ++report.writes_edges;
      }
    } else if (!graph.reachable_from_owner().count(paper)) {
      report.warnings.push_back(where + entry.key +
                                ": not authored by the owner; paper is not yet connected");
    }
  }
  return report;
}

BibtexReport import_bibtex(Graph& graph, const std::filesystem::path& path,
                           const std::string& owner_name, const MutationGuard* guard) {
  return import_bibtex_text(graph, read_file(path), owner_name, guard);
}

}  // namespace prkg::ingest
