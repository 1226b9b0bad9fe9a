#include "fixture.hpp"

#include "prkg/schema.hpp"

namespace prkg::testing {

Fixture sunita_fixture() {
  Fixture f{store::State::fresh("Sunita"), {}, {}};
  Graph& g = f.state.graph;
  f.node["Sunita"] = g.owner();

  auto node = [&](const std::string& label, const std::string& name, PropertyMap extra = {}) {
    extra["name"] = name;
    f.node[name] = g.add_node({label}, extra);
  };
  node("Institution", "IACS");
  node("Institution", "IISER Kolkata");
  node("Topic", "NLP");
  node("Task", "Topic Modeling");
  node("Method", "LDA");
  node("Method", "CTM");
  node("Lab", "NLPLab");
  node("Paper", "SpERT.PL", {{"status", std::string("underReview")}});
  node("Paper", "ScienceKG");
  node("Committee", "PhDSel");
  node("Paper", "CCLINC");
  node("Task", "translation");
  node("Method", "word sense disambiguation");

  auto rel = [&](const std::string& src, const std::string& dst, const std::string& type,
                 TemporalInterval validity = {}) {
    f.rel[type + ":" + dst] = g.add_relationship(f.node.at(src), f.node.at(dst), type, validity);
  };
  rel("Sunita", "IISER Kolkata", "worksFor",
      TemporalInterval::make(PartialDate::year(2014), PartialDate::year(2018)));
  rel("Sunita", "IACS", "worksFor", TemporalInterval::make(PartialDate::year(2018), std::nullopt));
  rel("Sunita", "NLP", "interest");
  rel("Sunita", "Topic Modeling", "task");
  rel("Topic Modeling", "LDA", "method");
  rel("Topic Modeling", "CTM", "method");
  rel("Sunita", "NLPLab", "manages");
  rel("Sunita", "SpERT.PL", "writes");
  rel("Sunita", "ScienceKG", "reviewerOf");
  rel("Sunita", "PhDSel", "memberOf");
  rel("Sunita", "CCLINC", "reads");
  rel("CCLINC", "translation", "task");
  rel("translation", "word sense disambiguation", "method");

  schema::set_external_link(g, f.node["IACS"], LinkSource::wikidata,
                            "https://www.wikidata.org/wiki/Q3347871");
  schema::set_external_link(g, f.node["LDA"], LinkSource::orkg,
                            "https://www.orkg.org/orkg/resource/R111035");
  return f;
}

void add_collaborator(store::State& state) {
  using namespace access;
  auto& roles = state.roles;
  roles.copy_role("collaborator", "admin");
  roles.add_rule("collaborator", {Effect::deny, Privilege::read, scope::NodeLabel{"Committee"}});
  roles.add_rule("collaborator", {Effect::deny, Privilege::traverse, scope::RelType{"reviewerOf"}});
  roles.add_rule("collaborator", {Effect::deny, Privilege::write, scope::WholeGraph{}});
  roles.add_rule("collaborator", {Effect::deny, Privilege::read,
                                  scope::PropertyPredicate{"Paper", "status",
                                                           {"underReview", "inProgress"}}});
}

}  // namespace prkg::testing
