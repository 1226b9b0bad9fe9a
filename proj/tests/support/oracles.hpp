#pragma once

// Deliberately naive reference implementations. They share no code with the
// engine beyond the data types.

#include <cstddef>
#include <set>
#include <vector>

#include "prkg/access.hpp"
#include "prkg/graph.hpp"
#include "prkg/query.hpp"

namespace prkg::oracle {

/// Expands both sides to explicit day lists and looks for a shared day.
bool valid_at(const TemporalInterval& interval, const PartialDate& at);

/// Undirected breadth-first search from the owner over an adjacency list.
std::set<NodeId> orphans(const Graph& graph);

/// Checks one element against every rule separately.
access::Decision resolve(const access::Role& role, access::Privilege privilege,
                         const access::Element& element, const Graph& graph);

access::View view(const Graph& graph, const access::Role& role);

/// Tries every tuple of visible relationships (or every visible node for a
/// single node pattern) against the pattern.
std::vector<query::Row> evaluate(const Graph& graph, const access::View& view,
                                 const query::QueryAst& ast);

/// Triples predicted by the RDF encoding rules.
std::size_t rdf_triple_count(const Graph& graph, const access::View& view);

}  // namespace prkg::oracle
