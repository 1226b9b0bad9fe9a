#pragma once

#include <map>
#include <string>

#include "prkg/store.hpp"

namespace prkg::testing {

/// Sunita's example graph, built through the library API in the same order
/// as tests/fixtures/build_fixture.sh so ids coincide.
struct Fixture {
  store::State state;
  std::map<std::string, NodeId> node;  // by name
  std::map<std::string, RelId> rel;    // by "type:target name"
};

Fixture sunita_fixture();

/// The collaborator role: copy of admin plus the four deny rules.
void add_collaborator(store::State& state);

}  // namespace prkg::testing
