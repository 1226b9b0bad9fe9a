#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prkg {

enum class Errc {
  invalid_argument,
  not_found,
  conflict,
  forbidden,
  denied,
  unsupported,
  integrity,
  parse,
  io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the engine carries one of the Errc kinds so the CLI
/// can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace prkg
