#include "prkg/error.hpp"

namespace prkg {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
      return "invalid-argument";
    case Errc::not_found:
      return "not-found";
    case Errc::conflict:
      return "conflict";
    case Errc::forbidden:
      return "forbidden";
    case Errc::denied:
      return "denied";
    case Errc::unsupported:
      return "unsupported";
    case Errc::integrity:
      return "integrity";
    case Errc::parse:
      return "parse";
    case Errc::io:
      return "io";
  }
  return "unknown";
}

}  // namespace prkg
