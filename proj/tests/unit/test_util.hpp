#pragma once

#include <doctest.h>

#include <functional>

#include "prkg/error.hpp"

namespace prkg::testing {

/// The error code raised by `f`; fails the test when nothing is thrown.
inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::io;
}

}  // namespace prkg::testing
