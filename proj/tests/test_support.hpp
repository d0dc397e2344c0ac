#pragma once

#include <gtest/gtest.h>

#include "snls/error.hpp"

namespace snls::testing {

/// Runs `fn` and returns the code of the snls::Error it throws.
template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an snls::Error";
  return ErrorCode::Io;
}

}  // namespace snls::testing
