#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unseg {

enum class Errc {
  io,
  bad_magic,
  unsupported_dtype,
  truncated,
  non_finite,
  bad_format,
  channels,
  bit_depth,
  duplicate_id,
  malformed,
  invalid_argument,
  dimension_mismatch,
  label_out_of_range,
  empty_proposal,
  eigensolver,
  trainer_failure,
  timeout,
  validation,
};

std::string_view to_string(Errc code);

// Every failure surfaced by the library is an Error carrying a code, so
// callers can branch on the kind without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace unseg
