#include "unseg/error.hpp"

namespace unseg {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_dtype: return "unsupported_dtype";
    case Errc::truncated: return "truncated";
    case Errc::non_finite: return "non_finite";
    case Errc::bad_format: return "bad_format";
    case Errc::channels: return "channels";
    case Errc::bit_depth: return "bit_depth";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::malformed: return "malformed";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::label_out_of_range: return "label_out_of_range";
    case Errc::empty_proposal: return "empty_proposal";
    case Errc::eigensolver: return "eigensolver";
    case Errc::trainer_failure: return "trainer_failure";
    case Errc::timeout: return "timeout";
    case Errc::validation: return "validation";
  }
  return "unknown";
}

}  // namespace unseg
