#include "pnet/error.hpp"

namespace pnet {

const char* to_string(ParseError::Kind kind) noexcept {
  switch (kind) {
    case ParseError::Kind::malformed: return "malformed line";
    case ParseError::Kind::unknown_key: return "unknown key";
    case ParseError::Kind::dangling_reference: return "dangling input reference";
    case ParseError::Kind::cyclic_reference: return "cyclic input reference";
    case ParseError::Kind::duplicate_id: return "duplicate neuron id";
    case ParseError::Kind::no_output: return "no output";
  }
  return "parse error";
}

ParseError::ParseError(Kind kind, std::size_t line, const std::string& detail)
    : Error("line " + std::to_string(line) + ": " + to_string(kind) +
            (detail.empty() ? std::string() : ": " + detail)),
      kind_(kind),
      line_(line) {}

RunFailure::RunFailure(std::uint64_t seed, const std::string& what)
    : Error("run with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}

}  // namespace pnet
