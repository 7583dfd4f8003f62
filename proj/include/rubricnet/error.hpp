#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rubricnet {

enum class Errc {
  invalid_argument,
  invalid_tempo,
  empty_part,
  parse,
  unsupported_layout,
  load,
  io,
  checkpoint,
  numeric,
  encode,
  fit,
  analysis,
  contribution,
};

std::string_view to_string(Errc code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rubricnet
