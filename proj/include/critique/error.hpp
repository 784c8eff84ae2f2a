#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace critique {

enum class ErrorCode {
  Io,
  Parse,
  DuplicateId,
  InvalidArgument,
  EmptyCorpus,
  UnknownUser,
  UnknownItem,
  UnknownDestination,
  UnknownKeyphrase,
  PositiveNotSupported,
  NotCritiqued,
  VocabularyMismatch,
  NoSignal,
  WrongStatus,
  NotFound,
  BadRequest,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `line()` is set for errors that
/// point at a specific line of an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace critique
