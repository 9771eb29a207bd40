#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fpv {

enum class Errc {
  MalformedHeader,
  MalformedLine,
  DuplicatePoint,
  EmptySet,
  ImageTooSmall,
  NoForeground,
  EmptyTrainingSet,
  UntrainedMap,
  TooFewPoints,
  MissingCore,
  SingletonGraph,
  DuplicateId,
  UnknownId,
  ZeroTrials,
  ConfigInfeasible,
  EmptyScenario,
  InvalidArgument,
  Io,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::DuplicatePoint: return "DuplicatePoint";
    case Errc::EmptySet: return "EmptySet";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::NoForeground: return "NoForeground";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::UntrainedMap: return "UntrainedMap";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::MissingCore: return "MissingCore";
    case Errc::SingletonGraph: return "SingletonGraph";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::UnknownId: return "UnknownId";
    case Errc::ZeroTrials: return "ZeroTrials";
    case Errc::ConfigInfeasible: return "ConfigInfeasible";
    case Errc::EmptyScenario: return "EmptyScenario";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an fpv::Error carrying a
/// machine-checkable code. Parse errors also carry the 1-based line number.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), line_(line) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace fpv
