#pragma once

#include <stdexcept>
#include <string>

namespace scatlimit {

// Every failure mode the library reports derives from Error so callers (the
// CLI in particular) can map them onto exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SCATLIMIT_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  };

SCATLIMIT_DEFINE_ERROR(InvalidModel)
SCATLIMIT_DEFINE_ERROR(QuadratureNonConvergence)
SCATLIMIT_DEFINE_ERROR(GridTooCoarse)
SCATLIMIT_DEFINE_ERROR(AliasingError)
SCATLIMIT_DEFINE_ERROR(LengthError)
SCATLIMIT_DEFINE_ERROR(ResolutionError)
SCATLIMIT_DEFINE_ERROR(OutOfExtent)
SCATLIMIT_DEFINE_ERROR(InsufficientReplicates)
SCATLIMIT_DEFINE_ERROR(RankUndetermined)
SCATLIMIT_DEFINE_ERROR(RankViolation)
SCATLIMIT_DEFINE_ERROR(NonInvertibleCDF)
SCATLIMIT_DEFINE_ERROR(TailTruncationError)
SCATLIMIT_DEFINE_ERROR(EvenOrderRequired)
SCATLIMIT_DEFINE_ERROR(BetaOutOfRange)
SCATLIMIT_DEFINE_ERROR(SizeLimit)
SCATLIMIT_DEFINE_ERROR(CouplingViolation)
SCATLIMIT_DEFINE_ERROR(ShapeError)
SCATLIMIT_DEFINE_ERROR(SampleTooSmall)
SCATLIMIT_DEFINE_ERROR(NotRegular)

#undef SCATLIMIT_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("parse error at row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Raised by config handling; key_path names the offending entry, e.g. "model.beta".
class UsageError : public Error {
 public:
  UsageError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace scatlimit
