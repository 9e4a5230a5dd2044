#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlport {

enum class ErrorKind {
  InvalidArgument,
  DegenerateNormalization,
  DegenerateMoments,
  NonConvergence,
  RankDeficient,
  SingularSubmodel,
  InvalidFoldCount,
  AllInfeasible,
  SingularPopulation,
  ZeroRiskPortfolio,
  InsufficientSamples,
  DegenerateSeries,
  ParseError,
  MissingValue,
  DuplicateAssetLabel,
  ConfigError,
  IoError,
};

constexpr std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorKind::DegenerateMoments: return "DegenerateMoments";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularSubmodel: return "SingularSubmodel";
    case ErrorKind::InvalidFoldCount: return "InvalidFoldCount";
    case ErrorKind::AllInfeasible: return "AllInfeasible";
    case ErrorKind::SingularPopulation: return "SingularPopulation";
    case ErrorKind::ZeroRiskPortfolio: return "ZeroRiskPortfolio";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::DuplicateAssetLabel: return "DuplicateAssetLabel";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failures keep the 1-based (row, column) of the offending cell.
class ParseFailure : public Error {
 public:
  ParseFailure(ErrorKind kind, std::size_t row, std::size_t column, const std::string& what)
      : Error(kind, what + " at row " + std::to_string(row) + ", column " + std::to_string(column)),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace mlport
