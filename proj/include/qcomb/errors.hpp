#ifndef QCOMB_ERRORS_HPP
#define QCOMB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qcomb {

// Base for all library failures. CLI maps NumericError -> exit 3,
// DataError -> exit 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct NotSymmetric : NumericError {
  using NumericError::NumericError;
};
struct NotPSD : NumericError {
  using NumericError::NumericError;
};
struct RankDeficientZ : NumericError {
  using NumericError::NumericError;
};
struct TauOutOfRange : NumericError {
  using NumericError::NumericError;
};
struct DimensionMismatch : NumericError {
  using NumericError::NumericError;
};
struct TooFewRows : NumericError {
  using NumericError::NumericError;
};
struct NonpositiveTrace : NumericError {
  using NumericError::NumericError;
};
struct AllColumnsDegenerate : NumericError {
  using NumericError::NumericError;
};
struct DimensionTooSmall : NumericError {
  using NumericError::NumericError;
};
struct DegeneratePValue : NumericError {
  using NumericError::NumericError;
};
struct SparsityOutOfRange : NumericError {
  using NumericError::NumericError;
};
struct NoConvergence : NumericError {
  using NumericError::NumericError;
};
struct AllReplicationsFailed : NumericError {
  using NumericError::NumericError;
};

struct FileNotFound : DataError {
  using DataError::DataError;
};
struct MissingColumn : DataError {
  using DataError::DataError;
};
struct BadValue : DataError {
  using DataError::DataError;
};
struct EmptyAfterFiltering : DataError {
  using DataError::DataError;
};
struct SubsampleTooLarge : DataError {
  using DataError::DataError;
};
struct InconsistentConfigs : DataError {
  using DataError::DataError;
};

}  // namespace qcomb

#endif  // QCOMB_ERRORS_HPP
