#pragma once

#include <stdexcept>
#include <string>

namespace tlqr {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Studies in a collection (or paired vectors) disagree on dimensions.
struct DimensionMismatch : Error {
  using Error::Error;
};

// A matrix or vector contains NaN or infinite entries.
struct NonFinite : Error {
  using Error::Error;
};

struct EmptyDataset : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Hyperparameter grid passed to cross-validation is empty.
struct EmptyGrid : Error {
  using Error::Error;
};

// Not enough observations for the requested split or fold count.
struct TooFewSamples : Error {
  using Error::Error;
};

// Sample size too small to evaluate a bandwidth formula.
struct InvalidSize : Error {
  using Error::Error;
};

// Estimated error density at zero fell below the usability floor.
// `study` is the offending study index (0 = target, 1..K = sources),
// or -1 when not tied to a particular study.
struct DegenerateDensity : Error {
  int study;
  explicit DegenerateDensity(const std::string& msg, int study_index = -1)
      : Error(msg), study(study_index) {}
};

struct ZeroBaselineLoss : Error {
  using Error::Error;
};

// m outside [1, K] in the known-size detection variant.
struct InvalidM : Error {
  using Error::Error;
};

// Toeplitz band 2k exceeds the dimension p.
struct BandTooWide : Error {
  using Error::Error;
};

// Covariance matrix is not positive semi-definite.
struct NotPSD : Error {
  using Error::Error;
};

// A feature index has no category in a group map.
struct MissingCategory : Error {
  using Error::Error;
};

// Malformed input file (CSV or JSON); message carries file and line.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace tlqr
