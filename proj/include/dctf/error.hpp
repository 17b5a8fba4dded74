#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dctf {

// Base for everything the library throws on bad input or broken invariants.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or non-canonical bytes in a sequence, predictor, or image file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A predictor gave zero mass to a symbol that was actually observed.
class ZeroProbabilityError : public Error {
 public:
  ZeroProbabilityError(std::size_t element_index, const std::string& factor)
      : Error("predictor assigned zero probability to " + factor + " of element " +
              std::to_string(element_index)),
        element_index_(element_index),
        factor_(factor) {}

  std::size_t element_index() const noexcept { return element_index_; }
  const std::string& factor() const noexcept { return factor_; }

 private:
  std::size_t element_index_;
  std::string factor_;
};

}  // namespace dctf
