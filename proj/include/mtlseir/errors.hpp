#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtlseir {

/// Formula text did not conform to the grammar. `position()` is a 0-based
/// character offset into the input.
class ParseError : public std::invalid_argument {
public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Temporal bound with a > b.
class BoundError : public ParseError {
public:
  using ParseError::ParseError;
};

/// A trajectory is too short for the formula's horizon.
class HorizonError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// The dynamics left their domain of definition (non-finite input, a
/// vanishing transmission denominator, a blown-up state).
class ModelDomainError : public std::runtime_error {
public:
  ModelDomainError(const std::string& what, std::size_t step = 0)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// The inner optimizer produced a non-finite objective.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mtlseir
