#ifndef FILM_ERRORS_HPP
#define FILM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace film {

// Malformed or non-finite input data (CSV cells, signal samples).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown that valid inputs should never trigger.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Failures inside the training loop (non-finite loss, empty datasets).
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace film

#endif
