#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace latnkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy shared across modules. Each kind maps to a CLI exit code:
// ConfigError -> 2, FormatError/InvalidData -> 3, numerical failures -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidData : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct TooLarge : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace latnkm
