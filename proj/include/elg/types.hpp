#ifndef ELG_TYPES_HPP
#define ELG_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace elg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Invalid user input (phantom ids, parameter bounds, malformed config). Exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Breakdown inside a numerical stage (singular system, non-finite iterate). Exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Step one produced no support; the pipeline cannot continue. Exit code 4.
struct EmptySupportError : std::runtime_error {
  explicit EmptySupportError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace elg

#endif
