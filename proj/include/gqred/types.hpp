#ifndef GQRED_TYPES_HPP
#define GQRED_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gqred {

using Real = double;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using IVec = Eigen::VectorXi;
using IMat = Eigen::MatrixXi;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;
inline constexpr Real kTwoPi = 2.0 * kPi;

// Exact rational, used for the moment-map shift so lift checks stay exact.
struct Rational {
  long long num = 0;
  long long den = 1;

  Real value() const { return static_cast<Real>(num) / static_cast<Real>(den); }
};

// Error taxonomy mapped to CLI exit codes: validation -> 2, numeric -> 3.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gqred

#endif
