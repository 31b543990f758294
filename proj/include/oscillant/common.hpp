#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace osc {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

// exit code 2
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : InputError {
  using InputError::InputError;
};
struct PreconditionError : InputError {
  using InputError::InputError;
};

// exit code 3
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MultiplicityError : NumericalError {
  using NumericalError::NumericalError;
};
struct NotApplicableError : NumericalError {
  using NumericalError::NumericalError;
};

enum class Exec { serial, parallel };

struct NumericPolicy {
  double identity_tol = 1e-10;   // algebraic identities, relative
  double group_tol = 1e-9;       // eigenvalue coalescence
  double char_tol = 1e-8;        // singular-value test for characteristic phases
  double root_tol = 1e-10;       // bisection target on resonance phases
  double root_accept = 1e-8;     // stored root residual bound
  double zero_coeff = 1e-8;      // transparent below this
  double nonzero_coeff = 1e-6;   // non-transparent above this times scale
  double degenerate_index = 1e-10;
};

NumericPolicy& policy();

// |Z| induced by the max vector norm: largest absolute row sum
double sup_norm(const MatC& z);
double sup_norm(const VecC& v);

int numerical_rank(const MatC& z, double rel_tol = 1e-8);

// OSCILLANT_THREADS caps OpenMP threads; returns the active count
int configure_threads();

// temp file + rename
void write_file_atomic(const std::string& path, const std::string& content);

std::vector<double> linspace(double a, double b, int n);

// least squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace osc
