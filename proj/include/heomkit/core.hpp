#ifndef HEOMKIT_CORE_HPP
#define HEOMKIT_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace heomkit
{

using cplx = std::complex<double>;

// Square complex matrix; used for system operators and (auxiliary) density matrices.
using Matrix = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

enum class ErrorCode
{
    invalid_argument = 1,
    dimension_mismatch,
    degenerate_parameter,
    not_converged,
    numerical_failure,
    budget_exceeded,
    io_failure,
};

class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what)
{
    if(!cond) fail(ErrorCode::invalid_argument, what);
}

// [A, B]
inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
// {A, B}
inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

inline double hermiticity_residue(const Matrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix& m, double tol = 1e-12)
{
    return m.rows() == m.cols() && hermiticity_residue(m) <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

// coth(x) for x > 0, with the small-argument series below 1e-4.
inline double coth(double x)
{
    if(x < 1e-4) return 1.0 / x + x / 3.0;
    return 1.0 / std::tanh(x);
}

// coth(omega / 2T) for omega > 0; T = 0 gives 1.
inline double thermal_factor(double omega, double temperature)
{
    if(temperature == 0.0) return 1.0;
    return coth(omega / (2.0 * temperature));
}

}  // namespace heomkit

#endif
