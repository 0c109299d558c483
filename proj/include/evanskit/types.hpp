#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace evanskit {

using cplx = std::complex<double>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;
using CMat = MatX<cplx>;
using CVec = VecX<cplx>;

/// Base for every named failure raised by the toolkit.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

#define EVANSKIT_ERROR(Name)                                                   \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {}             \
  };

EVANSKIT_ERROR(NotStrictlyHyperbolic)
EVANSKIT_ERROR(DegenerateField)
EVANSKIT_ERROR(NonDissipative)
EVANSKIT_ERROR(SingularRelaxation)
EVANSKIT_ERROR(NoEndpoint)
EVANSKIT_ERROR(NoConnection)
EVANSKIT_ERROR(WrongFormulation)
EVANSKIT_ERROR(SingularViscosity)
EVANSKIT_ERROR(SingularA)
EVANSKIT_ERROR(NotParabolic)
EVANSKIT_ERROR(SplittingFailure)
EVANSKIT_ERROR(BranchCrossing)
EVANSKIT_ERROR(DegenerateMode)
EVANSKIT_ERROR(IntegrationFailure)
EVANSKIT_ERROR(ContourTooCoarse)
EVANSKIT_ERROR(ZeroOnContour)
EVANSKIT_ERROR(ExpansionDomainExceeded)
EVANSKIT_ERROR(CertificateFailure)
EVANSKIT_ERROR(GapTooSmall)
EVANSKIT_ERROR(NoContraction)
EVANSKIT_ERROR(UnknownSystem)

#undef EVANSKIT_ERROR

}  // namespace evanskit
