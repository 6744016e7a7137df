#include "sarp/density_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "sarp/errors.hpp"

namespace sarp {

std::array<double, 4> DensityMatrix4::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
  std::array<double, 4> ev{};
  for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()[i];
  return ev;
}

void DensityMatrix4::validate(double herm_tol, double trace_tol,
                              double eig_floor) const {
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol) {
    std::ostringstream os;
    os << "DensityMatrix4: Hermiticity violated by " << herm;
    throw NumericalError(os.str());
  }
  const double tr = trace();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream os;
    os << "DensityMatrix4: trace " << tr << " deviates from 1";
    throw NumericalError(os.str());
  }
  const auto ev = eigenvalues();
  for (double e : ev) {
    if (e < eig_floor) {
      std::ostringstream os;
      os << "DensityMatrix4: negative eigenvalue " << e;
      throw NumericalError(os.str());
    }
  }
}

}  // namespace sarp
