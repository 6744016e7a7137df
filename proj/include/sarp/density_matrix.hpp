#pragma once

#include <Eigen/Dense>
#include <array>

namespace sarp {

// Basis order of the four-level ladder.
enum Level : int { kG = 0, kXH = 1, kXV = 2, kXX = 3 };

enum class Pol { H, V };

inline Level exciton_level(Pol p) { return p == Pol::H ? kXH : kXV; }

// 4x4 density matrix over (g, X_H, X_V, XX).
struct DensityMatrix4 {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();

  static DensityMatrix4 pure(Level l) {
    DensityMatrix4 r;
    r.m(l, l) = 1.0;
    return r;
  }

  double population(Level l) const { return m(l, l).real(); }
  std::complex<double> coherence(Level a, Level b) const { return m(a, b); }
  double trace() const { return m.trace().real(); }
  double purity() const { return (m * m).trace().real(); }

  std::array<double, 4> eigenvalues() const;

  // Throws NumericalError if Hermiticity, unit trace or positivity are
  // violated beyond the given tolerances.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-8,
                double eig_floor = -1e-9) const;
};

}  // namespace sarp
