#pragma once

#include <Eigen/Dense>

#include "poromix/thermo.hpp"

namespace poromix::testing {

inline ComponentSpec methane() {
  return {"CH4", 190.56, 45.99e5, 0.011, 0.01604, 1.1e-5};
}
inline ComponentSpec ethane() {
  return {"C2H6", 305.32, 48.72e5, 0.099, 0.03007, 0.9e-5};
}
inline ComponentSpec carbon_dioxide() {
  return {"CO2", 304.14, 73.75e5, 0.239, 0.04401, 1.5e-5};
}

inline MixtureSpec binary_co2_ch4(double temperature = 300.0, double iota = 0.0) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 2);
  k(0, 1) = k(1, 0) = iota;
  return MixtureSpec({carbon_dioxide(), methane()}, k, temperature);
}

inline MixtureSpec ternary(double temperature = 300.0) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3, 3);
  k(0, 1) = k(1, 0) = 0.005;  // CH4-C2H6
  k(0, 2) = k(2, 0) = 0.1;    // CH4-CO2
  k(1, 2) = k(2, 1) = 0.13;   // C2H6-CO2
  return MixtureSpec({methane(), ethane(), carbon_dioxide()}, k, temperature);
}

inline MixtureSpec pure(const ComponentSpec& spec, double temperature = 300.0) {
  return MixtureSpec({spec}, Eigen::MatrixXd::Zero(1, 1), temperature);
}

}  // namespace poromix::testing
