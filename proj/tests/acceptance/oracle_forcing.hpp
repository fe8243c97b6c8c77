// Generated by tests/oracles/forcing_codegen.py; do not edit.
#pragma once

#include <array>
#include <cmath>

namespace alpinn::oracle {

using std::cos;
using std::pow;
using std::sin;
using std::sqrt;

inline double disk_forcing(double x1, double x2) {
  const double t0 = M_PI*x2;
  const double t1 = sin(t0);
  const double t2 = M_PI*x1;
  const double t3 = sin(t2);
  const double t4 = pow(M_PI, 2)*(pow(x1, 2) + pow(x2, 2) - 1);
  return 10*t1*(4*t2*cos(t2) - t3*t4 + 2*t3) + 10*t3*(4*t0*cos(t0) - t1*t4 + 2*t1);
}

inline double fisher_forcing(double x1, double x2, double x3) {
  const double t0 = sin(M_PI*x2);
  const double t1 = M_PI*x1;
  const double t2 = sin(t1);
  const double t3 = 2*t1;
  const double t4 = sin(t3);
  const double t5 = t2*t4;
  const double t6 = M_PI*x3;
  const double t7 = sin(t6);
  const double t8 = 3*t6;
  const double t9 = sin(t8);
  const double t10 = t7*t9;
  const double t11 = pow(M_PI, 2);
  return 5*t0*(10*t0*pow(t2, 2)*pow(t4, 2)*pow(t7, 2)*pow(t9, 2) - 8*t10*t11*cos(t1)*cos(t3) - t10*t5 + 32*t11*t2*t4*t7*t9 - 12*t11*t5*cos(t6)*cos(t8));
}

inline double heat_forcing(double x1, double x2, double x3) {
  const double t0 = 2*M_PI;
  const double t1 = sin(t0*x1);
  const double t2 = sin(t0*x2);
  return 16*pow(M_PI, 2)*t1*t2*x3*(x3 + 1) - 2*t1*t2 - 2;
}

inline std::array<double, 3> pipe_forcing(double x1, double x2, double x3) {
  const double t0 = M_PI*x1;
  const double t1 = 2*x2 - 1;
  const double t2 = 2*x3 - 1;
  const double t3 = pow(t1, 2) + pow(t2, 2);
  const double t4 = sqrt(t3);
  const double t5 = (125.0/52.0)*(pow(M_PI, 2)*t3 - 42)*sin(t0)/t4;
  return {-1875.0/52.0*M_PI*t4*cos(t0), t1*t5, t2*t5};
}

}  // namespace alpinn::oracle
