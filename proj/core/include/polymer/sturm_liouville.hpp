#pragma once

#include <vector>

#include "polymer/charge_model.hpp"

namespace polymer {

struct SLGrid {
  // defaults sized so the half-resolution gap stays below 1e-5 max(1,|chi|)
  double x_max = 30.0;  // truncation of (0,infinity)
  int points = 12000;   // cell-centered nodes x_i = (i+1/2) h
  double spacing() const { return x_max / points; }
};

struct SLSolution {
  double a = 0.0, b = 0.0;
  double chi = 0.0;
  std::vector<double> eigfun;  // positive, unit L2 norm (trapezoid)
  SLGrid grid;
  double refinement_gap = 0.0;  // |chi_m - chi_{m/2}| at the final domain
};

/// Largest eigenvalue chi(a,b) and ground state of the operator
///   (L g)(x) = (2ax - 4bx^2) g(x) + g'(x) + x g''(x)
/// on (0,infinity), discretized in the self-adjoint form (x g')' + V g on a
/// cell-centered grid. The flux coefficient x vanishes at x = 0, which gives
/// the natural zero-flux condition there; Dirichlet at x_max. The domain is
/// doubled automatically while the eigenfunction carries more than 1e-8 of
/// its mass within 5h of the right boundary.
SLSolution chi(double a, double b, SLGrid grid = {});

/// Unique root of a -> chi(a,b); bisection to |chi| <= tol.
double a_star(double b, double tol = 1e-8, SLGrid grid = {});

struct ScalingConstants {
  double a_delta;  // a_star(rho_delta)
  double b_delta;  // 1 / [d chi / d a] at (a_star(rho_delta), rho_delta)
  double c_delta;  // -d/d delta of a_star(rho_delta)
};

/// Weak-interaction scaling constants of the free energy, speed and charge.
ScalingConstants scaling_constants(const ChargeModel& model, double delta, SLGrid grid = {});

}  // namespace polymer
