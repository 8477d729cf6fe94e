#pragma once

#include "shellcond/mesh.h"
#include "shellcond/profile.h"

#include <Eigen/Dense>

namespace shellcond {

// Closed-form axial ADC of the revolution surface with radius profile R:
//   kappa_A(e1) = 4 / ( int_{-1}^{1} sqrt(1+R'^2)/R dx * int_{-1}^{1} R sqrt(1+R'^2) dx ),
// each integral by adaptive Simpson quadrature to quadTolerance. Lies in
// (0,1] by Cauchy-Schwarz; equals 1 exactly for cylinders.
double adc_axial_analytic(const RevolutionProfile& profile, double quadTolerance);

// Surface area of the revolution surface, 2*pi * int R sqrt(1+R'^2) dx,
// by the same adaptive quadrature.
double revolution_area(const RevolutionProfile& profile, double quadTolerance);

// Structured tube mesh: nx x-divisions (periodic, wrap shifts in x) by
// ntheta angular divisions, quads split into triangles, vertices exactly on
// the parameterized surface, faces wound so normals point toward the axis.
// Requires max R < 1 so the tube fits the cell. chi = 0 always.
PeriodicSurfaceMesh revolve_mesh(const RevolutionProfile& profile, int nx, int ntheta);

// Nodal finite-difference grid for the shell cell problem.
struct ShellGrid {
  double epsilon = 0;
  int N = 0, M = 0;
  Eigen::VectorXd s;  // N*(M+1) nodal unknowns, x fastest
};

struct ShellConductivity {
  double kappaEps = 0;  // effective axial conductivity of the thickened shell
  double rhoEps = 0;    // volume fraction of the shell in the cell
  ShellGrid grid;
};

// Semi-analytical effective conductivity of the shell of half-thickness
// epsilon around the revolution surface, axial direction, base conductivity 1.
//
// Derivation of the reduced integrand (the offset-shell metric is diagonal):
// with W = sqrt(1+R'^2), meridian curvature factor km = R''/W^3, the offset
// point is r(x,theta) + z n, and
//   |d/dx|   = alpha := (1 + z km) W,
//   |d/dth|  = R - z/W =: beta   (per unit angle),
//   sqrt(g)  = alpha beta.
// For p = e1 the covariant components are (alpha/W, 0, R'/W), the solution is
// axisymmetric u = s(x,z), and the energy density per unit angle reduces to
//   c0 + c1 . grad s + grad s . C2 grad s,
//   c0 = alpha beta,  c1 = (2 beta / W, 2 alpha beta R'/W),
//   C2 = diag(beta/alpha, alpha beta),
// so kappa_eps = (2 pi / 8) min_s int int (...) dz dx. Gradients are central
// differences (periodic in x), one-sided at the z boundaries; the z
// quadrature weight is dz/2 at j = 0 and j = M.
//
// Throws InputError when the offset shell would self-intersect
// (epsilon * max principal curvature >= 1).
ShellConductivity effective_conductivity_shell(const RevolutionProfile& profile, double epsilon,
                                               int N, int M);

}  // namespace shellcond
