#include "shellcond/revolve.h"

#include "shellcond/errors.h"

#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace shellcond {

namespace {

// Adaptive Simpson with the standard |S_halves - S_whole|/15 error estimate.
double adaptiveSimpson(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0) throw SolveError("adaptive quadrature failed to converge");
  return adaptiveSimpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptiveSimpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return adaptiveSimpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double adc_axial_analytic(const RevolutionProfile& profile, double quadTolerance) {
  auto W = [&](double x) {
    double rp = profile.dR(x);
    return std::sqrt(1.0 + rp * rp);
  };
  double i1 = integrate([&](double x) { return W(x) / profile.R(x); }, -1, 1, quadTolerance);
  double i2 = integrate([&](double x) { return profile.R(x) * W(x); }, -1, 1, quadTolerance);
  return 4.0 / (i1 * i2);
}

double revolution_area(const RevolutionProfile& profile, double quadTolerance) {
  auto f = [&](double x) {
    double rp = profile.dR(x);
    return profile.R(x) * std::sqrt(1.0 + rp * rp);
  };
  return 2.0 * M_PI * integrate(f, -1, 1, quadTolerance);
}

PeriodicSurfaceMesh revolve_mesh(const RevolutionProfile& profile, int nx, int ntheta) {
  if (nx < 8 || ntheta < 8) throw InputError("revolve_mesh requires nx, ntheta >= 8");
  PeriodicSurfaceMesh m;
  m.vertices.reserve(static_cast<size_t>(nx) * ntheta);
  for (int i = 0; i < nx; ++i) {
    double x = -1.0 + 2.0 * i / nx;
    double r = profile.R(x);
    if (r >= 1.0) throw InputError("profile radius must stay below 1 to fit the cell");
    for (int j = 0; j < ntheta; ++j) {
      double th = 2.0 * M_PI * j / ntheta;
      m.vertices.emplace_back(x, r * std::cos(th), r * std::sin(th));
    }
  }
  auto vid = [&](int i, int j) { return (i % nx) * ntheta + (j % ntheta); };
  auto xshift = [&](int i) { return i >= nx ? Shift(1, 0, 0) : Shift(0, 0, 0); };
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ntheta; ++j) {
      // Quad (i,j)-(i+1,j)-(i+1,j+1)-(i,j+1); this winding makes the normals
      // point toward the axis.
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.faces.push_back({a, b, c});
      m.shifts.push_back({Shift::Zero(), xshift(i + 1), xshift(i + 1)});
      m.faces.push_back({a, c, d});
      m.shifts.push_back({Shift::Zero(), xshift(i + 1), Shift::Zero()});
    }
  }
  m.validateOrThrow();
  return m;
}

ShellConductivity effective_conductivity_shell(const RevolutionProfile& profile, double epsilon,
                                               int N, int M) {
  if (!(epsilon > 0)) throw InputError("epsilon must be positive");
  if (N < 16 || M < 4) throw InputError("shell grid requires N >= 16, M >= 4");

  const double dx = 2.0 / N;
  const double dz = 2.0 * epsilon / M;
  const int rows = M + 1;
  const int n = N * rows;
  auto idx = [&](int i, int j) { return j * N + ((i % N) + N) % N; };

  // Self-intersection guard: epsilon * max |principal curvature| < 1.
  for (int i = 0; i < N; ++i) {
    double x = -1.0 + i * dx;
    double rp = profile.dR(x);
    double W = std::sqrt(1.0 + rp * rp);
    double km = std::abs(profile.ddR(x)) / (W * W * W);
    double kc = 1.0 / (profile.R(x) * W);
    if (epsilon * std::max(km, kc) >= 1.0)
      throw InputError("offset shell self-intersects: epsilon * curvature >= 1");
  }

  // Nodal coefficients and quadrature weights.
  Eigen::VectorXd wq(n), c0(n), c1x(n), c1z(n), C2xx(n), C2zz(n);
  for (int j = 0; j < rows; ++j) {
    double z = -epsilon + j * dz;
    double zw = (j == 0 || j == M) ? dz / 2 : dz;
    for (int i = 0; i < N; ++i) {
      double x = -1.0 + i * dx;
      double R = profile.R(x), rp = profile.dR(x), rpp = profile.ddR(x);
      double W = std::sqrt(1.0 + rp * rp);
      double km = rpp / (W * W * W);
      double alpha = (1.0 + z * km) * W;
      double beta = R - z / W;
      if (!(alpha > 0) || !(beta > 0))
        throw InputError("offset shell self-intersects at x = " + std::to_string(x));
      int q = idx(i, j);
      wq[q] = dx * zw;
      c0[q] = alpha * beta;
      c1x[q] = 2.0 * beta / W;
      c1z[q] = 2.0 * alpha * beta * rp / W;
      C2xx[q] = beta / alpha;
      C2zz[q] = alpha * beta;
    }
  }

  // Sparse gradient operators: Dx central periodic, Dz central inside and
  // one-sided at the z boundaries.
  std::vector<Eigen::Triplet<double>> tx, tz;
  tx.reserve(2 * n);
  tz.reserve(2 * n);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < N; ++i) {
      int q = idx(i, j);
      tx.emplace_back(q, idx(i + 1, j), 1.0 / (2 * dx));
      tx.emplace_back(q, idx(i - 1, j), -1.0 / (2 * dx));
      if (j == 0) {
        tz.emplace_back(q, idx(i, 1), 1.0 / dz);
        tz.emplace_back(q, idx(i, 0), -1.0 / dz);
      } else if (j == M) {
        tz.emplace_back(q, idx(i, M), 1.0 / dz);
        tz.emplace_back(q, idx(i, M - 1), -1.0 / dz);
      } else {
        tz.emplace_back(q, idx(i, j + 1), 1.0 / (2 * dz));
        tz.emplace_back(q, idx(i, j - 1), -1.0 / (2 * dz));
      }
    }
  }
  Eigen::SparseMatrix<double> Dx(n, n), Dz(n, n);
  Dx.setFromTriplets(tx.begin(), tx.end());
  Dz.setFromTriplets(tz.begin(), tz.end());

  // E(s) = sum_q wq (c0 + c1 . Ds + Ds . C2 Ds) = const + b's + s'As. The
  // diagonal weights must be materialized: a lazy cwiseProduct inside the
  // sparse triple product sends Eigen down a quadratic insertion path.
  const Eigen::VectorXd wxx = wq.cwiseProduct(C2xx), wzz = wq.cwiseProduct(C2zz);
  Eigen::SparseMatrix<double> A =
      Eigen::SparseMatrix<double>(Dx.transpose() * wxx.asDiagonal() * Dx) +
      Eigen::SparseMatrix<double>(Dz.transpose() * wzz.asDiagonal() * Dz);
  Eigen::VectorXd b = Dx.transpose() * wq.cwiseProduct(c1x) + Dz.transpose() * wq.cwiseProduct(c1z);

  // A is PSD and singular (constants, plus the x-checkerboard mode the
  // central difference annihilates), but b is exactly orthogonal to the
  // nullspace, so the system A s = -b/2 is consistent. Regularize the
  // factorization with a relative diagonal shift and refine against A.
  Eigen::SparseMatrix<double> Areg = A;
  const double shift = 1e-12 * A.diagonal().mean();
  for (int q = 0; q < n; ++q) Areg.coeffRef(q, q) += shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Areg);
  if (ldlt.info() != Eigen::Success)
    throw SolveError("shell-grid factorization failed");
  Eigen::VectorXd rhs = -0.5 * b;
  Eigen::VectorXd s = ldlt.solve(rhs);
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd r = rhs - A * s;
    s += ldlt.solve(r);
  }
  double rhsNorm = rhs.norm();
  if (rhsNorm > 0) {
    double rel = (A * s - rhs).norm() / rhsNorm;
    if (!(rel <= 1e-10)) throw SolveError("shell-grid solve residual above tolerance");
  } else {
    s.setZero();
  }

  double energy = wq.dot(c0) + b.dot(s) + s.dot(A * s);
  ShellConductivity out;
  out.kappaEps = 2.0 * M_PI / 8.0 * energy;
  double area = revolution_area(profile, 1e-12);
  out.rhoEps = 2.0 * epsilon * area / 8.0;  // chi = 0 for a revolution tube
  out.grid.epsilon = epsilon;
  out.grid.N = N;
  out.grid.M = M;
  out.grid.s = std::move(s);
  return out;
}

}  // namespace shellcond
