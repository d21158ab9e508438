#pragma once

// Independent check of the CP^1 closed-form spectrum. The degree-0 Kohn
// Laplacian of weight m splits into S^1 sectors e^{i l phi}; in each sector
// with s = r^2/(1+r^2) the radial profile is r^|l| (1-s)^e P(s) with P a
// polynomial, and all Rayleigh-quotient integrands are polynomials in s, so
// Gauss-Legendre quadrature is exact.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crtorsion/errors.hpp"
#include "crtorsion/fit.hpp"
#include "crtorsion/geometry.hpp"
#include "crtorsion/local_density.hpp"
#include "crtorsion/spectra.hpp"

namespace crtorsion {

struct SpectralLevel {
  double lambda;
  int mult;
};

inline double cp1_candidate_lambda(int m, long k) { return static_cast<double>(k) * static_cast<double>(k + m + 1); }
inline int cp1_candidate_mult(int m, long k) { return static_cast<int>(m + 2 * k + 1); }

namespace detail {

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v = es.eigenvectors()(0, i);
    w[static_cast<std::size_t>(i)] = v * v;  // total mass 2 on [-1,1] -> 1 on [0,1]
  }
}

/// Orthonormal polynomials for the discrete measure (x, mu) via the
/// Stieltjes procedure; returns values and derivatives at the nodes.
inline void stieltjes_basis(const std::vector<double>& x, const std::vector<double>& mu, int degree, Eigen::MatrixXd& P,
                            Eigen::MatrixXd& dP) {
  const int n = static_cast<int>(x.size());
  P = Eigen::MatrixXd::Zero(n, degree + 1);
  dP = Eigen::MatrixXd::Zero(n, degree + 1);
  double mass = 0.0;
  for (double v : mu) mass += v;
  for (int i = 0; i < n; ++i) P(i, 0) = 1.0 / std::sqrt(mass);
  double b_prev = 0.0;
  for (int j = 0; j < degree; ++j) {
    double a = 0.0;
    for (int i = 0; i < n; ++i) a += mu[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] * P(i, j) * P(i, j);
    Eigen::VectorXd q(n), dq(n);
    for (int i = 0; i < n; ++i) {
      const double xi = x[static_cast<std::size_t>(i)];
      q(i) = (xi - a) * P(i, j) - (j > 0 ? b_prev * P(i, j - 1) : 0.0);
      dq(i) = P(i, j) + (xi - a) * dP(i, j) - (j > 0 ? b_prev * dP(i, j - 1) : 0.0);
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += mu[static_cast<std::size_t>(i)] * q(i) * q(i);
    const double b = std::sqrt(norm);
    P.col(j + 1) = q / b;
    dP.col(j + 1) = dq / b;
    b_prev = b;
  }
}

}  // namespace detail

/// Galerkin eigenvalues of sector l for weight m with polynomial degree <= degree.
inline std::vector<double> cp1_sector_eigenvalues(int m, int l, int degree) {
  if (m < 0) throw DomainError("cp1_sector_eigenvalues: m must be >= 0");
  const int al = std::abs(l);
  const int e = std::max({0, l - m, -l});
  const int nodes = degree + al + m + 2 * e + 8;
  std::vector<double> x, w;
  detail::gauss_legendre_01(nodes, x, w);

  // Mass weight 1/2 s^|l| (1-s)^{m+2e-|l|}.
  std::vector<double> mu(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    mu[i] = 0.5 * w[i] * std::pow(x[i], al) * std::pow(1.0 - x[i], m + 2 * e - al);
  Eigen::MatrixXd P, dP;
  detail::stieltjes_basis(x, mu, degree, P, dP);

  // Q = 1/2 int A(s) (u(s) P + v(s) P')^2 ds.
  Eigen::MatrixXd D(static_cast<Eigen::Index>(x.size()), degree + 1);
  std::vector<double> A(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i];
    double u = 0.0, v = 1.0;
    if (l < 0) {
      A[i] = std::pow(s, al - 1) * std::pow(1.0 - s, m + al + 1);
      u = al;
      v = s;
    } else if (l > m) {
      A[i] = std::pow(s, l + 1) * std::pow(1.0 - s, l - m - 1);
      u = -e;
      v = 1.0 - s;
    } else {
      A[i] = std::pow(s, l + 1) * std::pow(1.0 - s, m - l + 1);
    }
    const auto ii = static_cast<Eigen::Index>(i);
    D.row(ii) = u * P.row(ii) + v * dP.row(ii);
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Q.noalias() += (0.5 * w[i] * A[i]) * D.row(ii).transpose() * D.row(ii);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

/// Degree-0 levels below the closed-form level `levels` (exclusive), gathered
/// over sectors and clustered.
inline std::vector<SpectralLevel> cp1_galerkin_levels(int m, int levels, int degree, double cluster_tol = 1e-6) {
  const double cutoff = 0.5 * (cp1_candidate_lambda(m, levels - 1) + cp1_candidate_lambda(m, levels));
  std::vector<double> all;
  for (int l = -levels; l <= m + levels; ++l)
    for (double v : cp1_sector_eigenvalues(m, l, degree))
      if (v < cutoff) all.push_back(v);
  std::sort(all.begin(), all.end());
  std::vector<SpectralLevel> out;
  for (double v : all) {
    if (!out.empty() && std::abs(v - out.back().lambda) <= cluster_tol * (1.0 + std::abs(v))) {
      ++out.back().mult;
    } else {
      out.push_back({v, 1});
    }
  }
  return out;
}

struct Cp1OracleReport {
  bool passed = true;
  double max_eigen_error = 0.0;
  std::vector<int> kernel_dims;  // for m = 0..
  double heat_rel_error_minus1 = 0.0;
  double heat_rel_error_zero = 0.0;
  double heat_fit_rel_error = 0.0;
  std::string first_failure;

  void fail(const std::string& what) {
    if (passed) first_failure = what;
    passed = false;
  }
};

/// Compares Galerkin levels (basis degree = basis_factor * levels) with the
/// closed form for each m in ms.
inline void cp1_check_levels(Cp1OracleReport& rep, const std::vector<int>& ms, int levels, int basis_factor, double tol) {
  for (int m : ms) {
    const auto got = cp1_galerkin_levels(m, levels, basis_factor * levels);
    if (static_cast<int>(got.size()) != levels) {
      rep.fail("m=" + std::to_string(m) + ": found " + std::to_string(got.size()) + " levels");
      continue;
    }
    for (int k = 0; k < levels; ++k) {
      const double want = cp1_candidate_lambda(m, k);
      const double err = std::abs(got[static_cast<std::size_t>(k)].lambda - want) / std::max(1.0, want);
      rep.max_eigen_error = std::max(rep.max_eigen_error, err);
      if (err > tol) rep.fail("m=" + std::to_string(m) + " level " + std::to_string(k) + " eigenvalue");
      if (got[static_cast<std::size_t>(k)].mult != cp1_candidate_mult(m, k))
        rep.fail("m=" + std::to_string(m) + " level " + std::to_string(k) + " multiplicity");
    }
  }
}

/// Kernel dimension from Galerkin for m = 0..m_max.
inline void cp1_check_kernels(Cp1OracleReport& rep, int m_max, int degree) {
  for (int m = 0; m <= m_max; ++m) {
    int dim = 0;
    for (int l = -2; l <= m + 2; ++l)
      for (double v : cp1_sector_eigenvalues(m, l, degree))
        if (std::abs(v) < 1e-8) ++dim;
    rep.kernel_dims.push_back(dim);
    if (dim != m + 1) rep.fail("kernel dimension for m=" + std::to_string(m));
  }
}

/// Small-t coefficients of m^{-n} Tr^{(0)} e^{-(t/m) box} against the empty-set
/// model density times volume, at orders t^{-1} and t^0. Also fits the
/// sampled trace so the comparison does not rest on the law expansion alone.
inline void cp1_check_heat(Cp1OracleReport& rep, int m, long k_max, double tol) {
  const auto spec = cp1_spectrum(m, k_max);
  const auto geo = cp1_geometry();
  const auto model = model_density_coeffs(geo.levi, geo.rank_e, HalfInt::whole(1));
  const double want_m1 = model.entry(0).coeff(HalfInt::whole(-1)) * geo.volume;
  const double want_0 = model.entry(0).coeff(HalfInt::whole(0)) * geo.volume;

  const auto ex = heat_trace_degree_expansion(spec, 0, HalfInt::whole(2));
  const double mm = m;
  // m^{-1} sum B_e (t/m)^e
  const double got_m1 = ex.coeff(HalfInt::whole(-1));
  const double got_0 = ex.coeff(HalfInt::whole(0)) / mm;
  rep.heat_rel_error_minus1 = std::abs(got_m1 - want_m1) / std::abs(want_m1);
  rep.heat_rel_error_zero = std::abs(got_0 - want_0) / std::abs(want_0);
  if (rep.heat_rel_error_minus1 > tol) rep.fail("heat coefficient t^-1");
  if (rep.heat_rel_error_zero > tol) rep.fail("heat coefficient t^0");

  const auto ts = linspace(0.002, 0.05, 40);
  const auto samples = sample_function(
      [&](double t) { return heat_trace_degree(spec, 0, t / mm).value / mm; }, ts);
  const auto fit = fit_half_powers(samples, HalfInt::whole(-1), 5);
  const double fit_err = std::max(std::abs(fit.coeffs[0] - got_m1) / std::abs(got_m1),
                                  std::abs(fit.coeffs[2] - got_0) / std::abs(got_0));
  rep.heat_fit_rel_error = fit_err;
  if (fit_err > 1e-4) rep.fail("fitted heat coefficients disagree with the law expansion");
}

/// The full gate: levels for m in {0, 1, 2, 5, 8}, kernels for m = 0..8,
/// heat coefficients at m = 64.
inline Cp1OracleReport validate_cp1_closed_form(int levels = 10, int basis_factor = 4, double tol = 1e-6) {
  Cp1OracleReport rep;
  cp1_check_levels(rep, {0, 1, 2, 5, 8}, levels, basis_factor, tol);
  cp1_check_kernels(rep, 8, basis_factor * levels);
  cp1_check_heat(rep, 64, 4096, 0.02);
  return rep;
}

}  // namespace crtorsion
