#include "rkdecouple/spectral_diagnostics.hpp"

#include <cmath>
#include <limits>
#include <iostream>
#include <numbers>

#include "rkdecouple/errors.hpp"

namespace rkdecouple {

namespace {

using cplx = std::complex<double>;

struct DenseBlocks {
  Eigen::MatrixXcd B, C, M;
};

DenseBlocks dense_blocks(const CoupledSystem& sys, Eigen::Index max_dim) {
  DenseBlocks blk;
  blk.M = dense_schur(sys, max_dim).cast<cplx>();
  blk.B = Eigen::MatrixXd(sys.B->matrix()).cast<cplx>();
  blk.C = Eigen::MatrixXd(sys.C->matrix()).cast<cplx>();
  return blk;
}

Eigen::MatrixXcd kron_dense(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd l_zeta_from_blocks(const DenseBlocks& blk, const ButcherTableau& tab, const DelayScheme& delay,
                                    double tau, cplx zeta) {
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(tab.s, tab.s);
  const Eigen::MatrixXcd Delta = delta_operator(tab, zeta);
  const Eigen::MatrixXcd inner = blk.C + delay_symbol(delay, zeta) * blk.M;
  return kron_dense(I, blk.B) + kron_dense(Delta / tau, inner);
}

double min_re_eig(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  return es.eigenvalues().real().minCoeff();
}

}  // namespace

Eigen::MatrixXcd assemble_L_zeta(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay,
                                 double tau, cplx zeta, Eigen::Index max_dim) {
  if (!(tau > 0.0)) throw DomainError("assemble_L_zeta: tau must be positive");
  return l_zeta_from_blocks(dense_blocks(sys, max_dim), tab, delay, tau, zeta);
}

double sigma_min(const Eigen::MatrixXcd& M) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues().minCoeff();
}

SpectralProbe l_zeta_sweep(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay, double tau,
                           const SweepOptions& opts) {
  if (opts.n_samples < 8) throw DomainError("l_zeta_sweep: need at least 8 samples");
  const DenseBlocks blk = dense_blocks(sys, opts.max_dim);
  SpectralProbe probe;
  probe.mu = pencil_eigenvalues(sys, opts.max_dim).maxCoeff();
  probe.min_sigma = std::numeric_limits<double>::infinity();
  const double h = 2.0 * std::numbers::pi / opts.n_samples;
  for (int j = 0; j < opts.n_samples; ++j) {
    const double th = h * j;
    const cplx zeta = std::polar(1.0, th);
    const double sm = sigma_min(l_zeta_from_blocks(blk, tab, delay, tau, zeta));
    probe.theta.push_back(th);
    probe.sigma_min.push_back(sm);
    probe.delta_min_re_eig.push_back(min_re_eig(delta_operator(tab, zeta)));
    probe.re_one_plus_mu_delta.push_back(std::real(1.0 + probe.mu * delay_symbol(delay, zeta)));
    if (sm < probe.min_sigma) {
      probe.min_sigma = sm;
      probe.argmin_theta = th;
    }
  }
  if (opts.refine_near_pi) {
    for (int j = -8; j <= 8; ++j) {
      const double th = std::numbers::pi + j * h / 4.0;
      const double sm = sigma_min(l_zeta_from_blocks(blk, tab, delay, tau, std::polar(1.0, th)));
      probe.refined_theta.push_back(th);
      probe.refined_sigma_min.push_back(sm);
      if (sm < probe.min_sigma) {
        probe.min_sigma = sm;
        probe.argmin_theta = th;
      }
    }
  }
  return probe;
}

double contraction_rate_fs(double omega, double L) {
  if (omega < 0.0 || L < 0.0) throw DomainError("contraction_rate_fs: omega and L must be >= 0");
  return std::max(L, omega - L) / (1.0 + L);
}

double contraction_rate_us(double omega, double L) {
  if (omega < 0.0 || L < 0.0) throw DomainError("contraction_rate_us: omega and L must be >= 0");
  return omega * std::max(L, 1.0 - L) / (1.0 + L * omega);
}

RateFit estimate_rate(const std::vector<std::pair<double, double>>& rows) {
  std::vector<double> x, y;
  for (const auto& [tau, err] : rows) {
    if (!(err > 0.0) || !(tau > 0.0)) {
      std::cerr << "warning: estimate_rate skips row tau=" << tau << " error=" << err << "\n";
      continue;
    }
    x.push_back(std::log(tau));
    y.push_back(std::log(err));
  }
  if (x.size() < 3) throw DomainError("estimate_rate: fewer than 3 usable rows");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.used = static_cast<int>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(y[i] - (my + fit.slope * (x[i] - mx))));
  return fit;
}

void ConvergenceReport::add_column(std::string name, std::vector<double> errs) {
  if (errs.size() != tau.size()) throw DomainError("ConvergenceReport: column length differs from tau list");
  std::vector<std::pair<double, double>> rows;
  for (std::size_t i = 0; i < tau.size(); ++i) rows.emplace_back(tau[i], errs[i]);
  fits.push_back(estimate_rate(rows));
  columns.push_back(std::move(name));
  errors.push_back(std::move(errs));
}

void ConvergenceReport::validate() const {
  for (std::size_t i = 1; i < tau.size(); ++i) {
    if (!(tau[i] < tau[i - 1])) throw DomainError("ConvergenceReport: tau must be strictly decreasing");
    if (i >= 2 && std::abs(tau[i] / tau[i - 1] - tau[1] / tau[0]) > 1e-12)
      throw DomainError("ConvergenceReport: tau sequence is not geometric");
  }
}

Eigen::VectorXcd assemble_R_zeta(const CoupledSystem& sys, const ButcherTableau& tab, const DelayScheme& delay,
                                 double tau, cplx zeta, const StageSequenceData& data) {
  const Eigen::Index s = tab.s, np = sys.n_p, nu = sys.n_u;
  if (static_cast<int>(data.history.size()) < delay.k)
    throw DomainError("assemble_R_zeta: history shorter than the delay order");
  Eigen::MatrixXcd Fz = Eigen::MatrixXcd::Zero(nu, s), Gz = Eigen::MatrixXcd::Zero(np, s);
  cplx zn = 1.0;
  for (std::size_t n = 0; n < data.F.size(); ++n) {
    zn *= zeta;
    Fz += zn * data.F[n].cast<cplx>();
    Gz += zn * data.G[n].cast<cplx>();
  }
  // sum_d c_d sum_{n=1}^{d} P^{n-d} zeta^n, with P^{n-d} = history[d-n]
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(np, s);
  for (int d = 1; d <= delay.k; ++d) {
    cplx zp = 1.0;
    for (int n = 1; n <= d; ++n) {
      zp *= zeta;
      phi += delay.coeffs[d - 1] * zp * data.history[d - n].cast<cplx>();
    }
  }
  const Eigen::MatrixXd Dd = Eigen::MatrixXd(sys.D);
  const Eigen::MatrixXcd DAinvF = (Dd * sys.A->solve(Eigen::MatrixXd(Fz.real()))).cast<cplx>() +
                                  cplx(0, 1) * (Dd * sys.A->solve(Eigen::MatrixXd(Fz.imag()))).cast<cplx>();
  const Eigen::MatrixXcd M = dense_schur(sys).cast<cplx>();
  const Eigen::MatrixXcd DeltaT = delta_operator(tab, zeta).transpose();
  const Eigen::VectorXcd a1 = (tab.A_inv * Eigen::VectorXd::Ones(s)).cast<cplx>();
  const Eigen::VectorXcd w0 = (sys.D * data.u0 + sys.C->apply(data.p0)).cast<cplx>();
  const cplx z0 = zeta / (1.0 - tab.r_infinity * zeta);

  Eigen::MatrixXcd R = Gz - (DAinvF * DeltaT) / tau - (M * phi * DeltaT) / tau + (z0 / tau) * (w0 * a1.transpose());
  return Eigen::Map<Eigen::VectorXcd>(R.data(), R.size());
}

std::vector<StageVector> reconstruct_pressure_sequence(const CoupledSystem& sys, const ButcherTableau& tab,
                                                       const DelayScheme& delay, double tau,
                                                       const StageSequenceData& data, int n_steps,
                                                       int n_samples) {
  if (n_samples < 2 * n_steps) throw DomainError("reconstruct_pressure_sequence: too few samples");
  const DenseBlocks blk = dense_blocks(sys, 200);
  const Eigen::Index s = tab.s, np = sys.n_p;
  std::vector<Eigen::VectorXcd> acc(n_steps, Eigen::VectorXcd::Zero(s * np));
  for (int m = 0; m < n_samples; ++m) {
    const double th = 2.0 * std::numbers::pi * m / n_samples;
    const cplx zeta = std::polar(1.0, th);
    const Eigen::MatrixXcd L = l_zeta_from_blocks(blk, tab, delay, tau, zeta);
    const Eigen::VectorXcd Pz = L.partialPivLu().solve(assemble_R_zeta(sys, tab, delay, tau, zeta, data));
    for (int n = 1; n <= n_steps; ++n) acc[n - 1] += std::polar(1.0, -th * n) * Pz;
  }
  std::vector<StageVector> out;
  for (int n = 0; n < n_steps; ++n) {
    const Eigen::VectorXd re = acc[n].real() / n_samples;
    out.emplace_back(Eigen::Map<const Eigen::MatrixXd>(re.data(), np, s));
  }
  return out;
}

}  // namespace rkdecouple
