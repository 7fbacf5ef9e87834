#include "netscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "netscat/format.hpp"

namespace netscat {

void ChannelCoupling::validate() const {
  if (!(gamma_in >= 0.0) || !(gamma_out >= 0.0) || !std::isfinite(gamma_in) ||
      !std::isfinite(gamma_out)) {
    throw InvalidParameter("channel coupling: rates must be finite and >= 0");
  }
}

RealMatrix coupling_operator(Index n_sites, const ChannelCoupling& c) {
  c.validate();
  RealMatrix w = RealMatrix::Zero(n_sites, 2);
  w(0, 0) = std::sqrt(c.gamma_in / 2.0);
  w(n_sites - 1, 1) = std::sqrt(c.gamma_out / 2.0);
  return w;
}

ComplexMatrix effective_hamiltonian(const RealMatrix& h, const ChannelCoupling& c) {
  c.validate();
  if (h.rows() != h.cols() || h.rows() < 2) {
    throw DimensionMismatch("effective_hamiltonian: need a square matrix with at least two sites");
  }
  const Index n = h.rows();
  ComplexMatrix heff = h.cast<Complex>();
  heff(0, 0) -= Complex(0.0, c.gamma_in / 2.0);
  heff(n - 1, n - 1) -= Complex(0.0, c.gamma_out / 2.0);
  return heff;
}

ComplexMatrix effective_hamiltonian(const NetworkHamiltonian& h, const ChannelCoupling& c) {
  return effective_hamiltonian(h.matrix, c);
}

ScatteringSystem::ScatteringSystem(const RealMatrix& h, const ChannelCoupling& c)
    : coupling_(c),
      heff_(netscat::effective_hamiltonian(h, c)),
      w_(coupling_operator(h.rows(), c).cast<Complex>()) {}

ChannelResponse ScatteringSystem::response(double energy) const {
  const Index n = heff_.rows();
  const ComplexMatrix a = Complex(energy, 0.0) * ComplexMatrix::Identity(n, n) - heff_;
  const ComplexMatrix gw = solve_linear(a, w_);
  const ComplexMatrix g2w = solve_linear(a, gw);
  const Complex two_i(0.0, 2.0);
  ChannelResponse r;
  r.s = Eigen::Matrix2cd::Identity() - two_i * (w_.transpose() * gw);
  r.ds_de = two_i * (w_.transpose() * g2w);
  return r;
}

Eigen::Matrix2cd ScatteringSystem::s_matrix(double energy) const { return response(energy).s; }

Eigen::Matrix2cd s_matrix(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy) {
  return ScatteringSystem(h, c).s_matrix(energy);
}

double transfer_probability(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy) {
  return std::norm(s_matrix(h, c, energy)(0, 1));
}

double dwell_time(const ChannelResponse& r) {
  const Complex s = r.s(0, 1);
  if (!(std::abs(s) > kVanishingAmplitude)) {
    throw VanishingAmplitude("dwell_time: |S_in,out| = " + std::to_string(std::abs(s)));
  }
  return (r.ds_de(0, 1) / s).imag();
}

double dwell_time(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy) {
  return dwell_time(ScatteringSystem(h, c).response(energy));
}

RealVector uniform_grid(double emin, double emax, Index n_points) {
  if (n_points < 1) throw InvalidParameter("uniform_grid: need at least one point");
  if (!(emax >= emin)) throw InvalidParameter("uniform_grid: emax must be >= emin");
  if (n_points == 1) return RealVector::Constant(1, emin);
  return RealVector::LinSpaced(n_points, emin, emax);
}

ScatteringResponse scan(const NetworkHamiltonian& h, const ChannelCoupling& c, const RealVector& grid) {
  if (grid.size() < 1) throw InvalidParameter("scan: empty energy grid");
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid(k) > grid(k - 1))) throw InvalidParameter("scan: energy grid must be ascending");
  }
  const ScatteringSystem sys(h, c);
  ScatteringResponse out;
  out.energies = grid;
  out.s_elem.resize(grid.size());
  out.p.resize(grid.size());
  out.tau.assign(static_cast<std::size_t>(grid.size()), std::nullopt);
  for (Index k = 0; k < grid.size(); ++k) {
    const ChannelResponse r = sys.response(grid(k));
    out.s_elem(k) = r.s(0, 1);
    out.p(k) = std::norm(r.s(0, 1));
    if (std::abs(r.s(0, 1)) > kVanishingAmplitude) {
      out.tau[static_cast<std::size_t>(k)] = (r.ds_de(0, 1) / r.s(0, 1)).imag();
    }
  }
  out.resonances = eig_complex(sys.effective_hamiltonian());
  return out;
}

Peak locate_peak(const ScatteringSystem& sys, double lo, double hi, Index n_coarse) {
  if (!(hi > lo)) throw InvalidParameter("locate_peak: empty interval");
  n_coarse = std::max<Index>(n_coarse, 3);
  auto p_at = [&](double e) { return std::norm(sys.s_matrix(e)(0, 1)); };
  const RealVector grid = uniform_grid(lo, hi, n_coarse);
  Index best = 0;
  double best_p = -1.0;
  for (Index k = 0; k < grid.size(); ++k) {
    const double p = p_at(grid(k));
    if (p > best_p) {
      best_p = p;
      best = k;
    }
  }
  double a = grid(std::max<Index>(best - 1, 0));
  double b = grid(std::min<Index>(best + 1, n_coarse - 1));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  double fc = p_at(c);
  double fd = p_at(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = p_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = p_at(d);
    }
  }
  const double e = 0.5 * (a + b);
  const double pe = p_at(e);
  if (pe >= best_p) return {e, pe};
  return {grid(best), best_p};
}

std::vector<Index> local_maxima(const RealVector& values) {
  std::vector<Index> out;
  const Index n = values.size();
  for (Index k = 1; k + 1 < n; ++k) {
    if (!(values(k) > values(k - 1))) continue;
    Index end = k;
    while (end + 1 < n && values(end + 1) == values(k)) ++end;
    if (end + 1 < n && values(end + 1) < values(k)) out.push_back(k);
    k = end;
  }
  return out;
}

void write_response_csv(std::ostream& os, const ScatteringResponse& r) {
  os << "E,p,tau,Re_S,Im_S\n";
  for (Index k = 0; k < r.size(); ++k) {
    const auto& tau = r.tau[static_cast<std::size_t>(k)];
    os << format_double(r.energies(k)) << ',' << format_double(r.p(k)) << ','
       << (tau ? format_double(*tau) : std::string{}) << ',' << format_double(r.s_elem(k).real())
       << ',' << format_double(r.s_elem(k).imag()) << '\n';
  }
}

nlohmann::json resonances_json(const ScatteringResponse& r) {
  auto arr = nlohmann::json::array();
  for (Index k = 0; k < r.resonances.size(); ++k) {
    arr.push_back({r.resonances.eigenvalues(k).real(), r.resonances.eigenvalues(k).imag()});
  }
  return arr;
}

}  // namespace netscat
