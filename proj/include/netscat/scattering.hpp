#ifndef NETSCAT_SCATTERING_HPP
#define NETSCAT_SCATTERING_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "netscat/network.hpp"

namespace netscat {

// Input channel attached to site 0 with rate gamma_in, output channel to
// site N-1 with rate gamma_out. The centrosymmetric model uses equal rates.
struct ChannelCoupling {
  double gamma_in = 0.0;
  double gamma_out = 0.0;

  static ChannelCoupling symmetric(double gamma) { return {gamma, gamma}; }
  void validate() const;
};

// S-matrix over the channel pair (in, out) together with dS/dE.
struct ChannelResponse {
  Eigen::Matrix2cd s;
  Eigen::Matrix2cd ds_de;
};

// H_eff = H - i (Gamma/2)|in><in| - i (Gamma'/2)|out><out|.
ComplexMatrix effective_hamiltonian(const RealMatrix& h, const ChannelCoupling& c);
ComplexMatrix effective_hamiltonian(const NetworkHamiltonian& h, const ChannelCoupling& c);

// W as an N x 2 matrix; column 0 is the input channel.
RealMatrix coupling_operator(Index n_sites, const ChannelCoupling& c);

// Evaluates S(E) = 1 - 2i W^T (E - H_eff)^{-1} W and its energy derivative
// 2i W^T (E - H_eff)^{-2} W for a fixed open system.
class ScatteringSystem {
 public:
  ScatteringSystem(const RealMatrix& h, const ChannelCoupling& c);
  ScatteringSystem(const NetworkHamiltonian& h, const ChannelCoupling& c)
      : ScatteringSystem(h.matrix, c) {}

  ChannelResponse response(double energy) const;
  Eigen::Matrix2cd s_matrix(double energy) const;

  const ComplexMatrix& effective_hamiltonian() const { return heff_; }
  const ChannelCoupling& coupling() const { return coupling_; }
  Index size() const { return heff_.rows(); }

 private:
  ChannelCoupling coupling_;
  ComplexMatrix heff_;
  ComplexMatrix w_;
};

// Minimum |S_in,out| at which the dwell time is evaluated.
inline constexpr double kVanishingAmplitude = 1e-12;

Eigen::Matrix2cd s_matrix(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy);

// |S_in,out(E)|^2
double transfer_probability(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy);

// Im{ S_in,out^{-1} dS_in,out/dE }. Throws VanishingAmplitude where
// |S_in,out| <= kVanishingAmplitude.
double dwell_time(const NetworkHamiltonian& h, const ChannelCoupling& c, double energy);
double dwell_time(const ChannelResponse& r);

struct ScatteringResponse {
  RealVector energies;
  ComplexVector s_elem;                     // S_in,out
  RealVector p;                             // |S_in,out|^2
  std::vector<std::optional<double>> tau;   // empty where the amplitude vanishes
  Spectrum<Complex> resonances;             // eigenvalues of H_eff

  Index size() const { return energies.size(); }
};

// n points from emin to emax inclusive; n == 1 yields {emin}.
RealVector uniform_grid(double emin, double emax, Index n_points);

ScatteringResponse scan(const NetworkHamiltonian& h, const ChannelCoupling& c, const RealVector& grid);

// Location and height of the largest transfer probability in [lo, hi]:
// coarse grid of `n_coarse` points followed by golden-section refinement.
struct Peak {
  double energy = 0.0;
  double p = 0.0;
};
Peak locate_peak(const ScatteringSystem& sys, double lo, double hi, Index n_coarse = 401);

// Indices of interior local maxima of a sampled profile. A flat top counts
// once, at its first point.
std::vector<Index> local_maxima(const RealVector& values);

// CSV with header E,p,tau,Re_S,Im_S. Missing tau is written as an empty field.
void write_response_csv(std::ostream& os, const ScatteringResponse& r);

// Resonance eigenvalues as [[re, im], ...].
nlohmann::json resonances_json(const ScatteringResponse& r);

}  // namespace netscat

#endif  // NETSCAT_SCATTERING_HPP
