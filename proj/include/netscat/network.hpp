#ifndef NETSCAT_NETWORK_HPP
#define NETSCAT_NETWORK_HPP

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "netscat/numerics.hpp"

namespace netscat {

struct NetworkParams {
  int n_sites = 2;
  double onsite_energy = 0.0;    // E' of the input and output sites
  double direct_coupling = 1.0;  // V between input and output
  double bulk_scale = 0.0;       // xi
  double link_scale = 0.0;       // chi
  bool sample_onsite = false;    // draw E' ~ Normal(0, 2 xi^2 / N)

  void validate() const;
};

// Centrosymmetric network Hamiltonian. Site 0 is the input, site N-1 the
// output; `v` couples the input to bulk sites 1..N-2 (the output couples to
// them in reverse order) and `bulk` is the (N-2)x(N-2) interior block.
struct NetworkHamiltonian {
  RealMatrix matrix;
  NetworkParams params;
  RealVector v;
  RealMatrix bulk;
  std::optional<std::uint64_t> seed;

  Index size() const { return matrix.rows(); }
  double onsite_energy() const { return matrix(0, 0); }
  double direct_coupling() const { return matrix(0, matrix.rows() - 1); }
};

// The Hamiltonian conjugated into the eigenbasis of the exchange operator.
// Each sector is ordered (doublet state, bulk pair states); bulk pair a in
// sector +/- is (|a+1> +/- |N-2-a>)/sqrt(2).
struct SymmetryBlocks {
  double plus_energy = 0.0;   // <+|H|+> = E' + V
  double minus_energy = 0.0;  // <-|H|-> = E' - V
  RealVector v_plus;
  RealVector v_minus;
  RealMatrix h_plus;
  RealMatrix h_minus;

  Index sector_dim() const { return 1 + h_plus.rows(); }
};

enum class Sector { Plus, Minus };

// J_ij = 1 iff i + j = n - 1.
RealMatrix exchange_operator(Index n_sites);

bool is_centrosymmetric(const RealMatrix& m, double tol = 0.0);

NetworkHamiltonian build_deterministic(const NetworkParams& params, const RealVector& v,
                                       const RealMatrix& bulk);

// Draws bulk couplings ~ Normal(0, (1+delta_ij) xi^2/N) on a fundamental
// domain of transpose + centro-reflection and mirrors them, v_i ~ Normal(0,
// chi^2/N), and E' ~ Normal(0, 2 xi^2/N) when params.sample_onsite. The
// realized E' is written back into the returned params.
NetworkHamiltonian sample_random(const NetworkParams& params, std::uint64_t seed);

// Orthogonal change of basis whose columns are (|+>, plus bulk pairs, |->,
// minus bulk pairs).
RealMatrix symmetry_basis(Index n_sites);

SymmetryBlocks decompose_symmetry(const NetworkHamiltonian& h);
SymmetryBlocks decompose_symmetry(const RealMatrix& h);

// Inverse of decompose_symmetry: back to the site basis.
RealMatrix reassemble(const SymmetryBlocks& blocks);

// Full sector block [[E'+-V, <V+-|], [|V+-|>, H_sub+-]].
RealMatrix sector_matrix(const SymmetryBlocks& blocks, Sector sector);

void to_json(nlohmann::json& j, const NetworkParams& p);
void from_json(const nlohmann::json& j, NetworkParams& p);
void to_json(nlohmann::json& j, const NetworkHamiltonian& h);
void from_json(const nlohmann::json& j, NetworkHamiltonian& h);

}  // namespace netscat

#endif  // NETSCAT_NETWORK_HPP
