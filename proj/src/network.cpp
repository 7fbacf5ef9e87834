#include "netscat/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "netscat/rng.hpp"

namespace netscat {

void NetworkParams::validate() const {
  if (n_sites < 2 || n_sites % 2 != 0) {
    throw InvalidParameter("network: n_sites must be even and >= 2, got " + std::to_string(n_sites));
  }
  if (!(bulk_scale >= 0.0) || !(link_scale >= 0.0)) {
    throw InvalidParameter("network: bulk_scale and link_scale must be >= 0");
  }
  if (!std::isfinite(onsite_energy) || !std::isfinite(direct_coupling) ||
      !std::isfinite(bulk_scale) || !std::isfinite(link_scale)) {
    throw InvalidParameter("network: parameters must be finite");
  }
}

RealMatrix exchange_operator(Index n_sites) {
  if (n_sites < 1) throw InvalidParameter("exchange_operator: n_sites must be positive");
  return RealMatrix::Identity(n_sites, n_sites).rowwise().reverse();
}

bool is_centrosymmetric(const RealMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(n - 1 - i, n - 1 - j)) > tol) return false;
    }
  }
  return true;
}

NetworkHamiltonian build_deterministic(const NetworkParams& params, const RealVector& v,
                                       const RealMatrix& bulk) {
  params.validate();
  const Index n = params.n_sites;
  const Index m = n - 2;
  if (v.size() != m || bulk.rows() != m || bulk.cols() != m) {
    throw DimensionMismatch("build_deterministic: expected v of length " + std::to_string(m) +
                            " and a " + std::to_string(m) + "x" + std::to_string(m) + " bulk block");
  }
  if (m > 0) {
    const double scale = std::max(1.0, max_abs(bulk));
    if (!is_symmetric(bulk)) throw InvalidParameter("build_deterministic: bulk block is not symmetric");
    if (!is_centrosymmetric(bulk, 1e-12 * scale)) {
      throw CentrosymmetryViolation("build_deterministic: bulk block does not commute with J");
    }
  }

  NetworkHamiltonian h;
  h.params = params;
  h.v = v;
  // Every entry takes the value of its orbit representative under transpose
  // and centro-reflection, so J H J == H holds bit-for-bit.
  h.bulk.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Index mi = m - 1 - i, mj = m - 1 - j;
      const auto rep = std::min({std::pair(i, j), std::pair(j, i), std::pair(mi, mj), std::pair(mj, mi)});
      h.bulk(i, j) = bulk(rep.first, rep.second);
    }
  }

  h.matrix = RealMatrix::Zero(n, n);
  h.matrix(0, 0) = params.onsite_energy;
  h.matrix(n - 1, n - 1) = params.onsite_energy;
  h.matrix(0, n - 1) = params.direct_coupling;
  h.matrix(n - 1, 0) = params.direct_coupling;
  if (m > 0) {
    h.matrix.block(1, 1, m, m) = h.bulk;
    h.matrix.row(0).segment(1, m) = v.transpose();
    h.matrix.col(0).segment(1, m) = v;
    h.matrix.row(n - 1).segment(1, m) = v.reverse().transpose();
    h.matrix.col(n - 1).segment(1, m) = v.reverse();
  }
  return h;
}

NetworkHamiltonian sample_random(const NetworkParams& params, std::uint64_t seed) {
  params.validate();
  const Index n = params.n_sites;
  const Index m = n - 2;
  const double dim = static_cast<double>(n);
  const double offdiag_sd = params.bulk_scale / std::sqrt(dim);
  const double diag_sd = params.bulk_scale * std::sqrt(2.0 / dim);
  const double link_sd = params.link_scale / std::sqrt(dim);

  RandomStream rng(seed);

  // Each orbit of {(i,j), (j,i), (m-1-i,m-1-j), (m-1-j,m-1-i)} receives one
  // draw, taken at its lexicographically smallest upper-triangle member.
  RealMatrix bulk = RealMatrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      const std::pair<Index, Index> mirror{m - 1 - j, m - 1 - i};
      if (mirror < std::pair(i, j)) continue;
      const double x = rng.normal(0.0, i == j ? diag_sd : offdiag_sd);
      bulk(i, j) = bulk(j, i) = x;
      bulk(mirror.first, mirror.second) = bulk(mirror.second, mirror.first) = x;
    }
  }
  RealVector v(m);
  for (Index i = 0; i < m; ++i) v(i) = rng.normal(0.0, link_sd);

  NetworkParams realized = params;
  if (params.sample_onsite) realized.onsite_energy = rng.normal(0.0, diag_sd);

  NetworkHamiltonian h = build_deterministic(realized, v, bulk);
  h.seed = seed;
  return h;
}

RealMatrix symmetry_basis(Index n_sites) {
  if (n_sites < 2 || n_sites % 2 != 0) {
    throw InvalidParameter("symmetry_basis: n_sites must be even and >= 2");
  }
  const Index half = n_sites / 2;
  const double r = 1.0 / std::sqrt(2.0);
  RealMatrix q = RealMatrix::Zero(n_sites, n_sites);
  // Pair a (a = 0 is the input/output doublet) couples sites a and N-1-a.
  for (Index a = 0; a < half; ++a) {
    const Index lo = a;
    const Index hi = n_sites - 1 - a;
    q(lo, a) = r;
    q(hi, a) = r;
    q(lo, half + a) = r;
    q(hi, half + a) = -r;
  }
  return q;
}

SymmetryBlocks decompose_symmetry(const RealMatrix& h) {
  if (h.rows() != h.cols() || h.rows() < 2 || h.rows() % 2 != 0) {
    throw DimensionMismatch("decompose_symmetry: expected an even-dimensional square matrix");
  }
  const double scale = std::max(1.0, max_abs(h));
  if (!is_centrosymmetric(h, 1e-12 * scale)) {
    throw CentrosymmetryViolation("decompose_symmetry: matrix does not commute with J");
  }
  const Index n = h.rows();
  const Index k = n / 2 - 1;  // bulk pairs per sector

  SymmetryBlocks b;
  b.plus_energy = h(0, 0) + h(0, n - 1);
  b.minus_energy = h(0, 0) - h(0, n - 1);
  b.v_plus.resize(k);
  b.v_minus.resize(k);
  b.h_plus.resize(k, k);
  b.h_minus.resize(k, k);
  for (Index a = 0; a < k; ++a) {
    const Index site = a + 1;
    const Index mirror = n - 1 - site;
    b.v_plus(a) = h(0, site) + h(0, mirror);
    b.v_minus(a) = h(0, site) - h(0, mirror);
    for (Index c = 0; c < k; ++c) {
      const Index s2 = c + 1;
      const Index m2 = n - 1 - s2;
      b.h_plus(a, c) = h(site, s2) + h(site, m2);
      b.h_minus(a, c) = h(site, s2) - h(site, m2);
    }
  }
  return b;
}

SymmetryBlocks decompose_symmetry(const NetworkHamiltonian& h) { return decompose_symmetry(h.matrix); }

RealMatrix sector_matrix(const SymmetryBlocks& blocks, Sector sector) {
  const bool plus = sector == Sector::Plus;
  const RealVector& v = plus ? blocks.v_plus : blocks.v_minus;
  const RealMatrix& sub = plus ? blocks.h_plus : blocks.h_minus;
  const Index k = sub.rows();
  RealMatrix s(k + 1, k + 1);
  s(0, 0) = plus ? blocks.plus_energy : blocks.minus_energy;
  s.row(0).tail(k) = v.transpose();
  s.col(0).tail(k) = v;
  s.bottomRightCorner(k, k) = sub;
  return s;
}

RealMatrix reassemble(const SymmetryBlocks& blocks) {
  const Index half = blocks.sector_dim();
  const Index n = 2 * half;
  RealMatrix diag = RealMatrix::Zero(n, n);
  diag.topLeftCorner(half, half) = sector_matrix(blocks, Sector::Plus);
  diag.bottomRightCorner(half, half) = sector_matrix(blocks, Sector::Minus);
  const RealMatrix q = symmetry_basis(n);
  return q * diag * q.transpose();
}

void to_json(nlohmann::json& j, const NetworkParams& p) {
  j = nlohmann::json{{"N", p.n_sites},
                     {"E_prime", p.onsite_energy},
                     {"V", p.direct_coupling},
                     {"xi", p.bulk_scale},
                     {"chi", p.link_scale},
                     {"sample_onsite", p.sample_onsite}};
}

void from_json(const nlohmann::json& j, NetworkParams& p) {
  p.n_sites = j.at("N").get<int>();
  p.onsite_energy = j.value("E_prime", 0.0);
  p.direct_coupling = j.value("V", 1.0);
  p.bulk_scale = j.value("xi", 0.0);
  p.link_scale = j.value("chi", 0.0);
  p.sample_onsite = j.value("sample_onsite", false);
}

void to_json(nlohmann::json& j, const NetworkHamiltonian& h) {
  to_json(j, h.params);
  j["E_prime"] = h.onsite_energy();
  j["V"] = h.direct_coupling();
  j["v"] = std::vector<double>(h.v.data(), h.v.data() + h.v.size());
  std::vector<double> bulk;
  bulk.reserve(static_cast<std::size_t>(h.bulk.size()));
  for (Index r = 0; r < h.bulk.rows(); ++r) {
    for (Index c = 0; c < h.bulk.cols(); ++c) bulk.push_back(h.bulk(r, c));
  }
  j["bulk"] = bulk;
  if (h.seed) {
    j["seed"] = *h.seed;
  } else {
    j["seed"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, NetworkHamiltonian& h) {
  NetworkParams p;
  from_json(j, p);
  const Index m = p.n_sites - 2;
  const auto v = j.value("v", std::vector<double>{});
  const auto bulk = j.value("bulk", std::vector<double>{});
  if (static_cast<Index>(v.size()) != m || static_cast<Index>(bulk.size()) != m * m) {
    throw DimensionMismatch("network json: v/bulk sizes do not match N");
  }
  RealVector vv = Eigen::Map<const RealVector>(v.data(), m);
  RealMatrix bb(m, m);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < m; ++c) bb(r, c) = bulk[static_cast<std::size_t>(r * m + c)];
  }
  h = build_deterministic(p, vv, bb);
  if (j.contains("seed") && !j.at("seed").is_null()) h.seed = j.at("seed").get<std::uint64_t>();
}

}  // namespace netscat
