#include "qcapgeo/entropy.hpp"

#include <cmath>
#include <limits>

namespace qcapgeo {

double entropy_from_eigenvalues(const RVec& lambda) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    double l = lambda(i);
    if (l > kLogFloor) h -= l * std::log2(l);
  }
  return h;
}

double von_neumann(const Mat& m) { return entropy_from_eigenvalues(eigvalsh(m)); }

double von_neumann(const DensityOperator& rho) { return von_neumann(rho.mat()); }

double coherent_information_state(const DensityOperator& rho, const std::vector<int>& a_systems) {
  const int n = static_cast<int>(rho.dims().size());
  std::vector<bool> in_a(n, false);
  for (int a : a_systems) {
    if (a < 0 || a >= n) throw Error("coherent information: bad subsystem index");
    in_a[a] = true;
  }
  std::vector<int> b;
  for (int k = 0; k < n; ++k)
    if (!in_a[k]) b.push_back(k);
  double hb = b.empty() ? 0.0 : von_neumann(partial_trace(rho.mat(), rho.dims(), b));
  return hb - von_neumann(rho.mat());
}

double coherent_information_channel(const DensityOperator& rho, const ChannelRep& ch) {
  if (rho.dim() != ch.in_dim()) throw Error("coherent information: input dimension mismatch");
  Dims d{rho.dim()};
  double hb = von_neumann(apply_channel(ch, rho.mat(), d, 0));
  double he = von_neumann(apply_channel(complementary(ch), rho.mat(), d, 0));
  return hb - he;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("binary entropy: p outside [0,1]");
  double h = 0.0;
  if (p > 0) h -= p * std::log2(p);
  if (p < 1) h -= (1 - p) * std::log2(1 - p);
  return h;
}

double bosonic_entropy(double p) {
  if (!(p >= 0.0)) throw Error("bosonic entropy: p must be nonnegative");
  return (1 + p) * binary_entropy(p / (1 + p));
}

double relative_entropy(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw Error("relative entropy: dimension mismatch");
  Eigh er = eigh(hermitian_part(rho));
  Eigh es = eigh(hermitian_part(sigma));
  for (Eigen::Index i = 0; i < er.values.size(); ++i) {
    if (er.values(i) <= 1e-10) continue;
    double expect = (er.vectors.col(i).adjoint() * sigma * er.vectors.col(i))(0, 0).real();
    if (expect <= 1e-12) return std::numeric_limits<double>::infinity();
  }
  RVec ls(es.values.size());
  for (Eigen::Index i = 0; i < ls.size(); ++i) ls(i) = std::log2(std::max(es.values(i), kLogFloor));
  // Tr ρ log σ = Σ_k log σ_k ⟨s_k|ρ|s_k⟩
  Mat rho_in_s = es.vectors.adjoint() * rho * es.vectors;
  double cross = 0.0;
  for (Eigen::Index k = 0; k < ls.size(); ++k) cross += ls(k) * rho_in_s(k, k).real();
  return -entropy_from_eigenvalues(er.values) - cross;
}

double amortized_gap(const ChannelRep& ch, const DensityOperator& rho, const DensityOperator& sigma) {
  const int d = ch.in_dim();
  if (rho.dims() != Dims{d, d} || sigma.dims() != Dims{d, d})
    throw Error("amortized_gap: states must live on E⊗A with E ≅ A");
  Mat omega = apply_channel(ch, rho.mat(), {d, d}, 1);
  Mat sigma_a = partial_trace(sigma.mat(), {d, d}, {1});
  Mat tau = tensor(Mat::Identity(d, d), apply_channel(ch, sigma_a, {d}, 0));
  double d1 = relative_entropy(omega, tau);
  double d0 = relative_entropy(rho.mat(), sigma.mat());
  if (std::isinf(d0)) return std::isinf(d1) ? std::numeric_limits<double>::quiet_NaN()
                                            : -std::numeric_limits<double>::infinity();
  return d1 - d0;
}

}  // namespace qcapgeo
