#include "qcapgeo/lower_state.hpp"

#include "qcapgeo/entropy.hpp"

#include <chrono>
#include <cmath>

namespace qcapgeo {

namespace {

void check_param(const DensityOperator& rho, const InstrumentParam& p) {
  if (p.m_dim < 1) throw Error("instrument needs m_dim >= 1");
  const int a = rho.dims()[0];
  if (p.u.rows() != a * p.m_dim || p.u.cols() != a * p.m_dim) throw Error("instrument unitary has the wrong size");
}

struct Blocks {
  std::vector<Mat> kraus;
  std::vector<Mat> k_rho;  // (K_j ⊗ 1) ρ
  std::vector<Mat> x;      // σ_AB^j
  std::vector<Mat> y;      // σ_B^j
};

Blocks make_blocks(const DensityOperator& rho, const InstrumentParam& p) {
  check_param(rho, p);
  const int a = rho.dims()[0], b = rho.dim() / a;
  Blocks bl;
  bl.kraus = instrument_kraus(p);
  for (const Mat& k : bl.kraus) {
    Mat kr = apply_local(k, rho.mat(), 1, b);
    Mat x = hermitian_part(apply_local(k, kr.adjoint(), 1, b));
    bl.y.push_back(hermitian_part(partial_trace(x, {a, b}, {1})));
    bl.k_rho.push_back(std::move(kr));
    bl.x.push_back(std::move(x));
  }
  return bl;
}

}  // namespace

std::vector<Mat> instrument_kraus(const InstrumentParam& p) {
  const int m = p.m_dim;
  if (m < 1 || p.u.rows() % m != 0 || p.u.rows() != p.u.cols()) throw Error("instrument unitary has the wrong size");
  const int a = static_cast<int>(p.u.rows()) / m;
  std::vector<Mat> ks(m, Mat(a, a));
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < a; ++r)
      for (int c = 0; c < a; ++c) ks[j](r, c) = p.u(r * m + j, c * m);
  return ks;
}

double coh_state_cost(const DensityOperator& rho, const InstrumentParam& p) {
  Blocks bl = make_blocks(rho, p);
  double s = 0.0;
  for (size_t j = 0; j < bl.x.size(); ++j) s += von_neumann(bl.x[j]) - von_neumann(bl.y[j]);
  return s;
}

double coh_state_cost_dense(const DensityOperator& rho, const InstrumentParam& p) {
  Blocks bl = make_blocks(rho, p);
  const int a = rho.dims()[0], b = rho.dim() / a, m = p.m_dim;
  Mat sigma = Mat::Zero(a * b * m, a * b * m);
  for (int j = 0; j < m; ++j) sigma += tensor(bl.x[j], ket(m, j) * ket(m, j).adjoint());
  DensityOperator s(hermitian_part(sigma), {a, b, m});
  return -coherent_information_state(s, {0});
}

Mat coh_state_egrad(const DensityOperator& rho, const InstrumentParam& p, double* cost_out) {
  Blocks bl = make_blocks(rho, p);
  const int a = rho.dims()[0], b = rho.dim() / a, m = p.m_dim;
  Mat g = Mat::Zero(a * m, a * m);
  double cost = 0.0;
  for (int j = 0; j < m; ++j) {
    Eigh ex = eigh(bl.x[j]);
    Eigh ey = eigh(bl.y[j]);
    cost += entropy_from_eigenvalues(ex.values) - entropy_from_eigenvalues(ey.values);
    auto log_of = [](const Eigh& e) {
      RVec l = e.values.unaryExpr([](double v) { return std::log2(std::max(v, kLogFloor)); });
      return Mat(e.vectors * l.cast<cd>().asDiagonal() * e.vectors.adjoint());
    };
    Mat w = tensor(Mat::Identity(a, a), log_of(ey)) - log_of(ex);
    Mat gk = 2.0 * partial_trace(Mat(w * bl.k_rho[j]), {a, b}, {0});
    for (int r = 0; r < a; ++r)
      for (int c = 0; c < a; ++c) g(r * m + j, c * m) = gk(r, c);
  }
  if (cost_out) *cost_out = cost;
  return g;
}

TangentVector coh_state_grad(const DensityOperator& rho, const InstrumentParam& p, double* cost_out) {
  Mat x = coh_state_egrad(rho, p, cost_out);
  return {Mat(0.5 * (x - p.u * x.adjoint() * p.u))};
}

DensityOperator regroup_copies(const DensityOperator& rho, int n) {
  if (n < 1) throw Error("regroup_copies needs n >= 1");
  const int a = rho.dims()[0], b = rho.dim() / a;
  Mat big = rho.mat();
  for (int k = 1; k < n; ++k) big = tensor(big, rho.mat());
  Dims dims;
  std::vector<int> perm;
  for (int k = 0; k < n; ++k) {
    dims.push_back(a);
    dims.push_back(b);
  }
  for (int k = 0; k < n; ++k) perm.push_back(2 * k);
  for (int k = 0; k < n; ++k) perm.push_back(2 * k + 1);
  Mat out = n == 1 ? big : permute_systems(big, dims, perm);
  int an = 1, bn = 1;
  for (int k = 0; k < n; ++k) {
    an *= a;
    bn *= b;
  }
  return DensityOperator(hermitian_part(out), {an, bn});
}

InstrumentResult optimize_instrument(const DensityOperator& rho, int n_copies, int m_dim,
                                     const InstrumentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  if (rho.dims().size() != 2) throw Error("optimize_instrument needs a bipartite state");
  if (m_dim < 1 || n_copies < 1) throw Error("optimize_instrument needs n >= 1 and m >= 1");
  double total = m_dim;
  for (int k = 0; k < n_copies; ++k) total *= rho.dim();
  if (total > kInstrumentDimGuard) throw Error("optimize_instrument: |A|^n |B|^n m exceeds the memory guard");
  const DensityOperator big = regroup_copies(rho, n_copies);
  const int am = big.dims()[0] * m_dim;
  const Manifold man = Manifold::unitary(am);
  Objective obj;
  obj.value = [&](const ManifoldPoint& u) { return coh_state_cost(big, {u[0], m_dim}); };
  obj.gradient = [&](const ManifoldPoint& u) { return coh_state_grad(big, {u[0], m_dim}); };
  InstrumentResult res;
  res.report = multistart(cfg.restarts, cfg.seed, [&](int, std::uint64_t seed) {
    Rng rng(seed);
    return rgd(man, obj, random_point(man, rng), cfg.rgd);
  });
  const Mat id = Mat::Identity(am, am);
  const double base_cost = coh_state_cost(big, {id, m_dim});
  res.baseline_rate = -base_cost / n_copies;
  if (base_cost < res.report.best_value) {
    res.baseline_won = true;
    res.best = {id, m_dim};
    res.rate = res.baseline_rate;
  } else {
    res.best = {res.report.best_point[0], m_dim};
    res.rate = -res.report.best_value / n_copies;
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace qcapgeo
