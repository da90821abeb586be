#include "qcapgeo/lower_channel.hpp"

#include "qcapgeo/entropy.hpp"

#include <chrono>
#include <cmath>

namespace qcapgeo {

std::vector<int> ansatz_pairs(int n) {
  if (n < 1) throw Error("ansatz needs n >= 1");
  std::vector<int> out;
  for (int k = 1; k <= n; ++k) out.push_back(k - 1);
  for (int k = n + 1; k <= 2 * n - 1; ++k) out.push_back(2 * n - 1 - k);
  return out;
}

Dims ansatz_site_dims(int r_dim, int a_dim, int n) {
  Dims d{r_dim};
  for (int k = 0; k < n; ++k) d.push_back(a_dim);
  return d;
}

Manifold ansatz_manifold(int r_dim, int a_dim, int n) {
  Dims d = ansatz_site_dims(r_dim, a_dim, n);
  std::vector<Manifold> parts;
  for (int i : ansatz_pairs(n)) parts.push_back(Manifold::unitary(d[i] * d[i + 1]));
  return Manifold::product(parts);
}

AnsatzParam ansatz_from_point(const ManifoldPoint& u, int r_dim, int a_dim, int n) {
  AnsatzParam p{u, r_dim, a_dim, n};
  Dims d = ansatz_site_dims(r_dim, a_dim, n);
  auto pairs = ansatz_pairs(n);
  if (u.size() != pairs.size()) throw Error("ansatz needs 2n-1 unitaries");
  for (size_t k = 0; k < pairs.size(); ++k) {
    const int pd = d[pairs[k]] * d[pairs[k] + 1];
    if (u[k].rows() != pd || u[k].cols() != pd) throw Error("ansatz unitary has the wrong size");
  }
  return p;
}

namespace {

struct PairGeom {
  int left, pair, right;
};

std::vector<PairGeom> pair_geometry(const AnsatzParam& p) {
  Dims d = ansatz_site_dims(p.r_dim, p.a_dim, p.n_copies);
  std::vector<PairGeom> out;
  for (int i : ansatz_pairs(p.n_copies)) {
    int left = 1, right = 1;
    for (int j = 0; j < i; ++j) left *= d[j];
    for (int j = i + 2; j < static_cast<int>(d.size()); ++j) right *= d[j];
    out.push_back({left, d[i] * d[i + 1], right});
  }
  return out;
}

// Tr over the complement of a site pair of |g⟩⟨φ|.
Mat reduce_pair(const Vec& g, const Vec& phi, const PairGeom& geo) {
  using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat out = Mat::Zero(geo.pair, geo.pair);
  const Eigen::Index blk = static_cast<Eigen::Index>(geo.pair) * geo.right;
  for (int l = 0; l < geo.left; ++l) {
    Eigen::Map<const RowMat> gl(g.data() + l * blk, geo.pair, geo.right);
    Eigen::Map<const RowMat> pl(phi.data() + l * blk, geo.pair, geo.right);
    out.noalias() += gl * pl.adjoint();
  }
  return out;
}

}  // namespace

Vec ansatz_vector(const AnsatzParam& p) {
  auto geo = pair_geometry(p);
  if (p.u_list.size() != geo.size()) throw Error("ansatz needs 2n-1 unitaries");
  Vec x = Vec::Zero(static_cast<Eigen::Index>(geo[0].left) * geo[0].pair * geo[0].right);
  x(0) = 1.0;
  for (size_t k = 0; k < geo.size(); ++k) x = apply_local(p.u_list[k], x, geo[k].left, geo[k].right);
  return x;
}

PureStateVector ansatz_state(const AnsatzParam& p) {
  Vec x = ansatz_vector(p);
  return PureStateVector(x / x.norm(), ansatz_site_dims(p.r_dim, p.a_dim, p.n_copies));
}

CopyChannel::CopyChannel(const ChannelRep& ch, int n, int r_dim) : n_(n), r_(r_dim) {
  if (n < 1 || r_dim < 1) throw Error("copy channel needs n >= 1 and |R| >= 1");
  a_ = ch.in_dim();
  b_ = ch.out_dim();
  double total = r_dim * std::pow(double(b_), n);
  if (total > kCodeDimGuard) throw Error("memory guard: |R|·|B|^n exceeds 2^13");
  std::vector<Mat> ks = kraus_from_choi(choi(ch).mat, a_, b_);
  e_ = static_cast<int>(ks.size());
  v_ = Mat::Zero(b_ * e_, a_);
  for (int k = 0; k < e_; ++k)
    for (int y = 0; y < b_; ++y) v_.row(y * e_ + k) = ks[k].row(y);
}

namespace {
int ipow(int b, int n) {
  int r = 1;
  for (int k = 0; k < n; ++k) r *= b;
  return r;
}
}  // namespace

Mat CopyChannel::dilate(const Vec& psi) const {
  if (psi.size() != static_cast<Eigen::Index>(r_) * ipow(a_, n_)) throw Error("code state dimension mismatch");
  Mat x = psi;
  for (int j = 1; j <= n_; ++j) x = apply_local(v_, x, r_ * ipow(b_ * e_, j - 1), ipow(a_, n_ - j));
  Dims expanded{r_};
  std::vector<int> perm{0};
  for (int j = 0; j < n_; ++j) {
    expanded.push_back(b_);
    expanded.push_back(e_);
    perm.push_back(1 + 2 * j);
  }
  for (int j = 0; j < n_; ++j) perm.push_back(2 + 2 * j);
  Vec y = permute_systems(Vec(x.col(0)), expanded, perm);
  const int rb = r_ * ipow(b_, n_), en = ipow(e_, n_);
  return Eigen::Map<const Mat>(y.data(), en, rb).transpose();
}

Vec CopyChannel::undilate(const Mat& m) const {
  const int rb = r_ * ipow(b_, n_), en = ipow(e_, n_);
  Mat mt = m.transpose();
  Vec y = Eigen::Map<const Vec>(mt.data(), static_cast<Eigen::Index>(rb) * en);
  Dims grouped{r_};
  for (int j = 0; j < n_; ++j) grouped.push_back(b_);
  for (int j = 0; j < n_; ++j) grouped.push_back(e_);
  // inverse of the interleaving used in dilate()
  std::vector<int> perm{0};
  for (int j = 0; j < n_; ++j) {
    perm.push_back(1 + j);
    perm.push_back(1 + n_ + j);
  }
  Mat x = permute_systems(y, grouped, perm);
  const Mat vd = v_.adjoint();
  for (int j = n_; j >= 1; --j) x = apply_local(vd, x, r_ * ipow(b_ * e_, j - 1), ipow(a_, n_ - j));
  return x.col(0);
}

namespace {
Mat marginal_b(const Mat& m, int r, int bn) {
  Mat rho = Mat::Zero(bn, bn);
  for (int k = 0; k < r; ++k) rho.noalias() += m.middleRows(k * bn, bn) * m.middleRows(k * bn, bn).adjoint();
  return hermitian_part(rho);
}

Mat gram_small(const Mat& m) {
  return m.rows() <= m.cols() ? hermitian_part(m * m.adjoint()) : hermitian_part(m.adjoint() * m);
}
}  // namespace

double CopyChannel::cost(const Vec& psi) const {
  Mat m = dilate(psi);
  const int bn = ipow(b_, n_);
  return von_neumann(gram_small(m)) - von_neumann(marginal_b(m, r_, bn));
}

Vec CopyChannel::gradient(const Vec& psi, double* cost_out) const {
  Mat m = dilate(psi);
  const int bn = ipow(b_, n_);
  Mat rho_b = marginal_b(m, r_, bn);
  Eigh eb = eigh(rho_b);
  RVec lb(eb.values.size());
  for (Eigen::Index i = 0; i < lb.size(); ++i) lb(i) = std::log2(std::max(eb.values(i), kLogFloor));
  Mat log_b = eb.vectors * lb.asDiagonal() * eb.vectors.adjoint();
  Mat y(m.rows(), m.cols());
  for (int k = 0; k < r_; ++k) y.middleRows(k * bn, bn).noalias() = log_b * m.middleRows(k * bn, bn);
  // log(MM†) M = M log(M†M); use whichever Gram matrix is smaller.
  Eigh eg = eigh(gram_small(m));
  RVec lg(eg.values.size());
  for (Eigen::Index i = 0; i < lg.size(); ++i) lg(i) = std::log2(std::max(eg.values(i), kLogFloor));
  Mat log_g = eg.vectors * lg.asDiagonal() * eg.vectors.adjoint();
  if (m.rows() <= m.cols())
    y.noalias() -= log_g * m;
  else
    y.noalias() -= m * log_g;
  if (cost_out) *cost_out = entropy_from_eigenvalues(eg.values) - entropy_from_eigenvalues(eb.values);
  return 2.0 * undilate(y);
}

Mat CopyChannel::output(const Vec& psi) const {
  Mat m = dilate(psi);
  return hermitian_part(m * m.adjoint());
}

double code_state_cost(const ChannelRep& ch, int n, int r_dim, const Vec& psi) {
  return CopyChannel(ch, n, r_dim).cost(psi);
}

Vec psi_gradient(const ChannelRep& ch, int n, int r_dim, const Vec& psi) {
  return CopyChannel(ch, n, r_dim).gradient(psi);
}

double coh_channel_cost(const ChannelRep& ch, const AnsatzParam& p) {
  if (p.a_dim != ch.in_dim()) throw Error("ansatz input dimension differs from the channel");
  return CopyChannel(ch, p.n_copies, p.r_dim).cost(ansatz_vector(p));
}

TangentVector coh_channel_grad(const CopyChannel& cc, const AnsatzParam& p, double* cost_out) {
  auto geo = pair_geometry(p);
  const size_t nk = geo.size();
  std::vector<Vec> phis(nk + 1);
  phis[0] = Vec::Zero(static_cast<Eigen::Index>(geo[0].left) * geo[0].pair * geo[0].right);
  phis[0](0) = 1.0;
  for (size_t k = 0; k < nk; ++k) phis[k + 1] = apply_local(p.u_list[k], phis[k], geo[k].left, geo[k].right);
  Vec g = cc.gradient(phis[nk], cost_out);
  TangentVector out(nk);
  for (size_t k = nk; k-- > 0;) {
    Mat eg = reduce_pair(g, phis[k], geo[k]);
    const Mat& u = p.u_list[k];
    out[k] = 0.5 * (eg - u * eg.adjoint() * u);
    if (k > 0) g = apply_local(u.adjoint(), g, geo[k].left, geo[k].right);
  }
  return out;
}

TangentVector coh_channel_grad(const ChannelRep& ch, const AnsatzParam& p) {
  return coh_channel_grad(CopyChannel(ch, p.n_copies, p.r_dim), p);
}

CodeStateResult optimize_code_state(const ChannelRep& ch, int n, int r_dim, const CodeStateConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const CopyChannel cc(ch, n, r_dim);
  const int a = ch.in_dim();
  const Manifold man = ansatz_manifold(r_dim, a, n);
  Objective obj;
  obj.value = [&](const ManifoldPoint& u) { return cc.cost(ansatz_vector({u, r_dim, a, n})); };
  obj.gradient = [&](const ManifoldPoint& u) { return coh_channel_grad(cc, {u, r_dim, a, n}); };
  RgdConfig rc = cfg.rgd;
  auto run_one = [&](int, std::uint64_t seed) {
    Rng rng(seed);
    return rgd(man, obj, random_point(man, rng), rc);
  };
  CodeStateResult res;
  res.report = multistart(cfg.restarts, cfg.seed, run_one);
  res.best = {res.report.best_point, r_dim, a, n};
  res.psi = ansatz_vector(res.best);
  res.rate = -res.report.best_value / n;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

CodeStateResult optimize_code_state_sphere(const ChannelRep& ch, int n, int r_dim, const CodeStateConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const CopyChannel cc(ch, n, r_dim);
  const int dim = r_dim * ipow(ch.in_dim(), n);
  const Manifold man = Manifold::sphere(dim);
  Objective obj;
  obj.value = [&](const ManifoldPoint& v) { return cc.cost(v[0].col(0)); };
  obj.gradient = [&](const ManifoldPoint& v) {
    Mat g = cc.gradient(v[0].col(0));
    return project_tangent(man, v, {g});
  };
  auto run_one = [&](int, std::uint64_t seed) {
    Rng rng(seed);
    return rgd(man, obj, random_point(man, rng), cfg.rgd);
  };
  CodeStateResult res;
  res.report = multistart(cfg.restarts, cfg.seed, run_one);
  res.psi = res.report.best_point[0].col(0);
  res.rate = -res.report.best_value / n;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace qcapgeo
