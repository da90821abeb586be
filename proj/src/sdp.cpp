#include "qcapgeo/sdp.hpp"

#include "qcapgeo/entropy.hpp"
#include "qcapgeo/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace qcapgeo {

void HermitianExpr::add_block(int block, cd coef) {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) add(r, c, {block, r, c, coef});
}

int SdpProblem::add_block(int n) {
  if (n < 1) throw Error("SDP block size must be positive");
  blocks.push_back(n);
  cost.push_back(Mat::Zero(n, n));
  return static_cast<int>(blocks.size()) - 1;
}

void SdpProblem::add_hermitian_equality(const HermitianExpr& expr, const Mat& rhs) {
  if (rhs.rows() != expr.dim() || rhs.cols() != expr.dim()) throw Error("equality: rhs shape mismatch");
  const cd minus_i(0.0, -1.0);
  for (int r = 0; r < expr.dim(); ++r)
    for (int c = r; c < expr.dim(); ++c) {
      SdpConstraint re{expr.at(r, c), rhs(r, c).real()};
      constraints.push_back(std::move(re));
      if (r == c) continue;
      SdpConstraint im;
      for (SdpTerm t : expr.at(r, c)) {
        t.coef *= minus_i;
        im.terms.push_back(t);
      }
      im.rhs = rhs(r, c).imag();
      constraints.push_back(std::move(im));
    }
}

namespace {

// Hermitian constraint matrix Aᵢ restricted to one block, stored sparsely:
// Re⟨Aᵢ, X⟩ = Re Σ v · X[c, r] over entries (r, c, v) with A[r, c] = v.
struct BlockEntries {
  int block;
  std::vector<int> rows, cols;
  std::vector<cd> vals;
};
using SparseA = std::vector<BlockEntries>;

std::vector<SparseA> hermitianize(const SdpProblem& p) {
  std::vector<SparseA> out;
  out.reserve(p.constraints.size());
  for (const SdpConstraint& con : p.constraints) {
    std::map<std::tuple<int, int, int>, cd> acc;
    for (const SdpTerm& t : con.terms) {
      if (t.block < 0 || t.block >= static_cast<int>(p.blocks.size())) throw Error("SDP term: bad block");
      const int n = p.blocks[t.block];
      if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) throw Error("SDP term: index out of range");
      acc[{t.block, t.col, t.row}] += 0.5 * t.coef;
      acc[{t.block, t.row, t.col}] += 0.5 * std::conj(t.coef);
    }
    SparseA a;
    for (auto& [key, v] : acc) {
      if (std::abs(v) == 0.0) continue;
      auto [b, r, c] = key;
      if (a.empty() || a.back().block != b) a.push_back({b, {}, {}, {}});
      a.back().rows.push_back(r);
      a.back().cols.push_back(c);
      a.back().vals.push_back(v);
    }
    out.push_back(std::move(a));
  }
  return out;
}

using Blocks = std::vector<Mat>;

double apply_a(const SparseA& a, const Blocks& x) {
  double s = 0.0;
  for (const BlockEntries& be : a) {
    const Mat& xb = x[be.block];
    for (size_t k = 0; k < be.vals.size(); ++k) s += (be.vals[k] * xb(be.cols[k], be.rows[k])).real();
  }
  return s;
}

RVec apply_a(const std::vector<SparseA>& as, const Blocks& x) {
  RVec out(as.size());
  for (size_t i = 0; i < as.size(); ++i) out(i) = apply_a(as[i], x);
  return out;
}

Blocks apply_at(const std::vector<SparseA>& as, const RVec& y, const std::vector<int>& dims) {
  Blocks out;
  for (int n : dims) out.push_back(Mat::Zero(n, n));
  for (size_t i = 0; i < as.size(); ++i) {
    if (y(i) == 0.0) continue;
    for (const BlockEntries& be : as[i])
      for (size_t k = 0; k < be.vals.size(); ++k) out[be.block](be.rows[k], be.cols[k]) += y(i) * be.vals[k];
  }
  return out;
}

double inner_re(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += (a[k].array().conjugate() * b[k].array()).sum().real();
  return s;
}

double frob(const Blocks& a) { return std::sqrt(std::max(inner_re(a, a), 0.0)); }

// Largest α with X + α dX ⪰ 0 (∞ if unbounded); X must be positive definite.
double max_step(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat t = llt.matrixL().solve(dx);
  Mat s = llt.matrixL().solve(Mat(t.adjoint())).adjoint();
  double lmin = eigvalsh(hermitian_part(s))(0);
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step(const Blocks& x, const Blocks& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < x.size(); ++k) a = std::min(a, max_step(x[k], dx[k]));
  return a;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt) {
  const std::vector<int>& dims = p.blocks;
  const int nb = static_cast<int>(dims.size());
  const int m = static_cast<int>(p.constraints.size());
  if (nb == 0) throw Error("SDP has no variables");
  if (static_cast<int>(p.cost.size()) != nb) throw Error("SDP cost/block count mismatch");
  std::vector<SparseA> as = hermitianize(p);
  RVec b(m);
  for (int i = 0; i < m; ++i) b(i) = p.constraints[i].rhs;
  Blocks c;
  for (int k = 0; k < nb; ++k) c.push_back(hermitian_part(p.cost[k]));

  // constraints touching each block: (constraint index, entry-set index)
  std::vector<std::vector<std::pair<int, int>>> touching(nb);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < static_cast<int>(as[i].size()); ++k) touching[as[i][k].block].push_back({i, k});

  int ntot = 0;
  for (int n : dims) ntot += n;
  const double bnorm = b.norm(), cnorm = frob(c);
  double amax = 0.0, ratio = 0.0;
  for (int i = 0; i < m; ++i) {
    double an = 0.0;
    for (auto& be : as[i])
      for (auto& v : be.vals) an += std::norm(v);
    an = std::sqrt(an);
    amax = std::max(amax, an);
    ratio = std::max(ratio, (1.0 + std::abs(b(i))) / (1.0 + an));
  }
  const double xi = std::max({10.0, std::sqrt(double(ntot)), ntot * ratio});
  const double eta = std::max({10.0, std::sqrt(double(ntot)), amax, cnorm});

  Blocks x, z, zinv, zinvc;
  for (int n : dims) {
    x.push_back(xi * Mat::Identity(n, n));
    z.push_back(eta * Mat::Identity(n, n));
  }
  RVec y = RVec::Zero(m);
  Eigen::MatrixXd schur(m, m);
  Blocks work;
  for (int n : dims) work.push_back(Mat::Zero(n, n));

  SdpSolution sol;
  sol.status = "max_iters";
  for (int it = 0; it <= opt.max_iters; ++it) {
    RVec rp = b - apply_a(as, x);
    Blocks aty = apply_at(as, y, dims);
    Blocks rd(nb);
    for (int k = 0; k < nb; ++k) rd[k] = c[k] - z[k] - aty[k];
    const double pobj = inner_re(c, x), dobj = b.dot(y);
    const double xz = inner_re(x, z);
    const double mu = xz / ntot;
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.gap = std::abs(pobj - dobj);
    sol.primal_infeas = rp.norm() / (1.0 + bnorm);
    sol.dual_infeas = frob(rd) / (1.0 + cnorm);
    sol.iterations = it;
    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double relgap = std::max(sol.gap, std::abs(xz)) / scale;
    if (sol.primal_infeas <= opt.tol && sol.dual_infeas <= opt.tol && relgap <= opt.tol) {
      sol.status = "optimal";
      break;
    }
    const bool near = sol.primal_infeas <= 1e3 * opt.tol && sol.dual_infeas <= 1e3 * opt.tol && relgap <= 1e3 * opt.tol;
    zinv.assign(nb, Mat());
    zinvc.assign(nb, Mat());
    bool zok = true;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<Mat> llt(z[k]);
      if (llt.info() != Eigen::Success) {
        zok = false;
        break;
      }
      zinv[k] = hermitian_part(llt.solve(Mat::Identity(dims[k], dims[k])));
      zinvc[k] = zinv[k].conjugate();
    }
    if (!zok) {
      sol.status = near ? "near_optimal" : "numerical_failure";
      break;
    }
    if (frob(x) > 1e13 || frob(z) > 1e13 || y.norm() > 1e13) {
      sol.status = "infeasible_or_unbounded";
      break;
    }
    if (it == opt.max_iters) break;

    // Schur complement M_ij = Re Tr(Aᵢ X Aⱼ Z⁻¹)
    schur.setZero();
    for (int j = 0; j < m; ++j) {
      for (const BlockEntries& be : as[j]) {
        const int bk = be.block, n = dims[bk];
        Mat& w = work[bk];
        w.setZero();
        for (size_t e = 0; e < be.vals.size(); ++e)
          kernels::rank1(be.vals[e], x[bk].col(be.rows[e]).data(), n, zinvc[bk].col(be.cols[e]).data(), n,
                         w.data(), n);
        for (auto [i, k] : touching[bk]) {
          const BlockEntries& bi = as[i][k];
          double s = 0.0;
          for (size_t e = 0; e < bi.vals.size(); ++e) s += (bi.vals[e] * w(bi.cols[e], bi.rows[e])).real();
          schur(i, j) += s;
        }
      }
    }
    schur = 0.5 * (schur + schur.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> mchol(schur);
    Eigen::LDLT<Eigen::MatrixXd> mldlt;
    bool use_llt = mchol.info() == Eigen::Success;
    if (!use_llt) {
      double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += reg;
      mldlt.compute(schur);
    }
    auto solve_dir = [&](const Blocks& t, Blocks& dx, RVec& dy, Blocks& dz) {
      Blocks g(nb);
      for (int k = 0; k < nb; ++k) g[k] = x[k] * rd[k] * zinv[k] - t[k];
      RVec rhs = rp + apply_a(as, g);
      dy = use_llt ? RVec(mchol.solve(rhs)) : RVec(mldlt.solve(rhs));
      Blocks atdy = apply_at(as, dy, dims);
      dz.assign(nb, Mat());
      dx.assign(nb, Mat());
      for (int k = 0; k < nb; ++k) {
        dz[k] = rd[k] - atdy[k];
        dx[k] = t[k] - hermitian_part(x[k] * dz[k] * zinv[k]);
      }
    };
    Blocks t(nb), dxa, dza, dx, dz;
    RVec dya, dy;
    for (int k = 0; k < nb; ++k) t[k] = -x[k];
    solve_dir(t, dxa, dya, dza);
    double ap = std::min(1.0, max_step(x, dxa));
    double ad = std::min(1.0, max_step(z, dza));
    Blocks xa(nb), za(nb);
    for (int k = 0; k < nb; ++k) {
      xa[k] = x[k] + ap * dxa[k];
      za[k] = z[k] + ad * dza[k];
    }
    double mu_aff = inner_re(xa, za) / ntot;
    double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);
    for (int k = 0; k < nb; ++k)
      t[k] = sigma * mu * zinv[k] - x[k] - hermitian_part(dxa[k] * dza[k] * zinv[k]);
    solve_dir(t, dx, dy, dz);
    const double gamma = 0.98;
    ap = std::min(1.0, gamma * max_step(x, dx));
    ad = std::min(1.0, gamma * max_step(z, dz));
    if (!(ap > 0) || !(ad > 0) || !std::isfinite(ap) || !std::isfinite(ad)) {
      sol.status = near ? "near_optimal" : "numerical_failure";
      break;
    }
    for (int k = 0; k < nb; ++k) {
      x[k] = hermitian_part(x[k] + ap * dx[k]);
      z[k] = hermitian_part(z[k] + ad * dz[k]);
    }
    y += ad * dy;
  }
  sol.x = std::move(x);
  sol.z = std::move(z);
  sol.y = std::move(y);
  return sol;
}

namespace {

// Adds (I_A ⊗ M)(m) with M's Choi matrix living in SDP block `jblock`
// (ordering B ⊗ E') to the expression on A ⊗ E'.
void add_choi_action(HermitianExpr& expr, int jblock, const Mat& mm, int a_dim, int b_dim, int e_dim) {
  for (int a = 0; a < a_dim; ++a)
    for (int ap = 0; ap < a_dim; ++ap)
      for (int bb = 0; bb < b_dim; ++bb)
        for (int bp = 0; bp < b_dim; ++bp) {
          cd r = mm(a * b_dim + bb, ap * b_dim + bp);
          if (std::abs(r) < 1e-300) continue;
          for (int e = 0; e < e_dim; ++e)
            for (int ep = 0; ep < e_dim; ++ep) {
              // only the upper triangle is consumed
              if (a * e_dim + e > ap * e_dim + ep) continue;
              expr.add(a * e_dim + e, ap * e_dim + ep, {jblock, bb * e_dim + e, bp * e_dim + ep, r});
            }
        }
}

void add_trace_preserving(SdpProblem& p, int jblock, int b_dim, int e_dim) {
  HermitianExpr tr(b_dim);
  for (int bb = 0; bb < b_dim; ++bb)
    for (int bp = bb; bp < b_dim; ++bp)
      for (int e = 0; e < e_dim; ++e) tr.add(bb, bp, {jblock, bb * e_dim + e, bp * e_dim + e, 1.0});
  p.add_hermitian_equality(tr, Mat::Identity(b_dim, b_dim));
}

// (T^{-1/2} ⊗ I) J (T^{-1/2} ⊗ I) with T = Tr_E J, so the map is exactly
// trace preserving; the interior-point iterate is only feasible to tol.
Mat make_trace_preserving(const Mat& j, int b_dim, int e_dim) {
  Mat t = hermitian_part(partial_trace(j, {b_dim, e_dim}, {0}));
  Eigh et = eigh(t);
  if (et.values(0) <= 0) throw Error("degrading map has a singular input marginal");
  Mat s = et.vectors * et.values.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() * et.vectors.adjoint();
  Mat k = tensor(s, Mat::Identity(e_dim, e_dim));
  return hermitian_part(k * j * k);
}

struct StateSplit {
  int a_dim;
  int b_dim;
  Mat rho_ae;            // on A ⊗ E with the full |AB|-dimensional E
  std::vector<int> kept; // purification components with nonzero weight
};

StateSplit split_state(const DensityOperator& rho) {
  const int a = rho.dims()[0];
  const int bd = rho.dim() / a;
  PureStateVector phi = purify(DensityOperator(rho.mat(), {a, bd}));
  const int e = a * bd;
  Mat full = phi.amp() * phi.amp().adjoint();
  StateSplit s{a, bd, hermitian_part(partial_trace(full, {a, bd, e}, {0, 2})), {}};
  RVec w = eigvalsh(rho.mat());
  for (int i = 0; i < e; ++i)
    if (w(i) > 1e-13) s.kept.push_back(i);
  if (s.kept.empty()) s.kept.push_back(e - 1);
  return s;
}

// Rows/cols of an operator on X ⊗ E restricted to the kept E components.
Mat restrict_env(const Mat& m, int x_dim, int e_dim, const std::vector<int>& kept) {
  const int k = static_cast<int>(kept.size());
  Mat out(x_dim * k, x_dim * k);
  for (int x = 0; x < x_dim; ++x)
    for (int i = 0; i < k; ++i)
      for (int xp = 0; xp < x_dim; ++xp)
        for (int j = 0; j < k; ++j) out(x * k + i, xp * k + j) = m(x * e_dim + kept[i], xp * e_dim + kept[j]);
  return out;
}

Mat embed_env(const Mat& m, int x_dim, int e_dim, const std::vector<int>& kept) {
  const int k = static_cast<int>(kept.size());
  Mat out = Mat::Zero(x_dim * e_dim, x_dim * e_dim);
  for (int x = 0; x < x_dim; ++x)
    for (int i = 0; i < k; ++i)
      for (int xp = 0; xp < x_dim; ++xp)
        for (int j = 0; j < k; ++j) out(x * e_dim + kept[i], xp * e_dim + kept[j]) = m(x * k + i, xp * k + j);
  return out;
}

}  // namespace

double state_degrading_error(const DensityOperator& rho, const Mat& degrading_choi) {
  StateSplit s = split_state(rho);
  const int e = s.a_dim * s.b_dim;
  Mat out = apply_choi(degrading_choi, s.b_dim, e, rho.mat(), s.a_dim);
  return 0.5 * trace_norm(hermitian_part(s.rho_ae - out));
}

DegradabilityCertificate dg_state(const DensityOperator& rho, const SdpOptions& opt) {
  if (rho.dims().size() < 2) throw Error("dg_state needs a bipartite state");
  StateSplit s = split_state(rho);
  const int a = s.a_dim, bd = s.b_dim, e = a * bd;
  // Zero-weight purification components are left out of E'; the optimal
  // value is unchanged and the Choi matrix is embedded back afterwards.
  const int k = static_cast<int>(s.kept.size());
  const Mat target = restrict_env(s.rho_ae, a, e, s.kept);
  SdpProblem p;
  const int bj = p.add_block(bd * k);
  const int bp = p.add_block(a * k);
  const int bq = p.add_block(a * k);
  p.cost[bp] = 0.5 * Mat::Identity(a * k, a * k);
  p.cost[bq] = 0.5 * Mat::Identity(a * k, a * k);
  HermitianExpr expr(a * k);
  for (int r = 0; r < a * k; ++r)
    for (int c = r; c < a * k; ++c) {
      expr.add(r, c, {bp, r, c, 1.0});
      expr.add(r, c, {bq, r, c, -1.0});
    }
  add_choi_action(expr, bj, rho.mat(), a, bd, k);
  p.add_hermitian_equality(expr, target);
  add_trace_preserving(p, bj, bd, k);
  SdpSolution sol = solve_sdp(p, opt);
  DegradabilityCertificate cert;
  cert.degrading_choi = {make_trace_preserving(embed_env(hermitian_part(sol.x[bj]), bd, e, s.kept), bd, e), bd, e};
  cert.gap = sol.gap;
  cert.iterations = sol.iterations;
  cert.status = sol.status;
  Mat out = apply_choi(cert.degrading_choi.mat, bd, e, rho.mat(), a);
  cert.epsilon = 0.5 * trace_norm(hermitian_part(s.rho_ae - out));
  return cert;
}

DegradabilityCertificate dg_channel(const ChannelRep& ch_in, const SdpOptions& opt) {
  // E' ≅ E is taken as the minimal environment
  const ChannelRep ch = minimal_kraus(ch_in);
  const int a = ch.in_dim(), bd = ch.out_dim(), e = ch.env_dim();
  const Mat jn = choi(ch).mat;
  const Mat jnc = choi(complementary(ch)).mat;
  SdpProblem p;
  const int bj = p.add_block(bd * e);
  const int bz = p.add_block(a * e);
  const int bs = p.add_block(a * e);
  const int bt = p.add_block(a);
  const int bsc = p.add_block(1);
  p.cost[bsc](0, 0) = 1.0;
  // Z − S + J_{M∘N} = J_{Nᶜ}
  HermitianExpr ez(a * e);
  for (int r = 0; r < a * e; ++r)
    for (int c = r; c < a * e; ++c) {
      ez.add(r, c, {bz, r, c, 1.0});
      ez.add(r, c, {bs, r, c, -1.0});
    }
  add_choi_action(ez, bj, jn, a, bd, e);
  p.add_hermitian_equality(ez, jnc);
  // s·I − Tr_E Z − T = 0
  HermitianExpr et(a);
  for (int r = 0; r < a; ++r)
    for (int c = r; c < a; ++c) {
      if (r == c) et.add(r, c, {bsc, 0, 0, 1.0});
      for (int k = 0; k < e; ++k) et.add(r, c, {bz, r * e + k, c * e + k, -1.0});
      et.add(r, c, {bt, r, c, -1.0});
    }
  p.add_hermitian_equality(et, Mat::Zero(a, a));
  add_trace_preserving(p, bj, bd, e);
  SdpSolution sol = solve_sdp(p, opt);
  DegradabilityCertificate cert;
  cert.degrading_choi = {make_trace_preserving(hermitian_part(sol.x[bj]), bd, e), bd, e};
  cert.epsilon = std::max(0.0, sol.primal_obj);
  cert.gap = sol.gap;
  cert.iterations = sol.iterations;
  cert.status = sol.status;
  return cert;
}

namespace {
void check_cptp(const ChoiMatrix& m, double tol) {
  if (m.mat.rows() != m.in_dim * m.out_dim) throw Error("Choi matrix shape mismatch");
  Mat tr = partial_trace(m.mat, {m.in_dim, m.out_dim}, {0});
  if ((tr - Mat::Identity(m.in_dim, m.in_dim)).norm() > tol) throw Error("degrading map is not trace preserving");
  if (eigvalsh(hermitian_part(m.mat))(0) < -tol) throw Error("degrading map is not completely positive");
}
}  // namespace

Mat stinespring_from_choi(const ChoiMatrix& m) {
  std::vector<Mat> ks = kraus_from_choi(m.mat, m.in_dim, m.out_dim);
  const int g = static_cast<int>(ks.size());
  Mat v = Mat::Zero(m.out_dim * g, m.in_dim);
  for (int k = 0; k < g; ++k)
    for (int e = 0; e < m.out_dim; ++e) v.row(e * g + k) = ks[k].row(e);
  return v;
}

namespace {
// H(G|E') of V ω V† for the Stinespring V of M. V is an isometry, so
// H(E'G) = H(ω) and σ_E' = M(ω).
double cond_entropy_g_given_e(const ChoiMatrix& m, const Mat& omega_b) {
  return von_neumann(omega_b) - von_neumann(hermitian_part(apply_choi(m.mat, m.in_dim, m.out_dim, omega_b, 1)));
}
}  // namespace

double u_m_state(const DensityOperator& rho_ext, const ChoiMatrix& m) {
  check_cptp(m, 1e-6);
  const int a = rho_ext.dims()[0];
  const int bd = rho_ext.dim() / a;
  if (bd != m.in_dim) throw Error("u_m_state: degrading map input dimension mismatch");
  Mat rho_b = partial_trace(rho_ext.mat(), {a, bd}, {1});
  return cond_entropy_g_given_e(m, rho_b);
}

UmResult u_m_channel(const ChannelRep& ch, const ChoiMatrix& m, UmMethod method, const UmOptions& opt) {
  check_cptp(m, 1e-6);
  if (m.in_dim != ch.out_dim()) throw Error("u_m_channel: degrading map input dimension mismatch");
  UmResult res;
  res.value = -std::numeric_limits<double>::infinity();
  auto consider_images = [&](const Mat& rho, const Mat& out_b, const Mat& out_e) {
    double f = von_neumann(out_b) - von_neumann(out_e);
    if (f > res.value) {
      res.value = f;
      res.best_input = rho;
    }
  };
  auto consider = [&](const Mat& rho) {
    Mat nb = hermitian_part(apply_channel(ch, rho, {ch.in_dim()}, 0));
    consider_images(rho, nb, hermitian_part(apply_choi(m.mat, m.in_dim, m.out_dim, nb, 1)));
  };
  if (method == UmMethod::scan_real_qubit) {
    if (ch.in_dim() != 2) throw Error("scan_real_qubit needs a qubit input");
    if (choi(ch).mat.imag().norm() > 1e-10 || m.mat.imag().norm() > 1e-10)
      throw Error("scan_real_qubit needs real Choi matrices");
    // both maps are linear, so images of ρ = a|0⟩⟨0| + (1−a)|1⟩⟨1| + bX are
    // combinations of three precomputed images
    Mat basis[3] = {ket(2, 0) * ket(2, 0).adjoint(), ket(2, 1) * ket(2, 1).adjoint(), Mat(2, 2)};
    basis[2] << 0, 1, 1, 0;
    Mat nimg[3], eimg[3];
    for (int k = 0; k < 3; ++k) {
      nimg[k] = apply_channel(ch, basis[k], {2}, 0);
      eimg[k] = apply_choi(m.mat, m.in_dim, m.out_dim, nimg[k], 1);
    }
    const double h = opt.scan_step;
    const int na = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i <= na; ++i) {
      const double aa = std::min(1.0, i * h);
      const double bmax = std::sqrt(std::max(aa * (1 - aa), 0.0));
      const int nb = static_cast<int>(std::floor(2 * bmax / h + 1e-12));
      for (int j = 0; j <= nb + 1; ++j) {
        const double bb = j <= nb ? -bmax + j * h : bmax;
        Mat rho(2, 2);
        rho << aa, bb, bb, 1 - aa;
        consider_images(rho, hermitian_part(aa * nimg[0] + (1 - aa) * nimg[1] + bb * nimg[2]),
                        hermitian_part(aa * eimg[0] + (1 - aa) * eimg[1] + bb * eimg[2]));
      }
    }
  } else {
    const int d = ch.in_dim();
    consider(Mat::Identity(d, d) / double(d));
    for (int k = 0; k < d; ++k) consider(ket(d, k) * ket(d, k).adjoint());
    Rng rng(opt.grid_seed);
    for (int k = 0; k < opt.grid_size; ++k) {
      // alternate pure and mixed samples
      if (k % 2 == 0) {
        Vec psi = random_pure(d, rng);
        consider(psi * psi.adjoint());
      } else {
        consider(random_density(d, rng));
      }
    }
    res.grid_lower_estimate = true;
  }
  return res;
}

}  // namespace qcapgeo
