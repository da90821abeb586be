#include "qcapgeo/upper.hpp"

#include "qcapgeo/entropy.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace qcapgeo {

std::string to_string(BoundVariant v) { return v == BoundVariant::u_m_form ? "u_m_form" : "coherent_form"; }

BoundVariant bound_variant_from_string(const std::string& s) {
  if (s == "u_m_form") return BoundVariant::u_m_form;
  if (s == "coherent_form") return BoundVariant::coherent_form;
  throw Error("unknown bound variant: " + s);
}

double continuity_tail(double eps, int env_dim) {
  const double d = env_dim;
  return eps * std::log2(std::max(d * d - 1.0, 1.0)) + binary_entropy(std::clamp(eps, 0.0, 1.0));
}

double winter_tail(double eps, int env_dim) {
  const double d = env_dim;
  return eps * std::log2(d * d) + bosonic_entropy(std::max(eps, 0.0));
}

double state_bound_continuity(const DensityOperator& rho, const DegradabilityCertificate& cert, BoundVariant v) {
  const int e = cert.degrading_choi.out_dim;
  if (v == BoundVariant::u_m_form) return u_m_state(rho, cert.degrading_choi) + continuity_tail(cert.epsilon, e);
  return coherent_information_state(rho, {0}) + 2.0 * continuity_tail(cert.epsilon, e);
}

double state_bound_winter(const DensityOperator& rho, const DegradabilityCertificate& cert) {
  return u_m_state(rho, cert.degrading_choi) + winter_tail(cert.epsilon, cert.degrading_choi.out_dim);
}

namespace {
bool nearly_real(const Mat& m) { return m.imag().norm() <= 1e-8 * std::max(1.0, m.norm()); }
}  // namespace

double channel_bound_continuity(const ChannelRep& ch, const DegradabilityCertificate& cert, const UmOptions& opt) {
  ChoiMatrix m = cert.degrading_choi;
  UmMethod method = UmMethod::grid_general;
  if (ch.in_dim() == 2 && choi(ch).mat.imag().norm() <= 1e-10 && nearly_real(m.mat)) {
    method = UmMethod::scan_real_qubit;
    m.mat = m.mat.real().cast<cd>();
  }
  return u_m_channel(ch, m, method, opt).value + continuity_tail(cert.epsilon, m.out_dim);
}

ExtensionProblem ExtensionProblem::for_state(const DensityOperator& rho, int flag_dim, int env_dim, BoundVariant v) {
  if (rho.dims().size() != 2) throw Error("state extension needs a bipartite state");
  if (flag_dim < 1 || env_dim < 1) throw Error("extension dimensions must be positive");
  ExtensionProblem p;
  p.kind = Kind::state;
  p.state = rho;
  p.purification = purify(rho).amp();
  p.e_dim = rho.dim();
  p.flag_dim = flag_dim;
  p.env_dim = env_dim;
  p.variant = v;
  if (flag_dim * env_dim < p.e_dim) throw Error("extension needs |F||R| >= |E|");
  return p;
}

ExtensionProblem ExtensionProblem::for_channel(const ChannelRep& ch, int flag_dim, int env_dim) {
  if (flag_dim < 1 || env_dim < 1) throw Error("extension dimensions must be positive");
  ExtensionProblem p;
  p.kind = Kind::channel;
  p.channel = minimal_kraus(ch);
  p.stinespring = qcapgeo::stinespring(p.channel).mat();
  p.e_dim = p.channel.env_dim();
  p.flag_dim = flag_dim;
  p.env_dim = env_dim;
  p.variant = BoundVariant::u_m_form;
  p.real = p.stinespring.imag().norm() <= 1e-12;
  if (flag_dim * env_dim < p.e_dim) throw Error("extension needs |F||R| >= |E|");
  return p;
}

Manifold ExtensionProblem::manifold() const { return Manifold::stiefel(flag_dim * env_dim, e_dim, real); }

DensityOperator extended_state(const ExtensionProblem& prob, const Mat& v) {
  const int a = prob.state.dims()[0], b = prob.state.dims()[1];
  const int e = prob.e_dim, f = prob.flag_dim, r = prob.env_dim;
  if (v.rows() != f * r || v.cols() != e) throw Error("extended_state: isometry shape mismatch");
  Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> phi(prob.purification.data(),
                                                                                           a * b, e);
  Mat psi = phi * v.transpose();  // (ab) × (f r)
  Mat m(a * b * f, r);
  for (int x = 0; x < a * b; ++x)
    for (int k = 0; k < f; ++k) m.row(x * f + k) = psi.row(x).segment(k * r, r);
  return DensityOperator(hermitian_part(m * m.adjoint()), {a, b * f});
}

ChannelRep extended_channel(const ExtensionProblem& prob, const Mat& v) {
  const int a = prob.channel.in_dim(), b = prob.channel.out_dim();
  const int e = prob.e_dim, f = prob.flag_dim, r = prob.env_dim;
  if (v.rows() != f * r || v.cols() != e) throw Error("extended_channel: isometry shape mismatch");
  std::vector<Mat> ks(r, Mat::Zero(b * f, a));
  for (int y = 0; y < b; ++y) {
    Mat blk = v * prob.stinespring.middleRows(y * e, e);  // (f r) × a
    for (int k = 0; k < f; ++k)
      for (int j = 0; j < r; ++j) ks[j].row(y * f + k) = blk.row(k * r + j);
  }
  return ChannelRep(ks);
}

double extension_objective(const ManifoldPoint& v, const ExtensionProblem& prob, BoundVariant variant) {
  const double inf = std::numeric_limits<double>::infinity();
  if (prob.kind == ExtensionProblem::Kind::state) {
    DensityOperator rho = extended_state(prob, v.at(0));
    DegradabilityCertificate cert = dg_state(rho, prob.sdp);
    if (cert.status != "optimal" && cert.status != "near_optimal") return inf;
    return state_bound_continuity(rho, cert, variant);
  }
  ChannelRep ch = extended_channel(prob, v.at(0));
  DegradabilityCertificate cert = dg_channel(ch, prob.sdp);
  if (cert.status != "optimal" && cert.status != "near_optimal") return inf;
  return channel_bound_continuity(ch, cert, prob.um);
}

double extension_objective(const ManifoldPoint& v, const ExtensionProblem& prob) {
  return extension_objective(v, prob, prob.variant);
}

UpperBoundResult optimize_extension(const ExtensionProblem& prob, const ExtensionConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool is_state = prob.kind == ExtensionProblem::Kind::state;
  UpperBoundResult res;

  // unextended baseline
  if (is_state) {
    res.hashing = coherent_information_state(prob.state, {0});
    res.certificate = dg_state(prob.state, prob.sdp);
    const double um = state_bound_continuity(prob.state, res.certificate, BoundVariant::u_m_form);
    const double co = state_bound_continuity(prob.state, res.certificate, BoundVariant::coherent_form);
    res.bound_unextended = std::min(um, co);
    res.u_m_form = um;
    res.coherent_form = co;
    res.variant = um <= co ? BoundVariant::u_m_form : BoundVariant::coherent_form;
  } else {
    res.hashing = coherent_information_state(choi_state(prob.channel), {0});
    res.certificate = dg_channel(prob.channel, prob.sdp);
    res.bound_unextended = channel_bound_continuity(prob.channel, res.certificate, prob.um);
    res.u_m_form = res.bound_unextended;
    res.coherent_form = nan;
    res.variant = BoundVariant::u_m_form;
  }
  res.bound = res.bound_unextended;
  res.baseline_won = true;

  const Manifold man = prob.manifold();
  Objective obj;
  obj.value = [&prob](const ManifoldPoint& v) { return extension_objective(v, prob); };
  obj.fd_step = cfg.fd_step;
  RgdConfig rc;
  rc.max_iters = cfg.max_iters;
  rc.grad_tol = cfg.grad_tol;
  // restart 0 starts from the trivial embedding |0>_F ⊗ |e>_R when it fits
  const bool warm = prob.env_dim >= prob.e_dim;
  res.report = multistart(cfg.restarts, cfg.seed, [&](int k, std::uint64_t seed) {
    Rng rng(seed);
    if (k == 0 && warm) {
      Mat v0 = Mat::Zero(prob.flag_dim * prob.env_dim, prob.e_dim);
      v0.topRows(prob.e_dim) = Mat::Identity(prob.e_dim, prob.e_dim);
      // nudge off the degenerate point; the objective is flat there in the flag directions
      TangentVector x = project_tangent(man, {v0}, {random_gaussian(static_cast<int>(v0.rows()), prob.e_dim, rng)});
      if (prob.real) x[0] = x[0].real().cast<cd>();
      return rgd(man, obj, retract_qr(man, {v0}, scaled(x, 1e-2)), rc);
    }
    return rgd(man, obj, random_point(man, rng), rc);
  });
  if (!res.report.best_point.empty() && std::isfinite(res.report.best_value)) {
    const ManifoldPoint& v = res.report.best_point;
    res.extension_isometry = Isometry(v[0]);
    // certify the winner with every applicable formula
    if (is_state) {
      DensityOperator rho = extended_state(prob, v[0]);
      DegradabilityCertificate cert = dg_state(rho, prob.sdp);
      const double um = state_bound_continuity(rho, cert, BoundVariant::u_m_form);
      const double co = state_bound_continuity(rho, cert, BoundVariant::coherent_form);
      const double best = std::min(um, co);
      if (best < res.bound) {
        res.bound = best;
        res.u_m_form = um;
        res.coherent_form = co;
        res.variant = um <= co ? BoundVariant::u_m_form : BoundVariant::coherent_form;
        res.certificate = cert;
        res.baseline_won = false;
      }
    } else {
      ChannelRep ch = extended_channel(prob, v[0]);
      DegradabilityCertificate cert = dg_channel(ch, prob.sdp);
      const double um = channel_bound_continuity(ch, cert, prob.um);
      if (um < res.bound) {
        res.bound = um;
        res.u_m_form = um;
        res.certificate = cert;
        res.baseline_won = false;
      }
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace qcapgeo
