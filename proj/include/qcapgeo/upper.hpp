#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/manifolds.hpp"
#include "qcapgeo/sdp.hpp"

#include <string>

namespace qcapgeo {

enum class BoundVariant { u_m_form, coherent_form };
std::string to_string(BoundVariant v);
BoundVariant bound_variant_from_string(const std::string& s);

// ε log(d²−1) + h(ε)
double continuity_tail(double eps, int env_dim);
// ε log d² + g(ε), g(ε) = (1+ε) h(ε/(1+ε))
double winter_tail(double eps, int env_dim);

// |E| is the environment dimension of the certificate's degrading map.
// u_m_form:      U_M + tail(ε)
// coherent_form: I(A⟩B) + 2·tail(ε)
double state_bound_continuity(const DensityOperator& rho, const DegradabilityCertificate& cert,
                              BoundVariant v = BoundVariant::u_m_form);
// U_M + winter_tail(ε); the older conditional-entropy continuity form.
double state_bound_winter(const DensityOperator& rho, const DegradabilityCertificate& cert);

// U_M(N) + tail(ε). U_M is scanned on the real qubit disc when the input is a
// qubit and both Choi matrices are real (to 1e-8), otherwise grid-sampled.
double channel_bound_continuity(const ChannelRep& ch, const DegradabilityCertificate& cert,
                                const UmOptions& opt = {});

struct ExtensionProblem {
  enum class Kind { state, channel };
  Kind kind = Kind::state;
  DensityOperator state;
  ChannelRep channel;
  Vec purification;  // state: canonical purification on A ⊗ B ⊗ E
  Mat stinespring;   // channel: rows (b, e)
  int e_dim = 1;
  int flag_dim = 1;
  int env_dim = 1;  // |R|
  BoundVariant variant = BoundVariant::coherent_form;
  bool real = false;  // channel extensions over the real Stiefel manifold
  SdpOptions sdp{1e-10, 100};
  UmOptions um;

  static ExtensionProblem for_state(const DensityOperator& rho, int flag_dim, int env_dim,
                                    BoundVariant v = BoundVariant::coherent_form);
  // Real Stiefel search when the channel's Stinespring isometry is real.
  static ExtensionProblem for_channel(const ChannelRep& ch, int flag_dim, int env_dim);

  Manifold manifold() const;  // Stiefel(|F||R|, |E|)
};

// ρ_ABF = Tr_R (V φ V†) with V: E → F ⊗ R (row f·|R| + r); dims {A, B·F}.
DensityOperator extended_state(const ExtensionProblem& prob, const Mat& v);
// Kraus operators of N̂: A → B ⊗ F from W = (1_B ⊗ V) U, one per R index.
ChannelRep extended_channel(const ExtensionProblem& prob, const Mat& v);

// Bound of the extended object; +∞ when the inner SDP does not reach "optimal".
double extension_objective(const ManifoldPoint& v, const ExtensionProblem& prob);
double extension_objective(const ManifoldPoint& v, const ExtensionProblem& prob, BoundVariant variant);

struct ExtensionConfig {
  int restarts = 50;
  std::uint64_t seed = 1;
  double fd_step = 1e-6;
  double grad_tol = 1e-7;
  int max_iters = 500;
};

struct UpperBoundResult {
  double bound = 0.0;
  double bound_unextended = 0.0;
  double hashing = 0.0;
  // Certified values at the best isometry (NaN when not applicable).
  double u_m_form = 0.0;
  double coherent_form = 0.0;
  BoundVariant variant = BoundVariant::u_m_form;
  bool baseline_won = false;
  DegradabilityCertificate certificate;
  Isometry extension_isometry;
  RunReport report;
  double seconds = 0.0;
};

UpperBoundResult optimize_extension(const ExtensionProblem& prob, const ExtensionConfig& cfg);

}  // namespace qcapgeo
