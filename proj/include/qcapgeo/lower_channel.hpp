#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/manifolds.hpp"

#include <vector>

namespace qcapgeo {

// Interleaved local-unitary code state on R ⊗ A₁ ⊗ … ⊗ Aₙ. Sites are
// S₀ = R, S_k = A_k; unitary k acts on the adjacent pair (S_i, S_{i+1})
// with i = k−1 for k ≤ n and i = 2n−1−k afterwards.
struct AnsatzParam {
  std::vector<Mat> u_list;
  int r_dim = 2;
  int a_dim = 2;
  int n_copies = 1;
};

// First site index of the pair acted on by each of the 2n−1 unitaries.
std::vector<int> ansatz_pairs(int n);
Dims ansatz_site_dims(int r_dim, int a_dim, int n);
Manifold ansatz_manifold(int r_dim, int a_dim, int n);
AnsatzParam ansatz_from_point(const ManifoldPoint& u, int r_dim, int a_dim, int n);

Vec ansatz_vector(const AnsatzParam& p);
PureStateVector ansatz_state(const AnsatzParam& p);

inline constexpr int kCodeDimGuard = 1 << 13;

// n-fold channel applied through its minimal Stinespring dilation.
class CopyChannel {
 public:
  CopyChannel(const ChannelRep& ch, int n, int r_dim);

  int n() const { return n_; }
  int r_dim() const { return r_; }
  int in_dim() const { return a_; }
  int out_dim() const { return b_; }
  int env_dim() const { return e_; }

  // −I(R⟩Bⁿ) of N^⊗n(ψ) for ψ on R ⊗ Aⁿ.
  double cost(const Vec& psi) const;
  // Euclidean gradient 2{1⊗N†[log Tr_R N(ψ)] − N†[log N(ψ)]}|ψ⟩ and the cost.
  Vec gradient(const Vec& psi, double* cost_out = nullptr) const;
  // Output state on R ⊗ Bⁿ (dense, for tests).
  Mat output(const Vec& psi) const;

 private:
  Mat dilate(const Vec& psi) const;  // (r·bⁿ) × eⁿ
  Vec undilate(const Mat& y) const;

  Mat v_;
  int n_, r_, a_, b_, e_;
};

double coh_channel_cost(const ChannelRep& ch, const AnsatzParam& p);
double code_state_cost(const ChannelRep& ch, int n, int r_dim, const Vec& psi);
Vec psi_gradient(const ChannelRep& ch, int n, int r_dim, const Vec& psi);
// Riemannian gradient for each unitary factor.
TangentVector coh_channel_grad(const ChannelRep& ch, const AnsatzParam& p);
TangentVector coh_channel_grad(const CopyChannel& cc, const AnsatzParam& p, double* cost_out = nullptr);

struct CodeStateConfig {
  int restarts = 50;
  std::uint64_t seed = 1;
  RgdConfig rgd;
};

struct CodeStateResult {
  RunReport report;
  double rate = 0.0;  // −best cost / n
  AnsatzParam best;
  Vec psi;  // best code state
  double seconds = 0.0;
};

CodeStateResult optimize_code_state(const ChannelRep& ch, int n, int r_dim, const CodeStateConfig& cfg);

// Direct optimization of the code state on the complex sphere of R ⊗ Aⁿ.
CodeStateResult optimize_code_state_sphere(const ChannelRep& ch, int n, int r_dim, const CodeStateConfig& cfg);

}  // namespace qcapgeo
