#pragma once

#include "qcapgeo/qmath.hpp"

#include <map>
#include <string>
#include <vector>

namespace qcapgeo {

// Channel held as a Kraus list; all Kraus operators are out_dim × in_dim.
class ChannelRep {
 public:
  ChannelRep() = default;
  explicit ChannelRep(std::vector<Mat> kraus);

  const std::vector<Mat>& kraus() const { return kraus_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  int env_dim() const { return static_cast<int>(kraus_.size()); }

 private:
  std::vector<Mat> kraus_;
  int in_dim_ = 0;
  int out_dim_ = 0;
};

// Unnormalized Choi matrix, input system first.
struct ChoiMatrix {
  Mat mat;
  int in_dim = 0;
  int out_dim = 0;
};

enum class ChannelName {
  depolarizing,
  amplitude_damping,
  gadc,
  dephasing,
  erasure,
  dephrasure,
  damping_dephasing,
  damping_erasure,
  identity,
  custom_kraus
};

struct ChannelSpec {
  ChannelName name = ChannelName::identity;
  std::map<std::string, double> params;
  int dim = 2;
  std::vector<Mat> kraus;  // custom_kraus only
};

std::string to_string(ChannelName n);
ChannelName channel_name_from_string(const std::string& s);
// "gadc:gamma=0.3,N=0.1" or "dephasing:p=0.25" or "depolarizing:p=0.1,dim=3"
ChannelSpec parse_channel_spec(const std::string& text);
std::string format_channel_spec(const ChannelSpec& spec);

ChannelRep channel_from_spec(const ChannelSpec& spec);

ChannelRep identity_channel(int d);
ChannelRep depolarizing(double p, int d = 2);
ChannelRep amplitude_damping(double gamma);
ChannelRep gadc(double gamma, double n);
ChannelRep dephasing(double p);
ChannelRep erasure(double p, int d = 2);
ChannelRep dephrasure(double p, double q);
ChannelRep damping_dephasing(double g, double p);
ChannelRep damping_erasure(double g, double p);

// Σᵢ (I⊗Kᵢ⊗I) m (I⊗Kᵢ⊗I)† on subsystem `on`.
Mat apply_channel(const ChannelRep& ch, const Mat& m, const Dims& dims, int on);
// Adjoint map Σᵢ Kᵢ† x Kᵢ on subsystem `on`; dims describe x (output side).
Mat apply_adjoint(const ChannelRep& ch, const Mat& x, const Dims& dims, int on);
DensityOperator apply(const ChannelRep& ch, const DensityOperator& rho, int on);

ChoiMatrix choi(const ChannelRep& ch);
// Rows ordered (output, environment).
Isometry stinespring(const ChannelRep& ch);
ChannelRep complementary(const ChannelRep& ch);
// outer ∘ inner
ChannelRep compose(const ChannelRep& outer, const ChannelRep& inner);

// (I_A ⊗ M)(m) for m on A⊗B, M given by its Choi matrix (B first).
Mat apply_choi(const Mat& j, int b_dim, int e_dim, const Mat& m, int a_dim);
// Kraus list from a Choi matrix: eigenvectors with eigenvalue > cutoff,
// ascending eigenvalue order, each with its largest entry made real positive.
std::vector<Mat> kraus_from_choi(const Mat& j, int in_dim, int out_dim, double cutoff = 1e-10);
// Same channel with the fewest Kraus operators (Choi rank).
ChannelRep minimal_kraus(const ChannelRep& ch);

DensityOperator isotropic(int d, double f);
DensityOperator noisy_mes(const ChannelRep& on_a, const ChannelRep& on_b);
DensityOperator choi_state(const ChannelRep& ch);

}  // namespace qcapgeo
