#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/qmath.hpp"

#include <string>
#include <vector>

namespace qcapgeo {

// One term Re(coef · X_block[row, col]) of a real linear functional.
struct SdpTerm {
  int block = 0;
  int row = 0;
  int col = 0;
  cd coef = 1.0;
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;
  double rhs = 0.0;
};

// Matrix-valued affine expression; entry (r, c) is a list of terms.
class HermitianExpr {
 public:
  explicit HermitianExpr(int dim) : dim_(dim), entries_(static_cast<size_t>(dim) * dim) {}
  int dim() const { return dim_; }
  void add(int r, int c, SdpTerm t) { entries_[static_cast<size_t>(r) * dim_ + c].push_back(t); }
  // Adds coef · X_block, block of the same size as the expression.
  void add_block(int block, cd coef);
  const std::vector<SdpTerm>& at(int r, int c) const { return entries_[static_cast<size_t>(r) * dim_ + c]; }

 private:
  int dim_;
  std::vector<std::vector<SdpTerm>> entries_;
};

// min Re⟨C, X⟩ s.t. Re⟨Aᵢ, X⟩ = bᵢ, X = ⊕ X_k ⪰ 0 (complex Hermitian blocks).
struct SdpProblem {
  std::vector<int> blocks;
  std::vector<Mat> cost;
  std::vector<SdpConstraint> constraints;

  int add_block(int n);
  void add_constraint(SdpConstraint c) { constraints.push_back(std::move(c)); }
  // Imposes expr = rhs for a Hermitian rhs via the upper triangle.
  void add_hermitian_equality(const HermitianExpr& expr, const Mat& rhs);
};

struct SdpOptions {
  double tol = 1e-9;
  int max_iters = 100;
};

struct SdpSolution {
  std::vector<Mat> x;
  std::vector<Mat> z;
  RVec y;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;           // |primal − dual|
  double primal_infeas = 0.0; // ‖b − 𝒜X‖ / (1 + ‖b‖)
  double dual_infeas = 0.0;   // ‖C − Z − 𝒜*y‖ / (1 + ‖C‖)
  int iterations = 0;
  std::string status;         // "optimal", "max_iters", "infeasible_or_unbounded", "numerical_failure"
  // "near_optimal": stalled with all residuals within 1e3·tol
  bool ok() const { return status == "optimal" || status == "near_optimal"; }
};

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt = {});

struct DegradabilityCertificate {
  double epsilon = 0.0;
  ChoiMatrix degrading_choi;
  double gap = 0.0;
  int iterations = 0;
  std::string status;
};

// A is subsystem 0, B is everything else; E' has dimension |AB|.
DegradabilityCertificate dg_state(const DensityOperator& rho, const SdpOptions& opt = {});
DegradabilityCertificate dg_channel(const ChannelRep& ch, const SdpOptions& opt = {});

// ½‖ρ_AE − (I⊗M)(ρ_AB)‖₁ for a given degrading Choi matrix.
double state_degrading_error(const DensityOperator& rho, const Mat& degrading_choi);

// Stinespring isometry B → E'⊗G of the map with the given Choi matrix.
Mat stinespring_from_choi(const ChoiMatrix& m);

double u_m_state(const DensityOperator& rho_ext, const ChoiMatrix& m);

enum class UmMethod { scan_real_qubit, grid_general };
struct UmOptions {
  double scan_step = 0.005;
  int grid_size = 2000;
  unsigned long long grid_seed = 1;
};
struct UmResult {
  double value = 0.0;
  Mat best_input;
  bool grid_lower_estimate = false;  // grid_general gives a lower estimate of the max
};
UmResult u_m_channel(const ChannelRep& ch, const ChoiMatrix& m, UmMethod method, const UmOptions& opt = {});

}  // namespace qcapgeo
