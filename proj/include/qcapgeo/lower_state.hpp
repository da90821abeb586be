#pragma once

#include "qcapgeo/manifolds.hpp"
#include "qcapgeo/qmath.hpp"

#include <vector>

namespace qcapgeo {

// Unitary U on A ⊗ M (row a·m + j); the instrument has Kraus operators
// K_j = (1_A ⊗ ⟨j|) U (1_A ⊗ |0⟩).
struct InstrumentParam {
  Mat u;
  int m_dim = 2;
};

std::vector<Mat> instrument_kraus(const InstrumentParam& p);

// −I(A'⟩BM) of σ = Σ_j (K_j ⊗ 1)ρ(K_j ⊗ 1)† ⊗ |j⟩⟨j|; A is rho.dims()[0], B the
// rest. Block-wise with unnormalized blocks: Σ_j H(σ_AB^j) − H(σ_B^j).
double coh_state_cost(const DensityOperator& rho, const InstrumentParam& p);
// Same quantity from the dense σ on A' ⊗ B ⊗ M (for tests).
double coh_state_cost_dense(const DensityOperator& rho, const InstrumentParam& p);

// Euclidean gradient w.r.t. U: column a·m of U gets
// 2 Tr_B[(1 ⊗ log σ_B^j − log σ_AB^j)(K_j ⊗ 1)ρ] in rows a'·m + j.
Mat coh_state_egrad(const DensityOperator& rho, const InstrumentParam& p, double* cost_out = nullptr);
// Riemannian gradient ½(X − U X† U) on the unitary group.
TangentVector coh_state_grad(const DensityOperator& rho, const InstrumentParam& p, double* cost_out = nullptr);

// ρ^⊗n regrouped as Aⁿ ⊗ Bⁿ with dims {|A|ⁿ, |B|ⁿ}.
DensityOperator regroup_copies(const DensityOperator& rho, int n);

inline constexpr int kInstrumentDimGuard = 1 << 12;

struct InstrumentConfig {
  int restarts = 50;
  std::uint64_t seed = 1;
  RgdConfig rgd;
};

struct InstrumentResult {
  RunReport report;
  double rate = 0.0;           // max(−best cost, −baseline cost) / n
  double baseline_rate = 0.0;  // U = I, i.e. I(A⟩B)_ρ
  bool baseline_won = false;
  InstrumentParam best;
  double seconds = 0.0;
};

// Guard: |A|ⁿ·|B|ⁿ·m ≤ kInstrumentDimGuard.
InstrumentResult optimize_instrument(const DensityOperator& rho, int n_copies, int m_dim, const InstrumentConfig& cfg);

}  // namespace qcapgeo
