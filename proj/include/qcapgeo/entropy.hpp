#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/qmath.hpp"

#include <vector>

namespace qcapgeo {

// −Σ λ log₂ λ over the given (possibly unnormalized) spectrum, 0·log 0 = 0.
double entropy_from_eigenvalues(const RVec& lambda);
// Works for any PSD matrix; unnormalized blocks are allowed.
double von_neumann(const Mat& m);
double von_neumann(const DensityOperator& rho);

// I(A⟩B) = H(B) − H(AB), A given by the listed subsystems.
double coherent_information_state(const DensityOperator& rho, const std::vector<int>& a_systems);
// H(N(ρ)) − H(Nᶜ(ρ))
double coherent_information_channel(const DensityOperator& rho, const ChannelRep& ch);

double binary_entropy(double p);
double bosonic_entropy(double p);

// Tr ρ(log ρ − log σ); +∞ when an eigenvector of ρ with weight > 1e-10 has
// σ-expectation ≤ 1e-12. σ may be any PSD operator.
double relative_entropy(const Mat& rho, const Mat& sigma);

// D((I⊗N)ρ ‖ 1_E⊗N(σ_A)) − D(ρ‖σ) for ρ, σ on E⊗A. Returns −∞ when only the
// subtracted divergence is infinite and NaN when both are.
double amortized_gap(const ChannelRep& ch, const DensityOperator& rho, const DensityOperator& sigma);

}  // namespace qcapgeo
