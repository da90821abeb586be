#include "helpers.hpp"

#include "qcapgeo/entropy.hpp"
#include "qcapgeo/upper.hpp"

#include <doctest.h>

using namespace qcapgeo;

namespace {

ExtensionConfig cheap(int restarts, int iters, std::uint64_t seed = 1) {
  ExtensionConfig c;
  c.restarts = restarts;
  c.max_iters = iters;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("tails: zero at ε = 0, monotone on a grid, winter dominates") {
  for (int d : {2, 3, 4}) {
    CHECK(continuity_tail(0.0, d) == 0.0);
    CHECK(winter_tail(0.0, d) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double e = i / 100.0;
      const double c = continuity_tail(e, d);
      CHECK(c > prev);
      CHECK(winter_tail(e, d) >= c - 1e-15);
      prev = c;
    }
  }
  const double e = 0.01;
  CHECK(std::abs(continuity_tail(e, 2) - (e * std::log2(3.0) + binary_entropy(e))) <= 1e-15);
}

TEST_CASE("state bound: Bell state gives 1, isotropic bound sits between hashing and log d") {
  Vec phi = max_entangled(2);
  DensityOperator bell(phi * phi.adjoint(), {2, 2});
  DegradabilityCertificate c = dg_state(bell);
  CHECK(std::abs(state_bound_continuity(bell, c, BoundVariant::u_m_form) - 1.0) <= 1e-6);
  CHECK(std::abs(state_bound_continuity(bell, c, BoundVariant::coherent_form) - 1.0) <= 1e-6);

  for (double f : {0.85, 0.95}) {
    DensityOperator rho = isotropic(2, f);
    DegradabilityCertificate cert = dg_state(rho);
    const double hash = coherent_information_state(rho, {0});
    for (auto v : {BoundVariant::u_m_form, BoundVariant::coherent_form}) {
      const double b = state_bound_continuity(rho, cert, v);
      CHECK(b >= hash - 1e-9);
      CHECK(b <= 1.0 + 2 * continuity_tail(cert.epsilon, 4) + 1e-9);
    }
    CHECK(state_bound_winter(rho, cert) >= state_bound_continuity(rho, cert, BoundVariant::u_m_form) - 1e-12);
  }
}

TEST_CASE("channel bound: identity, dephasing closed form, erasure") {
  ChannelRep id = identity_channel(2);
  CHECK(std::abs(channel_bound_continuity(id, dg_channel(id)) - 1.0) <= 1e-6);
  ChannelRep deph = dephasing(0.1);
  CHECK(std::abs(channel_bound_continuity(deph, dg_channel(deph)) - (1 - binary_entropy(0.1))) <= 2e-3);
  // degradable erasure: capacity 1 − 2p
  ChannelRep er = erasure(0.3);
  const double b = channel_bound_continuity(er, dg_channel(er));
  CHECK(b >= 0.4 - 2e-3);
  CHECK(b <= 0.4 + 2e-3);
  ChannelRep half = erasure(0.5);
  CHECK(channel_bound_continuity(half, dg_channel(half)) >= -1e-6);
}

TEST_CASE("extension: |F| = 1 reproduces the unextended bound") {
  DensityOperator rho = isotropic(2, 0.9);
  ExtensionProblem p = ExtensionProblem::for_state(rho, 1, 4, BoundVariant::u_m_form);
  Rng rng(71);
  ManifoldPoint v = random_point(p.manifold(), rng);
  DegradabilityCertificate c = dg_state(rho);
  // two SDP solves of the same ρ_AB, each good to ~1e-6
  CHECK(std::abs(extension_objective(v, p) - state_bound_continuity(rho, c, BoundVariant::u_m_form)) <= 1e-5);
  CHECK((extended_state(p, v[0]).mat() - rho.mat()).norm() <= 1e-12);
}

TEST_CASE("extension: extended objects are valid states and channels") {
  Rng rng(72);
  ExtensionProblem ps = ExtensionProblem::for_state(isotropic(2, 0.9), 2, 2);
  DensityOperator ext = extended_state(ps, random_point(ps.manifold(), rng)[0]);
  CHECK(ext.dims() == Dims{2, 4});
  // tracing the flag gives back ρ
  CHECK((partial_trace(ext.mat(), {4, 2}, {0}) - isotropic(2, 0.9).mat()).norm() <= 1e-12);

  ExtensionProblem pc = ExtensionProblem::for_channel(gadc(0.3, 0.1), 2, 2);
  ChannelRep ch = extended_channel(pc, random_point(pc.manifold(), rng)[0]);
  CHECK(ch.out_dim() == 4);
  Mat s = Mat::Zero(2, 2);
  for (const Mat& k : ch.kraus()) s += k.adjoint() * k;
  CHECK((s - Mat::Identity(2, 2)).norm() <= 1e-12);
  Mat rho = random_density(2, rng);
  Mat flagless = partial_trace(apply_channel(ch, rho, {2}, 0), {2, 2}, {0});
  CHECK((flagless - apply_channel(gadc(0.3, 0.1), rho, {2}, 0)).norm() <= 1e-12);
}

TEST_CASE("extension objective is locally Lipschitz along a retraction") {
  Rng rng(73);
  ExtensionProblem p = ExtensionProblem::for_state(isotropic(2, 0.9), 2, 2);
  Manifold m = p.manifold();
  ManifoldPoint v = random_point(m, rng);
  TangentVector x = project_tangent(m, v, {random_gaussian(static_cast<int>(v[0].rows()), static_cast<int>(v[0].cols()), rng)});
  x = scaled(x, 1.0 / norm(x));
  const double f0 = extension_objective(v, p);
  for (double t : {1e-3, 1e-4}) {
    const double f1 = extension_objective(retract_qr(m, v, scaled(x, t)), p);
    CHECK(std::abs(f1 - f0) <= 50 * t);
  }
}

TEST_CASE("optimize_extension: degradable Bell keeps the unextended value") {
  Vec phi = max_entangled(2);
  DensityOperator bell(phi * phi.adjoint(), {2, 2});
  UpperBoundResult r = optimize_extension(ExtensionProblem::for_state(bell, 2, 2), cheap(1, 5));
  CHECK(std::abs(r.bound - 1.0) <= 1e-6);
  CHECK(r.bound <= r.bound_unextended);
}

TEST_CASE("optimize_extension: isotropic 0.85 improves, stays above hashing, deterministic") {
  DensityOperator rho = isotropic(2, 0.85);
  ExtensionProblem p = ExtensionProblem::for_state(rho, 2, 2);
  UpperBoundResult a = optimize_extension(p, cheap(2, 15, 3));
  CHECK(a.bound >= a.hashing - 1e-9);
  CHECK(a.bound < a.bound_unextended - 1e-3);
  CHECK(std::isfinite(a.report.best_value));
  for (size_t i = 1; i < a.report.best_trace.size(); ++i) CHECK(a.report.best_trace[i] <= a.report.best_trace[i - 1]);
  UpperBoundResult b = optimize_extension(p, cheap(2, 15, 3));
  CHECK(a.bound == b.bound);
  CHECK(a.report.best_restart == b.report.best_restart);
}

TEST_CASE("bound variant names round trip") {
  for (auto v : {BoundVariant::u_m_form, BoundVariant::coherent_form})
    CHECK(bound_variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(bound_variant_from_string("other"), Error);
}
