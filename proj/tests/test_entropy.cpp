#include "helpers.hpp"

#include "qcapgeo/entropy.hpp"
#include "qcapgeo/lower_channel.hpp"

#include <doctest.h>

#include <limits>

using namespace qcapgeo;

TEST_CASE("von Neumann entropy: pure, maximally mixed, isotropic formula") {
  Rng rng(41);
  Vec v = random_pure(4, rng);
  CHECK(std::abs(von_neumann(DensityOperator(v * v.adjoint(), {4}))) <= 1e-12);
  CHECK(std::abs(von_neumann(DensityOperator(0.5 * Mat::Identity(2, 2), {2})) - 1.0) <= 1e-14);
  const double f = 0.9;
  const double oracle = -f * std::log2(f) - (1 - f) * std::log2((1 - f) / 3);
  CHECK(std::abs(von_neumann(isotropic(2, f)) - oracle) <= 1e-13);
}

TEST_CASE("entropy invariants: additivity and unitary invariance") {
  Rng rng(42);
  for (int t = 0; t < 5; ++t) {
    auto a = th::random_state({2}, rng), b = th::random_state({3}, rng);
    CHECK(std::abs(von_neumann(tensor(a, b)) - von_neumann(a) - von_neumann(b)) <= 1e-10);
    Mat u = random_unitary(3, rng);
    CHECK(std::abs(von_neumann(Mat(u * b.mat() * u.adjoint())) - von_neumann(b)) <= 1e-10);
  }
}

TEST_CASE("coherent information of states") {
  Vec phi = max_entangled(2);
  CHECK(std::abs(coherent_information_state(DensityOperator(phi * phi.adjoint(), {2, 2}), {0}) - 1.0) <= 1e-12);
  Rng rng(43);
  auto a = th::random_state({2}, rng), b = th::random_state({2}, rng);
  CHECK(std::abs(coherent_information_state(tensor(a, b), {0}) + von_neumann(a)) <= 1e-10);
  const double f = 0.95;
  const double h_iso = -f * std::log2(f) - (1 - f) * std::log2((1 - f) / 3);
  CHECK(std::abs(coherent_information_state(isotropic(2, f), {0}) - (1 - h_iso)) <= 1e-12);
  for (int t = 0; t < 10; ++t) {
    auto r = th::random_state({3, 2}, rng);
    const double i = coherent_information_state(r, {0});
    CHECK(i <= std::log2(3.0) + 1e-12);
    CHECK(i >= -std::log2(3.0) - 1e-12);
  }
}

TEST_CASE("channel coherent information closed forms") {
  Rng rng(44);
  auto rho = th::random_state({2}, rng);
  CHECK(std::abs(coherent_information_channel(rho, identity_channel(2)) - von_neumann(rho)) <= 1e-12);
  DensityOperator mixed(0.5 * Mat::Identity(2, 2), {2});
  CHECK(std::abs(coherent_information_channel(mixed, dephasing(0.1)) - (1 - binary_entropy(0.1))) <= 1e-12);
  CHECK(std::abs(coherent_information_channel(mixed, erasure(0.2)) - 0.6) <= 1e-12);
}

TEST_CASE("binary and bosonic entropies") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(std::abs(binary_entropy(0.5) - 1.0) <= 1e-15);
  CHECK(bosonic_entropy(0.0) == 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double e = i / 100.0;
    CHECK(binary_entropy(e) <= bosonic_entropy(e) + 1e-15);
  }
  CHECK_THROWS_AS(binary_entropy(1.5), Error);
  CHECK_THROWS_AS(bosonic_entropy(-0.1), Error);
}

TEST_CASE("relative entropy: zero, classical KL oracle, support violation, data processing") {
  Rng rng(45);
  Mat r = random_density(3, rng);
  CHECK(std::abs(relative_entropy(r, r)) <= 1e-10);
  Mat s = Mat::Zero(2, 2);
  s(0, 0) = 0.75;
  s(1, 1) = 0.25;
  const double kl = 0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(0.5 / 0.25);
  CHECK(std::abs(relative_entropy(0.5 * Mat::Identity(2, 2), s) - kl) <= 1e-13);
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK(relative_entropy(p0, p1) == std::numeric_limits<double>::infinity());
  for (int t = 0; t < 10; ++t) {
    Mat a = random_density(3, rng), b = random_density(3, rng);
    ChannelRep lam = th::random_channel(3, 2, 3, rng);
    const double before = relative_entropy(a, b);
    const double after = relative_entropy(apply_channel(lam, a, {3}, 0), apply_channel(lam, b, {3}, 0));
    CHECK(after <= before + 1e-8);
  }
}

TEST_CASE("amortized gap: σ = ρ reduces to I(E>B), maximally entangled identity gives log d") {
  Rng rng(46);
  ChannelRep ch = gadc(0.3, 0.1);
  auto rho = th::random_state({2, 2}, rng);
  DensityOperator out(apply_channel(ch, rho.mat(), {2, 2}, 1), {2, 2});
  CHECK(std::abs(amortized_gap(ch, rho, rho) - coherent_information_state(out, {0})) <= 1e-9);
  for (int d : {2, 3}) {
    Vec phi = max_entangled(d);
    DensityOperator m(phi * phi.adjoint(), {d, d});
    CHECK(std::abs(amortized_gap(identity_channel(d), m, m) - std::log2(d)) <= 1e-9);
  }
  CHECK_THROWS_AS(amortized_gap(ch, th::random_state({2, 3}, rng), rho), Error);
}

TEST_CASE("amortized gap never exceeds the optimized channel coherent information (GADC 0.3, 0.1)") {
  ChannelRep ch = gadc(0.3, 0.1);
  CodeStateConfig cfg;
  cfg.restarts = 5;
  const double ic = optimize_code_state(ch, 1, 2, cfg).rate;
  Rng rng(47);
  double worst = -1e300;
  for (int t = 0; t < 100; ++t) {
    auto rho = th::random_state({2, 2}, rng);
    DensityOperator sigma = t % 2 ? rho : th::random_state({2, 2}, rng);
    worst = std::max(worst, amortized_gap(ch, rho, sigma));
  }
  CHECK(worst <= ic + 1e-6);
}
