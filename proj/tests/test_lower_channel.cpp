#include "helpers.hpp"

#include "qcapgeo/entropy.hpp"
#include "qcapgeo/lower_channel.hpp"

#include <doctest.h>

using namespace qcapgeo;

namespace {

AnsatzParam random_ansatz(int r, int a, int n, Rng& rng) {
  return ansatz_from_point(random_point(ansatz_manifold(r, a, n), rng), r, a, n);
}

// I_left ⊗ U ⊗ I_right on the full register, applied in list order to |0…0⟩
Vec dense_ansatz(const AnsatzParam& p) {
  Dims d = ansatz_site_dims(p.r_dim, p.a_dim, p.n_copies);
  const int total = dim_product(d);
  Vec psi = Vec::Zero(total);
  psi(0) = 1.0;
  auto pairs = ansatz_pairs(p.n_copies);
  for (size_t k = 0; k < pairs.size(); ++k) {
    int left = 1, right = 1;
    for (int j = 0; j < pairs[k]; ++j) left *= d[j];
    for (int j = pairs[k] + 2; j < static_cast<int>(d.size()); ++j) right *= d[j];
    Mat op = tensor(tensor(Mat::Identity(left, left), p.u_list[k]), Mat::Identity(right, right));
    psi = op * psi;
  }
  return psi;
}

CodeStateConfig small(int restarts, int iters = 300) {
  CodeStateConfig c;
  c.restarts = restarts;
  c.rgd.max_iters = iters;
  c.rgd.grad_tol = 1e-8;
  return c;
}

}  // namespace

TEST_CASE("ansatz layout: pairs, manifold sizes, identity start") {
  CHECK(ansatz_pairs(1) == std::vector<int>{0});
  CHECK(ansatz_pairs(3) == std::vector<int>{0, 1, 2, 1, 0});
  CHECK(ansatz_site_dims(3, 2, 2) == Dims{3, 2, 2});
  CHECK(ansatz_manifold(2, 2, 3).dimension() == 5 * 16);

  std::vector<Mat> ids;
  for (int k = 0; k < 5; ++k) ids.push_back(Mat::Identity(4, 4));
  Vec v = ansatz_vector(ansatz_from_point(ids, 2, 2, 3));
  CHECK(std::abs(v(0) - 1.0) <= 1e-15);
  CHECK(std::abs(v.norm() - 1.0) <= 1e-15);
  CHECK_THROWS_AS(ansatz_from_point({Mat::Identity(4, 4)}, 2, 2, 3), Error);
}

TEST_CASE("ansatz_state: dense product oracle for n = 1, 2, 3 and erasure-sized inputs") {
  Rng rng(91);
  for (auto [r, a, n] : std::vector<std::tuple<int, int, int>>{{2, 2, 1}, {2, 2, 2}, {2, 2, 3}, {3, 2, 3}, {2, 3, 2}}) {
    AnsatzParam p = random_ansatz(r, a, n, rng);
    CHECK((ansatz_vector(p) - dense_ansatz(p)).norm() <= 1e-12);
    CHECK(ansatz_state(p).dims() == ansatz_site_dims(r, a, n));
  }
}

TEST_CASE("ansatz_state: n = 1 reaches any Schmidt rank") {
  // U maps |00⟩ to a chosen state, so every two-qubit state is reachable
  Rng rng(92);
  Vec target = random_pure(4, rng);
  Mat u = Mat::Zero(4, 4);
  u.col(0) = target;
  Eigen::HouseholderQR<Mat> qr(u + 1e-3 * random_gaussian(4, 4, rng));
  Mat q = qr.householderQ();
  q.col(0) *= std::conj(q.col(0).dot(target)) / std::abs(q.col(0).dot(target));
  AnsatzParam p = ansatz_from_point({q}, 2, 2, 1);
  CHECK(std::abs(std::abs(ansatz_vector(p).dot(q.col(0))) - 1.0) <= 1e-12);
  Vec bell = max_entangled(2);
  Mat ub = Mat::Zero(4, 4);
  ub.col(0) = bell;
  ub.col(1) = (Vec(4) << 0, 1, 0, 0).finished();
  ub.col(2) = (Vec(4) << 0, 0, 1, 0).finished();
  ub.col(3) = (Vec(4) << std::sqrt(0.5), 0, 0, -std::sqrt(0.5)).finished();
  CHECK((ansatz_vector(ansatz_from_point({ub}, 2, 2, 1)) - bell).norm() <= 1e-15);
}

TEST_CASE("coh_channel_cost: identity with a maximally entangled code, local R unitary") {
  Vec bell = max_entangled(2);
  CHECK(std::abs(code_state_cost(identity_channel(2), 1, 2, bell) + 1.0) <= 1e-12);
  Rng rng(93);
  ChannelRep ch = gadc(0.3, 0.1);
  for (int n : {1, 2}) {
    AnsatzParam p = random_ansatz(2, 2, n, rng);
    Vec psi = ansatz_vector(p);
    Mat ur = tensor(random_unitary(2, rng), Mat::Identity(1 << n, 1 << n));
    CHECK(std::abs(code_state_cost(ch, n, 2, psi) - code_state_cost(ch, n, 2, Vec(ur * psi))) <= 1e-10);
    CHECK(std::abs(coh_channel_cost(ch, p) - code_state_cost(ch, n, 2, psi)) <= 1e-14);
  }
}

TEST_CASE("CopyChannel: output equals the dense n-fold channel") {
  Rng rng(94);
  ChannelRep ch = th::random_channel(2, 3, 2, rng);
  CopyChannel cc(ch, 2, 2);
  Vec psi = random_pure(8, rng);
  Mat rho = psi * psi.adjoint();
  Mat dense = apply_channel(ch, apply_channel(ch, rho, {2, 2, 2}, 1), {2, 3, 2}, 2);
  CHECK((cc.output(psi) - dense).norm() <= 1e-12);
  const double oracle = -coherent_information_state(DensityOperator(dense, {2, 9}), {0});
  CHECK(std::abs(cc.cost(psi) - oracle) <= 1e-10);
  CHECK_THROWS_AS(CopyChannel(ch, 20, 2), Error);
}

TEST_CASE("psi_gradient: FD directional derivative, Bell critical point, sphere orthogonality") {
  Rng rng(95);
  ChannelRep ch = gadc(0.3, 0.1);
  for (int n : {1, 2}) {
    const int dim = 2 << n;
    Vec psi = random_pure(dim, rng);
    Vec g = psi_gradient(ch, n, 2, psi);
    const double h = 1e-6;
    for (int t = 0; t < 4; ++t) {
      Vec dir = random_pure(dim, rng);
      const double fp = code_state_cost(ch, n, 2, Vec(psi + h * dir));
      const double fm = code_state_cost(ch, n, 2, Vec(psi - h * dir));
      // the cost is scale invariant after normalization, so compare on the raw vector
      const double fd = (fp - fm) / (2 * h);
      CHECK(std::abs(fd - g.dot(dir).real()) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    Manifold sp = Manifold::sphere(dim);
    TangentVector rg = project_tangent(sp, {psi}, {g});
    CHECK(std::abs(psi.dot(rg[0].col(0))) <= 1e-12);
  }
  Vec bell = max_entangled(2);
  Vec gb = psi_gradient(identity_channel(2), 1, 2, bell);
  CHECK(project_tangent(Manifold::sphere(4), {bell}, {gb})[0].norm() <= 1e-8);
}

TEST_CASE("coh_channel_grad: per-factor FD agreement and tangency") {
  Rng rng(96);
  ChannelRep ch = gadc(0.3, 0.1);
  for (int n : {1, 2, 3}) {
    Manifold man = ansatz_manifold(2, 2, n);
    AnsatzParam p = random_ansatz(2, 2, n, rng);
    TangentVector g = coh_channel_grad(ch, p);
    CHECK(tangent_defect(man, p.u_list, g) <= 1e-10);
    ScalarFn f = [&](const ManifoldPoint& u) { return coh_channel_cost(ch, ansatz_from_point(u, 2, 2, n)); };
    TangentVector fd = fd_riemannian_grad(f, man, p.u_list, 1e-6);
    for (size_t k = 0; k < g.size(); ++k)
      CHECK((g[k] - fd[k]).norm() <= 1e-5 * std::max(1.0, g[k].norm()));
  }
}

TEST_CASE("optimize_code_state: dephasing and erasure closed forms at n = 1") {
  CHECK(std::abs(optimize_code_state(dephasing(0.1), 1, 2, small(2)).rate - (1 - binary_entropy(0.1))) <= 1e-3);
  CHECK(std::abs(optimize_code_state(erasure(0.2), 1, 2, small(2)).rate - 0.6) <= 1e-3);
  CHECK_THROWS_AS(optimize_code_state(dephasing(0.1), 13, 2, small(1)), Error);
}

TEST_CASE("optimize_code_state: ansatz matches the sphere at n = 1; |R| = 3 is no worse") {
  ChannelRep ch = gadc(0.3, 0.1);
  const double ans = optimize_code_state(ch, 1, 2, small(3)).rate;
  const double sph = optimize_code_state_sphere(ch, 1, 2, small(3)).rate;
  CHECK(std::abs(ans - sph) <= 1e-5);
  const double r3 = optimize_code_state(ch, 1, 3, small(3)).rate;
  CHECK(r3 >= ans - 2e-4);
  CodeStateResult a = optimize_code_state(ch, 2, 2, small(2, 100));
  CodeStateResult b = optimize_code_state(ch, 2, 2, small(2, 100));
  CHECK(a.rate == b.rate);
  CHECK(std::abs(a.psi.norm() - 1.0) <= 1e-12);
}
