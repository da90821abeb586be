#pragma once

#include "qcapgeo/qmath.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qcapgeo {

using ManifoldPoint = std::vector<Mat>;
using TangentVector = std::vector<Mat>;

class Manifold {
 public:
  enum class Kind { stiefel, unitary, sphere, product };

  static Manifold stiefel(int n, int p, bool real = false);
  static Manifold unitary(int n);
  static Manifold sphere(int n);
  static Manifold product(std::vector<Manifold> parts);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int p() const { return p_; }
  bool real() const { return real_; }
  // Factors; a non-product manifold is its own single factor.
  std::vector<Manifold> factors() const;
  // Real dimension of the tangent space.
  int dimension() const;

 private:
  Kind kind_ = Kind::stiefel;
  int n_ = 1, p_ = 1;
  bool real_ = false;
  std::vector<Manifold> parts_;
};

TangentVector project_tangent(const Manifold& m, const ManifoldPoint& v, const std::vector<Mat>& x);
ManifoldPoint retract_qr(const Manifold& m, const ManifoldPoint& v, const TangentVector& x);
std::vector<TangentVector> tangent_basis(const Manifold& m, const ManifoldPoint& v);
ManifoldPoint random_point(const Manifold& m, Rng& rng);

double inner(const TangentVector& x, const TangentVector& y);  // Re Σ Tr(X†Y)
double norm(const TangentVector& x);
TangentVector scaled(const TangentVector& x, double s);
// Largest constraint defect of a point (‖V†V−I‖_F, or |‖ψ‖−1| on spheres).
double point_defect(const Manifold& m, const ManifoldPoint& v);
// Largest tangency defect (‖V†X+X†V‖_F, or |⟨ψ|x⟩| on spheres).
double tangent_defect(const Manifold& m, const ManifoldPoint& v, const TangentVector& x);

using ScalarFn = std::function<double(const ManifoldPoint&)>;

TangentVector fd_riemannian_grad(const ScalarFn& f, const Manifold& m, const ManifoldPoint& v,
                                 double step = 1e-6);
TangentVector fd_riemannian_grad(const ScalarFn& f, const Manifold& m, const ManifoldPoint& v,
                                 double step, double f0);

struct Objective {
  ScalarFn value;
  // Analytical Riemannian gradient; empty means finite differences.
  std::function<TangentVector(const ManifoldPoint&)> gradient;
  double fd_step = 1e-6;
};

struct RgdConfig {
  int max_iters = 500;
  double grad_tol = 1e-7;
  double initial_step = 1.0;
  double contraction = 0.5;
  double sufficient_decrease = 1e-4;
  int max_halvings = 50;
  // Trial step for each Armijo search: `fixed` always starts at initial_step,
  // `doubling` at twice the previous accepted step, `bb` at the
  // Barzilai-Borwein ratio ⟨s,s⟩/⟨s,y⟩ of the last two iterates (ambient
  // differences). The first iteration always uses initial_step.
  enum class StepRule { fixed, doubling, bb };
  StepRule step_rule = StepRule::bb;
  bool keep_trace = true;
};

struct RgdResult {
  ManifoldPoint point;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::string status;  // "converged", "max_iters", "line_search_failed", "nonfinite_start"
  std::vector<double> trace;
};

RgdResult rgd(const Manifold& m, const Objective& obj, ManifoldPoint start, const RgdConfig& cfg);

struct RestartRecord {
  std::uint64_t seed = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::string status;
};

struct RunReport {
  double best_value = 0.0;
  ManifoldPoint best_point;
  int best_restart = -1;
  std::uint64_t seed = 0;
  std::vector<RestartRecord> restarts;
  std::vector<double> best_trace;
  // Best-so-far value after each restart, in restart order.
  std::vector<double> best_so_far;
};

std::uint64_t restart_seed(std::uint64_t base, int index);
// Worker count from QCAPGEO_THREADS (default: hardware concurrency, at least 1).
int worker_count();

// While alive, multistart calls made on this thread run their restarts
// serially (used when an outer pool already owns the workers).
class SerialScope {
 public:
  SerialScope();
  ~SerialScope();
  SerialScope(const SerialScope&) = delete;
  SerialScope& operator=(const SerialScope&) = delete;
};

// Runs `restarts` independent minimizations, possibly concurrently; the
// result is independent of the worker count.
RunReport multistart(int restarts, std::uint64_t seed,
                     const std::function<RgdResult(int index, std::uint64_t seed)>& run_one);

}  // namespace qcapgeo
