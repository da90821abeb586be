#include "qcapgeo/manifolds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace qcapgeo {

Manifold Manifold::stiefel(int n, int p, bool real) {
  if (p < 1 || n < p) throw Error("Stiefel manifold needs n >= p >= 1");
  Manifold m;
  m.kind_ = Kind::stiefel;
  m.n_ = n;
  m.p_ = p;
  m.real_ = real;
  return m;
}

Manifold Manifold::unitary(int n) {
  if (n < 1) throw Error("unitary manifold needs n >= 1");
  Manifold m;
  m.kind_ = Kind::unitary;
  m.n_ = m.p_ = n;
  return m;
}

Manifold Manifold::sphere(int n) {
  if (n < 1) throw Error("sphere needs n >= 1");
  Manifold m;
  m.kind_ = Kind::sphere;
  m.n_ = n;
  m.p_ = 1;
  return m;
}

Manifold Manifold::product(std::vector<Manifold> parts) {
  if (parts.empty()) throw Error("empty product manifold");
  Manifold m;
  m.kind_ = Kind::product;
  for (auto& f : parts) {
    if (f.kind_ == Kind::product) throw Error("nested product manifolds are not supported");
  }
  m.parts_ = std::move(parts);
  return m;
}

std::vector<Manifold> Manifold::factors() const {
  if (kind_ == Kind::product) return parts_;
  return {*this};
}

int Manifold::dimension() const {
  switch (kind_) {
    case Kind::stiefel: return real_ ? n_ * p_ - p_ * (p_ + 1) / 2 : 2 * n_ * p_ - p_ * p_;
    case Kind::unitary: return n_ * n_;
    case Kind::sphere: return 2 * n_ - 2;
    case Kind::product: {
      int d = 0;
      for (auto& f : parts_) d += f.dimension();
      return d;
    }
  }
  return 0;
}

namespace {

void check_shapes(const Manifold& m, const std::vector<Mat>& x) {
  auto fs = m.factors();
  if (fs.size() != x.size()) throw Error("manifold: factor count mismatch");
  for (size_t k = 0; k < fs.size(); ++k)
    if (x[k].rows() != fs[k].n() || x[k].cols() != fs[k].p()) throw Error("manifold: shape mismatch");
}

Mat project_one(const Manifold& f, const Mat& v, const Mat& x_in) {
  Mat x = f.real() ? Mat(x_in.real().cast<cd>()) : x_in;
  switch (f.kind()) {
    case Manifold::Kind::stiefel: {
      Mat vx = v.adjoint() * x;
      return x - v * vx + 0.5 * v * (vx - vx.adjoint());
    }
    case Manifold::Kind::unitary: return 0.5 * (x - v * x.adjoint() * v);
    case Manifold::Kind::sphere: return x - v * (v.adjoint() * x);
    default: throw Error("project_one: product factor");
  }
}

Mat retract_one(const Manifold& f, const Mat& v, const Mat& x) {
  if (f.kind() == Manifold::Kind::sphere) {
    Mat y = v + x;
    double nr = y.norm();
    if (nr < 1e-300) throw Error("sphere retraction: zero vector");
    return y / nr;
  }
  Mat q = qr_positive(v + x);
  if (f.real()) q = q.real().cast<cd>();
  return q;
}

// Columns completing v to an orthonormal basis.
Mat orth_complement(const Mat& v) {
  const Eigen::Index n = v.rows(), p = v.cols();
  if (n == p) return Mat(n, 0);
  Eigen::HouseholderQR<Mat> qr(v);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - p);
}

std::vector<Mat> basis_one(const Manifold& f, const Mat& v) {
  std::vector<Mat> out;
  const int n = f.n(), p = f.p();
  const cd I(0.0, 1.0);
  const double r2 = 1.0 / std::sqrt(2.0);
  if (f.kind() != Manifold::Kind::sphere) {
    // V Ω with Ω skew-Hermitian (skew-symmetric when real)
    for (int j = 0; j < p; ++j) {
      if (!f.real()) {
        Mat o = Mat::Zero(p, p);
        o(j, j) = I;
        out.push_back(v * o);
      }
      for (int k = j + 1; k < p; ++k) {
        Mat o = Mat::Zero(p, p);
        o(j, k) = r2;
        o(k, j) = -r2;
        out.push_back(v * o);
        if (!f.real()) {
          Mat s = Mat::Zero(p, p);
          s(j, k) = I * r2;
          s(k, j) = I * r2;
          out.push_back(v * s);
        }
      }
    }
  }
  Mat vp = orth_complement(v);
  if (f.real()) vp = vp.real().cast<cd>();
  for (Eigen::Index a = 0; a < vp.cols(); ++a)
    for (int j = 0; j < p; ++j) {
      Mat e = Mat::Zero(n, p);
      e.col(j) = vp.col(a);
      out.push_back(e);
      if (!f.real()) out.push_back(I * e);
    }
  return out;
}

}  // namespace

TangentVector project_tangent(const Manifold& m, const ManifoldPoint& v, const std::vector<Mat>& x) {
  check_shapes(m, v);
  check_shapes(m, x);
  auto fs = m.factors();
  TangentVector out(fs.size());
  for (size_t k = 0; k < fs.size(); ++k) out[k] = project_one(fs[k], v[k], x[k]);
  return out;
}

ManifoldPoint retract_qr(const Manifold& m, const ManifoldPoint& v, const TangentVector& x) {
  check_shapes(m, v);
  check_shapes(m, x);
  auto fs = m.factors();
  ManifoldPoint out(fs.size());
  for (size_t k = 0; k < fs.size(); ++k) out[k] = retract_one(fs[k], v[k], x[k]);
  return out;
}

std::vector<TangentVector> tangent_basis(const Manifold& m, const ManifoldPoint& v) {
  check_shapes(m, v);
  auto fs = m.factors();
  std::vector<TangentVector> out;
  for (size_t k = 0; k < fs.size(); ++k) {
    for (Mat& b : basis_one(fs[k], v[k])) {
      TangentVector t(fs.size());
      for (size_t j = 0; j < fs.size(); ++j) t[j] = Mat::Zero(fs[j].n(), fs[j].p());
      t[k] = std::move(b);
      out.push_back(std::move(t));
    }
  }
  return out;
}

ManifoldPoint random_point(const Manifold& m, Rng& rng) {
  ManifoldPoint out;
  for (const Manifold& f : m.factors()) {
    Mat g = random_gaussian(f.n(), f.p(), rng);
    if (f.real()) g = g.real().cast<cd>();
    out.push_back(f.kind() == Manifold::Kind::sphere ? Mat(g / g.norm()) : qr_positive(g));
  }
  return out;
}

double inner(const TangentVector& x, const TangentVector& y) {
  if (x.size() != y.size()) throw Error("inner: factor count mismatch");
  double s = 0.0;
  for (size_t k = 0; k < x.size(); ++k) s += (x[k].array().conjugate() * y[k].array()).sum().real();
  return s;
}

double norm(const TangentVector& x) { return std::sqrt(std::max(inner(x, x), 0.0)); }

TangentVector scaled(const TangentVector& x, double s) {
  TangentVector out(x.size());
  for (size_t k = 0; k < x.size(); ++k) out[k] = s * x[k];
  return out;
}

double point_defect(const Manifold& m, const ManifoldPoint& v) {
  check_shapes(m, v);
  auto fs = m.factors();
  double d = 0.0;
  for (size_t k = 0; k < fs.size(); ++k)
    d = std::max(d, fs[k].kind() == Manifold::Kind::sphere ? std::abs(v[k].norm() - 1.0)
                                                          : isometry_defect(v[k]));
  return d;
}

double tangent_defect(const Manifold& m, const ManifoldPoint& v, const TangentVector& x) {
  auto fs = m.factors();
  double d = 0.0;
  for (size_t k = 0; k < fs.size(); ++k) {
    Mat a = v[k].adjoint() * x[k];
    d = std::max(d, fs[k].kind() == Manifold::Kind::sphere ? a.norm() : (a + a.adjoint()).norm());
  }
  return d;
}

TangentVector fd_riemannian_grad(const ScalarFn& f, const Manifold& m, const ManifoldPoint& v, double step,
                                 double f0) {
  auto basis = tangent_basis(m, v);
  TangentVector g(v.size());
  for (size_t k = 0; k < v.size(); ++k) g[k] = Mat::Zero(v[k].rows(), v[k].cols());
  for (const TangentVector& z : basis) {
    double c = (f(retract_qr(m, v, scaled(z, step))) - f0) / step;
    for (size_t k = 0; k < g.size(); ++k) g[k] += c * z[k];
  }
  return g;
}

TangentVector fd_riemannian_grad(const ScalarFn& f, const Manifold& m, const ManifoldPoint& v, double step) {
  return fd_riemannian_grad(f, m, v, step, f(v));
}

RgdResult rgd(const Manifold& m, const Objective& obj, ManifoldPoint start, const RgdConfig& cfg) {
  RgdResult r;
  r.point = std::move(start);
  r.value = obj.value(r.point);
  if (!std::isfinite(r.value)) {
    r.status = "nonfinite_start";
    return r;
  }
  if (cfg.keep_trace) r.trace.push_back(r.value);
  double step = cfg.initial_step;
  r.status = "max_iters";
  ManifoldPoint prev_x;
  TangentVector prev_g;
  for (int it = 0; it < cfg.max_iters; ++it) {
    TangentVector g = obj.gradient ? obj.gradient(r.point)
                                   : fd_riemannian_grad(obj.value, m, r.point, obj.fd_step, r.value);
    double gn2 = inner(g, g);
    r.grad_norm = std::sqrt(gn2);
    r.iterations = it + 1;
    if (r.grad_norm <= cfg.grad_tol) {
      r.status = "converged";
      break;
    }
    double s = cfg.initial_step;
    if (it > 0 && cfg.step_rule == RgdConfig::StepRule::doubling) s = std::min(2.0 * step, 1e6);
    if (it > 0 && cfg.step_rule == RgdConfig::StepRule::bb) {
      TangentVector ds(g.size()), dg(g.size());
      for (size_t k = 0; k < g.size(); ++k) {
        ds[k] = r.point[k] - prev_x[k];
        dg[k] = g[k] - prev_g[k];
      }
      double sy = inner(ds, dg);
      s = sy > 0 ? std::clamp(inner(ds, ds) / sy, 1e-10, 1e10) : std::min(2.0 * step, 1e6);
    }
    prev_x = r.point;
    prev_g = g;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      ManifoldPoint trial;
      double fv;
      try {
        trial = retract_qr(m, r.point, scaled(g, -s));
        fv = obj.value(trial);
      } catch (const Error&) {
        fv = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(fv) && fv <= r.value - cfg.sufficient_decrease * s * gn2) {
        r.point = std::move(trial);
        r.value = fv;
        step = s;
        accepted = true;
        break;
      }
      s *= cfg.contraction;
    }
    if (!accepted) {
      r.status = "line_search_failed";
      break;
    }
    if (cfg.keep_trace) r.trace.push_back(r.value);
  }
  return r;
}

std::uint64_t restart_seed(std::uint64_t base, int index) {
  // splitmix64 of (base, index)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  int n = std::max(1, hw);
  if (const char* env = std::getenv("QCAPGEO_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) n = v;
  }
  return n;
}

namespace {
thread_local int serial_depth = 0;
}  // namespace

SerialScope::SerialScope() { ++serial_depth; }
SerialScope::~SerialScope() { --serial_depth; }

RunReport multistart(int restarts, std::uint64_t seed,
                     const std::function<RgdResult(int, std::uint64_t)>& run_one) {
  if (restarts < 1) throw Error("multistart needs at least one restart");
  std::vector<RgdResult> results(restarts);
  std::vector<std::uint64_t> seeds(restarts);
  for (int i = 0; i < restarts; ++i) seeds[i] = restart_seed(seed, i);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < restarts; i = next++) {
      try {
        results[i] = run_one(i, seeds[i]);
      } catch (const std::exception& e) {
        results[i].value = std::numeric_limits<double>::infinity();
        results[i].status = std::string("error: ") + e.what();
      }
    }
  };
  int nw = serial_depth > 0 ? 1 : std::min(worker_count(), restarts);
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  RunReport rep;
  rep.seed = seed;
  rep.best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < restarts; ++i) {
    const RgdResult& r = results[i];
    rep.restarts.push_back({seeds[i], r.value, r.grad_norm, r.iterations, r.status});
    if (std::isfinite(r.value) && r.value < rep.best_value) {
      rep.best_value = r.value;
      rep.best_point = r.point;
      rep.best_restart = i;
      rep.best_trace = r.trace;
    }
    rep.best_so_far.push_back(rep.best_value);
  }
  if (rep.best_restart < 0) throw Error("multistart: every restart failed");
  return rep;
}

}  // namespace qcapgeo
