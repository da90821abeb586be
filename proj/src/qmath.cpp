#include "qcapgeo/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace qcapgeo {

namespace {

std::vector<int> strides_of(const Dims& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

// Offsets Σ digit_k · stride_k over the listed subsystems, enumerated in
// row-major order of those subsystems.
std::vector<int> offsets_of(const Dims& dims, const std::vector<int>& strides,
                            const std::vector<int>& systems) {
  std::vector<int> out{0};
  for (int s : systems) {
    std::vector<int> next;
    next.reserve(out.size() * dims[s]);
    for (int base : out)
      for (int d = 0; d < dims[s]; ++d) next.push_back(base + d * strides[s]);
    out.swap(next);
  }
  return out;
}

void check_dims(const Mat& m, const Dims& dims) {
  if (m.rows() != m.cols()) throw Error("matrix is not square");
  if (dims.empty() || dim_product(dims) != m.rows())
    throw Error("subsystem dimensions do not match matrix size");
}

}  // namespace

int dim_product(const Dims& dims) {
  int p = 1;
  for (int d : dims) {
    if (d < 1) throw Error("subsystem dimension must be positive");
    p *= d;
  }
  return p;
}

DensityOperator::DensityOperator(Mat mat, Dims dims) : mat_(std::move(mat)), dims_(std::move(dims)) {
  check_dims(mat_, dims_);
  if (!mat_.allFinite()) throw Error("density operator has non-finite entries");
  double herm = (mat_ - mat_.adjoint()).norm();
  if (herm > 1e-12 * std::max(1.0, mat_.norm()))
    throw Error("density operator is not Hermitian");
  mat_ = hermitian_part(mat_);
  double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) throw Error("density operator trace is not 1");
  if (eigvalsh(mat_)(0) < -1e-10) throw Error("density operator has a negative eigenvalue");
}

PureStateVector::PureStateVector(Vec amp, Dims dims) : amp_(std::move(amp)), dims_(std::move(dims)) {
  if (dims_.empty() || dim_product(dims_) != amp_.size())
    throw Error("subsystem dimensions do not match vector size");
  if (std::abs(amp_.norm() - 1.0) > 1e-12) throw Error("state vector is not normalized");
}

DensityOperator PureStateVector::projector() const {
  return DensityOperator(amp_ * amp_.adjoint(), dims_);
}

Isometry::Isometry(Mat mat) : mat_(std::move(mat)) {
  if (mat_.rows() < mat_.cols()) throw Error("isometry needs rows >= cols");
  if (isometry_defect(mat_) > 1e-10) throw Error("matrix is not an isometry");
}

Eigh eigh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

RVec eigvalsh(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigensolver failed");
  return es.eigenvalues();
}

Mat tensor(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  Dims d = a.dims();
  d.insert(d.end(), b.dims().begin(), b.dims().end());
  return DensityOperator(tensor(a.mat(), b.mat()), d);
}

Mat partial_trace(const Mat& m, const Dims& dims, const std::vector<int>& keep) {
  check_dims(m, dims);
  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    if (k < 0 || k >= static_cast<int>(dims.size()) || kept[k])
      throw Error("invalid subsystem index in partial trace");
    kept[k] = true;
  }
  std::vector<int> keep_sorted, traced;
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) (kept[k] ? keep_sorted : traced).push_back(k);
  auto strides = strides_of(dims);
  auto ko = offsets_of(dims, strides, keep_sorted);
  auto to = offsets_of(dims, strides, traced);
  const int nk = static_cast<int>(ko.size());
  Mat out = Mat::Zero(nk, nk);
  for (int j = 0; j < nk; ++j)
    for (int i = 0; i < nk; ++i) {
      cd s = 0.0;
      for (int t : to) s += m(ko[i] + t, ko[j] + t);
      out(i, j) = s;
    }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
  std::vector<int> ks = keep;
  std::sort(ks.begin(), ks.end());
  Dims d;
  for (int k : ks) d.push_back(rho.dims().at(k));
  return DensityOperator(partial_trace(rho.mat(), rho.dims(), keep), d);
}

namespace {
// new_index[old] for a subsystem permutation.
std::vector<int> permutation_map(const Dims& dims, const std::vector<int>& perm) {
  const int n = static_cast<int>(dims.size());
  if (static_cast<int>(perm.size()) != n) throw Error("permutation length mismatch");
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw Error("invalid permutation");
    seen[p] = true;
  }
  Dims new_dims(n);
  for (int i = 0; i < n; ++i) new_dims[i] = dims[perm[i]];
  auto old_strides = strides_of(dims);
  auto new_strides = strides_of(new_dims);
  // stride in the new layout of each old subsystem
  std::vector<int> moved(n);
  for (int i = 0; i < n; ++i) moved[perm[i]] = new_strides[i];
  const int total = dim_product(dims);
  std::vector<int> map(total);
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx, out = 0;
    for (int k = 0; k < n; ++k) {
      int digit = rem / old_strides[k];
      rem %= old_strides[k];
      out += digit * moved[k];
    }
    map[idx] = out;
  }
  return map;
}
}  // namespace

Mat permute_systems(const Mat& m, const Dims& dims, const std::vector<int>& perm) {
  check_dims(m, dims);
  auto map = permutation_map(dims, perm);
  Mat out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(map[i], map[j]) = m(i, j);
  return out;
}

Vec permute_systems(const Vec& v, const Dims& dims, const std::vector<int>& perm) {
  if (dim_product(dims) != v.size()) throw Error("dimension mismatch in permute");
  auto map = permutation_map(dims, perm);
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(map[i]) = v(i);
  return out;
}

Mat apply_local(const Mat& op, const Mat& x, int left, int right) {
  const int din = static_cast<int>(op.cols());
  const int dout = static_cast<int>(op.rows());
  if (x.rows() != static_cast<Eigen::Index>(left) * din * right)
    throw Error("apply_local dimension mismatch");
  const Eigen::Index cols = x.cols();
  if (right == 1) {
    Eigen::Map<const Mat> xin(x.data(), din, left * cols);
    Mat out(static_cast<Eigen::Index>(left) * dout, cols);
    Eigen::Map<Mat> yout(out.data(), dout, left * cols);
    yout.noalias() = op * xin;
    return out;
  }
  using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat out(static_cast<Eigen::Index>(left) * dout * right, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (int l = 0; l < left; ++l) {
      Eigen::Map<const RowMat> xs(x.col(c).data() + static_cast<Eigen::Index>(l) * din * right, din, right);
      Eigen::Map<RowMat> ys(out.col(c).data() + static_cast<Eigen::Index>(l) * dout * right, dout, right);
      ys.noalias() = op * xs;
    }
  return out;
}

Mat conj_local(const Mat& op, const Mat& m, int left, int right) {
  Mat t = apply_local(op, m, left, right);
  Mat tt = t.adjoint();
  return apply_local(op, tt, left, right).adjoint();
}

Mat matrix_log_psd(const Mat& h, double floor) {
  Eigh e = eigh(h);
  if (e.values.size() && e.values(0) < -1e-8) throw Error("matrix_log_psd: negative eigenvalue");
  RVec lv(e.values.size());
  for (Eigen::Index i = 0; i < lv.size(); ++i) lv(i) = std::log2(std::max(e.values(i), floor));
  return e.vectors * lv.asDiagonal() * e.vectors.adjoint();
}

double trace_norm(const Mat& x) {
  if (x.rows() == x.cols() && (x - x.adjoint()).norm() <= 1e-14 * std::max(1.0, x.norm()))
    return eigvalsh(hermitian_part(x)).cwiseAbs().sum();
  Eigen::BDCSVD<Mat> svd(x);
  return svd.singularValues().sum();
}

PureStateVector purify(const DensityOperator& rho) {
  Eigh e = eigh(rho.mat());
  const int n = rho.dim();
  if (e.values(0) < -1e-8) throw Error("purify: input is not PSD");
  Vec phi = Vec::Zero(static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < n; ++i) {
    double w = std::sqrt(std::max(e.values(i), 0.0));
    for (int r = 0; r < n; ++r) phi(static_cast<Eigen::Index>(r) * n + i) = w * e.vectors(r, i);
  }
  phi /= phi.norm();
  Dims d = rho.dims();
  d.push_back(n);
  return PureStateVector(phi, d);
}

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

Mat ket(int dim, int i) {
  Mat k = Mat::Zero(dim, 1);
  k(i, 0) = 1.0;
  return k;
}

Vec max_entangled(int d) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i) * d + i) = 1.0 / std::sqrt(double(d));
  return v;
}

Mat random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = nd(rng);
      double im = nd(rng);
      g(i, j) = cd(re, im) / std::sqrt(2.0);
    }
  return g;
}

Mat qr_positive(const Mat& a) {
  const Eigen::Index n = a.rows(), p = a.cols();
  if (n < p) throw Error("QR retraction needs rows >= cols");
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, p);
  const Mat& r = qr.matrixQR();
  double scale = std::max(1.0, a.norm());
  for (Eigen::Index k = 0; k < p; ++k) {
    double mag = std::abs(r(k, k));
    if (mag < 1e-13 * scale) throw Error("QR retraction: rank deficient input");
    q.col(k) *= r(k, k) / mag;
  }
  return q;
}

Mat random_isometry(int n, int p, Rng& rng) { return qr_positive(random_gaussian(n, p, rng)); }
Mat random_unitary(int n, Rng& rng) { return random_isometry(n, n, rng); }

Vec random_pure(int n, Rng& rng) {
  Mat g = random_gaussian(n, 1, rng);
  return g.col(0) / g.norm();
}

Mat random_density(int n, Rng& rng) {
  Mat g = random_gaussian(n, n, rng);
  Mat r = g * g.adjoint();
  r /= r.trace().real();
  return hermitian_part(r);
}

Mat random_hermitian(int n, Rng& rng) { return hermitian_part(random_gaussian(n, n, rng)); }

double isometry_defect(const Mat& v) {
  return (v.adjoint() * v - Mat::Identity(v.cols(), v.cols())).norm();
}

void write_matrix(std::ostream& os, const Mat& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

Mat read_matrix(std::istream& is) {
  long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) throw Error("matrix text: bad header");
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      double re, im;
      if (!(is >> re >> im)) throw Error("matrix text: truncated entries");
      if (!std::isfinite(re) || !std::isfinite(im)) throw Error("matrix text: non-finite entry");
      m(i, j) = cd(re, im);
    }
  return m;
}

void save_matrix(const std::string& path, const Mat& m) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_matrix(f, m);
}

Mat load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  return read_matrix(f);
}

}  // namespace qcapgeo
