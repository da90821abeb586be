#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcapgeo {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Dims = std::vector<int>;
using Rng = std::mt19937_64;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kLogFloor = 1e-12;

int dim_product(const Dims& dims);

// Positive unit-trace Hermitian matrix with subsystem dimensions.
class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(Mat mat, Dims dims);

  const Mat& mat() const { return mat_; }
  const Dims& dims() const { return dims_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

 private:
  Mat mat_;
  Dims dims_;
};

class PureStateVector {
 public:
  PureStateVector() = default;
  PureStateVector(Vec amp, Dims dims);

  const Vec& amp() const { return amp_; }
  const Dims& dims() const { return dims_; }
  DensityOperator projector() const;

 private:
  Vec amp_;
  Dims dims_;
};

class Isometry {
 public:
  Isometry() = default;
  explicit Isometry(Mat mat);
  const Mat& mat() const { return mat_; }

 private:
  Mat mat_;
};

// Hermitian eigendecomposition, eigenvalues ascending.
struct Eigh {
  RVec values;
  Mat vectors;
};
Eigh eigh(const Mat& h);
RVec eigvalsh(const Mat& h);

Mat tensor(const Mat& a, const Mat& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

Mat partial_trace(const Mat& m, const Dims& dims, const std::vector<int>& keep);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep);

// perm[i] is the old subsystem placed at position i.
Mat permute_systems(const Mat& m, const Dims& dims, const std::vector<int>& perm);
Vec permute_systems(const Vec& v, const Dims& dims, const std::vector<int>& perm);

// (I_left ⊗ op ⊗ I_right) x for a matrix x with left*op.cols()*right rows.
Mat apply_local(const Mat& op, const Mat& x, int left, int right);
// (I ⊗ op ⊗ I) m (I ⊗ op ⊗ I)†
Mat conj_local(const Mat& op, const Mat& m, int left, int right);

Mat matrix_log_psd(const Mat& h, double floor = kLogFloor);
double trace_norm(const Mat& x);
PureStateVector purify(const DensityOperator& rho);

Mat hermitian_part(const Mat& m);
Mat ket(int dim, int i);
Vec max_entangled(int d);  // (1/√d) Σ |ii⟩

// Random objects; all seeded through the caller's generator.
Mat random_gaussian(int rows, int cols, Rng& rng);
Mat qr_positive(const Mat& a);  // Q factor with nonnegative R diagonal
Mat random_isometry(int n, int p, Rng& rng);
Mat random_unitary(int n, Rng& rng);
Vec random_pure(int n, Rng& rng);
Mat random_density(int n, Rng& rng);
Mat random_hermitian(int n, Rng& rng);

double isometry_defect(const Mat& v);  // ‖V†V − I‖_F

// Text format: "rows cols" then one "re im" line per entry, row-major, 17 digits.
void write_matrix(std::ostream& os, const Mat& m);
Mat read_matrix(std::istream& is);
void save_matrix(const std::string& path, const Mat& m);
Mat load_matrix(const std::string& path);

}  // namespace qcapgeo
