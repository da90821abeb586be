#include "qcapgeo/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qcapgeo {

ChannelRep::ChannelRep(std::vector<Mat> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw Error("channel needs at least one Kraus operator");
  in_dim_ = static_cast<int>(kraus_[0].cols());
  out_dim_ = static_cast<int>(kraus_[0].rows());
  Mat s = Mat::Zero(in_dim_, in_dim_);
  for (const Mat& k : kraus_) {
    if (k.cols() != in_dim_ || k.rows() != out_dim_) throw Error("Kraus operators differ in shape");
    s += k.adjoint() * k;
  }
  if ((s - Mat::Identity(in_dim_, in_dim_)).norm() > 1e-10)
    throw Error("Kraus operators are not trace preserving");
}

namespace {

const std::vector<std::pair<ChannelName, std::string>>& name_table() {
  static const std::vector<std::pair<ChannelName, std::string>> t = {
      {ChannelName::depolarizing, "depolarizing"},
      {ChannelName::amplitude_damping, "amplitude_damping"},
      {ChannelName::gadc, "gadc"},
      {ChannelName::dephasing, "dephasing"},
      {ChannelName::erasure, "erasure"},
      {ChannelName::dephrasure, "dephrasure"},
      {ChannelName::damping_dephasing, "damping_dephasing"},
      {ChannelName::damping_erasure, "damping_erasure"},
      {ChannelName::identity, "identity"},
      {ChannelName::custom_kraus, "custom_kraus"}};
  return t;
}

void check_prob(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(std::string("parameter out of [0,1]: ") + what);
}

double param(const ChannelSpec& s, const std::string& key) {
  auto it = s.params.find(key);
  if (it == s.params.end())
    throw Error("missing parameter '" + key + "' for channel " + to_string(s.name));
  return it->second;
}

Mat mat2(cd a, cd b, cd c, cd d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

// Embed a d×d operator into the (d+1)-dim space with the erasure flag last.
Mat embed(const Mat& k) {
  Mat e = Mat::Zero(k.rows() + 1, k.cols());
  e.topRows(k.rows()) = k;
  return e;
}

}  // namespace

std::string to_string(ChannelName n) {
  for (auto& [k, v] : name_table())
    if (k == n) return v;
  return "unknown";
}

ChannelName channel_name_from_string(const std::string& s) {
  for (auto& [k, v] : name_table())
    if (v == s) return k;
  throw Error("unknown channel name: " + s);
}

ChannelSpec parse_channel_spec(const std::string& text) {
  ChannelSpec spec;
  auto colon = text.find(':');
  spec.name = channel_name_from_string(text.substr(0, colon));
  if (colon == std::string::npos) return spec;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("bad channel parameter: " + item);
    std::string key = item.substr(0, eq);
    double val = std::stod(item.substr(eq + 1));
    if (key == "dim")
      spec.dim = static_cast<int>(val);
    else
      spec.params[key] = val;
  }
  return spec;
}

std::string format_channel_spec(const ChannelSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.name);
  char sep = ':';
  for (auto& [k, v] : spec.params) {
    os << sep << k << '=' << v;
    sep = ',';
  }
  if (spec.dim != 2) os << sep << "dim=" << spec.dim;
  return os.str();
}

ChannelRep identity_channel(int d) { return ChannelRep({Mat::Identity(d, d)}); }

ChannelRep depolarizing(double p, int d) {
  check_prob(p, "p");
  if (d < 2) throw Error("depolarizing needs d >= 2");
  const cd w = std::polar(1.0, 2.0 * std::numbers::pi / d);
  Mat x = Mat::Zero(d, d), z = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    x((i + 1) % d, i) = 1.0;
    z(i, i) = std::pow(w, i);
  }
  std::vector<Mat> ks;
  ks.push_back(std::sqrt(1.0 - p) * Mat::Identity(d, d));
  const double c = std::sqrt(p / (d * d - 1.0));
  Mat xi = Mat::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    Mat zj = Mat::Identity(d, d);
    for (int j = 0; j < d; ++j) {
      if (i || j) ks.push_back(c * xi * zj);
      zj = zj * z;
    }
    xi = xi * x;
  }
  return ChannelRep(ks);
}

ChannelRep amplitude_damping(double gamma) {
  check_prob(gamma, "gamma");
  return ChannelRep({mat2(1, 0, 0, std::sqrt(1 - gamma)), mat2(0, std::sqrt(gamma), 0, 0)});
}

ChannelRep gadc(double gamma, double n) {
  check_prob(gamma, "gamma");
  check_prob(n, "N");
  const double s = std::sqrt(1 - gamma);
  return ChannelRep({std::sqrt(1 - n) * mat2(1, 0, 0, s), std::sqrt(gamma * (1 - n)) * mat2(0, 1, 0, 0),
                     std::sqrt(n) * mat2(s, 0, 0, 1), std::sqrt(gamma * n) * mat2(0, 0, 1, 0)});
}

ChannelRep dephasing(double p) {
  check_prob(p, "p");
  return ChannelRep({std::sqrt(1 - p) * mat2(1, 0, 0, 1), std::sqrt(p) * mat2(1, 0, 0, -1)});
}

ChannelRep erasure(double p, int d) {
  check_prob(p, "p");
  std::vector<Mat> ks{std::sqrt(1 - p) * embed(Mat::Identity(d, d))};
  for (int i = 0; i < d; ++i) {
    Mat k = Mat::Zero(d + 1, d);
    k(d, i) = std::sqrt(p);
    ks.push_back(k);
  }
  return ChannelRep(ks);
}

ChannelRep dephrasure(double p, double q) {
  check_prob(p, "p");
  check_prob(q, "q");
  return compose(erasure(q), dephasing(p));
}

ChannelRep damping_dephasing(double g, double p) {
  check_prob(g, "g");
  check_prob(p, "p");
  const double s = std::sqrt(1 - g);
  return ChannelRep({std::sqrt(1 - p) * mat2(1, 0, 0, s), std::sqrt(g) * mat2(0, 1, 0, 0),
                     std::sqrt(p) * mat2(1, 0, 0, -s)});
}

ChannelRep damping_erasure(double g, double p) { return compose(erasure(p), amplitude_damping(g)); }

ChannelRep channel_from_spec(const ChannelSpec& s) {
  switch (s.name) {
    case ChannelName::depolarizing: return depolarizing(param(s, "p"), s.dim);
    case ChannelName::amplitude_damping: return amplitude_damping(param(s, "gamma"));
    case ChannelName::gadc: return gadc(param(s, "gamma"), param(s, "N"));
    case ChannelName::dephasing: return dephasing(param(s, "p"));
    case ChannelName::erasure: return erasure(param(s, "p"), s.dim);
    case ChannelName::dephrasure: return dephrasure(param(s, "p"), param(s, "q"));
    case ChannelName::damping_dephasing: return damping_dephasing(param(s, "g"), param(s, "p"));
    case ChannelName::damping_erasure: return damping_erasure(param(s, "g"), param(s, "p"));
    case ChannelName::identity: return identity_channel(s.dim);
    case ChannelName::custom_kraus: return ChannelRep(s.kraus);
  }
  throw Error("unknown channel");
}

namespace {
std::pair<int, int> split_at(const Dims& dims, int on) {
  if (on < 0 || on >= static_cast<int>(dims.size())) throw Error("subsystem index out of range");
  int left = 1, right = 1;
  for (int k = 0; k < on; ++k) left *= dims[k];
  for (int k = on + 1; k < static_cast<int>(dims.size()); ++k) right *= dims[k];
  return {left, right};
}
}  // namespace

Mat apply_channel(const ChannelRep& ch, const Mat& m, const Dims& dims, int on) {
  auto [left, right] = split_at(dims, on);
  if (dims[on] != ch.in_dim() || dim_product(dims) != m.rows()) throw Error("apply: dimension mismatch");
  Mat out;
  for (const Mat& k : ch.kraus()) {
    Mat t = conj_local(k, m, left, right);
    if (out.size() == 0)
      out = std::move(t);
    else
      out += t;
  }
  return out;
}

Mat apply_adjoint(const ChannelRep& ch, const Mat& x, const Dims& dims, int on) {
  auto [left, right] = split_at(dims, on);
  if (dims[on] != ch.out_dim() || dim_product(dims) != x.rows()) throw Error("adjoint: dimension mismatch");
  Mat out;
  for (const Mat& k : ch.kraus()) {
    Mat t = conj_local(k.adjoint(), x, left, right);
    if (out.size() == 0)
      out = std::move(t);
    else
      out += t;
  }
  return out;
}

DensityOperator apply(const ChannelRep& ch, const DensityOperator& rho, int on) {
  Dims d = rho.dims();
  Mat out = apply_channel(ch, rho.mat(), d, on);
  d[on] = ch.out_dim();
  return DensityOperator(hermitian_part(out), d);
}

ChoiMatrix choi(const ChannelRep& ch) {
  const int a = ch.in_dim(), b = ch.out_dim();
  Mat j = Mat::Zero(a * b, a * b);
  for (const Mat& k : ch.kraus()) {
    Vec v(a * b);
    for (int x = 0; x < a; ++x)
      for (int y = 0; y < b; ++y) v(x * b + y) = k(y, x);
    j.noalias() += v * v.adjoint();
  }
  return {j, a, b};
}

Isometry stinespring(const ChannelRep& ch) {
  const int a = ch.in_dim(), b = ch.out_dim(), e = ch.env_dim();
  Mat v = Mat::Zero(b * e, a);
  for (int k = 0; k < e; ++k)
    for (int y = 0; y < b; ++y) v.row(y * e + k) = ch.kraus()[k].row(y);
  return Isometry(v);
}

ChannelRep complementary(const ChannelRep& ch) {
  const Mat v = stinespring(ch).mat();
  const int a = ch.in_dim(), b = ch.out_dim(), e = ch.env_dim();
  std::vector<Mat> ks;
  for (int y = 0; y < b; ++y) {
    Mat l(e, a);
    for (int k = 0; k < e; ++k) l.row(k) = v.row(y * e + k);
    ks.push_back(l);
  }
  return ChannelRep(ks);
}

ChannelRep compose(const ChannelRep& outer, const ChannelRep& inner) {
  if (outer.in_dim() != inner.out_dim()) throw Error("compose: dimension mismatch");
  std::vector<Mat> ks;
  for (const Mat& o : outer.kraus())
    for (const Mat& i : inner.kraus()) ks.push_back(o * i);
  return ChannelRep(ks);
}

Mat apply_choi(const Mat& j, int b_dim, int e_dim, const Mat& m, int a_dim) {
  if (j.rows() != b_dim * e_dim || m.rows() != a_dim * b_dim) throw Error("apply_choi: dimension mismatch");
  Mat out = Mat::Zero(a_dim * e_dim, a_dim * e_dim);
  for (int b = 0; b < b_dim; ++b)
    for (int bp = 0; bp < b_dim; ++bp) {
      auto jb = j.block(b * e_dim, bp * e_dim, e_dim, e_dim);
      for (int a = 0; a < a_dim; ++a)
        for (int ap = 0; ap < a_dim; ++ap) {
          cd r = m(a * b_dim + b, ap * b_dim + bp);
          if (r != cd(0.0)) out.block(a * e_dim, ap * e_dim, e_dim, e_dim) += r * jb;
        }
    }
  return out;
}

std::vector<Mat> kraus_from_choi(const Mat& j, int in_dim, int out_dim, double cutoff) {
  if (j.rows() != in_dim * out_dim) throw Error("kraus_from_choi: dimension mismatch");
  Eigh e = eigh(hermitian_part(j));
  std::vector<Mat> ks;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) <= cutoff) continue;
    Vec v = e.vectors.col(i);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::abs(v(imax)) / v(imax);
    Mat k(out_dim, in_dim);
    for (int x = 0; x < in_dim; ++x)
      for (int y = 0; y < out_dim; ++y) k(y, x) = std::sqrt(e.values(i)) * v(x * out_dim + y);
    ks.push_back(k);
  }
  if (ks.empty()) throw Error("kraus_from_choi: zero Choi matrix");
  return ks;
}

ChannelRep minimal_kraus(const ChannelRep& ch) {
  return ChannelRep(kraus_from_choi(choi(ch).mat, ch.in_dim(), ch.out_dim()));
}

DensityOperator isotropic(int d, double f) {
  check_prob(f, "f");
  Vec phi = max_entangled(d);
  Mat p = phi * phi.adjoint();
  Mat id = Mat::Identity(d * d, d * d);
  return DensityOperator(f * p + (1 - f) / (d * d - 1.0) * (id - p), {d, d});
}

DensityOperator noisy_mes(const ChannelRep& on_a, const ChannelRep& on_b) {
  if (on_a.in_dim() != on_b.in_dim()) throw Error("noisy_mes: input dimensions differ");
  const int d = on_a.in_dim();
  Vec phi = max_entangled(d);
  DensityOperator rho(phi * phi.adjoint(), {d, d});
  return apply(on_b, apply(on_a, rho, 0), 1);
}

DensityOperator choi_state(const ChannelRep& ch) {
  const int d = ch.in_dim();
  Vec phi = max_entangled(d);
  return apply(ch, DensityOperator(phi * phi.adjoint(), {d, d}), 1);
}

}  // namespace qcapgeo
