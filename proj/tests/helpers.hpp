#pragma once

#include "qcapgeo/channels.hpp"
#include "qcapgeo/qmath.hpp"

#include <algorithm>
#include <cmath>

namespace th {

using namespace qcapgeo;

inline double rel_err(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Random channel from a random isometry in → out ⊗ env.
inline ChannelRep random_channel(int in, int out, int env, Rng& rng) {
  Mat v = random_isometry(out * env, in, rng);
  std::vector<Mat> ks(env, Mat(out, in));
  for (int b = 0; b < out; ++b)
    for (int e = 0; e < env; ++e) ks[e].row(b) = v.row(b * env + e);
  return ChannelRep(ks);
}

inline DensityOperator random_state(const Dims& dims, Rng& rng) {
  return DensityOperator(random_density(dim_product(dims), rng), dims);
}

}  // namespace th
