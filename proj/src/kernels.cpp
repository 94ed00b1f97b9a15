// emokit/kernels.cpp

// Copyright 2026  The emokit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emokit/kernels.hpp"

#include "emokit/gmm.hpp"

namespace emokit {

namespace {

void DensityRow(const GmmModel &model, const Mat &x, int t, Mat *out) {
  Eigen::RowVectorXd row = x.row(t);
  Eigen::RowVectorXd dst(model.M());
  model.ComponentLogDensities(row.data(), dst.data());
  out->row(t) = dst;
}

void DistanceRow(const Mat &x, const Mat &c, int t, Mat *out) {
  for (int j = 0; j < c.rows(); ++j) {
    double s = 0.0;
    for (int k = 0; k < x.cols(); ++k) {
      double d = x(t, k) - c(j, k);
      s += d * d;
    }
    (*out)(t, j) = s;
  }
}

}  // namespace

Mat WeightedLogDensities(const GmmModel &model, const Mat &x, Exec exec) {
  if (x.cols() != model.D()) Fail(ErrorKind::kInvalidArgument, "GMM dimension mismatch");
  const int n = static_cast<int>(x.rows());
  Mat out(n, model.M());
  if (exec == Exec::kSerial) {
    for (int t = 0; t < n; ++t) DensityRow(model, x, t, &out);
  } else {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < n; ++t) DensityRow(model, x, t, &out);
  }
  return out;
}

Mat SquaredDistances(const Mat &x, const Mat &c, Exec exec) {
  if (x.cols() != c.cols()) Fail(ErrorKind::kInvalidArgument, "distance dimension mismatch");
  const int n = static_cast<int>(x.rows());
  Mat out(n, c.rows());
  if (exec == Exec::kSerial) {
    for (int t = 0; t < n; ++t) DistanceRow(x, c, t, &out);
  } else {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < n; ++t) DistanceRow(x, c, t, &out);
  }
  return out;
}

}  // namespace emokit
