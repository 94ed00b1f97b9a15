// emokit/kernels.hpp

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

#ifndef EMOKIT_KERNELS_HPP_
#define EMOKIT_KERNELS_HPP_

#include "emokit/common.hpp"

namespace emokit {

// Execution policy for the data-parallel kernels. kSerial is the reference
// implementation; kParallel splits rows across OpenMP threads and produces
// bit-identical results.
enum class Exec { kSerial, kParallel };

struct GmmModel;

// n x M matrix of log(a_i) + log b_i(x_t).
Mat WeightedLogDensities(const GmmModel &model, const Mat &x, Exec exec);

// n x k matrix of squared Euclidean distances between rows of x and c.
Mat SquaredDistances(const Mat &x, const Mat &c, Exec exec);

}  // namespace emokit

#endif  // EMOKIT_KERNELS_HPP_
