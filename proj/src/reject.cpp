// emokit/reject.cpp

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

#include "emokit/reject.hpp"

#include <cmath>

#include "emokit/gmm.hpp"

namespace emokit {

double Membership(double p, double scale) {
  if (!(p >= 0.0)) Fail(ErrorKind::kInvalidArgument, "membership needs a non-negative density");
  return std::atan(p / scale) / (kPi / 2.0);
}

double FuzzyEntropy(double mu, double k) {
  if (mu <= 0.0) return kInf;
  return -k * std::log(mu);
}

double AverageFuzzyEntropy(const Vec &densities, const RejectionPolicy &policy) {
  if (densities.size() < 2) Fail(ErrorKind::kInvalidArgument, "rejection needs at least two emotions");
  double s = 0.0;
  for (int j = 0; j < densities.size(); ++j) {
    double mu = Membership(densities(j), policy.scale);
    if (mu > 0.0) s += mu * FuzzyEntropy(mu, policy.k);
  }
  return s / densities.size();
}

Decision Decide(const Vec &densities, const RejectionPolicy &policy) {
  if (!(policy.threshold > 0.0)) Fail(ErrorKind::kInvalidArgument, "rejection threshold must be positive");
  Decision d;
  d.entropy = AverageFuzzyEntropy(densities, policy);
  d.label = ArgMax(densities);
  d.rejected = d.entropy > policy.threshold;
  return d;
}

Decision DecideFromLog(const Vec &log_densities, const RejectionPolicy &policy) {
  Decision d = Decide(log_densities.array().exp().matrix(), policy);
  d.label = ArgMax(log_densities);  // exp may flatten distinct values to 0 or inf
  return d;
}

}  // namespace emokit
