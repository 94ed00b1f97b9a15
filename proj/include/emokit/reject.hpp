// emokit/reject.hpp

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

#ifndef EMOKIT_REJECT_HPP_
#define EMOKIT_REJECT_HPP_

#include "emokit/common.hpp"

namespace emokit {

struct RejectionPolicy {
  double threshold = 0.11;
  double k = kPi / 2.0;
  double scale = 10.0;  // density divisor inside the arctan map
};

// atan(p / scale) / (pi / 2).
double Membership(double p, double scale = 10.0);
// -k ln(mu); +inf at mu = 0.
double FuzzyEntropy(double mu, double k = kPi / 2.0);
// (1/C) sum mu_j e(mu_j), with mu e(mu) -> 0 as mu -> 0.
double AverageFuzzyEntropy(const Vec &densities, const RejectionPolicy &policy);

struct Decision {
  bool rejected = false;
  int label = 0;  // argmax density, also filled when rejected
  double entropy = 0.0;
};

// Rejects when the average entropy exceeds the threshold; equality accepts.
Decision Decide(const Vec &densities, const RejectionPolicy &policy);
// Same, from log-densities (exp overflow saturates the membership at 1).
Decision DecideFromLog(const Vec &log_densities, const RejectionPolicy &policy);

}  // namespace emokit

#endif  // EMOKIT_REJECT_HPP_
