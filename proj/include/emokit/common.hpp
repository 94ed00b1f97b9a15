// emokit/common.hpp

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

#ifndef EMOKIT_COMMON_HPP_
#define EMOKIT_COMMON_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace emokit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

enum class ErrorKind {
  kFormat,
  kUnsupportedFormat,
  kUndefinedSnr,
  kDegeneratePanel,
  kInvalidArgument,
  kTooShort,
  kUndefinedJitter,
  kSingularScatter,
  kNumerical,
  kProvenance,
  kCapacity,
  kNoInput,
  kFusionUnavailable,
  kIo,
};

const char *ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kPi = 3.14159265358979323846;

// Tracks mark missing per-frame values (unvoiced pitch, absent formant) as NaN.
inline bool IsAbsent(double v) { return v != v; }

// Numerically stable log(sum(exp(v))). Returns -inf for an all -inf input.
double LogSumExp(const double *v, int n);
inline double LogSumExp(const Vec &v) {
  return LogSumExp(v.data(), static_cast<int>(v.size()));
}

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string Fnv1aHex(const std::string &data);

// Shortest round-trip text for a double ("%.17g", with inf/nan spelled out).
std::string FormatDouble(double v);
double ParseDouble(const std::string &s);

}  // namespace emokit

#endif  // EMOKIT_COMMON_HPP_
