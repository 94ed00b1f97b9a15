// emokit/common.cpp

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

#include "emokit/common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace emokit {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kUnsupportedFormat: return "unsupported format";
    case ErrorKind::kUndefinedSnr: return "undefined SNR";
    case ErrorKind::kDegeneratePanel: return "degenerate panel";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kTooShort: return "clip too short";
    case ErrorKind::kUndefinedJitter: return "undefined jitter";
    case ErrorKind::kSingularScatter: return "singular scatter";
    case ErrorKind::kNumerical: return "numerical error";
    case ErrorKind::kProvenance: return "provenance error";
    case ErrorKind::kCapacity: return "capacity error";
    case ErrorKind::kNoInput: return "no input";
    case ErrorKind::kFusionUnavailable: return "fusion unavailable";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

double LogSumExp(const double *v, int n) {
  double m = -kInf;
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == -kInf) return -kInf;
  if (m == kInf) return kInf;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

std::string Fnv1aHex(const std::string &data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string &s) {
  if (s == "nan" || s == "NA") return kNaN;
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  char *end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    Fail(ErrorKind::kFormat, "not a number: '" + s + "'");
  return v;
}

}  // namespace emokit
