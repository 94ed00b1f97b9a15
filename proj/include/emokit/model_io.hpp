// emokit/model_io.hpp

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

#ifndef EMOKIT_MODEL_IO_HPP_
#define EMOKIT_MODEL_IO_HPP_

#include <string>
#include <vector>

#include "emokit/common.hpp"

namespace emokit {

inline constexpr const char *kModelMagic = "EMOKIT-MODEL v1";

// Line-oriented text records: "<key> <token> <token> ...". Doubles are
// written with 17 significant digits so a reload is bit-identical.
// Matrices are "<key> <rows> <cols> v00 v01 ..." in row-major order.
class ModelWriter {
 public:
  void Text(const std::string &key, const std::string &value);
  void Int(const std::string &key, long value);
  void Real(const std::string &key, double value);
  void Vector(const std::string &key, const Vec &v);
  void Ints(const std::string &key, const std::vector<int> &v);
  void Strings(const std::string &key, const std::vector<std::string> &v);
  void Matrix(const std::string &key, const Mat &m);
  void Append(const std::string &raw) { out_ += raw; }
  const std::string &str() const { return out_; }

 private:
  void Begin(const std::string &key);
  std::string out_;
};

// Sequential reader; each call consumes one record and checks its key.
class ModelReader {
 public:
  explicit ModelReader(const std::string &text);
  bool AtEnd() const { return pos_ >= lines_.size(); }
  std::string PeekKey() const;
  std::string Text(const std::string &key);
  long Int(const std::string &key);
  double Real(const std::string &key);
  Vec Vector(const std::string &key);
  std::vector<int> Ints(const std::string &key);
  std::vector<std::string> Strings(const std::string &key);
  Mat Matrix(const std::string &key);
  // Raw text of the records consumed between two positions.
  std::size_t Position() const { return pos_; }
  std::string RawSince(std::size_t start) const;

 private:
  std::vector<std::string> Take(const std::string &key);
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace emokit

#endif  // EMOKIT_MODEL_IO_HPP_
