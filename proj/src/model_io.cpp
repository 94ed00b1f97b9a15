// emokit/model_io.cpp

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

#include "emokit/model_io.hpp"

#include <sstream>

#include "emokit/corpus.hpp"

namespace emokit {

void ModelWriter::Begin(const std::string &key) {
  if (key.empty() || key.find_first_of(" \t\n") != std::string::npos)
    Fail(ErrorKind::kInvalidArgument, "bad record key '" + key + "'");
  out_ += key;
}

void ModelWriter::Text(const std::string &key, const std::string &value) {
  if (value.find('\n') != std::string::npos) Fail(ErrorKind::kInvalidArgument, "newline in record value");
  Begin(key);
  out_ += ' ';
  out_ += value;
  out_ += '\n';
}

void ModelWriter::Int(const std::string &key, long value) { Text(key, std::to_string(value)); }

void ModelWriter::Real(const std::string &key, double value) { Text(key, FormatDouble(value)); }

void ModelWriter::Vector(const std::string &key, const Vec &v) {
  Begin(key);
  out_ += ' ' + std::to_string(v.size());
  for (int i = 0; i < v.size(); ++i) out_ += ' ' + FormatDouble(v(i));
  out_ += '\n';
}

void ModelWriter::Ints(const std::string &key, const std::vector<int> &v) {
  Begin(key);
  out_ += ' ' + std::to_string(v.size());
  for (int x : v) out_ += ' ' + std::to_string(x);
  out_ += '\n';
}

void ModelWriter::Strings(const std::string &key, const std::vector<std::string> &v) {
  Begin(key);
  out_ += ' ' + std::to_string(v.size());
  for (const std::string &s : v) {
    if (s.empty() || s.find_first_of(" \t\n") != std::string::npos)
      Fail(ErrorKind::kInvalidArgument, "label '" + s + "' contains whitespace");
    out_ += ' ' + s;
  }
  out_ += '\n';
}

void ModelWriter::Matrix(const std::string &key, const Mat &m) {
  Begin(key);
  out_ += ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out_ += ' ' + FormatDouble(m(i, j));
  out_ += '\n';
}

ModelReader::ModelReader(const std::string &text) {
  for (const std::string &line : SplitLines(text))
    if (!line.empty()) lines_.push_back(line);
}

std::string ModelReader::PeekKey() const {
  if (AtEnd()) return "";
  const std::string &l = lines_[pos_];
  return l.substr(0, l.find(' '));
}

std::string ModelReader::RawSince(std::size_t start) const {
  std::string out;
  for (std::size_t i = start; i < pos_; ++i) out += lines_[i] + '\n';
  return out;
}

std::vector<std::string> ModelReader::Take(const std::string &key) {
  if (AtEnd()) Fail(ErrorKind::kFormat, "model file ended, expected '" + key + "'");
  std::istringstream in(lines_[pos_]);
  std::vector<std::string> tok;
  std::string t;
  while (in >> t) tok.push_back(t);
  if (tok.empty() || tok[0] != key)
    Fail(ErrorKind::kFormat, "model file line " + std::to_string(pos_ + 1) + ": expected '" + key +
                                 "', found '" + (tok.empty() ? "" : tok[0]) + "'");
  ++pos_;
  tok.erase(tok.begin());
  return tok;
}

std::string ModelReader::Text(const std::string &key) {
  if (AtEnd()) Fail(ErrorKind::kFormat, "model file ended, expected '" + key + "'");
  const std::string line = lines_[pos_];
  Take(key);
  return line.size() > key.size() + 1 ? line.substr(key.size() + 1) : "";
}

long ModelReader::Int(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.size() != 1) Fail(ErrorKind::kFormat, "record '" + key + "' expects one integer");
  try {
    return std::stol(t[0]);
  } catch (const std::exception &) {
    Fail(ErrorKind::kFormat, "record '" + key + "': bad integer");
  }
}

double ModelReader::Real(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.size() != 1) Fail(ErrorKind::kFormat, "record '" + key + "' expects one number");
  return ParseDouble(t[0]);
}

Vec ModelReader::Vector(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.empty()) Fail(ErrorKind::kFormat, "record '" + key + "' lacks a length");
  const long n = std::stol(t[0]);
  if (static_cast<long>(t.size()) != n + 1) Fail(ErrorKind::kFormat, "record '" + key + "' has wrong length");
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = ParseDouble(t[i + 1]);
  return v;
}

std::vector<int> ModelReader::Ints(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.empty()) Fail(ErrorKind::kFormat, "record '" + key + "' lacks a length");
  const long n = std::stol(t[0]);
  if (static_cast<long>(t.size()) != n + 1) Fail(ErrorKind::kFormat, "record '" + key + "' has wrong length");
  std::vector<int> v;
  for (long i = 0; i < n; ++i) v.push_back(std::stoi(t[i + 1]));
  return v;
}

std::vector<std::string> ModelReader::Strings(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.empty()) Fail(ErrorKind::kFormat, "record '" + key + "' lacks a length");
  const long n = std::stol(t[0]);
  if (static_cast<long>(t.size()) != n + 1) Fail(ErrorKind::kFormat, "record '" + key + "' has wrong length");
  return std::vector<std::string>(t.begin() + 1, t.end());
}

Mat ModelReader::Matrix(const std::string &key) {
  std::vector<std::string> t = Take(key);
  if (t.size() < 2) Fail(ErrorKind::kFormat, "record '" + key + "' lacks dimensions");
  const long r = std::stol(t[0]), c = std::stol(t[1]);
  if (static_cast<long>(t.size()) != r * c + 2) Fail(ErrorKind::kFormat, "record '" + key + "' has wrong size");
  Mat m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = ParseDouble(t[2 + i * c + j]);
  return m;
}

}  // namespace emokit
