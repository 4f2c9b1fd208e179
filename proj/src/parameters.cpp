// Copyright 2026 The GINTRIP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gintrip/parameters.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gintrip/error.hpp"

namespace gintrip::nn {

namespace {

constexpr char kMagic[5] = {'G', 'T', 'C', 'K', '1'};

std::uint32_t le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

void put(std::ostream& out, std::uint32_t v) {
  v = le(v);
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) fail(ErrorKind::kIo, "truncated checkpoint: " + path.string());
  return le(v);
}

}  // namespace

Parameter& ParameterStore::add(const std::string& name, Matrix init, bool trainable) {
  if (contains(name)) fail(ErrorKind::kInvalidArgument, "duplicate parameter name: " + name);
  index_[name] = params_.size();
  Matrix grad = Matrix::Zero(init.rows(), init.cols());
  params_.push_back(Parameter{name, std::move(init), std::move(grad), trainable});
  return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kInvalidArgument, "unknown parameter: " + name);
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kInvalidArgument, "unknown parameter: " + name);
  return params_[it->second];
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

ad::Var TapeParams::operator[](const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const Parameter& p = store_.get(name);
  ad::Var v = (track_grad_ && p.trainable) ? tape_.variable(p.value) : tape_.constant(p.value);
  bound_.emplace(name, v);
  return v;
}

void TapeParams::accumulate_into(ParameterStore& store, double scale) const {
  for (const auto& [name, var] : bound_) {
    if (!tape_.needs_grad(var)) continue;
    store.get(name).grad += scale * var.grad();
  }
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  // Row-major fill keeps the draw order independent of Eigen's storage.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write checkpoint: " + path.string());
  out.write(kMagic, 5);
  put(out, static_cast<std::uint32_t>(store.all().size()));
  for (const auto& p : store.all()) {
    put(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put(out, 2);
    put(out, static_cast<std::uint32_t>(p.value.rows()));
    put(out, static_cast<std::uint32_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        put(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.value(i, j))));
      }
    }
  }
  if (!out) fail(ErrorKind::kIo, "checkpoint write failed: " + path.string());
}

std::vector<std::pair<std::string, Matrix>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open checkpoint: " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0) fail(ErrorKind::kIo, "bad checkpoint magic: " + path.string());
  const std::uint32_t count = get_u32(in, path);
  std::vector<std::pair<std::string, Matrix>> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t len = get_u32(in, path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const std::uint32_t rank = get_u32(in, path);
    if (rank < 1 || rank > 2) fail(ErrorKind::kIo, "unsupported tensor rank in checkpoint for " + name);
    const std::uint32_t rows = get_u32(in, path);
    const std::uint32_t cols = rank == 2 ? get_u32(in, path) : 1;
    Matrix m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = std::bit_cast<float>(get_u32(in, path));
    }
    out.emplace_back(std::move(name), std::move(m));
  }
  return out;
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
  auto tensors = read_checkpoint(path);
  if (tensors.size() != store.all().size()) {
    fail(ErrorKind::kShapeMismatch, "checkpoint holds " + std::to_string(tensors.size()) +
                                        " tensors, model expects " + std::to_string(store.all().size()));
  }
  for (auto& [name, m] : tensors) {
    if (!store.contains(name)) fail(ErrorKind::kShapeMismatch, "checkpoint tensor not in model: " + name);
    Parameter& p = store.get(name);
    if (p.value.rows() != m.rows() || p.value.cols() != m.cols()) {
      fail(ErrorKind::kShapeMismatch, "checkpoint tensor " + name + " is " + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()) + ", model expects " +
                                          std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    }
    p.value = std::move(m);
  }
}

}  // namespace gintrip::nn
