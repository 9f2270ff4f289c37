/*
 * Copyright 2026 The mieeg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mieeg/core/trial_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <vector>

#include "mieeg/error.hpp"

namespace mieeg {
namespace {

constexpr std::array<char, 4> kMagic = {'M', 'I', 'R', 'P'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFFu));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_f32(std::vector<unsigned char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint16_t u16() {
    need(2);
    auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw IoError("truncated trial file header");
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_trial_file(const Trial& trial, const std::filesystem::path& path) {
  if (!trial.data.allFinite()) throw InvalidArgument("non-finite sample");
  validate(trial);
  const auto rows = static_cast<std::uint32_t>(trial.data.rows());
  const auto cols = static_cast<std::uint32_t>(trial.data.cols());

  std::vector<unsigned char> out;
  out.reserve(32 + 4ull * rows * cols);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, kTrialFormatVersion);
  put_u32(out, rows);
  put_u32(out, cols);
  put_f32(out, static_cast<float>(trial.fs));
  put_u32(out, static_cast<std::uint32_t>(trial.label ? *trial.label : -1));
  for (const auto& name : trial.channels) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("channel name too long: " + name.substr(0, 32));
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
  }
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) put_f32(out, static_cast<float>(trial.data(r, c)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

Trial read_trial_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open trial file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  Reader in(bytes);
  if (in.str(4) != std::string(kMagic.begin(), kMagic.end())) throw IoError("bad magic in " + path.string());
  const std::uint32_t version = in.u32();
  if (version != kTrialFormatVersion)
    throw IoError("trial format version mismatch: got " + std::to_string(version) + ", expected " +
                  std::to_string(kTrialFormatVersion));
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  Trial trial;
  trial.fs = in.f32();
  const auto label = static_cast<std::int32_t>(in.u32());
  if (label >= 0) trial.label = label;
  trial.channels.reserve(rows);
  for (std::uint32_t r = 0; r < rows; ++r) trial.channels.push_back(in.str(in.u16()));

  const std::uint64_t payload = 4ull * rows * cols;
  if (in.remaining() < payload) throw IoError("truncated payload in " + path.string());
  trial.data.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) trial.data(r, c) = in.f32();
  validate(trial);
  return trial;
}

}  // namespace mieeg
