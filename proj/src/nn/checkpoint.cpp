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

#include "mieeg/nn/checkpoint.hpp"

#include <bit>
#include <boost/crc.hpp>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <map>

namespace mieeg::nn {
namespace {

using nlohmann::json;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw IoError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

std::string get_bytes(const std::vector<unsigned char>& in, std::size_t& pos, std::size_t n) {
  if (pos + n > in.size()) throw IoError("truncated checkpoint");
  std::string s(reinterpret_cast<const char*>(in.data() + pos), n);
  pos += n;
  return s;
}

template <typename S>
void put_blob(std::vector<unsigned char>& out, const std::string& name, const Matrix<S>& m) {
  out.push_back(static_cast<unsigned char>(name.size() & 0xFFu));
  out.push_back(static_cast<unsigned char>(name.size() >> 8));
  out.insert(out.end(), name.begin(), name.end());
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])));
}

std::uint32_t crc32(const unsigned char* data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}

}  // namespace

std::string model_config_to_json(const ModelConfig& c) {
  json j;
  j["tokenizer"] = {{"kernel", c.tokenizer.kernel},
                    {"stride", c.tokenizer.stride},
                    {"feature_maps", c.tokenizer.feature_maps},
                    {"pool", c.tokenizer.pool},
                    {"dim", c.tokenizer.dim}};
  j["encoder"] = {{"layers", c.encoder.layers},   {"dim", c.encoder.dim},
                  {"heads", c.encoder.heads},     {"ff_dim", c.encoder.ff_dim},
                  {"dropout", c.encoder.dropout}, {"decoder_layers", c.encoder.decoder_layers},
                  {"max_tokens", c.encoder.max_tokens}};
  j["channels"] = c.channels;
  j["classes"] = c.classes;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelConfig c;
    const auto& t = j.at("tokenizer");
    c.tokenizer.kernel = t.at("kernel");
    c.tokenizer.stride = t.at("stride");
    c.tokenizer.feature_maps = t.at("feature_maps");
    c.tokenizer.pool = t.at("pool");
    c.tokenizer.dim = t.at("dim");
    const auto& e = j.at("encoder");
    c.encoder.layers = e.at("layers");
    c.encoder.dim = e.at("dim");
    c.encoder.heads = e.at("heads");
    c.encoder.ff_dim = e.at("ff_dim");
    c.encoder.dropout = e.at("dropout");
    c.encoder.decoder_layers = e.at("decoder_layers");
    c.encoder.max_tokens = e.at("max_tokens");
    c.channels = j.at("channels");
    c.classes = j.at("classes");
    c.validate();
    return c;
  } catch (const json::exception& ex) {
    throw InvalidArgument(std::string("model config: ") + ex.what());
  }
}

template <typename S>
void save_checkpoint(const Model<S>& model, const std::filesystem::path& path, const std::string& metadata) {
  json header;
  header["model"] = json::parse(model_config_to_json(model.config()));
  header["adam_step"] = model.parameters().step;
  header["metadata"] = json::parse(metadata);
  const std::string header_text = header.dump();

  std::vector<unsigned char> out = {'M', 'I', 'R', 'M'};
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out.insert(out.end(), header_text.begin(), header_text.end());
  const auto& params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(3 * params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    put_blob<S>(out, params[i].name, params[i].value);
    put_blob<S>(out, "adam.m/" + params[i].name, params[i].adam_m);
    put_blob<S>(out, "adam.v/" + params[i].name, params[i].adam_v);
  }
  put_u32(out, crc32(out.data(), out.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint: " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

template <typename S>
Model<S> load_checkpoint(const std::filesystem::path& path, std::string* metadata) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path.string());
  const std::vector<unsigned char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 16 || std::string(in.begin(), in.begin() + 4) != "MIRM") throw IoError("bad magic in checkpoint");
  std::size_t tail = in.size() - 4;
  std::size_t crc_pos = tail;
  if (get_u32(in, crc_pos) != crc32(in.data(), tail)) throw IoError("checkpoint checksum mismatch");

  std::size_t pos = 4;
  const std::uint32_t version = get_u32(in, pos);
  if (version != kCheckpointVersion) throw IoError("checkpoint version mismatch");
  const std::uint32_t header_len = get_u32(in, pos);
  const json header = json::parse(get_bytes(in, pos, header_len));
  Model<S> model(model_config_from_json(header.at("model").dump()), 0);
  model.parameters().step = header.at("adam_step").get<long long>();
  if (metadata) *metadata = header.at("metadata").dump();

  std::map<std::string, Matrix<S>> blobs;
  const std::uint32_t count = get_u32(in, pos);
  for (std::uint32_t b = 0; b < count; ++b) {
    if (pos + 2 > tail) throw IoError("truncated checkpoint");
    const std::size_t name_len = in[pos] | (in[pos + 1] << 8);
    pos += 2;
    std::string name = get_bytes(in, pos, name_len);
    const std::uint32_t rows = get_u32(in, pos);
    const std::uint32_t cols = get_u32(in, pos);
    if (pos + 4ull * rows * cols > tail) throw IoError("truncated checkpoint");
    Matrix<S> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(std::bit_cast<float>(get_u32(in, pos)));
    blobs.emplace(std::move(name), std::move(m));
  }
  auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    for (auto [prefix, slot] : {std::pair<std::string, Matrix<S>*>{"", &p.value}, {"adam.m/", &p.adam_m}, {"adam.v/", &p.adam_v}}) {
      auto it = blobs.find(prefix + p.name);
      if (it == blobs.end()) throw IoError("checkpoint lacks blob " + prefix + p.name);
      if (it->second.rows() != slot->rows() || it->second.cols() != slot->cols())
        throw IoError("checkpoint blob has wrong shape: " + prefix + p.name);
      *slot = it->second;
    }
  }
  return model;
}

template void save_checkpoint<float>(const Model<float>&, const std::filesystem::path&, const std::string&);
template void save_checkpoint<double>(const Model<double>&, const std::filesystem::path&, const std::string&);
template Model<float> load_checkpoint<float>(const std::filesystem::path&, std::string*);
template Model<double> load_checkpoint<double>(const std::filesystem::path&, std::string*);

}  // namespace mieeg::nn
