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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mieeg/nn/model.hpp"

namespace mieeg::nn {

// Checkpoint file, little-endian:
//
//   "MIRM"               4 bytes magic
//   version              u32 (kCheckpointVersion)
//   config length        u32, then that many bytes of JSON (model config, Adam step, extra metadata)
//   blob count           u32
//   per blob             u16 name length, name bytes, u32 rows, u32 cols, rows*cols f32 column-major
//   checksum             u32 CRC-32 of every preceding byte
//
// Each parameter contributes its value blob under its own name, and its Adam moments
// under "adam.m/<name>" and "adam.v/<name>".

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

/// `metadata` is an arbitrary JSON object stored alongside the config (may be "{}").
template <typename S>
void save_checkpoint(const Model<S>& model, const std::filesystem::path& path, const std::string& metadata = "{}");

template <typename S>
Model<S> load_checkpoint(const std::filesystem::path& path, std::string* metadata = nullptr);

}  // namespace mieeg::nn
