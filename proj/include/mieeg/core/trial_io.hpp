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

#include "mieeg/core/trial.hpp"

namespace mieeg {

// Binary trial file, all integers and floats little-endian:
//
//   "MIRP"          4 bytes magic
//   version         u32 (kTrialFormatVersion)
//   channels        u32
//   samples         u32
//   fs              f32
//   label           i32, -1 when absent
//   channel table   per channel: u16 byte length, then UTF-8 name bytes
//   payload         channels*samples f32, row-major (channel-major)
//
// Samples are stored as 32-bit floats; doubles are rounded on write.
// Subject and session ids live in the dataset manifest, not in the file.

inline constexpr std::uint32_t kTrialFormatVersion = 1;

void write_trial_file(const Trial& trial, const std::filesystem::path& path);
Trial read_trial_file(const std::filesystem::path& path);

}  // namespace mieeg
