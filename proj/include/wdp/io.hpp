// Copyright 2026 The WDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wdp/latent_model.hpp"
#include "wdp/nets.hpp"

namespace wdp {

// Raster shape used for PGM export: height is the largest divisor of d not
// exceeding sqrt(d), width = d / height.
std::pair<int, int> pgm_shape(int d);

// Binary P5, maxval 255, row-major. Pixels are clamped to [0, 1] and scaled
// by 255 with rounding.
std::string encode_pgm(const Image& image, int width, int height);
// Synthetic images are zero-mean, so dumps are shifted by mid-gray.
inline constexpr double kPgmOffset = 0.5;

// Writes image + kPgmOffset as a PGM of shape pgm_shape(d).
void write_pgm(const std::filesystem::path& path, const Image& image);

// Latent dataset: "LATC", u32 count, u32 m, u32 k, then count*m*k
// little-endian float32 values, each latent row-major.
void write_latents(const std::filesystem::path& path, const std::vector<Matrix>& latents);
std::vector<Matrix> read_latents(const std::filesystem::path& path);

// Checkpoint: "WDPC", u32 version, u32 D, then for protection and
// deprotection in that order the row-major f64 weight followed by the f64
// bias, all little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NetPair {
  AffineNet protection;
  AffineNet deprotection;
};

std::string encode_checkpoint(const NetPair& nets);
NetPair decode_checkpoint(const std::string& bytes);
void write_checkpoint(const std::filesystem::path& path, const NetPair& nets);
NetPair read_checkpoint(const std::filesystem::path& path);

// Writes `contents` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace wdp
