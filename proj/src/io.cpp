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

#include "wdp/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wdp {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw MissingArtifact(what_ + ": truncated");
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  void expect_magic(const char (&magic)[5]) {
    if (bytes_.size() < 4 || bytes_.compare(0, 4, magic) != 0) throw MissingArtifact(what_ + ": bad magic");
    pos_ = 4;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

void put_net(std::string& out, const AffineNet& net) {
  for (Eigen::Index r = 0; r < net.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < net.weight.cols(); ++c) put_le(out, net.weight(r, c));
  for (Eigen::Index i = 0; i < net.bias.size(); ++i) put_le(out, net.bias[i]);
}

AffineNet get_net(Reader& in, int dim, NetRole role) {
  AffineNet net{Matrix(dim, dim), Vector(dim), role};
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) net.weight(r, c) = in.get<double>();
  for (int i = 0; i < dim; ++i) net.bias[i] = in.get<double>();
  return net;
}

}  // namespace

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::pair<int, int> pgm_shape(int d) {
  if (d < 1) throw InvalidInput("image must have pixels");
  int height = 1;
  for (int h = 1; static_cast<long long>(h) * h <= d; ++h)
    if (d % h == 0) height = h;
  return {d / height, height};
}

std::string encode_pgm(const Image& image, int width, int height) {
  if (static_cast<long long>(width) * height != image.size()) throw InvalidInput("PGM shape does not match image");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  const auto [w, h] = pgm_shape(static_cast<int>(image.size()));
  write_file(path, encode_pgm(Image{image.pixels.array() + kPgmOffset}, w, h));
}

void write_latents(const std::filesystem::path& path, const std::vector<Matrix>& latents) {
  std::string out = "LATC";
  const std::uint32_t m = latents.empty() ? 0 : static_cast<std::uint32_t>(latents.front().rows());
  const std::uint32_t k = latents.empty() ? 0 : static_cast<std::uint32_t>(latents.front().cols());
  put_le(out, static_cast<std::uint32_t>(latents.size()));
  put_le(out, m);
  put_le(out, k);
  for (const Matrix& z : latents) {
    if (z.rows() != m || z.cols() != k) throw InvalidInput("latent dataset has mixed shapes");
    for (Eigen::Index i = 0; i < z.size(); ++i) put_le(out, static_cast<float>(z.data()[i]));
  }
  write_file(path, out);
}

std::vector<Matrix> read_latents(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader in(bytes, path.string());
  in.expect_magic("LATC");
  const auto count = in.get<std::uint32_t>();
  const auto m = in.get<std::uint32_t>();
  const auto k = in.get<std::uint32_t>();
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    Matrix z(m, k);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = in.get<float>();
    out.push_back(std::move(z));
  }
  if (!in.at_end()) throw MissingArtifact(path.string() + ": trailing bytes");
  return out;
}

std::string encode_checkpoint(const NetPair& nets) {
  nets.protection.validate();
  nets.deprotection.validate();
  if (nets.protection.dim() != nets.deprotection.dim()) throw InvalidInput("checkpoint nets differ in size");
  std::string out = "WDPC";
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint32_t>(nets.protection.dim()));
  put_net(out, nets.protection);
  put_net(out, nets.deprotection);
  return out;
}

NetPair decode_checkpoint(const std::string& bytes) {
  Reader in(bytes, "checkpoint");
  in.expect_magic("WDPC");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw MissingArtifact("checkpoint: unsupported version " + std::to_string(version));
  const auto dim = static_cast<int>(in.get<std::uint32_t>());
  if (dim < 1) throw MissingArtifact("checkpoint: zero dimension");
  NetPair nets{get_net(in, dim, NetRole::kProtection), get_net(in, dim, NetRole::kDeprotection)};
  if (!in.at_end()) throw MissingArtifact("checkpoint: trailing bytes");
  return nets;
}

void write_checkpoint(const std::filesystem::path& path, const NetPair& nets) {
  write_file(path, encode_checkpoint(nets));
}

NetPair read_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file(path));
  } catch (const MissingArtifact& e) {
    throw MissingArtifact(path.string() + ": " + e.what());
  }
}

}  // namespace wdp
