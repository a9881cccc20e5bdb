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

#include "wdp/latent_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wdp/rng.hpp"

namespace wdp {

PrivateIndex::PrivateIndex(std::vector<int> indices, int code_count)
    : indices_(std::move(indices)), code_count_(code_count) {
  if (code_count_ < 1) throw InvalidInput("code count must be positive");
  if (indices_.empty()) throw InvalidInput("private index set is empty");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InvalidInput("private index set has duplicates");
  }
  if (indices_.front() < 0 || indices_.back() >= code_count_) {
    throw InvalidInput("private index out of range [0, " + std::to_string(code_count_) + ")");
  }
}

bool PrivateIndex::contains(int code) const {
  return std::binary_search(indices_.begin(), indices_.end(), code);
}

LatentCodes::LatentCodes(Matrix c, PrivateIndex idx) : codes(std::move(c)), private_idx(std::move(idx)) {
  if (codes.rows() != private_idx.code_count()) {
    throw InvalidInput("latent has " + std::to_string(codes.rows()) + " codes but index expects " +
                       std::to_string(private_idx.code_count()));
  }
}

namespace {

// Scaled map with orthonormal columns (rows >= cols) or rows (rows < cols).
Eigen::MatrixXd orthonormal_block(Rng& rng, int rows, int cols, double scale) {
  Eigen::MatrixXd g(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g(r, c) = rng.normal();
  if (rows >= cols) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    return scale * q;
  }
  Eigen::MatrixXd gt = g.transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gt);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
  return scale * q.transpose();
}

double top_eigenvalue_aat(const Eigen::MatrixXd& a) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = a * (a.transpose() * v);
    double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-13 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

GeneratorModel::GeneratorModel(const GeneratorSpec& spec) : spec_(spec) {
  if (spec.d < 1 || spec.m < 1 || spec.k < 1) throw InvalidInput("generator dims must be positive");
  if (spec.shared_count < 0 || spec.shared_count >= spec.m) {
    throw InvalidInput("shared_count must be in [0, m)");
  }
  const int local_count = spec.m - spec.shared_count;
  block_size_ = spec.d / local_count;
  if (block_size_ < 1) throw InvalidInput("d too small for the number of local codes");

  synthesis_ = Eigen::MatrixXd::Zero(spec.d, static_cast<Eigen::Index>(spec.m) * spec.k);
  Rng rng(spec.seed);
  const double shared_sd =
      spec.shared_count > 0 ? spec.shared_scale / std::sqrt(double(spec.shared_count) * spec.k) : 0.0;
  for (int i = 0; i < spec.shared_count; ++i) {
    for (int r = 0; r < spec.d; ++r)
      for (int c = 0; c < spec.k; ++c) synthesis_(r, i * spec.k + c) = shared_sd * rng.normal();
  }
  for (int i = spec.shared_count; i < spec.m; ++i) {
    const auto [start, len] = pixel_block(i);
    synthesis_.block(start, i * spec.k, len, spec.k) = orthonormal_block(rng, len, spec.k, spec.local_scale);
  }
  lipschitz_ = 2.0 / spec.d * top_eigenvalue_aat(synthesis_);
}

Eigen::Ref<const Eigen::MatrixXd> GeneratorModel::block_map(int code) const {
  if (code < 0 || code >= spec_.m) throw InvalidInput("code index out of range");
  return synthesis_.middleCols(static_cast<Eigen::Index>(code) * spec_.k, spec_.k);
}

std::pair<int, int> GeneratorModel::pixel_block(int code) const {
  if (code < spec_.shared_count || code >= spec_.m) throw InvalidInput("not a local code");
  return {(code - spec_.shared_count) * block_size_, block_size_};
}

void InversionConfig::validate() const {
  if (max_iters < 1) throw InvalidInput("inversion max_iters must be >= 1");
  if (!(step_size > 0.0)) throw InvalidInput("inversion step_size must be > 0");
  if (!(tol >= 0.0)) throw InvalidInput("inversion tol must be >= 0");
}

Vector flatten(const Matrix& codes) {
  return Eigen::Map<const Vector>(codes.data(), codes.size());
}

Matrix unflatten(const Eigen::Ref<const Vector>& flat, int rows, int cols) {
  if (flat.size() != static_cast<Eigen::Index>(rows) * cols) throw InvalidInput("unflatten size mismatch");
  Matrix out(rows, cols);
  Eigen::Map<Vector>(out.data(), out.size()) = flat;
  return out;
}

double mse(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw InvalidInput("mse size mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

Image generate(const GeneratorModel& model, const Matrix& codes) {
  if (codes.rows() != model.m() || codes.cols() != model.k()) {
    throw InvalidInput("latent is " + std::to_string(codes.rows()) + "x" + std::to_string(codes.cols()) +
                       ", generator expects " + std::to_string(model.m()) + "x" + std::to_string(model.k()));
  }
  return Image{model.synthesis() * flatten(codes)};
}

Image generate(const GeneratorModel& model, const LatentCodes& z) { return generate(model, z.codes); }

Inversion invert(const GeneratorModel& model, const Image& x, const InversionConfig& cfg) {
  cfg.validate();
  if (x.size() != model.d()) {
    throw InvalidInput("image has " + std::to_string(x.size()) + " pixels, generator expects " +
                       std::to_string(model.d()));
  }
  const Eigen::MatrixXd& a = model.synthesis();
  const double inv_d = 1.0 / model.d();

  Vector z = Vector::Zero(a.cols());
  if (cfg.init == InversionInit::kSeededRandom) {
    Rng rng(cfg.init_seed);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  }

  Inversion out;
  for (int iter = 0;; ++iter) {
    Vector residual = a * z - x.pixels;
    const double loss = residual.squaredNorm() * inv_d;
    if (!std::isfinite(loss)) {
      throw DivergenceError("inversion diverged at iteration " + std::to_string(iter) +
                                " (step_size " + std::to_string(cfg.step_size) + ")",
                            iter);
    }
    out.final_mse = loss;
    out.iterations = iter;
    if (loss <= cfg.tol || iter == cfg.max_iters) break;
    z.noalias() -= (cfg.step_size * 2.0 * inv_d) * (a.transpose() * residual);
  }
  out.codes = unflatten(z, model.m(), model.k());
  return out;
}

Partition partition(const LatentCodes& z) {
  const auto& idx = z.private_idx;
  Partition p{Matrix(idx.private_count(), z.code_dim()), Matrix(idx.common_count(), z.code_dim())};
  int pi = 0, ci = 0;
  for (int row = 0; row < z.code_count(); ++row) {
    if (idx.contains(row)) {
      p.private_codes.row(pi++) = z.codes.row(row);
    } else {
      p.common_codes.row(ci++) = z.codes.row(row);
    }
  }
  return p;
}

LatentCodes combine(const Matrix& private_codes, const Matrix& common_codes, const PrivateIndex& private_idx) {
  if (private_codes.rows() != private_idx.private_count() || common_codes.rows() != private_idx.common_count()) {
    throw InvalidInput("combine: got " + std::to_string(private_codes.rows()) + " private / " +
                       std::to_string(common_codes.rows()) + " common rows, index expects " +
                       std::to_string(private_idx.private_count()) + " / " +
                       std::to_string(private_idx.common_count()));
  }
  if (private_idx.common_count() > 0 && private_codes.cols() != common_codes.cols()) {
    throw InvalidInput("combine: code dim mismatch");
  }
  Matrix codes(private_idx.code_count(), private_codes.cols());
  int pi = 0, ci = 0;
  for (int row = 0; row < codes.rows(); ++row) {
    codes.row(row) = private_idx.contains(row) ? private_codes.row(pi++) : common_codes.row(ci++);
  }
  return LatentCodes(std::move(codes), private_idx);
}

}  // namespace wdp
