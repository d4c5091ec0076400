/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "mdc/codec.hpp"

#include "mdc/transform.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace mdc {

namespace {

long sad(const PlaneU8& a, const Eigen::Ref<const PlaneU8>& b) {
  return (a.cast<int>() - b.cast<int>()).cwiseAbs().sum();
}

PlaneU8 reconstruct_block(const Eigen::MatrixXi& levels, double step,
                          const Eigen::MatrixXd& prediction) {
  const Eigen::MatrixXd residual = inverse_dct2(levels.cast<double>() * step);
  const int n = static_cast<int>(levels.rows());
  PlaneU8 out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = clamp_u8(prediction(r, c) + residual(r, c));
  return out;
}

}  // namespace

ResidualCtu predict_ctu(const FramePlane& frame, const FramePlane* reference,
                        const CtuGrid& grid, int index,
                        const PredictConfig& config) {
  ResidualCtu out;
  out.index = index;
  out.source = ctu_block(frame, grid, index);
  const int n = grid.ctu_size;

  // Intra: DC prediction from the block mean; the mean byte travels in the
  // CTU header so the decoder can reproduce it.
  const double mean = out.source.cast<double>().mean();
  out.dc = clamp_u8(mean);
  const long sad_intra =
      (out.source.cast<int>().array() - static_cast<int>(out.dc)).abs().sum();

  bool use_inter = false;
  MotionVector best_mv;
  long sad_inter = 0;
  if (config.allow_inter) {
    if (reference == nullptr) throw std::invalid_argument("missing-reference");
    const int x0 = grid.x0(index);
    const int y0 = grid.y0(index);
    const int w = frame.width();
    const int h = frame.height();
    // (0, 0) is evaluated first and later candidates must improve strictly,
    // so static content always yields a zero vector.
    sad_inter = sad(out.source, reference->samples.block(y0, x0, n, n));
    for (int dy = -config.search_range; dy <= config.search_range; ++dy)
      for (int dx = -config.search_range; dx <= config.search_range; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int x = x0 + dx;
        const int y = y0 + dy;
        if (x < 0 || y < 0 || x + n > w || y + n > h) continue;
        const long s = sad(out.source, reference->samples.block(y, x, n, n));
        if (s < sad_inter) {
          sad_inter = s;
          best_mv = {static_cast<std::int8_t>(dx), static_cast<std::int8_t>(dy)};
        }
      }
    use_inter = sad_inter <= sad_intra;
  }

  if (use_inter) {
    out.mode = PredictionMode::InterPrevious;
    out.mv = best_mv;
    out.prediction = reference->samples
                         .block(grid.y0(index) + best_mv.dy,
                                grid.x0(index) + best_mv.dx, n, n)
                         .cast<double>();
  } else {
    out.mode = PredictionMode::IntraDc;
    out.prediction = Eigen::MatrixXd::Constant(n, n, static_cast<double>(out.dc));
  }
  out.coefficients = forward_dct2(out.source.cast<double>() - out.prediction);
  return out;
}

CodedCtu quantize_and_code(const ResidualCtu& residual, const QuantParams& qp) {
  CodedCtu out;
  out.index = residual.index;
  out.qp = qp.qp;
  out.mode = residual.mode;
  out.mv = residual.mv;
  out.dc = residual.dc;

  const int n = static_cast<int>(residual.coefficients.rows());
  out.levels.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out.levels(r, c) = static_cast<int>(
          round_half_away(residual.coefficients(r, c) / qp.step));

  BitWriter writer;
  out.bits = encode_levels(out.levels, writer);

  const PlaneU8 recon = reconstruct_block(out.levels, qp.step, residual.prediction);
  out.distortion =
      (residual.source.cast<double>() - recon.cast<double>()).squaredNorm();
  return out;
}

PlaneU8 reconstruct_ctu(const CodedCtu& coded, const Eigen::MatrixXd& prediction) {
  return reconstruct_block(coded.levels, QuantParams::step_for(coded.qp),
                           prediction);
}

const std::vector<int>& zigzag_order(int n) {
  static std::map<int, std::vector<int>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);

  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    const int lo = s < n ? 0 : s - n + 1;
    const int hi = s < n ? s : n - 1;
    if (s & 1) {
      for (int i = lo; i <= hi; ++i) order.push_back(i * n + (s - i));
    } else {
      for (int i = hi; i >= lo; --i) order.push_back(i * n + (s - i));
    }
  }
  return cache.emplace(n, std::move(order)).first->second;
}

std::int64_t encode_levels(const Eigen::MatrixXi& levels, BitWriter& writer) {
  const int n = static_cast<int>(levels.rows());
  const std::vector<int>& zz = zigzag_order(n);
  const int total = n * n;
  const std::uint64_t before = writer.bits();

  int pos = 0;
  for (int scan = 0; scan < total; ++scan) {
    const int value = levels(zz[scan] / n, zz[scan] % n);
    if (value == 0) continue;
    writer.put_ue(static_cast<std::uint64_t>(scan - pos));  // zero run
    writer.put_se(value);
    pos = scan + 1;
  }
  // End-of-block: a run that cannot occur before a coded level.
  writer.put_ue(static_cast<std::uint64_t>(total));
  return static_cast<std::int64_t>(writer.bits() - before);
}

Eigen::MatrixXi decode_levels(BitReader& reader, int n) {
  const std::vector<int>& zz = zigzag_order(n);
  const int total = n * n;
  Eigen::MatrixXi levels = Eigen::MatrixXi::Zero(n, n);

  int pos = 0;
  for (;;) {
    const std::uint64_t run = reader.get_ue();
    if (run == static_cast<std::uint64_t>(total)) break;  // end of block
    if (run > static_cast<std::uint64_t>(total) ||
        pos + static_cast<int>(run) >= total)
      throw SyntaxError("bad-run");
    pos += static_cast<int>(run);
    const std::int64_t value = reader.get_se();
    if (value == 0) throw SyntaxError("level-zero");
    levels(zz[pos] / n, zz[pos] % n) = static_cast<int>(value);
    ++pos;
  }
  return levels;
}

double mse_cropped(const FramePlane& original, const FramePlane& decoded) {
  if (original.crop_width != decoded.crop_width ||
      original.crop_height != decoded.crop_height)
    throw std::invalid_argument("dimension-mismatch");
  const int w = original.crop_width;
  const int h = original.crop_height;
  const double sse = (original.samples.topLeftCorner(h, w).cast<double>() -
                      decoded.samples.topLeftCorner(h, w).cast<double>())
                         .squaredNorm();
  return sse / (static_cast<double>(w) * h);
}

double psnr(const FramePlane& original, const FramePlane& decoded) {
  const double mse = mse_cropped(original, decoded);
  if (mse == 0.0) return 99.0;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace mdc
