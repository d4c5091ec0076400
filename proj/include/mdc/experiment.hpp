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

#pragma once

#include "mdc/decoder.hpp"
#include "mdc/source.hpp"

#include <array>
#include <string>
#include <vector>

namespace mdc {

enum class BaselineKind { Mdc, SingleDuplicated, SingleOneChannel };

struct ExperimentConfig {
  SequenceSource source;
  int ctu_size = 16;
  std::vector<int> sweep_qps = default_sweep_qps();
  double rate_target = 0.0;  // bits per frame (both descriptions); 0 = auto
  std::vector<double> pe_list{0.1, 0.05, 0.01};
  int trials = 3;
  std::uint64_t seed = 1;
  int ctus_per_nalu = 0;  // 0 = one CTU row per NALU
  int idr_max_period = 250;
  std::string pattern_file;  // empty = stochastic channel
  BaselineKind baseline = BaselineKind::Mdc;
  int feedback_window = 500;
  double d_error = -1.0;  // <0 = use the measured concealment SSE
  int qp_min = kQpMin;
  int qp_max = kQpMax;
  RolePattern role_pattern = RolePattern::Checkerboard;
  ChannelMode channel_mode = ChannelMode::Erasure;
  std::string dump_frames_dir;  // when set, decoded frames land here

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Everything the encoder produces for one frame.
struct EncodedFrame {
  bool idr = false;
  double r_target = 0.0;  // effective frame budget (config or auto)
  double epsilon = 0.0;
  double pe_alloc = 0.0;  // feedback estimate the allocator saw
  std::vector<ResidualCtu> residuals;
  std::vector<CtuRdModel> models;
  AllocationResult alloc;
  std::array<std::vector<CodedCtu>, 2> coded;  // per description
  FramePlane central;                          // encoder-side reconstruction
  std::array<FramePlane, 2> side;              // encoder-side side pictures
  double d_central_sse = 0.0;
  std::array<double, 2> d_side_sse{0.0, 0.0};
  double d_error_sse = 0.0;  // SSE of whole-frame concealment
};

/// Runs split -> regression -> allocation -> quantization for one frame
/// against the previous encoder-side central reconstruction.
EncodedFrame encode_frame(const FramePlane& frame, const FramePlane* previous,
                          bool idr, double pe_alloc,
                          const ExperimentConfig& config, const CtuGrid& grid,
                          const RoleAssignment& roles);

struct FrameStats {
  int frame = 0;
  bool idr = false;
  double r_target = 0.0;
  double epsilon = 0.0;
  std::array<double, 2> rate_bits{0.0, 0.0};   // measured entropy bits
  std::array<double, 2> alloc_rate{0.0, 0.0};  // sum of r_star
  std::array<double, 2> lambda{0.0, 0.0};
  std::array<double, 2> psnr_side{0.0, 0.0};
  double psnr_central = 0.0;
  double mse_central = 0.0;
  std::array<double, 2> mse_side{0.0, 0.0};
  int lost_packets = 0;
  int concealed_ctus = 0;
  double de_eq1 = 0.0;
  double de_enum = 0.0;
};

struct TrialReport {
  double pe = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  BaselineKind baseline = BaselineKind::Mdc;
  std::vector<FrameStats> frames;
  std::vector<DecodeError> decode_log;
  std::vector<ChannelTrace> traces;  // in transmit order

  double mean_psnr_central() const;
  double mean_psnr_side(int desc) const;
  double mean_rate_total() const;
  double mean_de_eq1() const;
  double mean_de_enum() const;
  int total_lost_packets() const;
  int total_concealed() const;
};

/// Full Monte Carlo harness: one TrialReport per (pe, trial).
std::vector<TrialReport> run_pipeline(const ExperimentConfig& config);

/// Exact four-outcome expectation for the one-packet-per-description case:
///   (1-pe)^2 * Dc + pe*(1-pe) * (Ds1 + Ds2) + pe^2 * d_error
/// Throws config-mismatch unless packets_per_description == 1.
double enumerate_expected_distortion(const ChannelState& channel,
                                     double d_central, double d_side1,
                                     double d_side2, double d_error,
                                     int packets_per_description);

/// Writes results.csv, summary.csv and a gnuplot script into out_dir.
void emit_reports(const std::vector<TrialReport>& reports,
                  const std::string& out_dir);

/// Re-aggregates an existing results.csv (the `report` subcommand).
void summarize_results_file(const std::string& results_csv,
                            const std::string& out_dir);

inline constexpr const char* kResultsHeader =
    "pe,trial,frame,rate1,rate2,psnr_side1,psnr_side2,psnr_central,"
    "lost_pkts,concealed_ctus,de_eq1,de_enum";

}  // namespace mdc
