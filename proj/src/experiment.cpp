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

#include "mdc/experiment.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mdc {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return kNan;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

SourceKind source_kind_from(const std::string& name) {
  if (name == "raw-file") return SourceKind::RawFile;
  if (name == "synthetic-gradient") return SourceKind::Gradient;
  if (name == "synthetic-noise") return SourceKind::Noise;
  if (name == "synthetic-moving-box") return SourceKind::MovingBox;
  throw std::invalid_argument("unknown source kind: " + name);
}

std::string source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::RawFile: return "raw-file";
    case SourceKind::Gradient: return "synthetic-gradient";
    case SourceKind::Noise: return "synthetic-noise";
    case SourceKind::MovingBox: return "synthetic-moving-box";
  }
  return "?";
}

BaselineKind baseline_from(const std::string& name) {
  if (name == "mdc") return BaselineKind::Mdc;
  if (name == "single-description-duplicated") return BaselineKind::SingleDuplicated;
  if (name == "single-description-one-channel") return BaselineKind::SingleOneChannel;
  throw std::invalid_argument("unknown baseline: " + name);
}

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Mdc: return "mdc";
    case BaselineKind::SingleDuplicated: return "single-description-duplicated";
    case BaselineKind::SingleOneChannel: return "single-description-one-channel";
  }
  return "?";
}

/// All-principal role table used by the single-description baselines. The
/// complementary invariant intentionally does not apply to them.
RoleAssignment all_principal(int n) {
  RoleAssignment roles;
  roles.roles[0].assign(n, CtuRole::Principal);
  roles.roles[1].assign(n, CtuRole::Principal);
  return roles;
}

FramePlane wrap_plane(const PlaneU8& samples, const FramePlane& like) {
  FramePlane frame;
  frame.samples = samples;
  frame.crop_width = like.crop_width;
  frame.crop_height = like.crop_height;
  return frame;
}

double frame_sse(const FramePlane& a, const PlaneU8& b) {
  return (a.samples.cast<double>() - b.cast<double>()).squaredNorm();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig config;

  static const char* known[] = {
      "source",        "ctu_size",      "sweep_qps",     "rate_target",
      "pe",            "trials",        "seed",          "ctus_per_nalu",
      "idr_max_period", "pattern_file", "baseline",      "feedback_window",
      "d_error",       "qp_min",        "qp_max",        "role_pattern",
      "channel_mode",  "dump_frames_dir"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }

  if (j.contains("source")) {
    const json& s = j["source"];
    if (s.contains("kind")) config.source.kind = source_kind_from(s["kind"]);
    if (s.contains("width")) config.source.width = s["width"];
    if (s.contains("height")) config.source.height = s["height"];
    if (s.contains("frames")) config.source.frame_count = s["frames"];
    if (s.contains("seed")) config.source.seed = s["seed"];
    if (s.contains("path")) config.source.path = s["path"];
  }
  if (j.contains("ctu_size")) config.ctu_size = j["ctu_size"];
  if (j.contains("sweep_qps")) config.sweep_qps = j["sweep_qps"].get<std::vector<int>>();
  if (j.contains("rate_target")) config.rate_target = j["rate_target"];
  if (j.contains("pe")) config.pe_list = j["pe"].get<std::vector<double>>();
  if (j.contains("trials")) config.trials = j["trials"];
  if (j.contains("seed")) config.seed = j["seed"];
  if (j.contains("ctus_per_nalu")) config.ctus_per_nalu = j["ctus_per_nalu"];
  if (j.contains("idr_max_period")) config.idr_max_period = j["idr_max_period"];
  if (j.contains("pattern_file")) config.pattern_file = j["pattern_file"];
  if (j.contains("baseline")) config.baseline = baseline_from(j["baseline"]);
  if (j.contains("feedback_window")) config.feedback_window = j["feedback_window"];
  if (j.contains("d_error")) config.d_error = j["d_error"];
  if (j.contains("qp_min")) config.qp_min = j["qp_min"];
  if (j.contains("qp_max")) config.qp_max = j["qp_max"];
  if (j.contains("role_pattern")) {
    const std::string p = j["role_pattern"];
    if (p == "checkerboard")
      config.role_pattern = RolePattern::Checkerboard;
    else if (p == "column-alternating")
      config.role_pattern = RolePattern::ColumnAlternating;
    else
      throw std::invalid_argument("unknown role_pattern: " + p);
  }
  if (j.contains("channel_mode")) {
    const std::string m = j["channel_mode"];
    if (m == "erasure")
      config.channel_mode = ChannelMode::Erasure;
    else if (m == "bit-error")
      config.channel_mode = ChannelMode::BitError;
    else
      throw std::invalid_argument("unknown channel_mode: " + m);
  }
  if (j.contains("dump_frames_dir")) config.dump_frames_dir = j["dump_frames_dir"];
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("unreadable-file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["source"] = {{"kind", source_kind_name(source.kind)},
                 {"width", source.width},
                 {"height", source.height},
                 {"frames", source.frame_count},
                 {"seed", source.seed},
                 {"path", source.path}};
  j["ctu_size"] = ctu_size;
  j["sweep_qps"] = sweep_qps;
  j["rate_target"] = rate_target;
  j["pe"] = pe_list;
  j["trials"] = trials;
  j["seed"] = seed;
  j["ctus_per_nalu"] = ctus_per_nalu;
  j["idr_max_period"] = idr_max_period;
  j["pattern_file"] = pattern_file;
  j["baseline"] = baseline_name(baseline);
  j["feedback_window"] = feedback_window;
  j["d_error"] = d_error;
  j["qp_min"] = qp_min;
  j["qp_max"] = qp_max;
  j["role_pattern"] = role_pattern == RolePattern::Checkerboard
                          ? "checkerboard"
                          : "column-alternating";
  j["channel_mode"] = channel_mode == ChannelMode::Erasure ? "erasure" : "bit-error";
  j["dump_frames_dir"] = dump_frames_dir;
  return j.dump(2);
}

EncodedFrame encode_frame(const FramePlane& frame, const FramePlane* previous,
                          bool idr, double pe_alloc,
                          const ExperimentConfig& config, const CtuGrid& grid,
                          const RoleAssignment& roles) {
  EncodedFrame out;
  out.idr = idr;
  out.pe_alloc = pe_alloc;
  const int n_ctus = grid.count();

  PredictConfig predict_config;
  predict_config.allow_inter = !idr && previous != nullptr;

  out.residuals.reserve(n_ctus);
  out.models.reserve(n_ctus);
  for (int i = 0; i < n_ctus; ++i) {
    out.residuals.push_back(
        predict_ctu(frame, previous, grid, i, predict_config));
    out.models.push_back(
        fit_exponential(i, sweep_ctu(out.residuals[i], config.sweep_qps)));
  }

  // Auto budget: twice the measured per-description rate at the mid-sweep QP,
  // which centers the allocation near that operating point.
  double target = config.rate_target;
  if (target <= 0.0) {
    const int mid_qp = config.sweep_qps[config.sweep_qps.size() / 2];
    double sum = 0.0;
    for (const CtuRdModel& model : out.models)
      for (const RdSample& sample : model.samples)
        if (sample.qp == mid_qp) sum += sample.rate;
    target = 2.0 * sum;
  }
  out.r_target = target;
  out.epsilon = default_epsilon(target);

  AllocationProblem problem;
  problem.models = out.models;
  problem.channel = {pe_alloc};
  problem.r_target = target;
  problem.qp_min = config.qp_min;
  problem.qp_max = config.qp_max;

  if (config.baseline == BaselineKind::Mdc) {
    out.alloc = allocate_frame(problem, roles);
  } else {
    // Single-description baselines: one stream, every CTU weighted equally.
    const double stream_target =
        config.baseline == BaselineKind::SingleOneChannel ? target : target / 2.0;
    const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(n_ctus);
    const double eps = std::max(8.0, 1e-3 * stream_target);
    const DescriptionSolution sol =
        solve_for_target(out.models, ones, stream_target, eps,
                         problem.lambda_min, problem.lambda_max, problem.rule);
    DescriptionAllocation alloc;
    alloc.lambda = sol.lambda;
    alloc.r_star = sol.rates;
    alloc.rate_total = sol.rate_total;
    alloc.c = ones;
    alloc.role.assign(n_ctus, CtuRole::Principal);
    alloc.qp.resize(n_ctus);
    for (int i = 0; i < n_ctus; ++i) {
      alloc.qp[i] = rate_to_qp(out.models[i], sol.rates[i], config.qp_min,
                               config.qp_max);
      alloc.d_principal += out.models[i].predicted(sol.rates[i]);
    }
    out.alloc.desc[0] = alloc;
    if (config.baseline == BaselineKind::SingleDuplicated)
      out.alloc.desc[1] = alloc;
  }

  // Quantize per description and build the encoder-side reconstructions.
  const int n = grid.ctu_size;
  PlaneU8 central = PlaneU8::Zero(frame.height(), frame.width());
  std::array<PlaneU8, 2> sides{central, central};
  const bool two_streams = config.baseline != BaselineKind::SingleOneChannel;

  for (int j = 0; j < 2; ++j) {
    if (j == 1 && !two_streams) break;
    if (j == 1 && config.baseline == BaselineKind::SingleDuplicated) {
      out.coded[1] = out.coded[0];  // same stream on both channels
      sides[1] = sides[0];
      out.d_side_sse[1] = out.d_side_sse[0];
      break;
    }
    out.coded[j].reserve(n_ctus);
    for (int i = 0; i < n_ctus; ++i) {
      const CodedCtu coded = quantize_and_code(
          out.residuals[i], QuantParams(out.alloc.desc[j].qp[i]));
      const PlaneU8 recon = reconstruct_ctu(coded, out.residuals[i].prediction);
      sides[j].block(grid.y0(i), grid.x0(i), n, n) = recon;
      out.d_side_sse[j] += coded.distortion;
      out.coded[j].push_back(coded);
    }
  }

  // Central reconstruction: keep the principal copy of every CTU (the finer
  // one); baselines have a single stream so central equals it.
  for (int i = 0; i < n_ctus; ++i) {
    const int j =
        (config.baseline == BaselineKind::Mdc &&
         roles.roles[1][i] == CtuRole::Principal)
            ? 1
            : 0;
    const CodedCtu& coded = out.coded[j][i];
    central.block(grid.y0(i), grid.x0(i), n, n) =
        reconstruct_ctu(coded, out.residuals[i].prediction);
    out.d_central_sse += coded.distortion;
  }

  out.central = wrap_plane(central, frame);
  out.side[0] = wrap_plane(sides[0], frame);
  out.side[1] = wrap_plane(two_streams ? sides[1] : PlaneU8::Zero(frame.height(), frame.width()),
                           frame);

  out.d_error_sse =
      previous != nullptr
          ? frame_sse(frame, previous->samples)
          : frame_sse(frame, PlaneU8::Constant(frame.height(), frame.width(), 128));
  return out;
}

double enumerate_expected_distortion(const ChannelState& channel,
                                     double d_central, double d_side1,
                                     double d_side2, double d_error,
                                     int packets_per_description) {
  if (packets_per_description != 1)
    throw std::invalid_argument("config-mismatch: needs one packet per description");
  const double pe = channel.pe;
  return (1.0 - pe) * (1.0 - pe) * d_central + pe * (1.0 - pe) * (d_side1 + d_side2) +
         pe * pe * d_error;
}

double TrialReport::mean_psnr_central() const {
  std::vector<double> v;
  for (const FrameStats& f : frames) v.push_back(f.psnr_central);
  return mean_of(v);
}

double TrialReport::mean_psnr_side(int desc) const {
  std::vector<double> v;
  for (const FrameStats& f : frames) v.push_back(f.psnr_side[desc]);
  return mean_of(v);
}

double TrialReport::mean_rate_total() const {
  std::vector<double> v;
  for (const FrameStats& f : frames) v.push_back(f.rate_bits[0] + f.rate_bits[1]);
  return mean_of(v);
}

double TrialReport::mean_de_eq1() const {
  std::vector<double> v;
  for (const FrameStats& f : frames) v.push_back(f.de_eq1);
  return mean_of(v);
}

double TrialReport::mean_de_enum() const {
  std::vector<double> v;
  for (const FrameStats& f : frames) v.push_back(f.de_enum);
  return mean_of(v);
}

int TrialReport::total_lost_packets() const {
  int total = 0;
  for (const FrameStats& f : frames) total += f.lost_packets;
  return total;
}

int TrialReport::total_concealed() const {
  int total = 0;
  for (const FrameStats& f : frames) total += f.concealed_ctus;
  return total;
}

namespace {

TrialReport run_trial(const ExperimentConfig& config,
                      const std::vector<FramePlane>& frames, const CtuGrid& grid,
                      const RoleAssignment& roles,
                      const std::vector<bool>* pattern, double pe, int pe_index,
                      int trial_index) {
  TrialReport report;
  report.pe = pe;
  report.trial = trial_index;
  report.baseline = config.baseline;
  report.seed = mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(pe_index) + 1),
                         static_cast<std::uint64_t>(trial_index) + 1);

  const std::array<std::uint64_t, 2> channel_seed{mix_seed(report.seed, 101),
                                                  mix_seed(report.seed, 202)};
  const bool two_streams = config.baseline != BaselineKind::SingleOneChannel;
  const int ctus_per_nalu =
      config.ctus_per_nalu >= 1 ? config.ctus_per_nalu : grid.cols;

  DecoderConfig decoder_config;
  decoder_config.grid = grid;
  decoder_config.crop_width = frames[0].crop_width;
  decoder_config.crop_height = frames[0].crop_height;
  decoder_config.roles = roles.roles;
  decoder_config.qp_max = config.qp_max;

  DecoderState state;
  FramePlane encoder_central;
  bool have_central = false;
  std::vector<ChannelTrace> history;
  std::array<std::uint32_t, 2> seq{0, 0};
  std::array<std::size_t, 2> pattern_cursor{0, 0};
  int since_idr = 0;

  std::ofstream decoded_raw;
  std::string dump_dir;
  if (!config.dump_frames_dir.empty()) {
    char sub[64];
    std::snprintf(sub, sizeof(sub), "/pe%g_trial%d", pe, trial_index);
    dump_dir = config.dump_frames_dir + sub;
    std::filesystem::create_directories(dump_dir);
    decoded_raw.open(dump_dir + "/decoded.yuv", std::ios::binary);
  }

  for (std::size_t f = 0; f < frames.size(); ++f) {
    // Channel feedback, sampled once per frame; the first frame uses the
    // configured rate (cold start).
    const double pe_hat =
        f == 0 ? pe : feedback_pe(history, config.feedback_window, pe);
    const int period = idr_period({pe_hat}, config.idr_max_period).period;
    const bool idr = f == 0 || since_idr >= period;
    since_idr = idr ? 1 : since_idr + 1;

    const EncodedFrame enc =
        encode_frame(frames[f], have_central ? &encoder_central : nullptr, idr,
                     pe_hat, config, grid, roles);

    std::array<std::vector<Packet>, 2> sent;
    std::array<std::vector<Packet>, 2> delivered;
    int lost = 0;
    for (int j = 0; j < 2; ++j) {
      if (j == 1 && !two_streams) break;
      sent[j] = packetize(enc.coded[j], static_cast<int>(f), j,
                          idr ? NaluType::Idr : NaluType::Inter, ctus_per_nalu,
                          seq[j]);
      seq[j] += static_cast<std::uint32_t>(sent[j].size());
      TransmitResult tx =
          pattern != nullptr
              ? transmit_with_pattern(sent[j], *pattern, pattern_cursor[j])
              : transmit(sent[j], pe, mix_seed(channel_seed[j], f),
                         config.channel_mode);
      for (const ChannelTrace::Decision& d : tx.trace.decisions)
        if (d.erased) ++lost;
      delivered[j] = std::move(tx.delivered);
      history.push_back(std::move(tx.trace));
    }

    // Decode with the same workflow as decode_sequence, keeping the side
    // pictures for reporting.
    bool idr_seen = false;
    for (int j = 0; j < 2 && !idr_seen; ++j)
      for (const Packet& packet : delivered[j]) {
        const PacketView view = parse_packet(packet.wire);
        if (view.framing_ok && view.header_crc_ok &&
            view.header.type == NaluType::Idr) {
          idr_seen = true;
          break;
        }
      }
    if (idr_seen) state.previous.reset();

    const SidePicture side1 =
        decode_description(delivered[0], static_cast<int>(f), 0, decoder_config, state);
    SidePicture side2;
    if (two_streams) {
      side2 = decode_description(delivered[1], static_cast<int>(f), 1,
                                 decoder_config, state);
    } else {
      side2.samples = PlaneU8::Zero(frames[f].height(), frames[f].width());
      side2.status.assign(grid.count(), CtuDecodeStatus::Missing);
    }
    const CentralPicture central =
        merge_central(side1, side2, decoder_config, state);

    if (!dump_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "/central_%03zu.pgm", f);
      write_pgm(central.frame, dump_dir + name);
      append_raw(central.frame, decoded_raw);
    }

    FrameStats stats;
    stats.frame = static_cast<int>(f);
    stats.idr = idr;
    stats.r_target = enc.r_target;
    stats.epsilon = enc.epsilon;
    for (int j = 0; j < 2; ++j) {
      for (const CodedCtu& ctu : enc.coded[j])
        stats.rate_bits[j] += static_cast<double>(ctu.bits);
      stats.alloc_rate[j] = enc.alloc.desc[j].rate_total;
      stats.lambda[j] = enc.alloc.desc[j].lambda;
    }
    const FramePlane side_plane1 = wrap_plane(side1.samples, frames[f]);
    const FramePlane side_plane2 = wrap_plane(side2.samples, frames[f]);
    stats.psnr_side[0] = psnr(frames[f], side_plane1);
    stats.psnr_side[1] = two_streams ? psnr(frames[f], side_plane2) : kNan;
    stats.psnr_central = psnr(frames[f], central.frame);
    stats.mse_central = mse_cropped(frames[f], central.frame);
    stats.mse_side[0] = mse_cropped(frames[f], side_plane1);
    stats.mse_side[1] = two_streams ? mse_cropped(frames[f], side_plane2) : kNan;
    stats.lost_packets = lost;
    for (CtuProvenance p : central.provenance)
      if (p == CtuProvenance::Concealed) ++stats.concealed_ctus;

    const double d_error =
        config.d_error >= 0.0 ? config.d_error : enc.d_error_sse;
    const int packets_per_desc = static_cast<int>(sent[0].size());
    switch (config.baseline) {
      case BaselineKind::Mdc:
        stats.de_eq1 = expected_distortion(enc.alloc, {pe}, d_error);
        stats.de_enum =
            packets_per_desc == 1
                ? enumerate_expected_distortion({pe}, enc.d_central_sse,
                                                enc.d_side_sse[0],
                                                enc.d_side_sse[1], d_error, 1)
                : kNan;
        break;
      case BaselineKind::SingleOneChannel:
        stats.de_eq1 = (1.0 - pe) * enc.alloc.desc[0].d_principal + pe * d_error;
        stats.de_enum = packets_per_desc == 1
                            ? (1.0 - pe) * enc.d_central_sse + pe * d_error
                            : kNan;
        break;
      case BaselineKind::SingleDuplicated: {
        const double p2 = pe * pe;
        stats.de_eq1 = (1.0 - p2) * enc.alloc.desc[0].d_principal + p2 * d_error;
        stats.de_enum = packets_per_desc == 1
                            ? (1.0 - p2) * enc.d_central_sse + p2 * d_error
                            : kNan;
        break;
      }
    }

    report.frames.push_back(stats);
    encoder_central = enc.central;
    have_central = true;
  }

  report.decode_log = std::move(state.log);
  report.traces = std::move(history);
  return report;
}

}  // namespace

std::vector<TrialReport> run_pipeline(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  for (double pe : config.pe_list)
    if (pe < 0.0 || pe > 1.0) throw std::invalid_argument("p_e outside [0, 1]");

  const std::vector<FramePlane> frames = load_source(config.source, config.ctu_size);
  if (frames.empty()) throw std::invalid_argument("empty source");
  const CtuGrid grid = CtuGrid::for_plane(frames[0], config.ctu_size);

  const RoleAssignment roles = config.baseline == BaselineKind::Mdc
                                   ? assign_roles(grid, config.role_pattern)
                                   : all_principal(grid.count());

  std::vector<bool> pattern;
  if (!config.pattern_file.empty()) pattern = load_loss_pattern(config.pattern_file);

  std::vector<TrialReport> reports;
  for (std::size_t pi = 0; pi < config.pe_list.size(); ++pi)
    for (int t = 0; t < config.trials; ++t)
      reports.push_back(run_trial(config, frames, grid, roles,
                                  pattern.empty() ? nullptr : &pattern,
                                  config.pe_list[pi], static_cast<int>(pi), t));
  return reports;
}

namespace {

void write_results_csv(std::ostream& out, const std::vector<TrialReport>& reports) {
  out << kResultsHeader << "\n";
  for (const TrialReport& report : reports)
    for (const FrameStats& f : report.frames)
      out << fmt(report.pe) << "," << report.trial << "," << f.frame << ","
          << fmt(f.rate_bits[0]) << "," << fmt(f.rate_bits[1]) << ","
          << fmt(f.psnr_side[0]) << "," << fmt(f.psnr_side[1]) << ","
          << fmt(f.psnr_central) << "," << f.lost_packets << ","
          << f.concealed_ctus << "," << fmt(f.de_eq1) << "," << fmt(f.de_enum)
          << "\n";
}

struct SummaryRow {
  double pe = 0.0;
  int trials = 0;
  double rate = 0.0;
  double psnr_side1 = 0.0;
  double psnr_side2 = 0.0;
  double psnr_central = 0.0;
  double lost = 0.0;
  double concealed = 0.0;
  double de_eq1 = 0.0;
  double de_enum = 0.0;
};

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "pe,trials,mean_rate_total,mean_psnr_side1,mean_psnr_side2,"
         "mean_psnr_central,mean_lost_pkts,mean_concealed_ctus,mean_de_eq1,"
         "mean_de_enum\n";
  for (const SummaryRow& r : rows)
    out << fmt(r.pe) << "," << r.trials << "," << fmt(r.rate) << ","
        << fmt(r.psnr_side1) << "," << fmt(r.psnr_side2) << ","
        << fmt(r.psnr_central) << "," << fmt(r.lost) << "," << fmt(r.concealed)
        << "," << fmt(r.de_eq1) << "," << fmt(r.de_enum) << "\n";
}

std::vector<SummaryRow> summarize(const std::vector<TrialReport>& reports) {
  std::vector<double> pe_order;
  for (const TrialReport& r : reports) {
    bool seen = false;
    for (double pe : pe_order) seen = seen || pe == r.pe;
    if (!seen) pe_order.push_back(r.pe);
  }

  std::vector<SummaryRow> rows;
  for (double pe : pe_order) {
    SummaryRow row;
    row.pe = pe;
    std::vector<double> rate, s1, s2, central, lost, concealed, de1, den;
    for (const TrialReport& r : reports) {
      if (r.pe != pe) continue;
      ++row.trials;
      rate.push_back(r.mean_rate_total());
      s1.push_back(r.mean_psnr_side(0));
      s2.push_back(r.mean_psnr_side(1));
      central.push_back(r.mean_psnr_central());
      lost.push_back(static_cast<double>(r.total_lost_packets()));
      concealed.push_back(static_cast<double>(r.total_concealed()));
      de1.push_back(r.mean_de_eq1());
      den.push_back(r.mean_de_enum());
    }
    row.rate = mean_of(rate);
    row.psnr_side1 = mean_of(s1);
    row.psnr_side2 = mean_of(s2);
    row.psnr_central = mean_of(central);
    row.lost = mean_of(lost);
    row.concealed = mean_of(concealed);
    row.de_eq1 = mean_of(de1);
    row.de_enum = mean_of(den);
    rows.push_back(row);
  }
  return rows;
}

void write_plot_script(std::ostream& out) {
  out << "# gnuplot script: render quality curves from summary.csv\n"
         "set datafile separator \",\"\n"
         "set terminal pngcairo size 900,600\n"
         "set key left bottom\n"
         "set grid\n"
         "set output \"psnr_vs_pe.png\"\n"
         "set logscale x\n"
         "set xlabel \"packet loss rate p_e\"\n"
         "set ylabel \"mean PSNR (dB)\"\n"
         "plot \"summary.csv\" skip 1 using 1:6 with linespoints pt 7 title "
         "\"central\", \\\n"
         "     \"summary.csv\" skip 1 using 1:4 with linespoints pt 5 title "
         "\"side 1\"\n"
         "unset logscale x\n"
         "set output \"rate_vs_psnr.png\"\n"
         "set xlabel \"mean total rate (bits/frame)\"\n"
         "set ylabel \"mean central PSNR (dB)\"\n"
         "plot \"summary.csv\" skip 1 using 3:6:(sprintf(\"p_e=%g\", $1)) "
         "with labels point pt 7 offset char 1,0.5 notitle\n";
}

}  // namespace

void emit_reports(const std::vector<TrialReport>& reports,
                  const std::string& out_dir) {
  if (reports.empty()) throw std::invalid_argument("empty-report-list");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("io-error: cannot create " + out_dir);

  {
    std::ofstream results(out_dir + "/results.csv", std::ios::binary);
    if (!results)
      throw std::runtime_error("io-error: cannot open " + out_dir + "/results.csv");
    write_results_csv(results, reports);
  }
  // Summaries are always derived from the written file, so the `report`
  // subcommand regenerates them byte-identically.
  summarize_results_file(out_dir + "/results.csv", out_dir);
}

void summarize_results_file(const std::string& results_csv,
                            const std::string& out_dir) {
  std::ifstream in(results_csv);
  if (!in) throw std::runtime_error("unreadable-file: " + results_csv);

  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw std::runtime_error("results.csv: unexpected header");

  // Rebuild minimal per-trial reports keyed by (pe, trial) in file order.
  std::vector<TrialReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12)
      throw std::runtime_error("results.csv: malformed row: " + line);

    const double pe = std::stod(cells[0]);
    const int trial = std::stoi(cells[1]);
    if (reports.empty() || reports.back().pe != pe ||
        reports.back().trial != trial) {
      TrialReport report;
      report.pe = pe;
      report.trial = trial;
      reports.push_back(report);
    }
    FrameStats f;
    f.frame = std::stoi(cells[2]);
    f.rate_bits = {std::stod(cells[3]), std::stod(cells[4])};
    f.psnr_side = {std::stod(cells[5]), std::stod(cells[6])};
    f.psnr_central = std::stod(cells[7]);
    f.lost_packets = std::stoi(cells[8]);
    f.concealed_ctus = std::stoi(cells[9]);
    f.de_eq1 = std::stod(cells[10]);
    f.de_enum = std::stod(cells[11]);
    reports.back().frames.push_back(f);
  }
  if (reports.empty()) throw std::runtime_error("results.csv: no data rows");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("io-error: cannot create " + out_dir);

  std::ofstream summary(out_dir + "/summary.csv", std::ios::binary);
  if (!summary) throw std::runtime_error("io-error: cannot open summary.csv");
  write_summary_csv(summary, summarize(reports));

  std::ofstream plot(out_dir + "/plot.gp", std::ios::binary);
  if (!plot) throw std::runtime_error("io-error: cannot open plot.gp");
  write_plot_script(plot);
}

}  // namespace mdc
