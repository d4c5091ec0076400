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

// Command-line harness: encode / simulate / sweep / report.

#include "mdc/experiment.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double rate = 0.0;
  bool rate_set = false;
  std::vector<double> pe;
  int trials = 0;
  std::string baseline;
  bool dump_frames = false;
  bool dump_traces = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--rate", args.rate, "frame rate budget R_t in bits (0 = auto)")
      ->each([&](const std::string&) { args.rate_set = true; });
  cmd->add_option("--pe", args.pe, "packet loss rates")->delimiter(',');
  cmd->add_option("--trials", args.trials, "trials per loss rate");
  cmd->add_option("--baseline", args.baseline,
                  "mdc | single-description-duplicated | "
                  "single-description-one-channel");
  cmd->add_flag("--dump-frames", args.dump_frames,
                "write decoded frames (PGM + raw) under <out>/frames");
  cmd->add_flag("--dump-traces", args.dump_traces,
                "write per-trial channel trace CSVs under <out>/traces");
}

mdc::ExperimentConfig build_config(const CommonArgs& args) {
  mdc::ExperimentConfig config;
  if (!args.config_path.empty())
    config = mdc::ExperimentConfig::from_json_file(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (args.rate_set) config.rate_target = args.rate;
  if (!args.pe.empty()) config.pe_list = args.pe;
  if (args.trials > 0) config.trials = args.trials;
  if (!args.baseline.empty()) {
    mdc::ExperimentConfig parsed = mdc::ExperimentConfig::from_json_text(
        std::string("{\"baseline\": \"") + args.baseline + "\"}");
    config.baseline = parsed.baseline;
  }
  return config;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  if (!out) throw std::runtime_error("io-error: cannot open " + dir + "/" + name);
  return out;
}

/// Clean-channel encode of the configured source: streams, reconstructions,
/// regression table and allocation report. Shared by `encode` and `sweep`.
int run_encode(const CommonArgs& args, bool streams_and_recon) {
  const mdc::ExperimentConfig config = build_config(args);
  const double pe_alloc = config.pe_list.empty() ? 0.1 : config.pe_list.front();

  const std::vector<mdc::FramePlane> frames =
      mdc::load_source(config.source, config.ctu_size);
  const mdc::CtuGrid grid = mdc::CtuGrid::for_plane(frames[0], config.ctu_size);
  const mdc::RoleAssignment roles =
      mdc::assign_roles(grid, config.role_pattern);
  const int ctus_per_nalu =
      config.ctus_per_nalu >= 1 ? config.ctus_per_nalu : grid.cols;

  std::ofstream rd_csv = open_out(args.out_dir, "rd_models.csv");
  mdc::write_rd_csv_header(rd_csv);
  std::ofstream alloc_csv;
  std::ofstream stream_file[2];
  if (streams_and_recon) {
    alloc_csv = open_out(args.out_dir, "allocation.csv");
    mdc::write_allocation_csv_header(alloc_csv);
    stream_file[0] = open_out(args.out_dir, "stream_desc1.bin");
    stream_file[1] = open_out(args.out_dir, "stream_desc2.bin");
  }

  const mdc::IdrSchedule schedule =
      mdc::idr_period({pe_alloc}, config.idr_max_period);
  mdc::FramePlane central;
  std::uint32_t seq[2] = {0, 0};
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const bool idr = f % static_cast<std::size_t>(schedule.period) == 0;
    const mdc::EncodedFrame enc =
        mdc::encode_frame(frames[f], f == 0 ? nullptr : &central, idr, pe_alloc,
                          config, grid, roles);
    mdc::write_rd_csv(rd_csv, static_cast<int>(f), enc.models);
    if (streams_and_recon) {
      mdc::write_allocation_csv(alloc_csv, static_cast<int>(f), enc.alloc,
                                enc.models);
      for (int j = 0; j < 2; ++j) {
        const std::vector<mdc::Packet> packets = mdc::packetize(
            enc.coded[j], static_cast<int>(f), j,
            idr ? mdc::NaluType::Idr : mdc::NaluType::Inter, ctus_per_nalu,
            seq[j]);
        seq[j] += static_cast<std::uint32_t>(packets.size());
        for (const mdc::Packet& packet : packets)
          stream_file[j].write(reinterpret_cast<const char*>(packet.wire.data()),
                               static_cast<std::streamsize>(packet.wire.size()));
      }
      char name[64];
      std::snprintf(name, sizeof(name), "central_%03zu.pgm", f);
      mdc::write_pgm(enc.central, args.out_dir + "/" + name);
    }
    central = enc.central;
  }
  std::cout << "wrote " << args.out_dir << "/rd_models.csv ("
            << frames.size() << " frames, " << grid.count() << " CTUs)\n";
  return 0;
}

int run_simulate(const CommonArgs& args) {
  mdc::ExperimentConfig config = build_config(args);
  if (args.dump_frames) config.dump_frames_dir = args.out_dir + "/frames";
  const std::vector<mdc::TrialReport> reports = mdc::run_pipeline(config);
  mdc::emit_reports(reports, args.out_dir);

  std::ofstream log = open_out(args.out_dir, "error_log.csv");
  std::vector<mdc::DecodeError> merged;
  for (const mdc::TrialReport& report : reports)
    merged.insert(merged.end(), report.decode_log.begin(),
                  report.decode_log.end());
  mdc::write_error_log_csv(log, merged);

  if (args.dump_traces)
    for (const mdc::TrialReport& report : reports) {
      char name[64];
      std::snprintf(name, sizeof(name), "pe%g_trial%d.csv", report.pe,
                    report.trial);
      std::ofstream trace = open_out(args.out_dir + "/traces", name);
      mdc::write_trace_csv(trace, report.traces);
    }

  std::cout << "wrote " << args.out_dir << "/results.csv ("
            << reports.size() << " trials)\n";
  for (const mdc::TrialReport& report : reports)
    std::cout << "  pe=" << report.pe << " trial=" << report.trial
              << " mean central PSNR=" << report.mean_psnr_central()
              << " dB, rate=" << report.mean_rate_total() << " bits/frame\n";
  return 0;
}

int run_report(const CommonArgs& args) {
  mdc::summarize_results_file(args.out_dir + "/results.csv", args.out_dir);
  std::cout << "wrote " << args.out_dir << "/summary.csv and plot.gp\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-description video coding laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* encode = app.add_subcommand(
      "encode", "encode the source and dump streams + reports");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo loss simulation; writes results.csv");
  CLI::App* sweep =
      app.add_subcommand("sweep", "per-CTU QP sweep and regression table");
  CLI::App* report =
      app.add_subcommand("report", "re-aggregate an existing results.csv");
  for (CLI::App* cmd : {encode, simulate, sweep, report}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(encode)) return run_encode(args, true);
    if (app.got_subcommand(sweep)) return run_encode(args, false);
    if (app.got_subcommand(simulate)) return run_simulate(args);
    if (app.got_subcommand(report)) return run_report(args);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
