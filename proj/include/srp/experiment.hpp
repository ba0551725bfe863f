// End-to-end experiment driver: configuration, presets, the simulation run
// matrix, result files and the wall-clock benchmark.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "srp/acoustic_sim.hpp"
#include "srp/geometry.hpp"
#include "srp/metrics.hpp"
#include "srp/spectral.hpp"
#include "srp/srp.hpp"

namespace srp {

struct ArrayConfig {
  std::string kind = "circular";  // "circular" | "explicit"
  std::size_t mics = 6;
  double radius = 0.1;
  Vec3 center = Vec3(2.9, 3.4, 3.3);
  std::vector<Vec3> positions;  // used when kind == "explicit"
  double speed_of_sound = 340.0;

  MicArray build() const;
};

struct GridConfig {
  AngleRange polar{90.0, 180.0};
  AngleRange azimuth{0.0, 358.0};
  double step = 2.0;

  /// Spherical grid with the TDOA table for `array`.
  CandidateGrid build(const MicArray& array) const;
};

struct SceneConfig {
  Vec3 room = Vec3(6.0, 7.0, 3.5);
  double t60 = 0.6;
  int reflection_order = 30;
  std::size_t rir_length = 0;  // 0: t60 * sample_rate
  std::size_t source_count = 256;
  std::vector<Vec3> source_positions;  // overrides source_count when set
  double min_source_distance = 1.0;
  double wall_margin = 0.5;
  double duration = 2.11;                    // seconds per scene
  std::string source_signal = "speech_like";  // "speech_like" | "white" | "wav"
  std::string source_wav;
  NoiseKind noise = NoiseKind::diffuse_isotropic;
  std::size_t noise_directions = 64;
};

struct ModeFlags {
  bool conventional = true;
  bool approx = true;
  bool oracle = false;
  bool benchmark = false;
  bool complexity_only = false;

  std::vector<SrpMethod> map_modes() const;
};

struct BenchmarkConfig {
  std::size_t frames = 4;
  std::size_t warmup = 1;
  std::size_t repetitions = 3;
};

struct ExperimentConfig {
  std::string preset = "paper";
  ArrayConfig array;
  GridConfig grid;
  FrameSpec frame;
  Weighting weighting = Weighting::phat;
  std::vector<int> n_aux{0, 1, 2, 3, 4};
  std::vector<double> snr_db{-3.0, 0.0, 3.0, 6.0};
  SceneConfig scene;
  ModeFlags modes;
  BenchmarkConfig benchmark;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out_dir = "srp_out";

  void validate() const;
  double sample_period() const { return 1.0 / frame.sample_rate; }
};

/// "paper": the full-size protocol. "desk": 20 sources, T60 300 ms, 0.53 s
/// of audio per scene, SNR 0 dB.
ExperimentConfig preset(std::string_view name);

/// Applies the keys of a JSON document on top of `config` (a "preset" key
/// first resets the base).
void apply_config(ExperimentConfig& config, const nlohmann::json& doc);

/// Loads a .toml or .json file on top of `base`; TOML is converted to the
/// JSON schema.
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = preset("paper"));

nlohmann::json config_to_json(const ExperimentConfig& config);

std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);
ModeFlags parse_modes(std::string_view text, ModeFlags base);

struct FrameRecord {
  std::size_t scene = 0;
  Vec3 source = Vec3::Zero();
  double snr_db = 0.0;
  std::size_t frame = 0;
  int n_aux = 0;
  SrpMethod mode = SrpMethod::conventional;
  std::size_t argmax = 0;
  double e_local_deg = 0.0;
  std::optional<double> e_appr_db;   // approx rows
  std::optional<double> parity_deg;  // approx rows: angle to the conventional estimate
};

struct CellSummary {
  double snr_db = 0.0;
  int n_aux = 0;
  SrpMethod mode = SrpMethod::conventional;
  ErrorSummary e_local;
  std::optional<ErrorSummary> e_appr;
  std::optional<ErrorSummary> parity;
};

struct BenchmarkEntry {
  int n_aux = 0;
  std::size_t frames = 0;
  double conventional_seconds_per_frame = 0.0;
  double approx_seconds_per_frame = 0.0;
  double table_precompute_seconds = 0.0;
  double measured_speedup = 0.0;
  double theoretical_speedup = 0.0;  // 1 / R
};

struct ExperimentResult {
  std::vector<FrameRecord> records;
  std::vector<CellSummary> summaries;
  std::vector<ComplexityReport> complexity;  // one per n_aux
  std::vector<BenchmarkEntry> benchmark;
  std::size_t frames_processed = 0;  // frames x SNRs
};

/// Closed-form complexity for every configured n_aux.
std::vector<ComplexityReport> complexity_reports(const ExperimentConfig& config);

/// Source positions for the run (explicit or drawn from the seed).
std::vector<Vec3> source_positions(const ExperimentConfig& config);

/// Runs the scene x SNR x frame matrix. Records are ordered by scene, SNR,
/// frame, n_aux, mode and do not depend on config.jobs.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<BenchmarkEntry> run_benchmark(const ExperimentConfig& config);

std::vector<CellSummary> summarize_records(const std::vector<FrameRecord>& records);

/// frames.csv (long format), summary.json, complexity.json and, when present,
/// benchmark.json under `dir`.
void write_results(const ExperimentResult& result, const ExperimentConfig& config,
                   const std::filesystem::path& dir);

nlohmann::json complexity_to_json(const ComplexityReport& report);
std::string records_to_csv(const std::vector<FrameRecord>& records);

}  // namespace srp
