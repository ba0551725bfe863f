#include "srp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include "toml.hpp"

#include "srp/wav.hpp"

namespace srp {
namespace {

using json = nlohmann::json;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

Vec3 vec3_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput(std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

AngleRange range_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput(std::string(what) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

double snr_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "none") return std::numeric_limits<double>::infinity();
    throw InvalidInput("unrecognized SNR value '" + s + "'");
  }
  return j.get<double>();
}

Window window_from(const std::string& s) {
  if (s == "sqrt_hann" || s == "sqrt-hann") return Window::sqrt_hann;
  if (s == "rectangular") return Window::rectangular;
  throw InvalidInput("unknown window '" + s + "'");
}

NoiseKind noise_from(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "diffuse" || s == "diffuse_isotropic") return NoiseKind::diffuse_isotropic;
  throw InvalidInput("unknown noise kind '" + s + "'");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_double(double v) { return fmt::format("{}", v); }

json summary_json(const ErrorSummary& s) {
  return {{"median", s.median}, {"q1", s.first_quartile}, {"q3", s.third_quartile},
          {"count", s.count}};
}

std::vector<double> load_source(const ExperimentConfig& config, std::size_t scene,
                                std::size_t length) {
  const auto& sc = config.scene;
  const double fs = config.frame.sample_rate;
  if (sc.source_signal == "white") return white_signal(length, derive_seed(config.seed, scene, 1));
  if (sc.source_signal == "speech_like")
    return speech_like_signal(length, fs, derive_seed(config.seed, scene, 1));
  if (sc.source_signal == "wav") {
    auto wav = read_wav(sc.source_wav);
    if (std::abs(wav.sample_rate - fs) > 1e-9)
      throw InvalidInput("WAV sample rate " + format_double(wav.sample_rate) +
                         " Hz differs from the configured " + format_double(fs) + " Hz");
    if (wav.first_channel.size() < length) length = wav.first_channel.size();
    wav.first_channel.resize(length);
    return wav.first_channel;
  }
  throw InvalidInput("unknown source signal '" + sc.source_signal + "'");
}

std::size_t scene_length(const ExperimentConfig& config) {
  return static_cast<std::size_t>(std::llround(config.scene.duration * config.frame.sample_rate));
}

std::size_t rir_length(const ExperimentConfig& config) {
  if (config.scene.rir_length) return config.scene.rir_length;
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.scene.t60 * config.frame.sample_rate)));
}

SceneSpec make_scene(const ExperimentConfig& config, const MicArray& array, const Vec3& source,
                     std::vector<double> signal) {
  SceneSpec spec{RoomSpec::with_t60(config.scene.room, config.scene.t60,
                                    config.scene.reflection_order, config.frame.sample_rate,
                                    config.array.speed_of_sound),
                 array, source, std::move(signal)};
  spec.noise_kind = config.scene.noise;
  spec.noise_directions = config.scene.noise_directions;
  spec.rir_length = rir_length(config);
  return spec;
}

struct SharedSetup {
  MicArray array;
  CandidateGrid grid;
  std::vector<SincTable> tables;  // per n_aux
};

SharedSetup make_setup(const ExperimentConfig& config, bool with_tables) {
  auto array = config.array.build();
  auto grid = config.grid.build(array);
  std::vector<SincTable> tables;
  if (with_tables)
    for (int aux : config.n_aux)
      tables.push_back(precompute_sinc_table(grid, array.pairs(), config.sample_period(), aux));
  return {std::move(array), std::move(grid), std::move(tables)};
}

struct SceneOutput {
  std::vector<FrameRecord> records;
  std::uint64_t conventional_mults = 0;
  std::vector<MultiplyCounter> approx;  // per n_aux
  std::size_t frames = 0;
};

SceneOutput process_scene(const ExperimentConfig& config, const SharedSetup& setup,
                          std::size_t scene, const Vec3& source) {
  const auto& array = setup.array;
  const auto& grid = setup.grid;
  const auto pairs = array.pairs();
  const auto modes = config.modes.map_modes();
  const bool need_conventional = config.modes.conventional || config.modes.approx;

  auto spec = make_scene(config, array, source, load_source(config, scene, scene_length(config)));
  Signals clean;
  try {
    clean = render_clean(spec);
  } catch (const InvalidInput& e) {
    throw InvalidInput(fmt::format("scene {} (source at [{}, {}, {}]): {}", scene, source.x(),
                                   source.y(), source.z(), e.what()));
  }
  const Vec3 true_direction = (array.centroid() - source).normalized();

  SceneOutput out;
  out.approx.resize(config.n_aux.size());
  for (std::size_t s = 0; s < config.snr_db.size(); ++s) {
    spec.snr_db = config.snr_db[s];
    spec.noise_seed = derive_seed(config.seed, scene, 1000 + s);
    const auto mixed = mix_noise(clean, spec);
    const auto frames = stft_analyze(mixed.mixture, config.frame);
    for (const auto& frame : frames) {
      ++out.frames;
      const auto cross = cross_spectrum(frame, pairs, config.weighting);

      std::optional<SrpMap> conventional;
      std::size_t conv_best = 0;
      if (need_conventional) {
        MultiplyCounter counter;
        conventional = srp_conventional(cross, grid, &counter);
        out.conventional_mults += counter.complex_mults;
        conv_best = argmax_candidate(*conventional);
      }
      std::optional<std::size_t> oracle_best;
      if (config.modes.oracle)
        oracle_best = argmax_candidate(srp_oracle(gcc_matrices(frame, config.weighting), array, grid));

      for (std::size_t a = 0; a < config.n_aux.size(); ++a) {
        const int aux = config.n_aux[a];
        std::optional<SrpMap> approx;
        if (config.modes.approx) {
          auto lattice = build_gcc_lattice(cross, pairs, config.sample_period(), aux, &out.approx[a]);
          approx = srp_approx(lattice, setup.tables[a], &out.approx[a]);
        }
        for (auto mode : modes) {
          FrameRecord rec;
          rec.scene = scene;
          rec.source = source;
          rec.snr_db = config.snr_db[s];
          rec.frame = frame.index;
          rec.n_aux = aux;
          rec.mode = mode;
          switch (mode) {
            case SrpMethod::conventional: rec.argmax = conv_best; break;
            case SrpMethod::oracle: rec.argmax = *oracle_best; break;
            case SrpMethod::approximated:
              rec.argmax = argmax_candidate(*approx);
              rec.e_appr_db = approximation_error_db(*conventional, *approx);
              rec.parity_deg = localization_error_deg(grid.entry(conv_best), grid.entry(rec.argmax));
              break;
          }
          rec.e_local_deg = localization_error_deg(true_direction, grid.entry(rec.argmax));
          out.records.push_back(std::move(rec));
        }
      }
    }
  }
  return out;
}

}  // namespace

MicArray ArrayConfig::build() const {
  if (kind == "circular") return MicArray::circular(mics, radius, center, speed_of_sound);
  if (kind == "explicit") return MicArray(positions, speed_of_sound);
  throw InvalidInput("unknown array kind '" + kind + "'");
}

CandidateGrid GridConfig::build(const MicArray& array) const {
  return build_tdoa_table(array, build_spherical_grid(polar, azimuth, step));
}

std::vector<SrpMethod> ModeFlags::map_modes() const {
  std::vector<SrpMethod> out;
  if (conventional) out.push_back(SrpMethod::conventional);
  if (approx) out.push_back(SrpMethod::approximated);
  if (oracle) out.push_back(SrpMethod::oracle);
  return out;
}

void ExperimentConfig::validate() const {
  frame.validate();
  if (!modes.conventional && !modes.approx && !modes.oracle && !modes.benchmark &&
      !modes.complexity_only)
    throw InvalidInput("no mode enabled");
  if (n_aux.empty()) throw InvalidInput("n_aux list is empty");
  for (int a : n_aux)
    if (a < 0) throw InvalidInput("n_aux entries must be nonnegative");
  if (snr_db.empty()) throw InvalidInput("SNR list is empty");
  for (double s : snr_db)
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
      throw InvalidInput("SNR entries must be finite or +inf");
  if (jobs == 0) throw InvalidInput("jobs must be at least 1");
  if (!(array.speed_of_sound > 0.0)) throw InvalidInput("speed of sound must be positive");
  if (!(scene.duration > 0.0)) throw InvalidInput("scene duration must be positive");
  if (scene.source_signal == "wav" && scene.source_wav.empty())
    throw InvalidInput("source_signal = \"wav\" needs source_wav");
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.frame = FrameSpec::make(16000.0, 2048, Window::sqrt_hann);
  if (name == "paper") {
    c.preset = "paper";
    return c;
  }
  if (name == "desk") {
    c.preset = "desk";
    c.n_aux = {0, 1, 2, 4, 8};
    c.snr_db = {0.0};
    c.scene.t60 = 0.3;
    c.scene.reflection_order = 16;
    c.scene.source_count = 20;
    c.scene.duration = 0.53;
    return c;
  }
  throw InvalidInput("unknown preset '" + std::string(name) + "'");
}

void apply_config(ExperimentConfig& c, const json& doc) {
  if (!doc.is_object()) throw InvalidInput("config root must be a table/object");
  if (doc.contains("preset")) c = preset(doc["preset"].get<std::string>());
  if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("jobs")) c.jobs = doc["jobs"].get<std::size_t>();
  if (doc.contains("out")) c.out_dir = doc["out"].get<std::string>();
  if (doc.contains("weighting")) {
    const auto w = doc["weighting"].get<std::string>();
    if (w == "phat") c.weighting = Weighting::phat;
    else if (w == "identity") c.weighting = Weighting::identity;
    else throw InvalidInput("unknown weighting '" + w + "'");
  }
  if (doc.contains("n_aux")) c.n_aux = doc["n_aux"].get<std::vector<int>>();
  if (doc.contains("snr_db")) {
    c.snr_db.clear();
    for (const auto& v : doc["snr_db"]) c.snr_db.push_back(snr_from(v));
  }
  if (doc.contains("modes")) {
    ModeFlags m = c.modes;
    m.conventional = m.approx = m.oracle = false;
    for (const auto& v : doc["modes"]) m = parse_modes(v.get<std::string>(), m);
    c.modes.conventional = m.conventional;
    c.modes.approx = m.approx;
    c.modes.oracle = m.oracle;
  }
  if (doc.contains("benchmark")) {
    const auto& b = doc["benchmark"];
    if (b.is_boolean()) {
      c.modes.benchmark = b.get<bool>();
    } else {
      c.modes.benchmark = b.value("enabled", c.modes.benchmark);
      c.benchmark.frames = b.value("frames", c.benchmark.frames);
      c.benchmark.warmup = b.value("warmup", c.benchmark.warmup);
      c.benchmark.repetitions = b.value("repetitions", c.benchmark.repetitions);
    }
  }
  if (doc.contains("complexity_only")) c.modes.complexity_only = doc["complexity_only"].get<bool>();

  if (doc.contains("array")) {
    const auto& a = doc["array"];
    c.array.kind = a.value("kind", c.array.kind);
    c.array.mics = a.value("mics", c.array.mics);
    c.array.radius = a.value("radius", c.array.radius);
    c.array.speed_of_sound = a.value("speed_of_sound", c.array.speed_of_sound);
    if (a.contains("center")) c.array.center = vec3_from(a["center"], "array.center");
    if (a.contains("positions")) {
      c.array.kind = a.value("kind", std::string("explicit"));
      c.array.positions.clear();
      for (const auto& p : a["positions"]) c.array.positions.push_back(vec3_from(p, "array.positions"));
    }
  }
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    if (g.contains("polar")) c.grid.polar = range_from(g["polar"], "grid.polar");
    if (g.contains("azimuth")) c.grid.azimuth = range_from(g["azimuth"], "grid.azimuth");
    c.grid.step = g.value("step", c.grid.step);
  }
  if (doc.contains("frame")) {
    const auto& f = doc["frame"];
    const double fs = f.value("sample_rate", c.frame.sample_rate);
    const auto len = f.value("frame_length", c.frame.frame_length);
    const auto hop = f.value("hop_length", f.contains("frame_length") ? len / 2 : c.frame.hop_length);
    const auto win = f.contains("window") ? window_from(f["window"].get<std::string>()) : c.frame.window;
    c.frame = FrameSpec::make(fs, len, win, hop);
  }
  if (doc.contains("scene")) {
    const auto& s = doc["scene"];
    auto& sc = c.scene;
    if (s.contains("room")) sc.room = vec3_from(s["room"], "scene.room");
    sc.t60 = s.value("t60", sc.t60);
    sc.reflection_order = s.value("reflection_order", sc.reflection_order);
    sc.rir_length = s.value("rir_length", sc.rir_length);
    sc.source_count = s.value("sources", sc.source_count);
    sc.min_source_distance = s.value("min_distance", sc.min_source_distance);
    sc.wall_margin = s.value("wall_margin", sc.wall_margin);
    sc.duration = s.value("duration", sc.duration);
    sc.source_signal = s.value("source_signal", sc.source_signal);
    if (s.contains("source_wav")) {
      sc.source_wav = s["source_wav"].get<std::string>();
      if (!s.contains("source_signal")) sc.source_signal = "wav";
    }
    if (s.contains("noise")) sc.noise = noise_from(s["noise"].get<std::string>());
    sc.noise_directions = s.value("noise_directions", sc.noise_directions);
    if (s.contains("source_positions")) {
      sc.source_positions.clear();
      for (const auto& p : s["source_positions"])
        sc.source_positions.push_back(vec3_from(p, "scene.source_positions"));
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  if (path.extension() == ".json") {
    try {
      doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
      throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
    }
  } else {
    try {
      auto table = toml::parse(buffer.str(), path.string());
      std::stringstream converted;
      converted << toml::json_formatter{table};
      doc = json::parse(converted.str());
    } catch (const toml::parse_error& e) {
      throw std::runtime_error("invalid TOML in " + path.string() + ": " +
                               std::string(e.description()));
    }
  }
  apply_config(base, doc);
  return base;
}

json config_to_json(const ExperimentConfig& c) {
  json snr = json::array();
  for (double s : c.snr_db) snr.push_back(std::isinf(s) ? json("inf") : json(s));
  json modes = json::array();
  for (auto m : c.modes.map_modes()) modes.push_back(to_string(m));
  json positions = json::array();
  for (const auto& p : c.array.positions) positions.push_back(vec3_json(p));
  json sources = json::array();
  for (const auto& p : c.scene.source_positions) sources.push_back(vec3_json(p));
  return {
      {"preset", c.preset},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"weighting", c.weighting == Weighting::phat ? "phat" : "identity"},
      {"n_aux", c.n_aux},
      {"snr_db", snr},
      {"modes", modes},
      {"benchmark",
       {{"enabled", c.modes.benchmark},
        {"frames", c.benchmark.frames},
        {"warmup", c.benchmark.warmup},
        {"repetitions", c.benchmark.repetitions}}},
      {"array",
       {{"kind", c.array.kind},
        {"mics", c.array.mics},
        {"radius", c.array.radius},
        {"center", vec3_json(c.array.center)},
        {"positions", positions},
        {"speed_of_sound", c.array.speed_of_sound}}},
      {"grid",
       {{"polar", {c.grid.polar.lo, c.grid.polar.hi}},
        {"azimuth", {c.grid.azimuth.lo, c.grid.azimuth.hi}},
        {"step", c.grid.step}}},
      {"frame",
       {{"sample_rate", c.frame.sample_rate},
        {"frame_length", c.frame.frame_length},
        {"hop_length", c.frame.hop_length},
        {"window", c.frame.window == Window::sqrt_hann ? "sqrt_hann" : "rectangular"}}},
      {"scene",
       {{"room", vec3_json(c.scene.room)},
        {"t60", c.scene.t60},
        {"reflection_order", c.scene.reflection_order},
        {"rir_length", c.scene.rir_length},
        {"sources", c.scene.source_count},
        {"source_positions", sources},
        {"min_distance", c.scene.min_source_distance},
        {"wall_margin", c.scene.wall_margin},
        {"duration", c.scene.duration},
        {"source_signal", c.scene.source_signal},
        {"source_wav", c.scene.source_wav},
        {"noise", c.scene.noise == NoiseKind::white ? "white" : "diffuse"},
        {"noise_directions", c.scene.noise_directions}}},
  };
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidInput("not an integer: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    if (item == "inf" || item == "+inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidInput("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

ModeFlags parse_modes(std::string_view text, ModeFlags base) {
  for (const auto& item : split_list(text)) {
    if (item == "conventional") base.conventional = true;
    else if (item == "approx" || item == "approximated") base.approx = true;
    else if (item == "oracle") base.oracle = true;
    else throw InvalidInput("unknown mode '" + item + "'");
  }
  return base;
}

std::vector<ComplexityReport> complexity_reports(const ExperimentConfig& config) {
  const auto array = config.array.build();
  const auto grid = build_spherical_grid(config.grid.polar, config.grid.azimuth, config.grid.step);
  std::vector<ComplexityReport> out;
  for (int aux : config.n_aux) {
    const auto counts = lattice_counts(array.pairs(), config.sample_period(), aux);
    out.push_back(complexity_report(grid.size(), array.pair_count(), config.frame.bins(), counts, aux));
  }
  return out;
}

std::vector<Vec3> source_positions(const ExperimentConfig& config) {
  const auto& sc = config.scene;
  if (!sc.source_positions.empty()) return sc.source_positions;
  const auto array = config.array.build();
  const Vec3 center = array.centroid();
  std::mt19937_64 rng(derive_seed(config.seed, 0x50u));
  std::vector<Vec3> out;
  std::size_t attempts = 0;
  while (out.size() < sc.source_count) {
    if (++attempts > 1000000)
      throw InvalidInput("cannot place sources: room too small for the distance constraint");
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      std::uniform_real_distribution<double> u(sc.wall_margin, sc.room[a] - sc.wall_margin);
      p[a] = u(rng);
    }
    // the candidate grid covers directions below the array plane
    if ((p - center).norm() < sc.min_source_distance || p.z() > center.z()) continue;
    out.push_back(p);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.complexity = complexity_reports(config);
  const bool any_map = !config.modes.map_modes().empty();
  if (config.modes.complexity_only || !any_map) {
    if (config.modes.benchmark && !config.modes.complexity_only)
      result.benchmark = run_benchmark(config);
    return result;
  }

  const auto setup = make_setup(config, config.modes.approx);
  const auto sources = source_positions(config);
  spdlog::info("running {} scenes x {} SNRs, J = {}, P = {}, K = {}", sources.size(),
               config.snr_db.size(), setup.grid.size(), setup.array.pair_count(),
               config.frame.bins());

  std::vector<SceneOutput> outputs(sources.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= sources.size()) return;
      try {
        outputs[s] = process_scene(config, setup, s, sources[s]);
        spdlog::debug("scene {} done ({} frames)", s, outputs[s].frames);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = sources.size();
      }
    }
  };
  const std::size_t workers = std::min(config.jobs, std::max<std::size_t>(1, sources.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::uint64_t conv_total = 0;
  std::vector<MultiplyCounter> approx_total(config.n_aux.size());
  for (auto& out : outputs) {
    result.frames_processed += out.frames;
    conv_total += out.conventional_mults;
    for (std::size_t a = 0; a < approx_total.size(); ++a) approx_total[a] += out.approx[a];
    std::move(out.records.begin(), out.records.end(), std::back_inserter(result.records));
  }
  if (result.frames_processed > 0) {
    for (std::size_t a = 0; a < result.complexity.size(); ++a) {
      auto& r = result.complexity[a];
      r.measured = true;
      r.measured_mults_conventional = conv_total / result.frames_processed;
      r.measured_mults_approx_sampling = approx_total[a].complex_mults / result.frames_processed;
      r.measured_mults_approx_interpolation = approx_total[a].real_mults / result.frames_processed;
    }
  }
  result.summaries = summarize_records(result.records);
  if (config.modes.benchmark) result.benchmark = run_benchmark(config);
  return result;
}

std::vector<BenchmarkEntry> run_benchmark(const ExperimentConfig& config) {
  using clock = std::chrono::steady_clock;
  config.validate();
  const auto array = config.array.build();
  const auto grid = config.grid.build(array);
  const auto pairs = array.pairs();
  const auto sources = source_positions(config);
  if (sources.empty()) throw InvalidInput("benchmark needs at least one source position");

  auto spec = make_scene(config, array, sources.front(),
                         load_source(config, 0, scene_length(config)));
  spec.snr_db = config.snr_db.front();
  spec.noise_seed = derive_seed(config.seed, 0, 1000);
  auto frames = stft_analyze(render_scene(spec).mixture, config.frame);
  if (frames.size() > config.benchmark.frames) frames.resize(std::max<std::size_t>(1, config.benchmark.frames));

  auto seconds_since = [](clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  const std::size_t reps = std::max<std::size_t>(1, config.benchmark.repetitions);
  double sink = 0.0;

  for (std::size_t w = 0; w < config.benchmark.warmup; ++w)
    sink += srp_conventional(cross_spectrum(frames.front(), pairs, config.weighting), grid).values[0];
  double conventional = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    for (const auto& f : frames)
      sink += srp_conventional(cross_spectrum(f, pairs, config.weighting), grid).values[0];
    conventional = std::min(conventional, seconds_since(t0) / static_cast<double>(frames.size()));
  }

  std::vector<BenchmarkEntry> out;
  const auto reports = complexity_reports(config);
  for (std::size_t a = 0; a < config.n_aux.size(); ++a) {
    const int aux = config.n_aux[a];
    const auto t_table = clock::now();
    const auto table = precompute_sinc_table(grid, pairs, config.sample_period(), aux);
    const double table_seconds = seconds_since(t_table);
    auto approx_frame = [&](const SpectralFrame& f) {
      const auto cross = cross_spectrum(f, pairs, config.weighting);
      return srp_approx(build_gcc_lattice(cross, pairs, config.sample_period(), aux), table);
    };
    for (std::size_t w = 0; w < config.benchmark.warmup; ++w) sink += approx_frame(frames.front()).values[0];
    double approx = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < reps; ++r) {
      const auto t0 = clock::now();
      for (const auto& f : frames) sink += approx_frame(f).values[0];
      approx = std::min(approx, seconds_since(t0) / static_cast<double>(frames.size()));
    }
    BenchmarkEntry e;
    e.n_aux = aux;
    e.frames = frames.size();
    e.conventional_seconds_per_frame = conventional;
    e.approx_seconds_per_frame = approx;
    e.table_precompute_seconds = table_seconds;
    e.measured_speedup = conventional / approx;
    e.theoretical_speedup = 1.0 / reports[a].r;
    out.push_back(e);
    spdlog::info("benchmark n_aux={}: conventional {:.4f} s/frame, approx {:.6f} s/frame, "
                 "speedup {:.1f} (theory {:.1f})",
                 aux, conventional, approx, e.measured_speedup, e.theoretical_speedup);
  }
  spdlog::debug("benchmark checksum {}", sink);
  return out;
}

std::vector<CellSummary> summarize_records(const std::vector<FrameRecord>& records) {
  using Key = std::tuple<double, int, int>;
  struct Acc {
    std::vector<double> local, appr, parity;
  };
  std::map<Key, Acc> cells;
  std::vector<Key> order;
  for (const auto& r : records) {
    const Key key{r.snr_db, r.n_aux, static_cast<int>(r.mode)};
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.local.push_back(r.e_local_deg);
    if (r.e_appr_db) it->second.appr.push_back(*r.e_appr_db);
    if (r.parity_deg) it->second.parity.push_back(*r.parity_deg);
  }
  std::vector<CellSummary> out;
  for (const auto& key : order) {
    const auto& acc = cells.at(key);
    CellSummary c;
    c.snr_db = std::get<0>(key);
    c.n_aux = std::get<1>(key);
    c.mode = static_cast<SrpMethod>(std::get<2>(key));
    c.e_local = summarize(acc.local);
    if (!acc.appr.empty()) c.e_appr = summarize(acc.appr);
    if (!acc.parity.empty()) c.parity = summarize(acc.parity);
    out.push_back(c);
  }
  return out;
}

json complexity_to_json(const ComplexityReport& r) {
  json j = {{"J", r.candidates}, {"P", r.pairs},         {"K", r.bins},
            {"n_aux", r.n_aux},  {"N", r.average_samples}, {"total_samples", r.total_samples},
            {"C_conv", r.c_conv}, {"C_samp", r.c_samp},   {"C_int", r.c_int},
            {"R_samp", r.r_samp}, {"R_int", r.r_int},     {"R", r.r}};
  if (r.measured) {
    j["measured_mults_conventional"] = r.measured_mults_conventional;
    j["measured_mults_approx_sampling"] = r.measured_mults_approx_sampling;
    j["measured_mults_approx_interpolation"] = r.measured_mults_approx_interpolation;
  }
  return j;
}

std::string records_to_csv(const std::vector<FrameRecord>& records) {
  std::string out =
      "scene,source_x,source_y,source_z,snr_db,frame,n_aux,mode,argmax,e_local_deg,e_appr_db,"
      "parity_deg\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.scene, format_double(r.source.x()),
                       format_double(r.source.y()), format_double(r.source.z()),
                       format_double(r.snr_db), r.frame, r.n_aux, to_string(r.mode), r.argmax,
                       format_double(r.e_local_deg),
                       r.e_appr_db ? format_double(*r.e_appr_db) : "",
                       r.parity_deg ? format_double(*r.parity_deg) : "");
  }
  return out;
}

void write_results(const ExperimentResult& result, const ExperimentConfig& config,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << text;
  };

  json complexity = {{"seed", config.seed}, {"preset", config.preset}, {"reports", json::array()}};
  for (const auto& r : result.complexity) complexity["reports"].push_back(complexity_to_json(r));
  write("complexity.json", complexity.dump(2) + "\n");

  if (!config.modes.complexity_only && !config.modes.map_modes().empty()) {
    write("frames.csv", records_to_csv(result.records));
    json cells = json::array();
    for (const auto& c : result.summaries) {
      json cell = {{"snr_db", std::isinf(c.snr_db) ? json("inf") : json(c.snr_db)},
                   {"n_aux", c.n_aux},
                   {"mode", to_string(c.mode)},
                   {"e_local_deg", summary_json(c.e_local)}};
      if (c.e_appr) cell["e_appr_db"] = summary_json(*c.e_appr);
      if (c.parity) cell["parity_deg"] = summary_json(*c.parity);
      cells.push_back(cell);
    }
    // e_appr pooled over SNRs and frames, per n_aux
    json pooled = json::array();
    for (int aux : config.n_aux) {
      std::vector<double> values;
      for (const auto& r : result.records)
        if (r.n_aux == aux && r.e_appr_db) values.push_back(*r.e_appr_db);
      if (!values.empty())
        pooled.push_back({{"n_aux", aux}, {"e_appr_db", summary_json(summarize(values))}});
    }
    json summary = {{"seed", config.seed},
                    {"preset", config.preset},
                    {"frames_processed", result.frames_processed},
                    {"config", config_to_json(config)},
                    {"cells", cells},
                    {"pooled_e_appr", pooled}};
    write("summary.json", summary.dump(2) + "\n");
  }

  if (!result.benchmark.empty()) {
    json bench = {{"seed", config.seed}, {"entries", json::array()}};
    for (const auto& e : result.benchmark)
      bench["entries"].push_back({{"n_aux", e.n_aux},
                                  {"frames", e.frames},
                                  {"conventional_seconds_per_frame", e.conventional_seconds_per_frame},
                                  {"approx_seconds_per_frame", e.approx_seconds_per_frame},
                                  {"table_precompute_seconds", e.table_precompute_seconds},
                                  {"measured_speedup", e.measured_speedup},
                                  {"theoretical_speedup", e.theoretical_speedup}});
    write("benchmark.json", bench.dump(2) + "\n");
  }
}

}  // namespace srp
