#include "cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <optional>
#include <sstream>

#include "kinebeat/alignment.h"
#include "kinebeat/audio.h"
#include "kinebeat/beats.h"
#include "kinebeat/error.h"
#include "kinebeat/inversion.h"
#include "kinebeat/pose.h"
#include "kinebeat/rhythm.h"

namespace kinebeat::cli {

namespace fs = std::filesystem;
using nlohmann::json;
namespace inv = kinebeat::inversion;

namespace {

constexpr std::uint64_t kDefaultSeed = 7;
constexpr const char* kDataFormat = "kinebeat-toy-data";
constexpr int kDataVersion = 1;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
  if (!text.empty() && text.back() != '\n') os << '\n';
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": malformed JSON: " + e.what());
  }
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw InputError(source + " is not an unsigned 64-bit integer: \"" + text + "\"");
  }
  return v;
}

struct Globals {
  std::optional<std::string> seed;
  std::string output;
  std::string format = "json";

  // --seed, then KINEBEAT_SEED, then the documented default.
  std::uint64_t resolve_seed() const {
    if (seed) return parse_seed(*seed, "--seed");
    if (const char* env = std::getenv("KINEBEAT_SEED"); env && *env) return parse_seed(env, "KINEBEAT_SEED");
    return kDefaultSeed;
  }

  void require_json(const std::string& command) const {
    if (format != "json") throw InputError(command + " only writes JSON");
  }
};

// Writes to --output when given, otherwise to stdout.
void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.output.empty()) {
    out << text << '\n';
  } else {
    write_text(g.output, text);
  }
}

// --- extract-rhythm -------------------------------------------------------

struct ExtractArgs {
  std::string poses;
  RhythmConfig config;
  std::string clip = "5.12";
};

json rhythm_doc(const RhythmSequence& r) { return json::parse(serialize_rhythm_json(r)); }

int cmd_extract_rhythm(const ExtractArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("extract-rhythm");
  const PoseSequence seq = parse_pose_json(read_text(a.poses));
  const std::string stem = fs::path(a.poses).stem().string();

  if (a.clip == "none") {
    const std::string text = serialize_rhythm_json(extract_rhythm(seq, a.config));
    emit(g, out, text);
    return kExitOk;
  }
  double seconds = 0.0;
  try {
    std::size_t used = 0;
    seconds = std::stod(a.clip, &used);
    if (used != a.clip.size()) throw std::invalid_argument(a.clip);
  } catch (const std::exception&) {
    throw InputError("--clip must be a duration in seconds or \"none\"");
  }
  const Segmentation seg = segment_clips(seq, ClipSpec{seconds});

  json doc = {{"source", a.poses},
              {"frames_per_clip", seg.frames_per_clip},
              {"dropped_frames", seg.dropped_frames}};
  if (g.output.empty()) {
    json clips = json::array();
    for (const auto& clip : seg.clips) clips.push_back(rhythm_doc(extract_rhythm(clip, a.config)));
    doc["clips"] = std::move(clips);
  } else {
    // --output names a directory holding one rhythm file per clip
    json files = json::array();
    for (std::size_t i = 0; i < seg.clips.size(); ++i) {
      std::ostringstream name;
      name << stem << "_clip" << std::setw(3) << std::setfill('0') << i << ".json";
      const fs::path path = fs::path(g.output) / name.str();
      write_text(path, serialize_rhythm_json(extract_rhythm(seg.clips[i], a.config)));
      files.push_back(path.string());
    }
    doc["files"] = std::move(files);
  }
  out << doc.dump() << '\n';
  return kExitOk;
}

// --- detect-beats / tempo -------------------------------------------------

struct DetectArgs {
  std::string audio;
  BeatPickConfig config;
};

int cmd_detect_beats(const DetectArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("detect-beats");
  const AudioClip clip = read_wav_file(a.audio);
  emit(g, out, serialize_beats_json(pick_beats(onset_envelope(clip), a.config)));
  return kExitOk;
}

struct TempoArgs {
  std::string audio;
  TempoRange range;
};

int cmd_tempo(const TempoArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("tempo");
  const AudioClip clip = read_wav_file(a.audio);
  const TempoEstimate t = estimate_tempo(onset_envelope(clip), a.range);
  const json doc = {{"bpm", t.bpm}, {"bpm_min", a.range.bpm_min}, {"bpm_max", a.range.bpm_max}};
  emit(g, out, doc.dump());
  return kExitOk;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string gen;
  std::string ref;
  double tolerance = kDefaultTolerance;
  bool phase_align = false;
  PhaseSearch search;
  std::string tempo_gen;
  std::string tempo_ref;
};

// Accepts either a beats file or a rhythm file.
BeatList load_beats(const fs::path& path) {
  const json doc = parse_json_file(path);
  const std::string text = doc.dump();
  try {
    if (doc.is_object() && doc.contains("bits")) return beats_from_rhythm(parse_rhythm_json(text));
    return parse_beats_json(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

TempoEstimate load_tempo(const fs::path& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_object() || !doc.contains("bpm") || !doc["bpm"].is_number()) {
    throw InputError(path.string() + ": tempo file needs a numeric \"bpm\"");
  }
  const double bpm = doc["bpm"].get<double>();
  if (!(bpm > 0.0) || !std::isfinite(bpm)) throw InputError(path.string() + ": bpm must be positive");
  return TempoEstimate{bpm};
}

// Single files pair with each other; directories pair their *.json files
// by name, in sorted order.
std::vector<std::pair<fs::path, fs::path>> pair_inputs(const fs::path& gen, const fs::path& ref,
                                                      const std::string& what) {
  const bool gdir = fs::is_directory(gen);
  const bool rdir = fs::is_directory(ref);
  if (gdir != rdir) throw InputError(what + ": both inputs must be files or both directories");
  if (!gdir) return {{gen, ref}};
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(gen)) {
    if (e.is_regular_file() && e.path().extension() == ".json") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw InputError(what + ": no .json files in " + gen.string());
  std::vector<std::pair<fs::path, fs::path>> pairs;
  for (const auto& n : names) {
    if (!fs::exists(ref / n)) throw InputError(what + ": " + (ref / n).string() + " is missing");
    pairs.emplace_back(gen / n, ref / n);
  }
  return pairs;
}

json report_doc(const AlignmentReport& r) { return json::parse(report_to_json(r)); }

json summary_doc(const AggregateSummary& s) {
  return {{"clips", s.clips},         {"b_g", s.b_g},
          {"b_t", s.b_t},             {"b_a", s.b_a},
          {"degenerate_clips", s.degenerate_clips},
          {"mean_bcs", s.mean_bcs},   {"mean_bhs", s.mean_bhs},
          {"mean_f1", s.mean_f1},     {"f1_of_means", s.f1_of_means},
          {"pooled_bcs", s.pooled_bcs}, {"pooled_bhs", s.pooled_bhs},
          {"pooled_f1", s.pooled_f1}};
}

int cmd_evaluate(const EvaluateArgs& a, const Globals& g, std::ostream& out) {
  if (g.format != "json" && g.format != "csv") throw InputError("--format must be json or csv");
  if (a.tempo_gen.empty() != a.tempo_ref.empty()) {
    throw InputError("--tempo-gen and --tempo-ref must be given together");
  }
  const auto pairs = pair_inputs(a.gen, a.ref, "evaluate");
  const bool batch = fs::is_directory(a.gen);

  std::vector<std::string> names;
  std::vector<AlignmentReport> reports;
  json clips = json::array();
  for (const auto& [gp, rp] : pairs) {
    const BeatList gen = load_beats(gp);
    const BeatList ref = load_beats(rp);
    json entry = {{"name", gp.filename().string()}};
    AlignmentReport report = match_beats(gen, ref, a.tolerance);
    entry["report"] = report_doc(report);
    if (a.phase_align) {
      PhaseSearch search = a.search;
      search.tolerance = a.tolerance;
      PhaseAlignment pa = phase_align(gen, ref, search);
      entry["phase_alignment"] = {{"offset", pa.offset}, {"report", report_doc(pa.report)}};
      report = std::move(pa.report);
    }
    names.push_back(gp.filename().string());
    reports.push_back(std::move(report));
    clips.push_back(std::move(entry));
  }

  std::optional<double> td;
  if (!a.tempo_gen.empty()) {
    std::vector<std::pair<TempoEstimate, TempoEstimate>> tempos;
    for (const auto& [gp, rp] : pair_inputs(a.tempo_gen, a.tempo_ref, "tempo")) {
      tempos.emplace_back(load_tempo(gp), load_tempo(rp));
    }
    td = mean_tempo_difference(tempos);
  }

  if (g.format == "csv") {
    emit(g, out, reports_to_csv(names, reports));
    return kExitOk;
  }
  json doc;
  if (batch) {
    doc = {{"clips", std::move(clips)}, {"summary", summary_doc(aggregate_reports(reports))}};
  } else {
    doc = std::move(clips[0]);
    doc.erase("name");
  }
  doc["tolerance"] = a.tolerance;
  if (td) doc["tempo_difference_bpm"] = *td;
  emit(g, out, doc.dump());
  return kExitOk;
}

// --- toy inversion --------------------------------------------------------

struct ToyDataset {
  inv::LossMode mode = inv::LossMode::kRegression;
  inv::Dims dims;
  std::uint64_t frozen_seed = 1;
  std::vector<inv::Sample> samples;
};

json dims_doc(const inv::Dims& d) {
  return {{"embed", d.embed},   {"hidden", d.hidden},   {"attn", d.attn},
          {"frames", d.frames}, {"genres", d.genres},   {"gen_out", d.gen_out},
          {"audio_vocab", d.audio_vocab}};
}

inv::Dims dims_from_doc(const json& j) {
  inv::Dims d;
  d.embed = j.at("embed").get<std::size_t>();
  d.hidden = j.at("hidden").get<std::size_t>();
  d.attn = j.at("attn").get<std::size_t>();
  d.frames = j.at("frames").get<std::size_t>();
  d.genres = j.at("genres").get<std::size_t>();
  d.gen_out = j.at("gen_out").get<std::size_t>();
  d.audio_vocab = j.at("audio_vocab").get<std::size_t>();
  return d;
}

std::size_t genre_index(const Eigen::VectorXd& g) {
  Eigen::Index i = 0;
  g.maxCoeff(&i);
  return static_cast<std::size_t>(i);
}

ToyDataset read_dataset(const fs::path& dir) {
  const json m = parse_json_file(dir / "manifest.json");
  ToyDataset ds;
  try {
    if (m.at("format").get<std::string>() != kDataFormat || m.at("version").get<int>() != kDataVersion) {
      throw InputError("unsupported dataset format");
    }
    ds.mode = inv::parse_mode(m.at("mode").get<std::string>());
    ds.dims = dims_from_doc(m.at("dims"));
    ds.frozen_seed = m.at("frozen_seed").get<std::uint64_t>();
    for (const auto& s : m.at("samples")) {
      inv::Sample sample;
      const RhythmSequence r = parse_rhythm_json(read_text(dir / s.at("rhythm").get<std::string>()));
      sample.rhythm = Eigen::VectorXd(static_cast<Eigen::Index>(r.bits.size()));
      for (std::size_t t = 0; t < r.bits.size(); ++t) sample.rhythm(static_cast<Eigen::Index>(t)) = r.bits[t];
      const auto genre = s.at("genre").get<std::size_t>();
      if (genre >= ds.dims.genres) throw InputError("genre index out of range");
      sample.genre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.dims.genres));
      sample.genre(static_cast<Eigen::Index>(genre)) = 1.0;
      if (ds.mode == inv::LossMode::kRegression) {
        const auto v = s.at("target").get<std::vector<double>>();
        sample.target.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      } else {
        sample.target.tokens = s.at("tokens").get<std::vector<std::size_t>>();
      }
      ds.samples.push_back(std::move(sample));
    }
  } catch (const json::exception& e) {
    throw InputError((dir / "manifest.json").string() + ": " + e.what());
  }
  if (ds.samples.empty()) throw InputError("dataset has no samples");
  return ds;
}

struct MakeDataArgs {
  std::string variant = "mlp";
  std::string mode = "regression";
  std::size_t samples = 16;
  std::size_t frames = inv::Dims{}.frames;
  std::uint64_t frozen_seed = 1;
  std::uint64_t teacher_seed = 1234;  // must differ from the student seed
};

int cmd_make_toy_data(const MakeDataArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("make-toy-data");
  if (g.output.empty()) throw InputError("make-toy-data needs --output DIR");
  if (a.samples == 0) throw InputError("--samples must be positive");
  inv::Dims dims;
  dims.frames = a.frames;
  const auto variant = inv::parse_variant(a.variant);
  const auto mode = inv::parse_mode(a.mode);
  const std::uint64_t teacher_seed = a.teacher_seed;
  const auto backbone = inv::make_backbone(dims, mode, a.frozen_seed);
  const auto samples = inv::make_teacher_student_dataset(backbone, dims, variant, a.samples, teacher_seed);

  const fs::path dir(g.output);
  json list = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    RhythmSequence r;
    r.fps = 60.0;
    for (Eigen::Index t = 0; t < s.rhythm.size(); ++t) r.bits.push_back(s.rhythm(t) > 0.5 ? 1 : 0);
    std::ostringstream name;
    name << "rhythm_" << std::setw(3) << std::setfill('0') << i << ".json";
    write_text(dir / name.str(), serialize_rhythm_json(r));
    json entry = {{"rhythm", name.str()}, {"genre", genre_index(s.genre)}};
    if (mode == inv::LossMode::kRegression) {
      entry["target"] = std::vector<double>(s.target.values.data(), s.target.values.data() + s.target.values.size());
    } else {
      entry["tokens"] = s.target.tokens;
    }
    list.push_back(std::move(entry));
  }
  const json manifest = {{"format", kDataFormat},
                         {"version", kDataVersion},
                         {"mode", inv::to_string(mode)},
                         {"dims", dims_doc(dims)},
                         {"frozen_seed", a.frozen_seed},
                         {"teacher", {{"variant", inv::to_string(variant)}, {"seed", teacher_seed}}},
                         {"samples", std::move(list)}};
  write_text(dir / "manifest.json", manifest.dump(1));
  out << json{{"dataset", dir.string()}, {"samples", samples.size()}, {"teacher_seed", teacher_seed}}.dump() << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string variant = "mlp";
  std::string mode;
  double lr = inv::TrainingConfig{}.learning_rate;
  std::size_t epochs = inv::TrainingConfig{}.epochs;
};

int cmd_train_toy(const TrainArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("train-toy");
  if (!(a.lr >= 0.0) || !std::isfinite(a.lr)) throw InputError("--lr must be a nonnegative number");
  const ToyDataset ds = read_dataset(a.data);
  if (!a.mode.empty() && inv::parse_mode(a.mode) != ds.mode) {
    throw InputError("--mode " + a.mode + " does not match the dataset (" + inv::to_string(ds.mode) + ")");
  }
  inv::TrainingConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.seed = g.resolve_seed();
  cfg.frozen_seed = ds.frozen_seed;
  cfg.variant = inv::parse_variant(a.variant);
  cfg.mode = ds.mode;
  cfg.dims = ds.dims;

  const auto backbone = inv::make_backbone(cfg.dims, cfg.mode, cfg.frozen_seed);
  const std::string table_before = inv::block_digest(backbone.table);
  const std::string gen_before = inv::block_digest(backbone.generator);
  const auto result = inv::train(cfg, backbone, ds.samples);
  const bool frozen_ok = inv::block_digest(backbone.table) == table_before &&
                         inv::block_digest(backbone.generator) == gen_before;

  const fs::path dir = g.output.empty() ? fs::path(a.data) / "run" : fs::path(g.output);
  const double final_loss = result.loss_history.back();
  write_text(dir / "checkpoint.json", inv::checkpoint_json(cfg, backbone, result.params, final_loss));
  std::ostringstream csv;
  csv.precision(17);
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) csv << e << ',' << result.loss_history[e] << '\n';
  write_text(dir / "loss.csv", csv.str());

  const double initial = result.loss_history.front();
  const json doc = {{"checkpoint", (dir / "checkpoint.json").string()},
                    {"loss_csv", (dir / "loss.csv").string()},
                    {"seed", cfg.seed},
                    {"initial_loss", initial},
                    {"final_loss", final_loss},
                    {"loss_ratio", initial > 0.0 ? final_loss / initial : 0.0},
                    {"frozen_unchanged", frozen_ok}};
  out << doc.dump() << '\n';
  return kExitOk;
}

struct GradcheckArgs {
  std::string variant = "mlp";
  std::string mode = "regression";
  std::size_t frames = 0;  // 0: variant default
};

// Full-size attention checks take minutes; the mechanism does not depend on T.
constexpr std::size_t kAttnGradcheckFrames = 32;

int cmd_gradcheck(const GradcheckArgs& a, const Globals& g, std::ostream& out) {
  g.require_json("gradcheck");
  const auto variant = inv::parse_variant(a.variant);
  const auto mode = inv::parse_mode(a.mode);
  inv::Dims dims;
  if (a.frames > 0) {
    dims.frames = a.frames;
  } else if (variant == inv::ProjectorVariant::kAttnPos) {
    dims.frames = kAttnGradcheckFrames;
  }
  const std::uint64_t seed = g.resolve_seed();
  const auto report = inv::gradcheck(dims, variant, mode, seed);
  constexpr double kThreshold = 1e-4;

  json blocks = json::array();
  for (const auto& b : report.blocks) {
    blocks.push_back({{"name", b.name},
                      {"max_rel_error", b.max_rel_error},
                      {"max_abs_error", b.max_abs_error},
                      {"coordinates", b.coordinates},
                      {"passed", b.max_rel_error < kThreshold}});
  }
  const json doc = {{"variant", inv::to_string(variant)},
                    {"mode", inv::to_string(mode)},
                    {"seed", seed},
                    {"frames", dims.frames},
                    {"step", inv::kFiniteDifferenceStep},
                    {"threshold", kThreshold},
                    {"max_rel_error", report.max_rel_error},
                    {"passed", report.passed(kThreshold)},
                    {"blocks", std::move(blocks)}};
  emit(g, out, doc.dump());
  return report.passed(kThreshold) ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematic rhythm extraction, beat alignment metrics and a toy textual-inversion trainer."};
  app.name("kinebeat");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for randomised commands (fallback: KINEBEAT_SEED, then 7)");
  app.add_option("--output", g.output, "Output path (stdout when omitted)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract-rhythm", "Keypoint JSON to binary rhythm sequence(s)");
  extract->add_option("--poses", ex.poses, "Keypoint JSON file")->required();
  extract->add_option("--bins", ex.config.bins, "Direction bins K")->capture_default_str();
  extract->add_option("--window", ex.config.window_seconds, "Peak window in seconds")->capture_default_str();
  extract->add_option("--min-rel", ex.config.min_relative, "Peak floor as a fraction of the maximum")
      ->capture_default_str();
  extract->add_option("--conf-threshold", ex.config.confidence_threshold, "Keypoint confidence threshold")
      ->capture_default_str();
  extract->add_option("--clip", ex.clip, "Clip length in seconds, or none; with --output, a directory")
      ->capture_default_str();

  DetectArgs de;
  auto* detect = app.add_subcommand("detect-beats", "WAV audio to beat times");
  detect->add_option("--audio", de.audio, "WAV file")->required();
  detect->add_option("--peak-window", de.config.window_seconds, "Peak window in seconds")->capture_default_str();
  detect->add_option("--delta", de.config.delta, "Threshold above the local mean, in envelope stds")
      ->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Beat alignment of generated against reference beats");
  evaluate->add_option("--gen", ev.gen, "Beats or rhythm JSON, or a directory of them")->required();
  evaluate->add_option("--ref", ev.ref, "Beats or rhythm JSON, or a directory of them")->required();
  evaluate->add_option("--tolerance", ev.tolerance, "Match tolerance in seconds")->capture_default_str();
  evaluate->add_flag("--phase-align", ev.phase_align, "Search a global offset of the generated beats");
  evaluate->add_option("--phase-range", ev.search.range, "Largest offset searched, seconds")->capture_default_str();
  evaluate->add_option("--phase-step", ev.search.step, "Offset grid step, seconds")->capture_default_str();
  evaluate->add_option("--tempo-gen", ev.tempo_gen, "Tempo JSON (or directory) for the generated side");
  evaluate->add_option("--tempo-ref", ev.tempo_ref, "Tempo JSON (or directory) for the reference side");

  TempoArgs te;
  auto* tempo = app.add_subcommand("tempo", "Global tempo of a WAV file");
  tempo->add_option("--audio", te.audio, "WAV file")->required();
  tempo->add_option("--bpm-min", te.range.bpm_min, "Slowest tempo considered")->capture_default_str();
  tempo->add_option("--bpm-max", te.range.bpm_max, "Fastest tempo considered")->capture_default_str();

  MakeDataArgs md;
  auto* make_data = app.add_subcommand("make-toy-data", "Write a teacher-student dataset to --output DIR");
  make_data->add_option("--variant", md.variant, "Teacher projector")
      ->check(CLI::IsMember({"mlp", "attnpos"}))
      ->capture_default_str();
  make_data->add_option("--mode", md.mode, "Target kind")
      ->check(CLI::IsMember({"regression", "categorical"}))
      ->capture_default_str();
  make_data->add_option("--samples", md.samples, "Number of samples")->capture_default_str();
  make_data->add_option("--frames", md.frames, "Projector input length")->capture_default_str();
  make_data->add_option("--frozen-seed", md.frozen_seed, "Seed of the frozen table and generator")
      ->capture_default_str();
  make_data->add_option("--teacher-seed", md.teacher_seed, "Seed of the hidden teacher encoders")
      ->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train-toy", "Train the rhythm and genre encoders on a toy dataset");
  train->add_option("--data", tr.data, "Dataset directory holding manifest.json")->required();
  train->add_option("--variant", tr.variant, "Rhythm projector")
      ->check(CLI::IsMember({"mlp", "attnpos"}))
      ->capture_default_str();
  train->add_option("--mode", tr.mode, "Loss; must match the dataset (default: the dataset's)")
      ->check(CLI::IsMember({"regression", "categorical"}));
  train->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  train->add_option("--epochs", tr.epochs, "Full-batch gradient steps")->capture_default_str();

  GradcheckArgs gc;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  grad->add_option("--variant", gc.variant, "Rhythm projector")
      ->check(CLI::IsMember({"mlp", "attnpos"}))
      ->capture_default_str();
  grad->add_option("--mode", gc.mode, "Loss")->check(CLI::IsMember({"regression", "categorical"}))
      ->capture_default_str();
  grad->add_option("--frames", gc.frames, "Projector input length (default 308 for mlp, 32 for attnpos)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*extract) return cmd_extract_rhythm(ex, g, out);
    if (*detect) return cmd_detect_beats(de, g, out);
    if (*evaluate) return cmd_evaluate(ev, g, out);
    if (*tempo) return cmd_tempo(te, g, out);
    if (*make_data) return cmd_make_toy_data(md, g, out);
    if (*train) return cmd_train_toy(tr, g, out);
    if (*grad) return cmd_gradcheck(gc, g, out);
  } catch (const InputError& e) {
    err << "kinebeat: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ComputeError& e) {
    err << "kinebeat: " << e.what() << '\n';
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "kinebeat: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace kinebeat::cli
