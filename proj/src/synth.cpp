#include "rubricnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rubricnet {
namespace {

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::string synth_id(int level, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%d-%03d", level, index);
  return buf;
}

struct HandRecipe {
  int base = 60;
  int span = 4;
  int alphabet = 2;
  std::int64_t step_ticks = kTicksPerQuarter;
  double leap_p = 0.0;
  double chord_p = 0.0;
  int events = 64;
};

HandRecipe recipe(Hand hand, double u, int num_levels) {
  HandRecipe r;
  // right hand; shrinks linearly with difficulty
  const double beats_per_step = 1.3 - 0.99 * u / std::max(num_levels, 9);
  if (hand == Hand::right) {
    r.base = 60;
    r.span = static_cast<int>(std::lround(2.0 + 3.0 * u));
    r.alphabet = 2 + static_cast<int>(std::floor(1.2 * u));
    r.step_ticks = std::llround(beats_per_step * kTicksPerQuarter);
    r.leap_p = std::clamp(0.06 * (u - 1.5), 0.0, 0.6);
    r.events = 64;
  } else {
    r.base = 40;
    r.span = static_cast<int>(std::lround(1.0 + 2.5 * u));
    r.alphabet = 2 + static_cast<int>(std::floor(0.9 * u));
    r.step_ticks = std::llround(2.0 * beats_per_step * kTicksPerQuarter);
    r.leap_p = std::clamp(0.03 * (u - 1.5), 0.0, 0.3);
    r.events = 32;
  }
  r.chord_p = std::clamp(0.06 * (u - 2.0), 0.0, 0.5);
  return r;
}

// `count` distinct positions in [1, n), in random order.
std::vector<int> pick_positions(int n, int count, std::mt19937_64& rng) {
  std::vector<int> pos;
  for (int t = 1; t < n; ++t) pos.push_back(t);
  count = std::min<int>(count, static_cast<int>(pos.size()));
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng() % (pos.size() - static_cast<std::size_t>(i));
    std::swap(pos[static_cast<std::size_t>(i)], pos[j]);
  }
  pos.resize(static_cast<std::size_t>(count));
  return pos;
}

// A zigzag over the pitch alphabet, with a fixed number of leaps into the far
// half and added chord tones at random positions.
HandPart make_hand(Hand hand, double u, int num_levels, std::mt19937_64& rng) {
  const HandRecipe r = recipe(hand, u, num_levels);
  std::vector<int> pitches(static_cast<std::size_t>(r.alphabet));
  for (int k = 0; k < r.alphabet; ++k) {
    pitches[static_cast<std::size_t>(k)] =
        r.base + static_cast<int>(std::lround(static_cast<double>(k) * r.span / (r.alphabet - 1)));
  }
  const int top = r.alphabet - 1;
  const int period = 2 * top;
  const int phase = static_cast<int>(rng() % static_cast<std::uint64_t>(period));

  std::vector<int> seq(static_cast<std::size_t>(r.events));
  for (int t = 0; t < r.events; ++t) {
    const int p = (t + phase) % period;
    seq[static_cast<std::size_t>(t)] = p <= top ? p : period - p;
  }
  const auto leaps = pick_positions(r.events, static_cast<int>(std::lround(r.leap_p * r.events)), rng);
  for (int t : leaps) {
    const int prev = seq[static_cast<std::size_t>(t - 1)];
    const int reach = static_cast<int>(rng() % static_cast<std::uint64_t>(top / 2 + 1));
    seq[static_cast<std::size_t>(t)] = 2 * prev < top ? top - reach : reach;
  }
  std::vector<bool> chord(static_cast<std::size_t>(r.events), false);
  for (int t : pick_positions(r.events, static_cast<int>(std::lround(r.chord_p * r.events)), rng)) {
    chord[static_cast<std::size_t>(t)] = true;
  }

  std::vector<NoteEvent> notes;
  for (int t = 0; t < r.events; ++t) {
    const Beats onset(t * r.step_ticks, kTicksPerQuarter);
    const Beats duration(r.step_ticks, kTicksPerQuarter);
    const int pitch = pitches[static_cast<std::size_t>(seq[static_cast<std::size_t>(t)])];
    notes.push_back(NoteEvent{Pitch(pitch), onset, duration});
    if (chord[static_cast<std::size_t>(t)]) {
      notes.push_back(NoteEvent{Pitch(pitch + 3 + t % 2), onset, duration});
    }
  }
  return HandPart(hand, std::move(notes));
}

}  // namespace

void SynthSpec::validate() const {
  if (num_levels < 2) throw Error(Errc::invalid_argument, "synth: number of levels must be >= 2");
  if (n_per_class < 1) throw Error(Errc::invalid_argument, "synth: n_per_class must be >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(Errc::invalid_argument, "synth: noise must be >= 0");
  if (mode == SynthMode::score_level && num_levels > 12) {
    throw Error(Errc::invalid_argument, "synth: score-level corpora support at most 12 levels");
  }
}

FeatureArray synth_feature_step() {
  return {0.35, 0.3, 3.0, 2.5, 0.0, 0.0, 0.15, 0.1, -0.05, -0.08, 3.0, 2.0};
}

FeatureArray synth_feature_offset() {
  return {0.5, 0.4, 2.0, 2.0, 64.0, 48.0, 0.0, 0.0, 0.7, 1.2, 4.0, 3.0};
}

Dataset gen_feature_dataset(const SynthSpec& spec) {
  spec.validate();
  if (spec.mode != SynthMode::feature_level) throw Error(Errc::invalid_argument, "synth: mode must be feature_level");
  const auto step = synth_feature_step();
  const auto offset = synth_feature_offset();
  Dataset data;
  for (int g = 1; g <= spec.num_levels; ++g) {
    for (int i = 0; i < spec.n_per_class; ++i) {
      std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i)));
      Sample s;
      s.id = synth_id(g, i);
      s.level = g;
      for (std::size_t j = 0; j < kNumFeatures; ++j) {
        s.x[j] = offset[j] + g * step[j] + spec.noise * standard_normal(rng);
      }
      data.push_back(std::move(s));
    }
  }
  return data;
}

Corpus gen_score_corpus(const SynthSpec& spec) {
  spec.validate();
  if (spec.mode != SynthMode::score_level) throw Error(Errc::invalid_argument, "synth: mode must be score_level");
  Corpus corpus;
  corpus.num_levels = spec.num_levels;
  std::vector<std::pair<std::string, int>> id_levels;
  for (int g = 1; g <= spec.num_levels; ++g) {
    for (int i = 0; i < spec.n_per_class; ++i) {
      std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i)));
      const double u = g + std::clamp(spec.noise * standard_normal(rng), -0.45, 0.45);
      Piece piece;
      piece.id = synth_id(g, i);
      piece.right = make_hand(Hand::right, u, spec.num_levels, rng);
      piece.left = make_hand(Hand::left, u, spec.num_levels, rng);
      if (i % 2 == 0) piece.tempo_bpm = kDefaultTempoBpm;
      piece.label = DifficultyLabel::make(g, spec.num_levels);
      id_levels.emplace_back(piece.id, g);
      corpus.pieces.push_back(std::move(piece));
    }
  }
  std::sort(corpus.pieces.begin(), corpus.pieces.end(), [](const Piece& a, const Piece& b) { return a.id < b.id; });
  corpus.folds = assign_stratified_folds(id_levels, spec.seed);
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error(Errc::io, "cannot create directory " + dir.string());
  std::string labels = "id,level\n";
  for (const auto& piece : corpus.pieces) {
    write_file(dir / (piece.id + ".json"), serialize_canonical_json(piece));
    labels += piece.id + "," + std::to_string(piece.label ? piece.label->level : 0) + "\n";
  }
  write_file(dir / "labels.csv", labels);
}

}  // namespace rubricnet
