#pragma once

#include <cstdint>
#include <filesystem>

#include "rubricnet/ingest.hpp"
#include "rubricnet/training.hpp"

namespace rubricnet {

enum class SynthMode { feature_level, score_level };

inline constexpr double kDefaultSynthNoise = 0.2;

struct SynthSpec {
  int num_levels = kDefaultNumLevels;
  int n_per_class = 60;
  std::uint64_t seed = 0;
  SynthMode mode = SynthMode::score_level;
  double noise = kDefaultSynthNoise;

  void validate() const;
};

// Slot j of a level-g sample is drawn from Normal(offset_j + g * step_j, noise).
// Steps are zero for the average-pitch slots and negative for the IOI slots.
Dataset gen_feature_dataset(const SynthSpec& spec);
FeatureArray synth_feature_step();
FeatureArray synth_feature_offset();

// Level-g pieces zigzag over a pitch alphabet whose size and span, leap
// count, chord density and note rate grow with a latent difficulty
// u = g + clamp(noise * N(0, 1), -0.45, 0.45). With u < 1.5 every move stays
// below 7 semitones.
Corpus gen_score_corpus(const SynthSpec& spec);

// Writes `<id>.json` per piece and `labels.csv` (id,level).
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace rubricnet
