#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rubricnet/score_model.hpp"

namespace rubricnet {

enum class Descriptor { pitch_entropy, pitch_range, average_pitch, displacement_rate, average_ioi, pitch_set_lz };

inline constexpr std::size_t kNumDescriptors = 6;
inline constexpr std::size_t kNumFeatures = 12;

using FeatureArray = std::array<double, kNumFeatures>;

// Slot order is descriptor-major, right hand before left hand.
constexpr std::size_t feature_slot(Descriptor d, Hand hand) {
  return 2 * static_cast<std::size_t>(d) + (hand == Hand::left ? 1 : 0);
}

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "PitchEntropy-R",     "PitchEntropy-L",     "PitchRange-R", "PitchRange-L",
    "AveragePitch-R",     "AveragePitch-L",     "DisplacementRate-R", "DisplacementRate-L",
    "AverageIOI-R",       "AverageIOI-L",       "PitchSetLZ-R", "PitchSetLZ-L"};

struct FeatureVector {
  FeatureArray values{};
  bool tempo_assumed = false;
  // Hands with fewer than two pitch-set events; their displacement rate and
  // IOI slots hold 0.0.
  bool degenerate_right = false;
  bool degenerate_left = false;

  double operator[](std::size_t slot) const { return values[slot]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

double pitch_entropy(std::span<const Pitch> pitches);
double pitch_range(std::span<const Pitch> pitches);
double average_pitch(std::span<const Pitch> pitches);

// Mean of the 0/1/2 movement weights between consecutive pitch sets, using
// the largest pairwise semitone distance: d < 7 -> 0, 7 <= d < 12 -> 1, d >= 12 -> 2.
// Returns 0.0 for fewer than two events (see is_degenerate).
double displacement_rate(std::span<const PitchSetEvent> events);
int displacement_weight(int semitones);

// Mean seconds between consecutive onsets; 0.0 for fewer than two events.
double average_ioi(std::span<const PitchSetEvent> events);

bool is_degenerate(std::span<const PitchSetEvent> events);

// LZ78 phrase count over an integer symbol sequence; an unfinished final
// phrase counts as one phrase.
std::int64_t lz78_phrase_count(std::span<const int> symbols);

// Phrase count of the pitch-set sequence, each distinct set being one symbol.
std::int64_t pitch_set_lz(std::span<const PitchSetEvent> events);

FeatureVector extract_features(const Piece& piece);

// Feature table CSV: id,label,<12 names>,tempo_assumed
struct FeatureRow {
  std::string id;
  std::optional<int> label;
  FeatureVector features;
};

std::string feature_table_header();
std::string write_feature_table(std::span<const FeatureRow> rows);
std::vector<FeatureRow> parse_feature_table(std::string_view text);

}  // namespace rubricnet
