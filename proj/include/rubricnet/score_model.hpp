#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "rubricnet/error.hpp"

namespace rubricnet {

// Quarter-note positions. Ingest quantizes onsets to a 1/960 grid, so
// simultaneity is decided by exact equality.
using Beats = boost::rational<std::int64_t>;

inline constexpr std::int64_t kTicksPerQuarter = 960;
inline constexpr double kDefaultTempoBpm = 100.0;

Beats quantize_beats(double beats);
double to_double(const Beats& b);

class Pitch {
 public:
  // Throws Errc::invalid_argument outside [0, 127].
  explicit Pitch(int midi);

  int midi() const noexcept { return midi_; }

  friend auto operator<=>(const Pitch&, const Pitch&) = default;

 private:
  int midi_;
};

struct NoteEvent {
  Pitch pitch;
  Beats onset;
  Beats duration;

  // Validates onset >= 0 and duration > 0.
  static NoteEvent make(int midi, Beats onset, Beats duration);

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

enum class Hand { right, left };

std::string_view to_string(Hand hand);

class HandPart {
 public:
  HandPart() = default;
  HandPart(Hand hand, std::vector<NoteEvent> notes);

  Hand hand() const noexcept { return hand_; }
  const std::vector<NoteEvent>& notes() const noexcept { return notes_; }
  bool empty() const noexcept { return notes_.empty(); }

  friend bool operator==(const HandPart&, const HandPart&) = default;

 private:
  Hand hand_ = Hand::right;
  std::vector<NoteEvent> notes_;  // sorted by (onset, pitch)
};

struct DifficultyLabel {
  int level = 1;
  int num_levels = 2;

  // Throws Errc::invalid_argument unless 1 <= level <= num_levels and num_levels >= 2.
  static DifficultyLabel make(int level, int num_levels);

  friend bool operator==(const DifficultyLabel&, const DifficultyLabel&) = default;
};

struct Piece {
  std::string id;
  HandPart right{Hand::right, {}};
  HandPart left{Hand::left, {}};
  std::optional<double> tempo_bpm;
  std::optional<DifficultyLabel> label;

  const HandPart& part(Hand hand) const { return hand == Hand::right ? right : left; }

  friend bool operator==(const Piece&, const Piece&) = default;
};

// Pitches attacked together at one onset, sorted ascending without duplicates.
struct PitchSetEvent {
  std::vector<Pitch> pitch_set;
  double onset_seconds = 0.0;

  friend bool operator==(const PitchSetEvent&, const PitchSetEvent&) = default;
};

double resolve_tempo(const Piece& piece);
bool tempo_is_assumed(const Piece& piece);

std::vector<PitchSetEvent> build_pitch_set_sequence(const HandPart& part, double bpm);

// One entry per note, chord tones included individually.
std::vector<Pitch> pitch_event_sequence(const HandPart& part);

}  // namespace rubricnet
