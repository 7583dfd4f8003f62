#include "rubricnet/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace rubricnet {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::invalid_tempo: return "invalid tempo";
    case Errc::empty_part: return "empty part";
    case Errc::parse: return "parse error";
    case Errc::unsupported_layout: return "unsupported layout";
    case Errc::load: return "load error";
    case Errc::io: return "io error";
    case Errc::checkpoint: return "checkpoint error";
    case Errc::numeric: return "numeric error";
    case Errc::encode: return "encode error";
    case Errc::fit: return "fit error";
    case Errc::analysis: return "analysis error";
    case Errc::contribution: return "contribution error";
  }
  return "error";
}

std::string_view to_string(Hand hand) { return hand == Hand::right ? "right" : "left"; }

Beats quantize_beats(double beats) {
  if (!std::isfinite(beats)) throw Error(Errc::invalid_argument, "non-finite beat position");
  const auto ticks = static_cast<std::int64_t>(std::llround(beats * kTicksPerQuarter));
  return Beats(ticks, kTicksPerQuarter);
}

double to_double(const Beats& b) {
  return static_cast<double>(b.numerator()) / static_cast<double>(b.denominator());
}

Pitch::Pitch(int midi) : midi_(midi) {
  if (midi < 0 || midi > 127) {
    throw Error(Errc::invalid_argument, "pitch out of range: " + std::to_string(midi));
  }
}

NoteEvent NoteEvent::make(int midi, Beats onset, Beats duration) {
  if (onset < Beats(0)) throw Error(Errc::invalid_argument, "negative onset");
  if (duration <= Beats(0)) throw Error(Errc::invalid_argument, "non-positive duration");
  return NoteEvent{Pitch(midi), onset, duration};
}

HandPart::HandPart(Hand hand, std::vector<NoteEvent> notes) : hand_(hand), notes_(std::move(notes)) {
  std::stable_sort(notes_.begin(), notes_.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::tie(a.onset, a.pitch) < std::tie(b.onset, b.pitch);
  });
}

DifficultyLabel DifficultyLabel::make(int level, int num_levels) {
  if (num_levels < 2) throw Error(Errc::invalid_argument, "number of levels must be >= 2");
  if (level < 1 || level > num_levels) {
    throw Error(Errc::invalid_argument, "level " + std::to_string(level) + " outside [1, " +
                                            std::to_string(num_levels) + "]");
  }
  return DifficultyLabel{level, num_levels};
}

double resolve_tempo(const Piece& piece) {
  if (!piece.tempo_bpm) return kDefaultTempoBpm;
  const double bpm = *piece.tempo_bpm;
  if (!(bpm > 0.0) || !std::isfinite(bpm)) {
    throw Error(Errc::invalid_tempo, "tempo must be positive, got " + std::to_string(bpm));
  }
  return bpm;
}

bool tempo_is_assumed(const Piece& piece) { return !piece.tempo_bpm.has_value(); }

std::vector<PitchSetEvent> build_pitch_set_sequence(const HandPart& part, double bpm) {
  if (part.empty()) {
    throw Error(Errc::empty_part, std::string(to_string(part.hand())) + " hand has no notes");
  }
  if (!(bpm > 0.0)) throw Error(Errc::invalid_tempo, "tempo must be positive");

  const double seconds_per_beat = 60.0 / bpm;
  std::vector<PitchSetEvent> events;
  const auto& notes = part.notes();
  for (std::size_t i = 0; i < notes.size();) {
    std::size_t j = i;
    PitchSetEvent ev;
    ev.onset_seconds = to_double(notes[i].onset) * seconds_per_beat;
    for (; j < notes.size() && notes[j].onset == notes[i].onset; ++j) {
      // notes are sorted by pitch within an onset, so duplicates are adjacent
      if (ev.pitch_set.empty() || ev.pitch_set.back() != notes[j].pitch) {
        ev.pitch_set.push_back(notes[j].pitch);
      }
    }
    events.push_back(std::move(ev));
    i = j;
  }
  return events;
}

std::vector<Pitch> pitch_event_sequence(const HandPart& part) {
  if (part.empty()) {
    throw Error(Errc::empty_part, std::string(to_string(part.hand())) + " hand has no notes");
  }
  std::vector<Pitch> pitches;
  pitches.reserve(part.notes().size());
  for (const auto& n : part.notes()) pitches.push_back(n.pitch);
  return pitches;
}

}  // namespace rubricnet
