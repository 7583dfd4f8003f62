#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include "rubricnet/score_model.hpp"

namespace testing_support {

// Random hand part on the 1/960 grid: mostly monophonic, with some chords,
// repeated pitches, and occasional long gaps.
inline rubricnet::HandPart random_part(std::mt19937_64& rng, rubricnet::Hand hand, int max_notes = 40) {
  using namespace rubricnet;
  std::uniform_int_distribution<int> count(1, max_notes);
  std::uniform_int_distribution<int> pitch(21, 108);
  std::uniform_int_distribution<int> step(0, 3);
  std::uniform_int_distribution<int> ticks(1, 4 * 960);
  std::uniform_int_distribution<int> chord(0, 4);
  std::vector<NoteEvent> notes;
  const int n = count(rng);
  std::int64_t onset = std::uniform_int_distribution<int>(0, 960)(rng);
  int last = pitch(rng);
  for (int i = 0; i < n; ++i) {
    // small alphabets make repeated pitch sets, so LZ phrases get long
    int p = step(rng) == 0 ? pitch(rng) : std::clamp(last + step(rng) - 1, 21, 108);
    last = p;
    const Beats on(onset, kTicksPerQuarter);
    const Beats dur(ticks(rng), kTicksPerQuarter);
    notes.push_back(NoteEvent::make(p, on, dur));
    if (chord(rng) == 0) notes.push_back(NoteEvent::make(std::clamp(p + 4, 21, 108), on, dur));
    onset += step(rng) == 3 ? ticks(rng) * 3 : ticks(rng);
  }
  return HandPart(hand, std::move(notes));
}

inline rubricnet::Piece random_piece(std::mt19937_64& rng, const std::string& id, int num_levels = 9) {
  using namespace rubricnet;
  Piece piece;
  piece.id = id;
  piece.right = random_part(rng, Hand::right);
  piece.left = random_part(rng, Hand::left);
  switch (rng() % 3) {
    case 0:
      break;
    case 1:
      piece.tempo_bpm = double(40 + rng() % 160);
      break;
    default:
      piece.tempo_bpm = 40.0 + double(rng() % 16000) / 100.0;
  }
  if (rng() % 2) piece.label = DifficultyLabel::make(int(1 + rng() % num_levels), num_levels);
  return piece;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rubricnet-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
