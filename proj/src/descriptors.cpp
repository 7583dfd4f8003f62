#include "rubricnet/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace rubricnet {
namespace {

void require_pitches(std::span<const Pitch> pitches) {
  if (pitches.empty()) throw Error(Errc::empty_part, "no pitch events");
}

}  // namespace

double pitch_entropy(std::span<const Pitch> pitches) {
  require_pitches(pitches);
  std::array<std::size_t, 128> counts{};
  for (const auto& p : pitches) ++counts[static_cast<std::size_t>(p.midi())];
  const double n = static_cast<double>(pitches.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double prob = static_cast<double>(c) / n;
    h -= prob * std::log2(prob);
  }
  return h == 0.0 ? 0.0 : h;  // no negative zero
}

double pitch_range(std::span<const Pitch> pitches) {
  require_pitches(pitches);
  const auto [lo, hi] = std::minmax_element(pitches.begin(), pitches.end());
  return static_cast<double>(hi->midi() - lo->midi());
}

double average_pitch(std::span<const Pitch> pitches) {
  require_pitches(pitches);
  long long sum = 0;
  for (const auto& p : pitches) sum += p.midi();
  return static_cast<double>(sum) / static_cast<double>(pitches.size());
}

int displacement_weight(int semitones) {
  if (semitones < 7) return 0;
  if (semitones < 12) return 1;
  return 2;
}

bool is_degenerate(std::span<const PitchSetEvent> events) { return events.size() < 2; }

double displacement_rate(std::span<const PitchSetEvent> events) {
  if (is_degenerate(events)) return 0.0;
  long long total = 0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const auto& a = events[i].pitch_set;
    const auto& b = events[i + 1].pitch_set;
    // sets are sorted, so the widest pair uses an extreme of each set
    const int d = std::max(std::abs(b.back().midi() - a.front().midi()),
                           std::abs(a.back().midi() - b.front().midi()));
    total += displacement_weight(d);
  }
  return static_cast<double>(total) / static_cast<double>(events.size() - 1);
}

double average_ioi(std::span<const PitchSetEvent> events) {
  if (is_degenerate(events)) return 0.0;
  return (events.back().onset_seconds - events.front().onset_seconds) / static_cast<double>(events.size() - 1);
}

std::int64_t lz78_phrase_count(std::span<const int> symbols) {
  // dictionary as a trie: (node, symbol) -> child node; node 0 is the empty phrase
  std::map<std::pair<std::int64_t, int>, std::int64_t> trie;
  std::int64_t phrases = 0;
  std::int64_t node = 0;
  for (int s : symbols) {
    const auto it = trie.find({node, s});
    if (it != trie.end()) {
      node = it->second;
      continue;
    }
    trie.emplace(std::make_pair(node, s), static_cast<std::int64_t>(trie.size()) + 1);
    ++phrases;
    node = 0;
  }
  if (node != 0) ++phrases;
  return phrases;
}

std::int64_t pitch_set_lz(std::span<const PitchSetEvent> events) {
  if (events.empty()) throw Error(Errc::empty_part, "no pitch-set events");
  std::map<std::vector<Pitch>, int> alphabet;
  std::vector<int> symbols;
  symbols.reserve(events.size());
  for (const auto& ev : events) {
    const auto [it, inserted] = alphabet.emplace(ev.pitch_set, static_cast<int>(alphabet.size()));
    symbols.push_back(it->second);
  }
  return lz78_phrase_count(symbols);
}

FeatureVector extract_features(const Piece& piece) {
  const double bpm = resolve_tempo(piece);
  FeatureVector fv;
  fv.tempo_assumed = tempo_is_assumed(piece);
  for (Hand hand : {Hand::right, Hand::left}) {
    const auto& part = piece.part(hand);
    std::vector<Pitch> pitches;
    std::vector<PitchSetEvent> events;
    try {
      pitches = pitch_event_sequence(part);
      events = build_pitch_set_sequence(part, bpm);
    } catch (const Error& e) {
      throw Error(e.code(), "piece '" + piece.id + "', " + std::string(to_string(hand)) + " hand: " + e.what());
    }
    auto slot = [hand](Descriptor d) { return feature_slot(d, hand); };
    fv.values[slot(Descriptor::pitch_entropy)] = pitch_entropy(pitches);
    fv.values[slot(Descriptor::pitch_range)] = pitch_range(pitches);
    fv.values[slot(Descriptor::average_pitch)] = average_pitch(pitches);
    fv.values[slot(Descriptor::displacement_rate)] = displacement_rate(events);
    fv.values[slot(Descriptor::average_ioi)] = average_ioi(events);
    fv.values[slot(Descriptor::pitch_set_lz)] = static_cast<double>(pitch_set_lz(events));
    (hand == Hand::right ? fv.degenerate_right : fv.degenerate_left) = is_degenerate(events);
  }
  return fv;
}

}  // namespace rubricnet
