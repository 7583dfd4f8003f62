#include <doctest.h>

#include "rubricnet/score_model.hpp"

using namespace rubricnet;

namespace {

HandPart part_of(std::initializer_list<std::pair<int, Beats>> notes, Hand hand = Hand::right) {
  std::vector<NoteEvent> events;
  for (const auto& [p, onset] : notes) events.push_back(NoteEvent::make(p, onset, Beats(1)));
  return HandPart(hand, events);
}

std::vector<int> midis(const std::vector<Pitch>& ps) {
  std::vector<int> out;
  for (auto p : ps) out.push_back(p.midi());
  return out;
}

}  // namespace

TEST_CASE("pitch range is checked") {
  CHECK(Pitch(0).midi() == 0);
  CHECK(Pitch(127).midi() == 127);
  CHECK_THROWS_AS(Pitch(128), Error);
  CHECK_THROWS_AS(Pitch(-1), Error);
}

TEST_CASE("note events reject negative onsets and empty durations") {
  CHECK_THROWS_AS(NoteEvent::make(60, Beats(-1, 2), Beats(1)), Error);
  CHECK_THROWS_AS(NoteEvent::make(60, Beats(0), Beats(0)), Error);
  CHECK_NOTHROW(NoteEvent::make(60, Beats(0), Beats(1, 960)));
}

TEST_CASE("labels") {
  CHECK(DifficultyLabel::make(9, 9).level == 9);
  CHECK_THROWS_AS(DifficultyLabel::make(0, 9), Error);
  CHECK_THROWS_AS(DifficultyLabel::make(10, 9), Error);
  CHECK_THROWS_AS(DifficultyLabel::make(1, 1), Error);
}

TEST_CASE("quantization snaps to the 1/960 grid") {
  CHECK(quantize_beats(0.5) == Beats(1, 2));
  CHECK(quantize_beats(1.0 / 3.0) == Beats(1, 3));
  CHECK(quantize_beats(1e-5) == Beats(0));
  CHECK(to_double(Beats(3, 4)) == 0.75);
}

TEST_CASE("resolve_tempo") {
  Piece p;
  p.tempo_bpm = 120.0;
  CHECK(resolve_tempo(p) == 120.0);
  CHECK_FALSE(tempo_is_assumed(p));
  p.tempo_bpm.reset();
  CHECK(resolve_tempo(p) == 100.0);
  CHECK(tempo_is_assumed(p));
  p.tempo_bpm = 0.0;
  try {
    resolve_tempo(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_tempo);
  }
}

TEST_CASE("hand parts keep notes ordered by onset then pitch") {
  const auto part = part_of({{67, Beats(1)}, {64, Beats(0)}, {60, Beats(0)}});
  REQUIRE(part.notes().size() == 3);
  CHECK(part.notes()[0].pitch.midi() == 60);
  CHECK(part.notes()[1].pitch.midi() == 64);
  CHECK(part.notes()[2].pitch.midi() == 67);
}

TEST_CASE("pitch-set sequence") {
  SUBCASE("chord then single note at 120 bpm") {
    const auto seq = build_pitch_set_sequence(part_of({{60, Beats(0)}, {64, Beats(0)}, {67, Beats(1)}}), 120.0);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].pitch_set == std::vector<Pitch>{Pitch(60), Pitch(64)});
    CHECK(seq[0].onset_seconds == 0.0);
    CHECK(seq[1].pitch_set == std::vector<Pitch>{Pitch(67)});
    CHECK(seq[1].onset_seconds == 0.5);
  }
  SUBCASE("single note") {
    const auto seq = build_pitch_set_sequence(part_of({{60, Beats(0)}}), 73.0);
    REQUIRE(seq.size() == 1);
    CHECK(seq[0].onset_seconds == 0.0);
  }
  SUBCASE("duplicate pitches collapse") {
    const auto seq = build_pitch_set_sequence(part_of({{60, Beats(0)}, {60, Beats(0)}}), 100.0);
    REQUIRE(seq.size() == 1);
    CHECK(seq[0].pitch_set.size() == 1);
  }
  SUBCASE("empty part") {
    CHECK_THROWS_AS(build_pitch_set_sequence(HandPart(Hand::left, {}), 100.0), Error);
  }
}

TEST_CASE("pitch event sequence lists chord tones individually") {
  CHECK(midis(pitch_event_sequence(part_of({{60, Beats(0)}, {64, Beats(0)}, {67, Beats(0)}}))) ==
        std::vector<int>{60, 64, 67});
  CHECK(midis(pitch_event_sequence(part_of({{60, Beats(0)}, {62, Beats(1)}, {60, Beats(2)}}))) ==
        std::vector<int>{60, 62, 60});
  try {
    pitch_event_sequence(HandPart(Hand::right, {}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_part);
  }
}
