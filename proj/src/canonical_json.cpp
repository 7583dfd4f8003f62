#include <cmath>

#include <json.hpp>

#include "rubricnet/ingest.hpp"

namespace rubricnet {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(Errc::parse, field + ": " + what);
}

// Accepts [num, den] (exact) or a plain number (quantized to the 1/960 grid).
Beats parse_beats(const json& value, const std::string& field) {
  if (value.is_array()) {
    if (value.size() != 2 || !value[0].is_number_integer() || !value[1].is_number_integer()) {
      fail(field, "expected [numerator, denominator] integers");
    }
    const auto num = value[0].get<std::int64_t>();
    const auto den = value[1].get<std::int64_t>();
    if (den <= 0) fail(field, "denominator must be positive");
    Beats exact(num, den);
    if (kTicksPerQuarter % exact.denominator() == 0) return exact;
    return quantize_beats(static_cast<double>(num) / static_cast<double>(den));
  }
  if (value.is_number()) return quantize_beats(value.get<double>());
  fail(field, "expected a rational [num, den] or a number");
}

std::vector<NoteEvent> parse_part(const json& doc, const char* hand) {
  const std::string base = std::string("parts.") + hand;
  const auto& parts = doc.at("parts");
  if (!parts.contains(hand)) fail(base, "missing hand");
  const auto& arr = parts.at(hand);
  if (!arr.is_array()) fail(base, "expected an array of notes");

  std::vector<NoteEvent> notes;
  notes.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string field = base + "[" + std::to_string(i) + "]";
    const auto& n = arr[i];
    if (!n.is_object()) fail(field, "expected an object");
    for (const char* key : {"pitch", "onset_beats", "duration_beats"}) {
      if (!n.contains(key)) fail(field + "." + key, "missing");
    }
    if (!n.at("pitch").is_number_integer()) fail(field + ".pitch", "expected an integer");
    const auto pitch = n.at("pitch").get<std::int64_t>();
    if (pitch < 0 || pitch > 127) fail(field + ".pitch", "pitch out of range");

    const Beats onset = parse_beats(n.at("onset_beats"), field + ".onset_beats");
    if (onset < Beats(0)) fail(field + ".onset_beats", "negative onset");
    Beats duration = parse_beats(n.at("duration_beats"), field + ".duration_beats");
    if (duration < Beats(0)) fail(field + ".duration_beats", "negative duration");
    if (duration == Beats(0)) {
      // zero after quantization only happens for sub-grid positive input
      const auto& raw = n.at("duration_beats");
      const bool zero_input = raw.is_array() ? raw[0].get<std::int64_t>() == 0 : raw.get<double>() == 0.0;
      if (zero_input) fail(field + ".duration_beats", "duration must be positive");
      duration = Beats(1, kTicksPerQuarter);
    }
    notes.push_back(NoteEvent{Pitch(static_cast<int>(pitch)), onset, duration});
  }
  return notes;
}

json encode_beats(const Beats& b) { return json::array({b.numerator(), b.denominator()}); }

}  // namespace

Piece parse_canonical_json(std::string_view text, int num_levels) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("document", "expected an object");

  Piece piece;
  if (!doc.contains("id") || !doc.at("id").is_string()) fail("id", "missing or not a string");
  piece.id = doc.at("id").get<std::string>();
  if (piece.id.empty()) fail("id", "must be non-empty");

  if (doc.contains("tempo_bpm") && !doc.at("tempo_bpm").is_null()) {
    if (!doc.at("tempo_bpm").is_number()) fail("tempo_bpm", "expected a number");
    const double bpm = doc.at("tempo_bpm").get<double>();
    if (!(bpm > 0.0) || !std::isfinite(bpm)) fail("tempo_bpm", "tempo must be positive");
    piece.tempo_bpm = bpm;
  }
  if (doc.contains("label") && !doc.at("label").is_null()) {
    if (!doc.at("label").is_number_integer()) fail("label", "expected an integer");
    const auto level = doc.at("label").get<std::int64_t>();
    if (level < 1 || level > num_levels) fail("label", "level out of range");
    piece.label = DifficultyLabel::make(static_cast<int>(level), num_levels);
  }
  if (!doc.contains("parts") || !doc.at("parts").is_object()) fail("parts", "missing or not an object");

  piece.right = HandPart(Hand::right, parse_part(doc, "right"));
  piece.left = HandPart(Hand::left, parse_part(doc, "left"));
  return piece;
}

std::string serialize_canonical_json(const Piece& piece) {
  json doc = json::object();
  doc["id"] = piece.id;
  if (piece.tempo_bpm) {
    const double bpm = *piece.tempo_bpm;
    if (bpm == std::floor(bpm) && std::abs(bpm) < 1e15) {
      doc["tempo_bpm"] = static_cast<std::int64_t>(bpm);
    } else {
      doc["tempo_bpm"] = bpm;
    }
  }
  if (piece.label) doc["label"] = piece.label->level;
  json parts = json::object();
  for (Hand hand : {Hand::right, Hand::left}) {
    json arr = json::array();
    for (const auto& n : piece.part(hand).notes()) {
      arr.push_back({{"pitch", n.pitch.midi()},
                     {"onset_beats", encode_beats(n.onset)},
                     {"duration_beats", encode_beats(n.duration)}});
    }
    parts[std::string(to_string(hand))] = std::move(arr);
  }
  doc["parts"] = std::move(parts);
  return doc.dump(1) + "\n";
}

}  // namespace rubricnet
