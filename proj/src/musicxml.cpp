#include <cmath>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "rubricnet/ingest.hpp"

namespace rubricnet {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "musicxml: " + what); }

std::optional<std::string> attribute(const pt::ptree& node, const std::string& name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto v = attrs->get_optional<std::string>(name)) return *v;
  }
  return std::nullopt;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::string t = trimmed(text);
    const long v = std::stol(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    fail(Errc::parse, "unparseable " + what + " '" + text + "'");
  }
}

double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::string t = trimmed(text);
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    fail(Errc::parse, "unparseable " + what + " '" + text + "'");
  }
}

int midi_from_pitch(const pt::ptree& pitch) {
  static const std::map<std::string, int> kStep = {{"C", 0}, {"D", 2}, {"E", 4}, {"F", 5},
                                                   {"G", 7}, {"A", 9}, {"B", 11}};
  const auto step = pitch.get_optional<std::string>("step");
  const auto octave = pitch.get_optional<std::string>("octave");
  if (!step || !octave) fail(Errc::parse, "pitch without step or octave");
  const auto it = kStep.find(trimmed(*step));
  if (it == kStep.end()) fail(Errc::parse, "unparseable pitch step '" + *step + "'");
  double alter = 0.0;
  if (auto a = pitch.get_optional<std::string>("alter")) alter = parse_real(*a, "pitch alter");
  const long midi = (parse_long(*octave, "octave") + 1) * 12 + it->second + std::lround(alter);
  if (midi < 0 || midi > 127) fail(Errc::parse, "pitch out of range: " + std::to_string(midi));
  return static_cast<int>(midi);
}

Beats on_grid(const Beats& b) {
  if (kTicksPerQuarter % b.denominator() == 0) return b;
  return quantize_beats(to_double(b));
}

struct PartEvents {
  std::map<int, std::vector<NoteEvent>> by_staff;
  int staves = 1;
};

PartEvents parse_part(const pt::ptree& part) {
  PartEvents out;
  long divisions = 0;
  Beats cursor = 0;
  Beats extent = 0;
  Beats last_onset = 0;
  // (staff, midi) -> index into by_staff[staff] of a note awaiting its tie stop
  std::map<std::pair<int, int>, std::size_t> pending_ties;

  auto duration_of = [&](const pt::ptree& node) -> Beats {
    const auto d = node.get_optional<std::string>("duration");
    if (!d) fail(Errc::parse, "element without duration");
    if (divisions <= 0) fail(Errc::parse, "duration before a valid divisions value");
    const long ticks = parse_long(*d, "duration");
    if (ticks < 0) fail(Errc::parse, "negative duration");
    return Beats(ticks, divisions);
  };

  for (const auto& [mtag, measure] : part) {
    if (mtag != "measure") continue;
    for (const auto& [tag, node] : measure) {
      if (tag == "attributes") {
        if (auto d = node.get_optional<std::string>("divisions")) {
          divisions = parse_long(*d, "divisions");
          if (divisions <= 0) fail(Errc::parse, "unparseable divisions '" + *d + "'");
        }
        if (auto s = node.get_optional<std::string>("staves")) {
          out.staves = std::max<int>(out.staves, static_cast<int>(parse_long(*s, "staves")));
        }
      } else if (tag == "backup") {
        cursor -= duration_of(node);
        if (cursor < Beats(0)) fail(Errc::parse, "backup before the start of the part");
      } else if (tag == "forward") {
        cursor += duration_of(node);
      } else if (tag == "note") {
        if (node.get_child_optional("grace")) continue;
        const Beats dur = duration_of(node);
        Beats onset = cursor;
        if (node.get_child_optional("chord")) {
          onset = last_onset;
        } else {
          last_onset = cursor;
          cursor += dur;
        }
        const int staff = node.get_optional<std::string>("staff")
                              ? static_cast<int>(parse_long(node.get<std::string>("staff"), "staff"))
                              : 1;
        out.staves = std::max(out.staves, staff);
        const auto pitch = node.get_child_optional("pitch");
        if (node.get_child_optional("rest") || !pitch) {
          extent = std::max(extent, cursor);
          continue;
        }
        const int midi = midi_from_pitch(*pitch);

        bool tie_start = false;
        bool tie_stop = false;
        for (const auto& [ttag, tie] : node) {
          if (ttag != "tie") continue;
          const auto type = attribute(tie, "type");
          if (type == "start") tie_start = true;
          if (type == "stop") tie_stop = true;
        }
        if (!tie_start && !tie_stop) {
          if (auto notations = node.get_child_optional("notations")) {
            for (const auto& [ttag, tied] : *notations) {
              if (ttag != "tied") continue;
              const auto type = attribute(tied, "type");
              if (type == "start") tie_start = true;
              if (type == "stop") tie_stop = true;
            }
          }
        }

        auto& stream = out.by_staff[staff];
        const auto key = std::make_pair(staff, midi);
        const auto open = pending_ties.find(key);
        if (tie_stop && open != pending_ties.end()) {
          stream[open->second].duration += on_grid(dur);
          if (!tie_start) pending_ties.erase(open);
        } else {
          const Beats grid_dur = on_grid(dur);
          if (grid_dur <= Beats(0)) fail(Errc::parse, "note with zero duration");
          stream.push_back(NoteEvent{Pitch(midi), on_grid(onset), grid_dur});
          if (tie_start) pending_ties[key] = stream.size() - 1;
        }
      }
      extent = std::max(extent, cursor);
    }
    cursor = extent;
  }
  return out;
}

// First tempo marking in document order: <sound tempo> or <metronome>.
std::optional<double> find_tempo(const pt::ptree& node) {
  for (const auto& [tag, child] : node) {
    if (tag == "sound") {
      if (auto t = attribute(child, "tempo")) {
        const double bpm = parse_real(*t, "tempo");
        if (bpm > 0.0) return bpm;
      }
    } else if (tag == "metronome") {
      const auto per_minute = child.get_optional<std::string>("per-minute");
      const auto unit = child.get_optional<std::string>("beat-unit");
      if (per_minute && unit) {
        static const std::map<std::string, double> kQuarters = {
            {"whole", 4.0}, {"half", 2.0}, {"quarter", 1.0}, {"eighth", 0.5}, {"16th", 0.25}};
        const auto it = kQuarters.find(trimmed(*unit));
        if (it != kQuarters.end()) {
          double quarters = it->second;
          if (child.get_child_optional("beat-unit-dot")) quarters *= 1.5;
          const double bpm = parse_real(*per_minute, "metronome per-minute") * quarters;
          if (bpm > 0.0) return bpm;
        }
      }
    } else if (tag != "<xmlattr>" && tag != "<xmlcomment>") {
      if (auto t = find_tempo(child)) return t;
    }
  }
  return std::nullopt;
}

}  // namespace

Piece parse_musicxml(std::string_view text, std::string id) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(Errc::parse, std::string("malformed XML: ") + e.what());
  }
  const auto root = tree.get_child_optional("score-partwise");
  if (!root) fail(Errc::parse, "expected a score-partwise document");

  std::vector<PartEvents> parts;
  for (const auto& [tag, part] : *root) {
    if (tag == "part") parts.push_back(parse_part(part));
  }

  auto stream = [](PartEvents& part, int staff) {
    auto it = part.by_staff.find(staff);
    return it == part.by_staff.end() ? std::vector<NoteEvent>{} : std::move(it->second);
  };

  Piece piece;
  piece.id = std::move(id);
  if (parts.size() == 1 && parts[0].staves == 2) {
    piece.right = HandPart(Hand::right, stream(parts[0], 1));
    piece.left = HandPart(Hand::left, stream(parts[0], 2));
  } else if (parts.size() == 2 && parts[0].staves == 1 && parts[1].staves == 1) {
    piece.right = HandPart(Hand::right, stream(parts[0], 1));
    piece.left = HandPart(Hand::left, stream(parts[1], 1));
  } else {
    std::size_t streams = 0;
    for (const auto& p : parts) streams += static_cast<std::size_t>(p.staves);
    fail(Errc::unsupported_layout, "found " + std::to_string(parts.size()) + " part(s) with " +
                                       std::to_string(streams) + " staff stream(s); need exactly two hands");
  }
  piece.tempo_bpm = find_tempo(*root);
  return piece;
}

}  // namespace rubricnet
