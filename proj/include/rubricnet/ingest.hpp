#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rubricnet/score_model.hpp"

namespace rubricnet {

inline constexpr int kNumFolds = 5;
inline constexpr int kDefaultNumLevels = 9;

// Canonical piece JSON. The label carries only the level, so the parser
// needs the level count of the corpus it belongs to.
Piece parse_canonical_json(std::string_view text, int num_levels = kDefaultNumLevels);
std::string serialize_canonical_json(const Piece& piece);

// Partwise, uncompressed MusicXML. Either one part with two staves
// (staff 1 = right hand, staff 2 = left hand) or two single-staff parts
// (part 1 = right hand, part 2 = left hand).
Piece parse_musicxml(std::string_view text, std::string id);

struct LabelRow {
  std::string id;
  int level = 0;
  std::optional<int> fold;
};

// CSV with header `id,level[,fold]`.
std::vector<LabelRow> parse_labels_csv(std::string_view text, int num_levels);

struct Corpus {
  std::vector<Piece> pieces;  // sorted by id
  int num_levels = kDefaultNumLevels;
  std::optional<std::map<std::string, int>> folds;

  int fold_of(const std::string& id) const;
};

// Deterministic stratified assignment: within each level, ids in sorted
// order are dealt round-robin over the folds. The dealer position starts at
// seed mod 5 and carries over from one level to the next.
std::map<std::string, int> assign_stratified_folds(const std::vector<std::pair<std::string, int>>& id_levels,
                                                   std::uint64_t seed);

struct LoadOptions {
  int num_levels = kDefaultNumLevels;
  std::uint64_t seed = 0;
  int jobs = 1;
  // When set, parsed MusicXML scores are cached here as canonical JSON.
  std::optional<std::filesystem::path> cache_dir;
};

// Reads one score file; the format is chosen by extension (.json, .musicxml, .xml).
Piece load_piece(const std::filesystem::path& file, int num_levels = kDefaultNumLevels,
                 const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

// Locates `<id>.json`, `<id>.musicxml` or `<id>.xml` inside score_dir.
std::optional<std::filesystem::path> find_score_file(const std::filesystem::path& score_dir,
                                                     const std::string& id);

Corpus load_corpus(const std::filesystem::path& score_dir, const std::filesystem::path& labels_file,
                   const LoadOptions& options = {});

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view contents);

}  // namespace rubricnet
