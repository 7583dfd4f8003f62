#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rubricnet/ingest.hpp"
#include "rubricnet/parallel.hpp"

namespace rubricnet {
namespace fs = std::filesystem;

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& file, std::string_view contents) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + file.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::io, "write failed for " + file.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int parse_int_cell(const std::string& cell, const std::string& what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::load, "labels line " + std::to_string(line_no) + ": bad " + what + " '" + cell + "'");
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<LabelRow> parse_labels_csv(std::string_view text, int num_levels) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::load, "labels file is empty");
  const auto header = split_csv_line(line);
  const bool has_fold = header.size() == 3 && header[2] == "fold";
  if (header.size() < 2 || header[0] != "id" || header[1] != "level" || (header.size() == 3 && !has_fold) ||
      header.size() > 3) {
    throw Error(Errc::load, "labels header must be id,level[,fold]");
  }

  std::vector<LabelRow> rows;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::load, "labels line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " columns");
    }
    LabelRow row;
    row.id = cells[0];
    if (row.id.empty()) throw Error(Errc::load, "labels line " + std::to_string(line_no) + ": empty id");
    row.level = parse_int_cell(cells[1], "level", line_no);
    if (row.level < 1 || row.level > num_levels) {
      throw Error(Errc::load, "labels line " + std::to_string(line_no) + ": level " + cells[1] +
                                  " outside [1, " + std::to_string(num_levels) + "]");
    }
    if (has_fold) {
      const int fold = parse_int_cell(cells[2], "fold", line_no);
      if (fold < 0 || fold >= kNumFolds) {
        throw Error(Errc::load, "labels line " + std::to_string(line_no) + ": fold outside [0, 4]");
      }
      row.fold = fold;
    }
    if (!seen.insert(row.id).second) throw Error(Errc::load, "duplicate id '" + row.id + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, int> assign_stratified_folds(const std::vector<std::pair<std::string, int>>& id_levels,
                                                   std::uint64_t seed) {
  std::map<int, std::vector<std::string>> by_level;
  for (const auto& [id, level] : id_levels) by_level[level].push_back(id);

  std::map<std::string, int> folds;
  int dealer = static_cast<int>(seed % kNumFolds);
  for (auto& [level, ids] : by_level) {
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      folds[id] = dealer;
      dealer = (dealer + 1) % kNumFolds;
    }
  }
  return folds;
}

int Corpus::fold_of(const std::string& id) const {
  if (!folds) throw Error(Errc::load, "corpus has no fold assignment");
  const auto it = folds->find(id);
  if (it == folds->end()) throw Error(Errc::load, "no fold for piece '" + id + "'");
  return it->second;
}

std::optional<fs::path> find_score_file(const fs::path& score_dir, const std::string& id) {
  for (const char* ext : {".json", ".musicxml", ".xml"}) {
    fs::path candidate = score_dir / (id + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

Piece load_piece(const fs::path& file, int num_levels, const std::optional<fs::path>& cache_dir) {
  const std::string ext = file.extension().string();
  const std::string text = read_file(file);
  try {
    if (ext == ".json") return parse_canonical_json(text, num_levels);
    if (ext == ".musicxml" || ext == ".xml") {
      const std::string id = file.stem().string();
      if (cache_dir) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
        const fs::path cached = *cache_dir / (id + "-" + hex + ".json");
        if (fs::is_regular_file(cached)) return parse_canonical_json(read_file(cached), num_levels);
        Piece piece = parse_musicxml(text, id);
        write_file(cached, serialize_canonical_json(piece));
        return piece;
      }
      return parse_musicxml(text, id);
    }
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.what());
  }
  throw Error(Errc::load, "unsupported score extension: " + file.string());
}

Corpus load_corpus(const fs::path& score_dir, const fs::path& labels_file, const LoadOptions& options) {
  if (!fs::is_directory(score_dir)) throw Error(Errc::load, "score directory missing: " + score_dir.string());
  if (!fs::is_regular_file(labels_file)) throw Error(Errc::load, "labels file missing: " + labels_file.string());
  const auto rows = parse_labels_csv(read_file(labels_file), options.num_levels);
  if (rows.empty()) throw Error(Errc::load, "labels file lists no pieces");

  Corpus corpus;
  corpus.num_levels = options.num_levels;
  corpus.pieces.resize(rows.size());
  parallel_for(rows.size(), options.jobs, [&](std::size_t i) {
    const auto& row = rows[i];
    const auto file = find_score_file(score_dir, row.id);
    if (!file) throw Error(Errc::load, "no score file for id '" + row.id + "'");
    Piece piece = load_piece(*file, options.num_levels, options.cache_dir);
    piece.id = row.id;
    piece.label = DifficultyLabel::make(row.level, options.num_levels);
    if (piece.right.empty() || piece.left.empty()) {
      throw Error(Errc::load, "piece '" + row.id + "' has an empty hand part");
    }
    corpus.pieces[i] = std::move(piece);
  });
  std::sort(corpus.pieces.begin(), corpus.pieces.end(),
            [](const Piece& a, const Piece& b) { return a.id < b.id; });

  const bool explicit_folds = std::all_of(rows.begin(), rows.end(), [](const LabelRow& r) { return r.fold; });
  if (explicit_folds) {
    std::map<std::string, int> folds;
    for (const auto& r : rows) folds[r.id] = *r.fold;
    corpus.folds = std::move(folds);
  } else {
    std::vector<std::pair<std::string, int>> id_levels;
    for (const auto& r : rows) id_levels.emplace_back(r.id, r.level);
    corpus.folds = assign_stratified_folds(id_levels, options.seed);
  }
  return corpus;
}

}  // namespace rubricnet
