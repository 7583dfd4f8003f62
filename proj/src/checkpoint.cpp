#include <cmath>

#include <json.hpp>

#include "rubricnet/model.hpp"

namespace rubricnet {
namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::checkpoint, what); }

std::vector<double> read_vector(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key) || !doc.at(key).is_array()) fail(std::string("missing array '") + key + "'");
  const auto& arr = doc.at(key);
  if (arr.size() != expected) {
    fail(std::string("'") + key + "' has " + std::to_string(arr.size()) + " entries, expected " +
         std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : arr) {
    if (!v.is_number()) fail(std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

FeatureArray read_array(const json& doc, const char* key) {
  const auto v = read_vector(doc, key, kNumFeatures);
  FeatureArray out;
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

std::string save_checkpoint(const ModelParams& params) {
  json doc = json::object();
  doc["version"] = kCheckpointVersion;
  doc["K"] = params.num_levels;
  if (params.head != Head::ordinal) doc["head"] = std::string(to_string(params.head));
  json order = json::array();
  for (auto name : kFeatureNames) order.push_back(std::string(name));
  doc["feature_order"] = std::move(order);
  doc["w"] = params.w;
  doc["b"] = params.b;
  doc["w_f"] = params.w_f;
  doc["b_f"] = params.b_f;
  doc["scaler"] = {{"mean", params.scaler.mean}, {"std", params.scaler.std}};
  return doc.dump(1) + "\n";
}

ModelParams load_checkpoint(std::string_view text, std::optional<int> expected_levels) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed checkpoint: ") + e.what());
  }
  if (!doc.is_object()) fail("checkpoint must be a JSON object");
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) fail("missing version");
  if (doc.at("version").get<int>() != kCheckpointVersion) {
    fail("unsupported checkpoint version " + doc.at("version").dump());
  }
  if (!doc.contains("K") || !doc.at("K").is_number_integer()) fail("missing K");
  const int levels = doc.at("K").get<int>();
  if (levels < 2) fail("K must be >= 2");
  if (expected_levels && *expected_levels != levels) {
    fail("checkpoint has K=" + std::to_string(levels) + ", expected K=" + std::to_string(*expected_levels));
  }
  Head head = Head::ordinal;
  if (doc.contains("head")) {
    if (!doc.at("head").is_string()) fail("head must be a string");
    try {
      head = parse_head(doc.at("head").get<std::string>());
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  if (!doc.contains("feature_order") || !doc.at("feature_order").is_array() ||
      doc.at("feature_order").size() != kNumFeatures) {
    fail("feature_order must list 12 names");
  }
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto& name = doc.at("feature_order")[i];
    if (!name.is_string() || name.get<std::string>() != kFeatureNames[i]) {
      fail("feature_order mismatch at position " + std::to_string(i));
    }
  }

  ModelParams p;
  p.num_levels = levels;
  p.head = head;
  p.w = read_array(doc, "w");
  p.b = read_array(doc, "b");
  p.w_f = read_vector(doc, "w_f", output_count(levels, head));
  p.b_f = read_vector(doc, "b_f", output_count(levels, head));
  if (!doc.contains("scaler") || !doc.at("scaler").is_object()) fail("missing scaler");
  p.scaler.mean = read_array(doc.at("scaler"), "mean");
  p.scaler.std = read_array(doc.at("scaler"), "std");
  try {
    p.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  return p;
}

}  // namespace rubricnet
