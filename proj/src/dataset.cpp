#include "gumbelcf/dataset.hpp"

#include <fstream>
#include <set>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::harness {

nlohmann::json to_json(const DatasetRecord& r) {
  nlohmann::json doc{
      {"id", r.id},
      {"prompt", r.prompt},
      {"reference", r.reference},
      {"intervened_prompt", r.intervened_prompt},
  };
  if (r.source_score) doc["source_score"] = *r.source_score;
  if (r.target_score) doc["target_score"] = *r.target_score;
  if (!r.criterion.empty()) doc["criterion"] = r.criterion;
  return doc;
}

DatasetRecord record_from_json(const nlohmann::json& doc) {
  DatasetRecord r;
  for (const char* field : {"id", "prompt", "reference", "intervened_prompt"}) {
    if (!doc.contains(field)) {
      throw FormatError(std::string("dataset record missing field \"") + field + "\"");
    }
  }
  r.id = doc.at("id").get<std::string>();
  r.prompt = doc.at("prompt").get<std::string>();
  r.reference = doc.at("reference").get<std::string>();
  r.intervened_prompt = doc.at("intervened_prompt").get<std::string>();
  if (r.reference.empty()) throw FormatError("dataset record has empty \"reference\"");
  if (doc.contains("source_score")) r.source_score = doc.at("source_score").get<int>();
  if (doc.contains("target_score")) r.target_score = doc.at("target_score").get<int>();
  if (doc.contains("criterion")) r.criterion = doc.at("criterion").get<std::string>();
  return r;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset: " + path);

  std::vector<DatasetRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_number) + ": invalid JSON: " + e.what());
    }
    DatasetRecord r;
    try {
      r = record_from_json(doc);
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(line_number) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_number) + ": bad field type: " + e.what());
    }
    if (!seen_ids.insert(r.id).second) {
      throw FormatError(path + ":" + std::to_string(line_number) + ": duplicate record id \"" +
                        r.id + "\"");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void save_dataset(std::span<const DatasetRecord> records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

}  // namespace gumbelcf::harness
