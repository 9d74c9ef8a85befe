#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace gumbelcf::harness {

/**
 * One line of a dataset JSONL file. Text fields are stored verbatim; token
 * encoding happens at run time against whichever model is in play.
 */
struct DatasetRecord {
  std::string id;
  std::string prompt;
  std::string reference;  // non-empty
  std::string intervened_prompt;
  std::optional<int> source_score;
  std::optional<int> target_score;
  std::string criterion;  // empty = unlabeled

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

nlohmann::json to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const nlohmann::json& doc);

/// Parse one JSON document per line. Malformed lines and missing fields raise
/// FormatError naming the line; duplicate ids raise FormatError too.
std::vector<DatasetRecord> load_dataset(const std::string& path);

void save_dataset(std::span<const DatasetRecord> records, const std::string& path);

}  // namespace gumbelcf::harness
