#pragma once

/**
 * Experiment harness: load a config, run every (method, parameter, record)
 * cell over a worker pool, score the outputs, and emit results.csv plus a
 * records.jsonl of raw generations.
 *
 * Determinism contract: every stream is derived from (global seed, record id,
 * stage), results are reduced in canonical (cell, record) order, and the CSV
 * timing column defaults to zeros, so identical config + seed produce
 * byte-identical outputs at any worker count. Setting record_timing trades
 * that byte-stability for measured per-cell wall time in the CSV; measured
 * times always go to the log either way.
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gumbelcf/dataset.hpp"
#include "gumbelcf/hindsight.hpp"
#include "gumbelcf/metrics.hpp"
#include "gumbelcf/model.hpp"

namespace gumbelcf::harness {

struct ExperimentConfig {
  // Exactly one model source.
  std::string toy_model_path;
  std::string testbed_dir;
  std::string remote_endpoint;

  std::vector<hindsight::Method> methods;
  std::vector<double> betas = {0.001, 0.1, 0.2, 0.3, 0.4, 1.0};
  std::vector<double> alphas = {0.01, 5.0, 10.0};
  double temperature = 1.0;
  uint32_t max_len = 256;
  bool include_reference_in_prompt = false;
  uint64_t seed = 0;
  int workers = 1;
  int retries = 3;
  bool record_timing = false;
  std::string dataset_path;  // defaults to the testbed bundle's dataset
  std::string output_dir;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);

struct ResultRow {
  hindsight::Method method = hindsight::Method::Sample;
  double param = 0.0;        // beta, alpha, or temperature depending on method
  size_t n = 0;              // records scored (attempted minus skipped)
  size_t skipped = 0;
  double mean_similarity = 0.0;
  double qwk = 0.0;          // NaN when no scorer produced achieved scores
  double seconds = 0.0;      // summed per-record wall time for the cell
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::vector<hindsight::GenerationRecord> records;  // canonical (cell, record) order
  size_t attempted = 0;
  size_t skipped = 0;
};

/// Header: method,param,n,mean_similarity,qwk,seconds
std::string results_csv(const ResultsTable& table, bool with_timing);

/// Raw records as JSONL (one generation per line, text fields decoded through
/// the vocabulary used for the run).
std::string records_jsonl(const ResultsTable& table, const Vocab& vocab);

/// Run the full sweep; when output_dir is set, writes results.csv and
/// records.jsonl there. Per-record decoder failures are logged and counted,
/// never fatal; connection losses are retried `retries` times, then raised.
ResultsTable run_sweep(const ExperimentConfig& config);

/// Scored-records JSONL for the evaluate path: objects carrying reference,
/// output, target(_score), achieved(_score) and optional criterion.
std::vector<metrics::ScoredRecord> load_scored_records(const std::string& path);

}  // namespace gumbelcf::harness
