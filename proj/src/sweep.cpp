#include "gumbelcf/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"
#include "gumbelcf/ngram.hpp"
#include "gumbelcf/remote.hpp"
#include "gumbelcf/testbed.hpp"

namespace gumbelcf::harness {

namespace fs = std::filesystem;

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json model;
  if (!c.toy_model_path.empty()) model["toy"] = c.toy_model_path;
  if (!c.testbed_dir.empty()) model["testbed"] = c.testbed_dir;
  if (!c.remote_endpoint.empty()) model["remote"] = c.remote_endpoint;

  nlohmann::json methods = nlohmann::json::array();
  for (auto m : c.methods) methods.push_back(hindsight::to_string(m));

  return nlohmann::json{
      {"model", model},
      {"methods", methods},
      {"betas", c.betas},
      {"alphas", c.alphas},
      {"temperature", c.temperature},
      {"max_len", c.max_len},
      {"include_reference_in_prompt", c.include_reference_in_prompt},
      {"seed", c.seed},
      {"workers", c.workers},
      {"retries", c.retries},
      {"record_timing", c.record_timing},
      {"dataset", c.dataset_path},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  try {
    const auto& model = doc.at("model");
    if (model.contains("toy")) c.toy_model_path = model["toy"].get<std::string>();
    if (model.contains("testbed")) c.testbed_dir = model["testbed"].get<std::string>();
    if (model.contains("remote")) c.remote_endpoint = model["remote"].get<std::string>();
    for (const auto& m : doc.at("methods")) {
      c.methods.push_back(hindsight::method_from_string(m.get<std::string>()));
    }
    if (doc.contains("betas")) c.betas = doc["betas"].get<std::vector<double>>();
    if (doc.contains("alphas")) c.alphas = doc["alphas"].get<std::vector<double>>();
    if (doc.contains("temperature")) c.temperature = doc["temperature"].get<double>();
    if (doc.contains("max_len")) c.max_len = doc["max_len"].get<uint32_t>();
    if (doc.contains("include_reference_in_prompt")) {
      c.include_reference_in_prompt = doc["include_reference_in_prompt"].get<bool>();
    }
    if (doc.contains("seed")) c.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("workers")) c.workers = doc["workers"].get<int>();
    if (doc.contains("retries")) c.retries = doc["retries"].get<int>();
    if (doc.contains("record_timing")) c.record_timing = doc["record_timing"].get<bool>();
    if (doc.contains("dataset")) c.dataset_path = doc["dataset"].get<std::string>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("experiment config: invalid JSON in " + path + ": " + e.what());
  }
  return config_from_json(doc);
}

void validate(const ExperimentConfig& c) {
  int sources = (!c.toy_model_path.empty()) + (!c.testbed_dir.empty()) +
                (!c.remote_endpoint.empty());
  if (sources != 1) {
    throw ConfigError("experiment config: exactly one model source (toy | testbed | remote)");
  }
  if (c.methods.empty()) throw ConfigError("experiment config: methods must be non-empty");
  for (auto m : c.methods) {
    if (m == hindsight::Method::BetaHindsight && c.betas.empty()) {
      throw ConfigError("experiment config: beta-hindsight listed but betas is empty");
    }
    if (m == hindsight::Method::VocabBias && c.alphas.empty()) {
      throw ConfigError("experiment config: vocab-bias listed but alphas is empty");
    }
  }
  if (!(c.temperature > 0.0)) throw ConfigError("experiment config: temperature must be > 0");
  if (c.max_len == 0) throw ConfigError("experiment config: max_len must be positive");
  if (c.workers < 1) throw ConfigError("experiment config: workers must be >= 1");
  if (c.retries < 0) throw ConfigError("experiment config: retries must be >= 0");
  for (double b : c.betas) {
    if (!(b >= 0.0)) throw ConfigError("experiment config: betas must be >= 0");
    if (b > 1.0) {
      std::cerr << "warning: beta " << b
                << " exceeds 1.0; heavy noise amplification degrades fluency\n";
    }
  }
  for (double a : c.alphas) {
    if (!(a >= 0.0)) throw ConfigError("experiment config: alphas must be >= 0");
  }
}

namespace {

struct Cell {
  hindsight::Method method;
  double param;
};

struct LoadedModel {
  model::ModelPtr shared;                               // toy/testbed: shared across workers
  std::function<model::ModelPtr()> per_worker;          // remote: one connection per worker
  std::optional<std::vector<double>> scorer_thresholds; // testbed rule scorer
};

LoadedModel load_model_source(const ExperimentConfig& c) {
  LoadedModel out;
  if (!c.toy_model_path.empty()) {
    out.shared = std::make_shared<model::NgramModel>(model::NgramModel::load(c.toy_model_path));
  } else if (!c.testbed_dir.empty()) {
    auto bundle = testbed::load_bundle(c.testbed_dir);
    out.shared = bundle.model;
    out.scorer_thresholds = bundle.thresholds;
  } else {
    out.per_worker = [endpoint = c.remote_endpoint] { return model::connect_remote(endpoint); };
  }
  return out;
}

struct JobResult {
  bool ok = false;
  hindsight::GenerationRecord record;
  double similarity = 0.0;
  double seconds = 0.0;
};

std::string format_double(double x, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

}  // namespace

std::string results_csv(const ResultsTable& table, bool with_timing) {
  std::string csv = "method,param,n,mean_similarity,qwk,seconds\n";
  for (const auto& row : table.rows) {
    csv += hindsight::to_string(row.method);
    csv += "," + format_double(row.param, "%g");
    csv += "," + std::to_string(row.n);
    csv += "," + format_double(row.mean_similarity, "%.6f");
    csv += "," + (std::isnan(row.qwk) ? std::string("nan") : format_double(row.qwk, "%.6f"));
    csv += "," + format_double(with_timing ? row.seconds : 0.0, "%.3f");
    csv += "\n";
  }
  return csv;
}

std::string records_jsonl(const ResultsTable& table, const Vocab& vocab) {
  std::string out;
  for (const auto& r : table.records) {
    nlohmann::json doc{
        {"id", r.id},
        {"method", hindsight::to_string(r.method)},
        {"param", r.beta},
        {"prompt", vocab.decode(r.prompt)},
        {"intervened_prompt", vocab.decode(r.intervened_prompt)},
        {"reference", vocab.decode(r.reference)},
        {"output", vocab.decode(r.output)},
        {"truncated", r.truncated},
        {"seed", r.seed},
        {"similarity", metrics::similarity(vocab.decode(r.reference), vocab.decode(r.output))},
    };
    if (r.source_score) doc["source_score"] = *r.source_score;
    if (r.target_score) doc["target_score"] = *r.target_score;
    if (r.achieved_score) doc["achieved_score"] = *r.achieved_score;
    if (!r.criterion.empty()) doc["criterion"] = r.criterion;
    out += doc.dump();
    out += "\n";
  }
  return out;
}

ResultsTable run_sweep(const ExperimentConfig& config) {
  validate(config);
  LoadedModel source = load_model_source(config);

  std::string dataset_path = config.dataset_path;
  if (dataset_path.empty() && !config.testbed_dir.empty()) {
    dataset_path = (fs::path(config.testbed_dir) / "dataset.jsonl").string();
  }
  if (dataset_path.empty()) throw ConfigError("experiment config: dataset path required");
  std::vector<DatasetRecord> dataset = load_dataset(dataset_path);

  std::vector<Cell> cells;
  for (auto m : config.methods) {
    switch (m) {
      case hindsight::Method::BetaHindsight:
        for (double b : config.betas) cells.push_back({m, b});
        break;
      case hindsight::Method::VocabBias:
        for (double a : config.alphas) cells.push_back({m, a});
        break;
      case hindsight::Method::Sample:
        cells.push_back({m, config.temperature});
        break;
      case hindsight::Method::Greedy:
        cells.push_back({m, 0.0});
        break;
    }
  }

  std::vector<std::vector<JobResult>> results(cells.size());
  for (auto& cell_results : results) cell_results.resize(dataset.size());

  const size_t total_jobs = cells.size() * dataset.size();
  std::atomic<size_t> next_job{0};
  std::mutex log_mutex;
  std::atomic<bool> fatal{false};
  std::string fatal_message;

  auto run_one = [&](const model::Model& m, const Cell& cell,
                     const DatasetRecord& rec) -> JobResult {
    JobResult out;
    auto started = std::chrono::steady_clock::now();

    const Vocab& vocab = m.vocab();
    TokenSeq prompt = vocab.encode(rec.prompt);
    TokenSeq intervened = vocab.encode(rec.intervened_prompt);
    TokenSeq reference = vocab.encode(rec.reference);
    if (config.include_reference_in_prompt) {
      prompt.insert(prompt.end(), reference.begin(), reference.end());
      intervened.insert(intervened.end(), reference.begin(), reference.end());
    }
    reference.push_back(vocab.eos());  // recovery requires eos-terminated references

    hindsight::DecodeParams params;
    params.max_len = std::max<uint32_t>(config.max_len, static_cast<uint32_t>(reference.size()));
    params.include_reference_in_prompt = config.include_reference_in_prompt;

    hindsight::GenerationRecord generated;
    switch (cell.method) {
      case hindsight::Method::BetaHindsight: {
        params.beta = cell.param;
        generated = hindsight::beta_hindsight(m, prompt, reference, intervened, params,
                                              {config.seed, rec.id});
        break;
      }
      case hindsight::Method::Sample: {
        auto stream = rng::derive_stream(config.seed, rec.id, "sample", 0);
        DecodeResult d = decoders::sample_decode(m, intervened, cell.param, params, stream);
        generated.output = std::move(d.tokens);
        generated.truncated = d.truncated;
        break;
      }
      case hindsight::Method::Greedy: {
        DecodeResult d = decoders::greedy_decode(m, intervened, params);
        generated.output = std::move(d.tokens);
        generated.truncated = d.truncated;
        break;
      }
      case hindsight::Method::VocabBias: {
        auto stream = rng::derive_stream(config.seed, rec.id, "vocab-bias", 0);
        auto bias = decoders::make_vocab_bias(reference, cell.param);
        DecodeResult d = decoders::vocab_bias_decode(m, intervened, bias, params, stream);
        generated.output = std::move(d.tokens);
        generated.truncated = d.truncated;
        break;
      }
    }

    generated.id = rec.id;
    generated.method = cell.method;
    generated.beta = cell.param;
    generated.seed = config.seed;
    generated.prompt = std::move(prompt);
    generated.intervened_prompt = std::move(intervened);
    generated.reference = std::move(reference);
    generated.source_score = rec.source_score;
    generated.target_score = rec.target_score;
    generated.criterion = rec.criterion;
    if (source.scorer_thresholds) {
      generated.achieved_score =
          testbed::rule_score(vocab.decode(generated.output), *source.scorer_thresholds);
    }

    out.similarity = metrics::similarity(rec.reference, vocab.decode(generated.output));
    out.record = std::move(generated);
    out.ok = true;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
  };

  auto worker = [&] {
    model::ModelPtr handle = source.shared ? source.shared : source.per_worker();
    while (!fatal.load()) {
      size_t job = next_job.fetch_add(1);
      if (job >= total_jobs) return;
      size_t cell_idx = job / dataset.size();
      size_t record_idx = job % dataset.size();

      int attempts_left = config.retries;
      while (true) {
        try {
          results[cell_idx][record_idx] =
              run_one(*handle, cells[cell_idx], dataset[record_idx]);
          break;
        } catch (const ConnectionError& e) {
          if (attempts_left-- <= 0) {
            std::lock_guard<std::mutex> lock(log_mutex);
            fatal_message = std::string("connection lost and retry budget exhausted: ") + e.what();
            fatal.store(true);
            return;
          }
          std::lock_guard<std::mutex> lock(log_mutex);
          std::cerr << "warning: reconnecting after: " << e.what() << "\n";
          handle = source.per_worker ? source.per_worker() : handle;
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(log_mutex);
          std::cerr << "warning: record " << dataset[record_idx].id << " skipped: " << e.what()
                    << "\n";
          break;  // JobResult stays !ok
        }
      }
    }
  };

  std::vector<std::thread> pool;
  int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(total_jobs)));
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (fatal.load()) throw ConnectionError(fatal_message);

  int k = source.scorer_thresholds ? static_cast<int>(source.scorer_thresholds->size()) + 1 : 2;

  ResultsTable table;
  table.attempted = total_jobs;
  for (size_t cell_idx = 0; cell_idx < cells.size(); ++cell_idx) {
    ResultRow row;
    row.method = cells[cell_idx].method;
    row.param = cells[cell_idx].param;

    std::vector<int> target, achieved;
    double similarity_sum = 0.0;
    for (auto& result : results[cell_idx]) {
      if (!result.ok) {
        ++row.skipped;
        continue;
      }
      ++row.n;
      similarity_sum += result.similarity;
      row.seconds += result.seconds;
      if (result.record.target_score && result.record.achieved_score) {
        target.push_back(*result.record.target_score);
        achieved.push_back(*result.record.achieved_score);
      }
      table.records.push_back(std::move(result.record));
    }
    row.mean_similarity = row.n ? similarity_sum / static_cast<double>(row.n) : 0.0;
    row.qwk = target.empty() ? std::nan("") : metrics::qwk(achieved, target, k);
    table.skipped += row.skipped;
    table.rows.push_back(row);
  }

  if (!config.output_dir.empty()) {
    fs::create_directories(config.output_dir);
    model::ModelPtr vocab_source = source.shared ? source.shared : source.per_worker();
    std::ofstream csv((fs::path(config.output_dir) / "results.csv").string());
    csv << results_csv(table, config.record_timing);
    std::ofstream jsonl((fs::path(config.output_dir) / "records.jsonl").string());
    jsonl << records_jsonl(table, vocab_source->vocab());
  }
  for (const auto& row : table.rows) {
    std::cerr << "cell " << hindsight::to_string(row.method) << " param=" << row.param
              << " n=" << row.n << " wall=" << format_double(row.seconds, "%.3f") << "s\n";
  }
  return table;
}

std::vector<metrics::ScoredRecord> load_scored_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open records file: " + path);
  std::vector<metrics::ScoredRecord> records;
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
    metrics::ScoredRecord r;
    try {
      r.reference = doc.at("reference").get<std::string>();
      r.output = doc.value("output", std::string{});
      if (doc.contains("target")) r.target = doc["target"].get<int>();
      if (doc.contains("target_score")) r.target = doc["target_score"].get<int>();
      if (doc.contains("achieved")) r.achieved = doc["achieved"].get<int>();
      if (doc.contains("achieved_score")) r.achieved = doc["achieved_score"].get<int>();
      r.criterion = doc.value("criterion", std::string{});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_number) + ": bad field: " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace gumbelcf::harness
