// gumbelcf command line tool. One subcommand per pipeline stage: toy-model
// training, testbed construction, noise recovery, replay, one-shot
// counterfactuals, baselines, evaluation, sweeps, and the logit server.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"
#include "gumbelcf/hindsight.hpp"
#include "gumbelcf/metrics.hpp"
#include "gumbelcf/ngram.hpp"
#include "gumbelcf/remote.hpp"
#include "gumbelcf/server.hpp"
#include "gumbelcf/sweep.hpp"
#include "gumbelcf/testbed.hpp"
#include "gumbelcf/trace_io.hpp"

namespace {

using namespace gumbelcf;
namespace fs = std::filesystem;

// "toy:path", "testbed:dir", "remote:endpoint", or inferred from the path.
model::ModelPtr load_model(const std::string& spec) {
  if (spec.rfind("toy:", 0) == 0) {
    return std::make_shared<model::NgramModel>(model::NgramModel::load(spec.substr(4)));
  }
  if (spec.rfind("testbed:", 0) == 0) {
    return testbed::load_bundle(spec.substr(8)).model;
  }
  if (spec.rfind("remote:", 0) == 0) {
    return model::connect_remote(spec.substr(7));
  }
  if (fs::is_directory(spec)) return testbed::load_bundle(spec).model;
  if (fs::exists(spec)) {
    return std::make_shared<model::NgramModel>(model::NgramModel::load(spec));
  }
  if (spec.find(':') != std::string::npos) return model::connect_remote(spec);
  throw ConfigError("cannot interpret model spec \"" + spec +
                    "\" (expected toy:FILE, testbed:DIR, remote:HOST:PORT, or a path)");
}

void warn_large_beta(double beta) {
  if (beta > 1.0) {
    std::cerr << "warning: beta " << beta
              << " exceeds 1.0; heavy noise amplification degrades fluency\n";
  }
}

TokenSeq effective_prompt(const Vocab& vocab, const std::string& prompt_text,
                          const TokenSeq& reference, bool include_reference) {
  TokenSeq prompt = vocab.encode(prompt_text);
  if (include_reference) {
    // Reference body only; the trailing eos never belongs in a prompt.
    prompt.insert(prompt.end(), reference.begin(), reference.end() - 1);
  }
  return prompt;
}

TokenSeq encode_reference(const Vocab& vocab, const std::string& text) {
  TokenSeq reference = vocab.encode(text);
  if (reference.empty()) throw InputError("reference must be non-empty");
  reference.push_back(vocab.eos());
  return reference;
}

void print_report(const metrics::EvalReport& report) {
  std::printf("records scored: %zu (skipped %zu)\n", report.n, report.skipped);
  std::printf("mean similarity: %.6f\n", report.mean_similarity);
  std::printf("macro QWK: %.6f\n", report.qwk);
  for (const auto& criterion : report.per_criterion) {
    std::printf("  criterion %-16s n=%-6zu similarity=%.6f qwk=%.6f\n",
                criterion.criterion.empty() ? "(unlabeled)" : criterion.criterion.c_str(),
                criterion.n, criterion.mean_similarity, criterion.qwk);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual decoding via recovered Gumbel noise"};
  app.require_subcommand(1);

  // ---- train-toy -----------------------------------------------------------
  auto* train = app.add_subcommand("train-toy", "Train a byte-level n-gram model");
  std::string train_corpus, train_out;
  int train_order = 3;
  double train_smoothing = 0.01;
  bool train_per_line = false;
  train->add_option("--corpus", train_corpus, "Training text file")->required();
  train->add_option("--out", train_out, "Output model JSON")->required();
  train->add_option("--order", train_order, "n-gram order (context = order-1 tokens)");
  train->add_option("--smoothing", train_smoothing, "Laplace smoothing > 0");
  train->add_flag("--per-line", train_per_line, "Treat each line as its own sequence");

  // ---- make-testbed --------------------------------------------------------
  auto* make = app.add_subcommand("make-testbed", "Build a synthetic ordinal-scoring testbed");
  std::string make_out;
  testbed::TestbedSpec spec;
  size_t make_cap = 240;
  make->add_option("--out", make_out, "Output bundle directory")->required();
  make->add_option("--seed", spec.seed, "Generation seed");
  make->add_option("--cap", make_cap, "Total transition-dataset records");
  make->add_option("--k", spec.k, "Number of score classes");
  make->add_option("--mean-len", spec.mean_len, "Mean sequence length");
  make->add_option("--corpus-chars", spec.corpus_chars_per_class, "Corpus characters per class");
  make->add_option("--order", spec.ngram_order, "Class model n-gram order");
  make->add_option("--smoothing", spec.smoothing, "Class model smoothing");
  make->add_option("--structure", spec.structure_weight, "Successor-structure weight [0,1)");
  make->add_option("--persistence", spec.register_persistence, "Register run persistence [0,1)");
  make->add_option("--branch", spec.branch_secondary, "Secondary-successor probability [0,0.5]");

  // ---- shared generation options ------------------------------------------
  std::string model_spec, prompt_text, reference_text, intervened_text, record_id = "cli";
  uint64_t seed = 0;
  uint32_t max_len = 256;
  bool include_reference = false;

  auto add_generation_options = [&](CLI::App* cmd, bool with_intervened) {
    cmd->add_option("--model", model_spec, "Model: toy:FILE | testbed:DIR | remote:HOST:PORT")
        ->required();
    cmd->add_option("--prompt", prompt_text, "Prompt text");
    if (with_intervened) {
      cmd->add_option("--intervened-prompt", intervened_text, "Prompt after the intervention")
          ->required();
    }
    cmd->add_option("--seed", seed, "Global seed");
    cmd->add_option("--record-id", record_id, "Record id for stream derivation");
    cmd->add_option("--max-len", max_len, "Generation length cap");
    cmd->add_flag("--include-reference", include_reference,
                  "Append the reference to both prompts (recovery and replay)");
  };

  // ---- recover -------------------------------------------------------------
  auto* recover = app.add_subcommand("recover", "Recover a noise trace for a reference");
  std::string recover_out;
  add_generation_options(recover, false);
  recover->add_option("--reference", reference_text, "Reference text")->required();
  recover->add_option("--out", recover_out, "Output trace file")->required();

  // ---- replay ---------------------------------------------------------------
  auto* replay_cmd = app.add_subcommand("replay", "Replay a stored trace under a new prompt");
  std::string replay_trace;
  double beta = 1.0;
  add_generation_options(replay_cmd, true);
  replay_cmd->add_option("--trace", replay_trace, "Trace file from `recover`")->required();
  replay_cmd->add_option("--beta", beta, "Noise scale (>= 0)");
  replay_cmd->add_option("--reference", reference_text,
                         "Reference text (only needed with --include-reference)");

  // ---- cf --------------------------------------------------------------------
  auto* cf = app.add_subcommand("cf", "One-shot counterfactual: recover then replay");
  add_generation_options(cf, true);
  cf->add_option("--reference", reference_text, "Reference text")->required();
  cf->add_option("--beta", beta, "Noise scale (>= 0)");

  // ---- baseline ---------------------------------------------------------------
  auto* baseline = app.add_subcommand("baseline", "Run a comparison decoder");
  std::string baseline_method = "sample";
  double alpha = 0.0, temperature = 1.0;
  add_generation_options(baseline, false);
  baseline->add_option("--method", baseline_method, "sample | greedy | vocab-bias");
  baseline->add_option("--reference", reference_text, "Reference text (vocab-bias)");
  baseline->add_option("--alpha", alpha, "Vocab-bias logit boost");
  baseline->add_option("--temperature", temperature, "Sampling temperature");

  // ---- evaluate ----------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Score a JSONL of generations");
  std::string eval_records;
  int eval_classes = 4;
  evaluate->add_option("--records", eval_records, "JSONL with reference/output/target/achieved")
      ->required();
  evaluate->add_option("--classes", eval_classes, "Ordinal scale size k");

  // ---- sweep -------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Run a full experiment grid from a config");
  std::string sweep_config;
  int sweep_workers = 0;
  int64_t sweep_seed = -1;
  std::string sweep_output;
  sweep->add_option("--config", sweep_config, "Experiment config JSON")->required();
  sweep->add_option("--workers", sweep_workers, "Override worker count");
  sweep->add_option("--seed", sweep_seed, "Override global seed");
  sweep->add_option("--output-dir", sweep_output, "Override output directory");

  // ---- serve-logits ---------------------------------------------------------------
  auto* serve = app.add_subcommand("serve-logits", "Serve a model over the wire protocol");
  std::string serve_model, serve_listen = "127.0.0.1:7777";
  bool serve_stdio = false;
  serve->add_option("--model", serve_model, "Model spec")->required();
  serve->add_option("--listen", serve_listen, "host:port to listen on");
  serve->add_flag("--stdio", serve_stdio, "Speak the protocol on stdin/stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      model::NgramModel m = [&] {
        std::ifstream in(train_corpus);
        if (!in) throw InputError("cannot open corpus: " + train_corpus);
        if (train_per_line) {
          std::vector<std::string> lines;
          for (std::string line; std::getline(in, line);) {
            if (!line.empty()) lines.push_back(line);
          }
          return model::NgramModel::train_texts(lines, train_order, train_smoothing);
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return model::NgramModel::train_text(text, train_order, train_smoothing);
      }();
      m.save(train_out);
      std::fprintf(stderr, "trained order-%d model over %d symbols -> %s\n", m.order(),
                   m.vocab().size(), train_out.c_str());
      return 0;
    }

    if (*make) {
      auto bundle = testbed::build_testbed(spec);
      auto stream = rng::derive_stream(spec.seed, "testbed", "dataset", 0);
      bundle.dataset = testbed::build_transition_dataset(bundle, make_cap, stream);
      testbed::save_bundle(bundle, make_out);
      std::fprintf(stderr, "testbed bundle with %d classes and %zu records -> %s\n", spec.k,
                   bundle.dataset.size(), make_out.c_str());
      return 0;
    }

    if (*recover) {
      auto m = load_model(model_spec);
      TokenSeq reference = encode_reference(m->vocab(), reference_text);
      TokenSeq prompt = effective_prompt(m->vocab(), prompt_text, reference, include_reference);
      auto stream = rng::derive_stream(seed, record_id, hindsight::kStageRecover, 0);
      auto trace = hindsight::recover_noise(*m, prompt, reference, stream);
      trace.provenance = hindsight::SeedInfo{seed, record_id};
      harness::write_trace(trace, recover_out);
      std::fprintf(stderr, "recovered %zu steps x %u tokens -> %s\n", trace.steps(),
                   trace.vocab_size, recover_out.c_str());
      return 0;
    }

    if (*replay_cmd) {
      warn_large_beta(beta);
      auto m = load_model(model_spec);
      auto trace = harness::read_trace(replay_trace);
      TokenSeq reference =
          reference_text.empty() ? trace.reference : encode_reference(m->vocab(), reference_text);
      TokenSeq intervened =
          effective_prompt(m->vocab(), intervened_text, reference, include_reference);
      hindsight::DecodeParams params;
      params.beta = beta;
      params.max_len = std::max<uint32_t>(max_len, static_cast<uint32_t>(trace.steps()));
      auto stream = rng::derive_stream(seed, record_id, hindsight::kStageReplayCont, 0);
      auto out = hindsight::replay(*m, intervened, trace, params, stream);
      if (out.truncated) std::fprintf(stderr, "note: output truncated at max_len\n");
      std::printf("%s\n", m->vocab().decode(out.tokens).c_str());
      return 0;
    }

    if (*cf) {
      warn_large_beta(beta);
      auto m = load_model(model_spec);
      TokenSeq reference = encode_reference(m->vocab(), reference_text);
      TokenSeq prompt = effective_prompt(m->vocab(), prompt_text, reference, include_reference);
      TokenSeq intervened =
          effective_prompt(m->vocab(), intervened_text, reference, include_reference);
      hindsight::DecodeParams params;
      params.beta = beta;
      params.max_len = std::max<uint32_t>(max_len, static_cast<uint32_t>(reference.size()));
      auto record = hindsight::beta_hindsight(*m, prompt, reference, intervened, params,
                                              {seed, record_id});
      std::string output = m->vocab().decode(record.output);
      std::fprintf(stderr, "similarity to reference: %.4f%s\n",
                   metrics::similarity(reference_text, output),
                   record.truncated ? " (truncated)" : "");
      std::printf("%s\n", output.c_str());
      return 0;
    }

    if (*baseline) {
      auto m = load_model(model_spec);
      TokenSeq reference;
      if (!reference_text.empty()) reference = encode_reference(m->vocab(), reference_text);
      TokenSeq prompt = include_reference && !reference.empty()
                            ? effective_prompt(m->vocab(), prompt_text, reference, true)
                            : m->vocab().encode(prompt_text);
      hindsight::DecodeParams params;
      params.max_len = max_len;
      DecodeResult out;
      if (baseline_method == "greedy") {
        out = decoders::greedy_decode(*m, prompt, params);
      } else if (baseline_method == "sample") {
        auto stream = rng::derive_stream(seed, record_id, "sample", 0);
        out = decoders::sample_decode(*m, prompt, temperature, params, stream);
      } else if (baseline_method == "vocab-bias") {
        if (reference.empty()) throw ConfigError("vocab-bias needs --reference");
        auto stream = rng::derive_stream(seed, record_id, "vocab-bias", 0);
        out = decoders::vocab_bias_decode(*m, prompt, decoders::make_vocab_bias(reference, alpha),
                                          params, stream);
      } else {
        throw ConfigError("unknown baseline method: " + baseline_method);
      }
      if (out.truncated) std::fprintf(stderr, "note: output truncated at max_len\n");
      std::printf("%s\n", m->vocab().decode(out.tokens).c_str());
      return 0;
    }

    if (*evaluate) {
      auto records = harness::load_scored_records(eval_records);
      print_report(metrics::aggregate(records, eval_classes));
      return 0;
    }

    if (*sweep) {
      auto config = harness::load_config(sweep_config);
      if (sweep_workers > 0) config.workers = sweep_workers;
      if (sweep_seed >= 0) config.seed = static_cast<uint64_t>(sweep_seed);
      if (!sweep_output.empty()) config.output_dir = sweep_output;
      auto table = harness::run_sweep(config);
      std::fputs(harness::results_csv(table, config.record_timing).c_str(), stdout);
      return 0;
    }

    if (*serve) {
      auto m = load_model(serve_model);
      harness::serve_logits(m, serve_stdio ? "stdio" : serve_listen);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
