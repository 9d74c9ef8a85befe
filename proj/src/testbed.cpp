#include "gumbelcf/testbed.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"

namespace gumbelcf::testbed {

namespace fs = std::filesystem;

namespace {

constexpr Token kLetterCount = 26;
constexpr Token kHighGroupSize = 13;  // 'a'..'m'; 'n'..'z' is the low group

Vocab shared_vocab(int k) {
  std::vector<std::string> symbols;
  symbols.reserve(static_cast<size_t>(kLetterCount + 2 + k));
  for (char c = 'a'; c <= 'z'; ++c) symbols.emplace_back(1, c);
  auto bos = static_cast<Token>(symbols.size());
  symbols.emplace_back("<bos>");
  auto eos = static_cast<Token>(symbols.size());
  symbols.emplace_back("<eos>");
  for (int c = 1; c <= k; ++c) symbols.push_back("<" + std::to_string(c) + ">");
  return Vocab(std::move(symbols), bos, eos);
}

void require_ascending_unit(const std::vector<double>& xs, const char* name) {
  double prev = 0.0;
  for (double x : xs) {
    if (!(x > prev && x < 1.0)) {
      throw ConfigError(std::string("testbed spec: ") + name +
                        " must be strictly ascending within (0,1)");
    }
    prev = x;
  }
}

size_t geometric_length(double mean_len, rng::UniformStream& stream) {
  double p = 1.0 / mean_len;
  double len = 1.0 + std::floor(std::log(stream.next()) / std::log1p(-p));
  return static_cast<size_t>(std::min(len, 100000.0));
}

}  // namespace

void validate(const TestbedSpec& spec) {
  if (spec.k < 2) throw ConfigError("testbed spec: k must be >= 2");
  if (spec.class_mix.size() != static_cast<size_t>(spec.k)) {
    throw ConfigError("testbed spec: class_mix must have k entries");
  }
  if (spec.thresholds.size() != static_cast<size_t>(spec.k - 1)) {
    throw ConfigError("testbed spec: thresholds must have k-1 entries");
  }
  require_ascending_unit(spec.class_mix, "class_mix");
  require_ascending_unit(spec.thresholds, "thresholds");
  if (!(spec.mean_len > 1.0)) throw ConfigError("testbed spec: mean_len must exceed 1");
  if (spec.corpus_chars_per_class == 0) {
    throw ConfigError("testbed spec: corpus_chars_per_class must be positive");
  }
  if (spec.ngram_order < 1) throw ConfigError("testbed spec: ngram_order must be >= 1");
  if (!(spec.smoothing > 0.0)) throw ConfigError("testbed spec: smoothing must be > 0");
  if (!(spec.structure_weight >= 0.0 && spec.structure_weight < 1.0)) {
    throw ConfigError("testbed spec: structure_weight must lie in [0,1)");
  }
  if (!(spec.register_persistence >= 0.0 && spec.register_persistence < 1.0)) {
    throw ConfigError("testbed spec: register_persistence must lie in [0,1)");
  }
  if (!(spec.branch_secondary >= 0.0 && spec.branch_secondary <= 0.5)) {
    throw ConfigError("testbed spec: branch_secondary must lie in [0,0.5]");
  }
}

ConditionedModel::ConditionedModel(std::vector<model::NgramModel> class_models,
                                   std::vector<Token> control_tokens)
    : class_models_(std::move(class_models)), control_tokens_(std::move(control_tokens)) {
  if (class_models_.empty() || class_models_.size() != control_tokens_.size()) {
    throw ConfigError("ConditionedModel: one control token per class model required");
  }
  const Vocab& v = class_models_.front().vocab();
  for (const auto& m : class_models_) {
    if (!(m.vocab() == v)) {
      throw ConfigError("ConditionedModel: class models must share one vocabulary");
    }
  }
  for (Token c : control_tokens_) {
    if (!v.contains(c)) throw ConfigError("ConditionedModel: control token outside vocabulary");
  }
  std::string material = "gumbelcf-conditioned";
  for (size_t i = 0; i < class_models_.size(); ++i) {
    material += "|" + std::to_string(control_tokens_[i]) + ":" +
                to_hex(class_models_[i].fingerprint());
  }
  fingerprint_ = sha256(material);
}

Token ConditionedModel::control_token(int score_class) const {
  if (score_class < 1 || score_class > num_classes()) {
    throw DomainError("control_token: class " + std::to_string(score_class) + " outside 1.." +
                      std::to_string(num_classes()));
  }
  return control_tokens_[static_cast<size_t>(score_class - 1)];
}

const model::NgramModel& ConditionedModel::class_model(int score_class) const {
  if (score_class < 1 || score_class > num_classes()) {
    throw DomainError("class_model: class " + std::to_string(score_class) + " outside 1.." +
                      std::to_string(num_classes()));
  }
  return class_models_[static_cast<size_t>(score_class - 1)];
}

model::LogitVector ConditionedModel::next_logits(std::span<const Token> context) const {
  const Vocab& v = vocab();
  model::check_context(context, v);

  auto control_index = [this](Token t) -> int {
    for (size_t i = 0; i < control_tokens_.size(); ++i) {
      if (control_tokens_[i] == t) return static_cast<int>(i);
    }
    return -1;
  };

  // The control token rides directly behind bos as the first prompt token.
  if (context.size() < 2 || context[0] != v.bos() || control_index(context[1]) < 0) {
    throw ModelError("conditioned model: context must start with bos + control token");
  }
  int selected = control_index(context[1]);

  // The class table never saw control ids; strip them before evaluation.
  TokenSeq stripped;
  stripped.reserve(context.size());
  stripped.push_back(v.bos());
  for (size_t i = 1; i < context.size(); ++i) {
    Token t = context[i];
    if (t == v.bos() || control_index(t) >= 0) continue;
    stripped.push_back(t);
  }
  return class_models_[static_cast<size_t>(selected)].next_logits(stripped);
}

TestbedBundle build_testbed(const TestbedSpec& spec) {
  validate(spec);
  Vocab vocab = shared_vocab(spec.k);

  // Within-group successor tables, shared by every class. The successor of a
  // letter is the same token everywhere; only its class-conditional weight
  // moves with the class mix.
  std::array<Token, kLetterCount> successor_high{}, successor_low{};
  std::array<Token, kLetterCount> alternate_high{}, alternate_low{};
  {
    rng::UniformStream structure =
        rng::derive_stream(spec.seed, "testbed", "structure", 0);
    for (int i = 0; i < kLetterCount; ++i) {
      auto pick = [&structure] {
        auto offset = static_cast<Token>(structure.next() * kHighGroupSize);
        return std::min(offset, static_cast<Token>(kHighGroupSize - 1));
      };
      successor_high[static_cast<size_t>(i)] = pick();
      successor_low[static_cast<size_t>(i)] = static_cast<Token>(kHighGroupSize + pick());
      // Distinct secondary successors so every structured step is a real
      // two-way branch.
      do {
        alternate_high[static_cast<size_t>(i)] = pick();
      } while (alternate_high[static_cast<size_t>(i)] == successor_high[static_cast<size_t>(i)]);
      do {
        alternate_low[static_cast<size_t>(i)] = static_cast<Token>(kHighGroupSize + pick());
      } while (alternate_low[static_cast<size_t>(i)] == successor_low[static_cast<size_t>(i)]);
    }
  }

  std::vector<model::NgramModel> class_models;
  std::vector<Token> control_tokens;
  class_models.reserve(static_cast<size_t>(spec.k));
  for (int c = 1; c <= spec.k; ++c) {
    double p_high = spec.class_mix[static_cast<size_t>(c - 1)];
    rng::UniformStream stream =
        rng::derive_stream(spec.seed, "testbed", "corpus", static_cast<uint64_t>(c));

    std::vector<TokenSeq> sequences;
    size_t chars = 0;
    while (chars < spec.corpus_chars_per_class) {
      size_t len = geometric_length(spec.mean_len, stream);
      TokenSeq seq;
      seq.reserve(len);
      bool high = stream.next() < p_high;
      for (size_t i = 0; i < len; ++i) {
        // Register runs: keep the group, or re-draw it from the class mix.
        // The stationary high-register rate is exactly p_high either way.
        if (i > 0 && stream.next() >= spec.register_persistence) {
          high = stream.next() < p_high;
        }
        Token letter;
        if (!seq.empty() && stream.next() < spec.structure_weight) {
          Token prev = seq.back();
          bool secondary = stream.next() < spec.branch_secondary;
          if (high) {
            letter = secondary ? alternate_high[static_cast<size_t>(prev)]
                               : successor_high[static_cast<size_t>(prev)];
          } else {
            letter = secondary ? alternate_low[static_cast<size_t>(prev)]
                               : successor_low[static_cast<size_t>(prev)];
          }
        } else {
          auto offset = static_cast<Token>(stream.next() * kHighGroupSize);
          offset = std::min(offset, static_cast<Token>(kHighGroupSize - 1));
          letter = high ? offset : static_cast<Token>(kHighGroupSize + offset);
        }
        seq.push_back(letter);
      }
      chars += len;
      sequences.push_back(std::move(seq));
    }
    class_models.push_back(
        model::NgramModel::train_tokens(vocab, sequences, spec.ngram_order, spec.smoothing));
    control_tokens.push_back(static_cast<Token>(kLetterCount + 2 + (c - 1)));
  }

  TestbedBundle bundle;
  bundle.spec = spec;
  bundle.model =
      std::make_shared<ConditionedModel>(std::move(class_models), std::move(control_tokens));
  bundle.thresholds = spec.thresholds;
  return bundle;
}

int rule_score(std::string_view text, std::span<const double> thresholds) {
  size_t alphabetic = 0, high = 0;
  for (char raw : text) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (c < 'a' || c > 'z') continue;
    ++alphabetic;
    if (c <= 'm') ++high;
  }
  if (alphabetic == 0) return 1;
  double f = static_cast<double>(high) / static_cast<double>(alphabetic);
  int score = 1;
  for (double t : thresholds) {
    if (f > t) ++score;  // strictly greater: equality does not pass a cut
  }
  return score;
}

std::vector<harness::DatasetRecord> build_transition_dataset(const TestbedBundle& bundle,
                                                             size_t cap,
                                                             rng::UniformStream& stream) {
  const ConditionedModel& model = *bundle.model;
  const Vocab& vocab = model.vocab();
  int k = model.num_classes();
  if (cap == 0) throw ConfigError("build_transition_dataset: cap must be positive");

  struct Transition {
    int source, target;
    size_t count;
  };
  std::vector<Transition> transitions;
  for (int z = 1; z <= k; ++z) {
    for (int zp = 1; zp <= k; ++zp) {
      if (z != zp) transitions.push_back({z, zp, 0});
    }
  }
  size_t base = cap / transitions.size();
  size_t remainder = cap % transitions.size();
  for (size_t i = 0; i < transitions.size(); ++i) {
    transitions[i].count = base + (i < remainder ? 1 : 0);
  }

  // Valid references per source class, sampled from that class's model and
  // confirmed by the rubric.
  std::vector<size_t> needed(static_cast<size_t>(k) + 1, 0);
  for (const auto& tr : transitions) needed[static_cast<size_t>(tr.source)] += tr.count;

  hindsight::DecodeParams params;
  params.max_len = static_cast<uint32_t>(std::max(32.0, 6.0 * bundle.spec.mean_len));
  // Too-short references carry no usable similarity signal; demand a
  // meaningful fraction of the expected length.
  auto min_chars = static_cast<size_t>(std::max(8.0, bundle.spec.mean_len / 3.0));

  std::vector<std::vector<std::string>> references(static_cast<size_t>(k) + 1);
  for (int z = 1; z <= k; ++z) {
    size_t want = needed[static_cast<size_t>(z)];
    size_t budget = 10 * want;
    TokenSeq prompt{model.control_token(z)};
    auto& bucket = references[static_cast<size_t>(z)];
    for (size_t attempt = 0; attempt < budget && bucket.size() < want; ++attempt) {
      DecodeResult out = decoders::sample_decode(model, prompt, 1.0, params, stream);
      if (out.truncated) continue;
      std::string text = vocab.decode(out.tokens);
      if (text.size() < min_chars) continue;
      if (rule_score(text, bundle.thresholds) == z) bucket.push_back(std::move(text));
    }
    if (bucket.size() < want) {
      throw ConfigError("build_transition_dataset: class " + std::to_string(z) +
                        " produced only " + std::to_string(bucket.size()) + " of " +
                        std::to_string(want) + " valid references after 10x oversampling");
    }
  }

  std::vector<harness::DatasetRecord> records;
  records.reserve(cap);
  std::vector<size_t> next_reference(static_cast<size_t>(k) + 1, 0);
  for (const auto& tr : transitions) {
    for (size_t i = 0; i < tr.count; ++i) {
      harness::DatasetRecord r;
      r.id = "t" + std::to_string(tr.source) + "to" + std::to_string(tr.target) + "-" +
             std::to_string(i);
      r.prompt = vocab.symbol(model.control_token(tr.source));
      r.intervened_prompt = vocab.symbol(model.control_token(tr.target));
      r.reference = references[static_cast<size_t>(tr.source)]
                              [next_reference[static_cast<size_t>(tr.source)]++];
      r.source_score = tr.source;
      r.target_score = tr.target;
      r.criterion = "register";
      records.push_back(std::move(r));
    }
  }
  return records;
}

void save_bundle(const TestbedBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  const TestbedSpec& spec = bundle.spec;

  nlohmann::json class_files = nlohmann::json::array();
  for (int c = 1; c <= bundle.model->num_classes(); ++c) {
    std::string name = "model_class_" + std::to_string(c) + ".json";
    bundle.model->class_model(c).save((fs::path(dir) / name).string());
    class_files.push_back(name);
  }

  std::ofstream scorer((fs::path(dir) / "scorer.json").string());
  scorer << nlohmann::json{{"thresholds", bundle.thresholds}, {"high_group", "a-m"}}.dump(2)
         << "\n";

  harness::save_dataset(bundle.dataset, (fs::path(dir) / "dataset.jsonl").string());

  nlohmann::json manifest{
      {"format", "gumbelcf-testbed"},
      {"version", 1},
      {"k", spec.k},
      {"class_mix", spec.class_mix},
      {"thresholds", spec.thresholds},
      {"mean_len", spec.mean_len},
      {"corpus_chars_per_class", spec.corpus_chars_per_class},
      {"ngram_order", spec.ngram_order},
      {"smoothing", spec.smoothing},
      {"structure_weight", spec.structure_weight},
      {"register_persistence", spec.register_persistence},
      {"branch_secondary", spec.branch_secondary},
      {"seed", spec.seed},
      {"class_models", class_files},
      {"scorer", "scorer.json"},
      {"dataset", "dataset.jsonl"},
  };
  std::ofstream out((fs::path(dir) / "testbed.json").string());
  out << manifest.dump(2) << "\n";
}

TestbedBundle load_bundle(const std::string& dir) {
  std::ifstream in((fs::path(dir) / "testbed.json").string());
  if (!in) throw InputError("cannot open testbed manifest in " + dir);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("testbed manifest: invalid JSON: " + std::string(e.what()));
  }
  try {
    if (manifest.at("format") != "gumbelcf-testbed" || manifest.at("version").get<int>() != 1) {
      throw FormatError("testbed manifest: unsupported format or version");
    }
    TestbedSpec spec;
    spec.k = manifest.at("k").get<int>();
    spec.class_mix = manifest.at("class_mix").get<std::vector<double>>();
    spec.thresholds = manifest.at("thresholds").get<std::vector<double>>();
    spec.mean_len = manifest.at("mean_len").get<double>();
    spec.corpus_chars_per_class = manifest.at("corpus_chars_per_class").get<size_t>();
    spec.ngram_order = manifest.at("ngram_order").get<int>();
    spec.smoothing = manifest.at("smoothing").get<double>();
    spec.structure_weight = manifest.at("structure_weight").get<double>();
    spec.register_persistence = manifest.at("register_persistence").get<double>();
    spec.branch_secondary = manifest.at("branch_secondary").get<double>();
    spec.seed = manifest.at("seed").get<uint64_t>();

    std::vector<model::NgramModel> class_models;
    for (const auto& name : manifest.at("class_models")) {
      class_models.push_back(
          model::NgramModel::load((fs::path(dir) / name.get<std::string>()).string()));
    }
    std::vector<Token> control_tokens;
    for (int c = 0; c < spec.k; ++c) {
      control_tokens.push_back(static_cast<Token>(kLetterCount + 2 + c));
    }

    std::ifstream scorer_in((fs::path(dir) / manifest.at("scorer").get<std::string>()).string());
    if (!scorer_in) throw InputError("cannot open scorer file in " + dir);
    nlohmann::json scorer;
    scorer_in >> scorer;

    TestbedBundle bundle;
    bundle.spec = spec;
    bundle.model =
        std::make_shared<ConditionedModel>(std::move(class_models), std::move(control_tokens));
    bundle.thresholds = scorer.at("thresholds").get<std::vector<double>>();
    bundle.dataset =
        harness::load_dataset((fs::path(dir) / manifest.at("dataset").get<std::string>()).string());
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("testbed manifest: malformed document: " + std::string(e.what()));
  }
}

}  // namespace gumbelcf::testbed
