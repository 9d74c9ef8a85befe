#include "doctest.h"

#include <filesystem>
#include <map>

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"
#include "gumbelcf/testbed.hpp"

using namespace gumbelcf;

namespace {

// Keep the unit-suite bundles small; the acceptance suite runs the defaults.
testbed::TestbedSpec small_spec(uint64_t seed = 7) {
  testbed::TestbedSpec spec;
  spec.corpus_chars_per_class = 4000;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("spec validation rejects malformed fields") {
  auto bad = small_spec();
  bad.thresholds = {0.5, 0.3, 0.7};
  CHECK_THROWS_AS(testbed::validate(bad), ConfigError);
  bad = small_spec();
  bad.class_mix = {0.2, 0.2, 0.6, 0.8};
  CHECK_THROWS_AS(testbed::validate(bad), ConfigError);
  bad = small_spec();
  bad.class_mix = {0.2, 0.4, 0.6};
  CHECK_THROWS_AS(testbed::validate(bad), ConfigError);
  bad = small_spec();
  bad.thresholds = {0.3, 0.5, 1.2};
  CHECK_THROWS_AS(testbed::validate(bad), ConfigError);
  bad = small_spec();
  bad.mean_len = 0.5;
  CHECK_THROWS_AS(testbed::validate(bad), ConfigError);
}

TEST_CASE("rule_score counts the high-register fraction with strict cuts") {
  std::vector<double> thresholds{0.3, 0.5, 0.7};
  CHECK(testbed::rule_score("aaa", thresholds) == 4);   // f = 1.0
  CHECK(testbed::rule_score("zzz", thresholds) == 1);   // f = 0.0
  CHECK(testbed::rule_score("aanz", thresholds) == 2);  // f = 0.5: not > 0.5
  CHECK(testbed::rule_score("", thresholds) == 1);
  CHECK(testbed::rule_score("0123 .,", thresholds) == 1);
  CHECK(testbed::rule_score("AaNz", thresholds) == 2);  // case-insensitive
  // Non-alphabetic characters dilute nothing: same f as without them.
  CHECK(testbed::rule_score("a!a?n z", thresholds) ==
        testbed::rule_score("aanz", thresholds));
}

TEST_CASE("build_testbed is deterministic") {
  auto a = testbed::build_testbed(small_spec());
  auto b = testbed::build_testbed(small_spec());
  CHECK(a.model->fingerprint() == b.model->fingerprint());
  auto c = testbed::build_testbed(small_spec(8));
  CHECK(a.model->fingerprint() != c.model->fingerprint());
}

TEST_CASE("class tables separate: unigram argmax follows the class mix") {
  auto bundle = testbed::build_testbed(small_spec());
  const Vocab& vocab = bundle.model->vocab();
  // First-character distribution per class, read off the class table at bos.
  auto first_char_argmax = [&](int cls) {
    auto logits = bundle.model->class_model(cls).next_logits(TokenSeq{vocab.bos()});
    Token best = 0;
    for (Token v = 1; v < 26; ++v) {
      if (logits[static_cast<size_t>(v)] > logits[static_cast<size_t>(best)]) best = v;
    }
    return best;
  };
  CHECK(first_char_argmax(1) >= 13);  // class mix 0.2: low-register side
  CHECK(first_char_argmax(4) < 13);   // class mix 0.8: high-register side
}

TEST_CASE("samples from higher classes score higher under the rubric") {
  auto bundle = testbed::build_testbed(small_spec());
  hindsight::DecodeParams params;
  params.max_len = 240;

  double previous_mean = 0.0;
  for (int cls = 1; cls <= 4; ++cls) {
    TokenSeq prompt{bundle.model->control_token(cls)};
    double sum = 0.0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      auto stream = rng::derive_stream(99, "sep-" + std::to_string(cls) + "-" + std::to_string(i),
                                       "sample", 0);
      auto out = decoders::sample_decode(*bundle.model, prompt, 1.0, params, stream);
      sum += testbed::rule_score(bundle.model->vocab().decode(out.tokens), bundle.thresholds);
    }
    double mean = sum / n;
    INFO("class ", cls, " mean rubric score ", mean);
    CHECK(mean > previous_mean);
    previous_mean = mean;
  }
}

TEST_CASE("conditioned model demands a control token and strips it for the table") {
  auto bundle = testbed::build_testbed(small_spec());
  const Vocab& vocab = bundle.model->vocab();
  Token control = bundle.model->control_token(2);
  TokenSeq a_id = vocab.encode("a");

  TokenSeq ctx{vocab.bos(), control, a_id[0]};
  TokenSeq stripped{vocab.bos(), a_id[0]};
  CHECK(bundle.model->next_logits(ctx) == bundle.model->class_model(2).next_logits(stripped));

  CHECK_THROWS_AS(bundle.model->next_logits(TokenSeq{vocab.bos(), a_id[0]}), ModelError);
  CHECK_THROWS_AS(bundle.model->next_logits(TokenSeq{vocab.bos()}), ModelError);
}

TEST_CASE("transition datasets stratify uniformly and verify sources") {
  auto bundle = testbed::build_testbed(small_spec());
  auto stream = rng::derive_stream(bundle.spec.seed, "testbed", "dataset", 0);
  auto records = testbed::build_transition_dataset(bundle, 120, stream);
  REQUIRE(records.size() == 120);

  std::map<std::pair<int, int>, size_t> counts;
  for (const auto& r : records) {
    REQUIRE(r.source_score.has_value());
    REQUIRE(r.target_score.has_value());
    CHECK(*r.source_score != *r.target_score);
    CHECK(testbed::rule_score(r.reference, bundle.thresholds) == *r.source_score);
    CHECK(r.criterion == "register");
    ++counts[{*r.source_score, *r.target_score}];
  }
  CHECK(counts.size() == 12);  // all ordered transitions for k = 4
  for (const auto& [transition, count] : counts) CHECK(count == 10);

  // A cap that does not divide 12 spreads the remainder, off by at most one.
  auto stream2 = rng::derive_stream(bundle.spec.seed, "testbed", "dataset", 1);
  auto uneven = testbed::build_transition_dataset(bundle, 100, stream2);
  CHECK(uneven.size() == 100);
  std::map<std::pair<int, int>, size_t> uneven_counts;
  for (const auto& r : uneven) ++uneven_counts[{*r.source_score, *r.target_score}];
  size_t low = 100, high = 0;
  for (const auto& [transition, count] : uneven_counts) {
    low = std::min(low, count);
    high = std::max(high, count);
  }
  CHECK(high - low <= 1);
}

TEST_CASE("transition dataset construction is deterministic") {
  auto bundle = testbed::build_testbed(small_spec());
  auto s1 = rng::derive_stream(1, "testbed", "dataset", 0);
  auto s2 = rng::derive_stream(1, "testbed", "dataset", 0);
  auto a = testbed::build_transition_dataset(bundle, 24, s1);
  auto b = testbed::build_transition_dataset(bundle, 24, s2);
  CHECK(a == b);
}

TEST_CASE("bundle persistence round-trips models, scorer, and dataset") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "gumbelcf-testbed-roundtrip";
  fs::remove_all(dir);

  auto bundle = testbed::build_testbed(small_spec());
  auto stream = rng::derive_stream(bundle.spec.seed, "testbed", "dataset", 0);
  bundle.dataset = testbed::build_transition_dataset(bundle, 24, stream);
  testbed::save_bundle(bundle, dir.string());

  auto loaded = testbed::load_bundle(dir.string());
  CHECK(loaded.model->fingerprint() == bundle.model->fingerprint());
  CHECK(loaded.thresholds == bundle.thresholds);
  CHECK(loaded.dataset == bundle.dataset);
  CHECK(loaded.spec.k == bundle.spec.k);
  fs::remove_all(dir);
}
