#include "doctest.h"

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"
#include "support/stats.hpp"
#include "support/toy_models.hpp"

using namespace gumbelcf;

TEST_CASE("sampling at vanishing temperature equals greedy decoding") {
  // Fully regular corpus: the argmax is unique at every context on the path,
  // so the temperature -> 0+ limit is exactly the greedy rollout.
  auto m = model::NgramModel::train_text("abcabcabcabc", 3, 0.5);
  TokenSeq prompt = m.vocab().encode("ab");
  hindsight::DecodeParams params;
  params.max_len = 30;

  auto greedy = decoders::greedy_decode(m, prompt, params);
  auto stream = rng::derive_stream(0, "t0", "sample", 0);
  auto cold = decoders::sample_decode(m, prompt, 1e-9, params, stream);
  CHECK(cold.tokens == greedy.tokens);
}

TEST_CASE("sampling frequencies at temperature 1 follow the softmax") {
  Vocab vocab({"a", "b", "<bos>", "<eos>"}, 2, 3);
  model::LogitVector logits{0.8, -0.4, -2.0, 0.1};
  toys::StubModel stub(vocab, logits);
  auto p = model::softmax(logits);

  hindsight::DecodeParams params;
  params.max_len = 1;  // one sampled token per run
  std::vector<size_t> counts(4, 0);
  const size_t n = 100'000;
  for (size_t i = 0; i < n; ++i) {
    auto stream = rng::derive_stream(1, "freq-" + std::to_string(i), "sample", 0);
    auto out = decoders::sample_decode(stub, TokenSeq{}, 1.0, params, stream);
    ++counts[static_cast<size_t>(out.tokens.at(0))];
  }
  CHECK(teststats::chi_square_gof_p(counts, p) > 0.001);
}

TEST_CASE("decoders are reproducible from their stream") {
  rng::UniformStream meta(41, 0);
  auto m = toys::random_ngram(meta);
  TokenSeq prompt = toys::random_tokens(m.vocab(), meta, 2);
  hindsight::DecodeParams params;
  params.max_len = 50;

  auto s1 = rng::derive_stream(123, "r", "sample", 0);
  auto s2 = rng::derive_stream(123, "r", "sample", 0);
  CHECK(decoders::sample_decode(m, prompt, 1.0, params, s1).tokens ==
        decoders::sample_decode(m, prompt, 1.0, params, s2).tokens);

  CHECK(decoders::greedy_decode(m, prompt, params).tokens ==
        decoders::greedy_decode(m, prompt, params).tokens);
}

TEST_CASE("greedy on the \"aaaa\" model follows the hand argmax to the length cap") {
  auto m = model::NgramModel::train_text("aaaa", 2, 1.0);
  hindsight::DecodeParams params;
  params.max_len = 10;
  auto out = decoders::greedy_decode(m, TokenSeq{}, params);
  // Count table: C(a|a)=3 beats C(eos|a)=1 at every step, so the argmax runs
  // 'a' forever and the cap cuts it off.
  Token a = m.vocab().encode("a")[0];
  REQUIRE(out.tokens.size() == 10);
  CHECK(out.truncated);
  for (Token t : out.tokens) CHECK(t == a);
}

TEST_CASE("vocab bias with alpha = 0 is exactly plain sampling on a shared stream") {
  rng::UniformStream meta(4242, 0);
  auto m = toys::random_ngram(meta);
  TokenSeq prompt = toys::random_tokens(m.vocab(), meta, 2);
  TokenSeq reference = toys::random_reference(m.vocab(), meta, 10);
  hindsight::DecodeParams params;
  params.max_len = 60;

  for (int trial = 0; trial < 20; ++trial) {
    auto s1 = rng::derive_stream(9, "vb-" + std::to_string(trial), "sample", 0);
    auto s2 = rng::derive_stream(9, "vb-" + std::to_string(trial), "sample", 0);
    auto plain = decoders::sample_decode(m, prompt, 1.0, params, s1);
    auto biased =
        decoders::vocab_bias_decode(m, prompt, decoders::make_vocab_bias(reference, 0.0), params, s2);
    CHECK(plain.tokens == biased.tokens);
    CHECK(plain.truncated == biased.truncated);
  }
}

TEST_CASE("a crushing alpha confines outputs to the reference token set") {
  rng::UniformStream meta(515, 0);
  auto m = toys::random_ngram(meta, 8, 600);
  TokenSeq prompt = toys::random_tokens(m.vocab(), meta, 2);
  TokenSeq reference = toys::random_reference(m.vocab(), meta, 12);
  auto bias = decoders::make_vocab_bias(reference, 50.0);
  CHECK(bias.reference_token_set.count(m.vocab().eos()) == 1);  // references end with eos

  hindsight::DecodeParams params;
  params.max_len = 80;
  for (int run = 0; run < 100; ++run) {
    auto stream = rng::derive_stream(2, "alpha50-" + std::to_string(run), "vocab-bias", 0);
    auto out = decoders::vocab_bias_decode(m, prompt, bias, params, stream);
    for (Token t : out.tokens) CHECK(bias.reference_token_set.count(t) == 1);
  }
}

TEST_CASE("every decoder honours eos and max_len identically") {
  rng::UniformStream meta(3131, 0);
  auto m = toys::random_ngram(meta);
  TokenSeq prompt = toys::random_tokens(m.vocab(), meta, 1);
  TokenSeq reference = toys::random_reference(m.vocab(), meta, 6);
  hindsight::DecodeParams params;
  params.max_len = 30;

  auto check = [&](const DecodeResult& r) {
    REQUIRE(!r.tokens.empty());
    if (r.truncated) {
      CHECK(r.tokens.size() == params.max_len);
      CHECK(r.tokens.back() != m.vocab().eos());
    } else {
      CHECK(r.tokens.back() == m.vocab().eos());
      CHECK(r.tokens.size() <= params.max_len);
    }
  };
  auto s1 = rng::derive_stream(5, "caps", "sample", 0);
  auto s2 = rng::derive_stream(5, "caps", "vocab-bias", 0);
  check(decoders::sample_decode(m, prompt, 1.0, params, s1));
  check(decoders::greedy_decode(m, prompt, params));
  check(decoders::vocab_bias_decode(m, prompt, decoders::make_vocab_bias(reference, 2.0), params, s2));
}

TEST_CASE("decoder argument validation") {
  rng::UniformStream meta(61, 0);
  auto m = toys::random_ngram(meta);
  hindsight::DecodeParams params;
  auto stream = rng::derive_stream(0, "v", "sample", 0);
  CHECK_THROWS_AS(decoders::sample_decode(m, TokenSeq{}, 0.0, params, stream), DomainError);
  CHECK_THROWS_AS(decoders::sample_decode(m, TokenSeq{}, -1.0, params, stream), DomainError);
  CHECK_THROWS_AS(decoders::make_vocab_bias(TokenSeq{}, -0.1), DomainError);
}
