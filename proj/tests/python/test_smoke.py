"""Smoke tests for the Python bindings: core identities, metrics, and file
round trips, plus an end-to-end CLI check when the binary is available."""

import math
import os
import subprocess

import pytest

import gumbelcf


def test_inverse_gumbel_cdf_fixed_points():
    assert abs(gumbelcf.inverse_gumbel_cdf(math.exp(-1.0))) < 1e-12
    assert gumbelcf.inverse_gumbel_cdf(0.6922006275553464) == pytest.approx(1.0, abs=1e-12)
    assert gumbelcf.inverse_gumbel_cdf(0.06598803584531254) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(gumbelcf.GumbelcfError):
        gumbelcf.inverse_gumbel_cdf(1.0)


def test_streams_are_deterministic_and_open_interval():
    a = gumbelcf.derive_stream(7, "rec", "recover", 0)
    b = gumbelcf.derive_stream(7, "rec", "recover", 0)
    xs = [a.next() for _ in range(100)]
    ys = [b.next() for _ in range(100)]
    assert xs == ys
    assert all(0.0 < x < 1.0 for x in xs)
    c = gumbelcf.derive_stream(7, "other", "recover", 0)
    assert c.next() != xs[0]


def test_truncated_sampler_supports():
    s = gumbelcf.derive_stream(1, "t", "recover", 0)
    for tau in (-2.0, 0.0, 1.5):
        for _ in range(200):
            assert gumbelcf.sample_lower_truncated_gumbel(tau, s) >= tau
            assert gumbelcf.sample_upper_truncated_gumbel(tau, s) < tau


def test_softmax_and_argmax():
    p = gumbelcf.softmax([1.0, 0.0, -1.0])
    assert p[0] == pytest.approx(0.6652409557748219, abs=1e-9)
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert gumbelcf.gumbel_argmax([1.0, 0.0, -1.0], [0.0, 0.0, 0.0]) == 0
    assert gumbelcf.gumbel_argmax([0.0, 0.0], [0.0, 0.0]) == 0  # lowest-id tie-break


def test_self_replay_identity_and_certificate():
    model = gumbelcf.train_char_ngram("the quick brown fox jumps over the lazy dog", 3, 0.5)
    vocab = model.vocab
    reference = vocab.encode("the lazy fox") + [vocab.eos]
    prompt = vocab.encode("the ")

    stream = gumbelcf.derive_stream(11, "r1", "recover", 0)
    trace = gumbelcf.recover_noise(model, prompt, reference, stream)
    assert trace.steps == len(reference)
    assert gumbelcf.verify_certificate(model, prompt, trace)

    replay_stream = gumbelcf.derive_stream(11, "r1", "replay-cont", 0)
    tokens, truncated = gumbelcf.replay(model, prompt, trace, 1.0, 64, replay_stream)
    assert tokens == reference
    assert not truncated

    tokens, _ = gumbelcf.beta_hindsight(model, prompt, reference, prompt, 1.0, 64, 11, "r1")
    assert tokens == reference


def test_trace_file_round_trip(tmp_path):
    model = gumbelcf.train_char_ngram("abracadabra", 2, 0.25)
    vocab = model.vocab
    reference = vocab.encode("abra") + [vocab.eos]
    stream = gumbelcf.derive_stream(3, "t", "recover", 0)
    trace = gumbelcf.recover_noise(model, [], reference, stream)

    path = str(tmp_path / "trace.gumt")
    gumbelcf.write_trace(trace, path)
    loaded = gumbelcf.read_trace(path)
    assert loaded.reference == trace.reference
    assert loaded.fingerprint == trace.fingerprint
    for t in range(trace.steps):
        assert loaded.step_noise(t) == trace.step_noise(t)


def test_baseline_decoders_share_noise():
    model = gumbelcf.train_char_ngram("structured text with repeated structure", 3, 0.1)
    vocab = model.vocab
    reference = vocab.encode("structure") + [vocab.eos]
    s1 = gumbelcf.derive_stream(5, "b", "sample", 0)
    s2 = gumbelcf.derive_stream(5, "b", "sample", 0)
    plain, _ = gumbelcf.sample_decode(model, [], 1.0, 64, s1)
    biased, _ = gumbelcf.vocab_bias_decode(model, [], reference, 0.0, 64, s2)
    assert plain == biased


def test_metrics_fixed_values():
    assert gumbelcf.levenshtein("kitten", "sitting") == 3
    assert gumbelcf.similarity("kitten", "sitting") == pytest.approx(1 - 3 / 7, abs=1e-12)
    assert gumbelcf.similarity("", "") == 1.0
    assert gumbelcf.qwk([1, 2, 3, 4], [1, 2, 3, 4], 4) == 1.0
    assert gumbelcf.qwk([4, 3, 2, 1], [1, 2, 3, 4], 4) == pytest.approx(-1.0, abs=1e-12)


def test_rule_score_strict_cuts():
    assert gumbelcf.rule_score("aaa") == 4
    assert gumbelcf.rule_score("zzz") == 1
    assert gumbelcf.rule_score("aanz") == 2  # f = 0.5 does not pass the 0.5 cut
    assert gumbelcf.rule_score("") == 1


def test_testbed_and_sweep(tmp_path):
    out = str(tmp_path / "bundle")
    n = gumbelcf.make_testbed(out, seed=9, cap=24, k=4)
    assert n == 24
    model = gumbelcf.load_testbed_model(out)
    assert model.vocab.size == 26 + 2 + 4

    config = {
        "model": {"testbed": out},
        "methods": ["beta-hindsight", "sample"],
        "betas": [1.0],
        "seed": 13,
        "workers": 2,
        "max_len": 240,
    }
    import json

    rows = gumbelcf.run_sweep(json.dumps(config))
    assert len(rows) == 2
    by_method = {r["method"]: r for r in rows}
    assert by_method["beta-hindsight"]["n"] == 24
    assert 0.0 <= by_method["sample"]["mean_similarity"] <= 1.0


@pytest.mark.skipif("GUMBELCF_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_self_replay(tmp_path):
    cli = os.environ["GUMBELCF_CLI"]
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("counterfactual decoding with recovered noise " * 20)
    model_path = str(tmp_path / "model.json")
    subprocess.run(
        [cli, "train-toy", "--corpus", str(corpus), "--out", model_path, "--order", "3"],
        check=True,
    )
    result = subprocess.run(
        [
            cli, "cf",
            "--model", model_path,
            "--prompt", "counter",
            "--reference", "factual decoding",
            "--intervened-prompt", "counter",
            "--beta", "1.0",
            "--seed", "4",
        ],
        check=True,
        capture_output=True,
        text=True,
    )
    assert result.stdout.strip() == "factual decoding"
