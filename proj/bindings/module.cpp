// Python bindings for the main operations: Gumbel sampling, toy models,
// noise recovery and replay, baseline decoders, metrics, the synthetic
// testbed, trace files, and the sweep harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "gumbelcf/decoders.hpp"
#include "gumbelcf/errors.hpp"
#include "gumbelcf/gumbel.hpp"
#include "gumbelcf/hindsight.hpp"
#include "gumbelcf/metrics.hpp"
#include "gumbelcf/ngram.hpp"
#include "gumbelcf/remote.hpp"
#include "gumbelcf/sweep.hpp"
#include "gumbelcf/testbed.hpp"
#include "gumbelcf/trace_io.hpp"

namespace py = pybind11;
using namespace gumbelcf;

namespace {

// Models cross the boundary behind a shared handle so toy, testbed, and
// remote backends all look the same from Python.
struct PyModel {
  model::ModelPtr ptr;

  const model::Model& ref() const {
    if (!ptr) throw Error("model handle is empty");
    return *ptr;
  }
};

hindsight::DecodeParams make_params(double beta, uint32_t max_len) {
  hindsight::DecodeParams params;
  params.beta = beta;
  params.max_len = max_len;
  return params;
}

}  // namespace

PYBIND11_MODULE(_gumbelcf, m) {
  m.doc() = "Counterfactual decoding via recovered Gumbel noise";

  py::register_exception<Error>(m, "GumbelcfError");

  // ---- randomness ----------------------------------------------------------
  py::class_<rng::UniformStream>(m, "UniformStream")
      .def(py::init<uint64_t, uint64_t, uint64_t>(), py::arg("key"), py::arg("nonce"),
           py::arg("position") = 0)
      .def("next", &rng::UniformStream::next)
      .def("seek", &rng::UniformStream::seek)
      .def_property_readonly("position", &rng::UniformStream::position);

  m.def("derive_stream", &rng::derive_stream, py::arg("global_seed"), py::arg("record_id"),
        py::arg("stage"), py::arg("step") = 0,
        "Deterministic, collision-resistant stream for one (record, stage, step) slot");

  m.def("inverse_gumbel_cdf", &gumbel::inverse_cdf, py::arg("u"));
  m.def("gumbel_cdf", &gumbel::cdf, py::arg("g"));
  m.def("sample_standard_gumbel", &gumbel::sample_standard, py::arg("stream"));
  m.def("sample_lower_truncated_gumbel", &gumbel::sample_lower_truncated, py::arg("tau"),
        py::arg("stream"));
  m.def("sample_upper_truncated_gumbel", &gumbel::sample_upper_truncated, py::arg("tau"),
        py::arg("stream"));

  // ---- vocabulary and models -----------------------------------------------
  py::class_<Vocab>(m, "Vocab")
      .def_property_readonly("size", &Vocab::size)
      .def_property_readonly("bos", &Vocab::bos)
      .def_property_readonly("eos", &Vocab::eos)
      .def_property_readonly("symbols", &Vocab::symbols)
      .def("encode", [](const Vocab& v, const std::string& text) { return v.encode(text); })
      .def("decode", [](const Vocab& v, const TokenSeq& tokens) { return v.decode(tokens); });

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("vocab", [](const PyModel& m) { return m.ref().vocab(); })
      .def_property_readonly("fingerprint",
                             [](const PyModel& m) { return to_hex(m.ref().fingerprint()); })
      .def("next_logits", [](const PyModel& m, const TokenSeq& context) {
        return m.ref().next_logits(context);
      });

  m.def(
      "train_char_ngram",
      [](const std::string& corpus, int order, double smoothing) {
        return PyModel{std::make_shared<model::NgramModel>(
            model::NgramModel::train_text(corpus, order, smoothing))};
      },
      py::arg("corpus"), py::arg("order") = 3, py::arg("smoothing") = 0.01);
  m.def("load_model", [](const std::string& path) {
    return PyModel{std::make_shared<model::NgramModel>(model::NgramModel::load(path))};
  });
  m.def(
      "save_model",
      [](const PyModel& m, const std::string& path) {
        auto* ngram = dynamic_cast<const model::NgramModel*>(&m.ref());
        if (!ngram) throw Error("only n-gram models can be saved");
        ngram->save(path);
      },
      py::arg("model"), py::arg("path"));
  m.def(
      "connect_remote",
      [](const std::string& endpoint, int timeout_ms) {
        return PyModel{model::connect_remote(endpoint, timeout_ms)};
      },
      py::arg("endpoint"), py::arg("timeout_ms") = 30000);

  m.def("softmax", [](const std::vector<double>& logits) { return model::softmax(logits); });
  m.def("gumbel_argmax", [](const std::vector<double>& logits, const std::vector<double>& noise) {
    return model::gumbel_argmax(logits, noise);
  });

  // ---- recovery and replay ---------------------------------------------------
  py::class_<hindsight::NoiseTrace>(m, "NoiseTrace")
      .def_property_readonly("vocab_size",
                             [](const hindsight::NoiseTrace& t) { return t.vocab_size; })
      .def_property_readonly("reference",
                             [](const hindsight::NoiseTrace& t) { return t.reference; })
      .def_property_readonly("steps", &hindsight::NoiseTrace::steps)
      .def_property_readonly(
          "fingerprint",
          [](const hindsight::NoiseTrace& t) { return to_hex(t.model_fingerprint); })
      .def("noise_at", [](const hindsight::NoiseTrace& t, size_t step, Token v) {
        if (step >= t.steps() || v < 0 || static_cast<uint32_t>(v) >= t.vocab_size) {
          throw DomainError("noise_at: index out of range");
        }
        return t.at(step, v);
      })
      .def("step_noise", [](const hindsight::NoiseTrace& t, size_t step) {
        if (step >= t.steps()) throw DomainError("step_noise: step out of range");
        auto row = t.step_noise(step);
        return std::vector<double>(row.begin(), row.end());
      });

  m.def(
      "recover_noise",
      [](const PyModel& model, const TokenSeq& prompt, const TokenSeq& reference,
         rng::UniformStream& stream) {
        return hindsight::recover_noise(model.ref(), prompt, reference, stream);
      },
      py::arg("model"), py::arg("prompt"), py::arg("reference"), py::arg("stream"));

  m.def(
      "replay",
      [](const PyModel& model, const TokenSeq& intervened_prompt,
         const hindsight::NoiseTrace& trace, double beta, uint32_t max_len,
         rng::UniformStream& stream) {
        auto out =
            hindsight::replay(model.ref(), intervened_prompt, trace, make_params(beta, max_len),
                              stream);
        return py::make_tuple(out.tokens, out.truncated);
      },
      py::arg("model"), py::arg("intervened_prompt"), py::arg("trace"), py::arg("beta") = 1.0,
      py::arg("max_len") = 256, py::arg("stream"));

  m.def(
      "beta_hindsight",
      [](const PyModel& model, const TokenSeq& prompt, const TokenSeq& reference,
         const TokenSeq& intervened_prompt, double beta, uint32_t max_len, uint64_t seed,
         const std::string& record_id) {
        auto record = hindsight::beta_hindsight(model.ref(), prompt, reference, intervened_prompt,
                                                make_params(beta, max_len), {seed, record_id});
        return py::make_tuple(record.output, record.truncated);
      },
      py::arg("model"), py::arg("prompt"), py::arg("reference"), py::arg("intervened_prompt"),
      py::arg("beta") = 1.0, py::arg("max_len") = 256, py::arg("seed") = 0,
      py::arg("record_id") = "py");

  m.def(
      "verify_certificate",
      [](const PyModel& model, const TokenSeq& prompt, const hindsight::NoiseTrace& trace) {
        return hindsight::verify_certificate(model.ref(), prompt, trace);
      },
      py::arg("model"), py::arg("prompt"), py::arg("trace"));

  m.def("write_trace", &harness::write_trace, py::arg("trace"), py::arg("path"));
  m.def("read_trace", &harness::read_trace, py::arg("path"));

  // ---- baseline decoders -------------------------------------------------------
  m.def(
      "sample_decode",
      [](const PyModel& model, const TokenSeq& prompt, double temperature, uint32_t max_len,
         rng::UniformStream& stream) {
        auto out = decoders::sample_decode(model.ref(), prompt, temperature,
                                           make_params(0.0, max_len), stream);
        return py::make_tuple(out.tokens, out.truncated);
      },
      py::arg("model"), py::arg("prompt"), py::arg("temperature") = 1.0, py::arg("max_len") = 256,
      py::arg("stream"));
  m.def(
      "greedy_decode",
      [](const PyModel& model, const TokenSeq& prompt, uint32_t max_len) {
        auto out = decoders::greedy_decode(model.ref(), prompt, make_params(0.0, max_len));
        return py::make_tuple(out.tokens, out.truncated);
      },
      py::arg("model"), py::arg("prompt"), py::arg("max_len") = 256);
  m.def(
      "vocab_bias_decode",
      [](const PyModel& model, const TokenSeq& prompt, const TokenSeq& reference, double alpha,
         uint32_t max_len, rng::UniformStream& stream) {
        auto out = decoders::vocab_bias_decode(model.ref(), prompt,
                                               decoders::make_vocab_bias(reference, alpha),
                                               make_params(0.0, max_len), stream);
        return py::make_tuple(out.tokens, out.truncated);
      },
      py::arg("model"), py::arg("prompt"), py::arg("reference"), py::arg("alpha") = 0.0,
      py::arg("max_len") = 256, py::arg("stream"));

  // ---- metrics --------------------------------------------------------------------
  m.def("levenshtein",
        [](const std::string& a, const std::string& b) { return metrics::levenshtein(a, b); });
  m.def("similarity", [](const std::string& reference, const std::string& output) {
    return metrics::similarity(reference, output);
  });
  m.def(
      "qwk",
      [](const std::vector<int>& predicted, const std::vector<int>& gold, int k) {
        return metrics::qwk(predicted, gold, k);
      },
      py::arg("predicted"), py::arg("gold"), py::arg("k"));

  // ---- testbed ----------------------------------------------------------------------
  m.def(
      "rule_score",
      [](const std::string& text, const std::vector<double>& thresholds) {
        return testbed::rule_score(text, thresholds);
      },
      py::arg("text"), py::arg("thresholds") = std::vector<double>{0.3, 0.5, 0.7});
  m.def(
      "make_testbed",
      [](const std::string& out_dir, uint64_t seed, size_t cap, int k) {
        testbed::TestbedSpec spec;
        spec.seed = seed;
        spec.k = k;
        auto bundle = testbed::build_testbed(spec);
        auto stream = rng::derive_stream(spec.seed, "testbed", "dataset", 0);
        bundle.dataset = testbed::build_transition_dataset(bundle, cap, stream);
        testbed::save_bundle(bundle, out_dir);
        return bundle.dataset.size();
      },
      py::arg("out_dir"), py::arg("seed") = 0, py::arg("cap") = 240, py::arg("k") = 4);
  m.def("load_testbed_model", [](const std::string& dir) {
    return PyModel{testbed::load_bundle(dir).model};
  });

  // ---- harness -----------------------------------------------------------------------
  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        auto config = harness::config_from_json(nlohmann::json::parse(config_json));
        auto table = harness::run_sweep(config);
        py::list rows;
        for (const auto& row : table.rows) {
          py::dict d;
          d["method"] = hindsight::to_string(row.method);
          d["param"] = row.param;
          d["n"] = row.n;
          d["skipped"] = row.skipped;
          d["mean_similarity"] = row.mean_similarity;
          d["qwk"] = row.qwk;
          d["seconds"] = row.seconds;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config_json"), "Run a sweep from a JSON config string; returns result rows");
}
