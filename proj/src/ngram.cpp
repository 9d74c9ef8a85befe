#include "gumbelcf/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "gumbelcf/errors.hpp"

namespace gumbelcf::model {

namespace {

constexpr int kFormatVersion = 1;

Vocab vocab_from_texts(std::span<const std::string> sequences) {
  std::set<char> observed;
  for (const auto& s : sequences) {
    for (char c : s) observed.insert(c);
  }
  std::vector<std::string> symbols;
  symbols.reserve(observed.size() + 2);
  for (char c : observed) symbols.emplace_back(1, c);
  auto bos = static_cast<Token>(symbols.size());
  symbols.emplace_back("<bos>");
  auto eos = static_cast<Token>(symbols.size());
  symbols.emplace_back("<eos>");
  return Vocab(std::move(symbols), bos, eos);
}

// Hex bit pattern of a double; exact, unlike any decimal rendering.
std::string double_bits_hex(double x) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(x));
  std::memcpy(&bits, &x, sizeof(bits));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

double double_from_bits_hex(const std::string& hex) {
  uint64_t bits = std::stoull(hex, nullptr, 16);
  double x;
  std::memcpy(&x, &bits, sizeof(x));
  return x;
}

}  // namespace

NgramModel::NgramModel(Vocab vocab, int order, double smoothing)
    : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {
  if (order_ < 1) throw ConfigError("NgramModel: order must be >= 1, got " + std::to_string(order_));
  if (!(smoothing_ > 0.0)) {
    throw ConfigError("NgramModel: smoothing must be > 0, got " + std::to_string(smoothing_));
  }
  tables_.resize(static_cast<size_t>(order_));
}

void NgramModel::count_sequence(const TokenSeq& body) {
  TokenSeq padded;
  padded.reserve(body.size() + 2);
  padded.push_back(vocab_.bos());
  padded.insert(padded.end(), body.begin(), body.end());
  padded.push_back(vocab_.eos());

  for (size_t i = 1; i < padded.size(); ++i) {
    Token event = padded[i];
    size_t max_k = std::min<size_t>(static_cast<size_t>(order_ - 1), i);
    for (size_t k = 0; k <= max_k; ++k) {
      TokenSeq ctx(padded.begin() + static_cast<ptrdiff_t>(i - k),
                   padded.begin() + static_cast<ptrdiff_t>(i));
      Row& row = tables_[k][ctx];
      ++row.counts[event];
      ++row.total;
    }
  }
}

void NgramModel::finalize() {
  // Fingerprint over the canonical serialization; std::map ordering makes the
  // dump deterministic for a given set of counts.
  fingerprint_ = sha256(to_json().dump());
}

NgramModel NgramModel::train_text(std::string_view corpus, int order, double smoothing) {
  std::vector<std::string> one{std::string(corpus)};
  return train_texts(one, order, smoothing);
}

NgramModel NgramModel::train_texts(std::span<const std::string> sequences, int order,
                                   double smoothing) {
  size_t total_chars = 0;
  for (const auto& s : sequences) total_chars += s.size();
  if (sequences.empty() || total_chars == 0) {
    throw ConfigError("train_char_ngram: corpus is empty");
  }
  Vocab vocab = vocab_from_texts(sequences);
  NgramModel m(vocab, order, smoothing);
  for (const auto& s : sequences) m.count_sequence(m.vocab_.encode(s));
  m.finalize();
  return m;
}

NgramModel NgramModel::train_tokens(Vocab vocab, std::span<const TokenSeq> sequences, int order,
                                    double smoothing) {
  if (sequences.empty()) throw ConfigError("train_char_ngram: corpus is empty");
  NgramModel m(std::move(vocab), order, smoothing);
  for (const auto& seq : sequences) {
    for (Token t : seq) {
      if (!m.vocab_.contains(t)) {
        throw ConfigError("train: token id " + std::to_string(t) + " outside fixed vocabulary");
      }
    }
    m.count_sequence(seq);
  }
  m.finalize();
  return m;
}

LogitVector NgramModel::next_logits(std::span<const Token> context) const {
  check_context(context, vocab_);
  size_t max_k = std::min<size_t>(static_cast<size_t>(order_ - 1), context.size());

  const Row* row = nullptr;
  for (size_t k = max_k + 1; k-- > 0;) {
    TokenSeq ctx(context.end() - static_cast<ptrdiff_t>(k), context.end());
    auto it = tables_[k].find(ctx);
    if (it != tables_[k].end() && it->second.total > 0) {
      row = &it->second;
      break;
    }
  }

  auto v_count = static_cast<double>(vocab_.size());
  double denom = std::log((row ? static_cast<double>(row->total) : 0.0) + v_count * smoothing_);
  LogitVector logits(static_cast<size_t>(vocab_.size()));
  for (Token v = 0; v < vocab_.size(); ++v) {
    double c = 0.0;
    if (row) {
      auto it = row->counts.find(v);
      if (it != row->counts.end()) c = static_cast<double>(it->second);
    }
    logits[static_cast<size_t>(v)] = std::log(c + smoothing_) - denom;
  }
  return logits;
}

nlohmann::json NgramModel::to_json() const {
  nlohmann::json tables = nlohmann::json::array();
  for (size_t k = 0; k < tables_.size(); ++k) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [ctx, row] : tables_[k]) {
      nlohmann::json counts = nlohmann::json::array();
      for (const auto& [tok, n] : row.counts) counts.push_back({tok, n});
      rows.push_back({{"ctx", ctx}, {"counts", counts}});
    }
    tables.push_back({{"context_len", k}, {"rows", rows}});
  }
  return nlohmann::json{
      {"format", "gumbelcf-ngram"},
      {"version", kFormatVersion},
      {"order", order_},
      {"smoothing_bits", double_bits_hex(smoothing_)},
      {"vocab", {{"symbols", vocab_.symbols()}, {"bos", vocab_.bos()}, {"eos", vocab_.eos()}}},
      {"tables", tables},
  };
}

NgramModel NgramModel::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "gumbelcf-ngram") {
      throw FormatError("ngram model: unexpected format tag");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw FormatError("ngram model: unsupported version " + doc.at("version").dump());
    }
    Vocab vocab(doc.at("vocab").at("symbols").get<std::vector<std::string>>(),
                doc.at("vocab").at("bos").get<Token>(), doc.at("vocab").at("eos").get<Token>());
    NgramModel m(std::move(vocab), doc.at("order").get<int>(),
                 double_from_bits_hex(doc.at("smoothing_bits").get<std::string>()));
    for (const auto& table : doc.at("tables")) {
      auto k = table.at("context_len").get<size_t>();
      if (k >= m.tables_.size()) throw FormatError("ngram model: context_len exceeds order");
      for (const auto& row_doc : table.at("rows")) {
        auto ctx = row_doc.at("ctx").get<TokenSeq>();
        if (ctx.size() != k) throw FormatError("ngram model: context length mismatch");
        Row& row = m.tables_[k][ctx];
        for (const auto& pair : row_doc.at("counts")) {
          auto tok = pair.at(0).get<Token>();
          auto n = pair.at(1).get<uint64_t>();
          row.counts[tok] = n;
          row.total += n;
        }
      }
    }
    m.finalize();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ngram model: malformed document: ") + e.what());
  }
}

void NgramModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open for writing: " + path);
  out << to_json().dump(2) << "\n";
}

NgramModel NgramModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("ngram model: invalid JSON in " + path + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace gumbelcf::model
