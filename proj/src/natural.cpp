#include "softtype/natural.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "softtype/error.hpp"
#include "softtype/rng.hpp"

namespace softtype {

using nlohmann::json;
using nlohmann::ordered_json;

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

LabelledCorpus parseCorpus(std::string_view text, const TypeUniverse& types) {
  LabelledCorpus corpus{types, {}};
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": expected name<TAB>type");
    }
    auto type = types.find(line.substr(tab + 1));
    if (!type) throw FormatError("corpus line " + std::to_string(line_no) + ": unknown type");
    corpus.samples.push_back({std::string(line.substr(0, tab)), *type});
  }
  return corpus;
}

LabelledCorpus readCorpus(const std::filesystem::path& path, const TypeUniverse& types) {
  return parseCorpus(readFile(path), types);
}

std::string formatCorpus(const LabelledCorpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples) {
    out += s.name;
    out += '\t';
    out += corpus.types.name(s.type);
    out += '\n';
  }
  return out;
}

std::pair<double, double> evaluateNames(const LstmModel& model, const std::vector<LabelledName>& samples) {
  if (samples.empty()) return {0.0, 0.0};
  double nll = 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    auto lp = model.forward(s.name);
    nll -= lp[s.type];
    auto best = static_cast<TypeIndex>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    if (best == s.type) ++correct;
  }
  auto n = static_cast<double>(samples.size());
  return {nll / n, static_cast<double>(correct) / n};
}

TrainResult trainModel(const LabelledCorpus& corpus, const TrainConfig& cfg) {
  if (corpus.samples.empty()) throw InvalidArgument("cannot train on an empty corpus");
  if (cfg.batch_size == 0 || cfg.epochs == 0) throw InvalidArgument("batch size and epochs must be positive");
  for (const auto& s : corpus.samples) {
    if (s.name.empty()) throw InvalidArgument("corpus contains an empty name");
    if (s.type >= corpus.types.size()) throw InvalidArgument("corpus label outside the type universe");
  }

  Rng rng(cfg.seed);
  std::vector<LabelledName> shuffled = corpus.samples;
  rng.shuffle(shuffled.begin(), shuffled.end());
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(shuffled.size())));
  TrainResult result;
  result.validation.assign(shuffled.end() - static_cast<std::ptrdiff_t>(n_val), shuffled.end());
  result.train.assign(shuffled.begin(), shuffled.end() - static_cast<std::ptrdiff_t>(n_val));
  const auto& selection = result.validation.empty() ? result.train : result.validation;

  LstmModel model = LstmModel::initialised(corpus.types, cfg.dims, rng.next());
  const std::size_t np = model.parameters().size();
  std::vector<double> grad(np), m1(np, 0.0), m2(np, 0.0);
  std::size_t step = 0;
  double best_nll = std::numeric_limits<double>::infinity();
  std::vector<LabelledName> order = result.train;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t e = std::min(order.size(), b + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = b; i < e; ++i) loss += model.backward(order[i].name, order[i].type, grad);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch + 1) + " at batch " +
                               std::to_string(b / cfg.batch_size));
      }
      const double scale = 1.0 / static_cast<double>(e - b);
      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto params = model.parameters();
      for (std::size_t k = 0; k < np; ++k) {
        double g = grad[k] * scale;
        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * g;
        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * g * g;
        params[k] -= cfg.learning_rate * (m1[k] / bc1) / (std::sqrt(m2[k] / bc2) + cfg.epsilon);
      }
    }
    auto [train_nll, train_acc] = evaluateNames(model, result.train);
    auto [val_nll, val_acc] = evaluateNames(model, selection);
    if (!std::isfinite(train_nll)) throw TrainingDiverged("non-finite training NLL after epoch " + std::to_string(epoch + 1));
    result.epochs.push_back({train_nll, val_nll, val_acc});
    if (val_nll < best_nll) {
      best_nll = val_nll;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

std::string_view leafName(std::string_view key) {
  auto dot = key.rfind('.');
  return dot == std::string_view::npos ? key : key.substr(dot + 1);
}

NaturalConstraintMatrix predictMatrix(const LstmModel& model, const IdentifierSet& ids) {
  Matrix m(ids.size(), model.numTypes());
  for (std::size_t v = 0; v < ids.size(); ++v) {
    auto lp = model.forward(leafName(ids.name(v)));
    for (std::size_t t = 0; t < lp.size(); ++t) m(v, t) = std::exp(lp[t]);
  }
  return NaturalConstraintMatrix(std::move(m));
}

std::string formatMatrixJson(const NaturalConstraintMatrix& m, const IdentifierSet& ids, const TypeUniverse& types) {
  if (m.rows() != ids.size() || m.cols() != types.size()) throw DimensionMismatch("matrix does not match its labels");
  ordered_json j;
  j["types"] = types.names();
  ordered_json rows = ordered_json::object();
  for (std::size_t v = 0; v < ids.size(); ++v) {
    auto r = m.row(v);
    rows[ids.name(v)] = std::vector<double>(r.begin(), r.end());
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

void saveMatrix(const std::filesystem::path& path, const NaturalConstraintMatrix& m, const IdentifierSet& ids,
                const TypeUniverse& types) {
  writeFile(path, formatMatrixJson(m, ids, types));
}

NaturalConstraintMatrix parseMatrixJson(std::string_view text, const IdentifierSet& ids, const TypeUniverse& types,
                                        MissingRows missing) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("matrix file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("types") || !j.contains("rows") || !j["types"].is_array() ||
      !j["rows"].is_object()) {
    throw FormatError("matrix file: expected {\"types\": [...], \"rows\": {...}}");
  }
  std::vector<TypeIndex> column_of;  // file column -> universe index
  std::vector<bool> covered(types.size(), false);
  for (const auto& name : j["types"]) {
    if (!name.is_string()) throw FormatError("matrix file: type names must be strings");
    auto t = types.find(name.get<std::string>());
    if (!t) throw FormatError("matrix file: unknown type '" + name.get<std::string>() + "'");
    if (covered[*t]) throw FormatError("matrix file: duplicate type '" + name.get<std::string>() + "'");
    covered[*t] = true;
    column_of.push_back(*t);
  }

  Matrix m(ids.size(), types.size());
  const auto& rows = j["rows"];
  for (std::size_t v = 0; v < ids.size(); ++v) {
    const std::string& id = ids.name(v);
    if (!rows.contains(id)) {
      if (missing == MissingRows::Reject) throw FormatError("matrix file: missing identifier '" + id + "'");
      for (std::size_t t = 0; t < types.size(); ++t) m(v, t) = 1.0 / static_cast<double>(types.size());
      continue;
    }
    const auto& row = rows[id];
    if (!row.is_array() || row.size() != column_of.size()) {
      throw FormatError("matrix file: row '" + id + "' has the wrong length");
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < column_of.size(); ++c) {
      if (!row[c].is_number()) throw FormatError("matrix file: row '" + id + "' has a non-numeric entry");
      double x = row[c].get<double>();
      if (!(x >= 0.0 && x <= 1.0)) throw FormatError("matrix file: row '" + id + "' has an entry outside [0,1]");
      m(v, column_of[c]) = x;
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-3) {
      throw FormatError("matrix file: row '" + id + "' sums to " + std::to_string(sum));
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      for (double& x : m.row(v)) x /= sum;
    }
  }
  return NaturalConstraintMatrix(std::move(m));
}

NaturalConstraintMatrix loadMatrix(const std::filesystem::path& path, const IdentifierSet& ids,
                                   const TypeUniverse& types, MissingRows missing) {
  return parseMatrixJson(readFile(path), ids, types, missing);
}

namespace {

constexpr const char* kCheckpointFormat = "softtype-lstm";
constexpr int kCheckpointVersion = 1;

struct TensorSpec {
  const char* name;
  std::size_t offset;
  std::size_t size;
};

std::vector<TensorSpec> tensorSpecs(const LstmModel& m) {
  auto l = m.layout();
  return {
      {"embedding", l.embedding, l.input_weights - l.embedding},
      {"input_weights", l.input_weights, l.recurrent_weights - l.input_weights},
      {"recurrent_weights", l.recurrent_weights, l.gate_bias - l.recurrent_weights},
      {"gate_bias", l.gate_bias, l.head_weights - l.gate_bias},
      {"head_weights", l.head_weights, l.head_bias - l.head_weights},
      {"head_bias", l.head_bias, l.total - l.head_bias},
  };
}

}  // namespace

std::string formatCheckpoint(const LstmModel& model) {
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["vocab"] = CharVocab::size();
  j["embed"] = model.dims().embed;
  j["hidden"] = model.dims().hidden;
  j["types"] = model.types().names();
  ordered_json tensors = ordered_json::object();
  auto params = model.parameters();
  for (const auto& spec : tensorSpecs(model)) {
    tensors[spec.name] = std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(spec.offset),
                                             params.begin() + static_cast<std::ptrdiff_t>(spec.offset + spec.size));
  }
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

LstmModel parseCheckpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
    if (j.at("format") != kCheckpointFormat) throw FormatError("checkpoint: not a softtype-lstm file");
    if (j.at("version") != kCheckpointVersion) throw FormatError("checkpoint: unsupported version");
    if (j.at("vocab").get<std::size_t>() != CharVocab::size()) throw FormatError("checkpoint: vocabulary size mismatch");
    LstmDims dims{j.at("embed").get<std::size_t>(), j.at("hidden").get<std::size_t>()};
    LstmModel model(TypeUniverse(j.at("types").get<std::vector<std::string>>()), dims);
    auto params = model.parameters();
    const auto& tensors = j.at("tensors");
    for (const auto& spec : tensorSpecs(model)) {
      const auto& t = tensors.at(spec.name);
      if (!t.is_array() || t.size() != spec.size) {
        throw FormatError(std::string("checkpoint: tensor '") + spec.name + "' has " + std::to_string(t.size()) +
                          " values, header implies " + std::to_string(spec.size));
      }
      for (std::size_t k = 0; k < spec.size; ++k) params[spec.offset + k] = t[k].get<double>();
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void saveCheckpoint(const std::filesystem::path& path, const LstmModel& model) {
  writeFile(path, formatCheckpoint(model));
}

LstmModel loadCheckpoint(const std::filesystem::path& path) { return parseCheckpoint(readFile(path)); }

}  // namespace softtype
