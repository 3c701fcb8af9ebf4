#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "softtype/logic.hpp"
#include "softtype/lstm.hpp"
#include "softtype/matrix.hpp"

namespace softtype {

struct LabelledName {
  std::string name;
  TypeIndex type;

  friend bool operator==(const LabelledName&, const LabelledName&) = default;
};

struct LabelledCorpus {
  TypeUniverse types;
  std::vector<LabelledName> samples;
};

// One "name<TAB>type" pair per line. Type names not already in `types` are
// rejected.
LabelledCorpus readCorpus(const std::filesystem::path& path, const TypeUniverse& types);
LabelledCorpus parseCorpus(std::string_view text, const TypeUniverse& types);
std::string formatCorpus(const LabelledCorpus& corpus);

struct TrainConfig {
  LstmDims dims;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.2;
  std::uint64_t seed = 7;
};

struct EpochStats {
  double train_nll;  // mean over the training split after the epoch
  double validation_nll;
  double validation_accuracy;
};

struct TrainResult {
  LstmModel model;  // weights from the epoch with the lowest validation NLL
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  std::vector<LabelledName> train;
  std::vector<LabelledName> validation;
};

// Adam on the mean NLL of shuffled mini-batches. Throws TrainingDiverged on a
// non-finite loss.
TrainResult trainModel(const LabelledCorpus& corpus, const TrainConfig& cfg);

// Mean NLL and top-1 accuracy of the model on a sample list.
std::pair<double, double> evaluateNames(const LstmModel& model, const std::vector<LabelledName>& samples);

// The name the model sees for an identifier key: the text after the last '.'.
std::string_view leafName(std::string_view key);

// Row v is exp(forward(model, leafName(ids[v]))). The model's universe is used as-is.
NaturalConstraintMatrix predictMatrix(const LstmModel& model, const IdentifierSet& ids);

// JSON: {"types": [...], "rows": {"<identifier>": [...]}}.
std::string formatMatrixJson(const NaturalConstraintMatrix& m, const IdentifierSet& ids, const TypeUniverse& types);
void saveMatrix(const std::filesystem::path& path, const NaturalConstraintMatrix& m, const IdentifierSet& ids,
                const TypeUniverse& types);

enum class MissingRows { Reject, Uniform };

// Aligns file columns to `types` and rows to `ids`. Rejects unknown type
// names, rows whose sum is off by more than 1e-3, and (unless allowed) missing
// identifiers. Rows within tolerance are renormalised.
NaturalConstraintMatrix parseMatrixJson(std::string_view text, const IdentifierSet& ids, const TypeUniverse& types,
                                        MissingRows missing = MissingRows::Reject);
NaturalConstraintMatrix loadMatrix(const std::filesystem::path& path, const IdentifierSet& ids,
                                   const TypeUniverse& types, MissingRows missing = MissingRows::Reject);

// Checkpoint: JSON container {"format": "softtype-lstm", "version": 1,
// "vocab": 96, "embed": De, "hidden": H, "types": [...], "tensors": {...}}
// with one flat row-major array per tensor.
std::string formatCheckpoint(const LstmModel& model);
LstmModel parseCheckpoint(std::string_view text);
void saveCheckpoint(const std::filesystem::path& path, const LstmModel& model);
LstmModel loadCheckpoint(const std::filesystem::path& path);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::string_view content);

}  // namespace softtype
