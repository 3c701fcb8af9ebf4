#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softtype/frontend.hpp"
#include "softtype/lstm.hpp"
#include "softtype/natural.hpp"
#include "softtype/optim.hpp"

namespace softtype {

enum class Mode { Logical, Natural, Combined };

std::string_view modeName(Mode mode);
Mode parseMode(std::string_view text);

// Where natural constraints come from: a trained model or a matrix file's contents.
struct NaturalInput {
  const LstmModel* model = nullptr;
  std::optional<std::string> matrix_json;
  MissingRows missing = MissingRows::Reject;
};

struct PipelineConfig {
  Mode mode = Mode::Combined;
  std::filesystem::path program;
  // Replaces the generated constraints; names resolve against the program's slots.
  std::optional<std::filesystem::path> constraints;
  std::optional<std::filesystem::path> matrix;
  std::optional<std::filesystem::path> model;
  bool allow_missing = false;
  OptimiserConfig optimiser;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> report;
  int verbosity = 0;

  // Throws InvalidArgument when the mode's inputs are missing or conflicting.
  void validate() const;
};

// Top-1 counts. Predictions of the abstain type count as false positives of
// that type, so every evaluated slot lands in exactly one TP or FP bucket.
struct SlotCounts {
  std::vector<std::size_t> tp;  // per type index
  std::vector<std::size_t> fp;
  std::size_t abstained = 0;  // predicted the abstain type
  std::size_t oov = 0;        // gold type outside the prediction space; not evaluated

  std::size_t correct() const;
  std::size_t evaluated() const;
  // 0 when nothing was evaluated.
  double accuracy() const;
  void merge(const SlotCounts& other);

  friend bool operator==(const SlotCounts&, const SlotCounts&) = default;
};

struct EvaluationReport {
  std::vector<std::string> types;
  SlotCounts overall;
  std::array<SlotCounts, 5> per_kind;  // indexed by SlotKind

  explicit EvaluationReport(std::vector<std::string> type_names = {});
  const SlotCounts& kind(SlotKind k) const { return per_kind[static_cast<std::size_t>(k)]; }
  // Commutative and associative; type lists must agree.
  void merge(const EvaluationReport& other);

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// gold[v] == nullopt marks an out-of-vocabulary slot. Throws DimensionMismatch
// when the slot lists disagree.
EvaluationReport evaluate(const TypeEnvironment& predicted, const std::vector<std::optional<TypeIndex>>& gold,
                          const std::vector<SlotKind>& kinds, const TypeUniverse& universe,
                          std::optional<TypeIndex> abstain);

struct InferenceResult {
  ConstraintBundle bundle;
  TypeEnvironment predicted;
  std::optional<SolveReport> solve;
  std::optional<NaturalConstraintMatrix> natural;
  std::vector<std::optional<TypeIndex>> gold;
  std::string annotated_source;
  std::optional<EvaluationReport> evaluation;  // when the input carried gold annotations
};

// Strip, constrain, predict, solve and discretise one program. The source may
// carry gold annotations; they are ignored for inference and used for evaluation.
InferenceResult inferTypes(std::string_view source, Mode mode, const NaturalInput& natural,
                           const OptimiserConfig& cfg, const std::optional<std::string>& constraints_text = {},
                           const TypeUniverse& universe = defaultUniverse());

// Machine-readable per-file report.
std::string inferenceReportJson(const InferenceResult& result, Mode mode, std::string_view program_name);
std::string evaluationJson(const EvaluationReport& report);

// Reads the configured files, runs inference and writes the outputs.
InferenceResult runPipeline(const PipelineConfig& cfg);

struct FileOutcome {
  std::string file;
  bool ok = false;
  std::string error;
  std::size_t slots = 0;
  double accuracy = 0.0;
  // Absent when no solve ran.
  std::optional<double> constraint_value;
  bool converged = false;
};

struct BatchReport {
  EvaluationReport aggregate;
  std::vector<FileOutcome> files;  // sorted by file name
};

// Every .tl file in dir (sorted), evaluated against its own annotations.
// Failures are recorded per file. jobs > 1 runs files concurrently.
BatchReport batchRun(const std::filesystem::path& dir, Mode mode, const NaturalInput& natural,
                     const OptimiserConfig& cfg, std::size_t jobs = 1);

std::string batchReportJson(const BatchReport& report, Mode mode);
std::string batchSummary(const BatchReport& report, Mode mode);

}  // namespace softtype
