#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "softtype/error.hpp"
#include "softtype/frontend.hpp"
#include "softtype/natural.hpp"
#include "softtype/pipeline.hpp"
#include "softtype/program_corpus.hpp"

namespace fs = std::filesystem;
using namespace softtype;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFlags {
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  bool dual_ascent = false;
  bool log_space = false;
  std::string penalty = "log";
  std::size_t max_iterations = 5000;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "solver initialisation seed");
    app->add_option("--lambda", lambda, "constraint weight (initial value under --dual-ascent)");
    app->add_flag("--dual-ascent", dual_ascent, "update lambda by gradient ascent");
    app->add_flag("--log-space", log_space, "evaluate the constraint in log space");
    app->add_option("--penalty", penalty, "constraint penalty: linear or log")
        ->check(CLI::IsMember({"linear", "log"}))
        ->capture_default_str();
    app->add_option("--max-iterations", max_iterations)->check(CLI::PositiveNumber);
  }

  OptimiserConfig config() const {
    OptimiserConfig cfg;
    cfg.seed = seed;
    if (lambda) cfg.initial_lambda = *lambda;
    cfg.lambda_mode = dual_ascent ? LambdaMode::DualAscent : LambdaMode::FixedPenalty;
    cfg.log_space = log_space;
    cfg.penalty = penalty == "log" ? Penalty::Log : Penalty::Linear;
    cfg.max_iterations = max_iterations;
    return cfg;
  }
};

Mode modeOrUsage(const std::string& text) {
  try {
    return parseMode(text);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

int runInfer(const std::string& mode, const fs::path& program, const std::optional<fs::path>& constraints,
             const std::optional<fs::path>& matrix, const std::optional<fs::path>& model, bool allow_missing,
             const SolverFlags& solver, const std::optional<fs::path>& out, const std::optional<fs::path>& report,
             bool quiet) {
  PipelineConfig cfg;
  cfg.mode = modeOrUsage(mode);
  cfg.program = program;
  cfg.constraints = constraints;
  cfg.matrix = matrix;
  cfg.model = model;
  cfg.allow_missing = allow_missing;
  cfg.optimiser = solver.config();
  cfg.output = out;
  cfg.report = report;
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  InferenceResult r = runPipeline(cfg);
  if (!out) std::cout << r.annotated_source;
  if (!quiet) {
    const auto& b = r.bundle;
    for (std::size_t v = 0; v < b.ids.size(); ++v) {
      std::cerr << b.ids.name(v) << ": " << b.universe.name(r.predicted[v]) << "\n";
    }
    if (r.solve) {
      std::fprintf(stderr, "constraint %.6f after %zu iterations%s\n", r.solve->constraint_value,
                   r.solve->iterations, r.solve->converged ? "" : " (not converged)");
    }
    if (r.evaluation) std::fprintf(stderr, "top-1 against input annotations %.4f\n", r.evaluation->overall.accuracy());
  }
  return 0;
}

int runTrain(const fs::path& corpus_path, const fs::path& out, TrainConfig cfg, const std::optional<fs::path>& report) {
  LabelledCorpus corpus = readCorpus(corpus_path, defaultUniverse());
  TrainResult r = trainModel(corpus, cfg);
  saveCheckpoint(out, r.model);
  for (std::size_t e = 0; e < r.epochs.size(); ++e) {
    const auto& s = r.epochs[e];
    std::printf("epoch %2zu  train nll %.4f  val nll %.4f  val acc %.4f%s\n", e + 1, s.train_nll, s.validation_nll,
                s.validation_accuracy, e == r.best_epoch ? "  *" : "");
  }
  if (report) {
    std::string text = "{\n  \"version\": 1,\n  \"best_epoch\": " + std::to_string(r.best_epoch + 1) + ",\n  \"epochs\": [";
    for (std::size_t e = 0; e < r.epochs.size(); ++e) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s\n    {\"train_nll\": %.17g, \"validation_nll\": %.17g, \"validation_accuracy\": %.17g}",
                    e ? "," : "", r.epochs[e].train_nll, r.epochs[e].validation_nll, r.epochs[e].validation_accuracy);
      text += buf;
    }
    text += "\n  ]\n}\n";
    writeFile(*report, text);
  }
  return 0;
}

int runEval(const fs::path& dir, const std::string& mode_text, const std::optional<fs::path>& model_path,
            const std::optional<fs::path>& names, const SolverFlags& solver, std::size_t jobs,
            const std::optional<fs::path>& report, std::uint64_t train_seed) {
  Mode mode = modeOrUsage(mode_text);
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::optional<LstmModel> model;
  NaturalInput natural;
  if (mode != Mode::Logical) {
    if (model_path) {
      model = loadCheckpoint(*model_path);
    } else {
      fs::path corpus = names ? *names : dir / "names.tsv";
      if (!fs::exists(corpus)) throw UsageError(std::string(modeName(mode)) + " mode needs --model or a names.tsv");
      TrainConfig tc;
      tc.seed = train_seed;
      model = trainModel(readCorpus(corpus, defaultUniverse()), tc).model;
    }
    natural.model = &*model;
  }
  BatchReport batch = batchRun(dir, mode, natural, solver.config(), jobs);
  std::cout << batchSummary(batch, mode);
  if (report) writeFile(*report, batchReportJson(batch, mode));
  return 0;
}

int runConstraints(const fs::path& program, const std::optional<fs::path>& dsl, const std::optional<fs::path>& sidecar) {
  Program p = stripAnnotations(parseProgram(readFile(program)));
  ConstraintBundle b = generateConstraints(p, defaultUniverse());
  if (dsl) {
    writeFile(*dsl, bundleDsl(b));
  } else {
    std::cout << bundleDsl(b);
  }
  if (sidecar) writeFile(*sidecar, bundleSidecarJson(b));
  return 0;
}

int runPredict(const fs::path& program, const fs::path& model_path, const std::optional<fs::path>& out) {
  LstmModel model = loadCheckpoint(model_path);
  Program p = stripAnnotations(parseProgram(readFile(program)));
  ConstraintBundle b = generateConstraints(p, model.types());
  NaturalConstraintMatrix m = predictMatrix(model, b.ids);
  std::string text = formatMatrixJson(m, b.ids, model.types());
  if (out) {
    writeFile(*out, text);
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softtype: type inference from logical and naming constraints"};
  app.require_subcommand(1);

  SolverFlags infer_solver;
  std::string infer_mode = "combined";
  fs::path infer_program;
  std::optional<fs::path> infer_constraints, infer_matrix, infer_model, infer_out, infer_report;
  bool allow_missing = false, quiet = false;
  auto* infer = app.add_subcommand("infer", "annotate one program");
  infer->add_option("--mode", infer_mode, "logical, natural or combined")->capture_default_str();
  infer->add_option("--program", infer_program, "annotated or bare .tl file")->required();
  infer->add_option("--constraints", infer_constraints, "constraint file replacing the generated one");
  auto* mopt = infer->add_option("--matrix", infer_matrix, "natural constraint matrix (JSON)");
  auto* copt = infer->add_option("--model", infer_model, "naming model checkpoint");
  mopt->excludes(copt);
  infer->add_flag("--allow-missing", allow_missing, "uniform rows for identifiers missing from the matrix");
  infer->add_option("--out", infer_out, "annotated program (default stdout)");
  infer->add_option("--report", infer_report, "JSON report");
  infer->add_flag("-q,--quiet", quiet);
  infer_solver.attach(infer);

  fs::path train_corpus, train_out;
  std::optional<fs::path> train_report;
  TrainConfig train_cfg;
  auto* train = app.add_subcommand("train", "train the naming model");
  train->add_option("--corpus", train_corpus, "name<TAB>type lines")->required();
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--epochs", train_cfg.epochs)->check(CLI::PositiveNumber);
  train->add_option("--seed", train_cfg.seed);
  train->add_option("--lr", train_cfg.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--batch", train_cfg.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--embed", train_cfg.dims.embed)->check(CLI::PositiveNumber);
  train->add_option("--hidden", train_cfg.dims.hidden)->check(CLI::PositiveNumber);
  train->add_option("--report", train_report, "JSON training log");

  SolverFlags eval_solver;
  fs::path eval_dir;
  std::string eval_mode = "combined";
  std::optional<fs::path> eval_model, eval_names, eval_report;
  std::size_t jobs = 1;
  std::uint64_t train_seed = 7;
  auto* eval = app.add_subcommand("eval", "top-1 accuracy over a directory of annotated programs");
  eval->add_option("--dir", eval_dir)->required();
  eval->add_option("--mode", eval_mode)->capture_default_str();
  eval->add_option("--model", eval_model, "naming model checkpoint");
  eval->add_option("--names", eval_names, "naming corpus to train on when no model is given (default dir/names.tsv)");
  eval->add_option("--train-seed", train_seed)->capture_default_str();
  eval->add_option("-j,--jobs", jobs)->check(CLI::PositiveNumber);
  eval->add_option("--report", eval_report, "JSON report");
  eval_solver.attach(eval);

  std::uint64_t gen_seed = 0;
  fs::path gen_out;
  ProgramCorpusConfig gen_cfg;
  std::size_t gen_names = 1000;
  auto* gen = app.add_subcommand("gen-corpus", "write seeded synthetic fixtures");
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--programs", gen_cfg.programs)->capture_default_str();
  gen->add_option("--names", gen_names, "naming corpus size")->capture_default_str();

  fs::path con_program;
  std::optional<fs::path> con_dsl, con_sidecar;
  auto* con = app.add_subcommand("constraints", "emit the constraint bundle of a program");
  con->add_option("--program", con_program)->required();
  con->add_option("--out", con_dsl, "constraint file (default stdout)");
  con->add_option("--sidecar", con_sidecar, "JSON sidecar");

  fs::path pred_program, pred_model;
  std::optional<fs::path> pred_out;
  auto* pred = app.add_subcommand("predict", "natural constraint matrix of a program");
  pred->add_option("--program", pred_program)->required();
  pred->add_option("--model", pred_model)->required();
  pred->add_option("--out", pred_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*infer) {
      return runInfer(infer_mode, infer_program, infer_constraints, infer_matrix, infer_model, allow_missing,
                      infer_solver, infer_out, infer_report, quiet);
    }
    if (*train) return runTrain(train_corpus, train_out, train_cfg, train_report);
    if (*eval) return runEval(eval_dir, eval_mode, eval_model, eval_names, eval_solver, jobs, eval_report, train_seed);
    if (*gen) {
      CorpusFiles f = writeCorpus(gen_out, gen_seed, gen_names, gen_cfg);
      std::printf("%zu programs (%zu slots), %zu names\n", f.programs, f.slots, f.names);
      return 0;
    }
    if (*con) return runConstraints(con_program, con_dsl, con_sidecar);
    if (*pred) return runPredict(pred_program, pred_model, pred_out);
  } catch (const UsageError& e) {
    std::cerr << "softtype: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "softtype: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
