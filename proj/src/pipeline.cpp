#include "softtype/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <json.hpp>
#include <thread>
#include <unordered_set>

#include "softtype/dsl.hpp"
#include "softtype/error.hpp"

namespace softtype {

using json = nlohmann::ordered_json;

namespace {

constexpr int kReportVersion = 1;

void markAtoms(const Constraint& e, std::vector<bool>& seen, std::unordered_set<const void*>& visited) {
  if (!visited.insert(e.id()).second) return;
  switch (e.kind()) {
    case ConstraintKind::Is: seen[e.ident()] = true; return;
    case ConstraintKind::Not: markAtoms(e.child(), seen, visited); return;
    default:
      markAtoms(e.left(), seen, visited);
      markAtoms(e.right(), seen, visited);
  }
}

TypeEnvironment argmaxRows(const NaturalConstraintMatrix& m) {
  std::vector<TypeIndex> out(m.rows());
  for (std::size_t v = 0; v < m.rows(); ++v) {
    auto row = m.row(v);
    out[v] = static_cast<TypeIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return TypeEnvironment(std::move(out), m.cols());
}

NaturalConstraintMatrix naturalMatrix(const NaturalInput& in, const ConstraintBundle& bundle) {
  if (in.model) {
    if (!(in.model->types() == bundle.universe)) {
      throw InvalidArgument("model type universe does not match the pipeline universe");
    }
    return predictMatrix(*in.model, bundle.ids);
  }
  if (in.matrix_json) return parseMatrixJson(*in.matrix_json, bundle.ids, bundle.universe, in.missing);
  throw InvalidArgument("this mode needs a natural matrix or a model");
}

json countsJson(const SlotCounts& c, const std::vector<std::string>& types) {
  json per_type = json::object();
  for (std::size_t t = 0; t < types.size(); ++t) {
    per_type[types[t]] = {{"tp", c.tp.at(t)}, {"fp", c.fp.at(t)}};
  }
  return {{"evaluated", c.evaluated()}, {"correct", c.correct()}, {"accuracy", c.accuracy()},
          {"abstained", c.abstained}, {"oov", c.oov}, {"per_type", per_type}};
}

json evaluationToJson(const EvaluationReport& r) {
  json kinds = json::object();
  for (SlotKind k : {SlotKind::Fun, SlotKind::Meth, SlotKind::Par, SlotKind::Prop, SlotKind::Var}) {
    kinds[std::string(slotKindName(k))] = countsJson(r.kind(k), r.types);
  }
  return {{"types", r.types}, {"overall", countsJson(r.overall, r.types)}, {"per_kind", kinds}};
}

std::string formatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace

std::string_view modeName(Mode mode) {
  switch (mode) {
    case Mode::Logical: return "logical";
    case Mode::Natural: return "natural";
    case Mode::Combined: return "combined";
  }
  return "?";
}

Mode parseMode(std::string_view text) {
  if (text == "logical") return Mode::Logical;
  if (text == "natural") return Mode::Natural;
  if (text == "combined") return Mode::Combined;
  throw InvalidArgument("unknown mode '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  if (program.empty()) throw InvalidArgument("no program given");
  if (matrix && model) throw InvalidArgument("give either a matrix or a model, not both");
  if (mode != Mode::Logical && !matrix && !model) {
    throw InvalidArgument(std::string(modeName(mode)) + " mode needs --matrix or --model");
  }
  if (mode == Mode::Logical && (matrix || model)) {
    throw InvalidArgument("logical mode takes no natural constraints");
  }
  if (mode == Mode::Natural && constraints) throw InvalidArgument("natural mode takes no constraint file");
  optimiser.validate();
}

std::size_t SlotCounts::correct() const {
  std::size_t n = 0;
  for (auto x : tp) n += x;
  return n;
}

std::size_t SlotCounts::evaluated() const {
  std::size_t n = correct();
  for (auto x : fp) n += x;
  return n;
}

double SlotCounts::accuracy() const {
  std::size_t n = evaluated();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

void SlotCounts::merge(const SlotCounts& other) {
  if (tp.size() != other.tp.size()) throw DimensionMismatch("cannot merge counts over different universes");
  for (std::size_t t = 0; t < tp.size(); ++t) {
    tp[t] += other.tp[t];
    fp[t] += other.fp[t];
  }
  abstained += other.abstained;
  oov += other.oov;
}

EvaluationReport::EvaluationReport(std::vector<std::string> type_names) : types(std::move(type_names)) {
  auto init = [&](SlotCounts& c) {
    c.tp.assign(types.size(), 0);
    c.fp.assign(types.size(), 0);
  };
  init(overall);
  for (auto& c : per_kind) init(c);
}

void EvaluationReport::merge(const EvaluationReport& other) {
  if (types != other.types) throw DimensionMismatch("cannot merge reports over different universes");
  overall.merge(other.overall);
  for (std::size_t k = 0; k < per_kind.size(); ++k) per_kind[k].merge(other.per_kind[k]);
}

EvaluationReport evaluate(const TypeEnvironment& predicted, const std::vector<std::optional<TypeIndex>>& gold,
                          const std::vector<SlotKind>& kinds, const TypeUniverse& universe,
                          std::optional<TypeIndex> abstain) {
  if (predicted.size() != gold.size() || kinds.size() != gold.size()) {
    throw DimensionMismatch("predicted, gold and slot kinds cover different identifier sets");
  }
  if (predicted.numTypes() != universe.size()) throw DimensionMismatch("prediction universe differs");
  EvaluationReport r(universe.names());
  for (std::size_t v = 0; v < gold.size(); ++v) {
    SlotCounts& k = r.per_kind[static_cast<std::size_t>(kinds[v])];
    if (!gold[v] || *gold[v] >= universe.size() || gold[v] == abstain) {
      ++r.overall.oov;
      ++k.oov;
      continue;
    }
    TypeIndex p = predicted[v];
    auto& bucket = p == *gold[v] ? r.overall.tp : r.overall.fp;
    auto& kbucket = p == *gold[v] ? k.tp : k.fp;
    ++bucket[p];
    ++kbucket[p];
    if (abstain && p == *abstain) {
      ++r.overall.abstained;
      ++k.abstained;
    }
  }
  return r;
}

InferenceResult inferTypes(std::string_view source, Mode mode, const NaturalInput& natural,
                           const OptimiserConfig& cfg, const std::optional<std::string>& constraints_text,
                           const TypeUniverse& universe) {
  cfg.validate();
  Program program = parseProgram(source);
  Program bare = stripAnnotations(program);
  ConstraintBundle bundle = generateConstraints(bare, universe);

  if (constraints_text) {
    auto formulas = parseConstraints(*constraints_text, bundle.ids, bundle.universe);
    bundle.constrained.assign(bundle.ids.size(), false);
    bundle.constraint.reset();
    if (!formulas.empty()) {
      bundle.constraint = conjoinAll(formulas);
      std::unordered_set<const void*> visited;
      markAtoms(*bundle.constraint, bundle.constrained, visited);
    }
  }

  InferenceResult out{.bundle = bundle, .predicted = {}, .solve = {}, .natural = {}, .gold = {},
                      .annotated_source = {}, .evaluation = {}};
  const std::size_t nv = bundle.ids.size(), nt = bundle.universe.size();

  switch (mode) {
    case Mode::Logical: {
      std::vector<TypeIndex> assignment(nv, bundle.abstain.value_or(0));
      if (bundle.constraint) {
        out.solve = solveLogicalOnly(*bundle.constraint, nv, nt, cfg);
        TypeEnvironment solved = discretise(out.solve->solution);
        for (std::size_t v = 0; v < nv; ++v) {
          if (bundle.constrained[v] || !bundle.abstain) assignment[v] = solved[v];
        }
      }
      out.predicted = TypeEnvironment(std::move(assignment), nt);
      break;
    }
    case Mode::Natural:
      out.natural = naturalMatrix(natural, bundle);
      out.predicted = argmaxRows(*out.natural);
      break;
    case Mode::Combined:
      out.natural = naturalMatrix(natural, bundle);
      if (bundle.constraint) {
        out.solve = solve(*out.natural, *bundle.constraint, cfg);
        out.predicted = discretise(out.solve->solution);
      } else {
        out.predicted = argmaxRows(*out.natural);
      }
      break;
  }

  out.gold = goldTyping(program, bundle);
  if (std::any_of(out.gold.begin(), out.gold.end(), [](const auto& g) { return g.has_value(); })) {
    std::vector<SlotKind> kinds;
    for (const auto& s : bundle.slots) kinds.push_back(s.kind);
    out.evaluation = evaluate(out.predicted, out.gold, kinds, bundle.universe, bundle.abstain);
  }
  out.annotated_source = annotateSource(source, program, bundle, out.predicted);
  return out;
}

std::string evaluationJson(const EvaluationReport& report) { return evaluationToJson(report).dump(2) + "\n"; }

std::string inferenceReportJson(const InferenceResult& r, Mode mode, std::string_view program_name) {
  const auto& b = r.bundle;
  json slots = json::array();
  for (std::size_t v = 0; v < b.ids.size(); ++v) {
    json s = {{"id", b.ids.name(v)},
              {"kind", slotKindName(b.slots[v].kind)},
              {"constrained", static_cast<bool>(b.constrained[v])},
              {"predicted", b.universe.name(r.predicted[v])}};
    s["gold"] = r.gold[v] ? json(b.universe.name(*r.gold[v])) : json(nullptr);
    if (r.solve) {
      std::vector<double> row(r.solve->solution.row(v).begin(), r.solve->solution.row(v).end());
      s["probabilities"] = row;
    } else if (r.natural) {
      std::vector<double> row(r.natural->row(v).begin(), r.natural->row(v).end());
      s["probabilities"] = row;
    }
    slots.push_back(std::move(s));
  }
  json doc = {{"version", kReportVersion},
              {"mode", modeName(mode)},
              {"program", program_name},
              {"types", b.universe.names()},
              {"constraint", bundleDsl(b)},
              {"slots", slots}};
  if (r.solve) {
    doc["solve"] = {{"objective", r.solve->objective},
                    {"constraint_value", r.solve->constraint_value},
                    {"lambda", r.solve->lambda},
                    {"gradient_norm", r.solve->gradient_norm},
                    {"iterations", r.solve->iterations},
                    {"converged", r.solve->converged}};
  } else {
    doc["solve"] = nullptr;
  }
  doc["evaluation"] = r.evaluation ? evaluationToJson(*r.evaluation) : json(nullptr);
  return doc.dump(2) + "\n";
}

InferenceResult runPipeline(const PipelineConfig& cfg) {
  cfg.validate();
  std::string source = readFile(cfg.program);
  std::optional<std::string> constraints;
  if (cfg.constraints) constraints = readFile(*cfg.constraints);

  std::optional<LstmModel> model;
  NaturalInput natural;
  natural.missing = cfg.allow_missing ? MissingRows::Uniform : MissingRows::Reject;
  if (cfg.model) {
    model = loadCheckpoint(*cfg.model);
    natural.model = &*model;
  }
  if (cfg.matrix) natural.matrix_json = readFile(*cfg.matrix);

  InferenceResult result = inferTypes(source, cfg.mode, natural, cfg.optimiser, constraints);
  if (cfg.output) writeFile(*cfg.output, result.annotated_source);
  if (cfg.report) writeFile(*cfg.report, inferenceReportJson(result, cfg.mode, cfg.program.filename().string()));
  return result;
}

BatchReport batchRun(const std::filesystem::path& dir, Mode mode, const NaturalInput& natural,
                     const OptimiserConfig& cfg, std::size_t jobs) {
  if (!std::filesystem::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  const TypeUniverse universe = defaultUniverse();
  std::vector<FileOutcome> outcomes(files.size());
  std::vector<std::optional<EvaluationReport>> reports(files.size());

  auto work = [&](std::size_t i) {
    FileOutcome& o = outcomes[i];
    o.file = files[i].filename().string();
    try {
      InferenceResult r = inferTypes(readFile(files[i]), mode, natural, cfg, std::nullopt, universe);
      o.slots = r.bundle.ids.size();
      reports[i] = r.evaluation ? *r.evaluation : EvaluationReport(universe.names());
      o.accuracy = reports[i]->overall.accuracy();
      if (r.solve) {
        o.constraint_value = r.solve->constraint_value;
        o.converged = r.solve->converged;
      }
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, files.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < files.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < files.size();) work(i);
      });
    }
  }

  BatchReport batch{EvaluationReport(universe.names()), std::move(outcomes)};
  for (const auto& r : reports) {
    if (r) batch.aggregate.merge(*r);
  }
  return batch;
}

std::string batchReportJson(const BatchReport& report, Mode mode) {
  json files = json::array();
  std::size_t failed = 0;
  for (const auto& f : report.files) {
    json e = {{"file", f.file}, {"ok", f.ok}};
    if (f.ok) {
      e["slots"] = f.slots;
      e["accuracy"] = f.accuracy;
      if (f.constraint_value) {
        e["constraint_value"] = *f.constraint_value;
        e["converged"] = f.converged;
      }
    } else {
      e["error"] = f.error;
      ++failed;
    }
    files.push_back(std::move(e));
  }
  json doc = {{"version", kReportVersion},
              {"mode", modeName(mode)},
              {"files_total", report.files.size()},
              {"files_failed", failed},
              {"evaluation", evaluationToJson(report.aggregate)},
              {"files", files}};
  return doc.dump(2) + "\n";
}

std::string batchSummary(const BatchReport& report, Mode mode) {
  std::size_t failed = 0, solved = 0, converged = 0;
  for (const auto& f : report.files) {
    failed += f.ok ? 0 : 1;
    solved += f.constraint_value ? 1 : 0;
    converged += f.converged ? 1 : 0;
  }
  const auto& a = report.aggregate;
  std::string out = std::string(modeName(mode)) + ": " + std::to_string(report.files.size()) + " files";
  if (failed) out += " (" + std::to_string(failed) + " failed)";
  out += ", " + std::to_string(a.overall.evaluated()) + " slots, top-1 " + formatDouble(a.overall.accuracy()) + "\n";
  if (solved) out += "  solver converged on " + std::to_string(converged) + "/" + std::to_string(solved) + " files\n";
  for (SlotKind k : {SlotKind::Fun, SlotKind::Par, SlotKind::Var}) {
    const auto& c = a.kind(k);
    out += "  " + std::string(slotKindName(k)) + " " + formatDouble(c.accuracy()) + " (" +
           std::to_string(c.correct()) + "/" + std::to_string(c.evaluated()) + ", " + std::to_string(c.abstained) +
           " abstained)\n";
  }
  for (const auto& f : report.files) {
    if (!f.ok) out += "  error " + f.file + ": " + f.error + "\n";
  }
  return out;
}

}  // namespace softtype
