#include "softtype/program_corpus.hpp"

#include <array>
#include <cstdio>
#include <set>

#include "softtype/error.hpp"
#include "softtype/frontend.hpp"
#include "softtype/naming_corpus.hpp"

namespace softtype {

namespace {

using Kind = NameGenerator::Kind;
constexpr std::array<Kind, 3> kKinds = {Kind::Number, Kind::String, Kind::Boolean};

struct Var {
  std::string name;
  Kind kind;
};

struct Signature {
  std::string name;
  Kind ret;
  std::vector<Var> params;
};

const std::set<std::string> kReserved = {"function", "let", "return", "if", "else", "true", "false"};

class FunctionBuilder {
public:
  FunctionBuilder(NameGenerator& names, const ProgramCorpusConfig& cfg, const std::vector<Signature>& earlier,
                  std::set<std::string>& function_names)
      : names_(names), rng_(names.rng()), cfg_(cfg), earlier_(earlier), function_names_(function_names) {}

  std::string build() {
    sig_.ret = rng_.pick(kKinds);
    sig_.name = pickName(sig_.ret, true, function_names_);
    std::size_t nparams = 1 + rng_.below(3);
    for (std::size_t i = 0; i < nparams; ++i) {
      Kind k = rng_.pick(kKinds);
      sig_.params.push_back({pickName(k, false, scope_), k});
    }
    for (std::size_t i = 0; i < sig_.params.size(); ++i) useParam(i);
    lines_.push_back("return " + returnExpr() + ";");

    std::string out = "function " + sig_.name + "(";
    for (std::size_t i = 0; i < sig_.params.size(); ++i) {
      if (i) out += ", ";
      out += sig_.params[i].name + ": " + std::string(kindTypeName(sig_.params[i].kind));
    }
    out += "): " + std::string(kindTypeName(sig_.ret)) + " {\n";
    for (const auto& l : lines_) out += "  " + l + "\n";
    out += "}\n";
    return out;
  }

  const Signature& signature() const { return sig_; }

private:
  std::string pickName(Kind kind, bool function, std::set<std::string>& used) {
    for (int attempt = 0; attempt < 30; ++attempt) {
      double r = rng_.uniform();
      std::string name;
      if (r < cfg_.conventional_name) {
        name = function ? names_.function(kind) : names_.variable(kind);
      } else if (r < cfg_.conventional_name + cfg_.neutral_name) {
        name = function ? names_.neutralFunction() : names_.neutral();
      } else {
        Kind other = kKinds[(static_cast<std::size_t>(kind) + 1 + rng_.below(2)) % 3];
        name = function ? names_.function(other) : names_.variable(other);
      }
      if (!used.count(name) && !kReserved.count(name)) {
        used.insert(name);
        return name;
      }
    }
    std::string name = "v" + std::to_string(used.size());
    used.insert(name);
    return name;
  }

  std::string literal(Kind kind) {
    static const std::array<const char*, 6> words = {"\"a\"", "\"-\"", "\"ok\"", "\"none\"", "\".txt\"", "\"/\""};
    switch (kind) {
      case Kind::Number: return std::to_string(1 + rng_.below(9));
      case Kind::String: return rng_.pick(words);
      case Kind::Boolean: return rng_.chance(0.5) ? "true" : "false";
    }
    return "0";
  }

  // Declares a local of the given kind holding expr.
  void let(Kind kind, const std::string& expr) {
    // Locals lean conventional: they are named after what they hold.
    Var v{pickName(kind, false, scope_), kind};
    lines_.push_back("let " + v.name + ": " + std::string(kindTypeName(kind)) + " = " + expr + ";");
    locals_.push_back(v);
  }

  // An expression whose type is fixed by the operator or literal.
  std::string determiningUse(const Var& p) {
    switch (p.kind) {
      case Kind::Number: {
        static const std::array<const char*, 3> ops = {" * ", " - ", " / "};
        return p.name + rng_.pick(ops) + literal(Kind::Number);
      }
      case Kind::String: return rng_.chance(0.5) ? p.name + " ++ " + literal(Kind::String) : p.name + " + " + literal(Kind::String);
      case Kind::Boolean: return "!" + p.name;
    }
    return p.name;
  }

  void useParam(std::size_t i) {
    const Var& p = sig_.params[i];
    double u = rng_.uniform();
    if (u < 0.4) {
      if (p.kind == Kind::Boolean && rng_.chance(0.5)) {
        lines_.push_back("if (" + p.name + ") {");
        lines_.push_back("  " + literal(Kind::Number) + ";");
        lines_.push_back("}");
        return;
      }
      if (p.kind == Kind::Number && rng_.chance(0.3)) {
        let(Kind::Boolean, p.name + " > " + literal(Kind::Number));
        return;
      }
      let(p.kind, determiningUse(p));
      return;
    }
    if (u < 0.7) {
      // Ambiguous: same-typed operands without a literal to pin the type.
      std::string partner = p.name;
      for (std::size_t j = 0; j < sig_.params.size(); ++j) {
        if (j != i && sig_.params[j].kind == p.kind) partner = sig_.params[j].name;
      }
      if (p.kind == Kind::Boolean) {
        let(Kind::Boolean, p.name + " == " + partner);
      } else if (rng_.chance(0.7)) {
        let(p.kind, p.name + " + " + partner);
      } else {
        let(Kind::Boolean, p.name + " < " + partner);
      }
      return;
    }
    if (u < 0.85) {
      for (const auto& f : earlier_) {
        for (std::size_t k = 0; k < f.params.size(); ++k) {
          if (f.params[k].kind != p.kind) continue;
          std::string call = f.name + "(";
          for (std::size_t a = 0; a < f.params.size(); ++a) {
            if (a) call += ", ";
            call += a == k ? p.name : literal(f.params[a].kind);
          }
          let(f.ret, call + ")");
          return;
        }
      }
    }
    // Otherwise the parameter stays unconstrained.
  }

  std::string returnExpr() {
    std::vector<std::string> determined;
    std::vector<std::string> variable;
    for (const auto& v : locals_) {
      if (v.kind == sig_.ret) variable.push_back(v.name);
    }
    for (const auto& p : sig_.params) {
      if (p.kind == sig_.ret) {
        variable.push_back(p.name);
        determined.push_back(determiningUse(p));
      }
    }
    determined.push_back(literal(sig_.ret));
    if (sig_.ret == Kind::Boolean) {
      for (const auto& p : sig_.params) {
        if (p.kind == Kind::Number) determined.push_back(p.name + " < " + literal(Kind::Number));
      }
    }
    for (const auto& f : earlier_) {
      if (f.ret != sig_.ret) continue;
      std::string call = f.name + "(";
      for (std::size_t a = 0; a < f.params.size(); ++a) {
        if (a) call += ", ";
        call += literal(f.params[a].kind);
      }
      determined.push_back(call + ")");
    }
    if (!variable.empty() && rng_.chance(0.3)) return rng_.pick(variable);
    return rng_.pick(determined);
  }

  NameGenerator& names_;
  Rng& rng_;
  const ProgramCorpusConfig& cfg_;
  const std::vector<Signature>& earlier_;
  std::set<std::string>& function_names_;
  Signature sig_;
  std::set<std::string> scope_;
  std::vector<Var> locals_;
  std::vector<std::string> lines_;
};

}  // namespace

std::string runningExampleSource() {
  return "function addNum(start: number, end: number): number {\n  return start + end;\n}\n";
}

std::vector<GeneratedProgram> generateProgramCorpus(std::uint64_t seed, const ProgramCorpusConfig& cfg) {
  NameGenerator names(seed);
  std::vector<GeneratedProgram> out;
  for (std::size_t i = 0; i < cfg.programs; ++i) {
    std::vector<Signature> sigs;
    std::set<std::string> function_names;
    std::string source;
    std::size_t nfun = 2 + names.rng().below(3);
    for (std::size_t f = 0; f < nfun; ++f) {
      FunctionBuilder fb(names, cfg, sigs, function_names);
      if (f) source += "\n";
      source += fb.build();
      sigs.push_back(fb.signature());
    }
    Program program = parseProgram(source);
    typeCheck(program, defaultUniverse());
    char filename[32];
    std::snprintf(filename, sizeof filename, "prog_%03zu.tl", i);
    out.push_back({filename, std::move(source), collectSlots(program).size()});
  }
  return out;
}

CorpusFiles writeCorpus(const std::filesystem::path& dir, std::uint64_t seed, std::size_t naming_samples,
                        const ProgramCorpusConfig& cfg) {
  std::filesystem::create_directories(dir);
  CorpusFiles files;
  for (const auto& p : generateProgramCorpus(seed, cfg)) {
    writeFile(dir / p.filename, p.source);
    ++files.programs;
    files.slots += p.slot_count;
  }
  auto corpus = generateNamingCorpus(seed, naming_samples, defaultUniverse());
  writeFile(dir / "names.tsv", formatCorpus(corpus));
  files.names = corpus.samples.size();
  return files;
}

}  // namespace softtype
