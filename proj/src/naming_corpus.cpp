#include "softtype/naming_corpus.hpp"

#include <array>
#include <cctype>
#include <string_view>
#include <vector>

#include "softtype/error.hpp"

namespace softtype {

namespace {

using Kind = NameGenerator::Kind;

const std::vector<std::string_view> kNumberRoots = {
    "count", "cnt",   "idx",   "index",  "num",    "total", "size", "len",   "length", "offset",
    "start", "end",   "width", "height", "sum",    "age",   "year", "amount", "price", "score",
    "level", "port",  "limit", "step",   "pos",    "depth", "rate", "ratio",  "max",   "min",
};
const std::vector<std::string_view> kStringRoots = {
    "name",  "msg",    "message", "str",   "text",  "label", "title",  "path",   "url",  "prefix",
    "suffix", "word",  "email",   "city",  "lang",  "desc",  "author", "host",   "greeting", "caption",
    "line",  "comment", "slug",   "locale", "token", "str",  "text",   "name",   "msg",  "title",
};
const std::vector<std::string_view> kBooleanHeads = {
    "Valid", "Empty", "Ready", "Enabled", "Visible", "Open", "Done",  "Active", "Loaded", "Dirty",
    "Admin", "Items", "Error", "Children", "Changes", "Access", "Focus", "Selected", "Locked", "Hidden",
};
const std::vector<std::string_view> kBooleanPrefixes = {"is", "has", "should", "can", "was"};
const std::vector<std::string_view> kBooleanBare = {"enabled", "visible", "done", "ready", "valid", "active"};
const std::vector<std::string_view> kModifiers = {
    "user", "file", "item", "page", "cur", "new", "old", "first", "last", "base", "row", "col", "tmp", "src",
};
const std::vector<std::string_view> kVerbs = {"get", "compute", "calc", "make", "find", "read", "load", "to", "add", "set"};
const std::vector<std::string_view> kNeutral = {
    "value", "data", "item", "arg", "input", "val", "obj", "thing", "elem", "res",
    "a",     "b",    "c",    "x",   "y",     "v",   "p",   "q",     "foo",  "bar",
};
const std::vector<std::string_view> kNeutralFunctions = {
    "process", "handle", "run", "apply", "helper", "doWork", "step", "transform", "update", "exec",
};

std::string capitalise(std::string_view w) {
  std::string s(w);
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

const std::vector<std::string_view>& roots(Kind kind) { return kind == Kind::Number ? kNumberRoots : kStringRoots; }

}  // namespace

std::string_view kindTypeName(Kind kind) {
  switch (kind) {
    case Kind::Number: return "number";
    case Kind::String: return "string";
    case Kind::Boolean: return "boolean";
  }
  return "";
}

std::string NameGenerator::variable(Kind kind) {
  if (kind == Kind::Boolean) {
    if (rng_.chance(0.2)) return std::string(rng_.pick(kBooleanBare));
    return std::string(rng_.pick(kBooleanPrefixes)) + std::string(rng_.pick(kBooleanHeads));
  }
  std::string_view root = rng_.pick(roots(kind));
  double r = rng_.uniform();
  if (r < 0.4) return std::string(root);
  if (r < 0.85) return std::string(rng_.pick(kModifiers)) + capitalise(root);
  return std::string(rng_.pick(kModifiers)) + "_" + std::string(root);
}

std::string NameGenerator::function(Kind kind) {
  if (kind == Kind::Boolean) {
    return std::string(rng_.pick(kBooleanPrefixes)) + std::string(rng_.pick(kBooleanHeads));
  }
  std::string_view root = rng_.pick(roots(kind));
  if (rng_.chance(0.3)) {
    return std::string(rng_.pick(kVerbs)) + capitalise(rng_.pick(kModifiers)) + capitalise(root);
  }
  return std::string(rng_.pick(kVerbs)) + capitalise(root);
}

std::string NameGenerator::neutral() { return std::string(rng_.pick(kNeutral)); }

std::string NameGenerator::neutralFunction() { return std::string(rng_.pick(kNeutralFunctions)); }

LabelledCorpus generateNamingCorpus(std::uint64_t seed, std::size_t count, const TypeUniverse& types) {
  NameGenerator gen(seed);
  LabelledCorpus corpus{types, {}};
  constexpr std::array<Kind, 3> kinds = {Kind::Number, Kind::String, Kind::Boolean};
  for (std::size_t i = 0; i < count; ++i) {
    Kind kind = kinds[i % kinds.size()];
    auto type = types.find(kindTypeName(kind));
    if (!type) throw InvalidArgument("type universe lacks '" + std::string(kindTypeName(kind)) + "'");
    std::string name = gen.rng().chance(0.25) ? gen.function(kind) : gen.variable(kind);
    corpus.samples.push_back({std::move(name), *type});
  }
  return corpus;
}

}  // namespace softtype
