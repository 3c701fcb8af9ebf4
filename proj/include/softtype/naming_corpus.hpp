#pragma once

#include <cstdint>
#include <string>

#include "softtype/natural.hpp"
#include "softtype/rng.hpp"

namespace softtype {

// Seeded generator of identifier names that follow simple conventions:
// count/idx/num-style roots are numbers, name/msg/str-style roots are strings,
// is/has-style prefixes are booleans.
class NameGenerator {
public:
  enum class Kind { Number, String, Boolean };

  explicit NameGenerator(std::uint64_t seed) : rng_(seed) {}

  // A conventional variable or parameter name for the kind.
  std::string variable(Kind kind);
  // A conventional function name whose return value has the kind.
  std::string function(Kind kind);
  // A name that carries no type signal ("value", "data", "tmp", ...).
  std::string neutral();
  std::string neutralFunction();

  Rng& rng() { return rng_; }

private:
  Rng rng_;
};

std::string_view kindTypeName(NameGenerator::Kind kind);

// `count` labelled names drawn evenly over the three kinds; variable and
// function names mixed. Types are looked up by name in `types`.
LabelledCorpus generateNamingCorpus(std::uint64_t seed, std::size_t count, const TypeUniverse& types);

}  // namespace softtype
