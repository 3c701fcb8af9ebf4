#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace softtype {

struct GeneratedProgram {
  std::string filename;
  std::string source;  // fully annotated gold program
  std::size_t slot_count;
};

struct ProgramCorpusConfig {
  std::size_t programs = 50;
  // Probability that a parameter, local or function gets a conventional
  // name, a neutral one, or (the remainder) one suggesting another type.
  double conventional_name = 0.65;
  double neutral_name = 0.22;
};

// Seeded synthetic gold programs in the toy language. Every program passes the
// reference type checker.
std::vector<GeneratedProgram> generateProgramCorpus(std::uint64_t seed, const ProgramCorpusConfig& cfg = {});

// The annotated function used as the running example:
//   function addNum(start: number, end: number): number { return start + end; }
std::string runningExampleSource();

struct CorpusFiles {
  std::size_t programs = 0;
  std::size_t slots = 0;
  std::size_t names = 0;
};

// Writes prog_NNN.tl files plus names.tsv (a labelled naming corpus) into dir.
CorpusFiles writeCorpus(const std::filesystem::path& dir, std::uint64_t seed, std::size_t naming_samples = 1000,
                        const ProgramCorpusConfig& cfg = {});

}  // namespace softtype
