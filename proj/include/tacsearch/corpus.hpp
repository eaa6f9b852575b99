#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacsearch/script.hpp"

namespace tacsearch {

// Deterministic synthetic corpus. Each file is self-contained: definitions
// first, then theorems whose proofs may reference earlier theorems of the
// same file as lemmas. Every emitted script replays to Pass (the generator
// replays each proof before emitting it and aborts on a template bug).
std::vector<CorpusFile> generate_corpus(uint64_t seed, int n_files, int thms_per_file);

struct Split {
  std::vector<CorpusFile> train;
  std::vector<CorpusFile> test;
};

// File-level split; test files without proofs are removed.
Split split_corpus(const std::vector<CorpusFile>& corpus, double ratio, uint64_t seed);

// Manifest JSON: file names, theorem counts, totals.
std::string corpus_manifest_json(const std::vector<CorpusFile>& corpus);

// Env visible to theorem `index` of a file: all definitions plus the
// statements of theorems 0..index-1.
Env env_for_theorem(const CorpusFile& file, size_t index);

}  // namespace tacsearch
