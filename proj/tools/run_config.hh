// Apache License, Version 2.0, refer to LICENSE.txt

// Run configuration for the command-line tool: an INI file, then flag
// overrides, then validation that collects every problem before giving up.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpyp/corpus.hh"
#include "hpyp/eval.hh"
#include "hpyp/hpyp_lda.hh"
#include "hpyp/tntm.hh"

namespace hpyp::cli {

enum class ModelKind { kHpypLda, kHdpLda, kTntm };

struct RunConfig {
  ModelKind model = ModelKind::kHpypLda;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::size_t iterations = 2000;
  bool tweets_input = false;  // documents are tweet records
  LdaConfig lda;
  TntmConfig tntm;
  CompletionConfig completion;
  SynthConfig synth;
  double test_fraction = 0.2;

  // Canonical key = value listing of every setting, in a fixed order.
  std::string canonical() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Raw settings keyed "section.key".
using Settings = std::map<std::string, std::string>;

Settings read_ini(const std::string& path);
// "section.key=value"; malformed entries are reported by resolve.
void apply_override(Settings& settings, const std::string& assignment);
// Throws ConfigError listing every unknown key, bad value and range problem.
RunConfig resolve(const Settings& settings);

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind kind);
// Comma-separated ablation names, e.g. "no-hashtag,no-network".
void apply_ablations(TntmAblation& ablate, const std::string& list, std::vector<std::string>& problems);

}  // namespace hpyp::cli
