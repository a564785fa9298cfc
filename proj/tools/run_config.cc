// Apache License, Version 2.0, refer to LICENSE.txt

#include "run_config.hh"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <sstream>

namespace hpyp::cli {

namespace {

using Problems = std::vector<std::string>;

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_count(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

using Setter = std::function<void(const std::string& key, const std::string& value, RunConfig&, Problems&)>;

Setter real(std::function<void(RunConfig&, double)> set) {
  return [set](const std::string& key, const std::string& value, RunConfig& c, Problems& out) {
    if (auto v = to_double(value))
      set(c, *v);
    else
      out.push_back(key + ": '" + value + "' is not a number");
  };
}

Setter count(std::function<void(RunConfig&, std::uint64_t)> set) {
  return [set](const std::string& key, const std::string& value, RunConfig& c, Problems& out) {
    if (auto v = to_count(value))
      set(c, *v);
    else
      out.push_back(key + ": '" + value + "' is not a non-negative integer");
  };
}

Setter flag(std::function<void(RunConfig&, bool)> set) {
  return [set](const std::string& key, const std::string& value, RunConfig& c, Problems& out) {
    if (auto v = to_bool(value))
      set(c, *v);
    else
      out.push_back(key + ": '" + value + "' is not true or false");
  };
}

const std::vector<std::string> kLdaLevels{"root", "shared", "doc", "vocab_root", "topic_word"};
const std::vector<std::string> kTntmLevels{"global", "misc",       "author",    "tweet",     "tag_doc",
                                           "word_doc", "vocab_root", "topic_tag", "topic_word"};

// Works for const and mutable configs alike.
template <class Config>
auto lda_level(Config& c, const std::string& name) -> decltype(&c.root) {
  if (name == "root") return &c.root;
  if (name == "shared") return &c.shared;
  if (name == "doc") return &c.doc;
  if (name == "vocab_root") return &c.vocab_root;
  if (name == "topic_word") return &c.topic_word;
  return nullptr;
}

template <class Config>
auto tntm_level(Config& c, const std::string& name) -> decltype(&c.global) {
  if (name == "global") return &c.global;
  if (name == "misc") return &c.misc;
  if (name == "author") return &c.author;
  if (name == "tweet") return &c.tweet;
  if (name == "tag_doc") return &c.tag_doc;
  if (name == "word_doc") return &c.word_doc;
  if (name == "vocab_root") return &c.vocab_root;
  if (name == "topic_tag") return &c.topic_tag;
  if (name == "topic_word") return &c.topic_word;
  return nullptr;
}

std::map<std::string, Setter> schema() {
  std::map<std::string, Setter> s;
  s["run.model"] = [](const std::string& key, const std::string& v, RunConfig& c, Problems& out) {
    try {
      c.model = parse_model(v);
    } catch (const std::exception&) {
      out.push_back(key + ": unknown model '" + v + "' (hpyp-lda, hdp-lda or tntm)");
    }
  };
  s["run.seed"] = count([](RunConfig& c, std::uint64_t v) { c.seed = v; });
  s["run.chains"] = count([](RunConfig& c, std::uint64_t v) { c.chains = v; });
  s["run.iterations"] = count([](RunConfig& c, std::uint64_t v) { c.iterations = v; });
  s["run.network_start"] = count([](RunConfig& c, std::uint64_t v) { c.tntm.network_start = v; });
  s["run.initial_topics"] = count([](RunConfig& c, std::uint64_t v) {
    c.lda.initial_topics = v;
    c.tntm.initial_topics = v;
  });
  s["run.max_topics"] = count([](RunConfig& c, std::uint64_t v) {
    const std::size_t cap = v == 0 ? std::numeric_limits<std::size_t>::max() : v;
    c.lda.max_topics = cap;
    c.tntm.max_topics = cap;
  });
  s["run.sample_concentrations"] = flag([](RunConfig& c, bool v) {
    c.lda.sample_concentrations = v;
    c.tntm.sample_concentrations = v;
  });
  s["run.ablate"] = [](const std::string&, const std::string& v, RunConfig& c, Problems& out) {
    apply_ablations(c.tntm.ablate, v, out);
  };
  s["run.input"] = [](const std::string& key, const std::string& v, RunConfig& c, Problems& out) {
    if (v == "plain" || v == "tweets")
      c.tweets_input = v == "tweets";
    else
      out.push_back(key + ": '" + v + "' is neither plain nor tweets");
  };
  s["run.replicates"] = count([](RunConfig& c, std::uint64_t v) { c.completion.replicates = v; });
  s["run.test_fraction"] = real([](RunConfig& c, double v) { c.test_fraction = v; });
  s["run.lambda"] = real([](RunConfig& c, double v) { c.tntm.lambda = v; });
  s["prior.shape"] = real([](RunConfig& c, double v) {
    c.lda.prior.shape = v;
    c.tntm.prior.shape = v;
  });
  s["prior.rate"] = real([](RunConfig& c, double v) {
    c.lda.prior.rate = v;
    c.tntm.prior.rate = v;
  });
  s["kernel.s"] = real([](RunConfig& c, double v) { c.tntm.kernel.s = v; });
  s["kernel.l"] = real([](RunConfig& c, double v) { c.tntm.kernel.l = v; });
  s["kernel.sigma"] = real([](RunConfig& c, double v) { c.tntm.kernel.sigma = v; });
  s["kernel.self_links"] = flag([](RunConfig& c, bool v) { c.tntm.self_links = v; });
  std::vector<std::string> levels = kLdaLevels;
  levels.insert(levels.end(), kTntmLevels.begin(), kTntmLevels.end());
  for (const std::string& name : levels) {
    s[name + ".discount"] = real([name](RunConfig& c, double v) {
      if (auto* l = lda_level(c.lda, name)) l->discount = v;
      if (auto* l = tntm_level(c.tntm, name)) l->discount = v;
    });
    s[name + ".concentration"] = real([name](RunConfig& c, double v) {
      if (auto* l = lda_level(c.lda, name)) l->concentration = v;
      if (auto* l = tntm_level(c.tntm, name)) l->concentration = v;
    });
  }
  s["synth.topics"] = count([](RunConfig& c, std::uint64_t v) { c.synth.topics = v; });
  s["synth.docs"] = count([](RunConfig& c, std::uint64_t v) { c.synth.docs = v; });
  s["synth.vocab"] = count([](RunConfig& c, std::uint64_t v) { c.synth.vocab = v; });
  s["synth.words_per_doc"] = count([](RunConfig& c, std::uint64_t v) { c.synth.words_per_doc = v; });
  s["synth.hashtags_per_doc"] = real([](RunConfig& c, double v) { c.synth.hashtags_per_doc = v; });
  s["synth.authors"] = count([](RunConfig& c, std::uint64_t v) { c.synth.authors = v; });
  return s;
}

void check_level(const std::string& name, const PypLevel& l, Problems& out) {
  if (!(l.discount >= 0.0 && l.discount < 1.0)) out.push_back(name + ".discount must lie in [0, 1)");
  if (!(l.concentration > -l.discount)) out.push_back(name + ".concentration must exceed minus the discount");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(std::to_string(problems.size()) + " configuration problem(s)"),
      problems_(std::move(problems)) {}

ModelKind parse_model(const std::string& name) {
  if (name == "hpyp-lda") return ModelKind::kHpypLda;
  if (name == "hdp-lda") return ModelKind::kHdpLda;
  if (name == "tntm") return ModelKind::kTntm;
  throw std::invalid_argument("unknown model " + name);
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHpypLda:
      return "hpyp-lda";
    case ModelKind::kHdpLda:
      return "hdp-lda";
    case ModelKind::kTntm:
      return "tntm";
  }
  return "";
}

void apply_ablations(TntmAblation& ablate, const std::string& list, std::vector<std::string>& problems) {
  std::istringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (item == "no-author")
      ablate.authors = false;
    else if (item == "no-hashtag")
      ablate.hashtags = false;
    else if (item == "no-misc")
      ablate.misc = false;
    else if (item == "no-tag-to-word")
      ablate.tag_to_word = false;
    else if (item == "no-power-law")
      ablate.power_law = false;
    else if (item == "no-network")
      ablate.network = false;
    else
      problems.push_back("ablate: unknown ablation '" + item + "'");
  }
}

Settings read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({e.what()});
  }
  Settings out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      out[section] = body.data();  // key outside any section; rejected later
      continue;
    }
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

void apply_override(Settings& settings, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    settings["!" + assignment] = "";
    return;
  }
  settings[assignment.substr(0, eq)] = assignment.substr(eq + 1);
}

RunConfig resolve(const Settings& settings) {
  static const auto kSchema = schema();
  RunConfig c;
  Problems problems;
  for (const auto& [key, value] : settings) {
    if (!key.empty() && key[0] == '!') {
      problems.push_back("override '" + key.substr(1) + "' is not of the form section.key=value");
      continue;
    }
    auto it = kSchema.find(key);
    if (it == kSchema.end()) {
      problems.push_back(key + ": unknown setting");
      continue;
    }
    it->second(key, value, c, problems);
  }
  if (!settings.count("run.seed")) problems.push_back("run.seed is required");
  if (c.chains == 0) problems.push_back("run.chains must be at least 1");
  if (c.completion.replicates == 0) problems.push_back("run.replicates must be at least 1");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) problems.push_back("run.test_fraction must lie in (0, 1)");
  if (c.lda.initial_topics == 0) problems.push_back("run.initial_topics must be at least 1");
  if (c.lda.initial_topics > c.lda.max_topics) problems.push_back("run.initial_topics exceeds run.max_topics");
  // Without an explicit start the network stage covers the second half.
  if (!settings.count("run.network_start")) c.tntm.network_start = c.iterations / 2;
  if (c.model == ModelKind::kTntm && c.tntm.network_start > c.iterations)
    problems.push_back("run.network_start exceeds run.iterations");
  if (!(c.lda.prior.shape > 0.0)) problems.push_back("prior.shape must be positive");
  if (!(c.lda.prior.rate > 0.0)) problems.push_back("prior.rate must be positive");
  if (!(c.tntm.lambda > 0.0)) problems.push_back("run.lambda must be positive");
  for (auto [name, v] : {std::pair{"kernel.s", c.tntm.kernel.s}, {"kernel.l", c.tntm.kernel.l},
                         {"kernel.sigma", c.tntm.kernel.sigma}})
    if (!(v > 0.0)) problems.push_back(std::string(name) + " must be positive");
  for (const std::string& name : kLdaLevels) check_level(name, *lda_level(c.lda, name), problems);
  for (const std::string& name : kTntmLevels)
    if (!lda_level(c.lda, name)) check_level(name, *tntm_level(c.tntm, name), problems);
  if (c.synth.topics == 0) problems.push_back("synth.topics must be at least 1");
  if (c.synth.docs == 0) problems.push_back("synth.docs must be at least 1");
  if (c.synth.vocab == 0) problems.push_back("synth.vocab must be at least 1");
  if (!(c.synth.hashtags_per_doc >= 0.0)) problems.push_back("synth.hashtags_per_doc must be non-negative");
  const TntmAblation none;
  const TntmAblation& a = c.tntm.ablate;
  const bool ablated = a.authors != none.authors || a.hashtags != none.hashtags || a.misc != none.misc ||
                       a.tag_to_word != none.tag_to_word || a.power_law != none.power_law ||
                       a.network != none.network;
  if (ablated && c.model != ModelKind::kTntm) problems.push_back("run.ablate applies to the tntm model only");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  if (c.model == ModelKind::kHdpLda) c.lda = c.lda.as_dirichlet();
  if (c.model == ModelKind::kTntm) c.tweets_input = true;
  c.tntm.iterations = c.iterations;
  return c;
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  auto level = [&](const std::string& name, const PypLevel& l) {
    out << name << ".discount=" << format_double(l.discount) << '\n'
        << name << ".concentration=" << format_double(l.concentration) << '\n';
  };
  out << "run.model=" << model_name(model) << "\nrun.seed=" << seed << "\nrun.chains=" << chains
      << "\nrun.iterations=" << iterations << "\nrun.replicates=" << completion.replicates
      << "\nrun.input=" << (tweets_input ? "tweets" : "plain") << '\n';
  if (model == ModelKind::kTntm) {
    const TntmConfig& t = tntm;
    out << "run.network_start=" << t.network_start << "\nrun.initial_topics=" << t.initial_topics
        << "\nrun.max_topics=" << (t.max_topics == std::numeric_limits<std::size_t>::max() ? 0 : t.max_topics)
        << "\nrun.sample_concentrations=" << t.sample_concentrations << "\nrun.lambda=" << format_double(t.lambda)
        << "\nablate=" << t.ablate.authors << t.ablate.hashtags << t.ablate.misc << t.ablate.tag_to_word
        << t.ablate.power_law << t.ablate.network << "\nprior=" << format_double(t.prior.shape) << ','
        << format_double(t.prior.rate) << "\nkernel=" << format_double(t.kernel.s) << ','
        << format_double(t.kernel.l) << ',' << format_double(t.kernel.sigma) << ',' << t.self_links << '\n';
    for (const std::string& name : kTntmLevels) level(name, *tntm_level(t, name));
  } else {
    const LdaConfig& l = lda;
    out << "run.initial_topics=" << l.initial_topics
        << "\nrun.max_topics=" << (l.max_topics == std::numeric_limits<std::size_t>::max() ? 0 : l.max_topics)
        << "\nrun.sample_concentrations=" << l.sample_concentrations << "\nprior=" << format_double(l.prior.shape)
        << ',' << format_double(l.prior.rate) << '\n';
    for (const std::string& name : kLdaLevels) level(name, *lda_level(l, name));
  }
  return out.str();
}

}  // namespace hpyp::cli
