// Apache License, Version 2.0, refer to LICENSE.txt

// hpyp: train, evaluate, label, synthesize and audit topic models.
//
// Exit status: 0 success, 2 configuration error, 3 failed audit,
// 4 numeric failure, 1 anything else (I/O, malformed input).

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <variant>

#include "hpyp/corpus.hh"
#include "hpyp/errors.hh"
#include "hpyp/eval.hh"
#include "hpyp/hpyp_lda.hh"
#include "hpyp/tntm.hh"
#include "run_config.hh"

namespace fs = std::filesystem;
using namespace hpyp;
using namespace hpyp::cli;

namespace {

constexpr int kConfigError = 2;
constexpr int kAuditFailure = 3;
constexpr int kNumericError = 4;

// Settings shared by every command: config file, then flags.
struct CommonFlags {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::vector<std::string> ablate;
  std::optional<std::size_t> iterations, network_start, chains, replicates;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "INI configuration file");
    cmd->add_option("--set", set, "override one setting, section.key=value");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--model", model, "hpyp-lda, hdp-lda or tntm");
    cmd->add_option("--ablate", ablate, "tntm ablation: no-author, no-hashtag, no-misc, no-tag-to-word, "
                                        "no-power-law, no-network");
    cmd->add_option("--iterations", iterations, "Gibbs sweeps");
    cmd->add_option("--network-start", network_start, "text-only sweeps before the network stage");
    cmd->add_option("--chains", chains, "independent chains, run concurrently");
    cmd->add_option("--replicates", replicates, "completion replicates per test document");
  }

  RunConfig resolve_config() const {
    Settings s;
    if (!config.empty()) s = read_ini(config);
    for (const auto& a : set) apply_override(s, a);
    if (seed) s["run.seed"] = std::to_string(*seed);
    if (model) s["run.model"] = *model;
    if (!ablate.empty()) {
      std::string list = s.count("run.ablate") ? s["run.ablate"] : "";
      for (const auto& a : ablate) list += (list.empty() ? "" : ",") + a;
      s["run.ablate"] = list;
    }
    if (iterations) s["run.iterations"] = std::to_string(*iterations);
    if (network_start) s["run.network_start"] = std::to_string(*network_start);
    if (chains) s["run.chains"] = std::to_string(*chains);
    if (replicates) s["run.replicates"] = std::to_string(*replicates);
    return resolve(s);
  }
};

using Model = std::variant<HpypLda, Tntm>;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

template <class Writer, class Data>
void write_file(const fs::path& p, Writer write, const Data& data) {
  std::ofstream out = open_out(p);
  write(out, data);
}

Model load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string magic;
  in >> magic;
  in.seekg(0);
  if (magic == "hpyp-lda-model") return HpypLda::load(in);
  if (magic == "hpyp-tntm-model") return Tntm::load(in);
  throw IoError(path + " is not a model snapshot");
}

// Tweets read as plain documents, hashtags first.
Corpus merge_tweets(const TweetCorpus& t) {
  Corpus c;
  c.vocab = t.vocab;
  for (const Tweet& tw : t.tweets) {
    std::vector<Dish> d(tw.hashtags);
    d.insert(d.end(), tw.words.begin(), tw.words.end());
    c.docs.push_back(std::move(d));
  }
  return c;
}

// Maps ids of a separately parsed corpus onto the training vocabulary;
// tokens it lacks get fresh ids past the end.
class Remap {
 public:
  Remap(const Vocabulary& train, const Vocabulary& test) {
    std::size_t next = train.size();
    for (const auto& tok : test.tokens()) {
      auto id = train.lookup(tok);
      map_.push_back(id ? *id : static_cast<Dish>(next++));
    }
  }
  std::vector<Dish> operator()(const std::vector<Dish>& xs) const {
    std::vector<Dish> out;
    for (Dish x : xs) out.push_back(map_.at(x));
    return out;
  }

 private:
  std::vector<Dish> map_;
};

std::vector<std::size_t> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::size_t> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ls(line);
    std::size_t v;
    if (!(ls >> v)) throw ParseError("expected a class label", n);
    out.push_back(v);
  }
  return out;
}

struct AuditFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void audit_or_throw(const std::vector<std::string>& report, const std::string& what) {
  if (report.empty()) return;
  for (const auto& r : report) std::cerr << what << ": " << r << '\n';
  throw AuditFailure(what + ": " + std::to_string(report.size()) + " invariant violation(s)");
}

// ---- train

int train(const CommonFlags& flags, const std::string& corpus_path, const std::string& edges_path,
          const fs::path& out_dir) {
  const RunConfig cfg = flags.resolve_config();
  fs::create_directories(out_dir);
  Corpus plain;
  TweetCorpus tweets;
  if (cfg.tweets_input) {
    tweets = parse_tweets(corpus_path);
    if (!edges_path.empty()) load_edges(edges_path, tweets);
    if (cfg.model != ModelKind::kTntm) plain = merge_tweets(tweets);
  } else {
    plain = parse_plain(corpus_path);
  }

  std::vector<std::string> snapshots(cfg.chains), traces(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
  auto run_chain = [&](std::size_t i) {
    try {
      Rng rng(cfg.seed + i);
      std::ostringstream trace, snap;
      if (cfg.model == ModelKind::kTntm) {
        write_tntm_trace_header(trace);
        auto m = Tntm::build(tweets, cfg.tntm, rng);
        m.train(rng, [&](const TntmTraceRow& r) { write_tntm_trace_row(trace, r); });
        audit_or_throw(m.audit(), "chain " + std::to_string(i));
        m.save(snap);
      } else {
        write_trace_header(trace);
        auto m = HpypLda::init(plain, cfg.lda, rng);
        m.train(cfg.iterations, rng, [&](const TraceRow& r) { write_trace_row(trace, r); });
        audit_or_throw(m.audit(), "chain " + std::to_string(i));
        m.save(snap);
      }
      snapshots[i] = snap.str();
      traces[i] = trace.str();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < cfg.chains; ++i) pool.emplace_back(run_chain, i);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < cfg.chains; ++i) {
    const std::string suffix = cfg.chains == 1 ? "" : "." + std::to_string(i);
    open_out(out_dir / ("model" + suffix + ".snapshot")) << snapshots[i];
    open_out(out_dir / ("trace" + suffix + ".tsv")) << traces[i];
  }
  open_out(out_dir / "config.txt") << cfg.canonical();
  std::cout << "trained " << cfg.chains << " chain(s) of " << model_name(cfg.model) << " into " << out_dir.string()
            << '\n';
  return 0;
}

// ---- eval

struct ChainScores {
  double perplexity = 0.0;
  std::optional<double> purity, nmi;
};

ChainScores evaluate(const Model& model, const RunConfig& cfg, const std::string& test_path,
                     const std::vector<std::size_t>& labels, Rng& rng) {
  ChainScores out;
  std::vector<std::size_t> clusters;
  if (const auto* lda = std::get_if<HpypLda>(&model)) {
    Corpus test;
    if (cfg.tweets_input) {
      test = merge_tweets(parse_tweets(test_path));
    } else {
      test = parse_plain(test_path);
    }
    Remap remap(lda->vocab(), test.vocab);
    std::vector<TestDocument> docs;
    for (const auto& d : test.docs) docs.push_back(split_alternating(remap(d)));
    const LdaEstimate e = lda->recover();
    out.perplexity = perplexity(e, docs, cfg.completion, rng);
    for (const auto& d : test.docs) {
      auto theta = complete_document(e, remap(d), cfg.completion.replicates, rng);
      clusters.push_back(dominant_topic(theta));
    }
  } else {
    const Tntm& tm = std::get<Tntm>(model);
    TweetCorpus test = parse_tweets(test_path);
    Remap remap(tm.corpus().vocab, test.vocab);
    std::vector<TestTweet> tweets;
    for (const Tweet& t : test.tweets) {
      auto author = tm.corpus().authors.lookup(test.authors.token(static_cast<Dish>(t.author)));
      if (!author) throw IoError("test tweet '" + t.id + "' has an author unseen in training");
      TestTweet tt;
      tt.author = *author;
      tt.tags = split_alternating(remap(t.hashtags));
      tt.words = split_alternating(remap(t.words));
      tweets.push_back(std::move(tt));
    }
    const TntmEstimate e = tm.recover();
    out.perplexity = tntm_perplexity(e, tweets, cfg.completion, rng);
    for (const Tweet& t : test.tweets) {
      TestTweet whole;
      whole.author = tweets[clusters.size()].author;
      whole.tags.observed = remap(t.hashtags);
      whole.words.observed = remap(t.words);
      clusters.push_back(dominant_topic(complete_tweet(e, whole, cfg.completion.replicates, rng).second));
    }
  }
  if (!labels.empty()) {
    if (labels.size() != clusters.size())
      throw IoError("label file has " + std::to_string(labels.size()) + " entries for " +
                    std::to_string(clusters.size()) + " test documents");
    ClusterAssignment a{labels, clusters};
    out.purity = purity(a);
    out.nmi = nmi(a);
  }
  return out;
}

int eval(const CommonFlags& flags, const std::vector<std::string>& snapshots, const std::string& test_path,
         const std::string& labels_path, bool json) {
  RunConfig cfg = flags.resolve_config();
  const auto labels = labels_path.empty() ? std::vector<std::size_t>{} : read_labels(labels_path);
  MetricsReport report;
  std::string digest_input = cfg.canonical();
  double ppl = 0.0, pur = 0.0, mi = 0.0;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    Model m = load_snapshot(snapshots[i]);
    cfg.tweets_input = cfg.tweets_input || std::holds_alternative<Tntm>(m);
    std::ostringstream snap;
    std::visit([&](const auto& x) { x.save(snap); }, m);
    digest_input += snap.str();
    Rng rng(cfg.seed + i);
    ChainScores s = evaluate(m, cfg, test_path, labels, rng);
    const std::string prefix = snapshots.size() == 1 ? "" : "chain" + std::to_string(i) + ".";
    report.add(prefix + "perplexity", s.perplexity);
    ppl += s.perplexity;
    if (s.purity) {
      report.add(prefix + "purity", *s.purity);
      report.add(prefix + "nmi", *s.nmi);
      pur += *s.purity;
      mi += *s.nmi;
    }
  }
  if (snapshots.size() > 1) {
    const double n = static_cast<double>(snapshots.size());
    report.add("pooled.perplexity", ppl / n);
    if (!labels.empty()) {
      report.add("pooled.purity", pur / n);
      report.add("pooled.nmi", mi / n);
    }
  }
  report.config_digest = config_digest(digest_input);
  if (json)
    report.write_json(std::cout);
  else
    report.write_text(std::cout);
  return 0;
}

// ---- label

int label(const std::string& snapshot, std::size_t top_tags, std::size_t top_words) {
  Model m = load_snapshot(snapshot);
  if (const auto* tm = std::get_if<Tntm>(&m)) {
    auto labels = tm->topic_labels(top_tags, top_words);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (!tm->space().alive(static_cast<Dish>(k))) continue;
      std::cout << k << '\t';
      for (std::size_t i = 0; i < labels[k].hashtags.size(); ++i) std::cout << (i ? " #" : "#") << labels[k].hashtags[i];
      std::cout << '\t';
      for (std::size_t i = 0; i < labels[k].words.size(); ++i) std::cout << (i ? " " : "") << labels[k].words[i];
      std::cout << '\n';
    }
    return 0;
  }
  const HpypLda& lda = std::get<HpypLda>(m);
  const LdaEstimate e = lda.recover();
  for (std::size_t k = 0; k < e.topic_words.size(); ++k) {
    if (!lda.space().alive(static_cast<Dish>(k))) continue;
    std::vector<std::size_t> order(e.topic_words[k].size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t n = std::min(top_words, order.size());
    std::partial_sort(order.begin(), order.begin() + n, order.end(), [&](std::size_t a, std::size_t b) {
      return e.topic_words[k][a] > e.topic_words[k][b] || (e.topic_words[k][a] == e.topic_words[k][b] && a < b);
    });
    std::cout << k << "\t\t";
    for (std::size_t i = 0; i < n; ++i) std::cout << (i ? " " : "") << lda.vocab().token(static_cast<Dish>(order[i]));
    std::cout << '\n';
  }
  return 0;
}

// ---- synth

int synth(const CommonFlags& flags, const fs::path& out_dir) {
  RunConfig cfg = flags.resolve_config();
  const bool tweets = cfg.model == ModelKind::kTntm || cfg.tweets_input;
  SynthConfig sc = cfg.synth;
  if (tweets && sc.authors == 0) sc.authors = 10;
  if (!tweets) sc.authors = 0;
  Rng rng(cfg.seed);
  SynthCorpus s = synthesize(sc, rng);
  fs::create_directories(out_dir);
  const std::size_t D = tweets ? s.tweets.tweets.size() : s.corpus.docs.size();
  auto [train_ids, test_ids] = split_indices(D, cfg.test_fraction, rng);
  if (tweets) {
    TweetCorpus train = s.tweets, test = s.tweets;
    train.tweets.clear();
    test.tweets.clear();
    for (auto i : train_ids) train.tweets.push_back(s.tweets.tweets[i]);
    for (auto i : test_ids) test.tweets.push_back(s.tweets.tweets[i]);
    write_file(out_dir / "train.tsv", write_tweets, train);
    write_file(out_dir / "test.tsv", write_tweets, test);
    write_file(out_dir / "edges.tsv", write_edges, s.tweets);
  } else {
    Corpus train, test;
    train.vocab = test.vocab = s.corpus.vocab;
    for (auto i : train_ids) train.docs.push_back(s.corpus.docs[i]);
    for (auto i : test_ids) test.docs.push_back(s.corpus.docs[i]);
    write_file(out_dir / "train.txt", write_plain, train);
    write_file(out_dir / "test.txt", write_plain, test);
  }
  auto labels = open_out(out_dir / "test_labels.txt");
  for (auto i : test_ids) labels << s.truth.labels[i] << '\n';
  std::cout << "wrote " << train_ids.size() << " training and " << test_ids.size() << " test documents to "
            << out_dir.string() << '\n';
  return 0;
}

// ---- audit

int audit(const std::vector<std::string>& snapshots) {
  for (const auto& path : snapshots) {
    Model m = load_snapshot(path);
    audit_or_throw(std::visit([](const auto& x) { return x.audit(); }, m), path);
    std::cout << path << ": ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical Pitman-Yor topic models for documents and tweets"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string corpus_path, edges_path, out_dir, test_path, labels_path;
  std::vector<std::string> snapshots;
  bool json = false;
  std::size_t top_tags = 5, top_words = 10;

  auto* t = app.add_subcommand("train", "fit a model and write snapshots and traces");
  flags.attach(t);
  t->add_option("--corpus", corpus_path, "training corpus")->required()->check(CLI::ExistingFile);
  t->add_option("--edges", edges_path, "follower edges, source TAB target")->check(CLI::ExistingFile);
  t->add_option("-o,--out", out_dir, "output directory")->required();

  auto* e = app.add_subcommand("eval", "held-out perplexity, and purity/NMI when labels are given");
  flags.attach(e);
  e->add_option("--snapshot", snapshots, "model snapshot, once per chain")->required()->check(CLI::ExistingFile);
  e->add_option("--test", test_path, "test corpus")->required()->check(CLI::ExistingFile);
  e->add_option("--labels", labels_path, "one class label per test document")->check(CLI::ExistingFile);
  e->add_flag("--json", json, "JSON report");

  auto* l = app.add_subcommand("label", "top hashtags and words per topic");
  std::string label_snapshot;
  l->add_option("--snapshot", label_snapshot, "model snapshot")->required()->check(CLI::ExistingFile);
  l->add_option("--top-tags", top_tags, "hashtags per topic");
  l->add_option("--top-words", top_words, "words per topic");

  auto* s = app.add_subcommand("synth", "generate a synthetic corpus with a train/test split");
  flags.attach(s);
  s->add_option("-o,--out", out_dir, "output directory")->required();

  auto* a = app.add_subcommand("audit", "check the count invariants of snapshots");
  a->add_option("--snapshot", snapshots, "model snapshot")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*t) return train(flags, corpus_path, edges_path, out_dir);
    if (*e) return eval(flags, snapshots, test_path, labels_path, json);
    if (*l) return label(label_snapshot, top_tags, top_words);
    if (*s) return synth(flags, out_dir);
    if (*a) return audit(snapshots);
  } catch (const ConfigError& err) {
    for (const auto& p : err.problems()) std::cerr << "config: " << p << '\n';
    return kConfigError;
  } catch (const AuditFailure& err) {
    std::cerr << err.what() << '\n';
    return kAuditFailure;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kNumericError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
