// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hpyp/gp_network.hh"
#include "hpyp/pyp_graph.hh"
#include "hpyp/random.hh"

namespace hpyp {

class Vocabulary {
 public:
  Dish intern(const std::string& token);
  std::optional<Dish> lookup(const std::string& token) const;
  const std::string& token(Dish id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Dish> index_;
};

struct Corpus {
  Vocabulary vocab;
  std::vector<std::vector<Dish>> docs;

  std::size_t tokens() const;
  bool operator==(const Corpus& other) const = default;
};

struct Tweet {
  std::string id;
  std::size_t author = 0;
  std::vector<Dish> hashtags;
  std::vector<Dish> words;
  bool operator==(const Tweet& other) const = default;
};

struct TweetCorpus {
  Vocabulary vocab;  // shared by hashtags and words
  Vocabulary authors;
  std::vector<Tweet> tweets;
  std::vector<AuthorPair> edges;  // follower links, source then target

  bool operator==(const TweetCorpus& other) const = default;
};

// One document per line, whitespace separated. Blank lines are empty
// documents.
Corpus parse_plain(const std::string& path);
Corpus parse_plain(std::istream& in);
void write_plain(std::ostream& out, const Corpus& corpus);

// One record per line: id TAB author TAB hashtags (comma separated, leading
// '#' optional) TAB words (space separated).
TweetCorpus parse_tweets(const std::string& path);
TweetCorpus parse_tweets(std::istream& in);
void write_tweets(std::ostream& out, const TweetCorpus& corpus);

// "source TAB target" per line; both must be known authors.
void load_edges(const std::string& path, TweetCorpus& corpus);
void load_edges(std::istream& in, TweetCorpus& corpus);
void write_edges(std::ostream& out, const TweetCorpus& corpus);

// Document-level split keeping each side in corpus order. The test side gets
// round(test_fraction * D) documents.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t docs,
                                                                            double test_fraction, Rng& rng);
std::pair<Corpus, Corpus> split_documents(const Corpus& corpus, double test_fraction, Rng& rng);
std::pair<TweetCorpus, TweetCorpus> split_documents(const TweetCorpus& corpus, double test_fraction, Rng& rng);

struct PypLevel {
  double discount = 0.0;
  double concentration = 1.0;
};

struct SynthConfig {
  std::size_t topics = 5;  // truncation of the root GEM
  std::size_t docs = 100;
  std::size_t vocab = 200;
  std::size_t words_per_doc = 20;
  double hashtags_per_doc = 2.0;  // Poisson mean, tweet mode only
  std::size_t authors = 0;        // 0 selects plain-corpus mode
  std::size_t truncation = 200;   // sticks per PYP draw
  PypLevel root{0.0, 1.0};
  PypLevel shared{0.0, 5.0};   // nu (plain) / author level (tweets)
  PypLevel doc{0.0, 5.0};      // theta, eta
  PypLevel vocab_root{0.7, 50.0};
  PypLevel topic_word{0.7, 5.0};
  PypLevel topic_tag{0.7, 1.0};
  double lambda = 1.0;
  KernelParams kernel;
  bool self_links = false;
  std::optional<double> fixed_q;  // forces every link strength
};

struct SynthTruth {
  std::vector<double> root;
  std::vector<std::vector<double>> shared;       // nu; one per author in tweet mode
  std::vector<std::vector<double>> doc_topics;   // theta per document
  std::vector<std::vector<double>> tag_topics;   // theta' per tweet
  std::vector<std::vector<double>> topic_words;  // phi / psi
  std::vector<std::vector<double>> topic_tags;   // psi'
  std::vector<std::size_t> labels;               // dominant true topic per document
  Eigen::VectorXd q;
};

struct SynthCorpus {
  Corpus corpus;
  TweetCorpus tweets;
  SynthTruth truth;
};

// Draw from PYP(level, base) by truncated stick-breaking with atoms from
// the base; mass beyond the truncation is spread over the base.
std::vector<double> sample_pyp_over(const std::vector<double>& base, const PypLevel& level,
                                    std::size_t truncation, Rng& rng);

SynthCorpus synthesize(const SynthConfig& config, Rng& rng);

}  // namespace hpyp
