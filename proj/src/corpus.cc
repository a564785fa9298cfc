// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/corpus.hh"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hpyp/errors.hh"

namespace hpyp {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  return in;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<double> mix(double w, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = w * a[i] + (1.0 - w) * b[i];
  return out;
}

}  // namespace

Dish Vocabulary::intern(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  Dish id = static_cast<Dish>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<Dish> Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::tokens() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

Corpus parse_plain(std::istream& in) {
  Corpus c;
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    any = true;
    strip_cr(line);
    std::vector<Dish> doc;
    for (const std::string& tok : whitespace_tokens(line)) doc.push_back(c.vocab.intern(tok));
    c.docs.push_back(std::move(doc));
  }
  if (!any) throw std::domain_error("empty corpus");
  if (c.vocab.size() == 0) throw std::domain_error("corpus has no tokens");
  return c;
}

Corpus parse_plain(const std::string& path) {
  auto in = open_input(path);
  return parse_plain(in);
}

void write_plain(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.docs) {
    for (std::size_t i = 0; i < doc.size(); ++i) out << (i ? " " : "") << corpus.vocab.token(doc[i]);
    out << '\n';
  }
}

TweetCorpus parse_tweets(std::istream& in) {
  TweetCorpus c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 4)
      throw ParseError("expected 4 tab-separated fields, found " + std::to_string(fields.size()), lineno);
    if (fields[0].empty()) throw ParseError("empty tweet id", lineno);
    if (fields[1].empty()) throw ParseError("empty author id", lineno);
    Tweet t;
    t.id = fields[0];
    t.author = c.authors.intern(fields[1]);
    if (!fields[2].empty()) {
      for (std::string tag : split_on(fields[2], ',')) {
        if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
        if (tag.empty()) throw ParseError("empty hashtag", lineno);
        if (tag.find_first_of(" \t") != std::string::npos) throw ParseError("hashtag contains whitespace", lineno);
        t.hashtags.push_back(c.vocab.intern(tag));
      }
    }
    for (const std::string& w : whitespace_tokens(fields[3])) t.words.push_back(c.vocab.intern(w));
    c.tweets.push_back(std::move(t));
  }
  if (c.tweets.empty()) throw std::domain_error("empty tweet corpus");
  return c;
}

TweetCorpus parse_tweets(const std::string& path) {
  auto in = open_input(path);
  return parse_tweets(in);
}

void write_tweets(std::ostream& out, const TweetCorpus& corpus) {
  for (const Tweet& t : corpus.tweets) {
    out << t.id << '\t' << corpus.authors.token(static_cast<Dish>(t.author)) << '\t';
    for (std::size_t i = 0; i < t.hashtags.size(); ++i) out << (i ? ",#" : "#") << corpus.vocab.token(t.hashtags[i]);
    out << '\t';
    for (std::size_t i = 0; i < t.words.size(); ++i) out << (i ? " " : "") << corpus.vocab.token(t.words[i]);
    out << '\n';
  }
}

void load_edges(std::istream& in, TweetCorpus& corpus) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 2) throw ParseError("expected 'source<TAB>target'", lineno);
    auto src = corpus.authors.lookup(fields[0]);
    auto dst = corpus.authors.lookup(fields[1]);
    if (!src) throw ParseError("unknown author '" + fields[0] + "'", lineno);
    if (!dst) throw ParseError("unknown author '" + fields[1] + "'", lineno);
    corpus.edges.emplace_back(*src, *dst);
  }
}

void load_edges(const std::string& path, TweetCorpus& corpus) {
  auto in = open_input(path);
  load_edges(in, corpus);
}

void write_edges(std::ostream& out, const TweetCorpus& corpus) {
  for (const AuthorPair& e : corpus.edges)
    out << corpus.authors.token(static_cast<Dish>(e.first)) << '\t'
        << corpus.authors.token(static_cast<Dish>(e.second)) << '\n';
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t docs, double test_fraction,
                                                                            Rng& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::domain_error("test fraction must lie in (0, 1)");
  std::vector<std::size_t> order(docs);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(docs)));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {train, test};
}

std::pair<Corpus, Corpus> split_documents(const Corpus& corpus, double test_fraction, Rng& rng) {
  auto [train_ids, test_ids] = split_indices(corpus.docs.size(), test_fraction, rng);
  Corpus train, test;
  train.vocab = test.vocab = corpus.vocab;
  for (std::size_t i : train_ids) train.docs.push_back(corpus.docs[i]);
  for (std::size_t i : test_ids) test.docs.push_back(corpus.docs[i]);
  return {train, test};
}

std::pair<TweetCorpus, TweetCorpus> split_documents(const TweetCorpus& corpus, double test_fraction, Rng& rng) {
  auto [train_ids, test_ids] = split_indices(corpus.tweets.size(), test_fraction, rng);
  TweetCorpus train, test;
  train.vocab = test.vocab = corpus.vocab;
  train.authors = test.authors = corpus.authors;
  train.edges = test.edges = corpus.edges;
  for (std::size_t i : train_ids) train.tweets.push_back(corpus.tweets[i]);
  for (std::size_t i : test_ids) test.tweets.push_back(corpus.tweets[i]);
  return {train, test};
}

std::vector<double> sample_pyp_over(const std::vector<double>& base, const PypLevel& level, std::size_t truncation,
                                    Rng& rng) {
  std::vector<double> sticks = sample_stick_breaking(level.discount, level.concentration, truncation, rng);
  const double used = std::accumulate(sticks.begin(), sticks.end(), 0.0);
  std::vector<double> out(base.size());
  const double rest = std::max(0.0, 1.0 - used);
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = rest * base[i];
  for (double w : sticks) out[sample_categorical(base, rng)] += w;
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= total;
  return out;
}

SynthCorpus synthesize(const SynthConfig& cfg, Rng& rng) {
  if (cfg.topics == 0 || cfg.docs == 0 || cfg.vocab == 0) throw std::domain_error("synthetic corpus needs topics, docs and vocabulary");
  SynthCorpus out;
  SynthTruth& truth = out.truth;
  const std::size_t K = cfg.topics, V = cfg.vocab;

  truth.root = sample_stick_breaking(cfg.root.discount, cfg.root.concentration, K, rng);
  double total = std::accumulate(truth.root.begin(), truth.root.end(), 0.0);
  for (double& x : truth.root) x /= total;

  const std::vector<double> uniform(V, 1.0 / static_cast<double>(V));
  const std::vector<double> gamma = sample_pyp_over(uniform, cfg.vocab_root, cfg.truncation, rng);
  for (std::size_t k = 0; k < K; ++k) truth.topic_words.push_back(sample_pyp_over(gamma, cfg.topic_word, cfg.truncation, rng));

  Vocabulary vocab;
  for (std::size_t v = 0; v < V; ++v) vocab.intern("w" + std::to_string(v));

  if (cfg.authors == 0) {
    truth.shared.push_back(sample_pyp_over(truth.root, cfg.shared, cfg.truncation, rng));
    out.corpus.vocab = vocab;
    for (std::size_t d = 0; d < cfg.docs; ++d) {
      std::vector<double> theta = sample_pyp_over(truth.shared[0], cfg.doc, cfg.truncation, rng);
      std::vector<Dish> doc;
      for (std::size_t n = 0; n < cfg.words_per_doc; ++n) {
        std::size_t z = sample_categorical(theta, rng);
        doc.push_back(static_cast<Dish>(sample_categorical(truth.topic_words[z], rng)));
      }
      truth.labels.push_back(argmax(theta));
      truth.doc_topics.push_back(std::move(theta));
      out.corpus.docs.push_back(std::move(doc));
    }
    return out;
  }

  for (std::size_t k = 0; k < K; ++k) truth.topic_tags.push_back(sample_pyp_over(gamma, cfg.topic_tag, cfg.truncation, rng));
  const std::vector<double> mu1 = sample_pyp_over(truth.root, cfg.shared, cfg.truncation, rng);
  for (std::size_t a = 0; a < cfg.authors; ++a) truth.shared.push_back(sample_pyp_over(truth.root, cfg.shared, cfg.truncation, rng));

  TweetCorpus& tc = out.tweets;
  tc.vocab = vocab;
  for (std::size_t a = 0; a < cfg.authors; ++a) tc.authors.intern("u" + std::to_string(a));
  std::uniform_int_distribution<std::size_t> pick_author(0, cfg.authors - 1);
  std::poisson_distribution<int> tag_count(cfg.hashtags_per_doc);
  for (std::size_t d = 0; d < cfg.docs; ++d) {
    Tweet t;
    t.id = "t" + std::to_string(d);
    t.author = pick_author(rng);
    std::vector<double> eta = sample_pyp_over(truth.shared[t.author], cfg.doc, cfg.truncation, rng);
    double rho_tag = sample_beta(cfg.lambda, cfg.lambda, rng);
    std::vector<double> theta_tag = sample_pyp_over(mix(rho_tag, mu1, eta), cfg.doc, cfg.truncation, rng);
    double rho = sample_beta(cfg.lambda, cfg.lambda, rng);
    std::vector<double> theta = sample_pyp_over(mix(rho, eta, theta_tag), cfg.doc, cfg.truncation, rng);
    const int tags = tag_count(rng);
    for (int m = 0; m < tags; ++m) {
      std::size_t z = sample_categorical(theta_tag, rng);
      t.hashtags.push_back(static_cast<Dish>(sample_categorical(truth.topic_tags[z], rng)));
    }
    for (std::size_t n = 0; n < cfg.words_per_doc; ++n) {
      std::size_t z = sample_categorical(theta, rng);
      t.words.push_back(static_cast<Dish>(sample_categorical(truth.topic_words[z], rng)));
    }
    truth.labels.push_back(argmax(theta));
    truth.doc_topics.push_back(std::move(theta));
    truth.tag_topics.push_back(std::move(theta_tag));
    tc.tweets.push_back(std::move(t));
  }

  const std::vector<AuthorPair> pairs = author_pairs(cfg.authors, cfg.self_links);
  if (cfg.fixed_q) {
    truth.q = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pairs.size()), *cfg.fixed_q);
  } else {
    GpPrior prior = mean_and_covariance(truth.shared, pairs, cfg.kernel);
    truth.q = sample_gaussian(prior.mean, factorise(prior.cov), rng);
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double prob = std::exp(log_sigmoid(truth.q[static_cast<Eigen::Index>(p)]));
    if (sample_bernoulli(prob, rng)) tc.edges.push_back(pairs[p]);
  }
  return out;
}

}  // namespace hpyp
