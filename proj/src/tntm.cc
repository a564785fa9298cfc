// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/tntm.hh"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "text_io.hh"

namespace hpyp {

using detail::TokenReader;
using detail::write_array;

TntmConfig TntmConfig::effective() const {
  TntmConfig out = *this;
  if (!ablate.power_law)
    for (PypLevel* l : {&out.global, &out.misc, &out.author, &out.tweet, &out.tag_doc, &out.word_doc,
                        &out.vocab_root, &out.topic_tag, &out.topic_word})
      l->discount = 0.0;
  return out;
}

void write_tntm_trace_header(std::ostream& out) {
  out << "iteration\tlog_posterior\tK\tnetwork_loglik\taccepted\tconcentrations\n";
}

void write_tntm_trace_row(std::ostream& out, const TntmTraceRow& row) {
  const TraceRow& t = row.text;
  out << t.iteration << '\t' << format_double(t.log_posterior) << '\t' << t.topics << '\t'
      << format_double(row.network_loglik) << '\t' << row.accepted << '\t';
  for (std::size_t i = 0; i < t.concentrations.size(); ++i)
    out << (i ? " " : "") << t.concentrations[i].first << '=' << format_double(t.concentrations[i].second);
  out << '\n';
}

std::vector<TestTweet> split_alternating(const TweetCorpus& corpus) {
  std::vector<TestTweet> out;
  out.reserve(corpus.tweets.size());
  for (const Tweet& t : corpus.tweets) {
    TestTweet tt;
    tt.author = t.author;
    tt.tags = split_alternating(std::span<const Dish>(t.hashtags));
    tt.words = split_alternating(std::span<const Dish>(t.words));
    out.push_back(std::move(tt));
  }
  return out;
}

namespace {

NodeSpec level_spec(std::string name, const PypLevel& level, std::vector<NodeId> parents, double lambda) {
  NodeSpec s;
  s.name = std::move(name);
  s.discount = level.discount;
  s.concentration = level.concentration;
  s.parents = std::move(parents);
  if (s.parents.size() > 1) s.lambda.assign(s.parents.size(), lambda);
  return s;
}

}  // namespace

Tntm Tntm::build(const TweetCorpus& corpus, const TntmConfig& config, Rng& rng) {
  if (corpus.tweets.empty() || corpus.vocab.size() == 0) throw std::domain_error("empty tweet corpus");
  if (config.initial_topics == 0) throw std::domain_error("at least one initial topic is required");
  if (config.initial_topics > config.max_topics) throw std::domain_error("initial topics exceed the topic cap");
  if (config.network_start > config.iterations) throw std::domain_error("network stage starts after the last iteration");
  const TntmConfig eff = config.effective();
  const TntmAblation& ab = config.ablate;

  Tntm m;
  m.config_ = config;
  m.corpus_ = corpus;
  const std::size_t A = corpus.authors.size();
  for (Tweet& t : m.corpus_.tweets) {
    if (t.author >= A) throw std::domain_error("tweet '" + t.id + "' has an unknown author");
    for (Dish w : t.words)
      if (w >= corpus.vocab.size()) throw std::domain_error("token id outside the vocabulary");
    for (Dish w : t.hashtags)
      if (w >= corpus.vocab.size()) throw std::domain_error("token id outside the vocabulary");
    if (!ab.hashtags) {
      t.words.insert(t.words.begin(), t.hashtags.begin(), t.hashtags.end());
      t.hashtags.clear();
    }
  }

  Graph& g = m.space_.graph;
  NodeSpec root = level_spec("global", eff.global, {}, eff.lambda);
  root.base = BaseKind::kGem;
  m.space_.topic_root = g.add_node(root);
  const NodeId top = m.space_.topic_root;
  if (ab.hashtags && ab.misc) m.misc_ = g.add_node(level_spec("misc", eff.misc, {top}, eff.lambda));
  if (ab.authors) {
    for (std::size_t a = 0; a < A; ++a)
      m.authors_.push_back(g.add_node(level_spec("author" + std::to_string(a), eff.author, {top}, eff.lambda)));
  } else {
    m.authors_.push_back(g.add_node(level_spec("author", eff.author, {top}, eff.lambda)));
  }
  for (std::size_t d = 0; d < m.corpus_.tweets.size(); ++d) {
    const std::string id = std::to_string(d);
    const NodeId parent = m.authors_[ab.authors ? m.corpus_.tweets[d].author : 0];
    const NodeId tw = g.add_node(level_spec("tweet" + id, eff.tweet, {parent}, eff.lambda));
    m.tweet_.push_back(tw);
    NodeId tags = kNoNode;
    if (ab.hashtags) {
      std::vector<NodeId> ps = ab.misc ? std::vector<NodeId>{m.misc_, tw} : std::vector<NodeId>{tw};
      tags = g.add_node(level_spec("tags" + id, eff.tag_doc, ps, eff.lambda));
    }
    m.tag_doc_.push_back(tags);
    std::vector<NodeId> ps = ab.hashtags && ab.tag_to_word ? std::vector<NodeId>{tw, tags} : std::vector<NodeId>{tw};
    m.word_doc_.push_back(g.add_node(level_spec("words" + id, eff.word_doc, ps, eff.lambda)));
  }

  NodeSpec vocab = level_spec("vocab", eff.vocab_root, {}, eff.lambda);
  vocab.base = BaseKind::kUniform;
  vocab.base_size = corpus.vocab.size();
  const NodeId vroot = g.add_node(vocab);
  VocabFamily words;
  words.prefix = "word_topic";
  words.root = vroot;
  words.discount = eff.topic_word.discount;
  words.concentration = eff.topic_word.concentration;
  m.space_.families.push_back(words);
  if (ab.hashtags) {
    VocabFamily tags;
    tags.prefix = "tag_topic";
    tags.root = vroot;
    tags.discount = eff.topic_tag.discount;
    tags.concentration = eff.topic_tag.concentration;
    m.space_.families.push_back(tags);
  }
  m.space_.max_topics = config.max_topics;
  for (std::size_t f = 0; f < m.space_.families.size(); ++f)
    for (std::size_t k = 0; k < config.initial_topics; ++k) m.space_.ensure_vocab_node(f, static_cast<Dish>(k));

  std::uniform_int_distribution<std::size_t> pick(0, config.initial_topics - 1);
  m.tag_z_.resize(m.corpus_.tweets.size());
  m.word_z_.resize(m.corpus_.tweets.size());
  for (std::size_t d = 0; d < m.corpus_.tweets.size(); ++d) {
    const Tweet& t = m.corpus_.tweets[d];
    for (Dish y : t.hashtags) {
      Dish k = static_cast<Dish>(pick(rng));
      m.tag_z_[d].push_back(k);
      g.add_observation(m.tag_doc_[d], k);
      g.add_observation(m.space_.vocab_node(m.tag_family(), k), y);
    }
    for (Dish w : t.words) {
      Dish k = static_cast<Dish>(pick(rng));
      m.word_z_[d].push_back(k);
      g.add_observation(m.word_doc_[d], k);
      g.add_observation(m.space_.vocab_node(m.word_family(), k), w);
    }
  }
  g.node(top).ensure_dish(static_cast<Dish>(config.initial_topics - 1));
  g.seat_from_observations(rng);

  if (ab.authors) m.net_ = GpNetworkState::from_edges(A, corpus.edges, config.kernel, config.self_links);
  return m;
}

void Tntm::resample_word(std::size_t d, std::size_t n, Rng& rng) {
  Dish& z = word_z_.at(d).at(n);
  z = space_.resample(word_doc_[d], word_family(), corpus_.tweets[d].words[n], z, rng);
}

void Tntm::resample_hashtag(std::size_t d, std::size_t m, Rng& rng) {
  Dish& z = tag_z_.at(d).at(m);
  z = space_.resample(tag_doc_[d], tag_family(), corpus_.tweets[d].hashtags[m], z, rng);
}

void Tntm::compact() {
  std::vector<NodeId> ids;
  std::vector<Dish> remap = space_.compact(&ids);
  for (auto* zs : {&tag_z_, &word_z_})
    for (auto& doc : *zs)
      for (Dish& k : doc) k = remap[k];
  if (misc_ != kNoNode) misc_ = ids[misc_];
  for (auto* v : {&authors_, &tweet_, &tag_doc_, &word_doc_})
    for (NodeId& id : *v)
      if (id != kNoNode) id = ids[id];
}

void Tntm::fill_vocab_nodes() {
  const std::size_t cap = space_.capacity();
  for (std::size_t f = 0; f < space_.families.size(); ++f)
    for (std::size_t k = 0; k < cap; ++k)
      if (space_.alive(static_cast<Dish>(k))) space_.ensure_vocab_node(f, static_cast<Dish>(k));
}

void Tntm::sweep(Rng& rng) {
  for (std::size_t d = 0; d < corpus_.tweets.size(); ++d)
    for (std::size_t n = 0; n < word_z_[d].size(); ++n) resample_word(d, n, rng);
  for (std::size_t d = 0; d < corpus_.tweets.size(); ++d)
    for (std::size_t m = 0; m < tag_z_[d].size(); ++m) resample_hashtag(d, m, rng);
  if (!network_active_) compact();
  fill_vocab_nodes();
  if (config_.sample_concentrations) space_.sample_concentrations(config_.prior, rng);
}

bool Tntm::has_network() const {
  return config_.ablate.network && config_.ablate.authors && !net_.pairs.empty();
}

std::vector<std::vector<double>> Tntm::author_vectors() const {
  std::vector<std::vector<double>> out;
  for (NodeId id : authors_) out.push_back(space_.graph.node(id).fixed);
  return out;
}

void Tntm::start_network() {
  if (network_active_) return;
  if (!has_network()) throw std::logic_error("network stage needs authors and at least one author pair");
  compact();
  fill_vocab_nodes();
  const std::size_t K = space_.capacity();
  auto means = space_.graph.posterior_means(config_.slot_policy);
  std::vector<double> global = existing_topics(means[space_.topic_root], K);
  std::vector<std::vector<double>> authors;
  for (NodeId id : authors_) authors.push_back(existing_topics(means[id], K));
  space_.graph.freeze(space_.topic_root, global);
  for (std::size_t i = 0; i < authors_.size(); ++i) space_.graph.freeze(authors_[i], authors[i]);
  space_.allow_new_topics = false;
  net_.prior = mean_and_covariance(authors, net_.pairs, net_.kernel);
  net_.q = net_.prior.mean;
  network_active_ = true;
}

NetworkProposal Tntm::current() const {
  NetworkProposal p;
  p.global = space_.graph.node(space_.topic_root).fixed;
  p.authors = author_vectors();
  p.q = net_.q;
  return p;
}

NetworkProposal Tntm::propose(Rng& rng) const {
  if (!network_active_) throw std::logic_error("network stage has not started");
  const Graph& g = space_.graph;
  NetworkProposal p;
  auto scaled = [](const std::vector<double>& v, double b) {
    std::vector<double> out(v);
    for (double& x : out) x *= b;
    return out;
  };
  const PypNode& root = g.node(space_.topic_root);
  p.global = sample_dirichlet(scaled(root.fixed, root.concentration), rng);
  for (NodeId id : authors_) {
    const PypNode& n = g.node(id);
    p.authors.push_back(sample_dirichlet(scaled(n.fixed, n.concentration), rng));
  }
  GpPrior prior = mean_and_covariance(p.authors, net_.pairs, net_.kernel);
  auto chol = factorise(prior.cov);
  std::function<double(const Eigen::VectorXd&)> loglik = [this](const Eigen::VectorXd& q) {
    return hpyp::network_loglik(q, net_.links);
  };
  p.q = elliptical_slice_sample(net_.q, prior.mean, chol, loglik, rng).q;
  return p;
}

double Tntm::network_log_posterior(const std::vector<std::vector<double>>& authors, const Eigen::VectorXd& q) const {
  GpPrior prior = mean_and_covariance(authors, net_.pairs, net_.kernel);
  return hpyp::network_loglik(q, net_.links) + log_gaussian_density(q, prior.mean, factorise(prior.cov));
}

double Tntm::network_loglik() const {
  if (!network_active_) return 0.0;
  return hpyp::network_loglik(net_.q, net_.links);
}

// Tables the global node receives: live ones from the misc node plus the
// author tables held fixed since the network stage began.
std::vector<double> Tntm::global_exponents() const {
  const Graph& g = space_.graph;
  const std::size_t K = g.node(space_.topic_root).fixed.size();
  std::vector<double> e(K, 0.0);
  auto add = [&](NodeId id) {
    const PypNode& n = g.node(id);
    for (std::size_t k = 0; k < K; ++k) e[k] += n.tables(static_cast<Dish>(k));
  };
  if (misc_ != kNoNode) add(misc_);
  for (NodeId id : authors_) add(id);
  return e;
}

std::vector<std::vector<double>> Tntm::author_exponents() const {
  const Graph& g = space_.graph;
  const std::size_t K = g.node(space_.topic_root).fixed.size();
  std::vector<std::vector<double>> e(authors_.size(), std::vector<double>(K, 0.0));
  for (std::size_t d = 0; d < tweet_.size(); ++d) {
    const PypNode& n = g.node(tweet_[d]);
    auto& row = e[config_.ablate.authors ? corpus_.tweets[d].author : 0];
    for (std::size_t k = 0; k < K; ++k) row[k] += n.tables(static_cast<Dish>(k));
  }
  return e;
}

double Tntm::log_acceptance(const NetworkProposal& p) const {
  if (!network_active_) throw std::logic_error("network stage has not started");
  const Graph& g = space_.graph;
  const NetworkProposal cur = current();
  if (p.global.size() != cur.global.size() || p.authors.size() != cur.authors.size())
    throw std::invalid_argument("proposal does not match the model shape");

  double lr = network_log_posterior(p.authors, p.q) - network_log_posterior(cur.authors, cur.q);

  const std::vector<double> eg = global_exponents();
  for (std::size_t k = 0; k < eg.size(); ++k)
    if (eg[k] > 0.0) lr += eg[k] * (std::log(p.global[k]) - std::log(cur.global[k]));
  const auto ea = author_exponents();
  for (std::size_t i = 0; i < ea.size(); ++i)
    for (std::size_t k = 0; k < ea[i].size(); ++k)
      if (ea[i][k] > 0.0) lr += ea[i][k] * (std::log(p.authors[i][k]) - std::log(cur.authors[i][k]));

  // Reverse over forward proposal densities.
  auto proposal_term = [](const std::vector<double>& from, const std::vector<double>& to, double b) {
    std::vector<double> a_to(to), a_from(from);
    for (double& x : a_to) x *= b;
    for (double& x : a_from) x *= b;
    return log_dirichlet_density(from, a_to) - log_dirichlet_density(to, a_from);
  };
  lr += proposal_term(cur.global, p.global, g.node(space_.topic_root).concentration);
  for (std::size_t i = 0; i < authors_.size(); ++i)
    lr += proposal_term(cur.authors[i], p.authors[i], g.node(authors_[i]).concentration);
  return lr;
}

NetworkStep Tntm::network_step(Rng& rng) {
  NetworkProposal p = propose(rng);
  NetworkStep step;
  step.log_ratio = log_acceptance(p);
  step.accepted = step.log_ratio >= 0.0 || std::log(uniform01(rng)) < step.log_ratio;
  if (step.accepted) {
    space_.graph.freeze(space_.topic_root, p.global);
    for (std::size_t i = 0; i < authors_.size(); ++i) space_.graph.freeze(authors_[i], p.authors[i]);
    net_.prior = mean_and_covariance(p.authors, net_.pairs, net_.kernel);
    net_.q = std::move(p.q);
  }
  return step;
}

TntmTraceRow Tntm::trace_row(int accepted) const {
  TntmTraceRow row;
  row.text.iteration = iteration_;
  row.text.log_posterior = log_posterior();
  row.text.topics = topics();
  const Graph& g = space_.graph;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PypNode& n = g.node(static_cast<NodeId>(i));
    row.text.concentrations.emplace_back(n.name, n.concentration);
  }
  row.network_loglik = network_loglik();
  row.accepted = accepted;
  return row;
}

std::vector<TntmTraceRow> Tntm::train(Rng& rng, const std::function<void(const TntmTraceRow&)>& on_row) {
  std::vector<TntmTraceRow> trace;
  const bool net = has_network();
  while (iteration_ < config_.iterations) {
    int accepted = -1;
    if (net && iteration_ >= config_.network_start && !network_active_) start_network();
    if (network_active_) accepted = network_step(rng).accepted ? 1 : 0;
    sweep(rng);
    ++iteration_;
    trace.push_back(trace_row(accepted));
    if (on_row) on_row(trace.back());
  }
  return trace;
}

TntmEstimate Tntm::recover() const {
  const Graph& g = space_.graph;
  const std::size_t K = space_.capacity();
  auto means = g.posterior_means(config_.slot_policy);
  TntmEstimate e;
  e.ablate = config_.ablate;
  e.lambda = config_.lambda;
  e.global = existing_topics(means[space_.topic_root], K);
  if (misc_ != kNoNode) e.misc = existing_topics(means[misc_], K);
  for (NodeId id : authors_) e.authors.push_back(existing_topics(means[id], K));
  const VocabFamily& wf = space_.families[word_family()];
  e.vocab_root = means[wf.root];
  auto family_means = [&](std::size_t f) {
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < K; ++k) {
      NodeId id = space_.vocab_node(f, static_cast<Dish>(k));
      out.push_back(id == kNoNode ? e.vocab_root : means[id]);
    }
    return out;
  };
  e.topic_words = family_means(word_family());
  if (config_.ablate.hashtags) e.topic_tags = family_means(tag_family());
  // A token the vocabulary root has never seen: base mass, thinned by the
  // new-table probability of each restaurant on the way down.
  auto new_table = [&](NodeId id) {
    const PypNode& n = g.node(id);
    if (n.total_c == 0) return 1.0;
    return (n.discount * static_cast<double>(n.total_t) + n.concentration) /
           (n.concentration + static_cast<double>(n.total_c));
  };
  const double unseen_root = new_table(wf.root) / static_cast<double>(g.node(wf.root).base_size);
  auto family_unseen = [&](std::size_t f) {
    std::vector<double> out;
    for (std::size_t k = 0; k < K; ++k) {
      NodeId id = space_.vocab_node(f, static_cast<Dish>(k));
      out.push_back(id == kNoNode ? unseen_root : unseen_root * new_table(id));
    }
    return out;
  };
  e.unseen_word = family_unseen(word_family());
  if (config_.ablate.hashtags) e.unseen_tag = family_unseen(tag_family());
  auto level = [&](const std::vector<NodeId>& ids) {
    PypLevel l;
    double b = 0.0;
    std::size_t n = 0;
    for (NodeId id : ids) {
      if (id == kNoNode) continue;
      l.discount = g.node(id).discount;
      b += g.node(id).concentration;
      ++n;
    }
    l.concentration = n ? b / static_cast<double>(n) : 1.0;
    return l;
  };
  e.tweet = level(tweet_);
  e.tag_doc = level(tag_doc_);
  e.word_doc = level(word_doc_);
  return e;
}

namespace {

std::vector<std::size_t> ranked(const std::vector<double>& v, std::size_t top) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  if (idx.size() > top) idx.resize(top);
  return idx;
}

}  // namespace

std::vector<TopicLabel> Tntm::topic_labels(std::size_t top_tags, std::size_t top_words) const {
  TntmEstimate e = recover();
  std::vector<TopicLabel> out(e.topic_words.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!e.topic_tags.empty())
      for (std::size_t v : ranked(e.topic_tags[k], top_tags)) out[k].hashtags.push_back(corpus_.vocab.token(static_cast<Dish>(v)));
    for (std::size_t v : ranked(e.topic_words[k], top_words)) out[k].words.push_back(corpus_.vocab.token(static_cast<Dish>(v)));
  }
  return out;
}

namespace {

struct TweetState {
  std::vector<double> tag_c, tag_t, word_c, word_t;
};

// Topic vectors of a test tweet from its leaf counts. Tables are half the
// customers at every level and split over parents by the prior mixing mean,
// which is one half since both parents share the same Dirichlet weight.
void tweet_means(const TntmEstimate& m, const std::vector<double>& author, const TweetState& s,
                 std::vector<double>& tags, std::vector<double>& words) {
  const std::size_t K = author.size();
  const bool has_tags = m.ablate.hashtags;
  const double tag_to_misc = has_tags && m.ablate.misc ? 0.5 : 0.0;
  const double word_to_tweet = has_tags && m.ablate.tag_to_word ? 0.5 : 1.0;
  std::vector<double> c(K, 0.0), t(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (has_tags) c[k] += (1.0 - tag_to_misc) * s.tag_t[k];
    c[k] += word_to_tweet * s.word_t[k];
    t[k] = c[k] / 2.0;
  }
  const std::vector<double> eta = restaurant_mean(c, t, m.tweet, author);
  std::vector<double> base(K);
  if (has_tags) {
    for (std::size_t k = 0; k < K; ++k) base[k] = tag_to_misc * (m.misc.empty() ? 0.0 : m.misc[k]) + (1.0 - tag_to_misc) * eta[k];
    tags = restaurant_mean(s.tag_c, s.tag_t, m.tag_doc, base);
  } else {
    tags.clear();
  }
  for (std::size_t k = 0; k < K; ++k) base[k] = word_to_tweet * eta[k] + (has_tags ? (1.0 - word_to_tweet) * tags[k] : 0.0);
  words = restaurant_mean(s.word_c, s.word_t, m.word_doc, base);
}

double token_prob(const std::vector<std::vector<double>>& phi, const std::vector<double>& unseen, std::size_t k,
                  Dish w) {
  if (w < phi[k].size()) return phi[k][w];
  if (k < unseen.size()) return unseen[k];
  throw std::domain_error("test token outside the vocabulary");
}

TestTweet merged(const TestTweet& t) {
  TestTweet out = t;
  out.words.observed.insert(out.words.observed.begin(), t.tags.observed.begin(), t.tags.observed.end());
  out.words.held_out.insert(out.words.held_out.begin(), t.tags.held_out.begin(), t.tags.held_out.end());
  out.tags = {};
  return out;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> complete_tweet(const TntmEstimate& model, const TestTweet& input,
                                                                   std::size_t replicates, Rng& rng) {
  if (replicates == 0) throw std::domain_error("at least one replicate is required");
  const TestTweet tweet = model.ablate.hashtags ? input : merged(input);
  const std::size_t K = model.topic_words.size();
  const std::size_t a = model.ablate.authors ? tweet.author : 0;
  if (a >= model.authors.size()) throw std::domain_error("test tweet has an unknown author");
  const std::vector<double>& author = model.authors[a];

  std::vector<double> tag_mean(model.ablate.hashtags ? K : 0, 0.0), word_mean(K, 0.0), tags, words, w(K);
  TweetState s;
  for (std::size_t r = 0; r < replicates; ++r) {
    s.tag_c.assign(K, 0.0);
    s.tag_t.assign(K, 0.0);
    s.word_c.assign(K, 0.0);
    s.word_t.assign(K, 0.0);
    for (Dish y : tweet.tags.observed) {
      tweet_means(model, author, s, tags, words);
      for (std::size_t k = 0; k < K; ++k) w[k] = tags[k] * token_prob(model.topic_tags, model.unseen_tag, k, y);
      const std::size_t k = sample_categorical(w, rng);
      s.tag_c[k] += 1.0;
      s.tag_t[k] = s.tag_c[k] / 2.0;
    }
    for (Dish x : tweet.words.observed) {
      tweet_means(model, author, s, tags, words);
      for (std::size_t k = 0; k < K; ++k) w[k] = words[k] * token_prob(model.topic_words, model.unseen_word, k, x);
      const std::size_t k = sample_categorical(w, rng);
      s.word_c[k] += 1.0;
      s.word_t[k] = s.word_c[k] / 2.0;
    }
    tweet_means(model, author, s, tags, words);
    for (std::size_t k = 0; k < tags.size(); ++k) tag_mean[k] += tags[k];
    for (std::size_t k = 0; k < K; ++k) word_mean[k] += words[k];
    if (tweet.tags.observed.empty() && tweet.words.observed.empty()) {
      replicates = r + 1;
      break;
    }
  }
  for (double& x : tag_mean) x /= static_cast<double>(replicates);
  for (double& x : word_mean) x /= static_cast<double>(replicates);
  return {tag_mean, word_mean};
}

double tntm_perplexity(const TntmEstimate& model, const std::vector<TestTweet>& tweets, const CompletionConfig& config,
                       Rng& rng) {
  double total = 0.0;
  std::size_t n = 0;
  for (const TestTweet& input : tweets) {
    const TestTweet t = model.ablate.hashtags ? input : merged(input);
    if (t.tags.held_out.empty() && t.words.held_out.empty()) continue;
    auto [tags, words] = complete_tweet(model, t, config.replicates, rng);
    auto score = [&](const std::vector<double>& theta, const std::vector<std::vector<double>>& phi,
                     const std::vector<double>& unseen, Dish w) {
      double p = 0.0;
      for (std::size_t k = 0; k < theta.size(); ++k) p += theta[k] * token_prob(phi, unseen, k, w);
      total += std::log(p);
      ++n;
    };
    for (Dish y : t.tags.held_out) score(tags, model.topic_tags, model.unseen_tag, y);
    for (Dish w : t.words.held_out) score(words, model.topic_words, model.unseen_word, w);
  }
  return perplexity_from_log(total, n);
}

namespace {

void write_level(std::ostream& out, const char* tag, const PypLevel& l) {
  out << tag << ' ' << format_double(l.discount) << ' ' << format_double(l.concentration) << '\n';
}

PypLevel read_level(TokenReader& r, const char* tag) {
  r.expect(tag);
  PypLevel l;
  l.discount = r.real();
  l.concentration = r.real();
  return l;
}

const char* policy_name(NewSlotPolicy p) {
  switch (p) {
    case NewSlotPolicy::kKeep: return "keep";
    case NewSlotPolicy::kDiscardAll: return "discard";
    default: return "renormalise";
  }
}

NewSlotPolicy parse_policy(TokenReader& r) {
  std::string s = r.word();
  if (s == "keep") return NewSlotPolicy::kKeep;
  if (s == "discard") return NewSlotPolicy::kDiscardAll;
  if (s == "renormalise") return NewSlotPolicy::kRenormaliseRoot;
  r.fail("unknown new-slot policy '" + s + "'");
}

void check_word(const std::string& s, const char* what) {
  if (s.empty() || std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }))
    throw std::domain_error(std::string(what) + " '" + s + "' cannot be stored in a snapshot");
}

}  // namespace

std::vector<std::string> Tntm::audit() const {
  std::vector<std::string> report;
  std::vector<TokenRecord> tokens;
  for (std::size_t d = 0; d < corpus_.tweets.size(); ++d) {
    const Tweet& t = corpus_.tweets[d];
    if (tag_z_[d].size() != t.hashtags.size() || word_z_[d].size() != t.words.size()) {
      report.push_back("tweet " + std::to_string(d) + ": assignment count differs from token count");
      continue;
    }
    for (std::size_t m = 0; m < t.hashtags.size(); ++m)
      tokens.push_back({tag_doc_[d], tag_family(), t.hashtags[m], tag_z_[d][m]});
    for (std::size_t n = 0; n < t.words.size(); ++n)
      tokens.push_back({word_doc_[d], word_family(), t.words[n], word_z_[d][n]});
  }
  auto rest = space_.audit(tokens);
  report.insert(report.end(), rest.begin(), rest.end());
  return report;
}

void Tntm::save(std::ostream& out) const {
  const TntmConfig& c = config_;
  out << "hpyp-tntm-model 1\n";
  write_level(out, "global", c.global);
  write_level(out, "misc", c.misc);
  write_level(out, "author", c.author);
  write_level(out, "tweet", c.tweet);
  write_level(out, "tag_doc", c.tag_doc);
  write_level(out, "word_doc", c.word_doc);
  write_level(out, "vocab_root", c.vocab_root);
  write_level(out, "topic_tag", c.topic_tag);
  write_level(out, "topic_word", c.topic_word);
  out << "lambda " << format_double(c.lambda) << '\n';
  out << "prior " << format_double(c.prior.shape) << ' ' << format_double(c.prior.rate) << '\n';
  out << "kernel " << format_double(c.kernel.s) << ' ' << format_double(c.kernel.l) << ' '
      << format_double(c.kernel.sigma) << '\n';
  out << "self_links " << c.self_links << '\n';
  out << "initial_topics " << c.initial_topics << '\n';
  out << "max_topics " << (c.max_topics == std::numeric_limits<std::size_t>::max() ? 0 : c.max_topics) << '\n';
  out << "sample_concentrations " << c.sample_concentrations << '\n';
  out << "iterations " << c.iterations << ' ' << c.network_start << '\n';
  out << "slot_policy " << policy_name(c.slot_policy) << '\n';
  const TntmAblation& a = c.ablate;
  out << "ablate " << a.authors << ' ' << a.hashtags << ' ' << a.misc << ' ' << a.tag_to_word << ' ' << a.power_law
      << ' ' << a.network << '\n';

  for (const auto& t : corpus_.vocab.tokens()) check_word(t, "token");
  for (const auto& t : corpus_.authors.tokens()) check_word(t, "author");
  write_array(out, "vocab", corpus_.vocab.tokens());
  write_array(out, "authors", corpus_.authors.tokens());
  out << "tweets " << corpus_.tweets.size() << '\n';
  for (std::size_t d = 0; d < corpus_.tweets.size(); ++d) {
    const Tweet& t = corpus_.tweets[d];
    check_word(t.id, "tweet id");
    out << "tweet " << t.id << ' ' << t.author << '\n';
    write_array(out, "y", t.hashtags);
    write_array(out, "zy", tag_z_[d]);
    write_array(out, "w", t.words);
    write_array(out, "zw", word_z_[d]);
  }
  out << "edges " << corpus_.edges.size() << '\n';
  for (const AuthorPair& e : corpus_.edges) out << e.first << ' ' << e.second << '\n';

  out << "topic_root " << space_.topic_root << '\n';
  out << "misc_node " << (misc_ == kNoNode ? -1 : static_cast<long long>(misc_)) << '\n';
  write_array(out, "author_nodes", authors_);
  write_array(out, "tweet_nodes", tweet_);
  std::vector<long long> tags(tag_doc_.size());
  for (std::size_t d = 0; d < tags.size(); ++d) tags[d] = tag_doc_[d] == kNoNode ? -1 : static_cast<long long>(tag_doc_[d]);
  write_array(out, "tag_nodes", tags);
  write_array(out, "word_nodes", word_doc_);
  out << "families " << space_.families.size() << '\n';
  for (const VocabFamily& f : space_.families) {
    out << "family " << f.prefix << ' ' << f.root << ' ' << format_double(f.discount) << ' '
        << format_double(f.concentration) << '\n';
    std::vector<long long> nodes(f.nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = f.nodes[k] == kNoNode ? -1 : static_cast<long long>(f.nodes[k]);
    write_array(out, "family_nodes", nodes);
  }
  out << "max_topics_space " << (space_.max_topics == std::numeric_limits<std::size_t>::max() ? 0 : space_.max_topics)
      << ' ' << space_.allow_new_topics << '\n';
  out << "iteration " << iteration_ << '\n';
  out << "network " << network_active_ << '\n';
  std::vector<double> q(net_.q.data(), net_.q.data() + net_.q.size());
  write_array(out, "q", q);
  space_.graph.save(out);
}

Tntm Tntm::load(std::istream& in) {
  TokenReader r(in, "tntm snapshot");
  r.expect("hpyp-tntm-model");
  if (r.integer() != 1) r.fail("unsupported version");
  Tntm m;
  TntmConfig& c = m.config_;
  c.global = read_level(r, "global");
  c.misc = read_level(r, "misc");
  c.author = read_level(r, "author");
  c.tweet = read_level(r, "tweet");
  c.tag_doc = read_level(r, "tag_doc");
  c.word_doc = read_level(r, "word_doc");
  c.vocab_root = read_level(r, "vocab_root");
  c.topic_tag = read_level(r, "topic_tag");
  c.topic_word = read_level(r, "topic_word");
  r.expect("lambda");
  c.lambda = r.real();
  r.expect("prior");
  c.prior.shape = r.real();
  c.prior.rate = r.real();
  r.expect("kernel");
  c.kernel.s = r.real();
  c.kernel.l = r.real();
  c.kernel.sigma = r.real();
  r.expect("self_links");
  c.self_links = r.integer() != 0;
  r.expect("initial_topics");
  c.initial_topics = r.size();
  r.expect("max_topics");
  c.max_topics = r.size();
  if (c.max_topics == 0) c.max_topics = std::numeric_limits<std::size_t>::max();
  r.expect("sample_concentrations");
  c.sample_concentrations = r.integer() != 0;
  r.expect("iterations");
  c.iterations = r.size();
  c.network_start = r.size();
  r.expect("slot_policy");
  c.slot_policy = parse_policy(r);
  r.expect("ablate");
  for (bool* b : {&c.ablate.authors, &c.ablate.hashtags, &c.ablate.misc, &c.ablate.tag_to_word, &c.ablate.power_law,
                  &c.ablate.network})
    *b = r.integer() != 0;

  for (const std::string& t : r.array<std::string>("vocab")) m.corpus_.vocab.intern(t);
  for (const std::string& t : r.array<std::string>("authors")) m.corpus_.authors.intern(t);
  r.expect("tweets");
  const std::size_t D = r.size();
  for (std::size_t d = 0; d < D; ++d) {
    Tweet t;
    r.expect("tweet");
    t.id = r.word();
    t.author = r.size();
    t.hashtags = r.array<Dish>("y");
    m.tag_z_.push_back(r.array<Dish>("zy"));
    t.words = r.array<Dish>("w");
    m.word_z_.push_back(r.array<Dish>("zw"));
    m.corpus_.tweets.push_back(std::move(t));
  }
  r.expect("edges");
  const std::size_t E = r.size();
  for (std::size_t i = 0; i < E; ++i) {
    std::size_t s = r.size();
    m.corpus_.edges.emplace_back(s, r.size());
  }

  auto node_or_none = [](long long v) { return v < 0 ? kNoNode : static_cast<NodeId>(v); };
  r.expect("topic_root");
  m.space_.topic_root = static_cast<NodeId>(r.integer());
  r.expect("misc_node");
  m.misc_ = node_or_none(r.integer());
  m.authors_ = r.array<NodeId>("author_nodes");
  m.tweet_ = r.array<NodeId>("tweet_nodes");
  for (long long v : r.array<long long>("tag_nodes")) m.tag_doc_.push_back(node_or_none(v));
  m.word_doc_ = r.array<NodeId>("word_nodes");
  r.expect("families");
  const std::size_t F = r.size();
  for (std::size_t f = 0; f < F; ++f) {
    VocabFamily fam;
    r.expect("family");
    fam.prefix = r.word();
    fam.root = static_cast<NodeId>(r.integer());
    fam.discount = r.real();
    fam.concentration = r.real();
    for (long long v : r.array<long long>("family_nodes")) fam.nodes.push_back(node_or_none(v));
    m.space_.families.push_back(std::move(fam));
  }
  r.expect("max_topics_space");
  m.space_.max_topics = r.size();
  if (m.space_.max_topics == 0) m.space_.max_topics = std::numeric_limits<std::size_t>::max();
  m.space_.allow_new_topics = r.integer() != 0;
  r.expect("iteration");
  m.iteration_ = r.size();
  r.expect("network");
  m.network_active_ = r.integer() != 0;
  std::vector<double> q = r.array<double>("q");
  m.space_.graph = Graph::load(in);

  if (c.ablate.authors) {
    m.net_ = GpNetworkState::from_edges(m.corpus_.authors.size(), m.corpus_.edges, c.kernel, c.self_links);
    if (q.size() != static_cast<std::size_t>(m.net_.q.size())) r.fail("link strength vector has the wrong length");
    m.net_.q = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    if (m.network_active_) m.net_.prior = mean_and_covariance(m.author_vectors(), m.net_.pairs, c.kernel);
  }
  return m;
}

}  // namespace hpyp
