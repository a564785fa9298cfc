// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/hpyp_lda.hh"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "text_io.hh"

namespace hpyp {

using detail::TokenReader;
using detail::write_array;

LdaConfig LdaConfig::as_dirichlet() const {
  LdaConfig out = *this;
  for (PypLevel* l : {&out.root, &out.shared, &out.doc, &out.vocab_root, &out.topic_word}) l->discount = 0.0;
  return out;
}

void write_trace_header(std::ostream& out) { out << "iteration\tlog_posterior\tK\tconcentrations\n"; }

void write_trace_row(std::ostream& out, const TraceRow& row) {
  out << row.iteration << '\t' << format_double(row.log_posterior) << '\t' << row.topics << '\t';
  for (std::size_t i = 0; i < row.concentrations.size(); ++i)
    out << (i ? " " : "") << row.concentrations[i].first << '=' << format_double(row.concentrations[i].second);
  out << '\n';
}

HpypLda HpypLda::init(const Corpus& corpus, const LdaConfig& config, Rng& rng) {
  if (corpus.docs.empty() || corpus.vocab.size() == 0) throw std::domain_error("empty corpus");
  if (config.initial_topics == 0) throw std::domain_error("at least one initial topic is required");
  if (config.initial_topics > config.max_topics) throw std::domain_error("initial topics exceed the topic cap");
  HpypLda m;
  m.config_ = config;
  m.vocab_ = corpus.vocab;
  m.docs_ = corpus.docs;
  for (const auto& doc : m.docs_)
    for (Dish w : doc)
      if (w >= m.vocab_.size()) throw std::domain_error("token id outside the vocabulary");

  Graph& g = m.space_.graph;
  NodeSpec spec;
  spec.name = "root";
  spec.discount = config.root.discount;
  spec.concentration = config.root.concentration;
  spec.base = BaseKind::kGem;
  m.space_.topic_root = g.add_node(spec);

  spec = NodeSpec{};
  spec.name = "shared";
  spec.discount = config.shared.discount;
  spec.concentration = config.shared.concentration;
  spec.parents = {m.space_.topic_root};
  m.shared_ = g.add_node(spec);

  for (std::size_t d = 0; d < m.docs_.size(); ++d) {
    spec = NodeSpec{};
    spec.name = "doc" + std::to_string(d);
    spec.discount = config.doc.discount;
    spec.concentration = config.doc.concentration;
    spec.parents = {m.shared_};
    m.docs_nodes_.push_back(g.add_node(spec));
  }

  spec = NodeSpec{};
  spec.name = "vocab";
  spec.discount = config.vocab_root.discount;
  spec.concentration = config.vocab_root.concentration;
  spec.base = BaseKind::kUniform;
  spec.base_size = m.vocab_.size();
  VocabFamily fam;
  fam.prefix = "topic";
  fam.root = g.add_node(spec);
  fam.discount = config.topic_word.discount;
  fam.concentration = config.topic_word.concentration;
  m.space_.families.push_back(fam);
  m.space_.max_topics = config.max_topics;

  for (std::size_t k = 0; k < config.initial_topics; ++k) m.space_.ensure_vocab_node(0, static_cast<Dish>(k));
  std::uniform_int_distribution<std::size_t> pick(0, config.initial_topics - 1);
  m.z_.resize(m.docs_.size());
  for (std::size_t d = 0; d < m.docs_.size(); ++d) {
    for (Dish w : m.docs_[d]) {
      Dish k = static_cast<Dish>(pick(rng));
      m.z_[d].push_back(k);
      g.add_observation(m.docs_nodes_[d], k);
      g.add_observation(m.space_.vocab_node(0, k), w);
    }
  }
  // Every initial topic gets an entry at the root, possibly empty.
  g.node(m.space_.topic_root).ensure_dish(static_cast<Dish>(config.initial_topics - 1));
  g.seat_from_observations(rng);
  return m;
}

void HpypLda::resample_token(std::size_t d, std::size_t n, Rng& rng) {
  Dish& z = z_.at(d).at(n);
  z = space_.resample(docs_nodes_[d], 0, docs_[d][n], z, rng);
}

void HpypLda::compact() {
  std::vector<NodeId> ids;
  std::vector<Dish> remap = space_.compact(&ids);
  for (auto& doc : z_)
    for (Dish& k : doc) k = remap[k];
  shared_ = ids[shared_];
  for (NodeId& id : docs_nodes_) id = ids[id];
}

void HpypLda::sweep(Rng& rng) {
  for (std::size_t d = 0; d < docs_.size(); ++d)
    for (std::size_t n = 0; n < docs_[d].size(); ++n) resample_token(d, n, rng);
  compact();
  if (config_.sample_concentrations) space_.sample_concentrations(config_.prior, rng);
}

TraceRow HpypLda::trace_row(std::size_t iteration) const {
  TraceRow row;
  row.iteration = iteration;
  row.log_posterior = log_posterior();
  row.topics = topics();
  const Graph& g = space_.graph;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PypNode& n = g.node(static_cast<NodeId>(i));
    row.concentrations.emplace_back(n.name, n.concentration);
  }
  return row;
}

std::vector<TraceRow> HpypLda::train(std::size_t iterations, Rng& rng,
                                     const std::function<void(const TraceRow&)>& on_row) {
  std::vector<TraceRow> trace;
  for (std::size_t it = 1; it <= iterations; ++it) {
    sweep(rng);
    trace.push_back(trace_row(it));
    if (on_row) on_row(trace.back());
  }
  return trace;
}

LdaEstimate HpypLda::recover() const { return recover(config_.slot_policy); }

LdaEstimate HpypLda::recover(NewSlotPolicy policy) const {
  const Graph& g = space_.graph;
  auto means = g.posterior_means(policy);
  LdaEstimate e;
  e.root = means[space_.topic_root];
  e.shared = means[shared_];
  for (NodeId id : docs_nodes_) e.doc_topics.push_back(means[id]);
  const VocabFamily& fam = space_.families[0];
  e.vocab_root = means[fam.root];
  const PypNode& vroot = g.node(fam.root);
  // A token the vocabulary root has never seen: base mass only.
  double unseen_root = 1.0 / static_cast<double>(vroot.base_size);
  if (vroot.total_c > 0)
    unseen_root *= (vroot.discount * static_cast<double>(vroot.total_t) + vroot.concentration) /
                   (vroot.concentration + static_cast<double>(vroot.total_c));
  const std::size_t K = space_.capacity();
  for (std::size_t k = 0; k < K; ++k) {
    NodeId id = space_.vocab_node(0, static_cast<Dish>(k));
    if (id == kNoNode) {
      e.topic_words.push_back(e.vocab_root);
      e.unseen_word.push_back(unseen_root);
      continue;
    }
    e.topic_words.push_back(means[id]);
    const PypNode& n = g.node(id);
    double p = unseen_root;
    if (n.total_c > 0)
      p *= (n.discount * static_cast<double>(n.total_t) + n.concentration) /
           (n.concentration + static_cast<double>(n.total_c));
    e.unseen_word.push_back(p);
  }
  // Completion of unseen documents uses the average trained document level.
  double beta = 0.0;
  for (NodeId id : docs_nodes_) beta += g.node(id).concentration;
  e.doc_level.discount = config_.doc.discount;
  e.doc_level.concentration = docs_nodes_.empty() ? config_.doc.concentration : beta / docs_nodes_.size();
  return e;
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

NewSlotPolicy parse_policy(const std::string& s) {
  if (s == "keep") return NewSlotPolicy::kKeep;
  if (s == "discard") return NewSlotPolicy::kDiscardAll;
  if (s == "renormalise") return NewSlotPolicy::kRenormaliseRoot;
  throw std::runtime_error("unknown new-slot policy '" + s + "'");
}

}  // namespace

std::vector<std::string> HpypLda::audit() const {
  std::vector<std::string> report;
  std::vector<TokenRecord> tokens;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    if (z_[d].size() != docs_[d].size()) {
      report.push_back("document " + std::to_string(d) + ": assignment count differs from token count");
      continue;
    }
    for (std::size_t n = 0; n < docs_[d].size(); ++n) tokens.push_back({docs_nodes_[d], 0, docs_[d][n], z_[d][n]});
  }
  auto rest = space_.audit(tokens);
  report.insert(report.end(), rest.begin(), rest.end());
  return report;
}

void HpypLda::save(std::ostream& out) const {
  out << "hpyp-lda-model 1\n";
  write_level(out, "root", config_.root);
  write_level(out, "shared", config_.shared);
  write_level(out, "doc", config_.doc);
  write_level(out, "vocab_root", config_.vocab_root);
  write_level(out, "topic_word", config_.topic_word);
  out << "prior " << format_double(config_.prior.shape) << ' ' << format_double(config_.prior.rate) << '\n';
  out << "initial_topics " << config_.initial_topics << '\n';
  out << "max_topics " << (config_.max_topics == std::numeric_limits<std::size_t>::max() ? 0 : config_.max_topics)
      << '\n';
  out << "sample_concentrations " << (config_.sample_concentrations ? 1 : 0) << '\n';
  out << "slot_policy " << policy_name(config_.slot_policy) << '\n';
  write_array(out, "vocab", vocab_.tokens());
  out << "docs " << docs_.size() << '\n';
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    write_array(out, "w", docs_[d]);
    write_array(out, "z", z_[d]);
  }
  out << "shared_node " << shared_ << '\n';
  write_array(out, "doc_nodes", docs_nodes_);
  out << "topic_root " << space_.topic_root << '\n';
  const VocabFamily& fam = space_.families[0];
  out << "family " << fam.prefix << ' ' << fam.root << ' ' << format_double(fam.discount) << ' '
      << format_double(fam.concentration) << '\n';
  write_array(out, "family_nodes", fam.nodes);
  space_.graph.save(out);
}

HpypLda HpypLda::load(std::istream& in) {
  TokenReader r(in, "model snapshot");
  r.expect("hpyp-lda-model");
  if (r.integer() != 1) r.fail("unsupported version");
  HpypLda m;
  LdaConfig& c = m.config_;
  c.root = read_level(r, "root");
  c.shared = read_level(r, "shared");
  c.doc = read_level(r, "doc");
  c.vocab_root = read_level(r, "vocab_root");
  c.topic_word = read_level(r, "topic_word");
  r.expect("prior");
  c.prior.shape = r.real();
  c.prior.rate = r.real();
  r.expect("initial_topics");
  c.initial_topics = r.size();
  r.expect("max_topics");
  c.max_topics = r.size();
  if (c.max_topics == 0) c.max_topics = std::numeric_limits<std::size_t>::max();
  r.expect("sample_concentrations");
  c.sample_concentrations = r.integer() != 0;
  r.expect("slot_policy");
  c.slot_policy = parse_policy(r.word());
  for (const std::string& tok : r.array<std::string>("vocab")) m.vocab_.intern(tok);
  r.expect("docs");
  const std::size_t D = r.size();
  for (std::size_t d = 0; d < D; ++d) {
    m.docs_.push_back(r.array<Dish>("w"));
    m.z_.push_back(r.array<Dish>("z"));
  }
  r.expect("shared_node");
  m.shared_ = static_cast<NodeId>(r.integer());
  m.docs_nodes_ = r.array<NodeId>("doc_nodes");
  r.expect("topic_root");
  m.space_.topic_root = static_cast<NodeId>(r.integer());
  r.expect("family");
  VocabFamily fam;
  fam.prefix = r.word();
  fam.root = static_cast<NodeId>(r.integer());
  fam.discount = r.real();
  fam.concentration = r.real();
  fam.nodes = r.array<NodeId>("family_nodes");
  m.space_.families.push_back(fam);
  m.space_.max_topics = c.max_topics;
  m.space_.graph = Graph::load(in);
  return m;
}

}  // namespace hpyp
