#include "terraclass/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "terraclass/error.hpp"
#include "terraclass/parallel.hpp"
#include "seed_stream.hpp"

namespace terraclass {

std::string_view model_kind_name(ModelKind kind) { return kind == ModelKind::rf ? "rf" : "gbt"; }

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "rf") return ModelKind::rf;
  if (name == "gbt") return ModelKind::gbt;
  throw std::invalid_argument("unknown classifier '" + std::string(name) + "' (expected rf or gbt)");
}

void TrainConfig::validate() const {
  auto fraction = [](double f, const char* name) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in (0, 1]");
  };
  fraction(rf_feature_fraction, "rf_feature_fraction");
  fraction(gbt_bagging_fraction, "gbt_bagging_fraction");
  fraction(gbt_feature_fraction, "gbt_feature_fraction");
  if (rf_max_depth < 1) throw std::invalid_argument("rf_max_depth must be >= 1");
  if (gbt_max_leaves < 1) throw std::invalid_argument("gbt_max_leaves must be >= 1");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
  if (!(gbt_learning_rate > 0.0) || !std::isfinite(gbt_learning_rate))
    throw std::invalid_argument("gbt_learning_rate must be positive");
  if (!(gbt_lambda >= 0.0) || !std::isfinite(gbt_lambda)) throw std::invalid_argument("gbt_lambda must be >= 0");
}

std::uint32_t Tree::leaf_for(std::span<const float> row) const {
  std::uint32_t i = 0;
  while (nodes[i].feature >= 0) {
    const Node& n = nodes[i];
    i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return i;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

namespace {

using detail::stream_seed;

void softmax(std::span<double> s) {
  const double m = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : s) v /= sum;
}

Label argmax(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return static_cast<Label>(best);
}

// Column-major copy of the training matrix plus each column's row order
// sorted by (value, row).
struct TrainingSet {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t n_classes = 0;
  std::vector<float> x;
  std::vector<std::vector<std::uint32_t>> order;
  std::span<const Label> y;

  const float* column(std::size_t c) const { return x.data() + c * n; }
};

TrainingSet prepare(const FeatureMatrix& features, std::span<const Label> labels, const TrainConfig& config) {
  config.validate();
  if (features.rows() != labels.size())
    throw std::invalid_argument("feature rows (" + std::to_string(features.rows()) + ") and labels (" +
                                std::to_string(labels.size()) + ") differ");
  if (features.cols() == 0) throw std::invalid_argument("feature matrix has no columns");
  if (features.rows() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("too many training rows");

  TrainingSet t;
  t.n = features.rows();
  t.d = features.cols();
  t.y = labels;
  std::size_t max_label = 0;
  std::vector<bool> present(256, false);
  for (Label l : labels) {
    if (l == kUnlabeled) throw std::invalid_argument("training labels contain unlabeled rows");
    max_label = std::max<std::size_t>(max_label, l);
    present[l] = true;
  }
  t.n_classes = config.n_classes ? config.n_classes : max_label + 1;
  if (max_label >= t.n_classes)
    throw std::invalid_argument("label " + std::to_string(max_label) + " exceeds class count " +
                                std::to_string(t.n_classes));
  if (std::count(present.begin(), present.end(), true) < 2)
    throw std::invalid_argument("training data must contain at least two classes");

  t.x.resize(t.n * t.d);
  for (std::size_t r = 0; r < t.n; ++r) {
    auto row = features.row(r);
    for (std::size_t c = 0; c < t.d; ++c) {
      if (!std::isfinite(row[c]))
        throw std::invalid_argument("non-finite value in column '" + features.columns()[c] + "', row " +
                                    std::to_string(r));
      t.x[c * t.n + r] = row[c];
    }
  }
  t.order.resize(t.d);
  parallel_for(t.d, config.threads, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      auto& o = t.order[c];
      o.resize(t.n);
      std::iota(o.begin(), o.end(), 0u);
      const float* v = t.column(c);
      std::sort(o.begin(), o.end(), [v](std::uint32_t a, std::uint32_t b2) {
        return v[a] < v[b2] || (v[a] == v[b2] && a < b2);
      });
    }
  });
  return t;
}

// Per-column sorted row lists restricted to one tree's sample. A node owns
// the same range [begin, end) in every column.
class Segments {
 public:
  void fill(const TrainingSet& t, const std::vector<std::uint32_t>& weight, std::size_t distinct) {
    n_ = distinct;
    d_ = t.d;
    rows_.resize(n_ * d_);
    for (std::size_t c = 0; c < d_; ++c) {
      std::uint32_t* out = col(c);
      for (std::uint32_t r : t.order[c])
        if (weight[r]) *out++ = r;
    }
  }

  std::uint32_t* col(std::size_t c) { return rows_.data() + c * n_; }
  std::size_t size() const { return n_; }

  // Stable partition of [b, e) in every column by goes_left[row]; returns
  // the first right-hand position.
  std::size_t partition(std::size_t b, std::size_t e, const std::vector<std::uint8_t>& goes_left) {
    tmp_.resize(e - b);
    std::size_t mid = b;
    for (std::size_t c = 0; c < d_; ++c) {
      std::uint32_t* rows = col(c);
      std::size_t l = b;
      std::size_t r = 0;
      for (std::size_t i = b; i < e; ++i) {
        const std::uint32_t row = rows[i];
        if (goes_left[row])
          rows[l++] = row;
        else
          tmp_[r++] = row;
      }
      std::copy(tmp_.begin(), tmp_.begin() + static_cast<std::ptrdiff_t>(r), rows + l);
      mid = l;
    }
    return mid;
  }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> tmp_;
};

// Midpoint between consecutive distinct values, nudged so that `lo` routes
// left and `hi` routes right.
float midpoint(float lo, float hi) {
  float t = static_cast<float>(0.5 * (static_cast<double>(lo) + static_cast<double>(hi)));
  if (!(t > lo)) t = hi;
  return t;
}

// Candidate columns drawn without replacement by partial Fisher-Yates.
class ColumnSampler {
 public:
  ColumnSampler(std::size_t d, double fraction, std::uint64_t seed)
      : perm_(d), m_(std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d) - 1e-9)), 1, d)),
        rng_(seed) {
    std::iota(perm_.begin(), perm_.end(), 0u);
  }

  std::span<const std::uint32_t> draw() {
    if (m_ == perm_.size()) return perm_;
    for (std::size_t i = 0; i < m_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, perm_.size() - 1);
      std::swap(perm_[i], perm_[pick(rng_)]);
    }
    return {perm_.data(), m_};
  }

 private:
  std::vector<std::uint32_t> perm_;
  std::size_t m_;
  std::mt19937_64 rng_;
};

struct SplitChoice {
  double gain = 0.0;
  std::int64_t column = -1;
  float threshold = 0.f;

  bool valid() const { return column >= 0; }
  // Higher gain wins; exact ties go to the smaller column, then threshold.
  bool better_than(const SplitChoice& o) const {
    if (!o.valid()) return true;
    if (gain != o.gain) return gain > o.gain;
    if (column != o.column) return column < o.column;
    return threshold < o.threshold;
  }
};

// ---------------------------------------------------------------- RF

std::vector<std::uint32_t> bootstrap_weights(std::size_t n, bool bootstrap, std::mt19937_64& rng) {
  std::vector<std::uint32_t> w(n, bootstrap ? 0u : 1u);
  if (bootstrap) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) ++w[pick(rng)];
  }
  return w;
}

class RfBuilder {
 public:
  RfBuilder(const TrainingSet& t, const TrainConfig& cfg, std::size_t tree_index)
      : t_(t), cfg_(cfg), C_(t.n_classes), rng_(stream_seed(cfg.seed, 0x5246, tree_index)),
        sampler_(t.d, cfg.rf_feature_fraction, stream_seed(cfg.seed, 0x434F4C, tree_index)) {}

  Tree build() {
    weight_ = bootstrap_weights(t_.n, cfg_.rf_bootstrap, rng_);
    std::size_t distinct = 0;
    for (std::uint32_t w : weight_) distinct += w > 0;
    seg_.fill(t_, weight_, distinct);
    goes_left_.assign(t_.n, 0);

    std::vector<double> counts(C_, 0.0);
    for (std::size_t r = 0; r < t_.n; ++r) counts[t_.y[r]] += weight_[r];

    Tree tree;
    tree.nodes.emplace_back();
    struct Work {
      std::uint32_t node;
      std::size_t b, e, depth;
      std::vector<double> counts;
    };
    std::vector<Work> stack;
    stack.push_back({0, 0, distinct, 0, std::move(counts)});
    std::vector<double> left(C_), right(C_);
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      if (terminal(w.counts, w.depth)) {
        make_leaf(tree, w.node, w.counts);
        continue;
      }
      const SplitChoice s = best_split(w.b, w.e, w.counts, left);
      if (!s.valid()) {
        make_leaf(tree, w.node, w.counts);
        continue;
      }
      for (std::size_t c = 0; c < C_; ++c) right[c] = w.counts[c] - left[c];
      const auto li = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      Tree::Node& n = tree.nodes[w.node];
      n.feature = static_cast<std::int32_t>(s.column);
      n.threshold = s.threshold;
      n.left = li;
      n.right = li + 1;

      const bool left_done = terminal(left, w.depth + 1);
      const bool right_done = terminal(right, w.depth + 1);
      std::size_t mid = w.b;
      if (!(left_done && right_done)) {
        const float* x = t_.column(static_cast<std::size_t>(s.column));
        const std::uint32_t* rows = seg_.col(0);
        for (std::size_t i = w.b; i < w.e; ++i) goes_left_[rows[i]] = x[rows[i]] < s.threshold;
        mid = seg_.partition(w.b, w.e, goes_left_);
      }
      if (right_done)
        make_leaf(tree, li + 1, right);
      else
        stack.push_back({li + 1, mid, w.e, w.depth + 1, right});
      if (left_done)
        make_leaf(tree, li, left);
      else
        stack.push_back({li, w.b, mid, w.depth + 1, left});
    }
    return tree;
  }

  const std::vector<std::uint32_t>& weights() const { return weight_; }

 private:
  bool terminal(const std::vector<double>& counts, std::size_t depth) const {
    if (depth >= cfg_.rf_max_depth) return true;
    double total = 0.0;
    std::size_t nonzero = 0;
    for (double v : counts) {
      total += v;
      nonzero += v > 0.0;
    }
    return nonzero <= 1 || total < 2.0 * static_cast<double>(cfg_.min_samples_leaf);
  }

  void make_leaf(Tree& tree, std::uint32_t node, const std::vector<double>& counts) const {
    double total = 0.0;
    for (double v : counts) total += v;
    Tree::Node& n = tree.nodes[node];
    n.feature = -1;
    n.value_offset = static_cast<std::uint32_t>(tree.values.size());
    for (double v : counts) tree.values.push_back(v / total);
  }

  // Weighted Gini decrease (score - parent) / W with score
  // sum_c L_c^2 / W_L + sum_c R_c^2 / W_R. Counts are integers, so the
  // running square sums are exact.
  SplitChoice best_split(std::size_t b, std::size_t e, const std::vector<double>& parent,
                         std::vector<double>& best_left) {
    double W = 0.0, parent_sq = 0.0;
    for (double v : parent) {
      W += v;
      parent_sq += v * v;
    }
    const double parent_score = parent_sq / W;
    const double min_leaf = static_cast<double>(cfg_.min_samples_leaf);
    std::vector<double>& L = scratch_;
    L.assign(C_, 0.0);

    SplitChoice best;
    for (std::uint32_t c : sampler_.draw()) {
      const float* x = t_.column(c);
      const std::uint32_t* rows = seg_.col(c);
      std::fill(L.begin(), L.end(), 0.0);
      double wl = 0.0, sl = 0.0, sr = parent_sq;
      SplitChoice col_best;
      for (std::size_t i = b; i + 1 < e; ++i) {
        const std::uint32_t r = rows[i];
        const double w = weight_[r];
        const Label y = t_.y[r];
        const double lc = L[y];
        const double rc = parent[y] - lc;
        sl += w * (2.0 * lc + w);
        sr -= w * (2.0 * rc - w);
        L[y] = lc + w;
        wl += w;
        const float v = x[r];
        const float vn = x[rows[i + 1]];
        if (!(v < vn)) continue;
        const double wr = W - wl;
        if (wl < min_leaf || wr < min_leaf) continue;
        const double score = sl / wl + sr / wr;
        if (!(score - parent_score > 1e-12 * parent_score)) continue;
        const double gain = (score - parent_score) / W;
        if (!col_best.valid() || gain > col_best.gain) {
          col_best = {gain, static_cast<std::int64_t>(c), midpoint(v, vn)};
          if (!best.valid() || col_best.better_than(best)) best_left = L;
        }
      }
      if (col_best.valid() && col_best.better_than(best)) best = col_best;
    }
    return best;
  }

  const TrainingSet& t_;
  const TrainConfig& cfg_;
  std::size_t C_;
  std::mt19937_64 rng_;
  ColumnSampler sampler_;
  std::vector<std::uint32_t> weight_;
  Segments seg_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<double> scratch_;
};

// ---------------------------------------------------------------- GBT

class GbtBuilder {
 public:
  GbtBuilder(const TrainingSet& t, const TrainConfig& cfg, const Segments& bag, std::span<const double> g,
             std::span<const double> h, std::uint64_t seed)
      : t_(t), cfg_(cfg), seg_(bag), g_(g), h_(h), sampler_(t.d, cfg.gbt_feature_fraction, seed) {}

  Tree build() {
    goes_left_.assign(t_.n, 0);
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    leaves.push_back(make_leaf_state(0, 0, seg_.size()));
    std::size_t n_leaves = 1;
    while (n_leaves < cfg_.gbt_max_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!leaves[i].split.valid()) continue;
        if (pick == leaves.size() || leaves[i].split.gain > leaves[pick].split.gain ||
            (leaves[i].split.gain == leaves[pick].split.gain && leaves[i].node < leaves[pick].node))
          pick = i;
      }
      if (pick == leaves.size()) break;
      Leaf parent = leaves[pick];
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));

      const float* x = t_.column(static_cast<std::size_t>(parent.split.column));
      const std::uint32_t* rows = seg_.col(0);
      for (std::size_t i = parent.b; i < parent.e; ++i) goes_left_[rows[i]] = x[rows[i]] < parent.split.threshold;
      const std::size_t mid = seg_.partition(parent.b, parent.e, goes_left_);

      const auto li = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      Tree::Node& n = tree.nodes[parent.node];
      n.feature = static_cast<std::int32_t>(parent.split.column);
      n.threshold = parent.split.threshold;
      n.left = li;
      n.right = li + 1;
      ++n_leaves;
      const bool search = n_leaves < cfg_.gbt_max_leaves;
      leaves.push_back(make_leaf_state(li, parent.b, mid, search));
      leaves.push_back(make_leaf_state(li + 1, mid, parent.e, search));
    }
    std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) { return a.node < b.node; });
    for (const Leaf& l : leaves) {
      Tree::Node& n = tree.nodes[l.node];
      n.feature = -1;
      n.value_offset = static_cast<std::uint32_t>(tree.values.size());
      tree.values.push_back(-l.G / (l.H + cfg_.gbt_lambda));
    }
    return tree;
  }

 private:
  struct Leaf {
    std::uint32_t node;
    std::size_t b, e;
    double G, H;
    SplitChoice split;
  };

  Leaf make_leaf_state(std::uint32_t node, std::size_t b, std::size_t e, bool search = true) {
    const std::uint32_t* rows = seg_.col(0);
    double G = 0.0, H = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      G += g_[rows[i]];
      H += h_[rows[i]];
    }
    Leaf l{node, b, e, G, H, {}};
    if (search) l.split = best_split(l);
    return l;
  }

  SplitChoice best_split(const Leaf& leaf) {
    const double lambda = cfg_.gbt_lambda;
    const double parent = leaf.G * leaf.G / (leaf.H + lambda);
    const std::size_t count = leaf.e - leaf.b;
    const std::size_t min_leaf = cfg_.min_samples_leaf;
    if (count < 2 * min_leaf) return {};
    SplitChoice best;
    for (std::uint32_t c : sampler_.draw()) {
      const float* x = t_.column(c);
      const std::uint32_t* rows = seg_.col(c);
      double gl = 0.0, hl = 0.0;
      SplitChoice col_best;
      for (std::size_t i = leaf.b; i + 1 < leaf.e; ++i) {
        const std::uint32_t r = rows[i];
        gl += g_[r];
        hl += h_[r];
        const float v = x[r];
        const float vn = x[rows[i + 1]];
        if (!(v < vn)) continue;
        const std::size_t nl = i + 1 - leaf.b;
        if (nl < min_leaf || count - nl < min_leaf) continue;
        const double gr = leaf.G - gl;
        const double hr = leaf.H - hl;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
        if (!(gain > 1e-12)) continue;
        if (!col_best.valid() || gain > col_best.gain) col_best = {gain, static_cast<std::int64_t>(c), midpoint(v, vn)};
      }
      if (col_best.valid() && col_best.better_than(best)) best = col_best;
    }
    return best;
  }

  const TrainingSet& t_;
  const TrainConfig& cfg_;
  Segments seg_;
  std::span<const double> g_;
  std::span<const double> h_;
  ColumnSampler sampler_;
  std::vector<std::uint8_t> goes_left_;
};

}  // namespace

// ---------------------------------------------------------------- training

Ensemble train_rf(const FeatureMatrix& features, std::span<const Label> labels, const TrainConfig& config,
                  RfDiagnostics* diagnostics) {
  if (config.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  const TrainingSet t = prepare(features, labels, config);
  Ensemble model;
  model.kind = ModelKind::rf;
  model.n_classes = t.n_classes;
  model.columns = features.columns();
  model.config = config;
  model.config.n_classes = t.n_classes;
  model.config.threads = 1;
  model.trees.resize(config.n_trees);

  std::vector<std::vector<std::uint32_t>> in_bag(diagnostics ? config.n_trees : 0);
  parallel_for(config.n_trees, config.threads, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      RfBuilder builder(t, config, i);
      model.trees[i] = builder.build();
      if (diagnostics) in_bag[i] = builder.weights();
    }
  });

  if (diagnostics) {
    std::vector<double> votes(t.n * t.n_classes, 0.0);
    std::vector<std::uint32_t> hits(t.n, 0);
    for (std::size_t i = 0; i < config.n_trees; ++i) {
      for (std::size_t r = 0; r < t.n; ++r) {
        if (in_bag[i][r]) continue;
        const Tree& tree = model.trees[i];
        const auto leaf = tree.leaf_for(features.row(r));
        const double* p = tree.values.data() + tree.nodes[leaf].value_offset;
        for (std::size_t c = 0; c < t.n_classes; ++c) votes[r * t.n_classes + c] += p[c];
        ++hits[r];
      }
    }
    std::size_t rows = 0, wrong = 0;
    for (std::size_t r = 0; r < t.n; ++r) {
      if (!hits[r]) continue;
      ++rows;
      wrong += argmax({votes.data() + r * t.n_classes, t.n_classes}) != labels[r];
    }
    diagnostics->oob_rows = rows;
    diagnostics->oob_error = rows ? static_cast<double>(wrong) / static_cast<double>(rows) : 0.0;
  }
  return model;
}

Ensemble train_gbt(const FeatureMatrix& features, std::span<const Label> labels, const TrainConfig& config,
                   std::vector<double>* loss_trace) {
  const TrainingSet t = prepare(features, labels, config);
  const std::size_t C = t.n_classes;
  Ensemble model;
  model.kind = ModelKind::gbt;
  model.n_classes = C;
  model.columns = features.columns();
  model.config = config;
  model.config.n_classes = C;
  model.config.threads = 1;
  model.trees.resize(config.n_trees * C);

  const std::size_t bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.gbt_bagging_fraction * static_cast<double>(t.n))));
  std::vector<double> scores(t.n * C, 0.0);
  std::vector<double> prob(t.n * C);
  std::vector<std::vector<double>> grad(C, std::vector<double>(t.n)), hess(C, std::vector<double>(t.n));
  std::vector<std::uint32_t> bag(t.n, 1);
  std::vector<std::uint32_t> ids(t.n);
  Segments bag_segments;
  if (loss_trace) loss_trace->clear();

  for (std::size_t it = 0; it < config.n_trees; ++it) {
    if (bag_size < t.n) {
      std::mt19937_64 rng(stream_seed(config.seed, 0x424147, it));
      std::iota(ids.begin(), ids.end(), 0u);
      std::fill(bag.begin(), bag.end(), 0u);
      for (std::size_t i = 0; i < bag_size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, t.n - 1);
        std::swap(ids[i], ids[pick(rng)]);
        bag[ids[i]] = 1;
      }
    }
    bag_segments.fill(t, bag, bag_size < t.n ? bag_size : t.n);

    for (std::size_t r = 0; r < t.n; ++r) {
      std::span<double> p(prob.data() + r * C, C);
      std::copy_n(scores.data() + r * C, C, p.data());
      softmax(p);
      for (std::size_t c = 0; c < C; ++c) {
        const double y = t.y[r] == c ? 1.0 : 0.0;
        grad[c][r] = p[c] - y;
        hess[c][r] = p[c] * (1.0 - p[c]);
      }
    }

    parallel_for(C, config.threads, 1, [&](std::size_t b, std::size_t e) {
      for (std::size_t c = b; c < e; ++c) {
        GbtBuilder builder(t, config, bag_segments, grad[c], hess[c], stream_seed(config.seed, 0x434F4C + it, c));
        model.trees[it * C + c] = builder.build();
      }
    });

    const double lr = config.gbt_learning_rate;
    std::vector<float> row(t.d);
    for (std::size_t r = 0; r < t.n; ++r) {
      auto fr = features.row(r);
      for (std::size_t c = 0; c < C; ++c) {
        const Tree& tree = model.trees[it * C + c];
        scores[r * C + c] += lr * tree.values[tree.nodes[tree.leaf_for(fr)].value_offset];
      }
    }

    if (loss_trace) {
      double loss = 0.0;
      std::vector<double> p(C);
      for (std::size_t r = 0; r < t.n; ++r) {
        std::copy_n(scores.data() + r * C, C, p.data());
        softmax(p);
        loss -= std::log(std::max(p[t.y[r]], 1e-300));
      }
      loss_trace->push_back(loss / static_cast<double>(t.n));
    }
  }
  return model;
}

Ensemble train(ModelKind kind, const FeatureMatrix& features, std::span<const Label> labels,
               const TrainConfig& config) {
  return kind == ModelKind::rf ? train_rf(features, labels, config) : train_gbt(features, labels, config);
}

// ---------------------------------------------------------------- prediction

void Ensemble::predict_row(std::span<const float> row, std::span<double> probs) const {
  std::fill(probs.begin(), probs.end(), 0.0);
  if (kind == ModelKind::rf) {
    if (trees.empty()) {
      std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(n_classes));
      return;
    }
    for (const Tree& tree : trees) {
      const double* p = tree.values.data() + tree.nodes[tree.leaf_for(row)].value_offset;
      for (std::size_t c = 0; c < n_classes; ++c) probs[c] += p[c];
    }
    for (double& p : probs) p /= static_cast<double>(trees.size());
    return;
  }
  const double lr = config.gbt_learning_rate;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const Tree& tree = trees[i];
    probs[i % n_classes] += lr * tree.values[tree.nodes[tree.leaf_for(row)].value_offset];
  }
  softmax(probs);
}

Prediction Ensemble::predict(const FeatureMatrix& features, unsigned threads) const {
  std::vector<std::size_t> map(columns.size());
  const bool identical = features.columns() == columns;
  if (!identical) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < features.cols(); ++c) index.emplace(features.columns()[c], c);
    std::string missing, unexpected;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto it = index.find(columns[c]);
      if (it == index.end())
        missing += (missing.empty() ? "" : ", ") + columns[c];
      else
        map[c] = it->second;
    }
    std::unordered_map<std::string, bool> known;
    for (const auto& c : columns) known.emplace(c, true);
    for (const auto& c : features.columns())
      if (!known.count(c)) unexpected += (unexpected.empty() ? "" : ", ") + c;
    if (!missing.empty() || !unexpected.empty()) {
      std::string msg = "feature columns do not match the model manifest";
      if (!missing.empty()) msg += "; missing: " + missing;
      if (!unexpected.empty()) msg += "; unexpected: " + unexpected;
      throw std::invalid_argument(msg);
    }
  }

  Prediction out;
  out.n_classes = n_classes;
  out.probabilities.resize(features.rows() * n_classes);
  out.labels.resize(features.rows());
  parallel_for(features.rows(), threads, 1024, [&](std::size_t b, std::size_t e) {
    std::vector<float> buf(columns.size());
    for (std::size_t r = b; r < e; ++r) {
      std::span<const float> row = features.row(r);
      if (!identical) {
        for (std::size_t c = 0; c < map.size(); ++c) buf[c] = row[map[c]];
        row = buf;
      }
      std::span<double> p(out.probabilities.data() + r * n_classes, n_classes);
      predict_row(row, p);
      out.labels[r] = argmax(p);
    }
  });
  return out;
}

double log_loss(const Ensemble& model, const FeatureMatrix& features, std::span<const Label> labels) {
  if (features.rows() != labels.size()) throw std::invalid_argument("feature rows and labels differ");
  if (labels.empty()) return 0.0;
  const Prediction p = model.predict(features);
  double loss = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) loss -= std::log(std::max(p.row(r)[labels[r]], 1e-300));
  return loss / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------- serialization

namespace {

constexpr std::string_view kMagic = "terraclass-model";
constexpr int kModelVersion = 1;

template <class T>
void put(std::string& out, T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  // Next non-empty line split on single spaces.
  std::vector<std::string_view> line() {
    while (pos_ < text_.size()) {
      std::size_t nl = text_.find('\n', pos_);
      if (nl == std::string_view::npos) fail("missing newline at end of model (truncated file)");
      std::string_view l = text_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
      ++line_no_;
      if (l.empty()) continue;
      std::vector<std::string_view> tok;
      std::size_t b = 0;
      while (b <= l.size()) {
        std::size_t e = l.find(' ', b);
        if (e == std::string_view::npos) e = l.size();
        if (e > b) tok.push_back(l.substr(b, e - b));
        b = e + 1;
      }
      return tok;
    }
    fail("unexpected end of model (truncated file)");
  }

  std::vector<std::string_view> expect(std::string_view key, std::size_t n_args) {
    auto tok = line();
    if (tok.empty() || tok[0] != key) fail("expected '" + std::string(key) + "'");
    if (tok.size() != n_args + 1) fail("'" + std::string(key) + "' takes " + std::to_string(n_args) + " values");
    return tok;
  }

  template <class T>
  T number(std::string_view s) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("invalid number '" + std::string(s) + "'");
    return v;
  }

  bool at_end() const { return text_.find_first_not_of('\n', pos_) == std::string_view::npos; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("model line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string serialize_model(const Ensemble& m) {
  std::string out;
  out += kMagic;
  out += " v";
  put(out, kModelVersion);
  out += "\nkind ";
  out += model_kind_name(m.kind);
  out += "\nclasses ";
  put(out, m.n_classes);
  const TrainConfig& c = m.config;
  out += "\nconfig n_trees=";
  put(out, c.n_trees);
  out += " rf_max_depth=";
  put(out, c.rf_max_depth);
  out += " rf_feature_fraction=";
  put(out, c.rf_feature_fraction);
  out += " rf_bootstrap=";
  put(out, static_cast<int>(c.rf_bootstrap));
  out += " gbt_max_leaves=";
  put(out, c.gbt_max_leaves);
  out += " gbt_learning_rate=";
  put(out, c.gbt_learning_rate);
  out += " gbt_bagging_fraction=";
  put(out, c.gbt_bagging_fraction);
  out += " gbt_feature_fraction=";
  put(out, c.gbt_feature_fraction);
  out += " gbt_lambda=";
  put(out, c.gbt_lambda);
  out += " min_samples_leaf=";
  put(out, c.min_samples_leaf);
  out += " seed=";
  put(out, c.seed);
  out += "\ncolumns ";
  put(out, m.columns.size());
  out += '\n';
  for (const auto& name : m.columns) {
    out += "col ";
    out += name;
    out += '\n';
  }
  out += "trees ";
  put(out, m.trees.size());
  out += '\n';
  for (std::size_t i = 0; i < m.trees.size(); ++i) {
    const Tree& t = m.trees[i];
    out += "tree ";
    put(out, i);
    out += ' ';
    put(out, t.nodes.size());
    out += ' ';
    put(out, t.values.size());
    out += '\n';
    for (const Tree::Node& n : t.nodes) {
      if (n.feature < 0) {
        out += "l ";
        put(out, n.value_offset);
      } else {
        out += "n ";
        put(out, n.feature);
        out += ' ';
        put(out, n.threshold);
        out += ' ';
        put(out, n.left);
        out += ' ';
        put(out, n.right);
      }
      out += '\n';
    }
    out += 'v';
    for (double v : t.values) {
      out += ' ';
      put(out, v);
    }
    out += '\n';
  }
  out += "end\n";
  return out;
}

Ensemble parse_model(std::string_view text) {
  ModelReader in(text);
  Ensemble m;
  {
    auto tok = in.line();
    if (tok.size() != 2 || tok[0] != kMagic) in.fail("not a terraclass model");
    if (tok[1] != "v1") in.fail("unsupported model version '" + std::string(tok[1]) + "'");
  }
  try {
    m.kind = model_kind_from_name(in.expect("kind", 1)[1]);
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  m.n_classes = in.number<std::size_t>(in.expect("classes", 1)[1]);
  if (m.n_classes < 2 || m.n_classes > 255) in.fail("class count out of range");

  {
    auto tok = in.line();
    if (tok.empty() || tok[0] != "config") in.fail("expected 'config'");
    TrainConfig& c = m.config;
    std::vector<std::string> seen;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      const auto eq = tok[i].find('=');
      if (eq == std::string_view::npos) in.fail("malformed config entry '" + std::string(tok[i]) + "'");
      const auto key = tok[i].substr(0, eq);
      const auto val = tok[i].substr(eq + 1);
      if (key == "n_trees") c.n_trees = in.number<std::size_t>(val);
      else if (key == "rf_max_depth") c.rf_max_depth = in.number<std::size_t>(val);
      else if (key == "rf_feature_fraction") c.rf_feature_fraction = in.number<double>(val);
      else if (key == "rf_bootstrap") c.rf_bootstrap = in.number<int>(val) != 0;
      else if (key == "gbt_max_leaves") c.gbt_max_leaves = in.number<std::size_t>(val);
      else if (key == "gbt_learning_rate") c.gbt_learning_rate = in.number<double>(val);
      else if (key == "gbt_bagging_fraction") c.gbt_bagging_fraction = in.number<double>(val);
      else if (key == "gbt_feature_fraction") c.gbt_feature_fraction = in.number<double>(val);
      else if (key == "gbt_lambda") c.gbt_lambda = in.number<double>(val);
      else if (key == "min_samples_leaf") c.min_samples_leaf = in.number<std::size_t>(val);
      else if (key == "seed") c.seed = in.number<std::uint64_t>(val);
      else in.fail("unknown config key '" + std::string(key) + "'");
      seen.emplace_back(key);
    }
    if (seen.size() != 11) in.fail("config must list all 11 training parameters");
    c.n_classes = m.n_classes;
    c.threads = 1;
  }

  const auto n_cols = in.number<std::size_t>(in.expect("columns", 1)[1]);
  for (std::size_t i = 0; i < n_cols; ++i) {
    auto tok = in.line();
    if (tok.size() != 2 || tok[0] != "col") in.fail("expected 'col <name>'");
    m.columns.emplace_back(tok[1]);
  }
  const auto n_trees = in.number<std::size_t>(in.expect("trees", 1)[1]);
  if (m.kind == ModelKind::gbt && n_trees % m.n_classes != 0) in.fail("GBT tree count is not a multiple of the class count");
  const std::size_t width = m.kind == ModelKind::rf ? m.n_classes : 1;
  if (n_trees > text.size() || n_cols > text.size()) in.fail("declared sizes exceed the file length");
  m.trees.resize(n_trees);
  for (std::size_t i = 0; i < n_trees; ++i) {
    auto head = in.expect("tree", 3);
    if (in.number<std::size_t>(head[1]) != i) in.fail("tree index out of sequence");
    const auto n_nodes = in.number<std::size_t>(head[2]);
    const auto n_values = in.number<std::size_t>(head[3]);
    if (n_nodes == 0) in.fail("tree without nodes");
    if (n_nodes > text.size() || n_values > text.size()) in.fail("declared sizes exceed the file length");
    Tree& t = m.trees[i];
    t.nodes.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      auto tok = in.line();
      Tree::Node& n = t.nodes[k];
      if (tok.size() == 2 && tok[0] == "l") {
        n.value_offset = in.number<std::uint32_t>(tok[1]);
        if (n.value_offset + width > n_values) in.fail("leaf value offset out of range");
      } else if (tok.size() == 5 && tok[0] == "n") {
        n.feature = in.number<std::int32_t>(tok[1]);
        n.threshold = in.number<float>(tok[2]);
        n.left = in.number<std::uint32_t>(tok[3]);
        n.right = in.number<std::uint32_t>(tok[4]);
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_cols) in.fail("split column out of range");
        if (n.left <= k || n.right <= k || n.left >= n_nodes || n.right >= n_nodes)
          in.fail("child index out of range");
        if (!std::isfinite(n.threshold)) in.fail("non-finite threshold");
      } else {
        in.fail("expected a node record");
      }
    }
    auto tok = in.line();
    if (tok.empty() || tok[0] != "v" || tok.size() != n_values + 1) in.fail("expected " + std::to_string(n_values) + " leaf values");
    t.values.resize(n_values);
    for (std::size_t k = 0; k < n_values; ++k) {
      t.values[k] = in.number<double>(tok[k + 1]);
      if (!std::isfinite(t.values[k])) in.fail("non-finite leaf value");
    }
  }
  if (in.expect("end", 0).size() != 1 || !in.at_end()) in.fail("trailing content after 'end'");
  return m;
}

void save_model(const Ensemble& model, const std::filesystem::path& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Ensemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace terraclass
