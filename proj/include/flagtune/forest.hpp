#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "flagtune/core.hpp"
#include "flagtune/rng.hpp"

namespace flagtune {

struct ForestParams {
  std::size_t trees = 100;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // population variance across trees
  std::vector<double> per_tree;

  double sigma() const { return std::sqrt(variance); }
};

// Regression tree over 0/1 features. Every internal node tests one bit:
// rows with the bit clear go left, set go right.
class RegressionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;         // mean target of the node's rows
    std::uint32_t samples = 0;  // training rows (with bootstrap multiplicity)

    bool leaf() const { return feature < 0; }
  };

  // `rows` indexes into `features`/`targets` and may repeat (bootstrap).
  static RegressionTree fit(std::span<const Sequence> features, std::span<const double> targets,
                            std::vector<std::size_t> rows, const ForestParams& params) {
    RegressionTree tree;
    if (rows.empty()) throw Error("cannot fit a tree on zero rows");
    tree.width_ = features[rows.front()].size();
    tree.grow(features, targets, rows, params);
    return tree;
  }

  double predict(const Sequence& x) const {
    std::uint32_t at = 0;
    while (!nodes_[at].leaf()) at = x[static_cast<std::size_t>(nodes_[at].feature)] ? nodes_[at].right : nodes_[at].left;
    return nodes_[at].value;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t width() const { return width_; }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
  }

 private:
  std::uint32_t grow(std::span<const Sequence> x, std::span<const double> y, const std::vector<std::size_t>& rows,
                     const ForestParams& params) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    const auto count = rows.size();
    double sum = 0.0;
    double lo = y[rows.front()], hi = lo;
    for (auto r : rows) {
      sum += y[r];
      lo = std::min(lo, y[r]);
      hi = std::max(hi, y[r]);
    }
    nodes_[id].value = sum / static_cast<double>(count);
    nodes_[id].samples = static_cast<std::uint32_t>(count);
    if (count < params.min_samples_split || lo == hi) return id;

    // Maximizing sum_l^2/n_l + sum_r^2/n_r is equivalent to maximizing the
    // reduction in squared error. Strict '>' keeps the lowest feature on ties.
    std::int32_t best_feature = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < width_; ++f) {
      double sum_right = 0.0;
      std::size_t n_right = 0;
      for (auto r : rows)
        if (x[r][f]) {
          sum_right += y[r];
          ++n_right;
        }
      const std::size_t n_left = count - n_right;
      if (n_left < params.min_samples_leaf || n_right < params.min_samples_leaf || n_left == 0 || n_right == 0)
        continue;
      const double sum_left = sum - sum_right;
      const double score = sum_left * sum_left / static_cast<double>(n_left) +
                           sum_right * sum_right / static_cast<double>(n_right);
      if (score > best_score) {
        best_score = score;
        best_feature = static_cast<std::int32_t>(f);
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x[r][static_cast<std::size_t>(best_feature)] ? right : left).push_back(r);
    const auto l = grow(x, y, left, params);
    const auto rr = grow(x, y, right, params);
    nodes_[id].feature = best_feature;
    nodes_[id].left = l;
    nodes_[id].right = rr;
    return id;
  }

  std::vector<Node> nodes_;
  std::size_t width_ = 0;
};

class Forest {
 public:
  // Tree t is grown on a bootstrap resample drawn from Rng::substream(seed, t);
  // rows are indexed in dataset insertion order.
  static Forest fit(const Dataset& data, const ForestParams& params, std::uint64_t seed) {
    if (data.size() < 2) throw Error("forest needs at least 2 training rows");
    if (params.trees == 0) throw Error("forest needs at least one tree");
    std::vector<Sequence> x;
    std::vector<double> y;
    x.reserve(data.size());
    y.reserve(data.size());
    for (const auto& e : data.entries()) {
      x.push_back(e.sequence);
      y.push_back(e.time_s);
    }
    Forest forest;
    forest.width_ = data.width();
    forest.trees_.reserve(params.trees);
    const auto m = data.size();
    for (std::size_t t = 0; t < params.trees; ++t) {
      std::vector<std::size_t> rows(m);
      if (params.bootstrap) {
        Rng rng = Rng::substream(seed, t);
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(m));
      } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      }
      forest.trees_.push_back(RegressionTree::fit(x, y, std::move(rows), params));
    }
    return forest;
  }

  // Draws the fit seed from the run's stream.
  static Forest fit(const Dataset& data, const ForestParams& params, Rng& rng) {
    return fit(data, params, rng.next_u64());
  }

  Prediction predict(const Sequence& x) const {
    check_width(x);
    Prediction p;
    p.per_tree.reserve(trees_.size());
    for (const auto& t : trees_) p.per_tree.push_back(t.predict(x));
    const double k = static_cast<double>(trees_.size());
    p.mean = std::accumulate(p.per_tree.begin(), p.per_tree.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : p.per_tree) ss += (v - p.mean) * (v - p.mean);
    p.variance = ss / k;
    return p;
  }

  double predict_mean(const Sequence& x) const {
    check_width(x);
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(x);
    return s / static_cast<double>(trees_.size());
  }

  std::size_t size() const { return trees_.size(); }
  std::size_t width() const { return width_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  void check_width(const Sequence& x) const {
    if (x.size() != width_)
      throw Error("prediction width " + std::to_string(x.size()) + " does not match training width " +
                  std::to_string(width_));
  }

  std::vector<RegressionTree> trees_;
  std::size_t width_ = 0;
};

}  // namespace flagtune
