#include "nbm/forest.hpp"

#include "nbm/error.hpp"
#include "nbm/parallel.hpp"

#include <algorithm>
#include <functional>

namespace nbm {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
    double score = 0.0;
};

std::vector<double> mean_of(const Matrix& y, std::span<const std::size_t> rows)
{
    std::vector<double> m(y[rows[0]].size(), 0.0);
    for (auto r : rows) {
        for (std::size_t o = 0; o < m.size(); ++o) m[o] += y[r][o];
    }
    for (auto& v : m) v /= static_cast<double>(rows.size());
    return m;
}

// Best axis-aligned split of `rows` maximizing sum_o (S_L^2/n_L + S_R^2/n_R),
// which is equivalent to minimizing the children's summed squared error.
SplitChoice best_split(const Matrix& x, const Matrix& y, std::span<const std::size_t> rows, std::size_t min_leaf)
{
    const std::size_t n = rows.size();
    const std::size_t outputs = y[rows[0]].size();
    std::vector<double> total(outputs, 0.0);
    for (auto r : rows) {
        for (std::size_t o = 0; o < outputs; ++o) total[o] += y[r][o];
    }

    SplitChoice best;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::vector<double> left(outputs);
    for (std::size_t f = 0; f < x[rows[0]].size(); ++f) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        std::fill(left.begin(), left.end(), 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t o = 0; o < outputs; ++o) left[o] += y[order[i - 1]][o];
            if (i < min_leaf || n - i < min_leaf) continue;
            const double lo = x[order[i - 1]][f], hi = x[order[i]][f];
            if (!(lo < hi)) continue;
            double score = 0.0;
            for (std::size_t o = 0; o < outputs; ++o) {
                const double r = total[o] - left[o];
                score += left[o] * left[o] / static_cast<double>(i) + r * r / static_cast<double>(n - i);
            }
            if (best.feature < 0 || score > best.score) {
                double mid = 0.5 * (lo + hi);
                if (!(mid < hi)) mid = lo;
                best = {static_cast<int>(f), mid, i, score};
            }
        }
    }
    return best;
}

double node_sse(const Matrix& y, std::span<const std::size_t> rows, const std::vector<double>& mean)
{
    double s = 0.0;
    for (auto r : rows) {
        for (std::size_t o = 0; o < mean.size(); ++o) {
            const double d = y[r][o] - mean[o];
            s += d * d;
        }
    }
    return s;
}

}  // namespace

RegressionTree RegressionTree::fit(const Matrix& x, const Matrix& y, std::vector<std::size_t> samples,
                                   std::size_t max_depth, std::size_t min_samples_leaf)
{
    if (samples.empty()) throw InputError("regression tree: no samples");
    min_samples_leaf = std::max<std::size_t>(1, min_samples_leaf);
    RegressionTree tree;

    std::function<std::size_t(std::span<std::size_t>, std::size_t)> grow = [&](std::span<std::size_t> rows,
                                                                               std::size_t depth) -> std::size_t {
        const std::size_t id = tree.nodes_.size();
        tree.nodes_.emplace_back();
        auto mean = mean_of(y, rows);
        const bool depth_ok = max_depth == 0 || depth < max_depth;
        if (!depth_ok || rows.size() < 2 * min_samples_leaf || node_sse(y, rows, mean) <= 0.0) {
            tree.nodes_[id].value = std::move(mean);
            return id;
        }
        const SplitChoice split = best_split(x, y, rows, min_samples_leaf);
        if (split.feature < 0) {
            tree.nodes_[id].value = std::move(mean);
            return id;
        }
        const auto f = static_cast<std::size_t>(split.feature);
        auto mid = std::stable_partition(rows.begin(), rows.end(),
                                         [&](std::size_t r) { return x[r][f] <= split.threshold; });
        const auto nl = static_cast<std::size_t>(mid - rows.begin());
        const std::size_t l = grow(rows.subspan(0, nl), depth + 1);
        const std::size_t r = grow(rows.subspan(nl), depth + 1);
        auto& node = tree.nodes_[id];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    };
    grow(samples, 0);
    return tree;
}

RegressionTree RegressionTree::stump(std::size_t feature, double threshold, std::vector<double> left,
                                     std::vector<double> right)
{
    RegressionTree t;
    t.nodes_.resize(3);
    t.nodes_[0].feature = static_cast<int>(feature);
    t.nodes_[0].threshold = threshold;
    t.nodes_[0].left = 1;
    t.nodes_[0].right = 2;
    t.nodes_[1].value = std::move(left);
    t.nodes_[2].value = std::move(right);
    return t;
}

std::span<const double> RegressionTree::predict(std::span<const double> x) const
{
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
}

std::size_t RegressionTree::depth() const
{
    std::function<std::size_t(std::size_t)> walk = [&](std::size_t i) -> std::size_t {
        if (nodes_[i].feature < 0) return 0;
        return 1 + std::max(walk(nodes_[i].left), walk(nodes_[i].right));
    };
    return nodes_.empty() ? 0 : walk(0);
}

std::size_t RegressionTree::leaves() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

RegressionForest RegressionForest::fit(const Matrix& x, const Matrix& y, const ForestParams& params, std::uint64_t seed)
{
    if (x.empty() || x.size() != y.size()) throw InputError("forest: X and Y must be non-empty with equal row counts");
    const std::size_t features = x[0].size();
    const std::size_t outputs = y[0].size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != features || y[i].size() != outputs) throw InputError("forest: ragged dataset");
    }
    if (params.trees == 0) throw InputError("forest: need at least one tree");

    RegressionForest forest;
    forest.features_ = features;
    forest.outputs_ = outputs;
    forest.seed_ = seed;
    forest.params_ = params;
    forest.trees_.resize(params.trees);
    const std::size_t n = x.size();
    parallel_for(params.trees, params.threads, [&](std::size_t t) {
        std::vector<std::size_t> samples(n);
        if (params.bootstrap) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(t)};
            std::mt19937_64 rng(seq);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& s : samples) s = pick(rng);
            std::sort(samples.begin(), samples.end());
        } else {
            for (std::size_t i = 0; i < n; ++i) samples[i] = i;
        }
        forest.trees_[t] = RegressionTree::fit(x, y, std::move(samples), params.max_depth, params.min_samples_leaf);
    });
    return forest;
}

RegressionForest RegressionForest::from_trees(std::vector<RegressionTree> trees, std::size_t features,
                                              std::size_t outputs)
{
    if (trees.empty()) throw InputError("forest: need at least one tree");
    RegressionForest f;
    f.trees_ = std::move(trees);
    f.features_ = features;
    f.outputs_ = outputs;
    f.params_.trees = f.trees_.size();
    return f;
}

std::vector<double> RegressionForest::predict(std::span<const double> x) const
{
    if (x.size() != features_) {
        throw InputError("forest: query has " + std::to_string(x.size()) + " features, expected " +
                         std::to_string(features_));
    }
    std::vector<double> out(outputs_, 0.0);
    for (const auto& t : trees_) {
        const auto v = t.predict(x);
        for (std::size_t o = 0; o < outputs_; ++o) out[o] += v[o];
    }
    for (auto& v : out) v /= static_cast<double>(trees_.size());
    return out;
}

double RegressionForest::mse(const Matrix& x, const Matrix& y) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto p = predict(x[i]);
        for (std::size_t o = 0; o < outputs_; ++o) s += (p[o] - y[i][o]) * (p[o] - y[i][o]);
    }
    return s / static_cast<double>(x.size() * outputs_);
}

}  // namespace nbm
