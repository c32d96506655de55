#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nbm {

using Matrix = std::vector<std::vector<double>>;

struct ForestParams {
    std::size_t trees = 100;
    std::size_t max_depth = 0;  ///< 0 = unlimited
    std::size_t min_samples_leaf = 2;
    bool bootstrap = true;
    std::size_t threads = 0;  ///< 0 = hardware concurrency
};

/// Multi-output CART regression tree: axis-aligned splits chosen by the
/// largest reduction of the summed squared error over all outputs, leaves
/// store the mean target vector. Every feature is searched at every node.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  ///< -1 marks a leaf
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::vector<double> value;  ///< mean target (leaves only)
    };

    /// Fits on the rows listed in `samples` (repeats allowed, as produced by
    /// bootstrapping).
    static RegressionTree fit(const Matrix& x, const Matrix& y, std::vector<std::size_t> samples,
                              std::size_t max_depth, std::size_t min_samples_leaf);

    /// One split with constant leaves; used to hand-build small forests.
    static RegressionTree stump(std::size_t feature, double threshold, std::vector<double> left,
                                std::vector<double> right);

    /// Leaf value for `x`; rows go left when x[feature] <= threshold.
    std::span<const double> predict(std::span<const double> x) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t depth() const;
    std::size_t leaves() const;

private:
    std::vector<Node> nodes_;
};

/// Bagged ensemble of regression trees; prediction is the plain mean over
/// trees. Tree t draws its bootstrap sample from an RNG seeded with
/// (seed, t), so results do not depend on the thread count.
class RegressionForest {
public:
    /// Throws InputError on an empty or ragged dataset.
    static RegressionForest fit(const Matrix& x, const Matrix& y, const ForestParams& params, std::uint64_t seed);

    /// Builds a forest from existing trees (mainly for tests).
    static RegressionForest from_trees(std::vector<RegressionTree> trees, std::size_t features, std::size_t outputs);

    /// Throws InputError when x has the wrong length.
    std::vector<double> predict(std::span<const double> x) const;

    const std::vector<RegressionTree>& trees() const { return trees_; }
    std::size_t features() const { return features_; }
    std::size_t outputs() const { return outputs_; }
    std::uint64_t seed() const { return seed_; }
    const ForestParams& params() const { return params_; }

    /// Mean over rows and outputs of the squared training residual.
    double mse(const Matrix& x, const Matrix& y) const;

private:
    std::vector<RegressionTree> trees_;
    std::size_t features_ = 0;
    std::size_t outputs_ = 0;
    std::uint64_t seed_ = 0;
    ForestParams params_;
};

}  // namespace nbm
