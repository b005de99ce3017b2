#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dtwin/regression.hpp"
#include "dtwin/types.hpp"

namespace dtwin {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 2;
    bool bootstrap = true;  // false: every tree sees the full training set
    std::uint64_t seed = 1;

    void validate() const;
};

/// Axis-aligned multi-output regression tree. Leaves store the mean target.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        Vec value;
    };
    std::vector<Node> nodes;

    Vec predict(const Eigen::Ref<const Vec>& x) const;
    int depth() const;
};

struct RandomForest {
    std::vector<RegressionTree> trees;
    int n_features = 0;
    int n_outputs = 0;

    Vec predict(const Vec& x) const;
    Mat predict(const Mat& X) const;
};

/// CART trees grown on bootstrap resamples (tree t uses derive_seed(seed, t)).
/// Splits maximise the summed variance reduction of the targets, each output
/// scaled by its training standard deviation so no output dominates by units.
RandomForest rf_train(const RegressionData& data, const ForestConfig& config);

void write_forest(std::ostream& os, const RandomForest& forest);
void write_forest(const std::string& path, const RandomForest& forest);
RandomForest read_forest(std::istream& is);
RandomForest read_forest(const std::string& path);

}  // namespace dtwin
