#include "dtwin/forest.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Mat& X, const Mat& Y, const Mat& Ys, const ForestConfig& c) : X_(X), Y_(Y), Ys_(Ys), c_(c) {}

    RegressionTree build(std::vector<Eigen::Index> idx) {
        tree_.nodes.clear();
        grow(idx, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        std::size_t n_left = 0;
        double score = 0.0;
    };

    int grow(std::vector<Eigen::Index>& idx, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[id].value = Y_(idx, Eigen::all).colwise().mean().transpose();
        if (depth >= c_.max_depth || idx.size() < 2 * static_cast<std::size_t>(c_.min_samples_leaf)) return id;

        const Split s = best_split(idx);
        if (s.feature < 0) return id;
        std::vector<Eigen::Index> left, right;
        left.reserve(s.n_left);
        right.reserve(idx.size() - s.n_left);
        for (auto i : idx) (X_(i, s.feature) <= s.threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        tree_.nodes[id].feature = s.feature;
        tree_.nodes[id].threshold = s.threshold;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    // Maximises sum_k S_L,k^2 / n_L + S_R,k^2 / n_R, which is equivalent to
    // minimising the children's summed squared error.
    Split best_split(const std::vector<Eigen::Index>& idx) const {
        const std::size_t n = idx.size();
        const auto leaf = static_cast<std::size_t>(c_.min_samples_leaf);
        const Eigen::Index K = Ys_.cols();
        Vec total = Vec::Zero(K);
        for (auto i : idx) total += Ys_.row(i).transpose();
        Split best;
        best.score = total.squaredNorm() / static_cast<double>(n) * (1.0 + 1e-12) + 1e-12;

        std::vector<Eigen::Index> order(idx);
        Vec left(K);
        for (int f = 0; f < static_cast<int>(X_.cols()); ++f) {
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return X_(a, f) < X_(b, f) || (X_(a, f) == X_(b, f) && a < b);
            });
            left.setZero();
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left += Ys_.row(order[k]).transpose();
                const std::size_t nl = k + 1;
                const double xa = X_(order[k], f);
                const double xb = X_(order[k + 1], f);
                if (nl < leaf || n - nl < leaf || xa == xb) continue;
                const double score = left.squaredNorm() / static_cast<double>(nl) +
                                     (total - left).squaredNorm() / static_cast<double>(n - nl);
                if (score > best.score) {
                    const double mid = 0.5 * (xa + xb);
                    best = {f, mid < xb ? mid : xa, nl, score};
                }
            }
        }
        return best;
    }

    const Mat& X_;
    const Mat& Y_;
    const Mat& Ys_;
    const ForestConfig& c_;
    RegressionTree tree_;
};

}  // namespace

void ForestConfig::validate() const {
    require(n_trees >= 1, "ForestConfig: n_trees must be >= 1");
    require(max_depth >= 0, "ForestConfig: max_depth must be >= 0");
    require(min_samples_leaf >= 1, "ForestConfig: min_samples_leaf must be >= 1");
}

Vec RegressionTree::predict(const Eigen::Ref<const Vec>& x) const {
    require(!nodes.empty(), "RegressionTree: empty tree");
    int k = 0;
    while (nodes[k].feature >= 0) k = x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    return nodes[k].value;
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        deepest = std::max(deepest, d[k]);
        if (nodes[k].feature >= 0) d[nodes[k].left] = d[nodes[k].right] = d[k] + 1;
    }
    return deepest;
}

Vec RandomForest::predict(const Vec& x) const {
    require(!trees.empty(), "RandomForest: no trees");
    require(x.size() == n_features, "RandomForest: feature width mismatch");
    require(x.allFinite(), "RandomForest: non-finite input");
    Vec sum = Vec::Zero(n_outputs);
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

Mat RandomForest::predict(const Mat& X) const {
    Mat out(X.rows(), n_outputs);
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = predict(Vec(X.row(i).transpose())).transpose();
    return out;
}

RandomForest rf_train(const RegressionData& data, const ForestConfig& config) {
    config.validate();
    data.validate();
    require(data.size() >= 1, "rf_train: empty dataset");
    const Standardizer ys = Standardizer::fit(data.Y);
    const Mat Ys = ys.transform(data.Y);

    RandomForest forest;
    forest.n_features = static_cast<int>(data.X.cols());
    forest.n_outputs = static_cast<int>(data.Y.cols());
    const auto n = static_cast<std::size_t>(data.size());
    for (int t = 0; t < config.n_trees; ++t) {
        std::vector<Eigen::Index> idx(n);
        if (config.bootstrap) {
            Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
            for (auto& i : idx) i = static_cast<Eigen::Index>(uniform_index(rng, n));
        } else {
            std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        }
        forest.trees.push_back(TreeBuilder(data.X, data.Y, Ys, config).build(std::move(idx)));
    }
    return forest;
}

void write_forest(std::ostream& os, const RandomForest& forest) {
    os << std::setprecision(17);
    os << "dtwin-forest 1\n" << forest.n_features << ' ' << forest.n_outputs << ' ' << forest.trees.size() << '\n';
    for (const auto& t : forest.trees) {
        os << "tree " << t.nodes.size() << '\n';
        for (const auto& nd : t.nodes) {
            os << nd.feature << ' ' << nd.threshold << ' ' << nd.left << ' ' << nd.right;
            for (Eigen::Index k = 0; k < nd.value.size(); ++k) os << ' ' << nd.value[k];
            os << '\n';
        }
    }
    os << "end\n";
}

void write_forest(const std::string& path, const RandomForest& forest) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_forest(os, forest);
    if (!os) throw IoError("write failed: " + path);
}

RandomForest read_forest(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "dtwin-forest" || version != 1) throw ValidationError("forest: bad header");
    RandomForest f;
    std::size_t n_trees = 0;
    if (!(is >> f.n_features >> f.n_outputs >> n_trees) || f.n_features < 1 || f.n_outputs < 1)
        throw ValidationError("forest: bad dimensions");
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t n_nodes = 0;
        if (!(is >> tag >> n_nodes) || tag != "tree" || n_nodes == 0) throw ValidationError("forest: bad tree header");
        RegressionTree tree;
        tree.nodes.resize(n_nodes);
        for (std::size_t k = 0; k < n_nodes; ++k) {
            auto& nd = tree.nodes[k];
            nd.value.resize(f.n_outputs);
            if (!(is >> nd.feature >> nd.threshold >> nd.left >> nd.right)) throw ValidationError("forest: truncated node");
            for (Eigen::Index k = 0; k < f.n_outputs; ++k)
                if (!(is >> nd.value[k])) throw ValidationError("forest: truncated node");
            // Children always follow their parent, which also rules out cycles.
            const int self = static_cast<int>(k);
            const int limit = static_cast<int>(n_nodes);
            require(nd.feature < f.n_features && (nd.feature < 0 || (nd.left > self && nd.left < limit &&
                                                                      nd.right > self && nd.right < limit)),
                    "forest: node references out of range");
        }
        f.trees.push_back(std::move(tree));
    }
    if (!(is >> tag) || tag != "end") throw ValidationError("forest: missing end marker");
    return f;
}

RandomForest read_forest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return read_forest(is);
}

}  // namespace dtwin
