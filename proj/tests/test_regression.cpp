#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dtwin/errors.hpp"
#include "dtwin/forest.hpp"
#include "dtwin/regression.hpp"

using namespace dtwin;

namespace {

Mat random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = uniform(rng, lo, hi);
    return m;
}

// Smooth two-output target of three features plus noise.
RegressionData smooth_problem(Eigen::Index n, std::uint64_t seed, double noise) {
    RegressionData d;
    d.X = random_matrix(n, 3, seed);
    d.Y.resize(n, 2);
    Rng rng(seed + 1000);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.Y(i, 0) = std::sin(2.0 * d.X(i, 0)) + d.X(i, 1) * d.X(i, 2) + gaussian(rng, noise);
        d.Y(i, 1) = d.X(i, 0) - 0.5 * d.X(i, 2) * d.X(i, 2) + gaussian(rng, noise);
    }
    return d;
}

VecX<double> flat_gradient(const Mlp<double>& m, const MlpGradient<double>& g) {
    Mlp<double> h = m;
    h.W = g.W;
    h.b = g.b;
    return h.flatten();
}

}  // namespace

TEST(Mlp, DefaultShapeParameterCount) {
    const auto m = init_mlp<double>(kDefaultLayers, 1, kDefaultDropout);
    EXPECT_EQ(m.parameter_count(), 17349);
    EXPECT_EQ(m.inputs(), 6);
    EXPECT_EQ(m.outputs(), 5);
}

TEST(Mlp, ZeroWeightsOutputTheBias) {
    auto m = zero_mlp<double>({4, 7, 3});
    m.b[1] << 1.0, -2.0, 0.5;
    const Vec y = forward(m, Vec(Vec::Constant(4, 3.0)));
    EXPECT_EQ(y, m.b[1]);
}

TEST(Mlp, HandComputedReluChain) {
    auto m = zero_mlp<double>({1, 1, 1});
    m.W[0](0, 0) = 1.0;
    m.W[1](0, 0) = 2.0;
    EXPECT_EQ(forward(m, Vec(Vec::Constant(1, -1.0)))[0], 0.0);
    EXPECT_EQ(forward(m, Vec(Vec::Constant(1, 1.0)))[0], 2.0);
}

TEST(Mlp, RejectsBadShapesAndInputs) {
    EXPECT_THROW(zero_mlp<double>({3, 0, 1}), ValidationError);
    EXPECT_THROW(zero_mlp<double>({3, 4, 1}, {0.2, 0.2}), ValidationError);
    EXPECT_THROW(zero_mlp<double>({3, 4, 1}, {1.0}), ValidationError);
    const auto m = zero_mlp<double>({3, 4, 1});
    EXPECT_THROW(forward(m, Vec(Vec::Zero(2))), ValidationError);
    Vec x = Vec::Zero(3);
    x[1] = std::nan("");
    EXPECT_THROW(forward(m, x), ValidationError);
}

TEST(Mlp, FlattenRoundTrip) {
    const auto m = init_mlp<double>({3, 5, 2}, 4);
    auto z = zero_mlp<double>({3, 5, 2});
    z.unflatten(m.flatten());
    EXPECT_TRUE(z == m);
    EXPECT_THROW(z.unflatten(Vec::Zero(3)), ValidationError);
}

TEST(Mlp, FanInInitialisation) {
    const auto m = init_mlp<double>({16, 64, 1}, 9);
    EXPECT_LE(m.W[0].cwiseAbs().maxCoeff(), 0.25);
    EXPECT_GT(m.W[0].cwiseAbs().maxCoeff(), 0.2);
    EXPECT_EQ(m.b[0].squaredNorm(), 0.0);
    EXPECT_TRUE(init_mlp<double>({16, 64, 1}, 9) == m);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
    auto m = init_mlp<double>({6, 8, 8, 5}, 17);
    for (auto& b : m.b) b = Vec::Constant(b.size(), 0.05);
    const Mat X = random_matrix(10, 6, 2);
    const Mat Y = random_matrix(10, 5, 3);
    MlpGradient<double> g;
    mse_and_gradient(m, X, Y, g);
    const Vec analytic = flat_gradient(m, g);

    const double eps = 1e-5;
    const Vec p = m.flatten();
    Vec numeric(p.size());
    auto probe = m;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        Vec q = p;
        q[k] += eps;
        probe.unflatten(q);
        const double up = mse(probe, X, Y);
        q[k] -= 2 * eps;
        probe.unflatten(q);
        const double down = mse(probe, X, Y);
        numeric[k] = (up - down) / (2 * eps);
    }
    const double rel = (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
    EXPECT_LT(rel, 1e-4);
}

TEST(Mlp, DropoutPreservesTheExpectedActivation) {
    auto m = init_mlp<double>({3, 32, 2}, 5, {0.5});
    m.b[0] = Vec::Constant(32, 0.3);
    const Vec x = Vec::Constant(3, 0.7);
    const Vec plain = forward(m, x);
    Rng rng(8);
    Vec sum = Vec::Zero(2);
    const int passes = 10000;
    for (int k = 0; k < passes; ++k) sum += forward(m, x, true, &rng);
    const Vec mean = sum / passes;
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(mean[j], plain[j], 0.02 * std::abs(plain[j]) + 1e-3) << j;
}

TEST(Mlp, TrainingModeNeedsAnRng) {
    const auto m = init_mlp<double>({3, 4, 1}, 1, {0.2});
    EXPECT_THROW(forward(m, Vec(Vec::Zero(3)), true, nullptr), ValidationError);
}

TEST(Standardizer, RoundTripAndConstantColumns) {
    Mat d = random_matrix(50, 3, 11, -5.0, 20.0);
    d.col(2).setConstant(4.0);
    const auto s = Standardizer::fit(d);
    const Mat z = s.transform(d);
    EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
    EXPECT_NEAR(std::sqrt(z.col(0).squaredNorm() / 50.0), 1.0, 1e-12);
    EXPECT_EQ(s.scale[2], 1.0);
    EXPECT_LT((s.inverse(z) - d).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Train, MemorisesASingleSample) {
    RegressionData d{random_matrix(1, 4, 1), random_matrix(1, 3, 2)};
    TrainConfig c;
    c.max_epochs = 500;
    c.batch_size = 1;
    c.learning_rate = 1e-2;
    const auto r = train(init_mlp<double>({4, 16, 3}, 3), d, RegressionData{}, c);
    EXPECT_LT(r.history.train_loss.back(), 1e-6);
    EXPECT_LT((r.model.predict(d.X) - d.Y).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Train, ZeroLearningRateLeavesTheNetworkAlone) {
    const auto d = smooth_problem(64, 1, 0.0);
    TrainConfig c;
    c.max_epochs = 5;
    c.learning_rate = 0.0;
    const auto init = init_mlp<double>({3, 8, 2}, 2);
    const auto r = train(init, d, d, c);
    ASSERT_EQ(r.history.train_loss.size(), 6u);
    for (double l : r.history.train_loss) EXPECT_EQ(l, r.history.train_loss.front());
    EXPECT_TRUE(r.model.net == init);
    EXPECT_EQ(r.history.best_epoch, 0);
}

TEST(Train, FullBatchLossDecreases) {
    const auto d = smooth_problem(200, 2, 0.0);
    TrainConfig c;
    c.max_epochs = 30;
    c.batch_size = 200;
    c.learning_rate = 1e-3;
    const auto r = train(init_mlp<double>({3, 16, 2}, 4), d, RegressionData{}, c);
    const auto& h = r.history.train_loss;
    for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k], h[k - 1]) << "epoch " << k;
}

TEST(Train, FitsASmoothFunction) {
    const auto tr = smooth_problem(2000, 3, 0.0);
    const auto te = smooth_problem(500, 4, 0.0);
    TrainConfig c;
    c.max_epochs = 60;
    const auto r = train(init_mlp<double>({3, 32, 32, 2}, 5), tr, te, c);
    const auto m = evaluate(te.Y, r.model.predict(te.X));
    for (const auto& v : m.r2) EXPECT_GT(v.value(), 0.98);
    EXPECT_EQ(r.history.validation_loss.size(), 61u);
    EXPECT_EQ(r.history.validation_loss[r.history.best_epoch],
              *std::min_element(r.history.validation_loss.begin(), r.history.validation_loss.end()));
}

TEST(Train, IsDeterministicForASeed) {
    const auto d = smooth_problem(100, 5, 0.1);
    TrainConfig c;
    c.max_epochs = 3;
    const auto init = init_mlp<double>({3, 8, 8, 2}, 6, {0.2, 0.2});
    const auto a = train(init, d, c);
    const auto b = train(init, d, c);
    EXPECT_TRUE(a.model.net == b.model.net);
    EXPECT_EQ(a.history.train_loss, b.history.train_loss);
    c.seed = 2;
    EXPECT_FALSE(train(init, d, c).model.net == a.model.net);
}

TEST(Train, RejectsMismatchedData) {
    const auto d = smooth_problem(10, 5, 0.0);
    EXPECT_THROW(train(init_mlp<double>({4, 8, 2}, 1), d, TrainConfig{}), ValidationError);
    TrainConfig c;
    c.batch_size = 0;
    EXPECT_THROW(train(init_mlp<double>({3, 8, 2}, 1), d, c), ValidationError);
}

TEST(Checkpoint, RoundTripIsExact) {
    const auto d = smooth_problem(100, 6, 0.1);
    TrainConfig c;
    c.max_epochs = 2;
    const auto r = train(init_mlp<double>({3, 8, 8, 2}, 7, {0.2, 0.0}), d, c);
    std::stringstream ss;
    write_checkpoint(ss, r.model);
    const auto back = read_checkpoint(ss);
    EXPECT_TRUE(back.net == r.model.net);
    EXPECT_TRUE(back.x_scaler == r.model.x_scaler);
    EXPECT_TRUE(back.y_scaler == r.model.y_scaler);
    EXPECT_EQ(back.predict(d.X), r.model.predict(d.X));
}

TEST(Checkpoint, RejectsGarbage) {
    std::stringstream bad("not a checkpoint");
    EXPECT_THROW(read_checkpoint(bad), ValidationError);
    const auto r = train(init_mlp<double>({3, 4, 2}, 1), smooth_problem(20, 1, 0.0), TrainConfig{0.0, 32, 0});
    std::stringstream ss;
    write_checkpoint(ss, r.model);
    std::string text = ss.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_checkpoint(truncated), ValidationError);
}

TEST(Evaluate, PerfectAndMeanPredictors) {
    const Mat truth = random_matrix(40, 2, 3);
    auto m = evaluate(truth, truth);
    EXPECT_EQ(m.mse[0], 0.0);
    EXPECT_EQ(m.r2[1].value(), 1.0);
    EXPECT_EQ(m.overall_mse, 0.0);

    Mat mean = truth;
    for (Eigen::Index j = 0; j < 2; ++j) mean.col(j).setConstant(truth.col(j).mean());
    m = evaluate(truth, mean);
    EXPECT_NEAR(m.r2[0].value(), 0.0, 1e-12);
    EXPECT_NEAR(m.r2[1].value(), 0.0, 1e-12);
}

TEST(Evaluate, ConstantTargetHasNoR2) {
    Mat truth = random_matrix(10, 2, 4);
    truth.col(1).setConstant(3.0);
    const auto m = evaluate(truth, truth);
    EXPECT_TRUE(m.r2[0].has_value());
    EXPECT_FALSE(m.r2[1].has_value());
    EXPECT_THROW(evaluate(truth, Mat(truth.leftCols(1))), ValidationError);
}

TEST(Forest, DepthZeroSingleTreePredictsTheMean) {
    const auto d = smooth_problem(50, 7, 0.1);
    ForestConfig c;
    c.n_trees = 1;
    c.max_depth = 0;
    c.bootstrap = false;
    const auto f = rf_train(d, c);
    const Vec p = f.predict(Vec(d.X.row(3).transpose()));
    EXPECT_NEAR(p[0], d.Y.col(0).mean(), 1e-12);
    EXPECT_NEAR(p[1], d.Y.col(1).mean(), 1e-12);
    EXPECT_EQ(f.trees[0].depth(), 0);
}

TEST(Forest, RespectsDepthAndLeafSize) {
    const auto d = smooth_problem(300, 8, 0.1);
    ForestConfig c;
    c.n_trees = 3;
    c.max_depth = 4;
    c.min_samples_leaf = 10;
    for (const auto& t : rf_train(d, c).trees) EXPECT_LE(t.depth(), 4);
}

TEST(Forest, TrainErrorBelowTestError) {
    const auto tr = smooth_problem(1000, 9, 0.1);
    const auto te = smooth_problem(300, 10, 0.1);
    ForestConfig c;
    c.n_trees = 30;
    const auto f = rf_train(tr, c);
    const double train_mse = evaluate(tr.Y, f.predict(tr.X)).overall_mse;
    const auto test = evaluate(te.Y, f.predict(te.X));
    EXPECT_LE(train_mse, test.overall_mse);
    for (const auto& v : test.r2) EXPECT_GT(v.value(), 0.8);
}

TEST(Forest, SeededAndSerialisable) {
    const auto d = smooth_problem(200, 11, 0.1);
    ForestConfig c;
    c.n_trees = 5;
    const auto a = rf_train(d, c);
    const auto b = rf_train(d, c);
    EXPECT_EQ(a.predict(d.X), b.predict(d.X));
    std::stringstream ss;
    write_forest(ss, a);
    const auto back = read_forest(ss);
    EXPECT_EQ(back.predict(d.X), a.predict(d.X));
    std::stringstream bad("dtwin-forest 1\n3 2 1\ntree 1\n0 0.5 0 0 1 1\nend\n");
    EXPECT_THROW(read_forest(bad), ValidationError);
}
