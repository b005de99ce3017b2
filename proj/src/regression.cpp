#include "dtwin/regression.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dtwin/errors.hpp"
#include "dtwin/random.hpp"

namespace dtwin {

using detail::require;

namespace {

constexpr std::uint64_t kHoldoutStream = 0xffffffffULL;

std::vector<Eigen::Index> shuffled(Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    return idx;
}

struct Adam {
    std::vector<Mat> mW, vW;
    std::vector<Vec> mb, vb;
    long step = 0;

    explicit Adam(const Mlp<double>& net) {
        for (std::size_t l = 0; l < net.layers(); ++l) {
            mW.push_back(Mat::Zero(net.W[l].rows(), net.W[l].cols()));
            vW.push_back(mW.back());
            mb.push_back(Vec::Zero(net.b[l].size()));
            vb.push_back(mb.back());
        }
    }

    void update(Mlp<double>& net, const MlpGradient<double>& g, const TrainConfig& c) {
        ++step;
        const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
        const auto apply = [&](auto& p, auto& m, auto& v, const auto& grad) {
            m = c.beta1 * m + (1.0 - c.beta1) * grad;
            v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseAbs2();
            p.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
        };
        for (std::size_t l = 0; l < net.layers(); ++l) {
            apply(net.W[l], mW[l], vW[l], g.W[l]);
            apply(net.b[l], mb[l], vb[l], g.b[l]);
        }
    }
};

void write_vec(std::ostream& os, const char* name, const Vec& v) {
    os << name << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
    os << '\n';
}

void expect(std::istream& is, const std::string& token) {
    std::string t;
    if (!(is >> t) || t != token) throw ValidationError("checkpoint: expected '" + token + "', got '" + t + "'");
}

Eigen::Index read_count(std::istream& is) {
    long n = -1;
    if (!(is >> n) || n < 0) throw ValidationError("checkpoint: bad count");
    return static_cast<Eigen::Index>(n);
}

double read_value(std::istream& is) {
    double x = 0.0;
    if (!(is >> x)) throw ValidationError("checkpoint: truncated or non-numeric value");
    return x;
}

Vec read_vec(std::istream& is, const char* name) {
    expect(is, name);
    Vec v(read_count(is));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = read_value(is);
    return v;
}

}  // namespace

void RegressionData::validate() const {
    require(X.rows() == Y.rows(), "RegressionData: feature and target row counts differ");
    require(X.allFinite() && Y.allFinite(), "RegressionData: non-finite value");
}

RegressionData RegressionData::rows(const std::vector<Eigen::Index>& idx) const {
    return {X(idx, Eigen::all), Y(idx, Eigen::all)};
}

Standardizer Standardizer::fit(const Mat& data) {
    require(data.rows() >= 1, "Standardizer: no rows");
    Standardizer s;
    s.mean = data.colwise().mean().transpose();
    s.scale = ((data.rowwise() - s.mean.transpose()).colwise().squaredNorm() / static_cast<double>(data.rows()))
                  .cwiseSqrt()
                  .transpose();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
        if (!(s.scale[j] > 0.0)) s.scale[j] = 1.0;
    return s;
}

Standardizer Standardizer::identity(Eigen::Index columns) { return {Vec::Zero(columns), Vec::Ones(columns)}; }

Mat Standardizer::transform(const Mat& data) const {
    require(data.cols() == mean.size(), "Standardizer: column count mismatch");
    return (data.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Mat Standardizer::inverse(const Mat& data) const {
    require(data.cols() == mean.size(), "Standardizer: column count mismatch");
    return (data.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose();
}

void TrainConfig::validate() const {
    require(learning_rate >= 0.0 && std::isfinite(learning_rate), "TrainConfig: learning_rate must be >= 0");
    require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
    require(max_epochs >= 0, "TrainConfig: max_epochs must be >= 0");
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "TrainConfig: validation_fraction must lie in [0, 1)");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "TrainConfig: Adam betas must lie in [0, 1)");
    require(epsilon > 0.0, "TrainConfig: epsilon must be > 0");
}

Mat DnnRegressor::predict(const Mat& X) const { return y_scaler.inverse(forward(net, x_scaler.transform(X))); }

Vec DnnRegressor::predict(const Vec& x) const { return predict(Mat(x.transpose())).row(0).transpose(); }

TrainResult train(const Mlp<double>& init, const RegressionData& train_set, const RegressionData& validation,
                  const TrainConfig& config) {
    init.validate();
    config.validate();
    train_set.validate();
    require(train_set.size() >= 1, "train: empty training set");
    require(train_set.X.cols() == init.inputs() && train_set.Y.cols() == init.outputs(),
            "train: data width does not match the network");
    const bool has_val = validation.size() > 0;
    if (has_val) {
        validation.validate();
        require(validation.X.cols() == init.inputs() && validation.Y.cols() == init.outputs(),
                "train: validation width does not match the network");
    }

    TrainResult r;
    r.model.net = init;
    r.model.x_scaler = config.normalize ? Standardizer::fit(train_set.X) : Standardizer::identity(init.inputs());
    r.model.y_scaler = config.normalize ? Standardizer::fit(train_set.Y) : Standardizer::identity(init.outputs());
    const Mat Xt = r.model.x_scaler.transform(train_set.X);
    const Mat Yt = r.model.y_scaler.transform(train_set.Y);
    const Mat Xv = has_val ? r.model.x_scaler.transform(validation.X) : Mat();
    const Mat Yv = has_val ? r.model.y_scaler.transform(validation.Y) : Mat();

    Mlp<double>& net = r.model.net;
    auto& h = r.history;
    const auto record = [&](int epoch) {
        const double tl = mse(net, Xt, Yt);
        const double vl = has_val ? mse(net, Xv, Yv) : tl;
        if (!std::isfinite(tl) || !std::isfinite(vl)) {
            throw NumericalError("training diverged at epoch " + std::to_string(epoch) + " (loss not finite)");
        }
        h.train_loss.push_back(tl);
        if (has_val) h.validation_loss.push_back(vl);
        return vl;
    };

    double best = record(0);
    Mlp<double> best_net = net;
    Adam adam(net);
    MlpGradient<double> grad;
    const Eigen::Index n = Xt.rows();
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng order_rng(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(epoch)));
        Rng dropout_rng(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(epoch) + 1));
        const auto order = shuffled(n, order_rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
            const std::vector<Eigen::Index> batch(order.begin() + start, order.begin() + start + len);
            const Mat Xb = Xt(batch, Eigen::all);
            const Mat Yb = Yt(batch, Eigen::all);
            mse_and_gradient(net, Xb, Yb, grad, true, &dropout_rng);
            adam.update(net, grad, config);
        }
        const double loss = record(epoch);
        if (loss < best) {
            best = loss;
            best_net = net;
            h.best_epoch = epoch;
        }
    }
    net = std::move(best_net);
    return r;
}

TrainResult train(const Mlp<double>& init, const RegressionData& data, const TrainConfig& config) {
    config.validate();
    data.validate();
    Rng rng(derive_seed(config.seed, kHoldoutStream));
    const auto idx = shuffled(data.size(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(idx.size())));
    require(n_val < idx.size(), "train: validation_fraction leaves no training rows");
    const std::vector<Eigen::Index> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    const std::vector<Eigen::Index> tr(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    return train(init, data.rows(tr), data.rows(val), config);
}

RegressionMetrics evaluate(const Mat& truth, const Mat& predicted) {
    require(truth.rows() >= 1, "evaluate: empty test set");
    require(truth.rows() == predicted.rows() && truth.cols() == predicted.cols(), "evaluate: shape mismatch");
    RegressionMetrics m;
    const double n = static_cast<double>(truth.rows());
    for (Eigen::Index k = 0; k < truth.cols(); ++k) {
        const auto y = truth.col(k);
        const double ss_res = (y - predicted.col(k)).squaredNorm();
        m.mse.push_back(ss_res / n);
        if (y.maxCoeff() == y.minCoeff()) {
            m.r2.emplace_back(std::nullopt);
        } else {
            const double ss_tot = (y.array() - y.mean()).square().sum();
            m.r2.emplace_back(1.0 - ss_res / ss_tot);
        }
    }
    m.overall_mse = (truth - predicted).squaredNorm() / static_cast<double>(truth.size());
    return m;
}

void write_checkpoint(std::ostream& os, const DnnRegressor& model) {
    const auto& net = model.net;
    net.validate();
    os << std::setprecision(17);
    os << "dtwin-mlp 1\n";
    os << "layers " << net.sizes.size();
    for (int s : net.sizes) os << ' ' << s;
    os << "\ndropout " << net.dropout.size();
    for (double d : net.dropout) os << ' ' << d;
    os << '\n';
    write_vec(os, "x_mean", model.x_scaler.mean);
    write_vec(os, "x_scale", model.x_scaler.scale);
    write_vec(os, "y_mean", model.y_scaler.mean);
    write_vec(os, "y_scale", model.y_scaler.scale);
    for (std::size_t l = 0; l < net.layers(); ++l) {
        os << "W " << l << ' ' << net.W[l].rows() << ' ' << net.W[l].cols();
        for (Eigen::Index r = 0; r < net.W[l].rows(); ++r)
            for (Eigen::Index c = 0; c < net.W[l].cols(); ++c) os << ' ' << net.W[l](r, c);
        os << "\nb " << l << ' ' << net.b[l].size();
        for (Eigen::Index i = 0; i < net.b[l].size(); ++i) os << ' ' << net.b[l][i];
        os << '\n';
    }
    os << "end\n";
}

void write_checkpoint(const std::string& path, const DnnRegressor& model) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_checkpoint(os, model);
    if (!os) throw IoError("write failed: " + path);
}

DnnRegressor read_checkpoint(std::istream& is) {
    expect(is, "dtwin-mlp");
    expect(is, "1");
    expect(is, "layers");
    std::vector<int> sizes(static_cast<std::size_t>(read_count(is)));
    for (int& s : sizes) s = static_cast<int>(read_count(is));
    expect(is, "dropout");
    std::vector<double> dropout(static_cast<std::size_t>(read_count(is)));
    for (double& d : dropout) d = read_value(is);
    require(sizes.size() >= 2 && dropout.size() == sizes.size() - 2, "checkpoint: inconsistent layer header");

    DnnRegressor m;
    m.net = zero_mlp<double>(sizes, dropout);
    m.x_scaler.mean = read_vec(is, "x_mean");
    m.x_scaler.scale = read_vec(is, "x_scale");
    m.y_scaler.mean = read_vec(is, "y_mean");
    m.y_scaler.scale = read_vec(is, "y_scale");
    require(m.x_scaler.mean.size() == sizes.front() && m.x_scaler.scale.size() == sizes.front() &&
                m.y_scaler.mean.size() == sizes.back() && m.y_scaler.scale.size() == sizes.back(),
            "checkpoint: scaler width mismatch");
    for (std::size_t l = 0; l < m.net.layers(); ++l) {
        auto& W = m.net.W[l];
        auto& b = m.net.b[l];
        expect(is, "W");
        require(read_count(is) == static_cast<Eigen::Index>(l), "checkpoint: layers out of order");
        require(read_count(is) == W.rows() && read_count(is) == W.cols(), "checkpoint: weight shape mismatch");
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = read_value(is);
        expect(is, "b");
        require(read_count(is) == static_cast<Eigen::Index>(l), "checkpoint: layers out of order");
        require(read_count(is) == b.size(), "checkpoint: bias size mismatch");
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = read_value(is);
    }
    expect(is, "end");
    return m;
}

DnnRegressor read_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return read_checkpoint(is);
}

}  // namespace dtwin
