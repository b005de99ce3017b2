#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtwin/mlp.hpp"
#include "dtwin/types.hpp"

namespace dtwin {

/// Feature and target matrices, one sample per row.
struct RegressionData {
    Mat X;
    Mat Y;

    Eigen::Index size() const { return X.rows(); }
    void validate() const;
    /// Rows `idx` of both matrices.
    RegressionData rows(const std::vector<Eigen::Index>& idx) const;
};

/// Per-column affine map to zero mean and unit variance. Constant columns get unit
/// scale so they pass through shifted but unscaled.
struct Standardizer {
    Vec mean;
    Vec scale;

    static Standardizer fit(const Mat& data);
    static Standardizer identity(Eigen::Index columns);
    Mat transform(const Mat& data) const;
    Mat inverse(const Mat& data) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 100;
    double validation_fraction = 0.15;  // used only when no validation set is supplied
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    bool normalize = true;

    void validate() const;
};

/// Losses are MSE in standardized units after each epoch, without dropout.
/// Entry 0 is the untrained network.
struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    int best_epoch = 0;
};

/// Network plus the scalers fitted on its training split.
struct DnnRegressor {
    Mlp<double> net;
    Standardizer x_scaler;
    Standardizer y_scaler;

    Mat predict(const Mat& X) const;
    Vec predict(const Vec& x) const;
};

struct TrainResult {
    DnnRegressor model;
    TrainHistory history;
};

/// Mini-batch Adam on the MSE loss. Scalers come from `train` only. The returned
/// network is the snapshot with the lowest validation loss (lowest training loss
/// when `validation` is empty). Throws NumericalError naming the epoch if the
/// loss stops being finite.
TrainResult train(const Mlp<double>& init, const RegressionData& train, const RegressionData& validation,
                  const TrainConfig& config);

/// As above, holding out a seeded validation_fraction of `data`.
TrainResult train(const Mlp<double>& init, const RegressionData& data, const TrainConfig& config);

struct RegressionMetrics {
    std::vector<double> mse;
    std::vector<std::optional<double>> r2;  // empty when the target column has zero variance
    double overall_mse = 0.0;
};

/// Per-output MSE and R^2 (about the mean of `truth`), in the units given.
RegressionMetrics evaluate(const Mat& truth, const Mat& predicted);

/// Text checkpoint, see README for the layout.
void write_checkpoint(std::ostream& os, const DnnRegressor& model);
void write_checkpoint(const std::string& path, const DnnRegressor& model);
DnnRegressor read_checkpoint(std::istream& is);
DnnRegressor read_checkpoint(const std::string& path);

}  // namespace dtwin
