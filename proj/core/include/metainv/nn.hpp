#pragma once

// Dense feed-forward network: forward pass, backpropagation, inverted
// dropout, MSE loss, Adam and a thresholded binary accuracy metric.
//
// Batched tensors are column-major Eigen matrices with one sample per column
// (features x batch). All arithmetic is double precision.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "metainv/rng.hpp"

namespace metainv {

enum class Activation { relu, sigmoid, identity };

std::string_view to_string(Activation a);
/// Throws InvalidInput for unknown tags.
Activation activation_from_string(std::string_view tag);

double relu(double x);
/// Logistic function, evaluated without overflow for any finite x.
double sigmoid(double x);

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Eigen::MatrixXd weights;  // out_dim x in_dim
  Eigen::VectorXd biases;   // out_dim
  Activation activation = Activation::identity;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act);
  DenseLayer(Eigen::MatrixXd w, Eigen::VectorXd b, Activation act);

  std::size_t parameter_count() const noexcept { return in_dim * out_dim + out_dim; }
  /// Shapes agree and every entry is finite.
  bool valid() const;
};

/// y = activation(W x + b). Throws InvalidInput when x has the wrong length.
Eigen::VectorXd dense_forward(const DenseLayer& layer, const Eigen::VectorXd& input);

struct DropoutOutput {
  Eigen::VectorXd output;
  /// Per-element scale actually applied: 0 for dropped, 1/(1-rate) for kept.
  Eigen::VectorXd mask;
};

/// Inverted dropout. In inference mode (training == false) the input is
/// returned unchanged with an all-ones mask. Throws InvalidInput unless
/// 0 <= rate < 1.
DropoutOutput dropout_forward(const Eigen::VectorXd& input, double rate, bool training, Rng& rng);

/// (1/N) * sum (pred_i - actual_i)^2.
double mse_loss(std::span<const double> pred, std::span<const double> actual);
/// Mean of per-sample MSE over the columns.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual);

/// Fraction of positions where pred thresholded at 0.5 (ties -> 1) equals truth.
double binary_accuracy(std::span<const double> pred, std::span<const double> truth);
double binary_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Activations recorded by a forward pass, consumed by backward().
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;   // input to layer k (after upstream dropout)
  std::vector<Eigen::MatrixXd> outputs;  // activation output of layer k (before dropout)
  std::vector<Eigen::MatrixXd> masks;    // dropout scale after layer k; empty when none

  bool empty() const noexcept { return outputs.empty(); }
  const Eigen::MatrixXd& prediction() const;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  bool all_finite() const;
};

class MlpModel {
 public:
  MlpModel() = default;
  /// Throws InvalidInput when consecutive dimensions do not chain or the
  /// dropout configuration is out of range.
  MlpModel(std::vector<DenseLayer> layers, std::vector<std::size_t> dropout_after, double dropout_rate);

  /// Glorot-uniform weights, zero biases. dims has layer count + 1 entries.
  static MlpModel initialized(std::span<const std::size_t> dims,
                              std::span<const Activation> activations,
                              std::vector<std::size_t> dropout_after,
                              double dropout_rate,
                              std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<std::size_t>& dropout_after() const noexcept { return dropout_after_; }
  double dropout_rate() const noexcept { return dropout_rate_; }
  void set_dropout_rate(double rate);
  bool has_dropout_after(std::size_t layer) const;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  bool empty() const noexcept { return layers_.empty(); }

  /// Inference: dropout is never applied.
  Eigen::VectorXd predict(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& inputs) const;

  /// Forward pass keeping intermediate values. Dropout is applied with
  /// draws from *dropout_rng; a null generator disables dropout.
  ForwardCache forward(const Eigen::MatrixXd& inputs, Rng* dropout_rng = nullptr) const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<DenseLayer> layers_;
  std::vector<std::size_t> dropout_after_;
  double dropout_rate_ = 0.0;
};

/// Gradient of the batch MSE (mean over samples of per-sample MSE) with
/// respect to every weight and bias. Dropout masks stored in the cache are
/// reapplied. Throws InvalidInput on an empty cache or shape mismatch.
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& targets);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  std::uint64_t step_count = 0;
  std::vector<Eigen::MatrixXd> first_weights;
  std::vector<Eigen::MatrixXd> second_weights;
  std::vector<Eigen::VectorXd> first_biases;
  std::vector<Eigen::VectorXd> second_biases;

  static AdamState for_model(const MlpModel& model, AdamHyper hyper = {});
};

/// One bias-corrected Adam update of a flat parameter block. `step` is the
/// 1-based update index used for bias correction.
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::uint64_t step, const AdamHyper& hyper, double learning_rate);

/// Applies one Adam step to every parameter of the model and increments the
/// step count. Throws NumericalError (model untouched) on a non-finite gradient.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double learning_rate);

struct TrainConfig {
  std::size_t batch_size = 30;
  double learning_rate = 1e-3;
  std::size_t epochs = 3000;
  std::uint64_t rng_seed = 42;
  double dropout_rate = 0.1;

  /// Throws InvalidInput when a field is out of range for a training set of
  /// the given size.
  void validate(std::size_t train_size) const;
};

/// Inputs and targets, one sample per column.
struct LabeledData {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  std::size_t size() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
};

struct EpochMetrics {
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct EpochRecord {
  EpochMetrics train;  // running values over the epoch's mini-batches (dropout active)
  std::optional<EpochMetrics> validation;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord&)>;

/// Mini-batch Adam on the MSE loss. Training indices are reshuffled every
/// epoch (the short final batch is kept); shuffling and dropout draw from
/// generators seeded by config.rng_seed. The configured dropout rate is
/// stored on the returned model. Throws TrainingAborted when the loss or a
/// gradient becomes non-finite.
TrainResult train(MlpModel model, const LabeledData& data, const TrainConfig& config,
                  const LabeledData* validation = nullptr, const EpochCallback& on_epoch = {});

// Weights file "MSINN/1": plain text, 17 significant digits, value-exact.
void save_model(const MlpModel& model, std::ostream& out);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(std::istream& in);
MlpModel load_model(const std::filesystem::path& path);

inline constexpr std::string_view kModelFormat = "MSINN/1";

}  // namespace metainv
