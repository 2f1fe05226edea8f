#include "metainv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "metainv/error.hpp"

namespace metainv {

namespace {

constexpr double kTiny = std::numeric_limits<double>::denorm_min();
// Largest double below 1.
constexpr double kBelowOne = 1.0 - 0x1.0p-53;

void apply_activation(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::sigmoid:
      z = z.unaryExpr([](double v) { return sigmoid(v); });
      break;
    case Activation::identity:
      break;
  }
}

// d activation / d z expressed through the activation output.
void scale_by_derivative(Eigen::MatrixXd& delta, const Eigen::MatrixXd& out, Activation a) {
  switch (a) {
    case Activation::relu:
      delta = (out.array() > 0.0).select(delta, 0.0);
      break;
    case Activation::sigmoid:
      delta.array() *= out.array() * (1.0 - out.array());
      break;
    case Activation::identity:
      break;
  }
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      mask(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
    }
  }
  return mask;
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw InvalidInput(fmt::format("dropout rate must lie in [0, 1), got {}", rate));
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view tag) {
  if (tag == "relu") return Activation::relu;
  if (tag == "sigmoid") return Activation::sigmoid;
  if (tag == "identity") return Activation::identity;
  throw InvalidInput(fmt::format("unknown activation '{}'", tag));
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) {
  // Saturates at the representable neighbours of 0 and 1 so the result stays
  // strictly inside (0, 1).
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kTiny, kBelowOne);
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation act)
    : in_dim(in),
      out_dim(out),
      weights(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      biases(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))),
      activation(act) {
  if (in == 0 || out == 0) throw InvalidInput("layer dimensions must be positive");
}

DenseLayer::DenseLayer(Eigen::MatrixXd w, Eigen::VectorXd b, Activation act)
    : in_dim(static_cast<std::size_t>(w.cols())),
      out_dim(static_cast<std::size_t>(w.rows())),
      weights(std::move(w)),
      biases(std::move(b)),
      activation(act) {
  if (!valid()) throw InvalidInput("dense layer weights/biases are inconsistent or non-finite");
}

bool DenseLayer::valid() const {
  return in_dim > 0 && out_dim > 0 && weights.rows() == static_cast<Eigen::Index>(out_dim) &&
         weights.cols() == static_cast<Eigen::Index>(in_dim) &&
         biases.size() == static_cast<Eigen::Index>(out_dim) && weights.allFinite() && biases.allFinite();
}

Eigen::VectorXd dense_forward(const DenseLayer& layer, const Eigen::VectorXd& input) {
  if (input.size() != static_cast<Eigen::Index>(layer.in_dim)) {
    throw InvalidInput(fmt::format("dense layer expects {} inputs, got {}", layer.in_dim, input.size()));
  }
  Eigen::MatrixXd z = layer.weights * input + layer.biases;
  apply_activation(z, layer.activation);
  return z;
}

DropoutOutput dropout_forward(const Eigen::VectorXd& input, double rate, bool training, Rng& rng) {
  check_rate(rate);
  if (!training || rate == 0.0) {
    return {input, Eigen::VectorXd::Ones(input.size())};
  }
  Eigen::VectorXd mask = dropout_mask(input.size(), 1, rate, rng);
  Eigen::VectorXd out = input.cwiseProduct(mask);
  return {std::move(out), std::move(mask)};
}

double mse_loss(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size() || pred.empty()) {
    throw InvalidInput(fmt::format("mse_loss needs equal non-empty lengths, got {} and {}", pred.size(),
                                   actual.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - actual[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& actual) {
  if (pred.rows() != actual.rows() || pred.cols() != actual.cols() || pred.size() == 0) {
    throw InvalidInput("mse_loss: shape mismatch");
  }
  return (pred - actual).squaredNorm() / static_cast<double>(pred.size());
}

double binary_accuracy(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw InvalidInput(fmt::format("binary_accuracy needs equal non-empty lengths, got {} and {}",
                                   pred.size(), truth.size()));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double bit = pred[i] >= 0.5 ? 1.0 : 0.0;
    hits += bit == truth[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double binary_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw InvalidInput("binary_accuracy: shape mismatch");
  }
  return binary_accuracy(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                         std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
}

const Eigen::MatrixXd& ForwardCache::prediction() const {
  if (outputs.empty()) throw InvalidInput("forward cache is empty");
  return outputs.back();
}

bool Gradients::all_finite() const {
  return std::all_of(weights.begin(), weights.end(), [](const auto& w) { return w.allFinite(); }) &&
         std::all_of(biases.begin(), biases.end(), [](const auto& b) { return b.allFinite(); });
}

MlpModel::MlpModel(std::vector<DenseLayer> layers, std::vector<std::size_t> dropout_after, double dropout_rate)
    : layers_(std::move(layers)), dropout_after_(std::move(dropout_after)), dropout_rate_(dropout_rate) {
  if (layers_.empty()) throw InvalidInput("model needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (!layers_[k].valid()) throw InvalidInput(fmt::format("layer {} is malformed", k));
    if (k + 1 < layers_.size() && layers_[k].out_dim != layers_[k + 1].in_dim) {
      throw InvalidInput(fmt::format("layer {} outputs {} but layer {} expects {}", k, layers_[k].out_dim, k + 1,
                                     layers_[k + 1].in_dim));
    }
  }
  std::sort(dropout_after_.begin(), dropout_after_.end());
  dropout_after_.erase(std::unique(dropout_after_.begin(), dropout_after_.end()), dropout_after_.end());
  for (auto k : dropout_after_) {
    if (k >= layers_.size()) throw InvalidInput(fmt::format("dropout after nonexistent layer {}", k));
  }
  check_rate(dropout_rate_);
}

MlpModel MlpModel::initialized(std::span<const std::size_t> dims, std::span<const Activation> activations,
                               std::vector<std::size_t> dropout_after, double dropout_rate, std::uint64_t seed) {
  if (dims.size() < 2 || activations.size() + 1 != dims.size()) {
    throw InvalidInput("need one activation per layer and layer count + 1 dimensions");
  }
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  layers.reserve(activations.size());
  for (std::size_t k = 0; k < activations.size(); ++k) {
    DenseLayer layer(dims[k], dims[k + 1], activations[k]);
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[k] + dims[k + 1]));
    // Row-major fill keeps the draw order independent of storage layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = rng.uniform(-limit, limit);
      }
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers), std::move(dropout_after), dropout_rate);
}

void MlpModel::set_dropout_rate(double rate) {
  check_rate(rate);
  dropout_rate_ = rate;
}

bool MlpModel::has_dropout_after(std::size_t layer) const {
  return std::binary_search(dropout_after_.begin(), dropout_after_.end(), layer);
}

std::size_t MlpModel::input_dim() const {
  if (layers_.empty()) throw InvalidInput("model has no layers");
  return layers_.front().in_dim;
}

std::size_t MlpModel::output_dim() const {
  if (layers_.empty()) throw InvalidInput("model has no layers");
  return layers_.back().out_dim;
}

std::size_t MlpModel::parameter_count() const {
  return std::accumulate(layers_.begin(), layers_.end(), std::size_t{0},
                         [](std::size_t acc, const DenseLayer& l) { return acc + l.parameter_count(); });
}

void MlpModel::check_input(Eigen::Index rows) const {
  if (rows != static_cast<Eigen::Index>(input_dim())) {
    throw InvalidInput(fmt::format("model expects {} inputs, got {}", input_dim(), rows));
  }
}

Eigen::VectorXd MlpModel::predict(const Eigen::VectorXd& input) const {
  check_input(input.size());
  Eigen::VectorXd x = input;
  for (const auto& layer : layers_) x = dense_forward(layer, x);
  return x;
}

Eigen::MatrixXd MlpModel::predict_batch(const Eigen::MatrixXd& inputs) const {
  check_input(inputs.rows());
  Eigen::MatrixXd x = inputs;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd z(layer.weights.rows(), x.cols());
    z.noalias() = layer.weights * x;
    z.colwise() += layer.biases;
    apply_activation(z, layer.activation);
    x = std::move(z);
  }
  return x;
}

ForwardCache MlpModel::forward(const Eigen::MatrixXd& inputs, Rng* dropout_rng) const {
  check_input(inputs.rows());
  ForwardCache cache;
  const auto n = layers_.size();
  cache.inputs.reserve(n);
  cache.outputs.reserve(n);
  cache.masks.resize(n);
  Eigen::MatrixXd x = inputs;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& layer = layers_[k];
    Eigen::MatrixXd z(layer.weights.rows(), x.cols());
    z.noalias() = layer.weights * x;
    z.colwise() += layer.biases;
    apply_activation(z, layer.activation);
    cache.inputs.push_back(std::move(x));
    x = z;
    if (dropout_rng != nullptr && dropout_rate_ > 0.0 && has_dropout_after(k)) {
      cache.masks[k] = dropout_mask(z.rows(), z.cols(), dropout_rate_, *dropout_rng);
      x.array() *= cache.masks[k].array();
    }
    cache.outputs.push_back(std::move(z));
  }
  return cache;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layers_.size() != b.layers_.size() || a.dropout_after_ != b.dropout_after_ ||
      a.dropout_rate_ != b.dropout_rate_) {
    return false;
  }
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    const auto& x = a.layers_[k];
    const auto& y = b.layers_[k];
    if (x.activation != y.activation || x.in_dim != y.in_dim || x.out_dim != y.out_dim ||
        x.weights != y.weights || x.biases != y.biases) {
      return false;
    }
  }
  return true;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& targets) {
  const auto& layers = model.layers();
  if (cache.empty() || cache.outputs.size() != layers.size() || cache.inputs.size() != layers.size()) {
    throw InvalidInput("backward requires the cache of a forward pass through this model");
  }
  const auto& pred = cache.outputs.back();
  if (targets.rows() != pred.rows() || targets.cols() != pred.cols()) {
    throw InvalidInput(fmt::format("targets are {}x{}, prediction is {}x{}", targets.rows(), targets.cols(),
                                   pred.rows(), pred.cols()));
  }

  Gradients g;
  g.weights.resize(layers.size());
  g.biases.resize(layers.size());

  // d(mean over samples of per-sample MSE) / d prediction
  Eigen::MatrixXd delta = (pred - targets) * (2.0 / static_cast<double>(pred.size()));
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    scale_by_derivative(delta, cache.outputs[k], layer.activation);
    g.weights[k].noalias() = delta * cache.inputs[k].transpose();
    g.biases[k] = delta.rowwise().sum();
    if (k == 0) break;
    Eigen::MatrixXd upstream(layer.weights.cols(), delta.cols());
    upstream.noalias() = layer.weights.transpose() * delta;
    if (cache.masks[k - 1].size() != 0) upstream.array() *= cache.masks[k - 1].array();
    delta = std::move(upstream);
  }
  return g;
}

AdamState AdamState::for_model(const MlpModel& model, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const auto& layer : model.layers()) {
    s.first_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    s.second_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    s.first_biases.push_back(Eigen::VectorXd::Zero(layer.biases.size()));
    s.second_biases.push_back(Eigen::VectorXd::Zero(layer.biases.size()));
  }
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
                 std::span<double> second_moment, std::uint64_t step, const AdamHyper& hyper,
                 double learning_rate) {
  const auto n = params.size();
  if (grads.size() != n || first_moment.size() != n || second_moment.size() != n) {
    throw InvalidInput("adam_update: parameter, gradient and moment sizes differ");
  }
  if (step == 0) throw InvalidInput("adam_update: step index is 1-based");
  const auto len = static_cast<Eigen::Index>(n);
  Eigen::Map<Eigen::ArrayXd> p(params.data(), len);
  Eigen::Map<const Eigen::ArrayXd> g(grads.data(), len);
  Eigen::Map<Eigen::ArrayXd> m(first_moment.data(), len);
  Eigen::Map<Eigen::ArrayXd> v(second_moment.data(), len);
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
  v = hyper.beta2 * v + (1.0 - hyper.beta2) * g.square();
  p -= learning_rate * (m / correction1) / ((v / correction2).sqrt() + hyper.epsilon);
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double learning_rate) {
  auto& layers = model.layers();
  if (grads.weights.size() != layers.size() || grads.biases.size() != layers.size() ||
      state.first_weights.size() != layers.size()) {
    throw InvalidInput("adam_step: gradient/state layout does not match the model");
  }
  if (!grads.all_finite()) throw NumericalError("non-finite gradient");
  const auto step = state.step_count + 1;
  auto span_of = [](auto& m) { return std::span(m.data(), static_cast<std::size_t>(m.size())); };
  auto cspan_of = [](const auto& m) { return std::span(m.data(), static_cast<std::size_t>(m.size())); };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    adam_update(span_of(layers[k].weights), cspan_of(grads.weights[k]), span_of(state.first_weights[k]),
                span_of(state.second_weights[k]), step, state.hyper, learning_rate);
    adam_update(span_of(layers[k].biases), cspan_of(grads.biases[k]), span_of(state.first_biases[k]),
                span_of(state.second_biases[k]), step, state.hyper, learning_rate);
  }
  state.step_count = step;
}

void TrainConfig::validate(std::size_t train_size) const {
  if (train_size == 0) throw InvalidInput("training set is empty");
  if (batch_size == 0 || batch_size > train_size) {
    throw InvalidInput(fmt::format("batch size {} must lie in [1, {}]", batch_size, train_size));
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning rate must be positive");
  }
  check_rate(dropout_rate);
}

namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& src, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(src.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = src.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

EpochMetrics measure(const MlpModel& model, const LabeledData& data) {
  const Eigen::MatrixXd pred = model.predict_batch(data.inputs);
  return {mse_loss(pred, data.targets), binary_accuracy(pred, data.targets)};
}

}  // namespace

TrainResult train(MlpModel model, const LabeledData& data, const TrainConfig& config,
                  const LabeledData* validation, const EpochCallback& on_epoch) {
  config.validate(data.size());
  if (data.inputs.rows() != static_cast<Eigen::Index>(model.input_dim()) ||
      data.targets.rows() != static_cast<Eigen::Index>(model.output_dim()) ||
      data.targets.cols() != data.inputs.cols()) {
    throw InvalidInput("training data does not match the model's input/output widths");
  }
  if (validation != nullptr && (validation->inputs.rows() != data.inputs.rows() ||
                                validation->targets.rows() != data.targets.rows() || validation->size() == 0)) {
    throw InvalidInput("validation data does not match the training data layout");
  }

  model.set_dropout_rate(config.dropout_rate);
  Rng shuffle_rng = Rng::substream(config.rng_seed, 1);
  Rng dropout_rng = Rng::substream(config.rng_seed, 2);
  AdamState adam = AdamState::for_model(model);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.history.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    double hit_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto count = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const Eigen::MatrixXd x = gather_columns(data.inputs, idx);
      const Eigen::MatrixXd y = gather_columns(data.targets, idx);
      const ForwardCache cache = model.forward(x, &dropout_rng);
      const double loss = mse_loss(cache.prediction(), y);
      if (!std::isfinite(loss)) throw TrainingAborted(epoch, "loss is not finite");
      loss_sum += loss * static_cast<double>(count);
      hit_sum += binary_accuracy(cache.prediction(), y) * static_cast<double>(count);
      try {
        adam_step(model, backward(model, cache, y), adam, config.learning_rate);
      } catch (const NumericalError& e) {
        throw TrainingAborted(epoch, e.what());
      }
    }
    EpochRecord record;
    record.train.loss = loss_sum / static_cast<double>(order.size());
    record.train.accuracy = hit_sum / static_cast<double>(order.size());
    if (validation != nullptr) record.validation = measure(model, *validation);
    if (on_epoch) on_epoch(epoch, record);
    result.history.push_back(record);
  }
  result.model = std::move(model);
  return result;
}

// ---------------------------------------------------------------------------
// MSINN/1 weights file

namespace {

std::string real(double v) { return fmt::format("{:.17g}", v); }

std::string next_line(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRecordError(line_no + 1, "unexpected end of model file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<double> parse_reals(const std::string& line, std::size_t expected, std::size_t line_no) {
  std::vector<double> values;
  values.reserve(expected);
  const char* p = line.c_str();
  char* end = nullptr;
  while (true) {
    while (*p == ' ') ++p;
    if (*p == '\0') break;
    const double v = std::strtod(p, &end);
    if (end == p) throw MalformedRecordError(line_no, "expected a decimal number");
    values.push_back(v);
    p = end;
  }
  if (values.size() != expected) {
    throw MalformedRecordError(line_no, fmt::format("expected {} values, found {}", expected, values.size()));
  }
  return values;
}

template <typename... Ts>
void expect_fields(std::istringstream& ss, std::size_t line_no, Ts&... fields) {
  if (!((ss >> fields) && ...)) throw MalformedRecordError(line_no, "malformed header field");
}

void expect_keyword(const std::string& got, std::string_view want, std::size_t line_no) {
  if (got != want) throw MalformedRecordError(line_no, fmt::format("expected '{}', found '{}'", want, got));
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
  out << kModelFormat << '\n';
  out << "layers " << model.layers().size() << '\n';
  out << "dropout_rate " << real(model.dropout_rate()) << '\n';
  out << "dropout_after";
  for (auto k : model.dropout_after()) out << ' ' << k;
  out << '\n';
  for (std::size_t k = 0; k < model.layers().size(); ++k) {
    const auto& layer = model.layers()[k];
    out << "layer " << k << ' ' << layer.in_dim << ' ' << layer.out_dim << ' ' << to_string(layer.activation)
        << '\n';
    out << "weights\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        if (c != 0) out << ' ';
        out << real(layer.weights(r, c));
      }
      out << '\n';
    }
    out << "biases\n";
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) {
      if (r != 0) out << ' ';
      out << real(layer.biases(r));
    }
    out << '\n';
  }
  out << "end\n";
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(model, out);
  if (!out) throw DataError("failed writing model file " + path.string());
}

MlpModel load_model(std::istream& in) {
  std::size_t line_no = 0;
  const auto magic = next_line(in, line_no);
  if (magic != kModelFormat) {
    throw FormatVersionError(fmt::format("expected model format '{}', found '{}'", kModelFormat, magic));
  }
  std::string key;
  std::size_t layer_count = 0;
  {
    std::istringstream ss(next_line(in, line_no));
    expect_fields(ss, line_no, key, layer_count);
    expect_keyword(key, "layers", line_no);
  }
  double rate = 0.0;
  {
    const auto line = next_line(in, line_no);
    std::istringstream ss(line);
    expect_fields(ss, line_no, key);
    expect_keyword(key, "dropout_rate", line_no);
    rate = parse_reals(line.substr(key.size()), 1, line_no)[0];
  }
  std::vector<std::size_t> dropout_after;
  {
    std::istringstream ss(next_line(in, line_no));
    expect_fields(ss, line_no, key);
    expect_keyword(key, "dropout_after", line_no);
    std::size_t k;
    while (ss >> k) dropout_after.push_back(k);
    if (!ss.eof()) throw MalformedRecordError(line_no, "bad dropout index");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k < layer_count; ++k) {
    std::size_t index = 0, in_dim = 0, out_dim = 0;
    std::string tag;
    {
      std::istringstream ss(next_line(in, line_no));
      expect_fields(ss, line_no, key, index, in_dim, out_dim, tag);
      expect_keyword(key, "layer", line_no);
      if (index != k || in_dim == 0 || out_dim == 0) throw MalformedRecordError(line_no, "bad layer header");
    }
    Activation act;
    try {
      act = activation_from_string(tag);
    } catch (const InvalidInput& e) {
      throw MalformedRecordError(line_no, e.what());
    }
    expect_keyword(next_line(in, line_no), "weights", line_no);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
    for (std::size_t r = 0; r < out_dim; ++r) {
      const auto row = parse_reals(next_line(in, line_no), in_dim, line_no);
      for (std::size_t c = 0; c < in_dim; ++c) {
        w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
    expect_keyword(next_line(in, line_no), "biases", line_no);
    const auto b = parse_reals(next_line(in, line_no), out_dim, line_no);
    Eigen::VectorXd bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(out_dim));
    try {
      layers.emplace_back(std::move(w), std::move(bias), act);
    } catch (const InvalidInput& e) {
      throw MalformedRecordError(line_no, e.what());
    }
  }
  expect_keyword(next_line(in, line_no), "end", line_no);
  try {
    return MlpModel(std::move(layers), std::move(dropout_after), rate);
  } catch (const InvalidInput& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  }
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace metainv
