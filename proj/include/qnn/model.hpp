#pragma once

// VGG-style quaternion classifiers: stacks of 3x3 quaternion convolutions
// with a quaternion activation after each, 2x2 quaternion average pooling,
// and a real linear head over the flattened component planes.

#include <cstdint>
#include <string>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/autodiff.hpp"

namespace qnn {

struct LayerSpec {
  enum class Type { Conv, Pool };
  Type type = Type::Conv;
  std::size_t channels = 0;
  std::size_t window = 2;

  static LayerSpec conv(std::size_t channels) { return {Type::Conv, channels, 0}; }
  static LayerSpec pool(std::size_t window = 2) { return {Type::Pool, 0, window}; }
};

struct ModelConfig {
  std::string name;
  std::size_t input_channels = 1;
  std::size_t input_size = 32;
  std::size_t kernel = 3;
  std::size_t num_classes = 10;
  std::vector<LayerSpec> layers;

  /// qvgg-s, qvgg11 or qvgg16; throws std::invalid_argument otherwise.
  static ModelConfig named(const std::string& name);
  static ModelConfig qvgg_s();
  static ModelConfig qvgg11();
  static ModelConfig qvgg16();

  /// Throws ShapeError if the stack does not fit the input extent.
  void validate() const;
  std::size_t final_channels() const;
  std::size_t final_size() const;
  /// Real features entering the classifier head.
  std::size_t flatten_size() const;
  std::size_t parameter_count() const;
};

template <std::floating_point T>
struct Parameter {
  std::string name;
  Tensor<T> value;
};

template <std::floating_point T>
struct ForwardResult {
  Var<T> logits;
  std::vector<Var<T>> params;
};

template <std::floating_point T>
class Model {
 public:
  /// Quaternion weights are four independent uniforms with variance
  /// 1 / (4 fan_in), biases zero; the real head uses U(+-1/sqrt(fan_in)).
  Model(ModelConfig config, ActivationKind activation, AngleConvention angle, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ActivationKind activation() const { return activation_; }
  AngleConvention angle() const { return angle_; }

  std::vector<Parameter<T>>& parameters() { return params_; }
  const std::vector<Parameter<T>>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// input [N, 4 Cin, H, W] -> logits [N, classes]. Parameters enter the tape
  /// as leaves in parameters() order, differentiable iff `trainable`.
  ForwardResult<T> forward(Tape<T>& tape, Tensor<T> input, bool trainable = true) const;

 private:
  ModelConfig config_;
  ActivationKind activation_;
  AngleConvention angle_;
  std::vector<Parameter<T>> params_;
};

}  // namespace qnn
