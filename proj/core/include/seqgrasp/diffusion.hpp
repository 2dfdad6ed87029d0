#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqgrasp/merge.hpp"

namespace seqgrasp {

/// DDPM beta schedule and derived quantities; index t-1 stores step t.
struct NoiseSchedule {
  int t_steps = 100;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;      // 1 - beta
  Eigen::VectorXd alpha_bar;  // running product of alpha

  static NoiseSchedule linear(int t_steps = 100, double beta_start = 1e-4, double beta_end = 0.02);
  void check() const;  // throws InvariantViolation
};

/// Flat configuration coding: x = [theta (d); t1 (3); R1 (9, row-major);
/// t2 (3); R2 (9)], D = d + 24, with per-dimension normalization fitted on
/// the training set. Rotation entries keep mean 0 / std 1.
struct ConfigCodec {
  int dof = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  int dim() const { return dof + 24; }
  static ConfigCodec fit(int dof, const std::vector<MultiGraspRecord>& records);

  Eigen::VectorXd flatten(const MultiGraspRecord& rec) const;  // raw layout
  Eigen::VectorXd encode(const MultiGraspRecord& rec) const;   // normalized
  /// Denormalizes and projects both rotation blocks onto SO(3).
  MultiGraspRecord decode(const Eigen::VectorXd& x) const;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

/// Dense ReLU MLP with a linear head; inputs/outputs are column-major
/// batches. Backprop is hand-written layer-local chain rule.
struct Mlp {
  std::vector<Eigen::MatrixXd> w;  // (out x in) per layer
  std::vector<Eigen::VectorXd> b;

  Mlp() = default;
  Mlp(const std::vector<int>& dims, class RandomStream& rng);

  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// acts[0] = input, acts[i+1] = output of layer i (post-ReLU on hidden).
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x,
                                 std::vector<Eigen::MatrixXd>& acts) const;
  Eigen::MatrixXd backward(const std::vector<Eigen::MatrixXd>& acts, const Eigen::MatrixXd& dout,
                           MlpGrads& grads) const;
  MlpGrads zero_grads() const;
};

struct DiffusionHyperparams {
  int train_steps = 2000;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::vector<int> encoder_hidden = {64, 128};   // per-point map 3 -> 64 -> 128
  std::vector<int> denoiser_hidden = {512, 512, 512};
  int time_embedding_dim = 64;
  int points_per_object = 512;
  double cloud_scale = 10.0;  // fixed input scaling, meters -> decimeters
};

/// Trained model state: encoder + denoiser weights, normalization, schedule.
struct DenoiserParams {
  Mlp encoder;
  Mlp denoiser;
  ConfigCodec codec;
  NoiseSchedule schedule;
  DiffusionHyperparams hyper;
  std::uint64_t dataset_fingerprint = 0;

  int code_dim() const { return encoder.output_dim(); }
  int condition_dim() const { return 2 * code_dim(); }
};

struct TrainingExample {
  MultiGraspRecord record;
  Eigen::MatrixXd cloud1;  // 3 x n, conditioning frame
  Eigen::MatrixXd cloud2;
};

/// Closed-form forward marginal x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) xi.
Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, int t, const Eigen::VectorXd& xi,
                              const NoiseSchedule& schedule);

Eigen::VectorXd time_embedding(int t, int dim);

/// Permutation-invariant point encoder: per-point MLP then coordinate-wise
/// max pool. `points` is 3 x n (already scaled by the caller).
Eigen::VectorXd encode_pointcloud(const Eigen::MatrixXd& points, const Mlp& encoder);

/// Deterministic pre-noised batch, used by training and the gradient tests.
struct NoisedBatch {
  std::vector<int> example_index;
  std::vector<int> t;
  Eigen::MatrixXd xi;  // D x B
};

struct DiffusionGrads {
  MlpGrads encoder;
  MlpGrads denoiser;
};

/// Mean squared denoising error over the batch and, optionally, its full
/// parameter gradient.
double diffusion_loss(const DenoiserParams& params, const std::vector<TrainingExample>& data,
                      const NoisedBatch& batch, DiffusionGrads* grads);

/// Trains encoder + denoiser jointly with Adam; deterministic for a fixed
/// seed. Throws DataError on an empty dataset or non-finite loss.
DenoiserParams train(const std::vector<TrainingExample>& dataset, const NoiseSchedule& schedule,
                     const DiffusionHyperparams& hyper, std::uint64_t seed,
                     std::vector<double>* loss_trace = nullptr,
                     std::uint64_t dataset_fingerprint = 0);

/// Ancestral DDPM sampling with fixed variance beta_t I; decoded rotations
/// are SVD-projected. Object ids/assignments of the returned records are
/// left empty for the caller to fill.
std::vector<MultiGraspRecord> sample(const DenoiserParams& params, const Eigen::MatrixXd& cloud1,
                                     const Eigen::MatrixXd& cloud2, int n, std::uint64_t seed);

void save_checkpoint(const std::string& path, const DenoiserParams& params);
DenoiserParams load_checkpoint(const std::string& path);

}  // namespace seqgrasp
