#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "seqgrasp/dataset.hpp"
#include "seqgrasp/diffusion.hpp"

namespace seqgrasp {

struct PerturbationConfig {
  double position = 0.01;  // +- m, horizontal
  double yaw = 0.1;        // +- rad about the vertical axis
};

struct ExperimentConfig {
  std::vector<std::pair<std::string, std::string>> pairs;  // (pinch object, side object)
  int samples_per_pair = 25;
  PerturbationConfig perturbation;
  std::uint64_t seed = 0;
  std::string mode = "SG";  // "SG" or "LG"
  double separation = 0.20;  // m between the two objects
  ValidationConfig validation;
  PlannerConfig planner;

  void check() const;  // throws std::invalid_argument
};

ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::string& origin);
SynthesisConfig synthesis_config_from_json_text(const std::string& text,
                                                const std::string& origin);

struct HeatmapStats {
  std::vector<std::string> pinch_objects;  // rows
  std::vector<std::string> side_objects;   // columns
  Eigen::MatrixXd rates;                   // NaN where no trials ran
  Eigen::MatrixXi successes;
  Eigen::MatrixXi trials;

  std::string to_csv() const;
  double average_rate() const;  // over cells with trials
};

HeatmapStats heatmap_stats(const std::vector<OutcomeRecord>& outcomes);

/// Executes `n` trials of one object pair with per-trial pose perturbations.
/// `pick_record` maps the trial index to the configuration to execute; SG and
/// LG modes share this path and differ only in where records come from.
std::vector<OutcomeRecord> run_trials(
    const HandModel& model, const ObjectModel& object1, const ObjectModel& object2, int n,
    const std::function<const MultiGraspRecord&(int)>& pick_record, const std::string& mode,
    const ExperimentConfig& config, std::uint64_t pair_seed);

struct ExperimentResult {
  std::vector<OutcomeRecord> outcomes;
  HeatmapStats stats;
};

/// Full SG/LG experiment over the configured pairs. SG draws merged records
/// from `sg_dataset`; LG samples them from `lg_model` conditioned on the
/// pair's point clouds. Progress lines (key=value) go to `progress`.
ExperimentResult run_experiment(const HandModel& model, const ObjectLibrary& library,
                                const ExperimentConfig& config, const Dataset* sg_dataset,
                                const DenoiserParams* lg_model, std::ostream* progress = nullptr);

/// Conditioning cloud for one object: canonical orientation, centered at the
/// centroid, fixed size.
Eigen::MatrixXd conditioning_cloud(const ObjectModel& object, int points, std::uint64_t seed);

/// Training examples (record + two conditioning clouds) for the diffusion
/// model, built from merged records and the object library.
std::vector<TrainingExample> make_training_set(const std::vector<MultiGraspRecord>& records,
                                               const ObjectLibrary& library, int points_per_object,
                                               std::uint64_t seed);

/// Fills records sampled by the diffusion model with the fixed full-style
/// contact assignments so the execution planner knows which fingers act.
void attach_style_assignments(const HandModel& model, MultiGraspRecord& record);

}  // namespace seqgrasp
