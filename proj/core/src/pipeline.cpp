#include "seqgrasp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/hash.hpp"

namespace seqgrasp {

using nlohmann::json;

void ExperimentConfig::check() const {
  if (samples_per_pair < 1) {
    throw std::invalid_argument("experiment: samples_per_pair must be >= 1");
  }
  if (pairs.empty()) throw std::invalid_argument("experiment: no object pairs configured");
  if (mode != "SG" && mode != "LG") {
    throw std::invalid_argument("experiment: mode must be SG or LG, got '" + mode + "'");
  }
}

ExperimentConfig experiment_config_from_json_text(const std::string& text,
                                                  const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& jp : j.at("pairs")) {
    cfg.pairs.emplace_back(jp.at(0).get<std::string>(), jp.at(1).get<std::string>());
  }
  cfg.samples_per_pair = j.value("samples", 25);
  cfg.seed = j.value("seed", 0u);
  cfg.mode = j.value("mode", "SG");
  cfg.separation = j.value("separation", 0.20);
  if (j.contains("perturbation")) {
    cfg.perturbation.position = j["perturbation"].value("position", 0.01);
    cfg.perturbation.yaw = j["perturbation"].value("yaw", 0.1);
  }
  if (j.contains("validation")) {
    const json& jv = j["validation"];
    cfg.validation.friction = jv.value("friction", cfg.validation.friction);
    cfg.validation.density = jv.value("density", cfg.validation.density);
    cfg.validation.cone_facets = jv.value("cone_facets", cfg.validation.cone_facets);
    cfg.validation.activation_distance =
        jv.value("activation_distance", cfg.validation.activation_distance);
    cfg.validation.squeeze_preload = jv.value("squeeze_preload", cfg.validation.squeeze_preload);
  }
  cfg.check();
  return cfg;
}

SynthesisConfig synthesis_config_from_json_text(const std::string& text,
                                                const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  SynthesisConfig cfg;
  if (j.contains("style")) cfg.style = grasp_style_from_string(j["style"].get<std::string>());
  cfg.n_candidates = j.value("n_candidates", cfg.n_candidates);
  cfg.n_contacts = j.value("n_contacts", 0);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.step_size = j.value("step_size", cfg.step_size);
  cfg.temperature = j.value("temperature", cfg.temperature);
  cfg.energy_threshold = j.value("energy_threshold", cfg.energy_threshold);
  cfg.contact_resample_prob = j.value("contact_resample_prob", cfg.contact_resample_prob);
  cfg.seed = j.value("seed", 0u);
  cfg.threads = j.value("threads", 0);
  if (j.contains("weights")) {
    const json& jw = j["weights"];
    cfg.weights.w_dis = jw.value("w_dis", cfg.weights.w_dis);
    cfg.weights.w_p = jw.value("w_p", cfg.weights.w_p);
    cfg.weights.w_sp = jw.value("w_sp", cfg.weights.w_sp);
    cfg.weights.w_q = jw.value("w_q", cfg.weights.w_q);
  }
  cfg.check();
  return cfg;
}

HeatmapStats heatmap_stats(const std::vector<OutcomeRecord>& outcomes) {
  HeatmapStats stats;
  std::map<std::string, int> rows, cols;
  for (const auto& o : outcomes) {
    if (!rows.count(o.pinch_object)) {
      rows[o.pinch_object] = static_cast<int>(stats.pinch_objects.size());
      stats.pinch_objects.push_back(o.pinch_object);
    }
    if (!cols.count(o.side_object)) {
      cols[o.side_object] = static_cast<int>(stats.side_objects.size());
      stats.side_objects.push_back(o.side_object);
    }
  }
  const int nr = static_cast<int>(stats.pinch_objects.size());
  const int nc = static_cast<int>(stats.side_objects.size());
  stats.successes = Eigen::MatrixXi::Zero(nr, nc);
  stats.trials = Eigen::MatrixXi::Zero(nr, nc);
  for (const auto& o : outcomes) {
    const int r = rows[o.pinch_object];
    const int c = cols[o.side_object];
    stats.trials(r, c) += 1;
    if (o.outcome.success) stats.successes(r, c) += 1;
  }
  stats.rates = Eigen::MatrixXd::Constant(nr, nc, std::numeric_limits<double>::quiet_NaN());
  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      if (stats.trials(r, c) > 0) {
        stats.rates(r, c) = static_cast<double>(stats.successes(r, c)) / stats.trials(r, c);
      }
    }
  }
  return stats;
}

std::string HeatmapStats::to_csv() const {
  std::string out = "pinch\\side";
  for (const auto& c : side_objects) out += "," + c;
  out += "\n";
  char buf[32];
  for (int r = 0; r < rates.rows(); ++r) {
    out += pinch_objects[r];
    for (int c = 0; c < rates.cols(); ++c) {
      if (trials(r, c) == 0) {
        out += ",n/a";
      } else {
        std::snprintf(buf, sizeof(buf), ",%.4f", rates(r, c));
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

double HeatmapStats::average_rate() const {
  double sum = 0.0;
  int cells = 0;
  for (int r = 0; r < rates.rows(); ++r) {
    for (int c = 0; c < rates.cols(); ++c) {
      if (trials(r, c) > 0) {
        sum += rates(r, c);
        ++cells;
      }
    }
  }
  return cells > 0 ? sum / cells : 0.0;
}

namespace {

Pose perturbed_pose(const ObjectModel& object, const Vec3& base_xy,
                    const PerturbationConfig& pert, RandomStream& rng) {
  Pose pose = object.canonical_pose;
  const double yaw = rng.uniform(-pert.yaw, pert.yaw);
  pose.rotation = rotation_exp(Vec3(0, 0, yaw)) * pose.rotation;
  pose.translation.x() = base_xy.x() + rng.uniform(-pert.position, pert.position);
  pose.translation.y() = base_xy.y() + rng.uniform(-pert.position, pert.position);
  return pose;
}

}  // namespace

std::vector<OutcomeRecord> run_trials(
    const HandModel& model, const ObjectModel& object1, const ObjectModel& object2, int n,
    const std::function<const MultiGraspRecord&(int)>& pick_record, const std::string& mode,
    const ExperimentConfig& config, std::uint64_t pair_seed) {
  std::vector<OutcomeRecord> outcomes;
  outcomes.reserve(n);
  for (int trial = 0; trial < n; ++trial) {
    RandomStream rng = RandomStream::derive(pair_seed, static_cast<std::uint64_t>(trial));

    Scene scene;
    scene.object1_world = perturbed_pose(
        object1, Vec3(-0.5 * config.separation, 0.0, 0.0), config.perturbation, rng);
    scene.object2_world = perturbed_pose(
        object2, Vec3(0.5 * config.separation, 0.0, 0.0), config.perturbation, rng);

    OutcomeRecord rec;
    rec.pinch_object = object1.id;
    rec.side_object = object2.id;
    rec.trial = trial;
    rec.mode = mode;

    const MultiGraspRecord& grasp = pick_record(trial);
    try {
      const ExecutionPlan plan = make_plan(model, grasp, scene, config.planner);
      rec.outcome = simulate_execution(model, plan, grasp, object1, object2, scene,
                                       config.validation);
    } catch (const PlanError&) {
      rec.outcome.success = false;
      rec.outcome.failed_stage = TrialStage::kPlan;
      rec.outcome.reason = FailureReason::kApproachCollision;
    }
    outcomes.push_back(std::move(rec));
  }
  return outcomes;
}

Eigen::MatrixXd conditioning_cloud(const ObjectModel& object, int points, std::uint64_t seed) {
  const SurfaceSamples samples = sample_surface(object, points, seed);
  Eigen::MatrixXd cloud(3, points);
  for (int i = 0; i < points; ++i) {
    cloud.col(i) = object.canonical_pose.rotation * samples.points[i];
  }
  return cloud;
}

std::vector<TrainingExample> make_training_set(const std::vector<MultiGraspRecord>& records,
                                               const ObjectLibrary& library, int points_per_object,
                                               std::uint64_t seed) {
  // One cloud per distinct object id, shared across records.
  std::map<std::string, Eigen::MatrixXd> clouds;
  auto cloud_of = [&](const std::string& id) -> const Eigen::MatrixXd& {
    auto it = clouds.find(id);
    if (it == clouds.end()) {
      it = clouds.emplace(id, conditioning_cloud(library.find(id), points_per_object,
                                                 seed ^ fnv1a64(id)))
               .first;
    }
    return it->second;
  };
  std::vector<TrainingExample> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    TrainingExample ex;
    ex.record = rec;
    ex.cloud1 = cloud_of(rec.object1_id);
    ex.cloud2 = cloud_of(rec.object2_id);
    out.push_back(std::move(ex));
  }
  return out;
}

void attach_style_assignments(const HandModel& model, MultiGraspRecord& record) {
  record.assignment1.style = GraspStyle::kPinch;
  record.assignment1.ids.clear();
  for (int i = 0; i < static_cast<int>(model.candidates(GraspStyle::kPinch).size()); ++i) {
    record.assignment1.ids.push_back(i);
  }
  record.assignment2.style = GraspStyle::kSide;
  record.assignment2.ids.clear();
  for (int i = 0; i < static_cast<int>(model.candidates(GraspStyle::kSide).size()); ++i) {
    record.assignment2.ids.push_back(i);
  }
}

ExperimentResult run_experiment(const HandModel& model, const ObjectLibrary& library,
                                const ExperimentConfig& config, const Dataset* sg_dataset,
                                const DenoiserParams* lg_model, std::ostream* progress) {
  config.check();
  const bool lg = config.mode == "LG";
  if (lg && lg_model == nullptr) {
    throw std::invalid_argument("experiment: LG mode requires a trained model");
  }
  if (!lg && sg_dataset == nullptr) {
    throw std::invalid_argument("experiment: SG mode requires a merged-grasp dataset");
  }
  if (!lg && sg_dataset->multigrasps.empty()) {
    throw DataError("experiment: input dataset contains no multigrasp records");
  }

  ExperimentResult result;
  for (std::size_t pi = 0; pi < config.pairs.size(); ++pi) {
    const auto& [pinch_id, side_id] = config.pairs[pi];
    const ObjectModel& object1 = library.find(pinch_id);
    const ObjectModel& object2 = library.find(side_id);
    const std::uint64_t pair_seed =
        RandomStream::splitmix64(config.seed ^ fnv1a64(pinch_id) ^ (fnv1a64(side_id) << 1));

    std::vector<MultiGraspRecord> pool;
    if (lg) {
      const int points = lg_model->hyper.points_per_object;
      const Eigen::MatrixXd cloud1 = conditioning_cloud(object1, points, pair_seed ^ 0xc1);
      const Eigen::MatrixXd cloud2 = conditioning_cloud(object2, points, pair_seed ^ 0xc2);
      pool = sample(*lg_model, cloud1, cloud2, config.samples_per_pair, pair_seed);
      for (auto& rec : pool) {
        rec.object1_id = pinch_id;
        rec.object2_id = side_id;
        attach_style_assignments(model, rec);
      }
    } else {
      for (const auto& rec : sg_dataset->multigrasps) {
        if (rec.object1_id == pinch_id && rec.object2_id == side_id) pool.push_back(rec);
      }
    }
    if (pool.empty()) {
      if (progress) {
        (*progress) << "pair=" << pinch_id << "+" << side_id << " trials=0 note=no_records\n";
      }
      continue;
    }

    // SG picks dataset records per trial; LG uses its i-th fresh sample.
    RandomStream pick_rng = RandomStream::derive(pair_seed, 0x9c1c);
    std::vector<int> picks(config.samples_per_pair);
    for (int i = 0; i < config.samples_per_pair; ++i) {
      picks[i] = lg ? i % static_cast<int>(pool.size())
                    : static_cast<int>(pick_rng.uniform_index(pool.size()));
    }
    auto pick = [&](int trial) -> const MultiGraspRecord& { return pool[picks[trial]]; };

    auto outcomes = run_trials(model, object1, object2, config.samples_per_pair, pick,
                               config.mode, config, pair_seed);
    int successes = 0;
    for (const auto& o : outcomes) successes += o.outcome.success ? 1 : 0;
    if (progress) {
      (*progress) << "pair=" << pinch_id << "+" << side_id << " trials=" << outcomes.size()
                  << " successes=" << successes << "\n";
    }
    result.outcomes.insert(result.outcomes.end(), outcomes.begin(), outcomes.end());
  }
  result.stats = heatmap_stats(result.outcomes);
  return result;
}

}  // namespace seqgrasp
