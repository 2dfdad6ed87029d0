// Command-line front end: synth -> validate -> merge -> train -> sample ->
// run-experiment, over newline-delimited JSON datasets.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "seqgrasp/dataset.hpp"
#include "seqgrasp/diffusion.hpp"
#include "seqgrasp/errors.hpp"
#include "seqgrasp/pipeline.hpp"

namespace {

using namespace seqgrasp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CommonPaths {
  std::string hand = "data/allegro_lite.json";
  std::string objects = "data/objects_default.json";
};

void add_common(CLI::App* cmd, CommonPaths& paths) {
  cmd->add_option("--hand", paths.hand, "Hand description JSON");
  cmd->add_option("--objects", paths.objects, "Object library JSON");
}

DatasetHeader make_header(const HandModel& model, const ObjectLibrary& library) {
  DatasetHeader h;
  h.hand_hash = model.content_hash();
  h.object_lib_hash = library.content_hash;
  return h;
}

int cmd_synth(const CommonPaths& paths, const std::string& object_id, const std::string& style,
              const std::string& config_path, const std::string& out_path) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  const ObjectModel& object = library.find(object_id);

  SynthesisConfig config;
  if (!config_path.empty()) {
    config = synthesis_config_from_json_text(read_file(config_path), config_path);
  }
  if (!style.empty()) config.style = grasp_style_from_string(style);

  SynthesisStats stats;
  const auto records = synthesize(model, object, config, &stats);

  DatasetWriter writer(out_path, make_header(model, library));
  for (const auto& rec : records) writer.write(rec);
  writer.close();

  std::cout << "candidates=" << stats.candidates << "\n"
            << "records=" << stats.emitted << "\n"
            << "yield=" << stats.yield << "\n"
            << "mala_acceptance=" << stats.mean_acceptance << "\n";
  return kExitOk;
}

int cmd_validate(const CommonPaths& paths, const std::string& in_path,
                 const std::string& out_path) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  Dataset ds = Dataset::load(in_path);
  ds.check_hashes(model, library);
  if (ds.grasps.empty()) throw DataError(in_path + ": no grasp records to validate");

  const ValidationConfig vconfig;
  int valid = 0;
  DatasetWriter writer(out_path, make_header(model, library));
  for (auto& rec : ds.grasps) {
    const ObjectModel& object = library.find(rec.object_id);
    rec.validation = validate(model, rec.theta, rec.object_in_hand, object, vconfig);
    if (rec.validation->valid()) {
      writer.write(rec);
      ++valid;
    }
  }
  writer.close();
  std::cout << "checked=" << ds.grasps.size() << "\n"
            << "valid=" << valid << "\n"
            << "validation_rate=" << static_cast<double>(valid) / ds.grasps.size() << "\n";
  return kExitOk;
}

int cmd_merge(const CommonPaths& paths, const std::string& pinch_path,
              const std::string& side_path, const std::string& out_path, int max_pairs,
              std::uint64_t seed) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  Dataset pinch_ds = Dataset::load(pinch_path);
  Dataset side_ds = Dataset::load(side_path);
  pinch_ds.check_hashes(model, library);
  side_ds.check_hashes(model, library);

  auto single_object = [](const std::vector<GraspRecord>& records, const std::string& path) {
    if (records.empty()) throw DataError(path + ": no grasp records");
    const std::string& id = records.front().object_id;
    for (const auto& r : records) {
      if (r.object_id != id) {
        throw DataError(path + ": expected a single object id per input dataset");
      }
    }
    return id;
  };
  const std::string pinch_object = single_object(pinch_ds.grasps, pinch_path);
  const std::string side_object = single_object(side_ds.grasps, side_path);

  MergeStats stats;
  const auto merged =
      merge_datasets(model, library.find(pinch_object), library.find(side_object),
                     pinch_ds.grasps, side_ds.grasps, max_pairs, seed, &stats);

  DatasetWriter writer(out_path, make_header(model, library));
  for (const auto& rec : merged) writer.write(rec);
  writer.close();
  std::cout << "pairs_considered=" << stats.pairs_considered << "\n"
            << "incompatible=" << stats.incompatible << "\n"
            << "object_collisions=" << stats.object_collisions << "\n"
            << "self_penetrations=" << stats.self_penetrations << "\n"
            << "merged=" << stats.merged << "\n";
  return kExitOk;
}

int cmd_train(const CommonPaths& paths, const std::string& data_path,
              const std::string& model_path, int steps, int batch, double lr, int t_steps,
              std::uint64_t seed) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  Dataset ds = Dataset::load(data_path);
  ds.check_hashes(model, library);
  if (ds.multigrasps.empty()) throw DataError(data_path + ": no multigrasp records to train on");

  DiffusionHyperparams hyper;
  hyper.train_steps = steps;
  hyper.batch_size = batch;
  hyper.learning_rate = lr;
  const auto dataset = make_training_set(ds.multigrasps, library, hyper.points_per_object, seed);

  std::vector<double> trace;
  const auto params = train(dataset, NoiseSchedule::linear(t_steps), hyper, seed, &trace,
                            ds.content_hash);
  save_checkpoint(model_path, params);

  std::cout << "examples=" << dataset.size() << "\n"
            << "steps=" << trace.size() << "\n"
            << "final_loss=" << (trace.empty() ? 0.0 : trace.back()) << "\n";
  return kExitOk;
}

int cmd_sample(const CommonPaths& paths, const std::string& model_path,
               const std::vector<std::string>& cloud_paths, const std::string& object1,
               const std::string& object2, int n, std::uint64_t seed,
               const std::string& out_path) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  const DenoiserParams params = load_checkpoint(model_path);

  Eigen::MatrixXd cloud1, cloud2;
  if (cloud_paths.size() == 2) {
    cloud1 = read_xyz(cloud_paths[0]).points;
    cloud2 = read_xyz(cloud_paths[1]).points;
  } else if (!object1.empty() && !object2.empty()) {
    cloud1 = conditioning_cloud(library.find(object1), params.hyper.points_per_object, seed ^ 0xc1);
    cloud2 = conditioning_cloud(library.find(object2), params.hyper.points_per_object, seed ^ 0xc2);
  } else {
    throw CLI::ValidationError("sample", "provide either --clouds F1 F2 or --object1/--object2");
  }

  auto records = sample(params, cloud1, cloud2, n, seed);
  DatasetWriter writer(out_path, make_header(model, library));
  for (auto& rec : records) {
    rec.object1_id = object1;
    rec.object2_id = object2;
    attach_style_assignments(model, rec);
    writer.write(rec);
  }
  writer.close();
  std::cout << "samples=" << records.size() << "\n";
  return kExitOk;
}

int cmd_run_experiment(const CommonPaths& paths, const std::string& config_path,
                       const std::string& dataset_path, const std::string& model_path,
                       const std::string& out_csv, const std::string& outcomes_path) {
  const HandModel model = HandModel::load(paths.hand);
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  const ExperimentConfig config =
      experiment_config_from_json_text(read_file(config_path), config_path);

  if (config.mode == "LG" && model_path.empty()) {
    throw CLI::ValidationError("run-experiment", "LG mode requires --model");
  }
  if (config.mode == "SG" && dataset_path.empty()) {
    throw CLI::ValidationError("run-experiment", "SG mode requires --dataset");
  }

  Dataset ds;
  DenoiserParams params;
  if (config.mode == "SG") {
    ds = Dataset::load(dataset_path);
    ds.check_hashes(model, library);
  } else {
    params = load_checkpoint(model_path);
  }

  const auto result = run_experiment(model, library, config,
                                     config.mode == "SG" ? &ds : nullptr,
                                     config.mode == "LG" ? &params : nullptr, &std::cout);

  {
    const std::string tmp = out_csv + ".tmp";
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot open output file: " + out_csv);
    out << result.stats.to_csv();
    out.close();
    if (std::rename(tmp.c_str(), out_csv.c_str()) != 0) {
      throw DataError("cannot finalize output file: " + out_csv);
    }
  }
  if (!outcomes_path.empty()) {
    DatasetWriter writer(outcomes_path, make_header(model, library));
    for (const auto& o : result.outcomes) writer.write(o);
    writer.close();
  }
  std::cout << "mode=" << config.mode << "\n"
            << "average_success_rate=" << result.stats.average_rate() << "\n";
  return kExitOk;
}

int cmd_cloud(const CommonPaths& paths, const std::string& object_id, int n, std::uint64_t seed,
              const std::string& out_path) {
  const ObjectLibrary library = ObjectLibrary::load(paths.objects);
  const ObjectModel& object = library.find(object_id);
  write_xyz(out_path, sample_surface(object, n, seed), "object");
  std::cout << "points=" << n << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential two-object grasp synthesis, validation and execution pipeline"};
  app.require_subcommand(1);

  CommonPaths paths;

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize single-object grasps");
  std::string synth_object, synth_style, synth_config, synth_out;
  add_common(synth, paths);
  synth->add_option("--object", synth_object, "Object id")->required();
  synth->add_option("--style", synth_style, "Grasp style: pinch or side");
  synth->add_option("--config", synth_config, "Synthesis config JSON");
  synth->add_option("--out", synth_out, "Output dataset")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Validate grasps and keep the survivors");
  std::string val_in, val_out;
  add_common(val, paths);
  val->add_option("--in", val_in, "Input grasp dataset")->required();
  val->add_option("--out", val_out, "Output dataset of valid grasps")->required();

  // merge
  auto* merge = app.add_subcommand("merge", "Merge pinch and side grasps into two-object records");
  std::string merge_pinch, merge_side, merge_out;
  int merge_max = 1000;
  std::uint64_t merge_seed = 0;
  add_common(merge, paths);
  merge->add_option("--pinch", merge_pinch, "Validated pinch dataset")->required();
  merge->add_option("--side", merge_side, "Validated side dataset")->required();
  merge->add_option("--out", merge_out, "Output multigrasp dataset")->required();
  merge->add_option("--max", merge_max, "Maximum merged records");
  merge->add_option("--seed", merge_seed, "RNG seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the diffusion model on merged grasps");
  std::string train_data, train_model;
  int train_steps = 2000, train_batch = 32, train_tsteps = 100;
  double train_lr = 1e-3;
  std::uint64_t train_seed = 0;
  add_common(train_cmd, paths);
  train_cmd->add_option("--data", train_data, "Multigrasp dataset")->required();
  train_cmd->add_option("--model", train_model, "Output checkpoint path")->required();
  train_cmd->add_option("--steps", train_steps, "Training steps");
  train_cmd->add_option("--batch", train_batch, "Batch size");
  train_cmd->add_option("--lr", train_lr, "Learning rate");
  train_cmd->add_option("--t-steps", train_tsteps, "Diffusion steps T");
  train_cmd->add_option("--seed", train_seed, "RNG seed");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Sample grasp configurations from a checkpoint");
  std::string sample_model, sample_obj1, sample_obj2, sample_out;
  std::vector<std::string> sample_clouds;
  int sample_n = 25;
  std::uint64_t sample_seed = 0;
  add_common(sample_cmd, paths);
  sample_cmd->add_option("--model", sample_model, "Checkpoint path")->required();
  sample_cmd->add_option("--clouds", sample_clouds, "Two XYZ point cloud files")->expected(2);
  sample_cmd->add_option("--object1", sample_obj1, "Pinch object id (cloud from library)");
  sample_cmd->add_option("--object2", sample_obj2, "Side object id (cloud from library)");
  sample_cmd->add_option("--n", sample_n, "Number of samples");
  sample_cmd->add_option("--seed", sample_seed, "RNG seed");
  sample_cmd->add_option("--out", sample_out, "Output dataset")->required();

  // run-experiment
  auto* run = app.add_subcommand("run-experiment", "Run SG or LG trials over object pairs");
  std::string run_config, run_dataset, run_model, run_csv, run_outcomes;
  add_common(run, paths);
  run->add_option("--config", run_config, "Experiment config JSON")->required();
  run->add_option("--dataset", run_dataset, "Multigrasp dataset (SG mode)");
  run->add_option("--model", run_model, "Diffusion checkpoint (LG mode)");
  run->add_option("--out", run_csv, "Output heatmap CSV")->required();
  run->add_option("--outcomes", run_outcomes, "Optional per-trial outcome dataset");

  // cloud
  auto* cloud = app.add_subcommand("cloud", "Export an object surface point cloud (XYZ)");
  std::string cloud_object, cloud_out;
  int cloud_n = 512;
  std::uint64_t cloud_seed = 0;
  add_common(cloud, paths);
  cloud->add_option("--object", cloud_object, "Object id")->required();
  cloud->add_option("--n", cloud_n, "Point count");
  cloud->add_option("--seed", cloud_seed, "RNG seed");
  cloud->add_option("--out", cloud_out, "Output XYZ file")->required();

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(paths, synth_object, synth_style, synth_config, synth_out);
    if (val->parsed()) return cmd_validate(paths, val_in, val_out);
    if (merge->parsed()) {
      return cmd_merge(paths, merge_pinch, merge_side, merge_out, merge_max, merge_seed);
    }
    if (train_cmd->parsed()) {
      return cmd_train(paths, train_data, train_model, train_steps, train_batch, train_lr,
                       train_tsteps, train_seed);
    }
    if (sample_cmd->parsed()) {
      return cmd_sample(paths, sample_model, sample_clouds, sample_obj1, sample_obj2, sample_n,
                        sample_seed, sample_out);
    }
    if (run->parsed()) {
      return cmd_run_experiment(paths, run_config, run_dataset, run_model, run_csv, run_outcomes);
    }
    if (cloud->parsed()) return cmd_cloud(paths, cloud_object, cloud_n, cloud_seed, cloud_out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const seqgrasp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
