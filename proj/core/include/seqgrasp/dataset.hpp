#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqgrasp/exec_planner.hpp"
#include "seqgrasp/merge.hpp"
#include "seqgrasp/synthesis.hpp"

namespace seqgrasp {

struct DatasetHeader {
  int version = 1;
  std::uint64_t hand_hash = 0;
  std::uint64_t object_lib_hash = 0;
};

struct OutcomeRecord {
  std::string pinch_object;
  std::string side_object;
  int trial = 0;
  std::string mode;  // "SG" or "LG"
  TrialOutcome outcome;
};

nlohmann::json to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GraspRecord& rec);
GraspRecord grasp_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MultiGraspRecord& rec);
MultiGraspRecord multigrasp_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OutcomeRecord& rec);
OutcomeRecord outcome_record_from_json(const nlohmann::json& j);

/// Newline-delimited JSON dataset; first line is the header record. Files
/// are written to a temporary name and renamed on close, so a failed run
/// leaves no partial output.
class DatasetWriter {
 public:
  DatasetWriter(const std::string& path, const DatasetHeader& header);
  ~DatasetWriter();

  void write(const GraspRecord& rec) { write_line(to_json(rec)); }
  void write(const MultiGraspRecord& rec) { write_line(to_json(rec)); }
  void write(const OutcomeRecord& rec) { write_line(to_json(rec)); }
  void close();  // atomic rename; throws DataError on I/O failure

 private:
  void write_line(const nlohmann::json& j);
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool closed_ = false;
};

struct Dataset {
  DatasetHeader header;
  std::vector<GraspRecord> grasps;
  std::vector<MultiGraspRecord> multigrasps;
  std::vector<OutcomeRecord> outcomes;
  std::uint64_t content_hash = 0;

  static Dataset load(const std::string& path);
  /// Throws DataError when the header hashes do not match the loaded models.
  void check_hashes(const HandModel& model, const ObjectLibrary& library) const;
};

/// ASCII XYZ point cloud with a frame declaration header line.
void write_xyz(const std::string& path, const SurfaceSamples& samples, const std::string& frame);
struct XyzCloud {
  Eigen::MatrixXd points;  // 3 x n
  std::string frame;
};
XyzCloud read_xyz(const std::string& path);

}  // namespace seqgrasp
