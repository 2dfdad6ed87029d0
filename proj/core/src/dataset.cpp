#include "seqgrasp/dataset.hpp"

#include <cstdio>
#include <sstream>

#include "seqgrasp/errors.hpp"
#include "seqgrasp/hash.hpp"

namespace seqgrasp {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

json energy_to_json(const EnergyBreakdown& e) {
  return {{"fc", e.e_fc}, {"dis", e.e_dis}, {"p", e.e_p},
          {"sp", e.e_sp}, {"q", e.e_q},     {"total", e.total}};
}

EnergyBreakdown energy_from_json(const json& j) {
  EnergyBreakdown e;
  e.e_fc = j.at("fc").get<double>();
  e.e_dis = j.at("dis").get<double>();
  e.e_p = j.at("p").get<double>();
  e.e_sp = j.at("sp").get<double>();
  e.e_q = j.at("q").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

json assignment_to_json(const ContactAssignment& a) {
  return {{"style", to_string(a.style)}, {"ids", a.ids}};
}

ContactAssignment assignment_from_json(const json& j) {
  ContactAssignment a;
  a.style = grasp_style_from_string(j.at("style").get<std::string>());
  a.ids = j.at("ids").get<std::vector<int>>();
  return a;
}

json validation_to_json(const ValidationReport& r) {
  return {{"rotation_robust", r.rotation_robust},
          {"margins", std::vector<double>(r.margins.begin(), r.margins.end())},
          {"execution_feasible", r.execution_feasible},
          {"failure", to_string(r.failure)},
          {"direction", r.infeasible_direction}};
}

ValidationReport validation_from_json(const json& j) {
  ValidationReport r;
  r.rotation_robust = j.at("rotation_robust").get<bool>();
  const auto m = j.at("margins").get<std::vector<double>>();
  if (m.size() != 6) throw ParseError("validation record: expected 6 margins");
  std::copy(m.begin(), m.end(), r.margins.begin());
  r.execution_feasible = j.at("execution_feasible").get<bool>();
  r.failure = failure_reason_from_string(j.at("failure").get<std::string>());
  r.infeasible_direction = j.at("direction").get<int>();
  return r;
}

}  // namespace

json to_json(const Pose& pose) {
  std::vector<double> r(9);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r[3 * i + k] = pose.rotation(i, k);
  }
  return {{"R", r}, {"t", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

Pose pose_from_json(const json& j) {
  Pose p;
  const auto r = j.at("R").get<std::vector<double>>();
  if (r.size() != 9) throw ParseError("pose: expected 9 rotation entries");
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) p.rotation(i, k) = r[3 * i + k];
  }
  const auto t = j.at("t").get<std::vector<double>>();
  if (t.size() != 3) throw ParseError("pose: expected 3 translation entries");
  p.translation = Vec3(t[0], t[1], t[2]);
  return p;
}

json to_json(const GraspRecord& rec) {
  json j;
  j["kind"] = "grasp";
  j["style"] = to_string(rec.style);
  j["object"] = rec.object_id;
  j["theta"] = vec_to_json(rec.theta);
  j["T"] = to_json(rec.object_in_hand);
  j["assignment"] = assignment_to_json(rec.assignment);
  j["energy"] = energy_to_json(rec.energy);
  j["validation"] = rec.validation ? validation_to_json(*rec.validation) : json(nullptr);
  j["seed"] = rec.seed;
  j["candidate"] = rec.candidate_index;
  return j;
}

GraspRecord grasp_record_from_json(const json& j) {
  GraspRecord rec;
  rec.style = grasp_style_from_string(j.at("style").get<std::string>());
  rec.object_id = j.at("object").get<std::string>();
  rec.theta = vec_from_json(j.at("theta"));
  rec.object_in_hand = pose_from_json(j.at("T"));
  rec.assignment = assignment_from_json(j.at("assignment"));
  rec.energy = energy_from_json(j.at("energy"));
  if (!j.at("validation").is_null()) rec.validation = validation_from_json(j.at("validation"));
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.candidate_index = j.at("candidate").get<int>();
  return rec;
}

json to_json(const MultiGraspRecord& rec) {
  json j;
  j["kind"] = "multigrasp";
  j["theta"] = vec_to_json(rec.theta);
  j["T1"] = to_json(rec.object1_in_hand);
  j["T2"] = to_json(rec.object2_in_hand);
  j["object1"] = rec.object1_id;
  j["object2"] = rec.object2_id;
  j["sources"] = {rec.source_pinch, rec.source_side};
  j["assignment1"] = assignment_to_json(rec.assignment1);
  j["assignment2"] = assignment_to_json(rec.assignment2);
  j["energy1"] = energy_to_json(rec.energy1);
  j["energy2"] = energy_to_json(rec.energy2);
  j["clearance"] = rec.clearance;
  j["seed"] = rec.seed;
  return j;
}

MultiGraspRecord multigrasp_record_from_json(const json& j) {
  MultiGraspRecord rec;
  rec.theta = vec_from_json(j.at("theta"));
  rec.object1_in_hand = pose_from_json(j.at("T1"));
  rec.object2_in_hand = pose_from_json(j.at("T2"));
  rec.object1_id = j.at("object1").get<std::string>();
  rec.object2_id = j.at("object2").get<std::string>();
  rec.source_pinch = j.at("sources").at(0).get<int>();
  rec.source_side = j.at("sources").at(1).get<int>();
  rec.assignment1 = assignment_from_json(j.at("assignment1"));
  rec.assignment2 = assignment_from_json(j.at("assignment2"));
  rec.energy1 = energy_from_json(j.at("energy1"));
  rec.energy2 = energy_from_json(j.at("energy2"));
  rec.clearance = j.at("clearance").get<double>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  return rec;
}

json to_json(const OutcomeRecord& rec) {
  json j;
  j["kind"] = "outcome";
  j["pair"] = {rec.pinch_object, rec.side_object};
  j["trial"] = rec.trial;
  j["mode"] = rec.mode;
  j["success"] = rec.outcome.success;
  j["failed_stage"] = static_cast<int>(rec.outcome.failed_stage);
  j["reason"] = to_string(rec.outcome.reason);
  j["direction"] = rec.outcome.direction;
  return j;
}

OutcomeRecord outcome_record_from_json(const json& j) {
  OutcomeRecord rec;
  rec.pinch_object = j.at("pair").at(0).get<std::string>();
  rec.side_object = j.at("pair").at(1).get<std::string>();
  rec.trial = j.at("trial").get<int>();
  rec.mode = j.at("mode").get<std::string>();
  rec.outcome.success = j.at("success").get<bool>();
  rec.outcome.failed_stage = static_cast<TrialStage>(j.at("failed_stage").get<int>());
  rec.outcome.reason = failure_reason_from_string(j.at("reason").get<std::string>());
  rec.outcome.direction = j.at("direction").get<int>();
  return rec;
}

DatasetWriter::DatasetWriter(const std::string& path, const DatasetHeader& header)
    : path_(path), tmp_path_(path + ".tmp") {
  out_.open(tmp_path_, std::ios::trunc);
  if (!out_) throw DataError("cannot open output file: " + path);
  json j;
  j["kind"] = "header";
  j["version"] = header.version;
  j["hand_hash"] = hex64(header.hand_hash);
  j["object_lib_hash"] = hex64(header.object_lib_hash);
  write_line(j);
}

DatasetWriter::~DatasetWriter() {
  if (!closed_) {
    out_.close();
    std::remove(tmp_path_.c_str());
  }
}

void DatasetWriter::write_line(const json& j) {
  out_ << j.dump() << "\n";
  if (!out_) throw DataError("write failed: " + path_);
}

void DatasetWriter::close() {
  if (closed_) return;
  out_.flush();
  if (!out_) throw DataError("write failed: " + path_);
  out_.close();
  if (std::rename(tmp_path_.c_str(), path_.c_str()) != 0) {
    std::remove(tmp_path_.c_str());
    throw DataError("cannot finalize output file: " + path_);
  }
  closed_ = true;
}

Dataset Dataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset file not found: " + path);
  Dataset ds;
  std::string line;
  std::string all;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    all += line;
    all += "\n";
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "header") {
      ds.header.version = j.at("version").get<int>();
      if (ds.header.version != 1) {
        throw DataError(path + ": unsupported dataset version " +
                        std::to_string(ds.header.version));
      }
      ds.header.hand_hash = parse_hex64(j.at("hand_hash").get<std::string>());
      ds.header.object_lib_hash = parse_hex64(j.at("object_lib_hash").get<std::string>());
      have_header = true;
    } else if (kind == "grasp") {
      ds.grasps.push_back(grasp_record_from_json(j));
    } else if (kind == "multigrasp") {
      ds.multigrasps.push_back(multigrasp_record_from_json(j));
    } else if (kind == "outcome") {
      ds.outcomes.push_back(outcome_record_from_json(j));
    } else {
      throw ParseError(path + ":" + std::to_string(line_no) + ": unknown record kind '" + kind +
                       "'");
    }
  }
  if (!have_header) throw DataError(path + ": missing dataset header line");
  ds.content_hash = fnv1a64(all);
  return ds;
}

void Dataset::check_hashes(const HandModel& model, const ObjectLibrary& library) const {
  if (header.hand_hash != model.content_hash()) {
    throw DataError("dataset was produced with a different hand model (hash mismatch)");
  }
  if (header.object_lib_hash != library.content_hash) {
    throw DataError("dataset was produced with a different object library (hash mismatch)");
  }
}

void write_xyz(const std::string& path, const SurfaceSamples& samples, const std::string& frame) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open output file: " + path);
  out << "# frame: " << frame << "\n";
  char buf[160];
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    const Vec3& p = samples.points[i];
    const Vec3& n = samples.normals[i];
    std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.9f %.9f\n", p.x(), p.y(), p.z(), n.x(),
                  n.y(), n.z());
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path);
}

XyzCloud read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("point cloud file not found: " + path);
  XyzCloud cloud;
  cloud.frame = "object";
  std::vector<Vec3> pts;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("frame:");
      if (pos != std::string::npos) {
        std::string f = line.substr(pos + 6);
        const auto start = f.find_first_not_of(" \t");
        if (start != std::string::npos) cloud.frame = f.substr(start);
      }
      continue;
    }
    std::istringstream row(line);
    double x, y, z;
    if (!(row >> x >> y >> z)) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'x y z [nx ny nz]'");
    }
    pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw DataError(path + ": empty point cloud");
  cloud.points.resize(3, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) cloud.points.col(i) = pts[i];
  return cloud;
}

}  // namespace seqgrasp
