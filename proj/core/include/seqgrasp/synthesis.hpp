#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqgrasp/energy.hpp"
#include "seqgrasp/geometry.hpp"
#include "seqgrasp/hand_model.hpp"
#include "seqgrasp/random.hpp"
#include "seqgrasp/validation.hpp"

namespace seqgrasp {

struct SynthesisConfig {
  GraspStyle style = GraspStyle::kPinch;
  int n_candidates = 512;
  int n_contacts = 0;  // 0 = style default: pinch 3, side 4
  int steps = 2000;
  double step_size = 1e-4;   // MALA tau at the start of the chain
  double temperature = 1.0;  // at the start of the chain
  double energy_threshold = 5.0;
  double contact_resample_prob = 0.1;
  // Geometric annealing: tau and temperature decay to these fractions of
  // their initial values by the final step.
  double tau_anneal = 0.05;
  double temperature_anneal = 0.01;
  std::uint64_t seed = 0;
  EnergyWeights weights;
  int threads = 0;  // 0 = hardware concurrency

  int effective_contacts() const {
    if (n_contacts > 0) return n_contacts;
    return style == GraspStyle::kPinch ? 3 : 4;
  }
  void check() const;  // throws std::invalid_argument
};

/// One synthesized single-object grasp.
struct GraspRecord {
  GraspStyle style = GraspStyle::kPinch;
  std::string object_id;
  JointVector theta;
  Pose object_in_hand;  // T: object pose in the hand root frame
  ContactAssignment assignment;
  EnergyBreakdown energy;
  std::optional<ValidationReport> validation;
  std::uint64_t seed = 0;
  int candidate_index = -1;
};

struct InitState {
  JointVector theta;
  Pose hand_world;
  ContactAssignment assignment;
};

/// Style-specific tabletop initialization; the object sits at its canonical
/// world pose. Pinch: palm facing down onto the object from a fibonacci cap
/// of radius bounding_radius + 8 cm. Side: palm lateral at mid-object height
/// from one of 8 canonical yaws, +-2 cm / +-0.15 rad jitter.
InitState init_candidate(const HandModel& model, const ObjectModel& object, GraspStyle style,
                         int n_contacts, RandomStream& rng);

/// One Metropolis-adjusted Langevin step on a flat-vector energy.
/// The proposal is x' = x - tau * grad E(x) + sqrt(2 tau temperature) * xi.
struct MalaPoint {
  Eigen::VectorXd x;
  double energy = 0.0;
  Eigen::VectorXd grad;
};
using FlatEnergyFn = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;
bool mala_step(MalaPoint& state, const FlatEnergyFn& fn, double tau, double temperature,
               RandomStream& rng);

/// Log acceptance ratio shared by the flat and the (theta, pose-twist)
/// chains: Metropolis-Hastings with the Langevin proposal density.
double mala_log_accept(double e0, double e1, const Eigen::VectorXd& delta,
                       const Eigen::VectorXd& g0, const Eigen::VectorXd& g1, double tau,
                       double temperature);

/// Discrete contact move: with probability `prob`, swaps one assigned
/// candidate for an unused one and Metropolis-accepts it against the total
/// energy. Returns true when the assignment changed; `current_energy` is
/// updated in place.
bool resample_contacts(ContactAssignment& assignment, int pool_size, double prob,
                       double temperature,
                       const std::function<double(const ContactAssignment&)>& total_energy_of,
                       double& current_energy, RandomStream& rng);

struct SynthesisStats {
  int candidates = 0;
  int emitted = 0;
  double yield = 0.0;
  double mean_acceptance = 0.0;
};

/// Full single-object synthesis: init, MALA chains with contact resampling,
/// energy-threshold and table-penetration filtering. Deterministic for a
/// fixed config; candidates run on a worker pool with per-candidate RNG
/// streams and index-stable output order.
std::vector<GraspRecord> synthesize(const HandModel& model, const ObjectModel& object,
                                    const SynthesisConfig& config,
                                    SynthesisStats* stats = nullptr);

/// Hand-sphere penetration depth into the tabletop at a world hand pose.
double table_penetration(const HandModel& model, const JointVector& theta,
                         const Pose& hand_world);

}  // namespace seqgrasp
