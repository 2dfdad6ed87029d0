#include "seqgrasp/synthesis.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace seqgrasp {

void SynthesisConfig::check() const {
  if (n_candidates < 1) throw std::invalid_argument("synthesis: n_candidates must be >= 1");
  if (steps < 1) throw std::invalid_argument("synthesis: steps must be >= 1");
  if (step_size <= 0) throw std::invalid_argument("synthesis: step_size must be > 0");
  if (contact_resample_prob < 0 || contact_resample_prob > 1) {
    throw std::invalid_argument("synthesis: contact_resample_prob must be in [0, 1]");
  }
  if (temperature <= 0) throw std::invalid_argument("synthesis: temperature must be > 0");
  if (tau_anneal <= 0 || tau_anneal > 1 || temperature_anneal <= 0 || temperature_anneal > 1) {
    throw std::invalid_argument("synthesis: anneal ratios must be in (0, 1]");
  }
}

namespace {

constexpr double kGoldenAngle = 2.39996322972865332;  // radians

/// i-th of n points on the spherical cap around +z with the given half-angle.
Vec3 fibonacci_cap_direction(int i, int n, double half_angle) {
  const double z_min = std::cos(half_angle);
  const double z = 1.0 - (1.0 - z_min) * ((i + 0.5) / n);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = i * kGoldenAngle;
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

ContactAssignment sample_assignment(const HandModel& model, GraspStyle style, int n_contacts,
                                    RandomStream& rng) {
  const int pool = static_cast<int>(model.candidates(style).size());
  if (n_contacts > pool) {
    throw std::invalid_argument("synthesis: hand provides fewer contact candidates than requested");
  }
  ContactAssignment a;
  a.style = style;
  std::vector<int> ids(pool);
  for (int i = 0; i < pool; ++i) ids[i] = i;
  for (int i = 0; i < n_contacts; ++i) {  // partial Fisher-Yates
    const int j = i + static_cast<int>(rng.uniform_index(pool - i));
    std::swap(ids[i], ids[j]);
    a.ids.push_back(ids[i]);
  }
  return a;
}

Mat3 frame_from_axes(const Vec3& x_axis, const Vec3& y_axis) {
  Mat3 r;
  r.col(0) = x_axis;
  r.col(1) = y_axis;
  r.col(2) = x_axis.cross(y_axis);
  return r;
}

}  // namespace

namespace {

Pose draw_pinch_pose(const ObjectModel& object, RandomStream& rng) {
  constexpr int kCapPoints = 256;
  constexpr double kCapHalfAngle = 25.0 * M_PI / 180.0;
  const double r0 = object.bounding_radius() + 0.08;
  const Vec3 dir = fibonacci_cap_direction(static_cast<int>(rng.uniform_index(kCapPoints)),
                                           kCapPoints, kCapHalfAngle);
  const Vec3 x_axis = -dir;  // palm faces down onto the object
  // Fingers stay horizontal; the cap azimuth plus a sign flip cover the roll.
  Vec3 y_axis = Vec3::UnitZ().cross(x_axis);
  if (y_axis.norm() < 1e-6) {
    const double psi = rng.uniform(0.0, 2.0 * M_PI);
    y_axis = Vec3(std::cos(psi), std::sin(psi), 0.0);
  } else {
    y_axis.normalize();
  }
  if (rng.uniform() < 0.5) y_axis = -y_axis;
  Pose hand;
  hand.rotation = frame_from_axes(x_axis, y_axis);
  hand.translation = object.canonical_pose.translation + r0 * dir;
  return hand;
}

Pose draw_side_pose(const HandModel& model, const ObjectModel& object, RandomStream& rng) {
  constexpr int kCanonicalYaws = 8;
  const Vec3 center = object.canonical_pose.translation;
  const double az = (2.0 * M_PI / kCanonicalYaws) * rng.uniform_index(kCanonicalYaws) +
                    rng.uniform(-0.15, 0.15);
  const Vec3 dir_out(std::cos(az), std::sin(az), 0.0);
  const Vec3 x_axis = -dir_out;
  const Vec3 z_axis(0.0, 0.0, -1.0);  // ring finger lowest, fingers horizontal
  const Vec3 y_axis = z_axis.cross(x_axis);
  Pose hand;
  hand.rotation = frame_from_axes(x_axis, y_axis);

  const double standoff = object.horizontal_extent() + 0.07;
  Vec3 palm_target = center + standoff * dir_out;
  // Palm at mid-object height, clamped so the ring finger clears the table.
  double lowest_offset = 0.0;
  for (const auto& f : model.fingers()) {
    const Pose mount = model.joints()[f.joints.front()].origin;
    lowest_offset = std::max(lowest_offset, mount.translation.z());
  }
  const double min_palm_z = lowest_offset - model.palm_center().z() + 0.015;
  palm_target.z() = std::max(center.z() + rng.uniform(-0.02, 0.02), min_palm_z);
  hand.translation = palm_target - hand.rotation * model.palm_center();
  hand.translation.x() += rng.uniform(-0.02, 0.02);
  hand.translation.y() += rng.uniform(-0.02, 0.02);
  return hand;
}

}  // namespace

InitState init_candidate(const HandModel& model, const ObjectModel& object, GraspStyle style,
                         int n_contacts, RandomStream& rng) {
  InitState init;
  init.theta = model.mid_range();
  init.assignment = sample_assignment(model, style, n_contacts, rng);

  // Rejection-sample the wrist pose until the placement is penetration-free
  // (hand vs object and table); the drawn distributions keep most mass there
  // already, so a handful of attempts suffices.
  EnergyEvaluator eval(model, object, EnergyWeights{}, {style, {}});
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    init.hand_world = style == GraspStyle::kPinch ? draw_pinch_pose(object, rng)
                                                  : draw_side_pose(model, object, rng);
    if (eval.value(init.theta, init.hand_world).e_p < 1e-12) break;
  }
  return init;
}

double mala_log_accept(double e0, double e1, const Eigen::VectorXd& delta,
                       const Eigen::VectorXd& g0, const Eigen::VectorXd& g1, double tau,
                       double temperature) {
  const double inv = 1.0 / (4.0 * tau * temperature);
  const double log_q_fwd = -(delta + tau * g0).squaredNorm() * inv;
  const double log_q_rev = -(-delta + tau * g1).squaredNorm() * inv;
  return (e0 - e1) / temperature + log_q_rev - log_q_fwd;
}

bool mala_step(MalaPoint& state, const FlatEnergyFn& fn, double tau, double temperature,
               RandomStream& rng) {
  const auto dim = state.x.size();
  Eigen::VectorXd noise(dim);
  for (Eigen::Index i = 0; i < dim; ++i) noise[i] = rng.normal();
  const Eigen::VectorXd delta = -tau * state.grad + std::sqrt(2.0 * tau * temperature) * noise;
  const Eigen::VectorXd proposal = state.x + delta;
  const auto [e1, g1] = fn(proposal);
  const double log_a = mala_log_accept(state.energy, e1, delta, state.grad, g1, tau, temperature);
  if (std::log(std::max(rng.uniform(), 1e-300)) < log_a) {
    state.x = proposal;
    state.energy = e1;
    state.grad = g1;
    return true;
  }
  return false;
}

bool resample_contacts(ContactAssignment& assignment, int pool_size, double prob,
                       double temperature,
                       const std::function<double(const ContactAssignment&)>& total_energy_of,
                       double& current_energy, RandomStream& rng) {
  if (prob <= 0.0 || rng.uniform() >= prob) return false;
  const int n = static_cast<int>(assignment.ids.size());
  if (n == 0 || pool_size <= n) return false;  // no unused candidate available

  std::vector<int> unused;
  unused.reserve(pool_size - n);
  for (int id = 0; id < pool_size; ++id) {
    bool used = false;
    for (int a : assignment.ids) used |= (a == id);
    if (!used) unused.push_back(id);
  }
  const int slot = static_cast<int>(rng.uniform_index(n));
  const int replacement = unused[rng.uniform_index(unused.size())];

  ContactAssignment proposal = assignment;
  proposal.ids[slot] = replacement;
  const double e1 = total_energy_of(proposal);
  if (std::log(std::max(rng.uniform(), 1e-300)) < (current_energy - e1) / temperature) {
    assignment = std::move(proposal);
    current_energy = e1;
    return true;
  }
  return false;
}

double table_penetration(const HandModel& model, const JointVector& theta,
                         const Pose& hand_world) {
  const auto poses = model.forward_kinematics(theta);
  double pen = 0.0;
  for (const CollisionSphere& s : model.collision_spheres()) {
    const Vec3 c = hand_world.compose(poses[s.link]).apply(s.center);
    pen += std::max(s.radius - table_sdf(c), 0.0);
  }
  return pen;
}

namespace {

struct ChainResult {
  std::optional<GraspRecord> record;
  double acceptance = 0.0;
};

ChainResult run_chain(const HandModel& model, const ObjectModel& object,
                      const SynthesisConfig& config, int candidate_index) {
  RandomStream rng = RandomStream::derive(config.seed, static_cast<std::uint64_t>(candidate_index));
  InitState state = init_candidate(model, object, config.style, config.effective_contacts(), rng);

  EnergyEvaluator eval(model, object, config.weights, state.assignment);
  JointVector theta = state.theta;
  Pose hand = state.hand_world;
  EnergyGradient eg = eval.value_and_gradient(theta, hand);

  const int dof = model.dof();
  const int pool = static_cast<int>(model.candidates(config.style).size());
  long accepted = 0;

  const double denom = std::max(config.steps - 1, 1);
  Eigen::VectorXd grad(dof + 6), delta(dof + 6), noise(dof + 6);
  for (int step = 0; step < config.steps; ++step) {
    const double frac = step / denom;
    const double tau = config.step_size * std::pow(config.tau_anneal, frac);
    const double temp = config.temperature * std::pow(config.temperature_anneal, frac);
    grad.head(dof) = eg.d_theta;
    grad.tail<6>() = eg.d_twist;
    for (int i = 0; i < dof + 6; ++i) noise[i] = rng.normal();
    delta = -tau * grad + std::sqrt(2.0 * tau * temp) * noise;

    const JointVector theta_p = theta + delta.head(dof);
    Pose hand_p = apply_twist(hand, delta.tail<6>());
    EnergyGradient eg_p = eval.value_and_gradient(theta_p, hand_p);

    Eigen::VectorXd grad_p(dof + 6);
    grad_p.head(dof) = eg_p.d_theta;
    grad_p.tail<6>() = eg_p.d_twist;
    const double log_a =
        mala_log_accept(eg.value.total, eg_p.value.total, delta, grad, grad_p, tau, temp);
    if (std::log(std::max(rng.uniform(), 1e-300)) < log_a) {
      theta = theta_p;
      hand = hand_p;
      hand.rotation = project_rotation(hand.rotation);
      eg = std::move(eg_p);
      ++accepted;
    }

    // Mixed discrete move over the contact assignment.
    ContactAssignment assignment = eval.assignment();
    double total = eg.value.total;
    const bool swapped = resample_contacts(
        assignment, pool, config.contact_resample_prob, temp,
        [&](const ContactAssignment& a) {
          EnergyEvaluator tmp(model, object, config.weights, a);
          return tmp.value(theta, hand).total;
        },
        total, rng);
    if (swapped) {
      eval.set_assignment(assignment);
      eg = eval.value_and_gradient(theta, hand);
    }
  }

  ChainResult out;
  out.acceptance = static_cast<double>(accepted) / config.steps;

  // Re-evaluate from scratch before filtering.
  const EnergyBreakdown final_energy = eval.value(theta, hand);
  if (final_energy.total > config.energy_threshold) return out;
  if (table_penetration(model, theta, hand) >= 1e-6) return out;

  GraspRecord rec;
  rec.style = config.style;
  rec.object_id = object.id;
  rec.theta = theta;
  rec.object_in_hand = hand.inverse().compose(object.canonical_pose);
  rec.assignment = eval.assignment();
  rec.energy = final_energy;
  rec.seed = config.seed;
  rec.candidate_index = candidate_index;
  out.record = std::move(rec);
  return out;
}

}  // namespace

std::vector<GraspRecord> synthesize(const HandModel& model, const ObjectModel& object,
                                    const SynthesisConfig& config, SynthesisStats* stats) {
  config.check();
  std::vector<ChainResult> results(config.n_candidates);

  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, config.n_candidates);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int idx = next.fetch_add(1); idx < config.n_candidates; idx = next.fetch_add(1)) {
      results[idx] = run_chain(model, object, config, idx);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<GraspRecord> records;
  double acc = 0.0;
  for (auto& r : results) {
    acc += r.acceptance;
    if (r.record) records.push_back(std::move(*r.record));
  }
  if (stats) {
    stats->candidates = config.n_candidates;
    stats->emitted = static_cast<int>(records.size());
    stats->yield = static_cast<double>(records.size()) / config.n_candidates;
    stats->mean_acceptance = acc / config.n_candidates;
  }
  return records;
}

}  // namespace seqgrasp
