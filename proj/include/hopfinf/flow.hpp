#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hopfinf/field.hpp"
#include "hopfinf/flux_index.hpp"

namespace hopfinf {

enum class Direction { Forward, Backward };
std::string to_string(Direction d);

/// Time: integrate dz/dt = X_mu(z). Orbit: integrate the positively rescaled
/// field (1 + |z|) X_mu / |X_mu|, which has the same oriented orbits, and carry
/// physical time as an auxiliary component.
enum class Parametrization { Time, Orbit };

struct TrajectoryControls {
  double rtol = 1e-9;
  double atol = 1e-12;
  double t_max = 1000.0;        // budget in the integration variable
  double escape_radius = 0.0;   // <= 0: 1000 * sigma
  double inner_radius = 0.0;    // <= 0: 1.01 * sigma
  Parametrization parametrization = Parametrization::Time;
  long max_steps = 2'000'000;
  bool detect_loops = true;
};

enum class Termination { Escaped, ReachedInnerRadius, TimeBudget, LoopClosed, StepCollapse, SingularPoint, StepBudget };
std::string to_string(Termination t);

struct TrajectorySample {
  double s = 0.0;  // integration variable
  double t = 0.0;  // physical time elapsed
  Vec2 z;
};

struct LoopInfo {
  double period = 0.0;
  double mean_radius = 0.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
  Vec2 closure_point;
  double closure_distance = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination cause = Termination::TimeBudget;
  std::optional<LoopInfo> loop;
  long steps = 0;
  long rejected = 0;
  std::string detail;
};

/// Adaptive Dormand-Prince 5(4) integration with event detection.
Trajectory integrate(const PlanarField& field, double mu, Vec2 z0, Direction dir, const TrajectoryControls& c);

enum class TrajectoryVerdict { GoesToInfinity, ComesFromInfinity, ConvergesToSingularRegion, Periodic, Undetermined };
std::string to_string(TrajectoryVerdict v);

struct PathSummary {
  Vec2 start;
  std::vector<Vec2> points;  // thinned
  double final_time = 0.0;
  double final_radius = 0.0;
  Termination cause = Termination::TimeBudget;
};

struct TrajectoryOutcome {
  TrajectoryVerdict verdict = TrajectoryVerdict::Undetermined;
  Direction direction = Direction::Forward;
  Vec2 point;                   // ConvergesToSingularRegion
  double residual_speed = 0.0;  // ConvergesToSingularRegion
  std::optional<LoopInfo> loop; // Periodic
  std::string reason;
  PathSummary path;
};

TrajectoryOutcome classify_trajectory(const PlanarField& field, double mu, Vec2 z0, Direction dir,
                                      const TrajectoryControls& c);
TrajectoryOutcome classify(const Trajectory& traj, const PlanarField& field, double mu, Direction dir,
                           const TrajectoryControls& c);

enum class CircleContact { Inflow, Outflow, NotTransversal };
std::string to_string(CircleContact c);

struct TransversalityCertificate {
  double radius = 0.0;
  CircleContact contact = CircleContact::NotTransversal;
  double margin = 0.0;          // min |<X, eta>| for Inflow/Outflow
  double witness_angle = 0.0;   // NotTransversal
  double witness_value = 0.0;   // <X, eta> at the witness
};

inline constexpr double kTangencyTol = 1e-9;

/// Radial component <X_mu(p), p/|p|> on the circle of radius r.
TransversalityCertificate transversal_circle(const PlanarField& field, double mu, double r, int angular_samples = 256);

enum class StabilityVerdict { Attractor, Repellor, Undetermined };
std::string to_string(StabilityVerdict v);

struct StabilityControls {
  RadiusSchedule circles;     // 2*sigma * 2^k, k < 12
  int angular_samples = 256;
  int min_circles = 3;
  int probes = 16;
  std::uint64_t seed = 0;
  double escape_factor = 2.0; // probes escape past escape_factor * outermost circle
  TrajectoryControls trajectory = {1e-8, 1e-10, 5000.0, 0.0, 0.0, Parametrization::Orbit, 2'000'000, false};
};

struct InfinityStability {
  StabilityVerdict verdict = StabilityVerdict::Undetermined;
  std::vector<TransversalityCertificate> circles;  // every scheduled circle, by radius
  std::size_t certified_from = 0;                  // index of the innermost circle of the certified tail
  std::size_t certified_count = 0;
  std::vector<TrajectoryOutcome> trajectory_evidence;
  std::size_t probes_skipped = 0;
  std::string reason;
};

/// Certifies attractor/repellor behaviour of infinity with transversal circles
/// (the outermost run of circles sharing one strict sign) and escaping probes
/// launched from the innermost circle of that run.
InfinityStability certify_infinity_stability(const PlanarField& field, double mu, const StabilityControls& c = {});

}  // namespace hopfinf
