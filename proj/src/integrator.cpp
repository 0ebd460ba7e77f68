#include <algorithm>
#include <array>
#include <cmath>

#include "hopfinf/error.hpp"
#include "hopfinf/flow.hpp"

namespace hopfinf {

namespace {

using State = std::array<double, 3>;  // x, y, physical time

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct SingularStage {};

class Rhs {
 public:
  Rhs(const PlanarField& field, double mu, Direction dir, Parametrization p)
      : field_(field), mu_(mu), sign_(dir == Direction::Forward ? 1.0 : -1.0), param_(p) {}

  // Throws DomainViolation / NonFiniteValue from the field, SingularStage at a zero.
  State operator()(const State& y) const {
    const Vec2 z{y[0], y[1]};
    const Vec2 v = field_.eval(z, mu_);
    if (param_ == Parametrization::Time) return {sign_ * v.x, sign_ * v.y, 1.0};
    const double speed = v.norm();
    if (!(speed > 0.0)) throw SingularStage{};
    const double k = (1.0 + z.norm()) / speed;
    return {sign_ * k * v.x, sign_ * k * v.y, k};
  }

  double speed(Vec2 z) const { return field_.eval(z, mu_).norm(); }

 private:
  const PlanarField& field_;
  double mu_;
  double sign_;
  Parametrization param_;
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [w, k] : terms) {
    for (int i = 0; i < 3; ++i) out[i] += h * w * (*k)[i];
  }
  return out;
}

struct Dense {
  State r1, r2, r3, r4, r5;
  State at(double theta) const {
    const double t1 = 1.0 - theta;
    State out;
    for (int i = 0; i < 3; ++i) {
      out[i] = r1[i] + theta * (r2[i] + t1 * (r3[i] + theta * (r4[i] + t1 * r5[i])));
    }
    return out;
  }
};

double wrap(double a) {
  while (a > kPi) a -= kTwoPi;
  while (a <= -kPi) a += kTwoPi;
  return a;
}

LoopInfo loop_stats(const std::vector<TrajectorySample>& samples, double t_begin, const State& closure,
                    double distance) {
  LoopInfo li;
  li.period = closure[2] - t_begin;
  li.closure_point = {closure[0], closure[1]};
  li.closure_distance = distance;
  double weighted = 0.0;
  double span = 0.0;
  li.min_radius = li.closure_point.norm();
  li.max_radius = li.min_radius;
  const TrajectorySample* prev = nullptr;
  for (const auto& s : samples) {
    if (s.t < t_begin) continue;
    const double r = s.z.norm();
    li.min_radius = std::min(li.min_radius, r);
    li.max_radius = std::max(li.max_radius, r);
    if (prev) {
      const double dt = s.t - prev->t;
      weighted += 0.5 * dt * (r + prev->z.norm());
      span += dt;
    }
    prev = &s;
  }
  li.mean_radius = span > 0.0 ? weighted / span : li.min_radius;
  return li;
}

}  // namespace

std::string to_string(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Escaped: return "escaped";
    case Termination::ReachedInnerRadius: return "reached_inner_radius";
    case Termination::TimeBudget: return "time_budget";
    case Termination::LoopClosed: return "loop_closed";
    case Termination::StepCollapse: return "step_collapse";
    case Termination::SingularPoint: return "singular_point";
    case Termination::StepBudget: return "step_budget";
  }
  return "?";
}

Trajectory integrate(const PlanarField& field, double mu, Vec2 z0, Direction dir, const TrajectoryControls& c) {
  if (!field.in_domain(z0)) throw DomainViolation(z0, field.sigma());
  if (!(c.rtol > 0.0) || !(c.atol > 0.0) || !(c.t_max > 0.0)) {
    throw InvalidArgument("trajectory tolerances and budget must be positive");
  }
  const double escape = c.escape_radius > 0.0 ? c.escape_radius : 1000.0 * field.sigma();
  const double inner = c.inner_radius > 0.0 ? c.inner_radius : 1.01 * field.sigma();
  if (inner < field.sigma()) throw InvalidArgument("inner_radius must be >= sigma");

  const Rhs f(field, mu, dir, c.parametrization);
  Trajectory out;
  State y{z0.x, z0.y, 0.0};
  double s = 0.0;
  out.samples.push_back({0.0, 0.0, z0});

  State k1;
  try {
    k1 = f(y);
  } catch (const SingularStage&) {
    out.cause = Termination::SingularPoint;
    out.detail = "field vanishes at the initial point";
    return out;
  }

  const double v0 = std::hypot(k1[0], k1[1]);
  if (!(v0 > 1e-12 * (1.0 + z0.norm()))) {
    out.cause = Termination::SingularPoint;
    out.detail = "field vanishes at the initial point";
    return out;
  }
  double h = std::min(c.t_max, 1e-2 * (1.0 + z0.norm()) / v0);

  // Poincare section through z0, normal to the initial velocity.
  const Vec2 normal = Vec2{k1[0], k1[1]} * (1.0 / v0);
  const double loop_eps = 1e-6 * (1.0 + z0.norm());
  Vec2 anchor = z0;
  Vec2 anchor_dir = normal;
  double anchor_t = 0.0;
  double turned = 0.0;
  double prev_heading = std::atan2(k1[1], k1[0]);

  const double h_floor = 1e-14;
  while (true) {
    if (out.steps >= c.max_steps) {
      out.cause = Termination::StepBudget;
      out.detail = "step budget exhausted";
      return out;
    }
    if (s >= c.t_max) {
      out.cause = Termination::TimeBudget;
      out.detail = "integration budget exhausted";
      return out;
    }
    h = std::min(h, c.t_max - s);
    if (h < h_floor * (1.0 + std::fabs(s))) {
      out.cause = Termination::StepCollapse;
      out.detail = "step size collapsed";
      return out;
    }

    State k2, k3, k4, k5, k6, k7, y1;
    bool stage_ok = true;
    try {
      k2 = f(axpy(y, h, {{a21, &k1}}));
      k3 = f(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
      k4 = f(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      k5 = f(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      k6 = f(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
      k7 = f(y1);
    } catch (const DomainViolation&) {
      stage_ok = false;
    } catch (const NonFiniteValue&) {
      stage_ok = false;
    } catch (const SingularStage&) {
      stage_ok = false;
    }
    if (!stage_ok) {
      ++out.rejected;
      h *= 0.25;
      continue;
    }

    const double scale = c.atol + c.rtol * std::max(std::hypot(y[0], y[1]), std::hypot(y1[0], y1[1]));
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err += (ei / scale) * (ei / scale);
    }
    err = std::sqrt(err / 2.0);
    if (!std::isfinite(err)) err = 1e10;

    if (err > 1.0) {
      ++out.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    // Accepted step.
    Dense dense;
    for (int i = 0; i < 3; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      dense.r1[i] = y[i];
      dense.r2[i] = ydiff;
      dense.r3[i] = bspl;
      dense.r4[i] = ydiff - h * k7[i] - bspl;
      dense.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    const State y_prev = y;
    y = y1;
    s += h;
    k1 = k7;
    ++out.steps;
    const Vec2 z{y[0], y[1]};
    out.samples.push_back({s, y[2], z});
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));

    const double r = z.norm();
    if (r > escape) {
      out.cause = Termination::Escaped;
      return out;
    }
    if (r < inner) {
      out.cause = Termination::ReachedInnerRadius;
      return out;
    }
    const double speed = c.parametrization == Parametrization::Time ? std::hypot(k1[0], k1[1]) : f.speed(z);
    if (speed < 1e-12 * (1.0 + r)) {
      out.cause = Termination::SingularPoint;
      return out;
    }

    if (!c.detect_loops) continue;
    const double heading = std::atan2(k1[1], k1[0]);
    turned += wrap(heading - prev_heading);
    prev_heading = heading;

    const double s0 = dot(Vec2{y_prev[0], y_prev[1]} - anchor, normal);
    const double s1 = dot(z - anchor, normal);
    if (std::fabs(turned) >= kPi / 2 && s0 < 0.0 && s1 >= 0.0) {
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (lo + hi);
        const State ym = dense.at(m);
        if (dot(Vec2{ym[0], ym[1]} - anchor, normal) < 0.0) lo = m;
        else hi = m;
      }
      const State yc = dense.at(hi);
      const Vec2 zc{yc[0], yc[1]};
      const Vec2 vc = field.eval(zc, mu);
      const double vn = vc.norm();
      const double dist = (zc - anchor).norm();
      const double cosine = vn > 0.0 ? dot(vc * (1.0 / vn), anchor_dir) * (dir == Direction::Forward ? 1.0 : -1.0) : -1.0;
      if (dist <= loop_eps && cosine > 0.999) {
        out.loop = loop_stats(out.samples, anchor_t, yc, dist);
        out.cause = Termination::LoopClosed;
        return out;
      }
      // Next return is compared with this crossing (Poincare return map).
      anchor = zc;
      anchor_dir = vn > 0.0 ? vc * ((dir == Direction::Forward ? 1.0 : -1.0) / vn) : anchor_dir;
      anchor_t = yc[2];
      turned = 0.0;
    }
  }
}

}  // namespace hopfinf
