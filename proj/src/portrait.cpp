#include "hopfinf/portrait.hpp"

#include <cmath>
#include <cstdio>

#include "hopfinf/error.hpp"
#include "hopfinf/flux_index.hpp"
#include "hopfinf/format.hpp"
#include "hopfinf/parallel.hpp"
#include "hopfinf/spectral.hpp"

namespace hopfinf {

namespace {

class Canvas {
 public:
  Canvas(double window, int size) : w_(window), size_(size) {}

  double px(double x) const { return (x + w_) / (2.0 * w_) * size_; }
  double py(double y) const { return (w_ - y) / (2.0 * w_) * size_; }
  double len(double d) const { return d / (2.0 * w_) * size_; }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  void add(const std::string& s) { body_ += s + "\n"; }

  void circle(double r, const std::string& attrs) {
    add("<circle cx=\"" + num(px(0)) + "\" cy=\"" + num(py(0)) + "\" r=\"" + num(len(r)) + "\" " + attrs + "/>");
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& attrs) {
    if (pts.size() < 2) return;
    std::string s = "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) s += ' ';
      s += num(px(pts[i].x)) + "," + num(py(pts[i].y));
    }
    add(s + "\" " + attrs + "/>");
  }

  std::string finish(const std::string& title) const {
    const std::string sz = std::to_string(size_);
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + sz + "\" height=\"" + sz + "\" viewBox=\"0 0 " + sz +
           " " + sz + "\">\n<title>" + title + "</title>\n<rect width=\"" + sz + "\" height=\"" + sz +
           "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
  }

 private:
  double w_;
  int size_;
  std::string body_;
};

std::vector<Vec2> clipped(const std::vector<TrajectorySample>& samples, double limit) {
  std::vector<Vec2> pts;
  for (const auto& s : samples) {
    pts.push_back(s.z);
    if (s.z.norm() > limit) break;
  }
  return pts;
}

std::vector<double> flux_roots(const PlanarField& field, double mu, double r_lo, double r_hi) {
  const auto radii = log_radii({r_lo, r_hi}, 96);
  std::vector<double> phi(radii.size());
  std::vector<bool> signed_(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const Estimate e = flux(field, mu, radii[i]);
    phi[i] = e.value;
    signed_[i] = std::fabs(e.value) > e.error;
  }
  std::vector<double> roots;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!signed_[i - 1] || !signed_[i] || (phi[i - 1] > 0.0) == (phi[i] > 0.0)) continue;
    double a = radii[i - 1], b = radii[i];
    const bool a_pos = phi[i - 1] > 0.0;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      if ((flux(field, mu, m).value > 0.0) == a_pos) a = m;
      else b = m;
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

}  // namespace

Portrait render_portrait(const PlanarField& field, const PortraitOptions& opt) {
  const double sigma = field.sigma();
  const double W = opt.window > 0.0 ? opt.window : 12.0 * sigma;
  if (!(W > sigma)) throw InvalidArgument("portrait window must exceed sigma");
  if (opt.size < 64) throw InvalidArgument("portrait size must be at least 64 pixels");
  const double mu = opt.mu;
  Canvas cv(W, opt.size);
  Portrait out;

  // Direction arrows.
  constexpr int kArrows = 17;
  const double cell = 2.0 * W / kArrows;
  for (int i = 0; i < kArrows; ++i) {
    for (int j = 0; j < kArrows; ++j) {
      const Vec2 z{-W + (i + 0.5) * cell, -W + (j + 0.5) * cell};
      if (z.norm() <= 1.05 * sigma) continue;
      const Vec2 v = field.eval(z, mu);
      const double n = v.norm();
      if (!(n > 0.0)) continue;
      const Vec2 d = v * (0.35 * cell / n);
      const Vec2 a = z - d * 0.5, b = z + d * 0.5;
      cv.add("<line x1=\"" + Canvas::num(cv.px(a.x)) + "\" y1=\"" + Canvas::num(cv.py(a.y)) + "\" x2=\"" +
             Canvas::num(cv.px(b.x)) + "\" y2=\"" + Canvas::num(cv.py(b.y)) +
             "\" stroke=\"#999\" stroke-width=\"1\" marker-end=\"url(#tip)\"/>");
    }
  }

  // Sample trajectories both ways from two rings of seeds.
  TrajectoryControls tc;
  tc.t_max = opt.t_max;
  tc.escape_radius = 3.0 * W;
  tc.rtol = 1e-8;
  tc.atol = 1e-10;
  struct Seed {
    Vec2 z;
    Direction dir;
  };
  std::vector<Seed> seeds;
  for (double frac : {0.35, 0.75}) {
    const double r = std::max(frac * W, 1.2 * sigma);
    for (int k = 0; k < opt.seeds_per_ring; ++k) {
      const double t = kTwoPi * (k + (frac < 0.5 ? 0.0 : 0.5)) / opt.seeds_per_ring;
      seeds.push_back({polar(r, t), Direction::Forward});
      seeds.push_back({polar(r, t), Direction::Backward});
    }
  }
  auto paths = parallel_map(seeds.size(), [&](std::size_t i) {
    return clipped(integrate(field, mu, seeds[i].z, seeds[i].dir, tc).samples, 1.5 * W);
  });
  for (std::size_t i = 0; i < paths.size(); ++i) {
    cv.polyline(paths[i], std::string("fill=\"none\" stroke=\"") +
                              (seeds[i].dir == Direction::Forward ? "#1f5fbf" : "#7a9cd6") +
                              "\" stroke-width=\"1\"");
  }

  // Transversal circles inside the window.
  for (double r = 2.0 * sigma; r <= W; r *= 2.0) {
    const auto c = transversal_circle(field, mu, r);
    out.circles.push_back(c);
    if (c.contact == CircleContact::NotTransversal) continue;
    cv.circle(r, std::string("fill=\"none\" stroke=\"") + (c.contact == CircleContact::Outflow ? "#2a9d3a" : "#c77c00") +
                     "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"");
  }

  // Limit cycles: flux sign changes, then a trajectory that closes up.
  TrajectoryControls lc;
  lc.t_max = 500.0;
  lc.escape_radius = 3.0 * W;
  for (double r : flux_roots(field, mu, 1.02 * sigma, W * std::sqrt(2.0))) {
    LimitCycleMark m;
    m.flux_root = r;
    for (Direction d : {Direction::Forward, Direction::Backward}) {
      const Trajectory t = integrate(field, mu, {r, 0.0}, d, lc);
      if (t.cause == Termination::LoopClosed && t.loop) {
        m.closed = true;
        m.loop = *t.loop;
        m.path = clipped(t.samples, 3.0 * W);
        break;
      }
    }
    if (m.closed) cv.polyline(m.path, "fill=\"none\" stroke=\"#d62728\" stroke-width=\"2.5\"");
    out.cycles.push_back(std::move(m));
  }

  cv.circle(sigma, "fill=\"#bbbbbb\" stroke=\"#555\" stroke-width=\"1\"");
  cv.add("<line x1=\"0\" y1=\"" + Canvas::num(cv.py(0)) + "\" x2=\"" + std::to_string(opt.size) + "\" y2=\"" +
         Canvas::num(cv.py(0)) + "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>");
  cv.add("<line x1=\"" + Canvas::num(cv.px(0)) + "\" y1=\"0\" x2=\"" + Canvas::num(cv.px(0)) + "\" y2=\"" +
         std::to_string(opt.size) + "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>");
  cv.add("<defs><marker id=\"tip\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">"
         "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#999\"/></marker></defs>");

  out.svg = cv.finish(field.name() + " at mu=" + fmt(mu));
  return out;
}

}  // namespace hopfinf
