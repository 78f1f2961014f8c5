#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "apfnav/io.hpp"

namespace apfnav {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad(double frac) {
    if (!std::isfinite(x0)) *this = {0, 1, 0, 1};
    if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
    const double dx = (x1 - x0) * frac;
    const double dy = (y1 - y0) * frac;
    x0 -= dx; x1 += dx; y0 -= dy; y1 += dy;
  }
};

// Maps data to pixels. Path plots keep equal scales and draw +y downward so
// a starboard turn looks clockwise; time plots put larger values up.
class Canvas {
 public:
  Canvas(Bounds b, bool equal_aspect, bool y_down) : b_(b), y_down_(y_down) {
    sx_ = (kWidth - 2 * kMargin) / (b.x1 - b.x0);
    sy_ = (kHeight - 2 * kMargin) / (b.y1 - b.y0);
    if (equal_aspect) sx_ = sy_ = std::min(sx_, sy_);
    body_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight, kWidth, kHeight);
  }

  double px(double x) const { return kMargin + (x - b_.x0) * sx_; }
  double py(double y) const { return y_down_ ? kMargin + (y - b_.y0) * sy_ : kHeight - kMargin - (y - b_.y0) * sy_; }
  double scale() const { return sx_; }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                const std::string& cls, const std::string& extra = {}) {
    if (pts.empty()) return;
    std::string p;
    for (const auto& [x, y] : pts) p += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    body_ += fmt::format("<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" {} points=\"{}\"/>\n",
                         cls, stroke, extra, p);
  }
  void circle(double x, double y, double r_px, const std::string& cls, const std::string& style) {
    body_ += fmt::format("<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" {}/>\n", cls, px(x), py(y),
                         r_px, style);
  }
  void line(double x0, double y0, double x1, double y1, const std::string& cls, const std::string& style) {
    body_ += fmt::format("<line class=\"{}\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" {}/>\n", cls,
                         px(x0), py(y0), px(x1), py(y1), style);
  }
  void text(double px_, double py_, const std::string& s, const std::string& extra = {}) {
    body_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" {}>{}</text>\n",
                         px_, py_, extra, s);
  }
  void axes(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    const double left = kMargin, right = kWidth - kMargin, top = kMargin, bottom = kHeight - kMargin;
    body_ += fmt::format("<rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                         left, top, right - left, bottom - top);
    for (int i = 0; i <= 4; ++i) {
      const double xv = b_.x0 + (b_.x1 - b_.x0) * i / 4.0;
      const double yv = b_.y0 + (b_.y1 - b_.y0) * i / 4.0;
      text(std::clamp(px(xv), left, right) - 10, bottom + 18, fmt::format("{:.4g}", xv));
      text(4, std::clamp(py(yv), top, bottom) + 4, fmt::format("{:.4g}", yv));
    }
    text(kWidth / 2 - 60, 30, title, "font-size=\"16\"");
    text(kWidth / 2 - 20, kHeight - 15, xlabel);
    text(4, kMargin - 12, ylabel);
  }
  void legend(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double y = kMargin + 14 + 16 * static_cast<double>(i);
      body_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", kWidth - kMargin - 150,
                           y - 9, colour(i));
      text(kWidth - kMargin - 135, y, labels[i]);
    }
  }
  std::string finish() { return body_ + "</svg>\n"; }

 private:
  Bounds b_;
  bool y_down_;
  double sx_ = 1.0, sy_ = 1.0;
  std::string body_;
};

std::map<int, std::vector<const TrajectoryRow*>> by_agent(const std::vector<TrajectoryRow>& rows) {
  std::map<int, std::vector<const TrajectoryRow*>> out;
  for (const auto& r : rows) out[r.agent_id].push_back(&r);
  return out;
}

// Splits a series wherever consecutive samples are more than 1.5 steps apart.
std::vector<std::vector<std::pair<double, double>>> contiguous(const std::vector<SeriesPoint>& pts) {
  std::vector<std::vector<std::pair<double, double>>> out;
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) dt = std::min(dt, pts[i].t - pts[i - 1].t);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == 0 || pts[i].t - pts[i - 1].t > 1.5 * dt) out.emplace_back();
    out.back().emplace_back(pts[i].t, pts[i].value);
  }
  return out;
}

std::string series_plot(const std::vector<std::pair<std::string, std::vector<SeriesPoint>>>& series,
                        const std::string& title, const std::string& ylabel,
                        const std::optional<double>& hline = std::nullopt) {
  Bounds b;
  for (const auto& [label, pts] : series) {
    for (const auto& p : pts) b.add(p.t, p.value);
  }
  if (hline) b.add(std::isfinite(b.x0) ? b.x0 : 0.0, *hline);
  b.pad(0.05);
  Canvas c(b, false, false);
  c.axes(title, "t' (nondimensional)", ylabel);
  if (hline) c.line(b.x0, *hline, b.x1, *hline, "threshold", "stroke=\"gray\" stroke-dasharray=\"6,4\"");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (const auto& part : contiguous(series[i].second)) {
      c.polyline(part, colour(i), "series", fmt::format("data-label=\"{}\"", series[i].first));
    }
    labels.push_back(series[i].first);
  }
  c.legend(labels);
  return c.finish();
}

std::string path_plot(const std::vector<TrajectoryRow>& rows, const Scenario* s) {
  const auto agents = by_agent(rows);
  const double R_tol = s ? s->guidance.ilos.R_tol : 3.0;
  Bounds b;
  for (const auto& r : rows) b.add(r.x, r.y);
  if (s) {
    for (const auto& a : s->agents) {
      b.add(a.start.x, a.start.y);
      for (const auto& w : a.waypoints) {
        b.add(w.x - R_tol, w.y - R_tol);
        b.add(w.x + R_tol, w.y + R_tol);
      }
    }
    for (const auto& o : s->obstacles) b.add(o.center.x, o.center.y);
  }
  b.pad(0.05);
  Canvas c(b, true, true);
  c.axes("Trajectories", "x (L)", "y (L)");

  if (s) {
    if (s->channel) {
      for (const auto& w : s->channel->walls) c.line(w.a.x, w.a.y, w.b.x, w.b.y, "wall", "stroke=\"black\" stroke-width=\"2\"");
    }
    for (const auto& o : s->obstacles) {
      c.circle(o.center.x, o.center.y, std::max(2.0, o.R_obs * c.scale()), "obstacle", "fill=\"#555\"");
      c.circle(o.center.x, o.center.y, (o.R_obs + s->config.collision_threshold) * c.scale(), "collision-zone",
               "fill=\"none\" stroke=\"#555\" stroke-dasharray=\"3,3\"");
    }
    for (std::size_t i = 0; i < s->agents.size(); ++i) {
      const auto& a = s->agents[i];
      c.circle(a.start.x, a.start.y, 4, "start", fmt::format("fill=\"{}\"", colour(i)));
      for (const auto& w : a.waypoints) {
        c.circle(w.x, w.y, R_tol * c.scale(), "rtol", fmt::format("fill=\"none\" stroke=\"{}\" stroke-dasharray=\"4,3\"", colour(i)));
        c.circle(w.x, w.y, 4, "waypoint", fmt::format("fill=\"white\" stroke=\"{}\" stroke-width=\"2\"", colour(i)));
      }
    }
  }
  std::vector<std::string> labels;
  std::size_t k = 0;
  for (const auto& [id, pts] : agents) {
    std::vector<std::pair<double, double>> xy;
    for (const auto* r : pts) xy.emplace_back(r->x, r->y);
    c.polyline(xy, colour(k), "trajectory", fmt::format("data-agent=\"{}\"", id));
    labels.push_back(fmt::format("agent {}", id));
    ++k;
  }
  c.legend(labels);
  return c.finish();
}

}  // namespace

PlotKind plot_kind_from_string(std::string_view s) {
  if (s == "path") return PlotKind::path;
  if (s == "rudder") return PlotKind::rudder;
  if (s == "heading") return PlotKind::heading;
  if (s == "distance") return PlotKind::distance;
  if (s == "crosstrack") return PlotKind::crosstrack;
  throw std::invalid_argument("unknown plot kind '" + std::string(s) +
                              "' (expected path, rudder, heading, distance or crosstrack)");
}

std::vector<DistanceSeries> distance_series(const std::vector<TrajectoryRow>& rows, double R_safe) {
  std::map<double, std::vector<const TrajectoryRow*>> by_time;
  for (const auto& r : rows) by_time[r.t].push_back(&r);
  std::map<std::pair<int, int>, DistanceSeries> pairs;
  for (const auto& [t, at] : by_time) {
    for (std::size_t i = 0; i < at.size(); ++i) {
      for (std::size_t j = i + 1; j < at.size(); ++j) {
        const auto* p = at[i];
        const auto* q = at[j];
        if (p->agent_id > q->agent_id) std::swap(p, q);
        const double d = std::hypot(p->x - q->x, p->y - q->y);
        if (d > R_safe) continue;
        auto& s = pairs[{p->agent_id, q->agent_id}];
        s.a = p->agent_id;
        s.b = q->agent_id;
        s.points.push_back({t, d});
      }
    }
  }
  std::vector<DistanceSeries> out;
  for (auto& [key, s] : pairs) out.push_back(std::move(s));
  return out;
}

std::string plot_trajectory_svg(const std::vector<TrajectoryRow>& rows, PlotKind kind, const Scenario* scenario) {
  if (kind == PlotKind::path) return path_plot(rows, scenario);

  const auto agents = by_agent(rows);
  std::vector<std::pair<std::string, std::vector<SeriesPoint>>> series;
  auto per_agent = [&](const char* what, auto value) {
    for (const auto& [id, pts] : agents) {
      std::vector<SeriesPoint> v;
      for (const auto* r : pts) v.push_back({r->t, value(*r)});
      series.emplace_back(fmt::format("agent {} {}", id, what), std::move(v));
    }
  };

  switch (kind) {
    case PlotKind::rudder:
      per_agent("delta", [](const TrajectoryRow& r) { return rad2deg(r.delta); });
      per_agent("delta_c", [](const TrajectoryRow& r) { return rad2deg(r.delta_c); });
      return series_plot(series, "Rudder angle", "deg");
    case PlotKind::heading:
      per_agent("psi", [](const TrajectoryRow& r) { return rad2deg(r.psi); });
      per_agent("psi_d", [](const TrajectoryRow& r) { return rad2deg(r.psi_d); });
      return series_plot(series, "Heading", "deg");
    case PlotKind::crosstrack:
      per_agent("y_e", [](const TrajectoryRow& r) { return r.y_e; });
      return series_plot(series, "Cross-track error", "L");
    case PlotKind::distance: {
      const double R_safe = scenario ? scenario->config.R_safe : 15.0;
      const double threshold = scenario ? scenario->config.collision_threshold : 2.0;
      for (auto& d : distance_series(rows, R_safe)) {
        series.emplace_back(fmt::format("agents {}-{}", d.a, d.b), std::move(d.points));
      }
      if (scenario) {
        for (std::size_t k = 0; k < scenario->obstacles.size(); ++k) {
          const auto& o = scenario->obstacles[k];
          for (const auto& [id, pts] : agents) {
            std::vector<SeriesPoint> v;
            for (const auto* r : pts) {
              const double d = std::hypot(r->x - o.center.x, r->y - o.center.y);
              if (d <= R_safe) v.push_back({r->t, d});
            }
            if (!v.empty()) series.emplace_back(fmt::format("agent {}-obstacle {}", id, k), std::move(v));
          }
        }
      }
      return series_plot(series, "Separation (within R_safe)", "L", threshold);
    }
    case PlotKind::path:
      break;
  }
  return {};
}

std::vector<FieldArrow> guidance_field(Method method, const GuidanceConfig& g, int n) {
  if (n < 2) throw std::invalid_argument("guidance_field: grid needs at least 2 points per side");
  const Vec2 goal{50.0, 0.0};
  const StaticObstacle obstacle{{25.0, 0.0}, 0.5};
  const std::vector<ObstacleView> views{ObstacleView::from_static(obstacle)};
  std::vector<FieldArrow> out;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Vec2 p{10.0 + 30.0 * i / (n - 1), -15.0 + 30.0 * k / (n - 1)};
      if (distance(p, obstacle.center) <= obstacle.R_obs + 0.5) continue;
      Vec2 v;
      switch (method) {
        case Method::apf_inverse: {
          const auto grad = inverse_square_gradient(p, goal, views, g.inverse);
          if (!grad) continue;
          v = *grad;
          break;
        }
        case Method::apf_sinkvortex:
        case Method::apf_mvortex: {
          DynamicState s;
          s.pose = {p.x, p.y, (goal - p).angle()};
          s.nu = {1.0, 0.0, 0.0};
          const auto variant = method == Method::apf_mvortex ? HarmonicVariant::modified_vortex
                                                             : HarmonicVariant::sink_vortex;
          v = harmonic_field(s, goal, views, nullptr, g.harmonic, variant).velocity;
          break;
        }
        case Method::velocity_obstacle:
          throw std::invalid_argument("guidance_field: the velocity obstacle method has no potential field");
      }
      const double norm = v.norm();
      if (!(norm > 0.0)) continue;
      out.push_back({p, v * (1.0 / norm)});
    }
  }
  return out;
}

std::string plot_field_svg(Method method, const GuidanceConfig& g) {
  const auto arrows = guidance_field(method, g);
  Bounds b{8.0, 52.0, -17.0, 17.0};
  Canvas c(b, true, true);
  c.axes(fmt::format("Guidance field: {}", to_string(method)), "x (L)", "y (L)");
  const double len = 0.9;  // L
  for (const auto& a : arrows) {
    const Vec2 tip = a.at + a.dir * len;
    const Vec2 side{-a.dir.y, a.dir.x};
    const Vec2 h1 = tip - a.dir * 0.35 + side * 0.18;
    const Vec2 h2 = tip - a.dir * 0.35 - side * 0.18;
    c.line(a.at.x, a.at.y, tip.x, tip.y, "arrow", "stroke=\"#1f77b4\"");
    c.polyline({{h1.x, h1.y}, {tip.x, tip.y}, {h2.x, h2.y}}, "#1f77b4", "arrowhead");
  }
  c.circle(25.0, 0.0, std::max(3.0, 0.5 * c.scale()), "obstacle", "fill=\"#555\"");
  c.circle(50.0, 0.0, 5, "waypoint", "fill=\"white\" stroke=\"black\" stroke-width=\"2\"");
  return c.finish();
}

}  // namespace apfnav
