#include "emdet/weak_labels.hpp"

#include <algorithm>
#include <stdexcept>

#include "emdet/rng.hpp"

namespace emdet::weak {

std::string to_string(WeakKind k) {
  switch (k) {
    case WeakKind::Tight: return "tight";
    case WeakKind::Loose: return "loose";
    case WeakKind::Coarse: return "coarse";
    case WeakKind::Tag: return "tag";
  }
  return "tag";
}

WeakKind weak_kind_from_string(const std::string& s) {
  if (s == "tight") return WeakKind::Tight;
  if (s == "loose") return WeakKind::Loose;
  if (s == "coarse") return WeakKind::Coarse;
  if (s == "tag") return WeakKind::Tag;
  throw std::invalid_argument("unknown weak kind: " + s);
}

WeakLabel gen_tight(const std::vector<geom::Polygon>& polys) {
  WeakLabel w;
  w.kind = WeakKind::Tight;
  for (const geom::Polygon& p : polys) w.boxes.push_back(geom::bbox_of_polygon(p));
  return w;
}

WeakLabel gen_loose(const std::vector<geom::Polygon>& polys, std::uint64_t rng_seed) {
  WeakLabel w;
  w.kind = WeakKind::Loose;
  Rng rng(rng_seed);
  std::uniform_real_distribution<double> factor(0.1, 0.2);
  for (const geom::Polygon& p : polys) {
    const double fx = factor(rng);
    const double fy = factor(rng);
    w.boxes.push_back(geom::expand_box(geom::bbox_of_polygon(p), fx, fy));
  }
  return w;
}

std::vector<int> mean_shift(const std::vector<geom::Point>& points, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("mean_shift: radius must be positive");
  const std::size_t n = points.size();
  std::vector<geom::Point> modes(points);
  for (std::size_t i = 0; i < n; ++i) {
    geom::Point m = points[i];
    for (int iter = 0; iter < 100; ++iter) {
      double sx = 0.0, sy = 0.0;
      int cnt = 0;
      for (const geom::Point& p : points) {
        if (geom::dist(m, p) <= radius) {
          sx += p.x;
          sy += p.y;
          ++cnt;
        }
      }
      const geom::Point next{sx / cnt, sy / cnt};  // cnt >= 1 (the point itself)
      const double shift = geom::dist(m, next);
      m = next;
      if (shift < 1e-4 * radius) break;
    }
    modes[i] = m;
  }
  // Merge modes closer than radius/2.
  std::vector<int> assign(n, -1);
  std::vector<geom::Point> merged;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < merged.size(); ++c) {
      if (geom::dist(modes[i], merged[c]) < radius / 2.0) {
        assign[i] = static_cast<int>(c);
        break;
      }
    }
    if (assign[i] < 0) {
      merged.push_back(modes[i]);
      assign[i] = static_cast<int>(merged.size()) - 1;
    }
  }
  return assign;
}

WeakLabel gen_coarse(const std::vector<geom::Polygon>& polys, double image_w, double image_h) {
  if (image_w <= 0.0 || image_h <= 0.0)
    throw std::invalid_argument("gen_coarse: image dimensions must be positive");
  WeakLabel w;
  w.kind = WeakKind::Coarse;
  if (polys.empty()) return w;

  std::vector<geom::Box> tight;
  std::vector<geom::Point> centers;
  for (const geom::Polygon& p : polys) {
    tight.push_back(geom::bbox_of_polygon(p));
    centers.push_back(tight.back().center());
  }
  const double radius = 0.3 * std::min(image_w, image_h);
  const std::vector<int> assign = mean_shift(centers, radius);
  const int n_clusters = *std::max_element(assign.begin(), assign.end()) + 1;

  for (int c = 0; c < n_clusters; ++c) {
    geom::Box b{1e300, 1e300, -1e300, -1e300};
    bool any = false;
    for (std::size_t i = 0; i < tight.size(); ++i) {
      if (assign[i] != c) continue;
      b.x_min = std::min(b.x_min, tight[i].x_min);
      b.y_min = std::min(b.y_min, tight[i].y_min);
      b.x_max = std::max(b.x_max, tight[i].x_max);
      b.y_max = std::max(b.y_max, tight[i].y_max);
      any = true;
    }
    if (any) w.boxes.push_back(b);
  }
  return w;
}

WeakLabel gen_tag(const std::vector<geom::Polygon>& polys) {
  WeakLabel w;
  w.kind = WeakKind::Tag;
  w.has_text = !polys.empty();
  return w;
}

}  // namespace emdet::weak
