#ifndef EMDET_WEAK_LABELS_HPP_
#define EMDET_WEAK_LABELS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "emdet/geometry.hpp"

namespace emdet::weak {

enum class WeakKind { Tight, Loose, Coarse, Tag };

std::string to_string(WeakKind k);
WeakKind weak_kind_from_string(const std::string& s);

struct WeakLabel {
  WeakKind kind = WeakKind::Tag;
  std::vector<geom::Box> boxes;  // empty for Tag
  bool has_text = false;         // Tag only
};

/// Per-image annotation seconds for each label form.
struct AnnotationCost {
  double polygon = 60.8;
  double tight = 39.0;
  double loose = 28.0;
  double coarse = 15.0;
  double tag = 2.0;
};

WeakLabel gen_tight(const std::vector<geom::Polygon>& polys);

/// Tight boxes expanded by independent fx, fy ~ U[0.1, 0.2] per instance.
WeakLabel gen_loose(const std::vector<geom::Polygon>& polys, std::uint64_t rng_seed);

/// Flat-kernel mean shift. Returns a cluster index per input point.
std::vector<int> mean_shift(const std::vector<geom::Point>& points, double radius);

/// Clusters tight-box centers with radius 0.3 * min(image_w, image_h); one box
/// per cluster, the union bbox of its members' tight boxes.
WeakLabel gen_coarse(const std::vector<geom::Polygon>& polys, double image_w, double image_h);

WeakLabel gen_tag(const std::vector<geom::Polygon>& polys);

}  // namespace emdet::weak

#endif
