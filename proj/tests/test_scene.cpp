#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "emdet/geometry.hpp"
#include "emdet/rng.hpp"
#include "emdet/scene.hpp"
#include "emdet/weak_labels.hpp"

using namespace emdet;
using geom::Box;
using geom::Point;
using geom::Polygon;

namespace {

scene::ImageRecord make_scene(std::uint64_t seed, const scene::SynthParams& p = {}) {
  return scene::synth_scene(seed, p);
}

}  // namespace

TEST_CASE("synth_scene determinism") {
  const scene::ImageRecord a = make_scene(42);
  const scene::ImageRecord b = make_scene(42);
  REQUIRE(a.image.features.size() == b.image.features.size());
  CHECK(a.image.features == b.image.features);  // bit-identical doubles
  REQUIRE(a.strong);
  REQUIRE(b.strong);
  REQUIRE(a.strong->size() == b.strong->size());
  for (std::size_t i = 0; i < a.strong->size(); ++i) {
    const auto& va = (*a.strong)[i].polygon.vertices();
    const auto& vb = (*b.strong)[i].polygon.vertices();
    REQUIRE(va.size() == vb.size());
    for (std::size_t j = 0; j < va.size(); ++j) {
      CHECK(va[j].x == vb[j].x);
      CHECK(va[j].y == vb[j].y);
    }
  }
  const scene::ImageRecord c = make_scene(43);
  CHECK(a.image.features != c.image.features);
}

TEST_CASE("synth_scene zero instances yields empty ground truth") {
  scene::SynthParams p;
  p.min_instances = 0;
  p.max_instances = 0;
  const scene::ImageRecord rec = make_scene(7, p);
  REQUIRE(rec.strong);
  CHECK(rec.strong->empty());
  CHECK_FALSE(weak::gen_tag(scene::polygons_of(rec)).has_text);
}

TEST_CASE("synth_scene ground truth respects geometry and placement invariants") {
  scene::SynthParams p;
  for (int s = 0; s < 100; ++s) {
    const scene::ImageRecord rec = make_scene(1000 + s, p);
    REQUIRE(rec.strong);
    const std::vector<Polygon> polys = scene::polygons_of(rec);
    CHECK(static_cast<int>(polys.size()) >= p.min_instances);
    CHECK(static_cast<int>(polys.size()) <= p.max_instances);
    for (const Polygon& poly : polys) {
      CHECK(poly.vertices().size() >= 12);
      const Box b = geom::bbox_of_polygon(poly);
      CHECK(b.x_min >= 0.0);
      CHECK(b.y_min >= 0.0);
      CHECK(b.x_max <= p.width);
      CHECK(b.y_max <= p.height);
    }
    for (std::size_t i = 0; i < polys.size(); ++i)
      for (std::size_t j = i + 1; j < polys.size(); ++j)
        CHECK(geom::polygon_iou(polys[i], polys[j]) == 0.0);
    for (const double v : rec.image.features) CHECK(std::isfinite(v));
  }
}

TEST_CASE("synth_scene ink cells carry more signal than background") {
  for (int s = 0; s < 20; ++s) {
    const scene::ImageRecord rec = make_scene(2000 + s);
    const std::vector<Polygon> polys = scene::polygons_of(rec);
    if (polys.empty()) continue;
    double ink_norm = 0.0, bg_norm = 0.0;
    int n_ink = 0, n_bg = 0;
    for (int y = 0; y < rec.image.height; ++y) {
      for (int x = 0; x < rec.image.width; ++x) {
        const Point c{x + 0.5, y + 0.5};
        const bool ink = std::any_of(polys.begin(), polys.end(), [&](const Polygon& p) {
          return geom::point_in_polygon(c, p.vertices());
        });
        double norm = 0.0;
        for (int ch = 0; ch < rec.image.feature_dim; ++ch)
          norm += rec.image.at(x, y, ch) * rec.image.at(x, y, ch);
        norm = std::sqrt(norm);
        if (ink) {
          ink_norm += norm;
          ++n_ink;
        } else {
          bg_norm += norm;
          ++n_bg;
        }
      }
    }
    REQUIRE(n_ink > 0);
    REQUIRE(n_bg > 0);
    CHECK(ink_norm / n_ink > bg_norm / n_bg);
  }
}

TEST_CASE("sample matches grid values at cell centers") {
  const scene::ImageRecord rec = make_scene(5);
  std::vector<double> out(rec.image.feature_dim);
  for (int y = 1; y < rec.image.height - 1; y += 7) {
    for (int x = 1; x < rec.image.width - 1; x += 7) {
      rec.image.sample(x + 0.5, y + 0.5, out.data());
      for (int ch = 0; ch < rec.image.feature_dim; ++ch)
        CHECK(out[ch] == doctest::Approx(rec.image.at(x, y, ch)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sample_jac matches central finite differences") {
  const scene::ImageRecord rec = make_scene(6);
  const int F = rec.image.feature_dim;
  std::vector<double> out(F), jx(F), jy(F), lo(F), hi(F);
  Rng rng(9);
  std::uniform_real_distribution<double> uni(2.0, 62.0);
  const double eps = 1e-6;
  for (int trial = 0; trial < 200; ++trial) {
    const double px = uni(rng), py = uni(rng);
    rec.image.sample_jac(px, py, out.data(), jx.data(), jy.data());
    rec.image.sample(px, py, lo.data());
    for (int ch = 0; ch < F; ++ch) CHECK(out[ch] == doctest::Approx(lo[ch]).epsilon(1e-12));
    rec.image.sample(px - eps, py, lo.data());
    rec.image.sample(px + eps, py, hi.data());
    for (int ch = 0; ch < F; ++ch) {
      const double fd = (hi[ch] - lo[ch]) / (2.0 * eps);
      CHECK(jx[ch] == doctest::Approx(fd).epsilon(1e-4));
    }
    rec.image.sample(px, py - eps, lo.data());
    rec.image.sample(px, py + eps, hi.data());
    for (int ch = 0; ch < F; ++ch) {
      const double fd = (hi[ch] - lo[ch]) / (2.0 * eps);
      CHECK(jy[ch] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("split_dataset fraction one keeps everything strong") {
  std::vector<scene::ImageRecord> recs;
  for (int i = 0; i < 20; ++i) {
    scene::ImageRecord r = make_scene(3000 + i);
    r.id = "r" + std::to_string(i);
    recs.push_back(std::move(r));
  }
  const scene::SplitDataset s = scene::split_dataset(recs, 1.0, 5, weak::WeakKind::Tight);
  CHECK(s.strong_set.size() == recs.size());
  CHECK(s.weak_set.empty());
  CHECK(s.weak_truth.empty());
}

TEST_CASE("split_dataset partitions exactly and weakens the remainder") {
  std::vector<scene::ImageRecord> recs;
  for (int i = 0; i < 50; ++i) {
    scene::ImageRecord r = make_scene(4000 + i);
    r.id = "r" + std::to_string(i);
    recs.push_back(std::move(r));
  }
  const scene::SplitDataset s = scene::split_dataset(recs, 0.1, 5, weak::WeakKind::Coarse);
  CHECK(s.strong_set.size() == 5);
  CHECK(s.weak_set.size() == 45);
  REQUIRE(s.weak_truth.size() == 45);

  std::set<std::string> seen;
  for (const scene::ImageRecord& r : s.strong_set) {
    CHECK(r.strong);
    CHECK_FALSE(r.weak);
    seen.insert(r.id);
  }
  for (std::size_t i = 0; i < s.weak_set.size(); ++i) {
    const scene::ImageRecord& r = s.weak_set[i];
    CHECK_FALSE(r.strong);
    REQUIRE(r.weak);
    CHECK(r.weak->kind == weak::WeakKind::Coarse);
    seen.insert(r.id);
    // Held-back truth must belong to this record: every coarse box covers at
    // least one truth polygon's bounding box center.
    for (const Box& cb : r.weak->boxes) {
      const bool backed = std::any_of(
          s.weak_truth[i].begin(), s.weak_truth[i].end(), [&](const Polygon& p) {
            const Point c = geom::bbox_of_polygon(p).center();
            return c.x >= cb.x_min && c.x <= cb.x_max && c.y >= cb.y_min && c.y <= cb.y_max;
          });
      CHECK(backed);
    }
  }
  CHECK(seen.size() == recs.size());  // disjoint union, no duplicates, no losses
}

TEST_CASE("split_dataset thousand-record ten-percent split") {
  std::vector<scene::ImageRecord> recs(1000);
  const scene::ImageRecord proto = make_scene(1);
  for (int i = 0; i < 1000; ++i) {
    recs[i] = proto;
    recs[i].id = "r" + std::to_string(i);
  }
  const scene::SplitDataset s = scene::split_dataset(recs, 0.1, 5, weak::WeakKind::Tag);
  CHECK(s.strong_set.size() == 100);
  CHECK(s.weak_set.size() == 900);
}

TEST_CASE("split_dataset rejects out-of-range fractions") {
  std::vector<scene::ImageRecord> recs(3, make_scene(1));
  CHECK_THROWS(scene::split_dataset(recs, -0.1, 5, weak::WeakKind::Tag));
  CHECK_THROWS(scene::split_dataset(recs, 1.1, 5, weak::WeakKind::Tag));
}
