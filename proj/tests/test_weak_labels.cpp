#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "emdet/geometry.hpp"
#include "emdet/rng.hpp"
#include "emdet/weak_labels.hpp"

using namespace emdet;
using geom::Box;
using geom::Point;
using geom::Polygon;

namespace {

Polygon random_star(Rng& rng, const Point& center, double r_min, double r_max, int n = 10) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Point> v;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    const double r = r_min + (r_max - r_min) * uni(rng);
    v.push_back({center.x + r * std::cos(th), center.y + r * std::sin(th)});
  }
  return Polygon(std::move(v));
}

bool box_contains_polygon(const Box& b, const Polygon& p) {
  return std::all_of(p.vertices().begin(), p.vertices().end(), [&](const Point& pt) {
    return pt.x >= b.x_min - 1e-12 && pt.x <= b.x_max + 1e-12 && pt.y >= b.y_min - 1e-12 &&
           pt.y <= b.y_max + 1e-12;
  });
}

bool box_contains_box(const Box& outer, const Box& inner) {
  return outer.x_min <= inner.x_min + 1e-12 && outer.y_min <= inner.y_min + 1e-12 &&
         outer.x_max >= inner.x_max - 1e-12 && outer.y_max >= inner.y_max - 1e-12;
}

// Independent clustering oracle: single-linkage connectivity at the given
// linking distance. Used where the expected mean-shift outcome coincides
// with plain connectivity (well-separated or fully-overlapping groups).
std::vector<int> connectivity_clusters(const std::vector<Point>& pts, double link_dist) {
  std::vector<int> parent(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (geom::dist(pts[i], pts[j]) <= link_dist) parent[find(static_cast<int>(i))] =
          find(static_cast<int>(j));
  std::map<int, int> relabel;
  std::vector<int> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int root = find(static_cast<int>(i));
    auto [it, fresh] = relabel.try_emplace(root, static_cast<int>(relabel.size()));
    out[i] = it->second;
  }
  return out;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, nf] = fwd.try_emplace(a[i], b[i]);
    auto [g, ng] = bwd.try_emplace(b[i], a[i]);
    if (f->second != b[i] || g->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("weak kind string round trip") {
  for (weak::WeakKind k : {weak::WeakKind::Tight, weak::WeakKind::Loose, weak::WeakKind::Coarse,
                           weak::WeakKind::Tag})
    CHECK(weak::weak_kind_from_string(weak::to_string(k)) == k);
  CHECK_THROWS(weak::weak_kind_from_string("bogus"));
}

TEST_CASE("gen_tight empty and diamond") {
  const weak::WeakLabel empty = weak::gen_tight({});
  CHECK(empty.kind == weak::WeakKind::Tight);
  CHECK(empty.boxes.empty());

  const Polygon diamond({{1, 0}, {2, 1}, {1, 2}, {0, 1}});
  const weak::WeakLabel w = weak::gen_tight({diamond});
  REQUIRE(w.boxes.size() == 1);
  CHECK(w.boxes[0].x_min == 0.0);
  CHECK(w.boxes[0].y_min == 0.0);
  CHECK(w.boxes[0].x_max == 2.0);
  CHECK(w.boxes[0].y_max == 2.0);
}

TEST_CASE("gen_tight boxes contain their polygons") {
  Rng rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Polygon> polys;
    const int n = 1 + static_cast<int>(uni(rng) * 4);
    for (int i = 0; i < n; ++i)
      polys.push_back(random_star(rng, {20.0 * (i + 1), 10.0 + 5.0 * uni(rng)}, 2.0, 5.0));
    const weak::WeakLabel w = weak::gen_tight(polys);
    REQUIRE(w.boxes.size() == polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) {
      CHECK(box_contains_polygon(w.boxes[i], polys[i]));
      const Box ref = geom::bbox_of_polygon(polys[i]);
      CHECK(w.boxes[i].x_min == ref.x_min);
      CHECK(w.boxes[i].y_max == ref.y_max);
    }
  }
}

TEST_CASE("gen_loose determinism and strict containment") {
  Rng rng(12);
  std::vector<Polygon> polys;
  for (int i = 0; i < 5; ++i) polys.push_back(random_star(rng, {15.0 * (i + 1), 12.0}, 2.0, 5.0));
  const weak::WeakLabel a = weak::gen_loose(polys, 77);
  const weak::WeakLabel b = weak::gen_loose(polys, 77);
  const weak::WeakLabel tight = weak::gen_tight(polys);
  REQUIRE(a.boxes.size() == polys.size());
  for (std::size_t i = 0; i < polys.size(); ++i) {
    CHECK(a.boxes[i].x_min == b.boxes[i].x_min);
    CHECK(a.boxes[i].x_max == b.boxes[i].x_max);
    CHECK(a.boxes[i].y_min == b.boxes[i].y_min);
    CHECK(a.boxes[i].y_max == b.boxes[i].y_max);
    CHECK(a.boxes[i].x_min < tight.boxes[i].x_min);
    CHECK(a.boxes[i].x_max > tight.boxes[i].x_max);
    CHECK(a.boxes[i].y_min < tight.boxes[i].y_min);
    CHECK(a.boxes[i].y_max > tight.boxes[i].y_max);
  }
  const weak::WeakLabel c = weak::gen_loose(polys, 78);
  bool any_diff = false;
  for (std::size_t i = 0; i < polys.size(); ++i)
    if (a.boxes[i].x_min != c.boxes[i].x_min) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("gen_loose expansion factors follow the uniform law") {
  // Recover fx, fy from box widths: loose width = tight width * (1 + fx).
  // 1000 draws of U[0.1, 0.2] have mean 0.15 with stderr ~0.0009, so the
  // sample mean lands in [0.145, 0.155] with overwhelming probability.
  Rng rng(13);
  const Polygon p = random_star(rng, {50.0, 50.0}, 5.0, 10.0);
  const Box tight = geom::bbox_of_polygon(p);
  double sum_fx = 0.0, sum_fy = 0.0;
  double min_f = 1.0, max_f = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const weak::WeakLabel w = weak::gen_loose({p}, 1000 + i);
    const double fx = w.boxes[0].width() / tight.width() - 1.0;
    const double fy = w.boxes[0].height() / tight.height() - 1.0;
    sum_fx += fx;
    sum_fy += fy;
    min_f = std::min({min_f, fx, fy});
    max_f = std::max({max_f, fx, fy});
  }
  CHECK(sum_fx / n > 0.145);
  CHECK(sum_fx / n < 0.155);
  CHECK(sum_fy / n > 0.145);
  CHECK(sum_fy / n < 0.155);
  CHECK(min_f >= 0.1 - 1e-9);
  CHECK(max_f <= 0.2 + 1e-9);
}

TEST_CASE("mean_shift trivial inputs") {
  CHECK(weak::mean_shift({}, 1.0).empty());
  const std::vector<int> one = weak::mean_shift({{3.0, 4.0}}, 1.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 0);
}

TEST_CASE("mean_shift separates far groups and merges tight ones") {
  Rng rng(14);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double radius = 2.0;
    std::vector<Point> pts;
    const int per_group = 4 + trial % 4;
    const int groups = 2 + trial % 3;
    for (int g = 0; g < groups; ++g) {
      const Point c{10.0 * radius * g, 3.0 * uni(rng)};
      // Group diameter stays below radius/2 so within-group merging is certain.
      for (int i = 0; i < per_group; ++i)
        pts.push_back({c.x + 0.2 * radius * uni(rng), c.y + 0.2 * radius * uni(rng)});
    }
    const std::vector<int> got = weak::mean_shift(pts, radius);
    const std::vector<int> want = connectivity_clusters(pts, radius);
    CHECK(same_partition(got, want));
    CHECK(*std::max_element(got.begin(), got.end()) + 1 == groups);
  }
}

TEST_CASE("mean_shift single cluster when all points are close") {
  Rng rng(15);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double radius = 4.0;
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i)
    pts.push_back({100.0 + 0.2 * radius * uni(rng), 50.0 + 0.2 * radius * uni(rng)});
  const std::vector<int> got = weak::mean_shift(pts, radius);
  CHECK(std::set<int>(got.begin(), got.end()).size() == 1);
}

TEST_CASE("mean_shift invariant under permutation and translation") {
  Rng rng(16);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Point> pts;
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 5; ++i)
      pts.push_back({8.0 * g + 0.3 * uni(rng), 0.3 * uni(rng)});

  const std::vector<int> base = weak::mean_shift(pts, 1.5);

  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> shuffled;
  for (std::size_t i : perm) shuffled.push_back(pts[i]);
  const std::vector<int> got_perm = weak::mean_shift(shuffled, 1.5);
  std::vector<int> base_perm;
  for (std::size_t i : perm) base_perm.push_back(base[i]);
  CHECK(same_partition(got_perm, base_perm));

  std::vector<Point> moved;
  for (const Point& p : pts) moved.push_back({p.x + 123.4, p.y - 56.7});
  CHECK(same_partition(weak::mean_shift(moved, 1.5), base));
}

TEST_CASE("gen_coarse singleton equals tight box") {
  Rng rng(17);
  const Polygon p = random_star(rng, {30.0, 25.0}, 3.0, 6.0);
  const weak::WeakLabel w = weak::gen_coarse({p}, 64.0, 64.0);
  const Box t = geom::bbox_of_polygon(p);
  REQUIRE(w.boxes.size() == 1);
  CHECK(w.boxes[0].x_min == doctest::Approx(t.x_min).epsilon(1e-12));
  CHECK(w.boxes[0].x_max == doctest::Approx(t.x_max).epsilon(1e-12));
  CHECK(w.boxes[0].y_min == doctest::Approx(t.y_min).epsilon(1e-12));
  CHECK(w.boxes[0].y_max == doctest::Approx(t.y_max).epsilon(1e-12));
}

TEST_CASE("gen_coarse splits far instances and merges adjacent ones") {
  Rng rng(18);
  // Image 64x64: clustering radius is 0.3 * 64 = 19.2.
  const Polygon a = random_star(rng, {10.0, 10.0}, 2.0, 4.0);
  const Polygon far = random_star(rng, {54.0, 54.0}, 2.0, 4.0);  // center distance ~62
  const weak::WeakLabel split = weak::gen_coarse({a, far}, 64.0, 64.0);
  REQUIRE(split.boxes.size() == 2);
  const Box ta = geom::bbox_of_polygon(a);
  const Box tf = geom::bbox_of_polygon(far);
  CHECK((box_contains_box(split.boxes[0], ta) || box_contains_box(split.boxes[1], ta)));
  CHECK((box_contains_box(split.boxes[0], tf) || box_contains_box(split.boxes[1], tf)));

  const Polygon near = random_star(rng, {16.0, 12.0}, 2.0, 4.0);  // center distance ~6
  const weak::WeakLabel merged = weak::gen_coarse({a, near}, 64.0, 64.0);
  REQUIRE(merged.boxes.size() == 1);
  const Box want{std::min(ta.x_min, geom::bbox_of_polygon(near).x_min),
                 std::min(ta.y_min, geom::bbox_of_polygon(near).y_min),
                 std::max(ta.x_max, geom::bbox_of_polygon(near).x_max),
                 std::max(ta.y_max, geom::bbox_of_polygon(near).y_max)};
  CHECK(merged.boxes[0].x_min == doctest::Approx(want.x_min).epsilon(1e-12));
  CHECK(merged.boxes[0].x_max == doctest::Approx(want.x_max).epsilon(1e-12));
  CHECK(merged.boxes[0].y_min == doctest::Approx(want.y_min).epsilon(1e-12));
  CHECK(merged.boxes[0].y_max == doctest::Approx(want.y_max).epsilon(1e-12));
}

TEST_CASE("gen_coarse covers all tight boxes and never exceeds instance count") {
  Rng rng(19);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Polygon> polys;
    const int n = 1 + static_cast<int>(uni(rng) * 5);
    for (int i = 0; i < n; ++i) {
      const Point c{8.0 + 48.0 * uni(rng), 8.0 + 48.0 * uni(rng)};
      polys.push_back(random_star(rng, c, 1.5, 4.0));
    }
    const weak::WeakLabel w = weak::gen_coarse(polys, 64.0, 64.0);
    CHECK(w.boxes.size() <= polys.size());
    CHECK(!w.boxes.empty());
    for (const Polygon& p : polys) {
      const Box t = geom::bbox_of_polygon(p);
      const bool covered = std::any_of(w.boxes.begin(), w.boxes.end(),
                                       [&](const Box& cb) { return box_contains_box(cb, t); });
      CHECK(covered);
    }
  }
}

TEST_CASE("gen_tag presence flag") {
  CHECK_FALSE(weak::gen_tag({}).has_text);
  Rng rng(20);
  const Polygon a = random_star(rng, {10.0, 10.0}, 2.0, 4.0);
  const Polygon b = random_star(rng, {40.0, 40.0}, 2.0, 4.0);
  CHECK(weak::gen_tag({a}).has_text);
  CHECK(weak::gen_tag({a, b}).has_text);
  CHECK(weak::gen_tag({b, a}).has_text);
  CHECK(weak::gen_tag({a}).boxes.empty());
}
