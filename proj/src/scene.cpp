#include "emdet/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emdet/rng.hpp"

namespace emdet::scene {

namespace {

// Smoothstep weight and its derivative; makes interpolation C1 so that
// position gradients are continuous across cell boundaries.
inline double smooth_w(double t) { return t * t * (3.0 - 2.0 * t); }
inline double smooth_dw(double t) { return 6.0 * t * (1.0 - t); }

struct InterpCtx {
  int x0, y0, x1, y1;
  double wx, wy, dwx, dwy;
  bool clamped_x, clamped_y;
};

InterpCtx interp_ctx(const SceneImage& img, double px, double py) {
  InterpCtx c{};
  double u = px - 0.5;
  double v = py - 0.5;
  c.clamped_x = u <= 0.0 || u >= img.width - 1;
  c.clamped_y = v <= 0.0 || v >= img.height - 1;
  u = std::clamp(u, 0.0, static_cast<double>(img.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(img.height - 1));
  c.x0 = std::min(static_cast<int>(u), img.width - 2);
  c.y0 = std::min(static_cast<int>(v), img.height - 2);
  if (img.width == 1) c.x0 = 0;
  if (img.height == 1) c.y0 = 0;
  c.x1 = std::min(c.x0 + 1, img.width - 1);
  c.y1 = std::min(c.y0 + 1, img.height - 1);
  const double tx = u - c.x0;
  const double ty = v - c.y0;
  c.wx = smooth_w(tx);
  c.wy = smooth_w(ty);
  c.dwx = c.clamped_x ? 0.0 : smooth_dw(tx);
  c.dwy = c.clamped_y ? 0.0 : smooth_dw(ty);
  return c;
}

geom::Point nearest_on_segment(geom::Point p, geom::Point a, geom::Point b) {
  const geom::Point d = b - a;
  const double len2 = d.x * d.x + d.y * d.y;
  if (len2 <= 0.0) return a;
  double t = ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return a + t * d;
}

}  // namespace

void SceneImage::sample(double px, double py, double* out) const {
  const InterpCtx c = interp_ctx(*this, px, py);
  for (int ch = 0; ch < feature_dim; ++ch) {
    const double f00 = at(c.x0, c.y0, ch), f10 = at(c.x1, c.y0, ch);
    const double f01 = at(c.x0, c.y1, ch), f11 = at(c.x1, c.y1, ch);
    const double top = f00 + c.wx * (f10 - f00);
    const double bot = f01 + c.wx * (f11 - f01);
    out[ch] = top + c.wy * (bot - top);
  }
}

void SceneImage::sample_jac(double px, double py, double* out, double* jac_x,
                            double* jac_y) const {
  const InterpCtx c = interp_ctx(*this, px, py);
  for (int ch = 0; ch < feature_dim; ++ch) {
    const double f00 = at(c.x0, c.y0, ch), f10 = at(c.x1, c.y0, ch);
    const double f01 = at(c.x0, c.y1, ch), f11 = at(c.x1, c.y1, ch);
    const double top = f00 + c.wx * (f10 - f00);
    const double bot = f01 + c.wx * (f11 - f01);
    out[ch] = top + c.wy * (bot - top);
    const double dtop = c.dwx * (f10 - f00);
    const double dbot = c.dwx * (f11 - f01);
    jac_x[ch] = dtop + c.wy * (dbot - dtop);
    jac_y[ch] = c.dwy * (bot - top);
  }
}

std::vector<geom::Polygon> polygons_of(const ImageRecord& rec) {
  std::vector<geom::Polygon> out;
  if (rec.strong) {
    for (const PolygonAnnotation& a : *rec.strong) out.push_back(a.polygon);
  }
  return out;
}

namespace {

geom::Polygon make_blob(Rng& rng, const SynthParams& p, geom::Point center, double size) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double rx = 0.5 * size;
  const double ry = 0.5 * size * (0.45 + 0.55 * uni(rng));
  const double phi = uni(rng) * 2.0 * M_PI;
  double amp[3], psi[3];
  for (int h = 0; h < 3; ++h) {
    amp[h] = (uni(rng) * 2.0 - 1.0) * p.curvature / (h + 2);
    psi[h] = uni(rng) * 2.0 * M_PI;
  }
  const int nv = 16;
  std::vector<geom::Point> v;
  for (int i = 0; i < nv; ++i) {
    const double th = 2.0 * M_PI * i / nv;
    double r = 1.0;
    for (int h = 0; h < 3; ++h) r += amp[h] * std::cos((h + 2) * th + psi[h]);
    r = std::max(r, 0.3);
    const double ex = rx * r * std::cos(th);
    const double ey = ry * r * std::sin(th);
    v.push_back({center.x + ex * std::cos(phi) - ey * std::sin(phi),
                 center.y + ex * std::sin(phi) + ey * std::cos(phi)});
  }
  return geom::Polygon(std::move(v));
}

geom::Polygon make_ribbon(Rng& rng, const SynthParams& p, geom::Point center, double size) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double len = size;
  const double halfw = std::max(1.2, len * (0.12 + 0.10 * uni(rng)));
  const double psi0 = uni(rng) * 2.0 * M_PI;
  const double bend = (uni(rng) * 2.0 - 1.0) * 4.0 * p.curvature;
  const int ns = 8;
  std::vector<geom::Point> spine(ns), normal(ns);
  geom::Point pos{0.0, 0.0};
  double heading = psi0;
  for (int i = 0; i < ns; ++i) {
    spine[i] = pos;
    normal[i] = {-std::sin(heading), std::cos(heading)};
    const double step = len / (ns - 1);
    pos = pos + step * geom::Point{std::cos(heading), std::sin(heading)};
    heading += bend / (ns - 1);
  }
  // Center the spine on the requested position.
  geom::Point mean{0.0, 0.0};
  for (const geom::Point& s : spine) mean = mean + (1.0 / ns) * s;
  std::vector<geom::Point> v;
  for (int i = 0; i < ns; ++i)
    v.push_back(center + (spine[i] - mean) + halfw * normal[i]);
  for (int i = ns - 1; i >= 0; --i)
    v.push_back(center + (spine[i] - mean) - halfw * normal[i]);
  return geom::Polygon(std::move(v));
}

}  // namespace

ImageRecord synth_scene(std::uint64_t rng_seed, const SynthParams& params) {
  Rng rng(rng_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> kdist(params.min_instances, params.max_instances);

  ImageRecord rec;
  rec.image.width = params.width;
  rec.image.height = params.height;
  rec.image.feature_dim = params.feature_dim;
  rec.image.features.assign(
      static_cast<std::size_t>(params.width) * params.height * params.feature_dim, 0.0);

  const int k = kdist(rng);
  std::vector<geom::Polygon> shapes;
  std::vector<geom::Box> boxes;
  int attempts = 0;
  while (static_cast<int>(shapes.size()) < k) {
    if (++attempts > 1000) throw std::runtime_error("synth_scene: placement failed");
    const double size = params.min_size + (params.max_size - params.min_size) * uni(rng);
    const geom::Point c{params.margin + size / 2 + uni(rng) * (params.width - 2 * params.margin - size),
                        params.margin + size / 2 + uni(rng) * (params.height - 2 * params.margin - size)};
    std::optional<geom::Polygon> maybe;
    try {
      if (uni(rng) < 0.5)
        maybe = make_blob(rng, params, c, size);
      else
        maybe = make_ribbon(rng, params, c, size);
    } catch (const std::invalid_argument&) {
      continue;  // a rare self-intersecting draw; resample
    }
    geom::Polygon shape = std::move(*maybe);
    const geom::Box b = geom::bbox_of_polygon(shape);
    if (b.x_min < params.margin || b.y_min < params.margin ||
        b.x_max > params.width - params.margin || b.y_max > params.height - params.margin)
      continue;
    bool clash = false;
    for (const geom::Box& other : boxes) {
      const geom::Box grown = geom::expand_box(other, 2.0 / std::max(other.width(), 1.0),
                                               2.0 / std::max(other.height(), 1.0));
      if (geom::box_iou(grown, b) > 0.0) clash = true;
    }
    if (clash) continue;
    shapes.push_back(std::move(shape));
    boxes.push_back(b);
  }

  // Per-instance nuisance factors (these make head estimation data-hungry:
  // the noise is shared across a whole instance, so averaging over cells of
  // one instance does not remove it).
  const std::size_t n_inst = shapes.size();
  std::vector<double> amp_center(n_inst), amp_ink(n_inst), amp_w(n_inst), amp_h(n_inst),
      amp_bnd(n_inst);
  for (std::size_t i = 0; i < n_inst; ++i) {
    amp_center[i] = std::max(0.2, 1.0 + params.inst_noise * gauss(rng));
    amp_ink[i] = std::max(0.2, 1.0 + params.inst_noise * gauss(rng));
    amp_w[i] = std::max(0.2, 1.0 + params.inst_noise * gauss(rng));
    amp_h[i] = std::max(0.2, 1.0 + params.inst_noise * gauss(rng));
    amp_bnd[i] = std::max(0.2, 1.0 + params.inst_noise * gauss(rng));
  }

  for (int y = 0; y < params.height; ++y) {
    for (int x = 0; x < params.width; ++x) {
      const geom::Point cell{x + 0.5, y + 0.5};
      // Ownership is by bounding box, which placement keeps disjoint; this
      // keeps the centerness channel unimodal even for bent shapes whose box
      // center falls outside the polygon itself.
      int owner = -1;
      bool inked = false;
      for (std::size_t i = 0; i < n_inst; ++i) {
        const geom::Box& b = boxes[i];
        if (cell.x >= b.x_min && cell.x <= b.x_max && cell.y >= b.y_min && cell.y <= b.y_max) {
          owner = static_cast<int>(i);
          inked = geom::point_in_polygon(cell, shapes[i].vertices());
          break;
        }
      }
      // Nearest boundary point over all instances (also identifies the
      // nearest instance for the boundary-vector channels).
      geom::Point nearest{cell.x + 64.0, cell.y};
      double best = 1e300;
      int near_inst = -1;
      for (std::size_t i = 0; i < n_inst; ++i) {
        const std::vector<geom::Point>& vs = shapes[i].vertices();
        for (std::size_t e = 0; e < vs.size(); ++e) {
          const geom::Point q = nearest_on_segment(cell, vs[e], vs[(e + 1) % vs.size()]);
          const double d = geom::dist(cell, q);
          if (d < best) {
            best = d;
            nearest = q;
            near_inst = static_cast<int>(i);
          }
        }
      }

      double f[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      if (owner >= 0) {
        const geom::Box& b = boxes[owner];
        const geom::Point bc = b.center();
        // Keep the centerness beacon narrow even for large shapes so its
        // local maximum stays unambiguous under cell noise.
        const double sigma = std::clamp((b.width() + b.height()) / 16.0, 1.2, 1.6);
        const double d2 = (cell.x - bc.x) * (cell.x - bc.x) + (cell.y - bc.y) * (cell.y - bc.y);
        f[0] = amp_center[owner] * std::exp(-d2 / (2.0 * sigma * sigma));
        f[1] = inked ? amp_ink[owner] : 0.0;
        f[2] = amp_w[owner] * b.width() / 16.0;
        f[3] = amp_h[owner] * b.height() / 16.0;
      }
      if (near_inst >= 0) {
        // The boundary-vector field is untouched where contours deform (within
        // six cells of an edge) and decays beyond, so far background cells
        // carry almost no signal and inked cells dominate the feature norm in
        // every scene.
        const double falloff = best <= 6.0 ? 1.0 : std::exp(-(best - 6.0) / 4.0);
        const double scale = amp_bnd[near_inst] * falloff;
        f[4] = std::clamp(scale * (nearest.x - cell.x) / 8.0, -1.5, 1.5);
        f[5] = std::clamp(scale * (nearest.y - cell.y) / 8.0, -1.5, 1.5);
      }
      f[6] = 0.5 * f[1];
      f[7] = 0.5 * f[0] - 0.3 * f[2];
      for (int c = 0; c < params.feature_dim && c < 8; ++c) {
        const double noise_scale = (c == 0) ? 0.3 * params.cell_noise
                                   : (c == 4 || c == 5) ? 0.5 * params.cell_noise
                                                        : params.cell_noise;
        rec.image.at(x, y, c) = f[c] + noise_scale * gauss(rng);
      }
    }
  }

  rec.strong.emplace();
  for (geom::Polygon& s : shapes) rec.strong->push_back(PolygonAnnotation{std::move(s)});
  return rec;
}

SplitDataset split_dataset(const std::vector<ImageRecord>& records, double strong_fraction,
                           std::uint64_t rng_seed, weak::WeakKind weak_kind) {
  if (strong_fraction < 0.0 || strong_fraction > 1.0)
    throw std::invalid_argument("split_dataset: fraction out of range");
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(rng_seed));
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_strong =
      static_cast<std::size_t>(std::lround(strong_fraction * records.size()));

  SplitDataset out;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const ImageRecord& rec = records[idx[r]];
    if (r < n_strong) {
      out.strong_set.push_back(rec);
      continue;
    }
    std::vector<geom::Polygon> polys = polygons_of(rec);
    ImageRecord weakened;
    weakened.id = rec.id;
    weakened.image = rec.image;
    switch (weak_kind) {
      case weak::WeakKind::Tight:
        weakened.weak = weak::gen_tight(polys);
        break;
      case weak::WeakKind::Loose:
        weakened.weak = weak::gen_loose(polys, derive_seed(rng_seed, rec.id));
        break;
      case weak::WeakKind::Coarse:
        weakened.weak = weak::gen_coarse(polys, rec.image.width, rec.image.height);
        break;
      case weak::WeakKind::Tag:
        weakened.weak = weak::gen_tag(polys);
        break;
    }
    out.weak_set.push_back(std::move(weakened));
    out.weak_truth.push_back(std::move(polys));
  }
  return out;
}

}  // namespace emdet::scene
