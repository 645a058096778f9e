#include "emdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emdet::det {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}
inline double smooth_l1_d(double x) {
  return std::abs(x) < 1.0 ? x : (x > 0 ? 1.0 : -1.0);
}

inline double clamp_prob(double p) { return std::clamp(p, 1e-7, 1.0 - 1e-7); }

geom::Box clip_box(const geom::Box& b, double w, double h) {
  return {std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h),
          std::clamp(b.x_max, 0.0, w), std::clamp(b.y_max, 0.0, h)};
}

struct DiamondPoints {
  geom::Point pts[4];  // top, right, bottom, left
};

DiamondPoints diamond_points(const geom::Box& b) {
  const geom::Point c = b.center();
  return {{{c.x, b.y_min}, {b.x_max, c.y}, {c.x, b.y_max}, {b.x_min, c.y}}};
}

// Octagon for midpoint extremes; cannot fail.
geom::Polygon fallback_octagon(const geom::Box& b) {
  const DiamondPoints d = diamond_points(b);
  return geom::octagon_from_extremes({d.pts[0], d.pts[3], d.pts[2], d.pts[1]}, b);
}

std::vector<geom::Point> convex_hull(std::vector<geom::Point> pts) {
  std::sort(pts.begin(), pts.end(), [](geom::Point a, geom::Point b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](geom::Point a, geom::Point b) {
                          return geom::dist(a, b) < 1e-9;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  auto cr = [](geom::Point o, geom::Point a, geom::Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<geom::Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cr(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cr(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Runs contour initialization + deformation for one box; returns 128 points.
std::vector<geom::Point> run_contour(const DetectorState& st, const scene::SceneImage& img,
                                     const geom::Box& box) {
  const int F = st.feature_dim;
  std::vector<double> phi(F);
  const DiamondPoints dia = diamond_points(box);
  geom::Point ex[4];
  for (int pt = 0; pt < 4; ++pt) {
    img.sample(dia.pts[pt].x, dia.pts[pt].y, phi.data());
    double off[2];
    for (int d = 0; d < 2; ++d) {
      double v = st.params[st.o_init_b(pt) + d];
      for (int c = 0; c < F; ++c) v += st.params[st.o_init_w(pt) + d * F + c] * phi[c];
      off[d] = v;
    }
    ex[pt] = {std::clamp(dia.pts[pt].x + off[0] * box.width(), box.x_min, box.x_max),
              std::clamp(dia.pts[pt].y + off[1] * box.height(), box.y_min, box.y_max)};
  }

  geom::Contour contour;
  try {
    const geom::Polygon oct =
        geom::octagon_from_extremes({ex[0], ex[3], ex[2], ex[1]}, box);
    contour = geom::resample_contour(oct, kContourPoints);
  } catch (const std::invalid_argument&) {
    contour = geom::resample_contour(fallback_octagon(box), kContourPoints);
  }

  const double clamp_off = 0.5 * box.diag();
  const int half = kWindow / 2;
  std::vector<double> feats(static_cast<std::size_t>(kContourPoints) * F);
  for (int it = 0; it < kDeformIters; ++it) {
    for (int i = 0; i < kContourPoints; ++i)
      img.sample(contour.points[i].x, contour.points[i].y, &feats[i * F]);
    std::vector<geom::Point> next(kContourPoints);
    for (int i = 0; i < kContourPoints; ++i) {
      double bar[2] = {0, 0};
      std::vector<double> phibar(F, 0.0);
      for (int k = -half; k <= half; ++k) {
        const int j = (i + k + kContourPoints) % kContourPoints;
        for (int c = 0; c < F; ++c) phibar[c] += feats[j * F + c];
      }
      for (int c = 0; c < F; ++c) phibar[c] /= kWindow;
      for (int d = 0; d < 2; ++d) {
        double v = st.params[st.o_deform_b(it) + d];
        for (int c = 0; c < F; ++c) v += st.params[st.o_deform_w(it) + d * F + c] * phibar[c];
        bar[d] = std::clamp(v, -clamp_off, clamp_off);
      }
      next[i] = {contour.points[i].x + bar[0], contour.points[i].y + bar[1]};
    }
    contour.points = std::move(next);
  }

  const geom::Box lim = geom::expand_box(box, 0.5, 0.5);
  for (geom::Point& p : contour.points) {
    p.x = std::clamp(p.x, lim.x_min, lim.x_max);
    p.y = std::clamp(p.y, lim.y_min, lim.y_max);
  }
  return contour.points;
}

geom::Polygon points_to_polygon(const std::vector<geom::Point>& pts) {
  try {
    return geom::Polygon(pts);
  } catch (const std::invalid_argument&) {
    std::vector<geom::Point> hull = convex_hull(pts);
    return geom::Polygon(hull);  // throws if hull is degenerate too
  }
}

}  // namespace

DetectorState make_detector(int feature_dim, LossConfig cfg) {
  DetectorState st;
  st.feature_dim = feature_dim;
  st.config = cfg;
  st.params.assign(st.num_params(), 0.0);
  return st;
}

geom::Box pretrain_loose_augmentation(const geom::Box& box, Rng& rng) {
  std::uniform_real_distribution<double> f(0.0, 0.2);
  const double fx = f(rng);
  const double fy = f(rng);
  return geom::expand_box(box, fx, fy);
}

geom::Box pretrain_loose_augmentation(const geom::Box& box, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return pretrain_loose_augmentation(box, rng);
}

geom::Polygon contour_from_box(const DetectorState& state, const scene::SceneImage& img,
                               const geom::Box& box) {
  const geom::Box b = clip_box(box, img.width, img.height);
  if (b.degenerate()) throw std::invalid_argument("contour_from_box: degenerate box");
  return points_to_polygon(run_contour(state, img, b));
}

std::vector<Candidate> infer(const DetectorState& state, const scene::SceneImage& img,
                             double score_floor) {
  const int W = img.width, H = img.height, F = state.feature_dim;
  std::vector<double> score(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double z = state.params[state.o_loc_b()];
      for (int c = 0; c < F; ++c) z += state.params[state.o_loc_w() + c] * img.at(x, y, c);
      score[static_cast<std::size_t>(y) * W + x] = sigmoid(z);
    }
  }

  std::vector<Candidate> out;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double s = score[static_cast<std::size_t>(y) * W + x];
      if (s < score_floor) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1 && peak; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
          if (score[static_cast<std::size_t>(ny) * W + nx] >= s) peak = false;
        }
      }
      if (!peak) continue;

      double pw = state.params[state.o_wh_b()];
      double ph = state.params[state.o_wh_b() + 1];
      for (int c = 0; c < F; ++c) {
        pw += state.params[state.o_wh_w() + c] * img.at(x, y, c);
        ph += state.params[state.o_wh_w() + F + c] * img.at(x, y, c);
      }
      pw = std::clamp(pw, 1.0, static_cast<double>(W));
      ph = std::clamp(ph, 1.0, static_cast<double>(H));
      const geom::Point ctr{x + 0.5, y + 0.5};
      const geom::Box box = clip_box(
          {ctr.x - pw / 2, ctr.y - ph / 2, ctr.x + pw / 2, ctr.y + ph / 2},
          W, H);
      if (box.degenerate()) continue;
      try {
        geom::Polygon poly = points_to_polygon(run_contour(state, img, box));
        if (poly.size() < 4) continue;
        out.push_back(Candidate{box, std::move(poly), s});
      } catch (const std::invalid_argument&) {
        continue;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return out;
}

LossBreakdown compute_loss(const DetectorState& state, const std::vector<TrainImage>& batch,
                           std::vector<double>* grad, bool force_unit_confidence,
                           Rng* aug_rng) {
  const int F = state.feature_dim;
  const double gamma = state.config.focal_gamma;
  const double l1 = state.config.lambda1;
  const double l2 = state.config.lambda2;
  if (grad) grad->assign(state.num_params(), 0.0);

  LossBreakdown out;

  std::vector<double> feat(F);
  for (const TrainImage& ti : batch) {
    const scene::SceneImage& img = *ti.image;
    const int W = img.width, H = img.height;
    const std::size_t ncell = static_cast<std::size_t>(W) * H;

    std::vector<double> conf(ti.instances.size());
    double conf_sum = 0.0;
    for (std::size_t i = 0; i < ti.instances.size(); ++i) {
      conf[i] = force_unit_confidence ? 1.0 : ti.instances[i].confidence;
      conf_sum += conf[i];
    }
    const double w_bg = ti.instances.empty() ? 1.0 : std::min(1.0, conf_sum);

    // --- localization: penalty-reduced focal loss on a Gaussian-splatted
    // center heatmap, plus L1 width/height at centers ---
    std::vector<double> target(ncell, 0.0);
    std::vector<geom::Box> boxes(ti.instances.size());
    std::vector<int> ctr_x(ti.instances.size()), ctr_y(ti.instances.size());
    std::vector<char> is_center(ncell, 0);
    for (std::size_t i = 0; i < ti.instances.size(); ++i) {
      boxes[i] = ti.instances[i].box ? *ti.instances[i].box
                                     : geom::bbox_of_polygon(ti.instances[i].polygon);
      const geom::Point c = boxes[i].center();
      ctr_x[i] = std::clamp(static_cast<int>(c.x), 0, W - 1);
      ctr_y[i] = std::clamp(static_cast<int>(c.y), 0, H - 1);
      is_center[static_cast<std::size_t>(ctr_y[i]) * W + ctr_x[i]] = 1;
      const double sigma = std::max(0.7, (boxes[i].width() + boxes[i].height()) / 12.0);
      const int rad = static_cast<int>(std::ceil(3.0 * sigma));
      for (int y = std::max(0, ctr_y[i] - rad); y <= std::min(H - 1, ctr_y[i] + rad); ++y) {
        for (int x = std::max(0, ctr_x[i] - rad); x <= std::min(W - 1, ctr_x[i] + rad); ++x) {
          const double d2 = (x - ctr_x[i]) * (x - ctr_x[i]) + (y - ctr_y[i]) * (y - ctr_y[i]);
          const double g = std::exp(-d2 / (2.0 * sigma * sigma));
          double& t = target[static_cast<std::size_t>(y) * W + x];
          t = std::max(t, g);
        }
      }
    }

    const double inv_cell = 1.0 / static_cast<double>(ncell);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t m = static_cast<std::size_t>(y) * W + x;
        if (is_center[m]) continue;  // handled per instance below
        double z = state.params[state.o_loc_b()];
        for (int c = 0; c < F; ++c) z += state.params[state.o_loc_w() + c] * img.at(x, y, c);
        const double p = clamp_prob(sigmoid(z));
        const double red = std::pow(1.0 - target[m], 4.0);
        out.l_det += inv_cell * w_bg * (-red * std::pow(p, gamma) * std::log1p(-p));
        if (grad) {
          const double dldp =
              -red * (gamma * std::pow(p, gamma - 1.0) * std::log1p(-p) - std::pow(p, gamma) / (1.0 - p));
          const double coeff = inv_cell * w_bg * dldp * p * (1.0 - p);
          for (int c = 0; c < F; ++c) (*grad)[state.o_loc_w() + c] += coeff * img.at(x, y, c);
          (*grad)[state.o_loc_b()] += coeff;
        }
      }
    }

    for (std::size_t i = 0; i < ti.instances.size(); ++i) {
      const double s = conf[i];
      const int x = ctr_x[i], y = ctr_y[i];
      double z = state.params[state.o_loc_b()];
      for (int c = 0; c < F; ++c) z += state.params[state.o_loc_w() + c] * img.at(x, y, c);
      const double p = clamp_prob(sigmoid(z));
      const double pos_w = kCenterWeight / static_cast<double>(ncell);
      out.l_det += pos_w * s * (-std::pow(1.0 - p, gamma) * std::log(p));
      if (grad) {
        const double dldp =
            gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p) - std::pow(1.0 - p, gamma) / p;
        const double coeff = pos_w * s * dldp * p * (1.0 - p);
        for (int c = 0; c < F; ++c) (*grad)[state.o_loc_w() + c] += coeff * img.at(x, y, c);
        (*grad)[state.o_loc_b()] += coeff;
      }

      // width/height regression at the center cell
      double pw = state.params[state.o_wh_b()];
      double ph = state.params[state.o_wh_b() + 1];
      for (int c = 0; c < F; ++c) {
        pw += state.params[state.o_wh_w() + c] * img.at(x, y, c);
        ph += state.params[state.o_wh_w() + F + c] * img.at(x, y, c);
      }
      const double ew = pw - boxes[i].width();
      const double eh = ph - boxes[i].height();
      out.l_det += s * kWhLossScale * (std::abs(ew) + std::abs(eh));
      if (grad) {
        const double cw = s * kWhLossScale * (ew > 0 ? 1.0 : (ew < 0 ? -1.0 : 0.0));
        const double ch = s * kWhLossScale * (eh > 0 ? 1.0 : (eh < 0 ? -1.0 : 0.0));
        for (int c = 0; c < F; ++c) {
          (*grad)[state.o_wh_w() + c] += cw * img.at(x, y, c);
          (*grad)[state.o_wh_w() + F + c] += ch * img.at(x, y, c);
        }
        (*grad)[state.o_wh_b()] += cw;
        (*grad)[state.o_wh_b() + 1] += ch;
      }
    }

    // --- contour initialization: extreme-point offsets from diamond points ---
    for (std::size_t i = 0; i < ti.instances.size(); ++i) {
      const double s = conf[i];
      geom::Box box = boxes[i];
      if (state.loose_aug && aug_rng) box = pretrain_loose_augmentation(box, *aug_rng);
      if (box.degenerate()) continue;
      const DiamondPoints dia = diamond_points(box);
      const geom::ExtremePoints ex = geom::extreme_points(ti.instances[i].polygon);
      const geom::Point exp[4] = {ex.top, ex.right, ex.bottom, ex.left};
      for (int pt = 0; pt < 4; ++pt) {
        img.sample(dia.pts[pt].x, dia.pts[pt].y, feat.data());
        const double tgt[2] = {(exp[pt].x - dia.pts[pt].x) / box.width(),
                               (exp[pt].y - dia.pts[pt].y) / box.height()};
        for (int d = 0; d < 2; ++d) {
          double v = state.params[state.o_init_b(pt) + d];
          for (int c = 0; c < F; ++c) v += state.params[state.o_init_w(pt) + d * F + c] * feat[c];
          const double e = v - tgt[d];
          out.l_cin += s * smooth_l1(e) / 8.0;
          if (grad) {
            const double coeff = l1 * s * smooth_l1_d(e) / 8.0;
            for (int c = 0; c < F; ++c) (*grad)[state.o_init_w(pt) + d * F + c] += coeff * feat[c];
            (*grad)[state.o_init_b(pt) + d] += coeff;
          }
        }
      }
    }

    // --- contour deformation: 3 chained iterations from the ground-truth
    // octagon; gradients flow through feature sampling positions ---
    for (std::size_t i = 0; i < ti.instances.size(); ++i) {
      const double s = conf[i];
      const geom::Box& box = boxes[i];
      if (box.degenerate()) continue;
      const geom::ExtremePoints ex = geom::extreme_points(ti.instances[i].polygon);
      geom::Contour cur;
      try {
        cur = geom::resample_contour(geom::octagon_from_extremes(ex, box), kContourPoints);
      } catch (const std::invalid_argument&) {
        cur = geom::resample_contour(fallback_octagon(box), kContourPoints);
      }
      const geom::Contour gt = geom::resample_contour(ti.instances[i].polygon, kContourPoints);

      const double clamp_off = 0.5 * box.diag();
      const int half = kWindow / 2;
      const int NP = kContourPoints;
      const double inv_np = 1.0 / NP;

      struct IterRec {
        std::vector<geom::Point> in_pts, out_pts;
        std::vector<double> phibar;          // NP x F
        std::vector<double> jx, jy;          // NP x F (at in_pts)
        std::vector<char> clamped;           // NP x 2
      };
      std::vector<IterRec> recs(kDeformIters);

      for (int it = 0; it < kDeformIters; ++it) {
        IterRec& r = recs[it];
        r.in_pts = cur.points;
        r.out_pts.resize(NP);
        r.phibar.assign(static_cast<std::size_t>(NP) * F, 0.0);
        r.jx.assign(static_cast<std::size_t>(NP) * F, 0.0);
        r.jy.assign(static_cast<std::size_t>(NP) * F, 0.0);
        r.clamped.assign(static_cast<std::size_t>(NP) * 2, 0);
        std::vector<double> phi_all(static_cast<std::size_t>(NP) * F);
        for (int j = 0; j < NP; ++j)
          img.sample_jac(r.in_pts[j].x, r.in_pts[j].y, &phi_all[j * F], &r.jx[j * F],
                         &r.jy[j * F]);
        for (int j = 0; j < NP; ++j) {
          for (int k = -half; k <= half; ++k) {
            const int q = (j + k + NP) % NP;
            for (int c = 0; c < F; ++c) r.phibar[j * F + c] += phi_all[q * F + c];
          }
          for (int c = 0; c < F; ++c) r.phibar[j * F + c] /= kWindow;
          double off[2];
          for (int d = 0; d < 2; ++d) {
            double v = state.params[state.o_deform_b(it) + d];
            for (int c = 0; c < F; ++c)
              v += state.params[state.o_deform_w(it) + d * F + c] * r.phibar[j * F + c];
            if (v > clamp_off) {
              v = clamp_off;
              r.clamped[j * 2 + d] = 1;
            } else if (v < -clamp_off) {
              v = -clamp_off;
              r.clamped[j * 2 + d] = 1;
            }
            off[d] = v;
          }
          r.out_pts[j] = {r.in_pts[j].x + off[0], r.in_pts[j].y + off[1]};
        }
        cur.points = r.out_pts;
        double lt = 0.0;
        for (int j = 0; j < NP; ++j) {
          lt += smooth_l1(r.out_pts[j].x - gt.points[j].x);
          lt += smooth_l1(r.out_pts[j].y - gt.points[j].y);
        }
        out.l_cdn += s * inv_np * lt;
      }

      if (grad) {
        std::vector<double> adj(static_cast<std::size_t>(NP) * 2, 0.0);
        for (int it = kDeformIters - 1; it >= 0; --it) {
          const IterRec& r = recs[it];
          for (int j = 0; j < NP; ++j) {
            adj[j * 2] += l2 * s * inv_np * smooth_l1_d(r.out_pts[j].x - gt.points[j].x);
            adj[j * 2 + 1] += l2 * s * inv_np * smooth_l1_d(r.out_pts[j].y - gt.points[j].y);
          }
          // Offset-path adjoint (zero where the clamp was active).
          std::vector<double> am(static_cast<std::size_t>(NP) * 2);
          for (int j = 0; j < NP; ++j)
            for (int d = 0; d < 2; ++d)
              am[j * 2 + d] = r.clamped[j * 2 + d] ? 0.0 : adj[j * 2 + d];
          for (int j = 0; j < NP; ++j) {
            for (int d = 0; d < 2; ++d) {
              (*grad)[state.o_deform_b(it) + d] += am[j * 2 + d];
              for (int c = 0; c < F; ++c)
                (*grad)[state.o_deform_w(it) + d * F + c] += am[j * 2 + d] * r.phibar[j * F + c];
            }
          }
          // Propagate to the previous contour.
          std::vector<double> next_adj(adj);  // identity term
          for (int j = 0; j < NP; ++j) {
            double sw[2] = {0.0, 0.0};
            for (int k = -half; k <= half; ++k) {
              const int q = (j + k + NP) % NP;
              sw[0] += am[q * 2];
              sw[1] += am[q * 2 + 1];
            }
            double gx = 0.0, gy = 0.0;
            for (int c = 0; c < F; ++c) {
              const double qc = state.params[state.o_deform_w(it) + c] * sw[0] +
                                state.params[state.o_deform_w(it) + F + c] * sw[1];
              gx += qc * r.jx[j * F + c];
              gy += qc * r.jy[j * F + c];
            }
            next_adj[j * 2] += gx / kWindow;
            next_adj[j * 2 + 1] += gy / kWindow;
          }
          adj = std::move(next_adj);
        }
      }
    }
  }

  out.total = out.l_det + l1 * out.l_cin + l2 * out.l_cdn;
  return out;
}

LossBreakdown train_step(DetectorState& state, const std::vector<TrainImage>& batch, double lr,
                         Rng* aug_rng) {
  std::vector<double> grad;
  const LossBreakdown lb = compute_loss(state, batch, &grad, false, aug_rng);
  if (!std::isfinite(lb.total)) throw std::runtime_error("train_step: non-finite loss");
  for (double g : grad)
    if (!std::isfinite(g)) throw std::runtime_error("train_step: non-finite gradient");
  for (std::size_t i = 0; i < state.params.size(); ++i) state.params[i] -= lr * grad[i];
  return lb;
}

std::vector<Candidate> oracle_detector(const std::vector<geom::Polygon>& truth,
                                       const NoiseSpec& noise, std::uint64_t rng_seed,
                                       double image_w, double image_h) {
  Rng rng(rng_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw_score = [&](double mean) {
    return std::clamp(mean + noise.score_std * gauss(rng), 0.0, 1.0);
  };

  std::vector<Candidate> out;
  for (const geom::Polygon& gt : truth) {
    if (uni(rng) < noise.drop_rate) continue;
    geom::Polygon poly = gt;
    if (noise.jitter_std > 0.0) {
      bool ok = false;
      for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
        std::vector<geom::Point> v = gt.vertices();
        for (geom::Point& p : v) {
          p.x += noise.jitter_std * gauss(rng);
          p.y += noise.jitter_std * gauss(rng);
        }
        try {
          poly = geom::Polygon(std::move(v));
          ok = true;
        } catch (const std::invalid_argument&) {
        }
      }
    }
    out.push_back(Candidate{geom::bbox_of_polygon(poly), poly, draw_score(noise.tp_score_mean)});
  }

  if (noise.fp_rate > 0.0) {
    std::poisson_distribution<int> pois(noise.fp_rate);
    const int n_fp = pois(rng);
    for (int i = 0; i < n_fp; ++i) {
      const double rx = 1.5 + 3.5 * uni(rng);
      const double ry = 1.5 + 3.5 * uni(rng);
      const geom::Point c{rx + uni(rng) * (image_w - 2 * rx), ry + uni(rng) * (image_h - 2 * ry)};
      std::vector<geom::Point> v;
      for (int j = 0; j < 12; ++j) {
        const double th = 2.0 * M_PI * j / 12;
        v.push_back({c.x + rx * std::cos(th), c.y + ry * std::sin(th)});
      }
      geom::Polygon poly(std::move(v));
      out.push_back(Candidate{geom::bbox_of_polygon(poly), std::move(poly),
                              draw_score(noise.fp_score_mean)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return out;
}

}  // namespace emdet::det
