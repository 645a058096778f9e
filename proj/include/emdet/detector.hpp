#ifndef EMDET_DETECTOR_HPP_
#define EMDET_DETECTOR_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "emdet/geometry.hpp"
#include "emdet/rng.hpp"
#include "emdet/scene.hpp"

namespace emdet::det {

inline constexpr int kContourPoints = 128;
inline constexpr int kDeformIters = 3;
inline constexpr int kWindow = 9;  // circular neighborhood for contour features
inline constexpr double kWhLossScale = 0.1;
// The heatmap focal loss is averaged over cells; center terms get this extra
// weight so a handful of positives can balance thousands of background cells.
inline constexpr double kCenterWeight = 256.0;

struct Candidate {
  geom::Box box;
  geom::Polygon polygon;
  double score = 0.0;  // in [0, 1]
};

struct LossConfig {
  double lambda1 = 1.0;  // contour-init weight
  double lambda2 = 1.0;  // deformation weight
  double focal_gamma = 2.0;
};

struct LossBreakdown {
  double l_det = 0.0;
  double l_cin = 0.0;
  double l_cdn = 0.0;
  double total = 0.0;  // l_det + lambda1 * l_cin + lambda2 * l_cdn
};

/// All trainable parameters, stored flat. Heads: per-cell logistic scorer,
/// width/height regressor, extreme-point offset regressor (4 points), and
/// per-iteration contour offset regressor (3 iterations).
struct DetectorState {
  int feature_dim = 8;
  LossConfig config;
  bool loose_aug = false;  // expand boxes randomly before contour init training
  std::vector<double> params;

  std::size_t o_loc_w() const { return 0; }
  std::size_t o_loc_b() const { return static_cast<std::size_t>(feature_dim); }
  std::size_t o_wh_w() const { return o_loc_b() + 1; }                     // 2 x F
  std::size_t o_wh_b() const { return o_wh_w() + 2 * feature_dim; }        // 2
  std::size_t o_init_w(int pt) const { return o_wh_b() + 2 + pt * (2 * feature_dim + 2); }
  std::size_t o_init_b(int pt) const { return o_init_w(pt) + 2 * feature_dim; }
  std::size_t o_deform_w(int it) const {
    return o_init_w(4) + it * (2 * feature_dim + 2);
  }
  std::size_t o_deform_b(int it) const { return o_deform_w(it) + 2 * feature_dim; }
  std::size_t num_params() const { return o_deform_w(kDeformIters); }
};

DetectorState make_detector(int feature_dim, LossConfig cfg = {});

struct TrainInstance {
  geom::Polygon polygon;
  double confidence = 1.0;        // s in [0, 1]
  std::optional<geom::Box> box;   // annotated box; bbox of polygon when absent
};

struct TrainImage {
  const scene::SceneImage* image = nullptr;
  std::vector<TrainInstance> instances;
};

/// Full pipeline: heatmap peaks -> box regression -> octagon initialization ->
/// 3 deformation iterations. Candidates sorted by score, descending.
std::vector<Candidate> infer(const DetectorState& state, const scene::SceneImage& img,
                             double score_floor);

/// Stages 3-4 of infer starting from a given box (clipped to image bounds).
geom::Polygon contour_from_box(const DetectorState& state, const scene::SceneImage& img,
                               const geom::Box& box);

/// Composite confidence-weighted loss and, when grad != nullptr, its analytic
/// gradient with respect to every parameter (same layout as state.params).
/// force_unit_confidence computes the unweighted loss regardless of the
/// per-instance confidences.
LossBreakdown compute_loss(const DetectorState& state, const std::vector<TrainImage>& batch,
                           std::vector<double>* grad, bool force_unit_confidence = false,
                           Rng* aug_rng = nullptr);

/// One SGD step on the batch. Throws on non-finite loss.
LossBreakdown train_step(DetectorState& state, const std::vector<TrainImage>& batch, double lr,
                         Rng* aug_rng = nullptr);

/// Random box expansion with fx, fy ~ U[0, 0.2].
geom::Box pretrain_loose_augmentation(const geom::Box& box, std::uint64_t rng_seed);
geom::Box pretrain_loose_augmentation(const geom::Box& box, Rng& rng);

struct NoiseSpec {
  double drop_rate = 0.0;
  double jitter_std = 0.0;
  double fp_rate = 0.0;  // Poisson mean of false-positive candidates
  double tp_score_mean = 1.0;
  double fp_score_mean = 0.2;
  double score_std = 0.0;
};

/// Deterministic test double: emits noisy copies of the ground truth plus
/// random false positives.
std::vector<Candidate> oracle_detector(const std::vector<geom::Polygon>& truth,
                                       const NoiseSpec& noise, std::uint64_t rng_seed,
                                       double image_w = 64.0, double image_h = 64.0);

}  // namespace emdet::det

#endif
