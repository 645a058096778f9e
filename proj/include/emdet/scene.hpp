#ifndef EMDET_SCENE_HPP_
#define EMDET_SCENE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emdet/geometry.hpp"
#include "emdet/weak_labels.hpp"

namespace emdet::scene {

/// Dense per-cell feature grid. Cell (x, y) holds feature_dim values located
/// at the cell center (x + 0.5, y + 0.5).
struct SceneImage {
  int width = 0;
  int height = 0;
  int feature_dim = 0;
  std::vector<double> features;  // [(y * width + x) * feature_dim + c]

  double at(int x, int y, int c) const {
    return features[(static_cast<std::size_t>(y) * width + x) * feature_dim + c];
  }
  double& at(int x, int y, int c) {
    return features[(static_cast<std::size_t>(y) * width + x) * feature_dim + c];
  }

  /// Smoothed bilinear interpolation at a continuous point (C1 in position).
  void sample(double px, double py, double* out) const;

  /// Interpolated value plus spatial Jacobian d out[c] / d (px, py).
  void sample_jac(double px, double py, double* out, double* jac_x, double* jac_y) const;
};

struct PolygonAnnotation {
  geom::Polygon polygon;
};

struct ImageRecord {
  std::string id;
  SceneImage image;
  std::optional<std::vector<PolygonAnnotation>> strong;
  std::optional<weak::WeakLabel> weak;
};

struct Dataset {
  int feature_dim = 0;
  std::vector<ImageRecord> records;
};

struct SynthParams {
  int width = 64;
  int height = 64;
  int feature_dim = 8;
  int min_instances = 1;
  int max_instances = 4;
  double min_size = 9.0;    // instance extent range, scene units
  double max_size = 22.0;
  double curvature = 0.25;
  double cell_noise = 0.12;       // iid per-cell channel noise
  double inst_noise = 0.25;      // per-instance multiplicative noise
  double margin = 3.0;           // border margin / inter-instance gap
};

/// Places non-overlapping smooth shapes and renders the feature grid.
/// Throws std::runtime_error if placement fails after 1000 attempts.
ImageRecord synth_scene(std::uint64_t rng_seed, const SynthParams& params);

struct SplitDataset {
  std::vector<ImageRecord> strong_set;
  std::vector<ImageRecord> weak_set;                       // weak label attached, strong removed
  std::vector<std::vector<geom::Polygon>> weak_truth;      // held-back truth per weak record
};

/// Random partition; weak records get labels of the given kind generated from
/// their (removed) polygons.
SplitDataset split_dataset(const std::vector<ImageRecord>& records, double strong_fraction,
                           std::uint64_t rng_seed, weak::WeakKind weak_kind);

std::vector<geom::Polygon> polygons_of(const ImageRecord& rec);

}  // namespace emdet::scene

#endif
