#ifndef EMDET_EM_ENGINE_HPP_
#define EMDET_EM_ENGINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "emdet/detector.hpp"
#include "emdet/evaluation.hpp"
#include "emdet/scene.hpp"
#include "emdet/weak_labels.hpp"

namespace emdet::em {

struct EmConfig {
  double confidence_threshold = 0.5;  // S
  double iou_threshold = 0.5;         // H
  int rounds_tag_coarse = 3;
  int rounds_tight_loose = 1;
  int epochs_per_mstep = 20;
  // (epoch, multiplier), cumulative; default halves the rate at 40/60/75/85%
  // of the epoch budget.
  std::vector<std::pair<int, double>> lr_schedule = {{8, 0.5}, {12, 0.5}, {15, 0.5}, {17, 0.5}};
  int batch_size = 16;
  double learning_rate = 0.15;
  double score_floor = 0.5;   // inference floor used for evaluation
  double eval_iou = 0.5;      // matching threshold for P/R/F
  std::uint64_t rng_seed = 1;
  bool weighted_loss = true;  // confidence weighting of the M-step loss
  double round_lr_decay = 0.25;  // base-lr multiplier applied per optimization pass after the first
};

struct PseudoAnnotationSet {
  std::string record_id;
  std::vector<det::Candidate> items;
};

struct EmRoundReport {
  int round = 0;
  double pseudo_precision = 0.0;  // vs held-back truth, diagnostic only
  double pseudo_recall = 0.0;
  double eval_p = 0.0;
  double eval_r = 0.0;
  double eval_f = 0.0;
  double mean_loss = 0.0;
};

/// Detection model abstraction; the trainable detector is the production
/// implementation, the oracle backend a deterministic test double.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::vector<det::Candidate> infer_record(const scene::ImageRecord& rec,
                                                   double score_floor) const = 0;
  virtual geom::Polygon contour(const scene::ImageRecord& rec, const geom::Box& box) const = 0;
  virtual det::LossBreakdown train(const std::vector<det::TrainImage>& batch, double lr,
                                   Rng* aug_rng) = 0;
};

class TrainableBackend : public DetectorBackend {
 public:
  explicit TrainableBackend(det::DetectorState state) : state_(std::move(state)) {}

  std::vector<det::Candidate> infer_record(const scene::ImageRecord& rec,
                                           double score_floor) const override {
    return det::infer(state_, rec.image, score_floor);
  }
  geom::Polygon contour(const scene::ImageRecord& rec, const geom::Box& box) const override {
    return det::contour_from_box(state_, rec.image, box);
  }
  det::LossBreakdown train(const std::vector<det::TrainImage>& batch, double lr,
                           Rng* aug_rng) override {
    return det::train_step(state_, batch, lr, state_.loose_aug ? aug_rng : nullptr);
  }

  det::DetectorState& state() { return state_; }
  const det::DetectorState& state() const { return state_; }

 private:
  det::DetectorState state_;
};

/// Emits oracle_detector output per record; training is a no-op.
class OracleBackend : public DetectorBackend {
 public:
  OracleBackend(std::map<std::string, std::vector<geom::Polygon>> truth, det::NoiseSpec noise,
                std::uint64_t seed)
      : truth_(std::move(truth)), noise_(noise), seed_(seed) {}

  std::vector<det::Candidate> infer_record(const scene::ImageRecord& rec,
                                           double score_floor) const override;
  geom::Polygon contour(const scene::ImageRecord& rec, const geom::Box& box) const override;
  det::LossBreakdown train(const std::vector<det::TrainImage>&, double, Rng*) override {
    return {};
  }

 private:
  std::map<std::string, std::vector<geom::Polygon>> truth_;
  det::NoiseSpec noise_;
  std::uint64_t seed_;
};

// Candidate-list filters behind the E-steps (Tag keeps score > S; Coarse
// additionally requires max box IoU with a coarse box > H).
std::vector<det::Candidate> filter_tag(const std::vector<det::Candidate>& cands, double S);
std::vector<det::Candidate> filter_coarse(const std::vector<det::Candidate>& cands,
                                          const std::vector<geom::Box>& coarse_boxes, double S,
                                          double H);

PseudoAnnotationSet estep_tag(const DetectorBackend& backend, const scene::ImageRecord& rec,
                              const weak::WeakLabel& tag, double S);
PseudoAnnotationSet estep_coarse(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                 const weak::WeakLabel& coarse, double S, double H);
PseudoAnnotationSet estep_tight(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                const weak::WeakLabel& tight);
PseudoAnnotationSet estep_loose(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                const weak::WeakLabel& loose);

PseudoAnnotationSet run_estep(const DetectorBackend& backend, const scene::ImageRecord& rec,
                              const EmConfig& cfg);

/// Shuffled confidence-weighted SGD epochs over strong + pseudo records.
/// Returns the mean per-batch total loss. `boxes_are_annotations` marks pseudo
/// boxes as ground truth (tight/loose supervision) rather than predictions.
double mstep(DetectorBackend& backend, const std::vector<scene::ImageRecord>& strong,
             const std::vector<std::pair<const scene::ImageRecord*, PseudoAnnotationSet>>& pseudo,
             const EmConfig& cfg, int round, bool boxes_are_annotations = false);

eval::Prf evaluate(const DetectorBackend& backend, const std::vector<scene::ImageRecord>& records,
                   double score_floor, double iou_thresh);

struct EmDataset {
  scene::SplitDataset split;
  std::vector<scene::ImageRecord> eval_records;  // held-out, strong labels
};

/// Round 0 trains on strong data only; rounds 1..R alternate E-step and
/// M-step. One report per round, round 0 included.
std::vector<EmRoundReport> run_em(const EmDataset& dataset, weak::WeakKind weak_kind,
                                  const EmConfig& cfg, DetectorBackend& backend);

}  // namespace emdet::em

#endif
