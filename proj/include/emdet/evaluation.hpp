#ifndef EMDET_EVALUATION_HPP_
#define EMDET_EVALUATION_HPP_

#include <cstddef>
#include <vector>

#include "emdet/detector.hpp"
#include "emdet/geometry.hpp"

namespace emdet::eval {

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (detection, truth)
  std::vector<std::size_t> unmatched_dets;
  std::vector<std::size_t> unmatched_truths;
};

/// Greedy matching in descending score order; each detection takes the
/// highest-IoU unmatched truth with IoU >= threshold.
MatchResult match_detections(const std::vector<det::Candidate>& dets,
                             const std::vector<geom::Polygon>& truths,
                             double iou_thresh = 0.5);

struct Prf {
  double precision = 1.0;
  double recall = 1.0;
  double f_measure = 0.0;
};

/// P = |pairs|/n_dets (1 if none), R = |pairs|/n_truths (1 if none),
/// F = 2PR/(P+R) (0 if P+R = 0).
Prf prf(const MatchResult& m, std::size_t n_dets, std::size_t n_truths);

/// Running tally across a dataset split.
struct PrfAccumulator {
  std::size_t matched = 0;
  std::size_t n_dets = 0;
  std::size_t n_truths = 0;

  void add(const MatchResult& m, std::size_t dets, std::size_t truths) {
    matched += m.pairs.size();
    n_dets += dets;
    n_truths += truths;
  }
  Prf result() const;
};

}  // namespace emdet::eval

#endif
