#include "emdet/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace emdet::eval {

MatchResult match_detections(const std::vector<det::Candidate>& dets,
                             const std::vector<geom::Polygon>& truths, double iou_thresh) {
  if (iou_thresh <= 0.0 || iou_thresh >= 1.0)
    throw std::invalid_argument("match_detections: threshold must be in (0,1)");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  MatchResult out;
  std::vector<char> truth_used(truths.size(), 0);
  std::vector<char> det_used(dets.size(), 0);
  for (std::size_t d : order) {
    double best = iou_thresh;
    std::ptrdiff_t best_t = -1;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (truth_used[t]) continue;
      const double iou = geom::polygon_iou(dets[d].polygon, truths[t]);
      if (iou >= best && (best_t < 0 || iou > best)) {
        best = iou;
        best_t = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (best_t >= 0) {
      truth_used[best_t] = 1;
      det_used[d] = 1;
      out.pairs.emplace_back(d, static_cast<std::size_t>(best_t));
    }
  }
  for (std::size_t d = 0; d < dets.size(); ++d)
    if (!det_used[d]) out.unmatched_dets.push_back(d);
  for (std::size_t t = 0; t < truths.size(); ++t)
    if (!truth_used[t]) out.unmatched_truths.push_back(t);
  return out;
}

Prf prf(const MatchResult& m, std::size_t n_dets, std::size_t n_truths) {
  Prf out;
  const double k = static_cast<double>(m.pairs.size());
  out.precision = n_dets == 0 ? 1.0 : k / static_cast<double>(n_dets);
  out.recall = n_truths == 0 ? 1.0 : k / static_cast<double>(n_truths);
  const double pr = out.precision + out.recall;
  out.f_measure = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

Prf PrfAccumulator::result() const {
  Prf out;
  out.precision = n_dets == 0 ? 1.0 : static_cast<double>(matched) / n_dets;
  out.recall = n_truths == 0 ? 1.0 : static_cast<double>(matched) / n_truths;
  const double pr = out.precision + out.recall;
  out.f_measure = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

}  // namespace emdet::eval
