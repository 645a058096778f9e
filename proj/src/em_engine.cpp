#include "emdet/em_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emdet::em {

std::vector<det::Candidate> OracleBackend::infer_record(const scene::ImageRecord& rec,
                                                        double score_floor) const {
  auto it = truth_.find(rec.id);
  const std::vector<geom::Polygon> empty;
  const std::vector<geom::Polygon>& truth = it == truth_.end() ? empty : it->second;
  std::vector<det::Candidate> cands = det::oracle_detector(
      truth, noise_, derive_seed(seed_, rec.id), rec.image.width, rec.image.height);
  std::erase_if(cands, [&](const det::Candidate& c) { return c.score < score_floor; });
  return cands;
}

geom::Polygon OracleBackend::contour(const scene::ImageRecord& rec, const geom::Box& box) const {
  auto it = truth_.find(rec.id);
  if (it != truth_.end()) {
    double best = 0.0;
    const geom::Polygon* best_poly = nullptr;
    for (const geom::Polygon& p : it->second) {
      const double iou = geom::box_iou(geom::bbox_of_polygon(p), box);
      if (iou > best) {
        best = iou;
        best_poly = &p;
      }
    }
    if (best_poly) return *best_poly;
  }
  return geom::diamond_from_box(box);
}

std::vector<det::Candidate> filter_tag(const std::vector<det::Candidate>& cands, double S) {
  std::vector<det::Candidate> out;
  for (const det::Candidate& c : cands)
    if (c.score > S) out.push_back(c);
  return out;
}

std::vector<det::Candidate> filter_coarse(const std::vector<det::Candidate>& cands,
                                          const std::vector<geom::Box>& coarse_boxes, double S,
                                          double H) {
  std::vector<det::Candidate> out;
  for (const det::Candidate& c : cands) {
    if (c.score <= S) continue;
    double best = 0.0;
    for (const geom::Box& g : coarse_boxes) best = std::max(best, geom::box_iou(c.box, g));
    if (best > H) out.push_back(c);
  }
  return out;
}

PseudoAnnotationSet estep_tag(const DetectorBackend& backend, const scene::ImageRecord& rec,
                              const weak::WeakLabel& tag, double S) {
  if (tag.kind != weak::WeakKind::Tag) throw std::invalid_argument("estep_tag: wrong weak kind");
  PseudoAnnotationSet out;
  out.record_id = rec.id;
  if (!tag.has_text) return out;
  out.items = filter_tag(backend.infer_record(rec, 0.0), S);
  return out;
}

PseudoAnnotationSet estep_coarse(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                 const weak::WeakLabel& coarse, double S, double H) {
  if (coarse.kind != weak::WeakKind::Coarse)
    throw std::invalid_argument("estep_coarse: wrong weak kind");
  PseudoAnnotationSet out;
  out.record_id = rec.id;
  out.items = filter_coarse(backend.infer_record(rec, 0.0), coarse.boxes, S, H);
  return out;
}

namespace {

PseudoAnnotationSet estep_from_boxes(const DetectorBackend& backend,
                                     const scene::ImageRecord& rec,
                                     const std::vector<geom::Box>& boxes) {
  PseudoAnnotationSet out;
  out.record_id = rec.id;
  for (const geom::Box& g : boxes)
    out.items.push_back(det::Candidate{g, backend.contour(rec, g), 1.0});
  return out;
}

}  // namespace

PseudoAnnotationSet estep_tight(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                const weak::WeakLabel& tight) {
  if (tight.kind != weak::WeakKind::Tight)
    throw std::invalid_argument("estep_tight: wrong weak kind");
  return estep_from_boxes(backend, rec, tight.boxes);
}

PseudoAnnotationSet estep_loose(const DetectorBackend& backend, const scene::ImageRecord& rec,
                                const weak::WeakLabel& loose) {
  if (loose.kind != weak::WeakKind::Loose)
    throw std::invalid_argument("estep_loose: wrong weak kind");
  return estep_from_boxes(backend, rec, loose.boxes);
}

PseudoAnnotationSet run_estep(const DetectorBackend& backend, const scene::ImageRecord& rec,
                              const EmConfig& cfg) {
  if (!rec.weak) throw std::invalid_argument("run_estep: record has no weak label");
  switch (rec.weak->kind) {
    case weak::WeakKind::Tag:
      return estep_tag(backend, rec, *rec.weak, cfg.confidence_threshold);
    case weak::WeakKind::Coarse:
      return estep_coarse(backend, rec, *rec.weak, cfg.confidence_threshold,
                          cfg.iou_threshold);
    case weak::WeakKind::Tight:
      return estep_tight(backend, rec, *rec.weak);
    case weak::WeakKind::Loose:
      return estep_loose(backend, rec, *rec.weak);
  }
  throw std::logic_error("run_estep: unreachable");
}

double mstep(DetectorBackend& backend, const std::vector<scene::ImageRecord>& strong,
             const std::vector<std::pair<const scene::ImageRecord*, PseudoAnnotationSet>>& pseudo,
             const EmConfig& cfg, int round, bool boxes_are_annotations) {
  struct PoolEntry {
    const scene::SceneImage* image;
    std::vector<det::TrainInstance> instances;
  };
  std::vector<PoolEntry> pool;
  for (const scene::ImageRecord& rec : strong) {
    PoolEntry e{&rec.image, {}};
    for (const geom::Polygon& p : scene::polygons_of(rec))
      e.instances.push_back(det::TrainInstance{p, 1.0});
    pool.push_back(std::move(e));
  }
  for (const auto& [rec, pseudo_set] : pseudo) {
    if (pseudo_set.items.empty()) continue;
    PoolEntry e{&rec->image, {}};
    for (const det::Candidate& c : pseudo_set.items) {
      const double s = cfg.weighted_loss ? c.score : 1.0;
      e.instances.push_back(det::TrainInstance{
          c.polygon, s,
          boxes_are_annotations ? std::optional<geom::Box>(c.box) : std::nullopt});
    }
    pool.push_back(std::move(e));
  }
  if (pool.empty()) return 0.0;

  Rng shuffle_rng(derive_seed(cfg.rng_seed, "mstep-shuffle-" + std::to_string(round)));
  Rng aug_rng(derive_seed(cfg.rng_seed, "mstep-aug-" + std::to_string(round)));

  double loss_sum = 0.0;
  std::size_t n_batches = 0;
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs_per_mstep; ++epoch) {
    double lr = cfg.learning_rate;
    for (const auto& [at_epoch, mult] : cfg.lr_schedule)
      if (epoch >= at_epoch) lr *= mult;
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<det::TrainImage> batch;
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < stop; ++i)
        batch.push_back(det::TrainImage{pool[order[i]].image, pool[order[i]].instances});
      const det::LossBreakdown lb = backend.train(batch, lr, &aug_rng);
      loss_sum += lb.total;
      ++n_batches;
    }
  }
  return n_batches > 0 ? loss_sum / static_cast<double>(n_batches) : 0.0;
}

eval::Prf evaluate(const DetectorBackend& backend, const std::vector<scene::ImageRecord>& records,
                   double score_floor, double iou_thresh) {
  eval::PrfAccumulator acc;
  for (const scene::ImageRecord& rec : records) {
    const std::vector<det::Candidate> dets = backend.infer_record(rec, score_floor);
    const std::vector<geom::Polygon> truth = scene::polygons_of(rec);
    acc.add(eval::match_detections(dets, truth, iou_thresh), dets.size(), truth.size());
  }
  return acc.result();
}

std::vector<EmRoundReport> run_em(const EmDataset& dataset, weak::WeakKind weak_kind,
                                  const EmConfig& cfg, DetectorBackend& backend) {
  if (dataset.split.strong_set.empty())
    throw std::invalid_argument("run_em: strong subset must be nonempty");
  const int rounds = (weak_kind == weak::WeakKind::Tag || weak_kind == weak::WeakKind::Coarse)
                         ? cfg.rounds_tag_coarse
                         : cfg.rounds_tight_loose;

  // All supervision forms get the same total training duration and the same
  // learning-rate trajectory: kinds that run fewer estimation rounds repeat
  // the per-round optimization pass, decaying the base rate between passes
  // exactly as multi-round kinds do between rounds.
  const int passes_per_round =
      rounds > 0 ? std::max(1, static_cast<int>(std::lround(
                          static_cast<double>(cfg.rounds_tag_coarse) / rounds)))
                 : 1;

  std::vector<EmRoundReport> reports;

  // Round 0: initialization on strongly annotated data only. A small strong
  // subset gets proportionally more epochs (capped) so the initial model is
  // trained for a comparable number of steps regardless of the split; a weak
  // initial model would flood the first E-step with false pseudo labels.
  {
    EmConfig init_cfg = cfg;
    const double total =
        static_cast<double>(dataset.split.strong_set.size() + dataset.split.weak_set.size());
    const double scale =
        std::clamp(total / static_cast<double>(dataset.split.strong_set.size()), 1.0, 2.0);
    init_cfg.epochs_per_mstep = static_cast<int>(std::lround(cfg.epochs_per_mstep * scale));
    for (auto& [at_epoch, mult] : init_cfg.lr_schedule)
      at_epoch = static_cast<int>(std::lround(at_epoch * scale));

    EmRoundReport rep;
    rep.round = 0;
    rep.mean_loss = mstep(backend, dataset.split.strong_set, {}, init_cfg, 0);
    const eval::Prf p = evaluate(backend, dataset.eval_records, cfg.score_floor, cfg.eval_iou);
    rep.eval_p = p.precision;
    rep.eval_r = p.recall;
    rep.eval_f = p.f_measure;
    reports.push_back(rep);
  }

  for (int round = 1; round <= rounds; ++round) {
    std::vector<std::pair<const scene::ImageRecord*, PseudoAnnotationSet>> pseudo;
    eval::PrfAccumulator pseudo_acc;
    for (std::size_t i = 0; i < dataset.split.weak_set.size(); ++i) {
      const scene::ImageRecord& rec = dataset.split.weak_set[i];
      PseudoAnnotationSet ps = run_estep(backend, rec, cfg);
      if (i < dataset.split.weak_truth.size()) {
        const std::vector<geom::Polygon>& truth = dataset.split.weak_truth[i];
        pseudo_acc.add(eval::match_detections(ps.items, truth, cfg.eval_iou), ps.items.size(),
                       truth.size());
      }
      pseudo.emplace_back(&rec, std::move(ps));
    }

    EmRoundReport rep;
    rep.round = round;
    const eval::Prf pq = pseudo_acc.result();
    rep.pseudo_precision = pq.precision;
    rep.pseudo_recall = pq.recall;
    const bool annotated_boxes =
        weak_kind == weak::WeakKind::Tight || weak_kind == weak::WeakKind::Loose;
    // Later passes fine-tune an already-converged model: restarting each
    // M-step at the full base rate can undo earlier progress, so the base
    // rate decays geometrically across optimization passes.
    double loss_sum = 0.0;
    for (int pass = 0; pass < passes_per_round; ++pass) {
      const int global_pass = (round - 1) * passes_per_round + pass;
      EmConfig this_pass = cfg;
      this_pass.learning_rate *= std::pow(cfg.round_lr_decay, global_pass);
      loss_sum += mstep(backend, dataset.split.strong_set, pseudo, this_pass, global_pass + 1,
                        annotated_boxes);
    }
    rep.mean_loss = loss_sum / passes_per_round;
    const eval::Prf p = evaluate(backend, dataset.eval_records, cfg.score_floor, cfg.eval_iou);
    rep.eval_p = p.precision;
    rep.eval_r = p.recall;
    rep.eval_f = p.f_measure;
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace emdet::em
