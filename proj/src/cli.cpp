#include "emdet/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "emdet/io.hpp"

namespace emdet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void refuse_overwrite(const std::string& path, bool force) {
  if (!force && fs::exists(path))
    throw std::runtime_error("output exists (use --force to overwrite): " + path);
}

}  // namespace

void cmd_synth(const SynthOptions& opts) {
  refuse_overwrite(opts.out_path, opts.force);
  scene::Dataset ds;
  ds.feature_dim = opts.params.feature_dim;
  for (int i = 0; i < opts.count; ++i) {
    scene::ImageRecord rec = scene::synth_scene(derive_seed(opts.seed, std::to_string(i)),
                                                opts.params);
    rec.id = "scene-" + std::to_string(i);
    ds.records.push_back(std::move(rec));
  }
  io::save_dataset(ds, opts.out_path);
}

void cmd_weaken(const WeakenOptions& opts) {
  refuse_overwrite(opts.out_path, opts.force);
  const std::string truth_path = opts.out_path + ".truth.json";
  refuse_overwrite(truth_path, opts.force);

  scene::Dataset in = io::load_dataset(opts.in_path);
  scene::Dataset out, truth;
  out.feature_dim = truth.feature_dim = in.feature_dim;
  for (scene::ImageRecord& rec : in.records) {
    if (!rec.strong) throw std::runtime_error("cmd_weaken: record lacks strong labels: " + rec.id);
    std::vector<geom::Polygon> polys = scene::polygons_of(rec);

    scene::ImageRecord t;
    t.id = rec.id;
    t.image.width = rec.image.width;
    t.image.height = rec.image.height;
    t.image.feature_dim = in.feature_dim;
    t.image.features.assign(0, 0.0);
    t.strong = rec.strong;
    // Sidecar keeps labels only; drop the feature payload.
    truth.records.push_back(std::move(t));

    scene::ImageRecord w;
    w.id = rec.id;
    w.image = std::move(rec.image);
    switch (opts.kind) {
      case weak::WeakKind::Tight: w.weak = weak::gen_tight(polys); break;
      case weak::WeakKind::Loose:
        w.weak = weak::gen_loose(polys, derive_seed(opts.seed, rec.id));
        break;
      case weak::WeakKind::Coarse:
        w.weak = weak::gen_coarse(polys, w.image.width, w.image.height);
        break;
      case weak::WeakKind::Tag: w.weak = weak::gen_tag(polys); break;
    }
    out.records.push_back(std::move(w));
  }
  io::save_dataset(out, opts.out_path);
  io::save_dataset(truth, truth_path);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig cfg;
  const std::string text = io::read_file(path);
  cfg.config_text = text;
  std::istringstream is(text);
  std::string line;
  std::map<std::string, std::string> kv;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r");
      const std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("train_dataset")) cfg.train_dataset = *v;
  if (const auto* v = get("eval_dataset")) cfg.eval_dataset = *v;
  if (const auto* v = get("weak_kind")) cfg.weak_kind = weak::weak_kind_from_string(*v);
  if (const auto* v = get("strong_fraction")) cfg.strong_fraction = std::stod(*v);
  if (const auto* v = get("out_dir")) cfg.out_dir = *v;
  if (const auto* v = get("seed")) cfg.em.rng_seed = std::stoull(*v);
  if (const auto* v = get("confidence_threshold")) cfg.em.confidence_threshold = std::stod(*v);
  if (const auto* v = get("iou_threshold")) cfg.em.iou_threshold = std::stod(*v);
  if (const auto* v = get("rounds_tag_coarse")) cfg.em.rounds_tag_coarse = std::stoi(*v);
  if (const auto* v = get("rounds_tight_loose")) cfg.em.rounds_tight_loose = std::stoi(*v);
  if (const auto* v = get("epochs_per_mstep")) cfg.em.epochs_per_mstep = std::stoi(*v);
  if (const auto* v = get("batch_size")) cfg.em.batch_size = std::stoi(*v);
  if (const auto* v = get("learning_rate")) cfg.em.learning_rate = std::stod(*v);
  if (const auto* v = get("score_floor")) cfg.em.score_floor = std::stod(*v);
  if (const auto* v = get("eval_iou")) cfg.em.eval_iou = std::stod(*v);
  if (const auto* v = get("weighted_loss")) cfg.em.weighted_loss = (*v == "true" || *v == "1");
  if (const auto* v = get("round_lr_decay")) cfg.em.round_lr_decay = std::stod(*v);
  if (const auto* v = get("lambda1")) cfg.loss.lambda1 = std::stod(*v);
  if (const auto* v = get("lambda2")) cfg.loss.lambda2 = std::stod(*v);
  if (const auto* v = get("focal_gamma")) cfg.loss.focal_gamma = std::stod(*v);
  if (const auto* v = get("lr_schedule")) {
    cfg.em.lr_schedule.clear();
    std::istringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("bad lr_schedule entry: " + item);
      cfg.em.lr_schedule.emplace_back(std::stoi(item.substr(0, colon)),
                                      std::stod(item.substr(colon + 1)));
    }
  }
  if (cfg.train_dataset.empty() || cfg.eval_dataset.empty() || cfg.out_dir.empty())
    throw std::runtime_error("config must set train_dataset, eval_dataset and out_dir");
  return cfg;
}

std::vector<em::EmRoundReport> cmd_em(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const std::string rounds_json = (fs::path(cfg.out_dir) / "rounds.json").string();
  const std::string rounds_csv = (fs::path(cfg.out_dir) / "rounds.csv").string();
  const std::string model_path = (fs::path(cfg.out_dir) / "model.json").string();
  refuse_overwrite(rounds_json, cfg.force);
  refuse_overwrite(rounds_csv, cfg.force);
  refuse_overwrite(model_path, cfg.force);

  scene::Dataset train = io::load_dataset(cfg.train_dataset);
  scene::Dataset evalds = io::load_dataset(cfg.eval_dataset);
  if (train.feature_dim != evalds.feature_dim)
    throw std::runtime_error("cmd_em: feature dimension mismatch between datasets");

  em::EmDataset ds;
  std::vector<scene::ImageRecord> strong_candidates;
  for (scene::ImageRecord& rec : train.records) {
    if (rec.strong)
      strong_candidates.push_back(std::move(rec));
    else if (rec.weak) {
      ds.split.weak_set.push_back(std::move(rec));
      ds.split.weak_truth.emplace_back();  // truth unknown for pre-weakened input
    }
  }
  if (!strong_candidates.empty()) {
    scene::SplitDataset split = scene::split_dataset(strong_candidates, cfg.strong_fraction,
                                                     cfg.em.rng_seed, cfg.weak_kind);
    ds.split.strong_set = std::move(split.strong_set);
    for (std::size_t i = 0; i < split.weak_set.size(); ++i) {
      ds.split.weak_set.push_back(std::move(split.weak_set[i]));
      ds.split.weak_truth.push_back(std::move(split.weak_truth[i]));
    }
  }
  ds.eval_records = std::move(evalds.records);

  det::DetectorState st = det::make_detector(train.feature_dim, cfg.loss);
  // Random box expansion makes the contour heads robust to imprecise boxes;
  // predicted boxes at inference are imprecise for every supervision form.
  st.loose_aug = true;
  em::TrainableBackend backend(std::move(st));
  const std::vector<em::EmRoundReport> reports =
      em::run_em(ds, cfg.weak_kind, cfg.em, backend);

  const std::string hash = io::config_hash(cfg.config_text);
  io::write_file(rounds_json, io::reports_to_json(reports, hash));
  io::write_file(rounds_csv, io::reports_to_csv(reports));
  io::save_detector(backend.state(), model_path);
  return reports;
}

eval::Prf cmd_eval(const EvalOptions& opts) {
  if (!opts.out_metrics.empty()) refuse_overwrite(opts.out_metrics, opts.force);
  if (!opts.out_detections.empty()) refuse_overwrite(opts.out_detections, opts.force);

  const det::DetectorState st = io::load_detector(opts.model_path);
  const scene::Dataset ds = io::load_dataset(opts.dataset_path);
  if (ds.feature_dim != st.feature_dim)
    throw std::runtime_error("cmd_eval: feature dimension mismatch");

  eval::PrfAccumulator acc;
  json detections = json::array();
  for (const scene::ImageRecord& rec : ds.records) {
    const std::vector<det::Candidate> dets = det::infer(st, rec.image, opts.score_floor);
    const std::vector<geom::Polygon> truth = scene::polygons_of(rec);
    acc.add(eval::match_detections(dets, truth, opts.iou_thresh), dets.size(), truth.size());
    if (!opts.out_detections.empty()) {
      json cand_list = json::array();
      for (const det::Candidate& c : dets) {
        json poly = json::array();
        for (const geom::Point& p : c.polygon.vertices()) poly.push_back({p.x, p.y});
        cand_list.push_back({{"score", c.score},
                             {"box", {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max}},
                             {"polygon", poly}});
      }
      json truth_list = json::array();
      for (const geom::Polygon& t : truth) {
        json poly = json::array();
        for (const geom::Point& p : t.vertices()) poly.push_back({p.x, p.y});
        truth_list.push_back(poly);
      }
      detections.push_back({{"id", rec.id}, {"candidates", cand_list}, {"truth", truth_list}});
    }
  }
  const eval::Prf prf = acc.result();
  if (!opts.out_metrics.empty())
    io::write_file(opts.out_metrics, io::metrics_to_json(prf, opts.iou_thresh));
  if (!opts.out_detections.empty())
    io::write_file(opts.out_detections,
                   json{{"iou_thresh", opts.iou_thresh}, {"records", detections}}.dump(2) + "\n");
  return prf;
}

budget::Allocation cmd_budget(const BudgetOptions& opts) {
  const budget::Allocation a =
      budget::plan(opts.policy, opts.budget_seconds, opts.costs, opts.strong_base);
  if (!opts.out_path.empty()) {
    refuse_overwrite(opts.out_path, opts.force);
    io::write_file(opts.out_path,
                   json{{"poly", a.poly},
                        {"tight", a.tight},
                        {"loose", a.loose},
                        {"coarse", a.coarse},
                        {"tag", a.tag},
                        {"total_cost", a.total_cost},
                        {"feasible", a.feasible}}
                           .dump(2) +
                       "\n");
  }
  return a;
}

}  // namespace emdet::cli
