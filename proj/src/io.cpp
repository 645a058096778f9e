#include "emdet/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace emdet::io {

using nlohmann::json;

namespace {

json weak_to_json(const weak::WeakLabel& w) {
  json boxes = json::array();
  for (const geom::Box& b : w.boxes) boxes.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  return json{{"kind", weak::to_string(w.kind)}, {"boxes", boxes}, {"has_text", w.has_text}};
}

weak::WeakLabel weak_from_json(const json& j) {
  weak::WeakLabel w;
  w.kind = weak::weak_kind_from_string(j.at("kind").get<std::string>());
  for (const json& b : j.at("boxes"))
    w.boxes.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                       b.at(3).get<double>()});
  w.has_text = j.at("has_text").get<bool>();
  return w;
}

}  // namespace

std::string dataset_to_json(const scene::Dataset& ds) {
  json records = json::array();
  for (const scene::ImageRecord& rec : ds.records) {
    json r{{"id", rec.id},
           {"width", rec.image.width},
           {"height", rec.image.height},
           {"features", rec.image.features}};
    if (rec.strong) {
      json polys = json::array();
      for (const scene::PolygonAnnotation& a : *rec.strong) {
        json poly = json::array();
        for (const geom::Point& p : a.polygon.vertices()) poly.push_back({p.x, p.y});
        polys.push_back(poly);
      }
      r["strong"] = polys;
    } else {
      r["strong"] = nullptr;
    }
    r["weak"] = rec.weak ? weak_to_json(*rec.weak) : json(nullptr);
    records.push_back(std::move(r));
  }
  return json{{"feature_dim", ds.feature_dim}, {"records", records}}.dump();
}

scene::Dataset dataset_from_json(const std::string& text) {
  const json j = json::parse(text);
  scene::Dataset ds;
  ds.feature_dim = j.at("feature_dim").get<int>();
  for (const json& r : j.at("records")) {
    scene::ImageRecord rec;
    rec.id = r.at("id").get<std::string>();
    rec.image.width = r.at("width").get<int>();
    rec.image.height = r.at("height").get<int>();
    rec.image.feature_dim = ds.feature_dim;
    rec.image.features = r.at("features").get<std::vector<double>>();
    const std::size_t expect =
        static_cast<std::size_t>(rec.image.width) * rec.image.height * ds.feature_dim;
    if (rec.image.features.empty())
      rec.image.features.assign(expect, 0.0);  // label-only sidecar records
    else if (rec.image.features.size() != expect)
      throw std::runtime_error("dataset_from_json: feature length mismatch for " + rec.id);
    if (!r.at("strong").is_null()) {
      rec.strong.emplace();
      for (const json& poly : r.at("strong")) {
        std::vector<geom::Point> v;
        for (const json& p : poly) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        rec.strong->push_back(scene::PolygonAnnotation{geom::Polygon(std::move(v))});
      }
    }
    if (!r.at("weak").is_null()) rec.weak = weak_from_json(r.at("weak"));
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

std::string detector_to_json(const det::DetectorState& st) {
  return json{{"feature_dim", st.feature_dim},
              {"loose_aug", st.loose_aug},
              {"config",
               {{"lambda1", st.config.lambda1},
                {"lambda2", st.config.lambda2},
                {"focal_gamma", st.config.focal_gamma}}},
              {"params", st.params}}
      .dump();
}

det::DetectorState detector_from_json(const std::string& text) {
  const json j = json::parse(text);
  det::DetectorState st;
  st.feature_dim = j.at("feature_dim").get<int>();
  st.loose_aug = j.at("loose_aug").get<bool>();
  st.config.lambda1 = j.at("config").at("lambda1").get<double>();
  st.config.lambda2 = j.at("config").at("lambda2").get<double>();
  st.config.focal_gamma = j.at("config").at("focal_gamma").get<double>();
  st.params = j.at("params").get<std::vector<double>>();
  if (st.params.size() != st.num_params())
    throw std::runtime_error("detector_from_json: parameter count mismatch");
  return st;
}

std::string reports_to_json(const std::vector<em::EmRoundReport>& reports,
                            const std::string& hash) {
  json rounds = json::array();
  for (const em::EmRoundReport& r : reports) {
    rounds.push_back({{"round", r.round},
                      {"pseudo_precision", r.pseudo_precision},
                      {"pseudo_recall", r.pseudo_recall},
                      {"eval_P", r.eval_p},
                      {"eval_R", r.eval_r},
                      {"eval_F", r.eval_f},
                      {"mean_loss", r.mean_loss}});
  }
  return json{{"config_hash", hash}, {"rounds", rounds}}.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<em::EmRoundReport>& reports) {
  std::ostringstream os;
  os << "round,pseudo_precision,pseudo_recall,eval_P,eval_R,eval_F,mean_loss\n";
  for (const em::EmRoundReport& r : reports) {
    os << r.round << ',' << json(r.pseudo_precision).dump() << ','
       << json(r.pseudo_recall).dump() << ',' << json(r.eval_p).dump() << ','
       << json(r.eval_r).dump() << ',' << json(r.eval_f).dump() << ','
       << json(r.mean_loss).dump() << '\n';
  }
  return os.str();
}

std::string metrics_to_json(const eval::Prf& p, double iou_thresh) {
  return json{{"P", p.precision}, {"R", p.recall}, {"F", p.f_measure}, {"iou_thresh", iou_thresh}}
             .dump(2) +
         "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void save_dataset(const scene::Dataset& ds, const std::string& path) {
  write_file(path, dataset_to_json(ds));
}
scene::Dataset load_dataset(const std::string& path) { return dataset_from_json(read_file(path)); }
void save_detector(const det::DetectorState& st, const std::string& path) {
  write_file(path, detector_to_json(st));
}
det::DetectorState load_detector(const std::string& path) {
  return detector_from_json(read_file(path));
}

std::string config_hash(const std::string& canonical_text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical_text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace emdet::io
