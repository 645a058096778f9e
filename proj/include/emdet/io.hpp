#ifndef EMDET_IO_HPP_
#define EMDET_IO_HPP_

#include <string>
#include <vector>

#include "emdet/detector.hpp"
#include "emdet/em_engine.hpp"
#include "emdet/evaluation.hpp"
#include "emdet/scene.hpp"

namespace emdet::io {

std::string dataset_to_json(const scene::Dataset& ds);
scene::Dataset dataset_from_json(const std::string& text);

void save_dataset(const scene::Dataset& ds, const std::string& path);
scene::Dataset load_dataset(const std::string& path);

std::string detector_to_json(const det::DetectorState& st);
det::DetectorState detector_from_json(const std::string& text);

void save_detector(const det::DetectorState& st, const std::string& path);
det::DetectorState load_detector(const std::string& path);

std::string reports_to_json(const std::vector<em::EmRoundReport>& reports,
                            const std::string& config_hash);
std::string reports_to_csv(const std::vector<em::EmRoundReport>& reports);

std::string metrics_to_json(const eval::Prf& p, double iou_thresh);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// FNV-1a of the canonical config text; used to stamp outputs for provenance.
std::string config_hash(const std::string& canonical_text);

}  // namespace emdet::io

#endif
