#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "emdet/cli.hpp"
#include "emdet/io.hpp"

using namespace emdet;

int main(int argc, char** argv) {
  CLI::App app{"EM-based weakly-supervised polygon detection toolkit"};
  app.require_subcommand(1);

  cli::SynthOptions synth;
  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  c_synth->add_option("-n,--count", synth.count, "number of scenes");
  c_synth->add_option("-s,--seed", synth.seed, "rng seed");
  c_synth->add_option("-o,--out", synth.out_path, "output dataset JSON")->required();
  c_synth->add_option("--width", synth.params.width);
  c_synth->add_option("--height", synth.params.height);
  c_synth->add_option("--min-instances", synth.params.min_instances);
  c_synth->add_option("--max-instances", synth.params.max_instances);
  c_synth->add_option("--cell-noise", synth.params.cell_noise);
  c_synth->add_option("--inst-noise", synth.params.inst_noise);
  c_synth->add_flag("-f,--force", synth.force, "overwrite existing outputs");

  cli::WeakenOptions weaken;
  std::string weaken_kind = "tight";
  CLI::App* c_weaken = app.add_subcommand("weaken", "replace strong labels with weak ones");
  c_weaken->add_option("-i,--in", weaken.in_path, "input dataset")->required();
  c_weaken->add_option("-o,--out", weaken.out_path, "output dataset")->required();
  c_weaken->add_option("-k,--kind", weaken_kind, "tight|loose|coarse|tag");
  c_weaken->add_option("-s,--seed", weaken.seed, "rng seed");
  c_weaken->add_flag("-f,--force", weaken.force);

  std::string em_config;
  bool em_force = false;
  CLI::App* c_em = app.add_subcommand("em", "run an EM experiment from a config file");
  c_em->add_option("-c,--config", em_config, "key=value config file")->required();
  c_em->add_flag("-f,--force", em_force);

  cli::EvalOptions evalo;
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  c_eval->add_option("-m,--model", evalo.model_path)->required();
  c_eval->add_option("-d,--dataset", evalo.dataset_path)->required();
  c_eval->add_option("--metrics", evalo.out_metrics, "metrics JSON output");
  c_eval->add_option("--detections", evalo.out_detections, "detections JSON output");
  c_eval->add_option("--score-floor", evalo.score_floor);
  c_eval->add_option("--iou", evalo.iou_thresh);
  c_eval->add_flag("-f,--force", evalo.force);

  cli::BudgetOptions budgeto;
  std::string policy = "strong";
  std::string mixed_kind = "tight";
  double poly_fraction = 0.8;
  std::string costs_file;
  CLI::App* c_budget = app.add_subcommand("budget", "plan an annotation budget");
  c_budget->add_option("-p,--policy", policy, "strong|equal-time|equal-number|mixed");
  c_budget->add_option("-b,--budget", budgeto.budget_seconds, "budget in seconds");
  c_budget->add_option("--strong-base", budgeto.strong_base);
  c_budget->add_option("--poly-fraction", poly_fraction, "mixed policy only");
  c_budget->add_option("--weak-kind", mixed_kind, "mixed policy only");
  c_budget->add_option("--costs", costs_file, "JSON with per-image costs");
  c_budget->add_option("-o,--out", budgeto.out_path, "allocation JSON output");
  c_budget->add_flag("-f,--force", budgeto.force);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_synth) {
      cli::cmd_synth(synth);
      std::printf("wrote %s (%d scenes)\n", synth.out_path.c_str(), synth.count);
    } else if (*c_weaken) {
      weaken.kind = weak::weak_kind_from_string(weaken_kind);
      cli::cmd_weaken(weaken);
      std::printf("wrote %s and %s.truth.json\n", weaken.out_path.c_str(),
                  weaken.out_path.c_str());
    } else if (*c_em) {
      cli::ExperimentConfig cfg = cli::load_experiment_config(em_config);
      cfg.force = em_force;
      const auto reports = cli::cmd_em(cfg);
      for (const auto& r : reports)
        std::printf("round %d: P=%.4f R=%.4f F=%.4f loss=%.4f\n", r.round, r.eval_p, r.eval_r,
                    r.eval_f, r.mean_loss);
    } else if (*c_eval) {
      const eval::Prf p = cli::cmd_eval(evalo);
      std::printf("P=%.4f R=%.4f F=%.4f\n", p.precision, p.recall, p.f_measure);
    } else if (*c_budget) {
      if (policy == "strong") budgeto.policy.kind = budget::PolicyKind::Strong;
      else if (policy == "equal-time") budgeto.policy.kind = budget::PolicyKind::EqualTime;
      else if (policy == "equal-number") budgeto.policy.kind = budget::PolicyKind::EqualNumber;
      else if (policy == "mixed") budgeto.policy.kind = budget::PolicyKind::MixedFraction;
      else throw std::runtime_error("unknown policy: " + policy);
      budgeto.policy.poly_fraction = poly_fraction;
      budgeto.policy.weak_kind = weak::weak_kind_from_string(mixed_kind);
      if (!costs_file.empty()) {
        const auto j = nlohmann::json::parse(io::read_file(costs_file));
        budgeto.costs.polygon = j.value("polygon", budgeto.costs.polygon);
        budgeto.costs.tight = j.value("tight", budgeto.costs.tight);
        budgeto.costs.loose = j.value("loose", budgeto.costs.loose);
        budgeto.costs.coarse = j.value("coarse", budgeto.costs.coarse);
        budgeto.costs.tag = j.value("tag", budgeto.costs.tag);
      }
      const budget::Allocation a = cli::cmd_budget(budgeto);
      std::printf("poly=%ld tight=%ld loose=%ld coarse=%ld tag=%ld cost=%.1f%s\n", a.poly,
                  a.tight, a.loose, a.coarse, a.tag, a.total_cost,
                  a.feasible ? "" : " (infeasible)");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
