// slue: keypoint uncertainty sets to pose uncertainty ellipsoids.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slue/errors.h"
#include "slue/io.h"
#include "slue/pnp.h"

using namespace slue;

namespace {

// JSON config files: top-level keys are global options, nested objects are
// subcommand sections, e.g. {"seed": 3, "bound": {"order": 2}}.
class ConfigJson : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return dump(app, default_also).dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json j;
    try {
      input >> j;
    } catch (const Json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> out;
    collect(j, "", {}, out);
    return out;
  }

 private:
  static Json dump(const CLI::App* app, bool default_also) {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? Json(res[0]) : Json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) j[sub->get_name()] = dump(sub, default_also);
    return j;
  }

  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  static void collect(const Json& j, const std::string& name, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& out) {
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) collect(*it, it.key(), parents, out);
      return;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      for (const Json& v : j) item.inputs.push_back(scalar(v));
    } else {
      item.inputs = {scalar(j)};
    }
    out.push_back(item);
  }
};

void emit(const std::string& path, const Json& j) { write_text(path, j.dump(2)); }

SlueSettings solver_settings(int max_iterations, bool verbose) {
  SlueSettings s;
  if (max_iterations > 0) s.engine.sdp.max_iterations = max_iterations;
  s.engine.sdp.verbose = verbose;
  return s;
}

struct Common {
  std::uint64_t seed = 0;
  int max_iterations = 0;
  bool verbose = false;
};

// --- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  std::string records;
  double alpha = 0.1;
  std::string norm = "infinity";
  std::string out = "-";
};

void run_calibrate(const CalibrateArgs& a) {
  const auto records = read_records_jsonl_file(a.records);
  const auto bounds = calibrate_all(records, a.alpha, norm_from_string(a.norm));
  Json j = to_json(bounds);
  j["n_records"] = records.size();
  emit(a.out, j);
}

// --- bound -----------------------------------------------------------------

struct BoundArgs {
  std::string observations;
  std::string bounds;
  std::string pose;
  bool pnp = false;
  std::string form;
  int order = 1;
  std::string split;
  std::string out = "-";
  std::string lmi_dump;
};

void run_bound(const BoundArgs& a, const Common& c) {
  const Json jo = read_json_file(a.observations);
  std::map<int, KeypointBound> bounds;
  if (!a.bounds.empty()) bounds = bounds_from_json(read_json_file(a.bounds));
  const ObservationSet obs = observations_from_json(jo, a.bounds.empty() ? nullptr : &bounds);

  Json pnp_info;
  Pose estimate;
  if (!a.pose.empty()) {
    estimate = pose_from_json(read_json_file(a.pose));
  } else if (a.pnp) {
    const PnpResult p = pnp_estimate(PnpProblem{drop_unbounded_keypoints(obs).obs, {}});
    estimate = p.pose;
    pnp_info = {{"pose", to_json(p.pose)},
                {"method", to_string(p.method)},
                {"order", p.order},
                {"tightness", p.tightness},
                {"message", p.message}};
  } else if (jo.contains("pose_estimate")) {
    estimate = pose_from_json(jo.at("pose_estimate"));
  } else {
    throw InputError("give a pose estimate with --pose or use --pnp");
  }

  const SetForm form = a.form.empty() ? default_form(a.order) : form_from_string(a.form);
  const SlueSettings settings = solver_settings(c.max_iterations, c.verbose);
  std::optional<SplitTarget> target;
  if (!a.split.empty()) target = split_target_from_string(a.split);

  if (!a.lmi_dump.empty()) {
    const FilteredObservations f = drop_unbounded_keypoints(obs);
    const QuadraticConstraintSet set = build_pose_set(f.obs, estimate, form, settings);
    EllipsoidObjective objective;
    if (target) {
      const int nr = form == SetForm::kQuat ? 4 : 9;
      objective = *target == SplitTarget::kRotationOnly ? EllipsoidObjective::sub(0, nr)
                                                        : EllipsoidObjective::sub(nr, nr + 3);
    }
    const sdp::Problem lmi = assemble_ellipsoid_lmi(set, pose_center(estimate, form), a.order - 1,
                                                    objective, settings.engine.affine_products);
    write_text(a.lmi_dump, lmi.to_triplets());
  }

  const SlueResult r = target ? slue_split(obs, estimate, form, a.order, *target, settings)
                              : slue_joint(obs, estimate, form, a.order, settings);
  Json j = to_json(r);
  if (!pnp_info.is_null()) j["pnp"] = pnp_info;
  emit(a.out, j);
  if (!r.ok()) std::cerr << "solve finished with status " << to_string(r.status) << "\n";
}

// --- project ---------------------------------------------------------------

struct ProjectArgs {
  std::string result;
  std::string out = "-";
  std::string csv;
  int points = 64;
};

void run_project(const ProjectArgs& a) {
  const StoredResult s = result_from_json(read_json_file(a.result));
  if (!s.joint.h.allFinite()) throw InputError("result has no finite shape matrix (status " + s.status + ")");
  const TranslationBound t = project_translation(s.joint);
  const AngularBound ang = project_axis_angle(s.joint);
  const BoundVolumes v = bound_volumes(t, ang);
  emit(a.out, to_json(t, ang, v));
  if (!a.csv.empty()) write_text(a.csv, ellipse_slices_csv(t, ang, a.points));
}

// --- coverage --------------------------------------------------------------

struct CoverageArgs {
  std::string scene;
  double alpha = 0.1;
  std::string norm = "infinity";
  int calibration = 1000;
  int eval = 500;
  int order = 1;
  std::string form;
  bool correlated = false;
  std::string noise;
  bool no_ellipsoids = false;
  bool gt_estimate = false;
  std::string out = "-";
};

void run_coverage(const CoverageArgs& a, const Common& c) {
  CoverageConfig cfg;
  if (!a.scene.empty()) cfg.scene = scene_config_from_json(read_json_file(a.scene));
  cfg.scene.seed = c.seed;
  if (a.correlated) cfg.scene.correlated = true;
  if (!a.noise.empty()) cfg.scene.noise_model = noise_model_from_string(a.noise);
  cfg.alpha = a.alpha;
  cfg.norm = norm_from_string(a.norm);
  cfg.n_calibration = a.calibration;
  cfg.n_eval = a.eval;
  cfg.order = a.order;
  if (!a.form.empty()) cfg.form = form_from_string(a.form);
  cfg.solve_ellipsoids = !a.no_ellipsoids;
  cfg.use_pnp = !a.gt_estimate;
  cfg.slue = solver_settings(c.max_iterations, c.verbose);
  const CoverageReport r = evaluate_coverage(cfg);
  Json j = to_json(r);
  j["scene"] = to_json(cfg.scene);
  emit(a.out, j);
}

// --- toy2d -----------------------------------------------------------------

struct ToyArgs {
  std::string set;
  std::string preset = "annulus";
  int max_order = 3;
  int grid = 401;
  std::string out = "-";
};

void run_toy(const ToyArgs& a) {
  Toy2dSet toy;
  if (!a.set.empty()) {
    toy = toy_from_json(read_json_file(a.set));
  } else if (a.preset == "annulus") {
    toy = toy_quarter_annulus();
  } else if (a.preset == "disk") {
    toy = toy_disk();
  } else {
    throw InputError("unknown preset '" + a.preset + "' (annulus or disk)");
  }
  emit(a.out, to_json(toy2d(toy, a.max_order, a.grid)));
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  int scenes = 10;
  std::vector<std::string> configs = {"rotmat:1", "quat:2"};
  int keypoints = 8;
  std::string format = "table";
  std::string out = "-";
};

void run_bench(const BenchArgs& a, const Common& c) {
  const SlueSettings settings = solver_settings(c.max_iterations, c.verbose);
  std::vector<Frame> frames;
  for (int i = 0; i < a.scenes; ++i) {
    SceneConfig sc;
    sc.n_keypoints = a.keypoints;
    sc.seed = derive_seed(c.seed, 3, static_cast<std::uint64_t>(i));
    const Scene s = generate_scene(sc);
    PnpSettings ps;
    ps.max_order = 1;
    frames.push_back({s.obs, pnp_estimate(PnpProblem{s.obs, {}}, ps).pose});
  }
  Json rows = Json::array();
  std::ostringstream table;
  table << "form    order  scenes  ok  mean_s   median_s  max_s\n";
  for (const std::string& spec : a.configs) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw InputError("bench configs look like form:order");
    const SetForm form = form_from_string(spec.substr(0, colon));
    int order = 0;
    try {
      order = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("bad order in '" + spec + "'");
    }
    const auto results = slue_batch(frames, form, order, settings);
    std::vector<double> t;
    int ok = 0;
    for (const auto& r : results) {
      t.push_back(r.solve_time_s);
      ok += r.ok() ? 1 : 0;
    }
    std::sort(t.begin(), t.end());
    double mean = 0.0;
    for (double x : t) mean += x;
    mean /= std::max<std::size_t>(1, t.size());
    const double median = t.empty() ? 0.0 : t[t.size() / 2];
    const double max = t.empty() ? 0.0 : t.back();
    rows.push_back({{"form", to_string(form)},
                    {"order", order},
                    {"scenes", t.size()},
                    {"ok", ok},
                    {"mean_s", mean},
                    {"median_s", median},
                    {"max_s", max}});
    char line[160];
    std::snprintf(line, sizeof line, "%-7s %5d  %6zu  %2d  %7.3f  %8.3f  %6.3f\n",
                  to_string(form).c_str(), order, t.size(), ok, mean, median, max);
    table << line;
  }
  if (a.format == "json") {
    emit(a.out, {{"keypoints", a.keypoints}, {"rows", rows}});
  } else {
    write_text(a.out, table.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose uncertainty ellipsoids from conformal keypoint bounds"};
  app.config_formatter(std::make_shared<ConfigJson>());
  app.set_config("--config", "", "JSON file with option values");
  app.require_subcommand(1);

  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--max-iterations", common.max_iterations, "Interior-point iteration cap");
  app.add_flag("--verbose", common.verbose, "Solver progress on stderr");
  app.fallthrough();

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Conformal radii from calibration records");
  c->add_option("--records", cal.records, "JSON-lines calibration records")->required();
  c->add_option("--alpha", cal.alpha, "Miscoverage level")->check(CLI::Range(0.0, 1.0));
  c->add_option("--norm", cal.norm, "infinity or two")->check(CLI::IsMember({"infinity", "two"}));
  c->add_option("-o,--out", cal.out, "Output file, - for stdout");

  BoundArgs bd;
  auto* b = app.add_subcommand("bound", "Pose uncertainty ellipsoid for one frame");
  b->add_option("--observations", bd.observations, "Observation JSON")->required();
  b->add_option("--bounds", bd.bounds, "Calibrated bounds JSON, used when no radii are given");
  auto* pose_opt = b->add_option("--pose", bd.pose, "Pose estimate JSON");
  b->add_flag("--pnp", bd.pnp, "Estimate the pose by PnP")->excludes(pose_opt);
  b->add_option("--form", bd.form, "rotmat or quat")->check(CLI::IsMember({"rotmat", "quat"}));
  b->add_option("--order", bd.order, "Relaxation order")->check(CLI::PositiveNumber);
  b->add_option("--split", bd.split, "Bound only rotation or translation")
      ->check(CLI::IsMember({"rotation", "translation"}));
  b->add_option("-o,--out", bd.out, "Output file, - for stdout");
  b->add_option("--lmi-dump", bd.lmi_dump, "Write the LMI as sparse triplets");

  ProjectArgs pj;
  auto* p = app.add_subcommand("project", "Translation and axis-angle bounds from a joint result");
  p->add_option("--result", pj.result, "Result JSON from bound")->required();
  p->add_option("-o,--out", pj.out, "Output file, - for stdout");
  p->add_option("--csv", pj.csv, "Write ellipse outlines as CSV");
  p->add_option("--points", pj.points, "Points per outline")->check(CLI::Range(3, 100000));

  CoverageArgs cv;
  auto* v = app.add_subcommand("coverage", "Empirical coverage on synthetic frames");
  v->add_option("--scene", cv.scene, "Scene config JSON");
  v->add_option("--alpha", cv.alpha, "Miscoverage level")->check(CLI::Range(0.0, 1.0));
  v->add_option("--norm", cv.norm, "infinity or two")->check(CLI::IsMember({"infinity", "two"}));
  v->add_option("--calibration", cv.calibration, "Calibration frames")->check(CLI::PositiveNumber);
  v->add_option("--eval", cv.eval, "Evaluation frames")->check(CLI::PositiveNumber);
  v->add_option("--order", cv.order, "Relaxation order")->check(CLI::PositiveNumber);
  v->add_option("--form", cv.form, "rotmat or quat")->check(CLI::IsMember({"rotmat", "quat"}));
  v->add_flag("--correlated", cv.correlated, "Same pixel error for every keypoint of a frame");
  v->add_option("--noise", cv.noise, "uniform or gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));
  v->add_flag("--no-ellipsoids", cv.no_ellipsoids, "Only keypoint and set coverage");
  v->add_flag("--gt-estimate", cv.gt_estimate, "Center ellipsoids at the ground truth instead of PnP");
  v->add_option("-o,--out", cv.out, "Output file, - for stdout");

  ToyArgs ty;
  auto* t = app.add_subcommand("toy2d", "Planar hierarchy demo");
  t->add_option("--set", ty.set, "Constraint file JSON");
  t->add_option("--preset", ty.preset, "annulus or disk when no file is given");
  t->add_option("--max-order", ty.max_order, "Highest order")->check(CLI::Range(1, 8));
  t->add_option("--grid", ty.grid, "Grid points per axis")->check(CLI::Range(3, 5001));
  t->add_option("-o,--out", ty.out, "Output file, - for stdout");

  BenchArgs bn;
  auto* n = app.add_subcommand("bench", "Solve-time table");
  n->add_option("--scenes", bn.scenes, "Scenes per configuration")->check(CLI::PositiveNumber);
  n->add_option("--configs", bn.configs, "form:order entries")->delimiter(',');
  n->add_option("--keypoints", bn.keypoints, "Keypoints per scene")->check(CLI::Range(3, 64));
  n->add_option("--format", bn.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  n->add_option("-o,--out", bn.out, "Output file, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c->parsed()) run_calibrate(cal);
    if (b->parsed()) run_bound(bd, common);
    if (p->parsed()) run_project(pj);
    if (v->parsed()) run_coverage(cv, common);
    if (t->parsed()) run_toy(ty);
    if (n->parsed()) run_bench(bn, common);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
