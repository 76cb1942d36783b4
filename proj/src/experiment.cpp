#include "thermoform/experiment.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace thermoform {

using io::Field;
using io::Json;

namespace {

Task parse_task(const Field& f) {
  const std::string t = f.as_string();
  if (t == "pressure-sweep") return Task::pressure_sweep;
  if (t == "equilibrium") return Task::equilibrium;
  if (t == "rate-sweep") return Task::rate_sweep;
  if (t == "ldp-report") return Task::ldp_report;
  if (t == "entropy-approx") return Task::entropy_approx;
  if (t == "2d-pressure") return Task::pressure_2d;
  f.fail("unknown task \"" + t +
         "\" (expected pressure-sweep, equilibrium, rate-sweep, ldp-report, entropy-approx or 2d-pressure)");
}

void require_primitive_1d(const ExperimentConfig& c, const Field& space) {
  if (c.space.dimension() != 1) space.fail("task " + to_string(c.task) + " needs a 1-D space");
  if (!c.space.is_primitive())
    space.fail("uniqueness premise fails: transition matrix is not primitive, so the equilibrium state is not unique");
}

void check_count(const Field& f, std::uint64_t count, const Limits& limits, const std::string& what) {
  if (count > limits.enumeration_cap)
    f.fail(what + " has " + std::to_string(count) + " items, exceeding enumeration_cap = " +
           std::to_string(limits.enumeration_cap));
}

void check_periodic(const Field& f, const ShiftSpace& s, int n, const Limits& limits) {
  const std::uint64_t c = count_periodic_points(s, n);
  check_count(f, c, limits, "periodic points of period " + std::to_string(n));
  if (c == 0) f.fail("no periodic points of period " + std::to_string(n));
}

PressureSweepParams parse_pressure_sweep(const ExperimentConfig& c, const Field& p) {
  p.allow_only({"routes", "n", "r"});
  PressureSweepParams out;
  out.ns = p.at("n").as_ints_in(1, 64);
  out.r = p.has("r") ? p.at("r").as_int_in(0, 32) : 0;
  if (auto routes = p.find("routes")) {
    routes->require_array();
    for (std::size_t i = 0; i < routes->size(); ++i) {
      const std::string r = routes->at(i).as_string();
      if (r == "periodic")
        out.routes.push_back(Route::periodic);
      else if (r == "separated")
        out.routes.push_back(Route::separated);
      else
        routes->at(i).fail("unknown route \"" + r + "\" (expected periodic or separated)");
    }
  } else {
    out.routes = {Route::periodic};
  }
  const Field ns = p.at("n");
  for (std::size_t i = 0; i < out.ns.size(); ++i)
    for (Route r : out.routes) {
      if (r == Route::periodic) check_periodic(ns.at(i), c.space, out.ns[i], c.limits);
      if (r == Route::separated)
        check_count(ns.at(i), count_admissible_words(c.space, out.ns[i] + out.r), c.limits, "separated set");
    }
  return out;
}

RateSweepParams parse_rate_sweep(const ExperimentConfig& c, const Field& p) {
  p.allow_only({"points", "grid"});
  RateSweepParams out;
  const std::size_t d = c.observables->dimension();
  if (auto pts = p.find("points")) {
    pts->require_array();
    for (std::size_t i = 0; i < pts->size(); ++i) {
      auto x = pts->at(i).as_doubles();
      if (x.size() != d) pts->at(i).fail("expected " + std::to_string(d) + " coordinates");
      out.points.push_back(std::move(x));
    }
  }
  if (auto grid = p.find("grid")) {
    grid->allow_only({"lo", "hi", "count"});
    if (d != 1) grid->fail("grid sweeps need a single observable");
    const double lo = grid->at("lo").as_double(), hi = grid->at("hi").as_double();
    const int count = grid->at("count").as_int_in(1, 100000);
    if (hi < lo) grid->at("hi").fail("must be >= lo");
    for (int i = 0; i < count; ++i) out.points.push_back({count == 1 ? lo : lo + (hi - lo) * i / (count - 1)});
  }
  if (out.points.empty()) p.fail("needs \"points\" or \"grid\"");
  return out;
}

LdpParams parse_ldp(const ExperimentConfig& c, const Field& p) {
  p.allow_only({"variant", "n", "box", "r"});
  LdpParams out;
  out.variant = io::with_path(p.at("variant"), [&] { return parse_variant(p.at("variant").as_string()); });
  out.ns = p.at("n").as_ints_in(1, 100000);
  out.r = p.has("r") ? p.at("r").as_int_in(0, 32) : 0;
  out.box = io::parse_box(p.at("box"));
  if (out.box.dimension() != c.observables->dimension())
    p.at("box").fail("box has " + std::to_string(out.box.dimension()) + " coordinates, observables have " +
                     std::to_string(c.observables->dimension()));
  if (out.box.dimension() > 2) p.at("box").fail("boxes support d <= 2");
  const Field ns = p.at("n");
  for (std::size_t i = 0; i < out.ns.size(); ++i) {
    if (out.variant == Variant::periodic) check_periodic(ns.at(i), c.space, out.ns[i], c.limits);
    if (out.variant == Variant::separated)
      check_count(ns.at(i), count_admissible_words(c.space, out.ns[i] + out.r), c.limits, "separated set");
  }
  return out;
}

EntropyApproxParams parse_entropy(const ExperimentConfig& c, const Field& p) {
  p.allow_only({"target", "max_window", "perturbation"});
  EntropyApproxParams out;
  out.target = io::parse_measure(c.space, p.at("target"), c.limits);
  out.max_window = p.at("max_window").as_int_in(1, 16);
  check_count(p.at("max_window"), count_admissible_words(c.space, out.max_window), c.limits, "cylinder family");
  if (count_admissible_words(c.space, out.max_window) > 2048)
    p.at("max_window").fail("cylinder family larger than 2048 observables");
  if (auto v = p.find("perturbation")) {
    out.perturbation = v->as_double();
    if (!(out.perturbation > 0.0 && out.perturbation < 0.5)) v->fail("must be in (0, 0.5)");
  }
  return out;
}

Pressure2dParams parse_2d(const ExperimentConfig& c, const Field& p) {
  p.allow_only({"interaction", "widths", "boxes"});
  Pressure2dParams out;
  const int k = c.space.alphabet_size();
  out.interaction = io::with_path(p.at("interaction"), [&] { return io::parse_interaction(k, p.at("interaction")); });
  if (auto w = p.find("widths")) {
    out.widths = w->as_ints_in(2, c.limits.max_strip_width);
    for (std::size_t i = 0; i < out.widths.size(); ++i)
      if (!checked_power(k, out.widths[i], c.limits.enumeration_cap))
        w->at(i).fail("k^width exceeds enumeration_cap = " + std::to_string(c.limits.enumeration_cap));
  }
  if (auto b = p.find("boxes")) {
    b->require_array();
    for (std::size_t i = 0; i < b->size(); ++i) {
      const auto sides = b->at(i).as_ints_in(1, 1000);
      if (sides.size() != 2) b->at(i).fail("expected [rows, cols]");
      if (!checked_power(k, sides[0] * sides[1], c.limits.box_budget))
        b->at(i).fail("box " + std::to_string(sides[0]) + "x" + std::to_string(sides[1]) + " needs k^" +
                      std::to_string(sides[0] * sides[1]) + " configurations, exceeding box_budget = " +
                      std::to_string(c.limits.box_budget));
      out.boxes.emplace_back(sides[0], sides[1]);
    }
  }
  if (out.widths.empty() && out.boxes.empty()) p.fail("needs \"widths\" or \"boxes\"");
  return out;
}

Json rows_to_json(const std::vector<std::string>& header, const std::vector<std::vector<Json>>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json o;
    for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
    out.push_back(o);
  }
  return out;
}

struct Output {
  const ExperimentConfig& config;
  std::filesystem::path dir;
  RunReport report;
  Json doc;

  explicit Output(const ExperimentConfig& c, std::filesystem::path d) : config(c), dir(std::move(d)) {
    doc["task"] = to_string(c.task);
    doc["name"] = c.name;
    doc["config"] = c.raw;
  }

  void csv(const std::string& suffix, const io::CsvWriter& w) {
    const auto path = dir / (config.name + suffix + ".csv");
    io::write_file(path, w.str());
    report.artifacts.push_back(path);
  }

  RunReport finish(const std::string& summary) {
    const auto path = dir / (config.name + ".json");
    io::write_file(path, doc.dump(2) + "\n");
    report.artifacts.insert(report.artifacts.begin(), path);
    report.summary = summary;
    return std::move(report);
  }
};

Limits with_jobs(Limits l, unsigned jobs) {
  l.jobs = jobs;
  return l;
}

RunReport run_pressure_sweep(const ExperimentConfig& c, Output& out, unsigned jobs) {
  const auto& p = std::get<PressureSweepParams>(c.params);
  const PressureResult spectral = pressure_spectral(c.space, *c.potential, c.limits);
  const double ref = spectral.value.value();
  out.doc["spectral"] = io::to_json(spectral);
  Json routes;
  std::ostringstream summary;
  summary << "pressure-sweep " << c.name << ": spectral " << io::format_number(ref);
  for (Route route : p.routes) {
    std::vector<std::optional<PressureResult>> results(p.ns.size());
    const Limits inner = with_jobs(c.limits, 1);
    parallel_for(p.ns.size(), jobs, [&](std::size_t i) {
      results[i] = route == Route::periodic ? pressure_periodic(c.space, *c.potential, p.ns[i], inner)
                                            : pressure_separated(c.space, *c.potential, p.ns[i], p.r, inner);
    });
    const std::vector<std::string> header{"n", "estimate", "spectral_reference", "abs_error"};
    io::CsvWriter csv(header);
    std::vector<std::vector<Json>> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const Extended& v = results[i]->value;
      const double err = v.is_finite() ? std::abs(v.value() - ref) : std::numeric_limits<double>::infinity();
      csv.row({std::to_string(p.ns[i]), io::format_extended(v), io::format_number(ref), io::format_number(err)});
      rows.push_back({p.ns[i], io::json_extended(v), io::json_number(ref), io::json_number(err)});
    }
    Json r;
    if (route == Route::separated) r["r"] = p.r;
    r["rows"] = rows_to_json(header, rows);
    routes[to_string(route)] = r;
    out.csv("_" + to_string(route), csv);
    summary << "; " << to_string(route) << " " << results.size() << " rows";
  }
  out.doc["routes"] = routes;
  return out.finish(summary.str());
}

RunReport run_equilibrium(const ExperimentConfig& c, Output& out) {
  const PressureResult p = pressure_spectral(c.space, *c.potential, c.limits);
  const MarkovMeasure mu = equilibrium_state(c.space, *c.potential, c.limits);
  out.doc["pressure"] = io::to_json(p);
  out.doc["measure"] = io::to_json(mu);
  out.doc["integral"] = io::json_number(integrate(mu, *c.potential));
  out.doc["variational_gap"] = io::json_number(variational_gap(c.space, *c.potential, mu, c.limits));
  io::CsvWriter csv({"state", "stationary"});
  for (std::size_t i = 0; i < mu.states().size(); ++i)
    csv.row({to_string(mu.states()[i]), io::format_number(mu.stationary()(static_cast<Eigen::Index>(i)))});
  out.csv("_stationary", csv);
  return out.finish("equilibrium " + c.name + ": pressure " + io::format_extended(p.value) + ", entropy " +
                    io::format_number(mu.entropy_rate()) + ", " + std::to_string(mu.states().size()) + " states");
}

RunReport run_rate_sweep(const ExperimentConfig& c, Output& out, unsigned jobs) {
  const auto& p = std::get<RateSweepParams>(c.params);
  const RateFunctionHandle handle(c.space, *c.potential, *c.observables, c.dual, c.limits);
  std::vector<RateResult> results(p.points.size());
  parallel_for(p.points.size(), jobs, [&](std::size_t i) { results[i] = handle.rate_at(p.points[i]); });
  const std::size_t d = handle.dimension();
  std::vector<std::string> header;
  for (std::size_t j = 0; j < d; ++j) header.push_back("x_" + std::to_string(j + 1));
  for (const char* h : {"rate", "status", "iterations", "gradient_norm"}) header.emplace_back(h);
  for (std::size_t j = 0; j < d; ++j) header.push_back("t_" + std::to_string(j + 1));
  io::CsvWriter csv(header);
  std::vector<std::vector<Json>> rows;
  int stalled = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    stalled += r.status == RateResult::Status::stalled;
    std::vector<std::string> cells;
    std::vector<Json> jrow;
    for (double x : p.points[i]) cells.push_back(io::format_number(x)), jrow.push_back(io::json_number(x));
    cells.push_back(io::format_extended(r.value));
    jrow.push_back(io::json_extended(r.value));
    cells.push_back(to_string(r.status));
    jrow.push_back(to_string(r.status));
    cells.push_back(std::to_string(r.iterations));
    jrow.push_back(r.iterations);
    cells.push_back(io::format_number(r.gradient_norm));
    jrow.push_back(io::json_number(r.gradient_norm));
    for (std::size_t j = 0; j < d; ++j) {
      const double t = j < r.t.size() ? r.t[j] : 0.0;
      cells.push_back(io::format_number(t));
      jrow.push_back(io::json_number(t));
    }
    csv.row(cells);
    rows.push_back(jrow);
  }
  out.doc["base_pressure"] = io::json_number(handle.base_pressure());
  Json eq = Json::array();
  for (double v : handle.equilibrium_moments()) eq.push_back(io::json_number(v));
  out.doc["equilibrium_moments"] = eq;
  out.doc["rows"] = rows_to_json(header, rows);
  out.csv("", csv);
  if (stalled) out.report.non_convergence = std::to_string(stalled) + " of " + std::to_string(results.size()) + " dual solves stalled; see the status column";
  return out.finish("rate-sweep " + c.name + ": " + std::to_string(results.size()) + " points, " +
                    std::to_string(stalled) + " stalled");
}

RunReport run_ldp(const ExperimentConfig& c, Output& out, unsigned jobs) {
  const auto& p = std::get<LdpParams>(c.params);
  LdpOptions options;
  options.r = p.r;
  options.dual = c.dual;
  options.limits = with_jobs(c.limits, jobs);
  const auto rows = ldp_report(c.space, *c.potential, *c.observables, p.box, p.ns, p.variant, options);
  const std::vector<std::string> header{"variant", "n", "box", "mass", "rate_estimate", "neg_inf_rate", "slack", "gap"};
  io::CsvWriter csv(header);
  std::vector<std::vector<Json>> jrows;
  for (const auto& r : rows) {
    csv.row({to_string(r.variant), std::to_string(r.n), r.box, io::format_number(r.mass), io::format_extended(r.rate_estimate),
             io::format_extended(r.neg_inf_rate), io::format_number(r.slack), io::format_extended(r.gap)});
    jrows.push_back({to_string(r.variant), r.n, r.box, io::json_number(r.mass), io::json_extended(r.rate_estimate),
                     io::json_extended(r.neg_inf_rate), io::json_number(r.slack), io::json_extended(r.gap)});
  }
  out.doc["rows"] = rows_to_json(header, jrows);
  out.csv("", csv);
  std::ostringstream s;
  s << "ldp-report " << c.name << ": " << to_string(p.variant) << ", " << rows.size() << " rows, -inf I over box "
    << (rows.empty() ? "n/a" : io::format_extended(rows.front().neg_inf_rate));
  return out.finish(s.str());
}

RunReport run_entropy(const ExperimentConfig& c, Output& out) {
  const auto& p = std::get<EntropyApproxParams>(c.params);
  ApproximationOptions options;
  options.perturbation = p.perturbation;
  options.dual = c.dual;
  options.limits = c.limits;
  const auto steps = entropy_approximation_sequence(c.space, *c.potential, *p.target, p.max_window, options);
  const std::vector<std::string> header{"window", "family_size", "perturbed", "converged",
                                        "moment_error", "entropy", "entropy_gap"};
  io::CsvWriter csv(header);
  Json jsteps = Json::array();
  int failed = 0;
  for (const auto& s : steps) {
    failed += !s.converged;
    csv.row({std::to_string(s.window), std::to_string(s.family_size), s.perturbed ? "true" : "false",
             s.converged ? "true" : "false", io::format_number(s.moment_error), io::format_number(s.entropy),
             io::format_number(s.entropy_gap)});
    Json j;
    j["window"] = s.window;
    j["family_size"] = s.family_size;
    j["perturbed"] = s.perturbed;
    j["converged"] = s.converged;
    j["moment_error"] = io::json_number(s.moment_error);
    j["entropy"] = io::json_number(s.entropy);
    j["entropy_gap"] = io::json_number(s.entropy_gap);
    j["diagnostics"] = s.diagnostics;
    if (s.measure) j["measure"] = io::to_json(*s.measure);
    jsteps.push_back(j);
  }
  out.doc["target"] = io::to_json(*p.target);
  out.doc["steps"] = jsteps;
  out.csv("", csv);
  if (failed) out.report.non_convergence = std::to_string(failed) + " approximation steps did not converge";
  return out.finish("entropy-approx " + c.name + ": " + std::to_string(steps.size()) + " windows, final entropy gap " +
                    io::format_number(steps.back().entropy_gap));
}

RunReport run_2d(const ExperimentConfig& c, Output& out, unsigned jobs) {
  const auto& p = std::get<Pressure2dParams>(c.params);
  const Limits limits = with_jobs(c.limits, jobs);
  std::vector<PressureResult> results;
  for (int w : p.widths) results.push_back(pressure_2d_strip(*p.interaction, w, limits));
  for (auto [rows, cols] : p.boxes) results.push_back(pressure_2d_box(*p.interaction, rows, cols, limits));
  const std::vector<std::string> header{"route", "width", "rows", "cols", "pressure"};
  io::CsvWriter csv(header);
  std::vector<std::vector<Json>> jrows;
  for (const auto& r : results) {
    const auto& q = r.parameters;
    csv.row({to_string(r.route), std::to_string(q.width), std::to_string(q.box_rows), std::to_string(q.box_cols),
             io::format_extended(r.value)});
    jrows.push_back({to_string(r.route), q.width, q.box_rows, q.box_cols, io::json_extended(r.value)});
  }
  out.doc["rows"] = rows_to_json(header, jrows);
  out.csv("", csv);
  return out.finish("2d-pressure " + c.name + ": " + std::to_string(results.size()) + " rows");
}

}  // namespace

std::string to_string(Task t) {
  switch (t) {
    case Task::pressure_sweep: return "pressure-sweep";
    case Task::equilibrium: return "equilibrium";
    case Task::rate_sweep: return "rate-sweep";
    case Task::ldp_report: return "ldp-report";
    case Task::entropy_approx: return "entropy-approx";
    case Task::pressure_2d: return "2d-pressure";
  }
  return "unknown";
}

ExperimentConfig parse_config(const Json& raw) {
  const Field root(raw, "");
  root.allow_only({"name", "task", "space", "potential", "observables", "parameters", "limits", "dual", "output", "jobs"});
  ExperimentConfig c;
  c.raw = raw;
  if (auto n = root.find("name")) {
    c.name = n->as_string();
    static const std::regex ok("[A-Za-z0-9_.-]+");
    if (!std::regex_match(c.name, ok) || c.name == "." || c.name == "..") n->fail("use letters, digits, '.', '_' or '-'");
  }
  c.task = parse_task(root.at("task"));
  if (auto l = root.find("limits")) c.limits = io::parse_limits(*l);
  if (auto d = root.find("dual")) c.dual = io::parse_dual(*d);
  if (auto j = root.find("jobs")) c.limits.jobs = static_cast<unsigned>(j->as_int_in(1, 1024));
  if (auto o = root.find("output")) {
    o->allow_only({"dir"});
    c.output_dir = o->at("dir").as_string();
  }
  const Field space = root.at("space");
  c.space = io::parse_space(space);

  const bool needs_observables = c.task == Task::rate_sweep || c.task == Task::ldp_report;
  if (c.task == Task::pressure_2d) {
    if (c.space.dimension() != 2) space.fail("2d-pressure needs \"dimension\": 2");
    if (root.has("potential")) root.at("potential").fail("2d-pressure takes parameters.interaction instead");
  } else {
    require_primitive_1d(c, space);
    c.potential = root.has("potential") ? io::parse_potential(c.space, root.at("potential"), c.limits)
                                        : Potential::zero(c.space, 1, c.limits);
  }
  if (needs_observables)
    c.observables = io::parse_observables(c.space, root.at("observables"), c.limits);
  else if (root.has("observables"))
    root.at("observables").fail("not used by task " + to_string(c.task));

  const Json empty = Json::object();
  const Field params = root.has("parameters") ? root.at("parameters") : Field(empty, "parameters");
  switch (c.task) {
    case Task::pressure_sweep: c.params = parse_pressure_sweep(c, params); break;
    case Task::equilibrium: params.allow_only({}); break;
    case Task::rate_sweep: c.params = parse_rate_sweep(c, params); break;
    case Task::ldp_report: c.params = parse_ldp(c, params); break;
    case Task::entropy_approx: c.params = parse_entropy(c, params); break;
    case Task::pressure_2d: c.params = parse_2d(c, params); break;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_json_file(path)); }

RunReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, unsigned jobs) {
  Output out(config, out_dir);
  jobs = std::max(1u, jobs);
  switch (config.task) {
    case Task::pressure_sweep: return run_pressure_sweep(config, out, jobs);
    case Task::equilibrium: return run_equilibrium(config, out);
    case Task::rate_sweep: return run_rate_sweep(config, out, jobs);
    case Task::ldp_report: return run_ldp(config, out, jobs);
    case Task::entropy_approx: return run_entropy(config, out);
    case Task::pressure_2d: return run_2d(config, out, jobs);
  }
  throw Error("unhandled task");
}

}  // namespace thermoform
