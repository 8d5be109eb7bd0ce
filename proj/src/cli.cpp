#include "finsler/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "finsler/fixtures.hpp"
#include "finsler/parallel.hpp"

namespace finsler::cli {

namespace {

using json = nlohmann::ordered_json;

enum class Status { pass, fail, inconclusive };

std::string status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

int exit_for(Status s) {
  switch (s) {
    case Status::pass: return ExitCode::pass;
    case Status::fail: return ExitCode::fail;
    case Status::inconclusive: return ExitCode::inconclusive;
  }
  return ExitCode::inconclusive;
}

// fail dominates inconclusive dominates pass.
Status combine(Status a, Status b) {
  if (a == Status::fail || b == Status::fail) return Status::fail;
  if (a == Status::inconclusive || b == Status::inconclusive) return Status::inconclusive;
  return Status::pass;
}

struct Check {
  Status status = Status::pass;
  json body;
  std::string headline;  // for the stderr summary
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// t[a][b][c] = t^a_bc
json to_json(const Tensor3& t) {
  const int n = t.dimension();
  json a = json::array();
  for (int i = 0; i < n; ++i) {
    json m = json::array();
    for (int j = 0; j < n; ++j) {
      json row = json::array();
      for (int k = 0; k < n; ++k) row.push_back(t(i, j, k));
      m.push_back(std::move(row));
    }
    a.push_back(std::move(m));
  }
  return a;
}

bool starved(const BerwaldReport& r) {
  if (r.proposed == 0 || 2 * r.accepted < r.proposed) return true;
  return std::any_of(r.points.begin(), r.points.end(), [](const auto& p) { return p.accepted < 2; });
}

double& tolerance_for(Command c, Tolerances& t) {
  switch (c) {
    case Command::classify:
    case Command::report_all: return t.spread;
    case Command::identities: return t.identity;
    case Command::check_theorem1: return t.theorem1;
    case Command::check_ab: return t.corollary2;
    case Command::check_corollary3: return t.corollary3;
  }
  return t.spread;
}

json sampling_json(const SamplerConfig& s, const BerwaldReport& r) {
  json box = json::array();
  for (const auto& [lo, hi] : s.box) box.push_back(json::array({lo, hi}));
  json out;
  out["seed"] = s.seed;
  out["base_points"] = s.base_points;
  out["fiber_samples"] = s.fiber_samples;
  out["box"] = std::move(box);
  out["shells"] = s.shells;
  out["eps_A"] = s.thresholds.eps_A;
  out["eps_B"] = s.thresholds.eps_B;
  out["eps_det"] = s.thresholds.eps_det;
  out["proposed"] = r.proposed;
  out["accepted"] = r.accepted;
  out["acceptance_rate"] = r.proposed > 0 ? static_cast<double>(r.accepted) / r.proposed : 0.0;
  return out;
}

json tolerances_json(const Tolerances& t) {
  return json{{"spread", t.spread},
              {"identity", t.identity},
              {"theorem1", t.theorem1},
              {"corollary2", t.corollary2},
              {"corollary3", t.corollary3}};
}

json overrides_json(const Overrides& o) {
  json out = json::object();
  if (o.tol) out["tol"] = *o.tol;
  if (o.samples) out["samples"] = *o.samples;
  if (o.fiber_samples) out["fiber_samples"] = *o.fiber_samples;
  if (o.seed) out["seed"] = *o.seed;
  return out;
}

// ---------------------------------------------------------------------------

Check classify_check(const BerwaldReport& r, double tol) {
  Check c;
  c.status = r.verdict == Verdict::berwald       ? Status::pass
             : r.verdict == Verdict::not_berwald ? Status::fail
                                                 : Status::inconclusive;
  c.body["verdict"] = std::string(to_string(r.verdict));
  c.body["tolerance"] = tol;
  c.body["max_spread"] = r.max_spread;
  c.body["max_quadratic_spray"] = r.max_quadratic_spray;
  if (!r.note.empty()) c.body["note"] = r.note;
  if (r.witness) {
    const auto& p = r.points[static_cast<std::size_t>(*r.witness)];
    std::size_t bi = 0, bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < p.xi.size(); ++i)
      for (std::size_t j = i + 1; j < p.xi.size(); ++j) {
        const double d = max_abs_diff(p.xi[i], p.xi[j]);
        if (d > best) best = d, bi = i, bj = j;
      }
    json w;
    w["base_point"] = p.index;
    w["x"] = to_json(p.x);
    w["spread"] = p.spread;
    if (best >= 0.0) w["fibers"] = json::array({to_json(p.fibers[bi]), to_json(p.fibers[bj])});
    c.body["witness"] = std::move(w);
  }
  c.headline = std::string(to_string(r.verdict)) + ", max spread " + sci(r.max_spread);
  return c;
}

Check identities_check(const BerwaldReport& r, double tol) {
  Check c;
  c.body["tolerance"] = tol;
  c.body["max_delta_L"] = r.max_delta_L;
  c.body["max_compat"] = r.max_compat;
  c.body["max_torsion"] = r.max_torsion;
  c.body["max_spray"] = r.max_spray;
  c.body["scaling"] = "each component divided by max(1, sum of |terms|)";
  const double worst = r.identity_max();
  if (starved(r))
    c.status = Status::inconclusive;
  else
    c.status = worst <= tol ? Status::pass : Status::fail;
  if (c.status == Status::fail) {
    const auto it = std::max_element(r.points.begin(), r.points.end(),
                                     [](const auto& a, const auto& b) { return a.identity_max < b.identity_max; });
    c.body["witness"] = json{{"base_point", it->index}, {"x", to_json(it->x)}, {"residual", it->identity_max}};
  }
  c.headline = "max identity residual " + sci(worst);
  return c;
}

struct PointWorst {
  double value = -1.0;
  int fiber = -1;
  Vector residual;
  double structured_abs = 0.0;
  double structured_rel = 0.0;
  int evaluated = 0;
  int degenerate = 0;
};

Check theorem1_check(const FinslerLagrangian& L, const ModelDefinition& def, const BerwaldReport& r, double tol,
                     int jobs) {
  const OmegaField omega(L, def.sampling.thresholds.eps_A);
  std::optional<TensorField> structured;
  if (def.checks.structured_T) structured = structured_T(*def.checks.structured_T, def.model);

  std::vector<PointWorst> per(r.points.size());
  parallel_for(r.points.size(), jobs, [&](std::size_t i) {
    const auto& p = r.points[i];
    auto& w = per[i];
    const Tensor3 Ts = structured ? (*structured)(p.x) : Tensor3();
    for (std::size_t f = 0; f < p.fibers.size(); ++f) {
      const TangentPoint tp{p.x, p.fibers[f]};
      const double rel = theorem1_relative(omega, p.T, tp);
      if (rel > w.value) {
        w.value = rel;
        w.fiber = static_cast<int>(f);
        w.residual = theorem1_residual(omega, p.T, tp);
      }
      if (structured) {
        w.structured_abs = std::max(w.structured_abs, theorem1_residual(omega, Ts, tp).lpNorm<Eigen::Infinity>());
        w.structured_rel = std::max(w.structured_rel, theorem1_relative(omega, Ts, tp));
      }
    }
  });

  Check c;
  double worst = 0.0, s_abs = 0.0, s_rel = 0.0;
  std::optional<std::size_t> at;
  for (std::size_t i = 0; i < per.size(); ++i) {
    if (per[i].fiber >= 0 && (!at || per[i].value > worst)) worst = per[i].value, at = i;
    s_abs = std::max(s_abs, per[i].structured_abs);
    s_rel = std::max(s_rel, per[i].structured_rel);
  }
  c.body["T_source"] = "extracted";
  c.body["tolerance"] = tol;
  c.body["max_relative"] = worst;
  c.body["scaling"] = "|R| divided by max(1, |Omega|, |dOmega/dx|, |dOmega/dv|)";
  if (structured) c.body["structured_T"] = json{{"max_abs", s_abs}, {"max_relative", s_rel}};
  c.status = starved(r) || !at ? Status::inconclusive : worst <= tol ? Status::pass : Status::fail;
  if (c.status == Status::fail) {
    const auto& p = r.points[*at];
    c.body["witness"] = json{{"base_point", p.index},
                             {"x", to_json(p.x)},
                             {"xdot", to_json(p.fibers[static_cast<std::size_t>(per[*at].fiber)])},
                             {"residual", to_json(per[*at].residual)}};
  }
  c.headline = "max Omega-transport residual " + sci(worst);
  return c;
}

const OmegaProfile& require_profile(const ModelDefinition& def, std::string_view command) {
  if (def.lagrangian.kind != LagrangianSpec::Kind::profile || !def.lagrangian.profile)
    throw ModelError(std::string(command) + " needs an (alpha,beta) Lagrangian; [lagrangian] type is " +
                     def.lagrangian.type_name());
  return *def.lagrangian.profile;
}

Check corollary2_check(const ModelDefinition& def, const BerwaldReport& r, double tol, int jobs) {
  const OmegaProfile& profile = require_profile(def, "check-ab");
  const MetricModel& m = *def.model;
  std::optional<TensorField> structured;
  if (def.checks.structured_T) structured = structured_T(*def.checks.structured_T, def.model);

  std::vector<PointWorst> per(r.points.size());
  parallel_for(r.points.size(), jobs, [&](std::size_t i) {
    const auto& p = r.points[i];
    auto& w = per[i];
    const Tensor3 T = structured ? (*structured)(p.x) : p.T;
    for (std::size_t f = 0; f < p.fibers.size(); ++f) {
      const TangentPoint tp{p.x, p.fibers[f]};
      try {
        const double v = corollary2_residual(m, profile, T, tp);
        ++w.evaluated;
        if (v > w.value) {
          w.value = v;
          w.fiber = static_cast<int>(f);
        }
      } catch (const DomainError&) {
        ++w.degenerate;
      }
    }
  });

  Check c;
  double worst = 0.0;
  int evaluated = 0, degenerate = 0;
  std::optional<std::size_t> at;
  for (std::size_t i = 0; i < per.size(); ++i) {
    evaluated += per[i].evaluated;
    degenerate += per[i].degenerate;
    if (per[i].fiber >= 0 && (!at || per[i].value > worst)) worst = per[i].value, at = i;
  }
  c.body["T_source"] = structured ? "structured" : "extracted";
  c.body["tolerance"] = tol;
  c.body["max_residual"] = worst;
  c.body["evaluated"] = evaluated;
  if (degenerate > 0) c.body["profile_degenerate"] = degenerate;
  c.status = starved(r) || !at ? Status::inconclusive : worst <= tol ? Status::pass : Status::fail;
  if (c.status == Status::fail) {
    const auto& p = r.points[*at];
    c.body["witness"] = json{{"base_point", p.index},
                             {"x", to_json(p.x)},
                             {"xdot", to_json(p.fibers[static_cast<std::size_t>(per[*at].fiber)])},
                             {"residual", worst}};
  }
  c.headline = "max (alpha,beta) residual " + sci(worst);
  return c;
}

Check corollary3_check(const ModelDefinition& def, const BerwaldReport& r, double tol) {
  const OmegaProfile& profile = require_profile(def, "check-corollary3");
  if (!profile.kropina())
    throw ModelError("check-corollary3 needs [lagrangian] type = kropina, got " + def.lagrangian.type_name());
  const KropinaParams k = *profile.kropina();

  Check c;
  json rows = json::array();
  double worst = 0.0;
  int defined = 0;
  std::optional<json> witness;
  for (const auto& p : r.points) {
    if (!p.base_found) continue;
    const QFit fit = solve_q(*def.model, k, p.x);
    json row;
    row["base_point"] = p.index;
    row["x"] = to_json(p.x);
    row["defined"] = fit.defined;
    row["q"] = fit.q;
    row["q_c_1_minus_n"] = fit.q * k.c * (1.0 - k.n);
    row["q_c_n_minus_1"] = fit.q * k.c * (k.n - 1.0);
    row["residual"] = fit.residual;
    if (!fit.note.empty()) row["note"] = fit.note;
    if (fit.defined) {
      ++defined;
      if (fit.residual > worst || !witness) {
        worst = std::max(worst, fit.residual);
        witness = row;
      }
    }
    rows.push_back(std::move(row));
  }
  c.body["tolerance"] = tol;
  c.body["max_residual"] = worst;
  c.body["kropina"] = json{{"n", k.n}, {"m", k.m}, {"c", k.c}};
  c.body["sign_convention"] =
      "for Kundt metrics dH/dv is either q c (1 - n) or q c (n - 1); both columns are listed";
  c.body["q"] = std::move(rows);
  c.status = defined == 0 ? Status::inconclusive : worst <= tol ? Status::pass : Status::fail;
  if (c.status == Status::fail) c.body["witness"] = *witness;
  c.headline = "max q-fit residual " + sci(worst);
  return c;
}

json probes_json(const BerwaldReport& r) {
  json out = json::array();
  for (const auto& p : r.points) {
    json j;
    j["base_point"] = p.index;
    j["x"] = p.base_found ? to_json(p.x) : json();
    j["accepted"] = p.accepted;
    j["proposed"] = p.proposed;
    j["spread"] = p.spread;
    if (p.accepted > 0) {
      j["xi"] = to_json(p.xi_mean);
      j["T"] = to_json(p.T);
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

std::optional<Command> parse_command(std::string_view s) {
  for (Command c : {Command::classify, Command::check_theorem1, Command::check_ab, Command::check_corollary3,
                    Command::identities, Command::report_all})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::classify: return "classify";
    case Command::check_theorem1: return "check-theorem1";
    case Command::check_ab: return "check-ab";
    case Command::check_corollary3: return "check-corollary3";
    case Command::identities: return "identities";
    case Command::report_all: return "report-all";
  }
  return "classify";
}

Outcome run(Command command, const ModelDefinition& input, const Overrides& overrides, const std::string& source) {
  if (!input.model) throw ModelError("model definition has no metric model");
  ModelDefinition def = input;
  if (overrides.samples) def.sampling.base_points = *overrides.samples;
  if (overrides.fiber_samples) def.sampling.fiber_samples = *overrides.fiber_samples;
  if (overrides.seed) def.sampling.seed = *overrides.seed;
  if (overrides.tol) {
    if (!(*overrides.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
    tolerance_for(command, def.tolerances) = *overrides.tol;
  }
  if (overrides.jobs < 1) throw std::invalid_argument("--jobs must be at least 1");

  const FinslerLagrangian L = def.lagrangian.build(def.model);
  const AdmissibleSampler sampler(def.sampling);
  ClassifyOptions opts;
  opts.tol = def.tolerances.spread;
  opts.identity_tol = def.tolerances.identity;
  opts.jobs = overrides.jobs;
  const BerwaldReport rep = classify_berwald(L, sampler, opts);

  const auto& T = def.tolerances;
  std::vector<std::pair<std::string, Check>> checks;
  switch (command) {
    case Command::classify: checks.emplace_back("classify", classify_check(rep, T.spread)); break;
    case Command::identities: checks.emplace_back("identities", identities_check(rep, T.identity)); break;
    case Command::check_theorem1:
      checks.emplace_back("theorem1", theorem1_check(L, def, rep, T.theorem1, overrides.jobs));
      break;
    case Command::check_ab: checks.emplace_back("corollary2", corollary2_check(def, rep, T.corollary2, overrides.jobs)); break;
    case Command::check_corollary3: checks.emplace_back("corollary3", corollary3_check(def, rep, T.corollary3)); break;
    case Command::report_all:
      checks.emplace_back("classify", classify_check(rep, T.spread));
      if (def.checks.identities) checks.emplace_back("identities", identities_check(rep, T.identity));
      if (def.checks.theorem1) checks.emplace_back("theorem1", theorem1_check(L, def, rep, T.theorem1, overrides.jobs));
      if (def.checks.corollary2)
        checks.emplace_back("corollary2", corollary2_check(def, rep, T.corollary2, overrides.jobs));
      if (def.checks.corollary3) checks.emplace_back("corollary3", corollary3_check(def, rep, T.corollary3));
      break;
  }

  Status overall = Status::pass;
  for (const auto& [name, c] : checks) overall = combine(overall, c.status);

  const MetricModel& m = *def.model;
  json report;
  report["tool"] = json{{"name", std::string(kToolName)}, {"version", std::string(kVersion)}};
  report["command"] = std::string(to_string(command));
  report["source"] = source;
  json model{{"name", m.name()}, {"coordinates", m.coordinates()}, {"lagrangian", def.lagrangian.type_name()}};
  if (!def.description.empty()) model["description"] = def.description;
  if (def.expected) model["expect"] = std::string(to_string(*def.expected));
  report["model"] = std::move(model);
  report["overrides"] = overrides_json(overrides);
  report["sampling"] = sampling_json(def.sampling, rep);
  report["tolerances"] = tolerances_json(def.tolerances);
  report["verdict"] = std::string(to_string(rep.verdict));
  report["status"] = status_name(overall);
  json checks_json = json::object();
  for (const auto& [name, c] : checks) {
    json body{{"status", status_name(c.status)}};
    body.update(c.body);
    checks_json[name] = std::move(body);
  }
  report["checks"] = std::move(checks_json);
  if (command == Command::classify || command == Command::report_all) report["probes"] = probes_json(rep);

  Outcome out;
  out.exit_code = exit_for(overall);
  out.report = std::move(report);
  out.summary = m.name() + ": " + std::string(to_string(command)) + " " + status_name(overall) + " (";
  for (const auto& [name, c] : checks) out.summary += c.headline + "; ";
  out.summary += "accepted " + std::to_string(rep.accepted) + "/" + std::to_string(rep.proposed) + ")";
  return out;
}

namespace {

void flatten(const json& j, const std::string& key, std::string& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, key.empty() ? k : key + "." + k, out);
    return;
  }
  if (j.is_array() && std::any_of(j.begin(), j.end(), [](const json& e) { return e.is_object(); })) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], key + "[" + std::to_string(i) + "]", out);
    return;
  }
  out += key + ": " + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
}

int log_level() {
  const char* env = std::getenv("FINSLER_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "0" || v == "quiet" || v == "off" || v == "error") return 0;
  if (v == "2" || v == "debug" || v == "verbose") return 2;
  return 1;
}

int export_fixtures(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir << ": " << ec.message() << "\n";
    return ExitCode::input_error;
  }
  for (const auto& f : canned_fixtures()) {
    const auto path = dir / (f.name + ".ini");
    std::ofstream os(path);
    os << "# " << f.citation << "\n";
    if (f.exploratory) os << "# exploratory: no expected verdict\n";
    os << "\n" << write_model_file(f.definition);
    if (!os) {
      std::cerr << "error: cannot write " << path << "\n";
      return ExitCode::input_error;
    }
    std::cout << path.string() << "\n";
  }
  return ExitCode::pass;
}

}  // namespace

std::string render_text(const nlohmann::ordered_json& report) {
  std::string out;
  flatten(report, "", out);
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"Berwald-type tests for Finsler Lagrangians given as model files", std::string(kToolName)};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  Overrides ov;
  std::string output;
  std::string format = "json";
  app.add_option("--tol", ov.tol, "Tolerance of the command's check (report-all: the Xi spread)");
  app.add_option("--samples", ov.samples, "Number of base points");
  app.add_option("--fiber-samples", ov.fiber_samples, "Fiber samples per base point");
  app.add_option("--seed", ov.seed, "Sampler seed");
  app.add_option("--jobs", ov.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output", output, "Write the report here instead of stdout");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));

  std::string file;
  std::vector<std::pair<Command, CLI::App*>> subs;
  const std::pair<Command, const char*> described[] = {
      {Command::classify, "Decide Berwald / not Berwald from the spread of the affine coefficients"},
      {Command::check_theorem1, "Omega-transport residual with the extracted T"},
      {Command::check_ab, "(alpha,beta) condition on nabla beta with the given or extracted T"},
      {Command::check_corollary3, "Fit q in nabla beta = q D for generalized Kropina Lagrangians"},
      {Command::identities, "Defining identities of the canonical nonlinear connection"},
      {Command::report_all, "classify plus every check enabled in [checks]"},
  };
  for (const auto& [cmd, text] : described) {
    auto* sub = app.add_subcommand(std::string(to_string(cmd)), text);
    sub->add_option("file", file, "Model file")->required();
    subs.emplace_back(cmd, sub);
  }
  std::string export_dir;
  auto* exp = app.add_subcommand("export-fixtures", "Write every canned fixture as a model file");
  exp->add_option("dir", export_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ExitCode::pass : ExitCode::input_error;
  }

  if (exp->parsed()) return export_fixtures(export_dir);

  Command command = Command::classify;
  for (const auto& [cmd, sub] : subs)
    if (sub->parsed()) command = cmd;

  const int level = log_level();
  Outcome out;
  try {
    out = run(command, load_model_file(file), ov, file);
  } catch (const std::exception& e) {
    // Malformed files, bad overrides and unusable models all land here.
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode::input_error;
  }

  const std::string text = format == "text" ? render_text(out.report) : out.report.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(output);
    os << text;
    if (!os) {
      std::cerr << "error: cannot write " << output << "\n";
      return ExitCode::input_error;
    }
  }

  if (level >= 2 && out.report.contains("probes"))
    for (const auto& p : out.report["probes"])
      std::cerr << "  base point " << p["base_point"].get<int>() << ": accepted " << p["accepted"].get<int>() << "/"
                << p["proposed"].get<int>() << ", spread " << sci(p["spread"].get<double>()) << "\n";
  if (level >= 1) std::cerr << out.summary << "\n";
  return out.exit_code;
}

}  // namespace finsler::cli
