#include "cli.h"

#include <nrep/costmodel.h>
#include <nrep/error.h>
#include <nrep/kem.h>
#include <nrep/purification.h>
#include <nrep/scattering.h>
#include <nrep/subspace.h>

#include "CLI11.hpp"

#include <cmath>
#include <fmt/core.h>
#include <ostream>
#include <random>

namespace nrep::cli {

using io::json;
namespace fs = std::filesystem;

json RunManifest::to_json() const {
  // out_dir is where the run lands, not part of what it computes.
  return {{"command", command},
          {"inputs", inputs},
          {"options", options},
          {"seed", seed},
          {"version", version}};
}

RunManifest RunManifest::from_json(const json &j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    if (j.contains("inputs"))
      m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("options")) m.options = j.at("options");
    if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("version")) m.version = j.at("version").get<std::string>();
    if (j.contains("out_dir")) m.out_dir = j.at("out_dir").get<std::string>();
  } catch (const json::exception &e) {
    throw ParseError(fmt::format("run manifest: {}", e.what()));
  }
  if (!m.options.is_object()) throw ParseError("run manifest: options must be an object");
  return m;
}

int exit_code_for(const std::exception &e) {
  if (auto *err = dynamic_cast<const Error *>(&e)) {
    switch (err->kind()) {
    case ErrorKind::parse:
      return exit_parse;
    case ErrorKind::non_convergence:
    case ErrorKind::divergence:
    case ErrorKind::stagnation:
    case ErrorKind::collapse:
      return exit_non_convergence;
    case ErrorKind::ill_conditioned:
      return exit_ill_conditioned;
    default:
      return exit_failure;
    }
  }
  return exit_failure;
}

json sanitize(json j) {
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  } else if (j.is_structured()) {
    for (auto &el : j) el = sanitize(el);
  }
  return j;
}

namespace {

template <typename T> T opt(const json &options, const char *key, T fallback) {
  if (!options.contains(key)) return fallback;
  try {
    return options.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ParseError(fmt::format("option '{}': {}", key, e.what()));
  }
}

template <typename T> T required_opt(const json &options, const char *key) {
  if (!options.contains(key)) {
    throw ParseError(fmt::format("missing required option '{}'", key));
  }
  return opt<T>(options, key, T{});
}

const std::string &input(const RunManifest &m, const std::string &key) {
  auto it = m.inputs.find(key);
  if (it == m.inputs.end()) {
    throw ParseError(fmt::format("missing required input '{}'", key));
  }
  return it->second;
}

PurificationOptions purification_options(const json &o) {
  PurificationOptions p;
  p.max_iterations = opt(o, "max_iter", p.max_iterations);
  p.idempotency_tolerance = opt(o, "tol_idem", p.idempotency_tolerance);
  p.constraint_tolerance = opt(o, "tol_constraint", p.constraint_tolerance);
  p.multiplier_regularization = opt(o, "regularization", p.multiplier_regularization);
  p.validate();
  return p;
}

int workers(const json &o) { return std::max(1, opt(o, "workers", 1)); }

json vec_json(const Vec &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json projector_json(const Projector &p) {
  json labelled = json::array();
  for (std::size_t i = 0; i < p.residual_constraints.size(); ++i) {
    labelled.push_back({{"label", p.constraint_labels[i]},
                        {"residual", p.residual_constraints[i]}});
  }
  json traj = json::array();
  for (const auto &r : p.trajectory) traj.push_back({r.idempotency, r.constraint});
  return {{"trace_target", p.trace_target},
          {"trace", p.P.trace()},
          {"iterations", p.iterations_used},
          {"residual_idempotency", p.residual_idempotency},
          {"residual_constraints", labelled},
          {"least_squares_step", p.least_squares_step},
          {"occupation_spectrum", vec_json(occupation_spectrum(p))},
          {"trajectory", traj}};
}

struct Outcome {
  json results;
  int exit_code{exit_ok};
  std::string status{"ok"};
};

Outcome run_purify(const RunManifest &m, const fs::path &out) {
  auto p0 = io::read_matrix(input(m, "matrix"));
  double occupied = required_opt<double>(m.options, "occupied");
  auto targets = opt<std::vector<double>>(m.options, "constraint_targets", {});
  std::vector<ObservableConstraint> cons;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::string key = fmt::format("constraint:{}", i);
    const auto &file = input(m, key);
    cons.push_back({io::read_matrix(file), targets[i], fs::path(file).stem().string(),
                    ConstraintMode::exact});
  }
  auto proj = clinton_iterate(p0, occupied, cons, purification_options(m.options));
  io::write_matrix(out / "projector.dsm", proj.P);
  json r = projector_json(proj);
  r["projector_file"] = "projector.dsm";
  return {r};
}

Outcome run_fit(const RunManifest &m, const fs::path &out) {
  auto basis = io::read_basis(input(m, "basis"));
  auto ds = io::read_dataset(input(m, "dataset"));
  double occupied = required_opt<double>(m.options, "occupied");
  std::optional<DenseSymMatrix> p0;
  if (m.inputs.count("initial")) p0 = io::read_matrix(input(m, "initial"));
  auto fit = fit_projector(ds, basis, occupied, p0, purification_options(m.options),
                           workers(m.options));
  io::write_matrix(out / "projector.dsm", fit.projector.P);
  json calc = json::array();
  for (std::size_t i = 0; i < fit.calculated.size(); ++i) {
    const auto &k = ds.reflections[i].k;
    calc.push_back({{"k", {k(0), k(1), k(2)}},
                    {"f_re", fit.calculated[i].real()},
                    {"f_im", fit.calculated[i].imag()}});
  }
  json r = projector_json(fit.projector);
  r["projector_file"] = "projector.dsm";
  r["r_factor"] = fit.r_factor;
  r["r_factor_convention"] = "sum ||F_obs| - |F_calc|| / sum |F_obs|";
  r["independent_constraints"] = fit.independent_constraints;
  r["free_parameters"] = fit.free_parameters;
  r["warnings"] = fit.warnings;
  r["calculated"] = calc;
  return {r};
}

Outcome run_synthesize(const RunManifest &m, const fs::path &out) {
  auto basis = io::read_basis(input(m, "basis"));
  auto p = io::read_matrix(input(m, "matrix"));
  double noise = opt(m.options, "noise", 0.0);
  std::vector<Vec3> ks;
  json r;
  if (m.inputs.count("kvectors")) {
    ks = io::read_vectors(input(m, "kvectors"));
  } else {
    int count = required_opt<int>(m.options, "random_k");
    double kmax = opt(m.options, "k_max", 1.5);
    // K vectors and noise come from separate streams of the same seed.
    std::mt19937_64 rng(m.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-kmax, kmax);
    for (int i = 0; i < count; ++i) ks.emplace_back(u(rng), u(rng), u(rng));
    io::write_json(out / "kvectors.json", io::vectors_to_json(ks, "bohr^-1"));
    r["kvectors_file"] = "kvectors.json";
  }
  auto ds = synthesize_dataset(p, basis, ks, noise, m.seed, workers(m.options));
  io::write_json(out / "dataset.json", io::dataset_to_json(ds));
  r["dataset_file"] = "dataset.json";
  r["reflections"] = ds.reflections.size();
  r["noise_sigma"] = noise;
  r["trace"] = p.trace();
  return {r};
}

Outcome run_assemble(const RunManifest &m, const fs::path &out) {
  auto manifest = io::read_fragment_manifest(input(m, "manifest"));
  double occupied = required_opt<double>(m.options, "occupied");
  const Index dim = manifest.scheme.full_dim();
  DenseSymMatrix s = m.inputs.count("overlap") ? io::read_matrix(input(m, "overlap"))
                                               : DenseSymMatrix::identity(dim);
  auto r_kem = assemble_r_kem(manifest.scheme, manifest.doubles, manifest.singles);
  auto p0 = lowdin_initial_iterant(r_kem, s);
  io::write_matrix(out / "r_kem.dsm", r_kem);
  io::write_matrix(out / "p0.dsm", p0);
  json r;
  r["n"] = manifest.scheme.n();
  r["trace_r_kem"] = r_kem.trace();
  r["trace_r_kem_s"] = trace_product(r_kem, s);
  r["trace_p0"] = p0.trace();
  std::vector<std::string> warnings;
  if (manifest.scheme.is_degenerate()) {
    warnings.push_back("n = 2: the double kernel is the whole system, KEM saves nothing");
  }
  r["warnings"] = warnings;
  auto proj = purify_assembled(p0, occupied, purification_options(m.options));
  io::write_matrix(out / "projector.dsm", proj.P);
  r["purification"] = projector_json(proj);
  r["files"] = {"r_kem.dsm", "p0.dsm", "projector.dsm"};
  return {r};
}

std::string kernel_file(const KernelId &id) {
  return id.is_double() ? fmt::format("kernel_d{}_{}.dsm", id.first, id.second)
                        : fmt::format("kernel_s{}.dsm", id.first);
}

Outcome run_decompose(const RunManifest &m, const fs::path &out) {
  auto p = io::read_matrix(input(m, "matrix"));
  auto scheme = io::read_fragment_manifest(input(m, "scheme"), false).scheme;
  DecomposeSettings settings{workers(m.options),
                             opt(m.options, "strict_idempotency", false)};
  auto kernels = decompose(p, scheme, purification_options(m.options), settings);
  json entries = json::array();
  bool all_ok = true;
  for (const auto &k : kernels) {
    std::string file = kernel_file(k.id);
    io::write_matrix(out / file, k.p_prime);
    json members = k.id.is_double() ? json{k.id.first, k.id.second} : json{k.id.first};
    entries.push_back({{"kind", k.id.is_double() ? "double" : "single"},
                       {"members", members},
                       {"matrix_file", file},
                       {"trace_target", k.trace_target},
                       {"trace_value", k.trace_value},
                       {"electron_count", k.electron_count},
                       {"residual", k.residual},
                       {"idempotency", k.idempotency},
                       {"iterations", k.iterations},
                       {"converged", k.converged},
                       {"error", k.error},
                       {"residual_trail", k.residual_trail}});
    all_ok = all_ok && k.converged;
  }
  json manifest = io::scheme_to_json(scheme);
  manifest["kernels"] = entries;
  manifest["reassembly_residual"] = reassembly_residual(p, kernels, scheme.n());
  io::write_json(out / "decompose.json", manifest);
  Outcome o{manifest};
  o.results["manifest_file"] = "decompose.json";
  if (!all_ok) {
    o.exit_code = exit_non_convergence;
    o.status = "partial";
  }
  return o;
}

Outcome run_cost(const RunManifest &m, const fs::path &out, std::string &stdout_text) {
  json r;
  bool table = opt(m.options, "table", false);
  bool plot = opt(m.options, "plot", false);
  auto alphas = opt<std::vector<double>>(m.options, "alpha_values", {3.0, 4.0, 5.0});
  if (table) {
    auto ms = opt<std::vector<int>>(m.options, "m_values",
                                    {3, 6, 12, 24, 48, 96, 192, 384});
    auto t = cost::table_sweep(ms, alphas);
    std::string csv = t.to_csv();
    io::write_text(out / "cost_table.csv", csv);
    stdout_text += csv;
    r["table_file"] = "cost_table.csv";
  }
  if (plot) {
    std::vector<int> ms;
    for (int i = 2; i <= opt(m.options, "m_max", 400); ++i) ms.push_back(i);
    auto t = cost::table_sweep(ms, alphas);
    std::string csv = t.to_plot_data();
    io::write_text(out / "cost_plot.csv", csv);
    if (!table) stdout_text += csv;
    r["plot_file"] = "cost_plot.csv";
  }
  if (m.options.contains("m") || m.options.contains("alpha")) {
    cost::CostQuery q{opt(m.options, "m", 3), opt(m.options, "mu", 1),
                      opt(m.options, "alpha", 3.0)};
    int parallel = opt(m.options, "parallel", 1);
    double direct = cost::absolute_cost(static_cast<double>(q.m) * q.mu, q.alpha);
    double kem = cost::kem_absolute_cost(q);
    r["query"] = {{"m", q.m}, {"mu", q.mu}, {"alpha", q.alpha}};
    r["relative_time"] = cost::relative_time(q.m, q.alpha);
    r["relative_time_general"] = cost::relative_time_general(q);
    r["direct_cost"] = direct;
    r["kem_cost"] = kem;
    r["kem_cost_parallel"] = cost::kem_absolute_cost(q, parallel);
    r["parallel_workers"] = parallel;
    r["ratio"] = kem / direct;
  }
  if (r.is_null()) throw ParseError("cost: nothing to do (use --table, --plot or --m/--alpha)");
  return {r};
}

Outcome run_density(const RunManifest &m, const fs::path &out) {
  auto basis = io::read_basis(input(m, "basis"));
  auto p = io::read_matrix(input(m, "matrix"));
  auto grid = io::read_vectors(input(m, "grid"));
  auto s_inv_sqrt = fractional_power(overlap_matrix(basis), -0.5);
  auto rho = density_on_grid(p, basis, s_inv_sqrt, grid);
  std::string csv = "x,y,z,rho\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", grid[i](0), grid[i](1),
                       grid[i](2), rho[i]);
  }
  io::write_text(out / "density.csv", csv);
  json r{{"density_file", "density.csv"}, {"points", grid.size()}};
  if (!rho.empty()) {
    r["min"] = *std::min_element(rho.begin(), rho.end());
    r["max"] = *std::max_element(rho.begin(), rho.end());
  }
  return {r};
}

json error_json(const std::exception &e, int code) {
  json err{{"message", e.what()}, {"exit_code", code}};
  if (auto *x = dynamic_cast<const Error *>(&e)) {
    err["kind"] = to_string(x->kind());
    if (auto *c = dynamic_cast<const ConvergenceError *>(&e)) {
      json traj = json::array();
      for (const auto &r : c->trajectory()) traj.push_back({r.idempotency, r.constraint});
      err["iterations"] = c->iterations();
      err["trajectory"] = traj;
    } else if (auto *ic = dynamic_cast<const IllConditionedError *>(&e)) {
      err["condition_estimate"] = ic->condition_estimate();
    } else if (auto *so = dynamic_cast<const SingularOverlapError *>(&e)) {
      err["eigenvalue"] = so->eigenvalue();
    } else if (auto *pe = dynamic_cast<const ParseError *>(&e)) {
      err["line"] = pe->line();
    }
  } else {
    err["kind"] = "internal";
  }
  return err;
}

RunResult run_impl(const RunManifest &m, std::string &stdout_text) {
  fs::path out(m.out_dir);
  RunResult result;
  result.report = {{"manifest", m.to_json()}, {"version", version}};
  try {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(ErrorKind::io, fmt::format("cannot create '{}'", out.string()));
    Outcome o;
    if (m.command == "purify") o = run_purify(m, out);
    else if (m.command == "fit") o = run_fit(m, out);
    else if (m.command == "synthesize") o = run_synthesize(m, out);
    else if (m.command == "assemble") o = run_assemble(m, out);
    else if (m.command == "decompose") o = run_decompose(m, out);
    else if (m.command == "cost") o = run_cost(m, out, stdout_text);
    else if (m.command == "density") o = run_density(m, out);
    else throw ParseError(fmt::format("unknown command '{}'", m.command));
    result.exit_code = o.exit_code;
    result.report["status"] = o.status;
    result.report["results"] = o.results;
  } catch (const std::exception &e) {
    result.exit_code = exit_code_for(e);
    result.report["status"] = "error";
    result.report["error"] = error_json(e, result.exit_code);
  }
  result.report = sanitize(std::move(result.report));
  std::error_code ec;
  if (fs::is_directory(out, ec)) {
    try {
      io::write_json(out / "report.json", result.report);
    } catch (const Error &) {
    }
  }
  return result;
}

} // namespace

RunResult run(const RunManifest &manifest) {
  std::string ignored;
  return run_impl(manifest, ignored);
}

int main(int argc, char **argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Constrained purification, KEM assembly and decomposition of "
               "single-determinant density matrices"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);

  RunManifest m;
  double tol_idem = 1e-10, tol_constraint = 1e-10, regularization = 1e-12;
  int max_iter = 500, nworkers = 1;
  std::string out_dir = ".";

  auto common = [&](CLI::App *sub) {
    sub->add_option("--tol-idem", tol_idem, "idempotency tolerance ||P^2-P||_F")
        ->capture_default_str();
    sub->add_option("--tol-constraint", tol_constraint, "constraint tolerance")
        ->capture_default_str();
    sub->add_option("--max-iter", max_iter, "maximum iterations")->capture_default_str();
    sub->add_option("--regularization", regularization, "Gram regularization")
        ->capture_default_str();
    sub->add_option("--workers", nworkers, "worker threads")->capture_default_str();
    sub->add_option("--seed", m.seed, "random seed")->capture_default_str();
    sub->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  };

  std::map<std::string, std::string> in;
  double occupied = 0.0, noise = 0.0, k_max = 1.5;
  int random_k = 0;
  std::vector<std::string> constraints;
  bool strict = false, table = false, plot = false;
  int cost_m = 0, cost_mu = 1, parallel = 1, m_max = 400;
  double cost_alpha = 0.0;
  std::vector<int> m_values;
  std::vector<double> alpha_values;
  std::string manifest_file;

  auto *purify = app.add_subcommand("purify", "purify a matrix under trace and observable constraints");
  purify->add_option("--matrix", in["matrix"], "initial matrix (DSM v1)")->required();
  purify->add_option("--occupied", occupied, "occupied orbital count (trace target)")
      ->required();
  purify->add_option("--constraint", constraints,
                     "extra observable constraint FILE=TARGET (repeatable)");
  common(purify);

  auto *fit = app.add_subcommand("fit", "fit a projector to structure factors");
  fit->add_option("--basis", in["basis"], "basis JSON")->required();
  fit->add_option("--dataset", in["dataset"], "dataset JSON")->required();
  fit->add_option("--initial", in["initial"], "initial matrix (DSM v1)");
  fit->add_option("--occupied", occupied, "occupied orbital count")->required();
  common(fit);

  auto *synth = app.add_subcommand("synthesize", "synthesize structure factors");
  synth->add_option("--basis", in["basis"], "basis JSON")->required();
  synth->add_option("--matrix", in["matrix"], "orthonormal-basis projector")->required();
  synth->add_option("--kvectors", in["kvectors"], "K-vector list JSON");
  synth->add_option("--random-k", random_k, "number of random K vectors");
  synth->add_option("--k-max", k_max, "random K component bound (bohr^-1)")
      ->capture_default_str();
  synth->add_option("--noise", noise, "Gaussian noise sigma on Re/Im")
      ->capture_default_str();
  common(synth);

  auto *assemble = app.add_subcommand("assemble", "assemble kernel densities, Loewdin-transform and purify");
  assemble->add_option("--manifest", in["manifest"], "fragment manifest JSON")
      ->required();
  assemble->add_option("--overlap", in["overlap"], "AO overlap matrix (DSM v1)");
  assemble->add_option("--occupied", occupied, "occupied orbital count")->required();
  common(assemble);

  auto *decomp = app.add_subcommand("decompose", "split a projector into kernels");
  decomp->add_option("--matrix", in["matrix"], "full projector (DSM v1)")->required();
  decomp->add_option("--scheme", in["scheme"], "fragment manifest JSON")->required();
  decomp->add_flag("--strict-idempotency", strict, "also require P'^2 = P'");
  common(decomp);

  auto *cost_cmd = app.add_subcommand("cost", "kernel energy method cost model");
  cost_cmd->add_flag("--table", table, "relative-time table as CSV");
  cost_cmd->add_flag("--plot", plot, "(alpha, m, t_rel) curves as CSV");
  cost_cmd->add_option("--m-values", m_values, "table m values");
  cost_cmd->add_option("--alpha-values", alpha_values, "table alpha values");
  cost_cmd->add_option("--m-max", m_max, "largest m for --plot")->capture_default_str();
  cost_cmd->add_option("--m", cost_m, "number of single kernels");
  cost_cmd->add_option("--mu", cost_mu, "basis functions per kernel");
  cost_cmd->add_option("--alpha", cost_alpha, "scaling exponent");
  cost_cmd->add_option("--parallel", parallel, "ideal parallel divisor");
  common(cost_cmd);

  auto *density = app.add_subcommand("density", "electron density on points");
  density->add_option("--basis", in["basis"], "basis JSON")->required();
  density->add_option("--matrix", in["matrix"], "orthonormal-basis P")->required();
  density->add_option("--grid", in["grid"], "points JSON")->required();
  common(density);

  auto *run_cmd = app.add_subcommand("run", "execute a run manifest JSON");
  run_cmd->add_option("--manifest", manifest_file, "run manifest")->required();
  run_cmd->add_option("--out-dir", out_dir, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_parse;
  }

  std::string stdout_text;
  RunResult result;
  try {
    auto *sub = app.get_subcommands().front();
    if (sub == run_cmd) {
      m = RunManifest::from_json(io::read_json(manifest_file));
      if (run_cmd->count("--out-dir")) m.out_dir = out_dir;
    } else {
      m.command = sub->get_name();
      for (const auto &[k, v] : in) {
        if (!v.empty()) m.inputs[k] = v;
      }
      json &o = m.options;
      o["tol_idem"] = tol_idem;
      o["tol_constraint"] = tol_constraint;
      o["max_iter"] = max_iter;
      o["regularization"] = regularization;
      o["workers"] = nworkers;
      if (auto *occ = sub->get_option_no_throw("--occupied"); occ && occ->count()) {
        o["occupied"] = occupied;
      }
      if (sub == purify && !constraints.empty()) {
        std::vector<double> targets;
        for (std::size_t i = 0; i < constraints.size(); ++i) {
          auto eq = constraints[i].rfind('=');
          if (eq == std::string::npos) {
            throw ParseError(fmt::format("--constraint '{}' is not FILE=TARGET",
                                         constraints[i]));
          }
          m.inputs[fmt::format("constraint:{}", i)] = constraints[i].substr(0, eq);
          try {
            targets.push_back(std::stod(constraints[i].substr(eq + 1)));
          } catch (const std::exception &) {
            throw ParseError(fmt::format("--constraint '{}' has a non-numeric target",
                                         constraints[i]));
          }
        }
        o["constraint_targets"] = targets;
      }
      if (sub == synth) {
        o["noise"] = noise;
        o["k_max"] = k_max;
        if (random_k > 0) o["random_k"] = random_k;
      }
      if (sub == decomp) o["strict_idempotency"] = strict;
      if (sub == cost_cmd) {
        o["table"] = table;
        o["plot"] = plot;
        if (!m_values.empty()) o["m_values"] = m_values;
        if (!alpha_values.empty()) o["alpha_values"] = alpha_values;
        if (plot) o["m_max"] = m_max;
        if (sub->count("--m") || sub->count("--alpha")) {
          o["m"] = cost_m;
          o["mu"] = cost_mu;
          o["alpha"] = cost_alpha;
          o["parallel"] = parallel;
        }
      }
      m.out_dir = out_dir;
    }
    result = run_impl(m, stdout_text);
  } catch (const std::exception &e) {
    int code = exit_code_for(e);
    result.exit_code = code;
    result.report = sanitize({{"status", "error"}, {"error", error_json(e, code)}});
  }

  if (result.exit_code != exit_ok) {
    if (result.report.contains("error")) {
      err << "error: " << result.report["error"]["message"].get<std::string>() << "\n";
    }
    out << result.report.dump(2) << "\n";
  } else if (!stdout_text.empty()) {
    out << stdout_text;
  } else {
    out << result.report.dump(2) << "\n";
  }
  return result.exit_code;
}

} // namespace nrep::cli
