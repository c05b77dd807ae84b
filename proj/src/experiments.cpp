#include "dynloc/experiments.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "dynloc/disorder.hpp"
#include "dynloc/dynamics.hpp"
#include "dynloc/estimators.hpp"
#include "dynloc/green.hpp"
#include "dynloc/hamiltonian.hpp"
#include "dynloc/msa.hpp"
#include "dynloc/rng.hpp"
#include "dynloc/runner.hpp"
#include "dynloc/stats.hpp"

namespace dynloc {

namespace {

using nlohmann::ordered_json;

LatticeSpec lattice_from(const RunConfig& cfg) {
  return LatticeSpec(cfg.get_int("lattice.dimension"), cfg.get_int("lattice.extent"));
}

DisorderSpec disorder_from(const RunConfig& cfg) {
  DisorderSpec d;
  const std::string kind = cfg.get_string("disorder.kind");
  if (kind == "iid-uniform") d.kind = DisorderKind::IidUniform;
  else if (kind == "iid-density") d.kind = DisorderKind::IidDensity;
  else if (kind == "correlated-moving-average") d.kind = DisorderKind::CorrelatedMovingAverage;
  else throw std::runtime_error("unknown disorder kind '" + kind + "'");
  d.half_width = cfg.get_double("disorder.half_width");
  d.correlation_radius = cfg.get_int("disorder.correlation_radius");
  d.master_seed = cfg.get_uint64("execution.master_seed");
  d.sample_count = cfg.get_int64("disorder.sample_count");
  for (const auto& [x, f] : cfg.get_pair_list("disorder.density_table")) {
    d.density.x.push_back(x);
    d.density.f.push_back(f);
  }
  d.validate();
  return d;
}

struct InitialState {
  Eigen::VectorXcd psi;
  std::string descriptor;
};

InitialState initial_state_from(const RunConfig& cfg, const LatticeOperator& op,
                                const SpectralDecomposition& decomp) {
  const std::string kind = cfg.get_string("dynamics.initial_state");
  InitialState st;
  const Eigen::VectorXcd delta = delta_state(op, make_site(0));
  if (kind == "delta") {
    st.psi = delta;
    st.descriptor = "delta@origin";
  } else if (kind == "filtered-delta") {
    FilterSpec f;
    f.lo = cfg.get_double("operator.filter_lo");
    f.hi = cfg.get_double("operator.filter_hi");
    f.margin = cfg.get_double("operator.filter_margin");
    st.psi = apply_filter(f, decomp, delta);
    st.descriptor = "filter[" + format_double(f.lo) + "," + format_double(f.hi) + ";" +
                    format_double(f.margin) + "]delta@origin";
  } else {
    throw std::runtime_error("unknown initial state '" + kind + "'");
  }
  return st;
}

struct DynamicsRun {
  std::vector<DynamicsTrace> traces;
  AveragedTrace averaged;
  double ballistic_min_slack = std::numeric_limits<double>::infinity();
  double max_leak = 0;
};

DynamicsRun run_dynamics_pipeline(const RunConfig& cfg) {
  const LatticeSpec lattice = lattice_from(cfg);
  const DisorderSpec disorder = disorder_from(cfg);
  const int realizations = cfg.get_int("dynamics.realizations");
  const int workers = cfg.get_int("execution.workers");
  const TimeGrid grid = TimeGrid::uniform(cfg.get_double("dynamics.t_max"),
                                          cfg.get_double("dynamics.t_step"));
  const auto targets = geometric_times(cfg.get_double("dynamics.cesaro_t_min"), grid.t_max(),
                                       cfg.get_int("dynamics.cesaro_per_decade"));
  TraceOptions opts;
  opts.leak_margin = cfg.get_double("dynamics.leak_margin");
  opts.leak_threshold = cfg.get_double("dynamics.leak_threshold");
  const int cap = cfg.get_int("operator.matrix_cap");

  DynamicsRun run;
  run.traces.resize(static_cast<std::size_t>(realizations));
  std::vector<double> slacks(static_cast<std::size_t>(realizations));
  parallel_for_indexed(realizations, workers, [&](std::int64_t i) {
    const DisorderField field = sample_field(disorder, lattice, i);
    const LatticeOperator op = assemble(lattice, field);
    const SpectralDecomposition decomp = diagonalize(op, cap);
    const InitialState st = initial_state_from(cfg, op, decomp);
    DynamicsTrace tr = second_moment_trace(op, decomp, st.psi, grid, opts);
    tr.realization = i;
    tr.initial_state = st.descriptor;
    fill_cesaro(tr, targets);
    // Ballistic check on a thinned grid; the bound itself is grid-free.
    TimeGrid thin;
    thin.step = grid.step * std::max(1, grid.count / 64);
    thin.count = std::min(grid.count, 65);
    const BallisticReport rep = ballistic_bound_check(op, decomp, st.psi, thin);
    slacks[static_cast<std::size_t>(i)] = rep.min_slack;
    run.traces[static_cast<std::size_t>(i)] = std::move(tr);
  });
  for (double s : slacks) run.ballistic_min_slack = std::min(run.ballistic_min_slack, s);
  for (const auto& tr : run.traces) run.max_leak = std::max(run.max_leak, tr.max_leak);
  run.averaged = disorder_average(run.traces);
  return run;
}

std::string moments_csv(const std::vector<DynamicsTrace>& traces) {
  CsvWriter csv({"realization", "t", "m"});
  for (const auto& tr : traces)
    for (int j = 0; j < tr.grid.count; ++j)
      csv.add_row({csv_cell(tr.realization), csv_cell(tr.grid.t(j)),
                   csv_cell(tr.m[static_cast<std::size_t>(j)])});
  return csv.str();
}

std::string cesaro_csv(const std::vector<DynamicsTrace>& traces) {
  CsvWriter csv({"realization", "T", "C"});
  for (const auto& tr : traces)
    for (std::size_t j = 0; j < tr.cesaro_T.size(); ++j)
      csv.add_row({csv_cell(tr.realization), csv_cell(tr.cesaro_T[j]), csv_cell(tr.cesaro_C[j])});
  return csv.str();
}

std::string averaged_csv(const AveragedTrace& avg) {
  CsvWriter csv({"t", "mean_m", "se_m"});
  for (int j = 0; j < avg.grid.count; ++j)
    csv.add_row({csv_cell(avg.grid.t(j)), csv_cell(avg.mean_m[static_cast<std::size_t>(j)]),
                 csv_cell(avg.se_m[static_cast<std::size_t>(j)])});
  return csv.str();
}

std::string averaged_cesaro_csv(const AveragedTrace& avg) {
  CsvWriter csv({"T", "mean_C", "se_C"});
  for (std::size_t j = 0; j < avg.cesaro_T.size(); ++j)
    csv.add_row({csv_cell(avg.cesaro_T[j]), csv_cell(avg.mean_C[j]), csv_cell(avg.se_C[j])});
  return csv.str();
}

}  // namespace

ExperimentRunner::ExperimentRunner(RunConfig config, std::filesystem::path out_dir)
    : cfg_(std::move(config)), out_(std::move(out_dir)) {}

void ExperimentRunner::verdict(const std::string& name, bool pass) {
  verdicts_.emplace_back(name, pass);
}

void ExperimentRunner::run(const std::string& subcommand) {
  if (subcommand == "dynamics") run_dynamics();
  else if (subcommand == "exponents") run_exponents();
  else if (subcommand == "msa") run_msa();
  else if (subcommand == "wegner") run_wegner();
  else if (subcommand == "green-checks") run_green_checks();
  else if (subcommand == "certify") run_certify();
  else if (subcommand == "all") {
    run_green_checks();
    run_dynamics();
    run_exponents();
    run_msa();
    run_wegner();
    run_certify();
  } else {
    throw std::runtime_error("unknown subcommand '" + subcommand + "'");
  }
}

int ExperimentRunner::finalize(std::ostream& diagnostics) {
  // The echo records the actual execution parameters (worker count included),
  // so it sits outside the manifest: data artifacts must hash identically for
  // any worker count.
  atomic_write_file(out_ / "resolved_config.cfg", cfg_.resolved_echo());
  manifest_.write(out_);
  bool all_ok = true;
  for (const auto& [name, ok] : verdicts_) {
    if (!ok) {
      all_ok = false;
      diagnostics << "FAILED verdict: " << name << "\n";
    }
  }
  return all_ok ? 0 : 1;
}

void ExperimentRunner::run_dynamics() {
  const DynamicsRun run = run_dynamics_pipeline(cfg_);
  manifest_.record(out_, "moments.csv", moments_csv(run.traces));
  manifest_.record(out_, "cesaro.csv", cesaro_csv(run.traces));
  manifest_.record(out_, "averaged_moments.csv", averaged_csv(run.averaged));
  manifest_.record(out_, "averaged_cesaro.csv", averaged_cesaro_csv(run.averaged));

  ordered_json j;
  j["realizations"] = run.averaged.realizations;
  j["initial_state"] = run.averaged.initial_state;
  // Fields are never persisted; (spec, seed, index) provenance identifies them.
  j["disorder"] = {{"kind", cfg_.get_string("disorder.kind")},
                   {"half_width", cfg_.get_double("disorder.half_width")},
                   {"correlation_radius", cfg_.get_int("disorder.correlation_radius")},
                   {"master_seed", cfg_.get_uint64("execution.master_seed")}};
  j["mean_sup_cesaro"] = run.averaged.mean_sup_C;
  j["se_sup_cesaro"] = run.averaged.se_sup_C;
  j["ballistic_min_slack"] = run.ballistic_min_slack;
  j["max_boundary_leak"] = run.max_leak;
  manifest_.record(out_, "dynamics_summary.json", j.dump(2) + "\n");

  verdict("dynamics.ballistic_bound", run.ballistic_min_slack >= -1e-10);
  verdict("dynamics.boundary_leak", run.max_leak <= cfg_.get_double("dynamics.leak_threshold"));
}

void ExperimentRunner::run_exponents() {
  const DynamicsRun run = run_dynamics_pipeline(cfg_);
  std::vector<FitWindow> windows;
  for (const auto& [lo, hi] : cfg_.get_pair_list("estimators.fit_windows"))
    windows.push_back({lo, hi});
  const ExponentFit fit = fit_exponents(run.averaged, windows,
                                        cfg_.get_int("estimators.bootstrap_resamples"),
                                        cfg_.get_uint64("execution.master_seed") ^ 0xf17eULL);

  ordered_json j;
  j["windows"] = ordered_json::array();
  for (const auto& w : fit.windows) {
    j["windows"].push_back({{"t_lo", w.window.t_lo},
                            {"t_hi", w.window.t_hi},
                            {"slope", w.slope},
                            {"slope_se", w.slope_se},
                            {"r2", w.r2},
                            {"points", w.points}});
  }
  j["sigma_minus"] = fit.sigma_minus;
  j["sigma_plus"] = fit.sigma_plus;
  j["sigma_minus_se"] = fit.sigma_minus_se;
  j["sigma_plus_se"] = fit.sigma_plus_se;

  const double horizon = cfg_.get_double("estimators.dynloc_horizon");
  if (!run.averaged.cesaro_T.empty() && run.averaged.cesaro_T.back() >= horizon) {
    const DynlocStatistic st = dynloc_statistic(
        run.averaged, cfg_.get_double("estimators.stability_threshold"), horizon);
    j["dynloc"] = {{"mean_sup", st.mean_sup},
                   {"se", st.se},
                   {"stability_ratio", st.stability_ratio},
                   {"ratio_threshold", st.ratio_threshold},
                   {"bounded_verdict", st.bounded_verdict}};
  } else {
    j["dynloc"] = "skipped: Cesaro grid does not reach the configured horizon";
  }

  if (cfg_.get_bool("estimators.abel_enabled")) {
    const LatticeSpec lattice = lattice_from(cfg_);
    const DisorderSpec disorder = disorder_from(cfg_);
    const std::vector<double> eps_list = cfg_.get_double_list("estimators.abel_eps");
    const int reals = cfg_.get_int("estimators.abel_realizations");
    const int cap = cfg_.get_int("operator.matrix_cap");
    Eigen::MatrixXd values(reals, static_cast<int>(eps_list.size()));
    parallel_for_indexed(reals, cfg_.get_int("execution.workers"), [&](std::int64_t i) {
      const DisorderField field = sample_field(disorder, lattice, i);
      const LatticeOperator op = assemble(lattice, field);
      const SpectralDecomposition decomp = diagonalize(op, cap);
      const InitialState st = initial_state_from(cfg_, op, decomp);
      for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const auto range = abel_default_range(op, eps_list[e]);
        const AbelResult a = abel_functional(op, st.psi, eps_list[e], range.first, range.second,
                                             eps_list[e] / 4);
        values(static_cast<int>(i), static_cast<int>(e)) = a.value;
      }
    });
    const AbelTrend trend = abel_trend(eps_list, values,
                                       cfg_.get_int("estimators.bootstrap_resamples"),
                                       cfg_.get_uint64("execution.master_seed") ^ 0xabe1ULL);
    ordered_json pts = ordered_json::array();
    for (const auto& p : trend.points)
      pts.push_back({{"eps", p.eps}, {"mean", p.mean}, {"se", p.se}});
    j["abel_trend"] = {{"points", pts},
                       {"slope", trend.slope},
                       {"slope_se", trend.slope_se},
                       {"vanishing_verdict", trend.vanishing_verdict}};
  }
  manifest_.record(out_, "exponent_fit.json", j.dump(2) + "\n");

  const double ceiling_tol = 0.05 + 3.0 * fit.sigma_plus_se;
  verdict("exponents.ballistic_ceiling", fit.sigma_plus <= 2.0 + ceiling_tol);
}

void ExperimentRunner::run_msa() {
  const LatticeSpec lattice = lattice_from(cfg_);
  const DisorderSpec disorder = disorder_from(cfg_);
  const int workers = cfg_.get_int("execution.workers");
  const int realizations = cfg_.get_int("msa.realizations");
  const std::string variant = cfg_.get_string("msa.variant");

  MsaParams params;
  params.variant = variant == "m1" ? MsaVariant::UniformEnergy : MsaVariant::FixedEnergy;
  params.rho = variant == "m1" ? ThresholdKind::StretchedExponential : ThresholdKind::PowerLaw;
  params.dimension = lattice.dimension;
  params.alpha = cfg_.get_double("msa.alpha");
  params.p = cfg_.get_double("msa.p");
  params.m = cfg_.get_double("msa.m");
  params.nu = cfg_.get_double("msa.nu");
  params.beta = cfg_.get_double("msa.beta");

  EpsProbeGrid grid;
  grid.eps_min = cfg_.get_double("msa.eps_min");
  grid.points = cfg_.get_int("msa.eps_probes");

  std::string hypothesis;
  const bool hypothesis_ok = params.exponents_ok(&hypothesis);

  ordered_json j;
  j["variant"] = variant;
  j["exponent_hypothesis"] = {{"ok", hypothesis_ok}, {"description", hypothesis}};
  j["schedule"] = {{"alpha", params.alpha}, {"scales", cfg_.get_double_list("msa.scales")}};
  j["per_scale"] = ordered_json::array();

  const Site center = make_site(cfg_.get_int("msa.center"));
  bool all_verdicts = true;
  CsvWriter verdict_csv({"realization", "E_or_window", "L", "q", "measured_norm", "threshold",
                         "guard_distance", "pass"});
  auto verdict_row = [&](std::int64_t realization, const std::string& e_or_window,
                         const RegularityVerdict& v) {
    verdict_csv.add_row({csv_cell(realization), e_or_window, csv_cell(v.box_radius),
                         csv_cell(static_cast<std::int64_t>(v.center[0])),
                         csv_cell(v.measured_norm), csv_cell(v.threshold),
                         csv_cell(v.guard_distance),
                         csv_cell(static_cast<std::int64_t>(v.pass ? 1 : 0))});
  };
  for (double scale : cfg_.get_double_list("msa.scales")) {
    const ScaleSchedule sched = make_schedule(scale, params.alpha, 0);
    ordered_json row;
    if (params.variant == MsaVariant::FixedEnergy) {
      const ScaleProbability pr =
          estimate_m2_probability(lattice, disorder, params, sched, 0,
                                  cfg_.get_double("msa.energy"), center, realizations, grid,
                                  workers);
      for (std::size_t i = 0; i < pr.per_realization.size(); ++i)
        verdict_row(static_cast<std::int64_t>(i),
                    format_double(cfg_.get_double("msa.energy")), pr.per_realization[i]);
      row = {{"L", pr.length},        {"samples", pr.samples}, {"passes", pr.passes},
             {"pass_fraction", pr.fraction}, {"ci_low", pr.ci_lo},   {"ci_high", pr.ci_hi},
             {"bound", pr.bound},     {"verdict", pr.verdict}};
      all_verdicts = all_verdicts && pr.verdict;
    } else {
      std::vector<double> energies;
      const double lo = cfg_.get_double("msa.m1_lo"), hi = cfg_.get_double("msa.m1_hi");
      const int pts = cfg_.get_int("msa.m1_points");
      for (int i = 0; i < pts; ++i)
        energies.push_back(lo + (hi - lo) * i / std::max(1, pts - 1));
      const M1Probability pr = estimate_m1_probability(
          lattice, disorder, params, sched, 0, energies, center,
          make_site(cfg_.get_int("msa.m1_center2")), realizations, grid, workers);
      const std::string window = format_double(lo) + ":" + format_double(hi);
      for (std::size_t i = 0; i < pr.worst_at_q.size(); ++i) {
        verdict_row(static_cast<std::int64_t>(i), window, pr.worst_at_q[i]);
        verdict_row(static_cast<std::int64_t>(i), window, pr.worst_at_q_prime[i]);
      }
      row = {{"L", pr.uniform_choice.length},
             {"samples", pr.uniform_choice.samples},
             {"uniform_choice",
              {{"passes", pr.uniform_choice.passes},
               {"pass_fraction", pr.uniform_choice.fraction},
               {"ci_low", pr.uniform_choice.ci_lo},
               {"ci_high", pr.uniform_choice.ci_hi},
               {"verdict", pr.uniform_choice.verdict}}},
             {"per_energy",
              {{"passes", pr.per_energy.passes},
               {"pass_fraction", pr.per_energy.fraction},
               {"ci_low", pr.per_energy.ci_lo},
               {"ci_high", pr.per_energy.ci_hi},
               {"verdict", pr.per_energy.verdict}}},
             {"bound", pr.uniform_choice.bound},
             {"energy_grid_spacing", pr.energy_grid_spacing}};
      all_verdicts = all_verdicts && pr.uniform_choice.verdict;
    }
    j["per_scale"].push_back(row);
  }

  // Certificate blocks echo the configured constants alongside the verdicts.
  CertificateParams cp;
  cp.alpha = cfg_.get_double("certify.alpha");
  cp.m = cfg_.get_double("certify.m");
  cp.w = cfg_.get_double("certify.w");
  cp.S = cfg_.get_int("certify.S");
  cp.N = cfg_.get_int("certify.N");
  cp.dimension = cfg_.get_int("certify.dimension");
  cp.K0 = cfg_.get_double("certify.K0");
  cp.theta = cfg_.get_double("certify.theta");
  cp.p = cfg_.get_double("certify.p");
  cp.C_W = cfg_.get_double("certify.C_W");
  cp.interval_length = cfg_.get_double("certify.interval_length");
  cp.c_NSd = cfg_.get_double("certify.c_NSd");
  cp.c_dN = cfg_.get_double("certify.c_dN");
  cp.c_tilde = cfg_.get_double("certify.c_tilde");
  const DeterministicCertificate det = deterministic_certificate(cp, cfg_.get_double("certify.ell"));
  const ProbabilisticCertificate prob = probabilistic_certificate(cp, cfg_.get_double("certify.L0"));
  j["certificates"] = {{"constants",
                        {{"alpha", cp.alpha}, {"m", cp.m}, {"w", cp.w}, {"S", cp.S}, {"N", cp.N},
                         {"dimension", cp.dimension}, {"K0", cp.K0}, {"theta", cp.theta},
                         {"p", cp.p}, {"C_W", cp.C_W}, {"interval_length", cp.interval_length},
                         {"c_NSd", cp.c_NSd}, {"c_dN", cp.c_dN}, {"c_tilde", cp.c_tilde}}},
                       {"deterministic",
                        {{"condition_ok", det.condition_ok},
                         {"condition_lhs", det.condition_lhs},
                         {"condition_rhs", det.condition_rhs},
                         {"chain_ok", det.chain_ok},
                         {"smallest_passing_L", det.smallest_passing_L}}},
                       {"probabilistic",
                        {{"hypothesis_ok", prob.hypothesis_ok},
                         {"lower_bound", prob.lower_bound},
                         {"target", prob.target},
                         {"pass", prob.pass}}}};
  manifest_.record(out_, "regularity_verdicts.csv", verdict_csv.str());
  manifest_.record(out_, "msa_report.json", j.dump(2) + "\n");
  verdict("msa.scale_verdicts", all_verdicts);
}

void ExperimentRunner::run_wegner() {
  const LatticeSpec lattice = lattice_from(cfg_);
  const DisorderSpec disorder = disorder_from(cfg_);
  const Box box1{make_site(cfg_.get_int("wegner.center1")), cfg_.get_double("wegner.box_radius")};
  const Box box2{make_site(cfg_.get_int("wegner.center2")), cfg_.get_double("wegner.box_radius")};
  const WegnerResult res = wegner_pair(
      lattice, disorder, cfg_.get_double("wegner.energy"), cfg_.get_double_list("wegner.eta"),
      box1, box2, cfg_.get_int("wegner.realizations"), cfg_.get_int("wegner.min_gap"),
      cfg_.get_int("execution.workers"));

  CsvWriter csv({"eta", "estimate", "se", "bound_ratio"});
  for (std::size_t e = 0; e < res.eta.size(); ++e)
    csv.add_row({csv_cell(res.eta[e]), csv_cell(res.estimate[e]), csv_cell(res.se[e]),
                 csv_cell(res.bound_ratio[e])});
  manifest_.record(out_, "wegner.csv", csv.str());

  double ratio_lo = std::numeric_limits<double>::infinity(), ratio_hi = 0;
  for (double r : res.bound_ratio) {
    ratio_lo = std::min(ratio_lo, r);
    ratio_hi = std::max(ratio_hi, r);
  }
  ordered_json j;
  j["energy"] = res.energy;
  j["box1_sites"] = res.box1_sites;
  j["box2_sites"] = res.box2_sites;
  j["fitted_power"] = res.fitted_power;
  j["fitted_constant"] = res.fitted_constant;
  j["ratio_spread"] = ratio_lo > 0 ? ratio_hi / ratio_lo : std::numeric_limits<double>::infinity();
  manifest_.record(out_, "wegner_summary.json", j.dump(2) + "\n");

  verdict("wegner.power_near_2", std::abs(res.fitted_power - 2.0) <= 0.2);
  verdict("wegner.ratio_bounded", ratio_lo > 0 && ratio_hi / ratio_lo <= 3.0);
}

void ExperimentRunner::run_green_checks() {
  const DisorderSpec disorder = disorder_from(cfg_);
  const int workers = cfg_.get_int("execution.workers");
  const double energy = cfg_.get_double("green.gre_energy");
  const double eps = cfg_.get_double("green.gre_eps");

  struct GreRow {
    std::int64_t instance;
    int dimension;
    double radius;
    int q_coord;
    double residual;
    double conj_error;
    double control_residual;
  };
  std::vector<GreRow> rows;

  auto run_gre = [&](const LatticeSpec& lattice, double radius, int instances,
                     std::int64_t index_base) {
    std::vector<GreRow> local(static_cast<std::size_t>(instances));
    parallel_for_indexed(instances, workers, [&](std::int64_t i) {
      const DisorderField field = sample_field(disorder, lattice, index_base + i);
      const LatticeOperator op = assemble(lattice, field);
      const Box box{make_site(0), radius};
      const int qx = static_cast<int>(2 * radius) + 2 +
                     static_cast<int>(i % std::max<std::int64_t>(
                                          1, lattice.half() - 2 - static_cast<int>(2 * radius)));
      const Site q = make_site(qx);
      GreRow row;
      row.instance = index_base + i;
      row.dimension = lattice.dimension;
      row.radius = radius;
      row.q_coord = qx;
      row.residual = gre_identity_residual(op, box, q, energy, eps);
      row.control_residual = gre_identity_residual(op, box, q, energy, eps, /*drop_pairs=*/1);
      // Conjugation symmetry of the full Green element.
      const int row_qp = op.row_of_site(make_site(0));
      const Complex g_plus = resolve(op, q, energy, eps)[row_qp];
      const Complex g_minus = resolve(op, q, energy, -eps)[row_qp];
      row.conj_error = std::abs(g_plus - std::conj(g_minus));
      local[static_cast<std::size_t>(i)] = row;
    });
    rows.insert(rows.end(), local.begin(), local.end());
  };

  const LatticeSpec lat1 = lattice_from(cfg_);
  run_gre(lat1, cfg_.get_double("green.gre_box_radius"), cfg_.get_int("green.gre_instances"), 0);
  if (cfg_.get_int("green.gre_instances_2d") > 0) {
    const LatticeSpec lat2(2, cfg_.get_int("green.extent_2d"));
    run_gre(lat2, cfg_.get_double("green.gre_box_radius_2d"),
            cfg_.get_int("green.gre_instances_2d"), 1000);
  }

  CsvWriter csv({"instance", "dimension", "L", "q", "residual", "conjugation_error",
                 "negative_control_residual"});
  bool residuals_ok = true, controls_ok = true, conj_ok = true;
  for (const auto& r : rows) {
    csv.add_row({csv_cell(r.instance), csv_cell(static_cast<std::int64_t>(r.dimension)),
                 csv_cell(r.radius), csv_cell(static_cast<std::int64_t>(r.q_coord)),
                 csv_cell(r.residual), csv_cell(r.conj_error), csv_cell(r.control_residual)});
    residuals_ok = residuals_ok && r.residual <= 1e-10;
    controls_ok = controls_ok && r.control_residual > 1e-8;
    conj_ok = conj_ok && r.conj_error <= 1e-12;
  }
  manifest_.record(out_, "gre_residuals.csv", csv.str());

  // Resolvent energy integrals against the universal bound.
  const LatticeSpec lattice = lattice_from(cfg_);
  const double reps = cfg_.get_double("green.residuum_eps");
  const int samples = cfg_.get_int("green.residuum_samples");
  CsvWriter rcsv({"sample", "eps", "integral", "bound", "pass", "fullrange_integral",
                  "fullrange_relative_gap"});
  bool residuum_ok = true, fullrange_ok = true;
  std::vector<std::array<double, 4>> rrows(static_cast<std::size_t>(samples));
  parallel_for_indexed(samples, workers, [&](std::int64_t i) {
    const DisorderField field = sample_field(disorder, lattice, 2000 + i);
    const LatticeOperator op = assemble(lattice, field);
    // Deterministic pseudo-random normalized state.
    Eigen::VectorXcd psi(op.dim());
    for (int k = 0; k < op.dim(); ++k)
      psi[k] = Complex(u01(keyed_hash(disorder.master_seed, 77, i, k)) - 0.5,
                       u01(keyed_hash(disorder.master_seed, 78, i, k)) - 0.5);
    psi.normalize();
    const ResiduumResult sub =
        residuum_check(op, psi, cfg_.get_double("green.residuum_lo"),
                       cfg_.get_double("green.residuum_hi"), reps);
    const auto hull = spectral_hull(op);
    const double margin = 10.0 / reps + 64.0 * reps;
    const ResiduumResult full =
        residuum_check(op, psi, hull.first - margin, hull.second + margin, reps);
    rrows[static_cast<std::size_t>(i)] = {sub.integral, sub.pass ? 1.0 : 0.0, full.integral,
                                          std::abs(full.integral - full.bound) / full.bound};
  });
  for (std::int64_t i = 0; i < samples; ++i) {
    const auto& r = rrows[static_cast<std::size_t>(i)];
    const double bound = 3.14159265358979323846 / reps;
    rcsv.add_row({csv_cell(i), csv_cell(reps), csv_cell(r[0]), csv_cell(bound),
                  csv_cell(static_cast<std::int64_t>(r[1])), csv_cell(r[2]), csv_cell(r[3])});
    residuum_ok = residuum_ok && r[1] > 0.5;
    fullrange_ok = fullrange_ok && r[3] <= 0.01;
  }
  manifest_.record(out_, "residuum.csv", rcsv.str());

  verdict("green.gre_residuals", residuals_ok);
  verdict("green.gre_negative_control", controls_ok);
  verdict("green.conjugation_symmetry", conj_ok);
  verdict("green.residuum_bound", residuum_ok);
  verdict("green.residuum_fullrange", fullrange_ok);
}

void ExperimentRunner::run_certify() {
  CertificateParams cp;
  cp.alpha = cfg_.get_double("certify.alpha");
  cp.m = cfg_.get_double("certify.m");
  cp.w = cfg_.get_double("certify.w");
  cp.S = cfg_.get_int("certify.S");
  cp.N = cfg_.get_int("certify.N");
  cp.dimension = cfg_.get_int("certify.dimension");
  cp.K0 = cfg_.get_double("certify.K0");
  cp.theta = cfg_.get_double("certify.theta");
  cp.p = cfg_.get_double("certify.p");
  cp.C_W = cfg_.get_double("certify.C_W");
  cp.interval_length = cfg_.get_double("certify.interval_length");
  cp.c_NSd = cfg_.get_double("certify.c_NSd");
  cp.c_dN = cfg_.get_double("certify.c_dN");
  cp.c_tilde = cfg_.get_double("certify.c_tilde");

  const DeterministicCertificate det = deterministic_certificate(cp, cfg_.get_double("certify.ell"));
  const ProbabilisticCertificate prob = probabilistic_certificate(cp, cfg_.get_double("certify.L0"));
  bool decay_ok = false;
  const double decay_bound =
      algebraic_decay_exponent_bound(cp.alpha, cp.dimension, cfg_.get_double("certify.n"), &decay_ok);

  ordered_json j;
  j["constants"] = {{"alpha", cp.alpha}, {"m", cp.m}, {"w", cp.w}, {"S", cp.S}, {"N", cp.N},
                    {"dimension", cp.dimension}, {"K0", cp.K0}, {"theta", cp.theta}, {"p", cp.p},
                    {"C_W", cp.C_W}, {"interval_length", cp.interval_length},
                    {"c_NSd", cp.c_NSd}, {"c_dN", cp.c_dN}, {"c_tilde", cp.c_tilde},
                    {"ell", cfg_.get_double("certify.ell")}, {"L0", cfg_.get_double("certify.L0")},
                    {"n", cfg_.get_double("certify.n")}};
  j["deterministic"] = {{"condition_ok", det.condition_ok},
                        {"condition_lhs", det.condition_lhs},
                        {"condition_rhs", det.condition_rhs},
                        {"ell", det.ell},
                        {"L", det.length},
                        {"chain_log10_excess", det.chain_log10},
                        {"chain_ok", det.chain_ok},
                        {"smallest_passing_L", det.smallest_passing_L}};
  j["probabilistic"] = {{"hypothesis_ok", prob.hypothesis_ok},
                        {"hypothesis_window", {prob.hypothesis_lo, prob.hypothesis_hi}},
                        {"L1", prob.L1},
                        {"wegner_term", prob.wegner_term},
                        {"combinatorial_term", prob.combinatorial_term},
                        {"lower_bound", prob.lower_bound},
                        {"target", prob.target},
                        {"pass", prob.pass},
                        {"deficit", prob.deficit}};
  j["algebraic_decay_bound"] = {{"value", decay_bound}, {"hypothesis_ok", decay_ok}};
  manifest_.record(out_, "certificate.json", j.dump(2) + "\n");

  verdict("certify.deterministic_condition", det.condition_ok);
  verdict("certify.probabilistic_hypothesis", prob.hypothesis_ok);
}

}  // namespace dynloc
