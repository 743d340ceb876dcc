#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "macdisp/errors.hpp"
#include "macdisp/gaussian.hpp"
#include "macdisp/io.hpp"
#include "macdisp/model.hpp"
#include "macdisp/montecarlo.hpp"
#include "macdisp/mvn.hpp"
#include "macdisp/region.hpp"
#include "macdisp/svg.hpp"

namespace {

using namespace macdisp;

constexpr const char* kVersion = "1.0.0";

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Every run ends by writing <prefix>.manifest.json listing all files written.
struct Manifest {
  std::string command;
  std::string started = utc_now();
  ojson config = ojson::object();
  std::vector<std::string> outputs;
  bool has_seed = false;
  std::uint64_t seed = 0;

  void emit(const std::string& path, const std::string& content) {
    write_text_file(path, content);
    outputs.push_back(path);
  }
  void finish(const std::string& prefix) {
    ojson doc{{"command", command},
              {"version", kVersion},
              {"started", started},
              {"finished", utc_now()}};
    if (has_seed) doc["seed"] = seed;
    doc["config"] = config;
    doc["outputs"] = outputs;
    write_text_file(prefix + ".manifest.json", doc.dump(2) + "\n");
    std::cout << "wrote " << prefix << ".manifest.json";
    for (const auto& f : outputs) std::cout << " " << f;
    std::cout << "\n";
  }
};

struct ModelArgs {
  std::string channel_file;
  bool collision = false;
  double p1 = 0.2, p2 = 0.2;

  std::pair<Channel, InputSpec> resolve() const {
    if (collision) return {collision_channel(), collision_inputs(p1, p2)};
    if (channel_file.empty())
      throw ValidationError("provide --channel FILE or --collision");
    return load_model_file(channel_file);
  }
  ojson echo() const {
    if (collision) return ojson{{"collision", true}, {"p1", p1}, {"p2", p2}};
    return ojson{{"channel", channel_file}};
  }
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--channel", m.channel_file, "channel/input JSON document");
  cmd->add_flag("--collision", m.collision, "built-in collision channel");
  cmd->add_option("--p1", m.p1, "collision input parameter, user 1")
      ->capture_default_str();
  cmd->add_option("--p2", m.p2, "collision input parameter, user 2")
      ->capture_default_str();
}

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  if (const char* s = std::getenv("MACDISP_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0')
      throw ValidationError("MACDISP_SEED must be an unsigned integer");
    return v;
  }
  return cli_seed;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t at = 0;
  while (at < s.size()) {
    std::size_t next = s.find(',', at);
    if (next == std::string::npos) next = s.size();
    try {
      out.push_back(std::stoi(s.substr(at, next - at)));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse integer list: " + s);
    }
    at = next + 1;
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

double normal_moment(int k) {
  if (k % 2 == 1) return 0.0;
  double f = 1.0;
  for (int j = k - 1; j >= 1; j -= 2) f *= j;
  return f;
}

int run_region(const ModelArgs& model, bool capacity_union, int n, double eps,
               int resolution, const std::string& prefix) {
  Manifest man;
  man.command = "region";
  man.config = model.echo();

  if (capacity_union) {
    if (!model.collision)
      throw ValidationError("--capacity-union requires --collision");
    man.config["capacity_union"] = true;
    const RegionBoundary u = collision_capacity_union();
    std::string csv = region_csv_header();
    append_region_csv(csv, u, "capacity_union");
    man.emit(prefix + ".csv", csv);
    man.emit(prefix + ".json",
             ojson{{"capacity_union", json_region(u)}}.dump(2) + "\n");
    man.emit(prefix + ".svg",
             render_plot("Capacity region over the collision input family", "R1",
                         "R2", {{"capacity union", u.points}}));
    man.finish(prefix);
    return 0;
  }

  man.config["n"] = n;
  man.config["eps"] = eps;
  man.config["resolution"] = resolution;
  auto [ch, inp] = model.resolve();
  const JointLaw j = joint_law(ch, inp);
  const InfoDensity d = info_density(j);
  const RateVector i = mean_vector(j, d);
  RegionConfig cfg;
  cfg.n = n;
  cfg.eps = eps;
  cfg.resolution = resolution;

  const RegionBoundary first = first_order_region(i, resolution);
  std::string csv = region_csv_header();
  append_region_csv(csv, first, "first_order");
  ojson report{{"first_order", json_region(first)}};
  std::vector<PlotSeries> series{{"first-order", first.points}};

  const std::pair<const char*, DispersionMatrix> traces[] = {
      {"second_order_cc", cov_cc(j, d)},
      {"second_order_cc_iid_1", cov_cc_iid(j, d, 1)},
      {"second_order_cc_iid_2", cov_cc_iid(j, d, 2)},
      {"second_order_iid", cov_iid(j, d)},
  };
  ojson second = ojson::object();
  for (const auto& [label, v] : traces) {
    const RegionBoundary b = trace_boundary(i, v, cfg);
    append_region_csv(csv, b, label);
    second[label] = json_region(b);
    series.push_back({label, b.points});
  }
  report["second_order"] = std::move(second);

  man.emit(prefix + ".csv", csv);
  man.emit(prefix + ".json", report.dump(2) + "\n");
  man.emit(prefix + ".svg",
           render_plot("Achievable rate regions", "R1", "R2", series));
  man.finish(prefix);
  return 0;
}

int run_dispersion(const ModelArgs& model, const std::string& prefix) {
  Manifest man;
  man.command = "dispersion";
  man.config = model.echo();

  auto [ch, inp] = model.resolve();
  const JointLaw j = joint_law(ch, inp);
  const InfoDensity d = info_density(j);
  const DispersionMatrix vcc = cov_cc(j, d);
  const DispersionMatrix v1 = cov_cc_iid(j, d, 1);
  const DispersionMatrix v2 = cov_cc_iid(j, d, 2);
  const DispersionMatrix viid = cov_iid(j, d);
  const DispersionMatrix vjoint = cov_joint(j, d);
  const GaussianSpec spec = decompose(vcc.m);

  const ojson report{
      {"i", json_rate(mean_vector(j, d))},
      {"v", json_dispersion(vcc)},
      {"v_cc_iid_1", json_dispersion(v1)},
      {"v_cc_iid_2", json_dispersion(v2)},
      {"v_iid", json_dispersion(viid)},
      {"v_joint", json_dispersion(vjoint)},
      {"rank_v", spec.rank},
      {"rank_deficient", spec.rank < 3},
      {"ordering_gaps",
       ojson{{"iid_minus_cc_iid_1", min_eigenvalue(viid.m - v1.m)},
             {"iid_minus_cc_iid_2", min_eigenvalue(viid.m - v2.m)},
             {"cc_iid_1_minus_cc", min_eigenvalue(v1.m - vcc.m)},
             {"cc_iid_2_minus_cc", min_eigenvalue(v2.m - vcc.m)},
             {"cc_minus_joint", min_eigenvalue(vcc.m - vjoint.m)}}},
  };
  man.emit(prefix + ".json", report.dump(2) + "\n");
  man.finish(prefix);
  return 0;
}

int run_simulate(const ModelArgs& model, int n, std::uint64_t trials,
                 std::uint64_t cli_seed, int workers, const std::string& mode,
                 double r1, double r2, const std::string& sweep,
                 const std::string& prefix) {
  Manifest man;
  man.command = "simulate";
  man.has_seed = true;
  man.seed = effective_seed(cli_seed);
  man.config = model.echo();
  man.config["trials"] = trials;
  man.config["workers"] = workers;

  auto [ch, inp] = model.resolve();
  const JointLaw j = joint_law(ch, inp);

  if (!sweep.empty()) {
    man.config["sweep_n"] = sweep;
    std::string csv = "n,clt_distance,trials\n";
    ojson rows = ojson::array();
    for (int nk : parse_int_list(sweep)) {
      const SimConfig cfg = make_sim_config(j, nk, trials, man.seed, workers);
      const double dist = clt_distance(ch, inp, cfg);
      csv += std::to_string(nk) + "," + format_double(dist) + "," +
             std::to_string(trials) + "\n";
      rows.push_back(ojson{{"n", nk}, {"clt_distance", dist}});
    }
    man.emit(prefix + ".csv", csv);
    man.emit(prefix + ".json",
             ojson{{"seed", man.seed}, {"clt_sweep", rows}}.dump(2) + "\n");
    man.finish(prefix);
    return 0;
  }

  man.config["n"] = n;
  man.config["mode"] = mode;
  const SimConfig cfg = make_sim_config(j, n, trials, man.seed, workers);
  ojson report{{"seed", man.seed}, {"n", n}, {"trials", trials}};

  if (mode == "moments") {
    const MomentEstimate est = empirical_in_moments(ch, inp, cfg);
    const JointLaw rl = realized_law(ch, cfg);
    const InfoDensity rd = info_density(rl);
    const MomentReport rep = finite_n_cov(rl, rd, n);
    const Eigen::Vector3d exact_mean = n * mean_vector(rl, rd).v;
    double max_z = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (est.mean_std_error[a] > 0)
        max_z = std::max(max_z, std::abs(est.mean[a] - exact_mean[a]) /
                                    est.mean_std_error[a]);
      for (int b = 0; b < 3; ++b)
        if (est.cov_std_error(a, b) > 0)
          max_z = std::max(max_z, std::abs(est.cov(a, b) - rep.exact_cov(a, b)) /
                                      est.cov_std_error(a, b));
    }
    report["exact_mean"] = ojson::array({exact_mean[0], exact_mean[1], exact_mean[2]});
    report["mean"] = ojson::array({est.mean[0], est.mean[1], est.mean[2]});
    report["mean_std_error"] = ojson::array(
        {est.mean_std_error[0], est.mean_std_error[1], est.mean_std_error[2]});
    report["cov"] = json_matrix(est.cov);
    report["cov_std_error"] = json_matrix(est.cov_std_error);
    report["exact_cov"] = json_matrix(rep.exact_cov);
    report["max_abs_z"] = max_z;
  } else if (mode == "bound") {
    const PeBound pb = pe_upper_bound(ch, inp, cfg, r1, r2);
    man.config["r1"] = r1;
    man.config["r2"] = r2;
    report["r1_nats"] = r1;
    report["r2_nats"] = r2;
    report["gamma"] = ojson::array({pb.gamma[0], pb.gamma[1], pb.gamma[2]});
    report["poly_degree"] = pb.poly_degree;
    report["penalty"] = pb.penalty;
    report["joint_success"] = ojson{{"estimate", pb.joint_success.estimate},
                                    {"std_error", pb.joint_success.std_error},
                                    {"trials", pb.joint_success.trials}};
    report["gaussian_success"] = pb.gaussian_success;
    report["mc_vs_gaussian_gap"] =
        std::abs(pb.joint_success.estimate - pb.gaussian_success);
    report["bound"] = pb.bound;
  } else if (mode == "clt") {
    report["clt_distance"] = clt_distance(ch, inp, cfg);
  } else {
    throw ValidationError("--mode must be moments, bound, or clt");
  }
  man.emit(prefix + ".json", report.dump(2) + "\n");
  man.finish(prefix);
  return 0;
}

int run_gaussian(double p1, double p2, int m, const std::string& msweep,
                 bool closed_only, const std::string& prefix) {
  Manifest man;
  man.command = "gaussian";
  man.config = ojson{{"p1", p1}, {"p2", p2}};

  const GaussianMac mac{p1, p2};
  const auto [i, v] = closed_form_iv(mac);
  ojson report{{"p1", p1},
               {"p2", p2},
               {"closed_form", ojson{{"i", json_rate(i)}, {"v", json_dispersion(v)}}}};

  if (closed_only) {
    man.config["closed_form"] = true;
    man.emit(prefix + ".json", report.dump(2) + "\n");
    man.finish(prefix);
    return 0;
  }

  if (!msweep.empty()) {
    man.config["m_sweep"] = msweep;
    const std::size_t colon = msweep.find(':');
    if (colon == std::string::npos)
      throw ValidationError("--m-sweep expects a:b");
    int lo = 0, hi = 0;
    try {
      lo = std::stoi(msweep.substr(0, colon));
      hi = std::stoi(msweep.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("--m-sweep expects a:b with integers");
    }
    if (lo < 1 || hi < lo) throw ValidationError("--m-sweep range is empty");
    std::string csv =
        "m,i1_nats,i2_nats,i12_nats,i_gap_inf,v_gap_inf,output_divergence\n";
    ojson rows = ojson::array();
    for (int mk = lo; mk <= hi; ++mk) {
      const QuantizedMoments q = quantized_iv(mac, mk);
      const double dm = relative_entropy_gap(mac, mk);
      const double gi = (q.i.v - i.v).cwiseAbs().maxCoeff();
      const double gv = (q.v.m - v.m).cwiseAbs().maxCoeff();
      csv += std::to_string(mk) + "," + format_double(q.i.r1()) + "," +
             format_double(q.i.r2()) + "," + format_double(q.i.r12()) + "," +
             format_double(gi) + "," + format_double(gv) + "," +
             format_double(dm) + "\n";
      rows.push_back(ojson{{"m", mk},
                           {"i", json_rate(q.i)},
                           {"i_gap_inf", gi},
                           {"v_gap_inf", gv},
                           {"output_divergence", dm}});
    }
    report["sweep"] = std::move(rows);
    man.emit(prefix + ".csv", csv);
    man.emit(prefix + ".json", report.dump(2) + "\n");
    man.finish(prefix);
    return 0;
  }

  man.config["m"] = m;
  const QuantizedMoments q = quantized_iv(mac, m);
  report["quantized"] = ojson{
      {"m", q.m},
      {"i", json_rate(q.i)},
      {"v", json_dispersion(q.v)},
      {"third_abs", ojson::array({q.third_abs[0], q.third_abs[1], q.third_abs[2]})},
      {"output_panels", q.panels},
      {"i_gap_inf", (q.i.v - i.v).cwiseAbs().maxCoeff()},
      {"v_gap_inf", (q.v.m - v.m).cwiseAbs().maxCoeff()}};
  report["output_divergence"] = relative_entropy_gap(mac, m);

  const QuadratureRule rule = gauss_rule(m);
  ojson moments = ojson::array();
  double worst_scaled = 0.0;
  for (int k = 0; k <= std::min(2 * m - 1, 25); ++k) {
    const double s = rule_moment(rule, k);
    const double want = normal_moment(k);
    const double scaled = std::abs(s - want) / std::max(1.0, std::abs(want));
    worst_scaled = std::max(worst_scaled, scaled);
    moments.push_back(ojson{{"order", k}, {"value", s}, {"target", want}});
  }
  double worst_hermite = 0.0;  // degree 0 excluded: He_0 = 1 has mean 1
  for (int k = 1; k <= 2 * m - 1; ++k)
    worst_hermite = std::max(worst_hermite, std::abs(hermite_expectation(mac, m, k)));
  report["rule_moments"] = std::move(moments);
  report["max_scaled_moment_error"] = worst_scaled;
  report["max_low_order_hermite_mean"] = worst_hermite;

  man.emit(prefix + ".json", report.dump(2) + "\n");
  man.finish(prefix);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate regions, dispersion matrices, and finite-blocklength "
               "simulation for two-user multiple-access channels"};
  app.require_subcommand(1);

  ModelArgs region_model, disp_model, sim_model;
  bool capacity_union = false;
  int region_n = 50, region_res = 128;
  double region_eps = 0.01;
  std::string region_out = "region";
  CLI::App* region = app.add_subcommand("region", "trace achievable rate regions");
  add_model_flags(region, region_model);
  region->add_flag("--capacity-union", capacity_union,
                   "union of first-order regions over the collision input grid");
  region->add_option("--n", region_n, "blocklength")->capture_default_str();
  region->add_option("--eps", region_eps, "target error probability")
      ->capture_default_str();
  region->add_option("--resolution", region_res, "rays per boundary")
      ->capture_default_str();
  region->add_option("--out", region_out, "output file prefix")->capture_default_str();

  std::string disp_out = "dispersion";
  CLI::App* disp = app.add_subcommand("dispersion", "report I and the dispersion matrices");
  add_model_flags(disp, disp_model);
  disp->add_option("--out", disp_out, "output file prefix")->capture_default_str();

  int sim_n = 20, sim_workers = 1;
  std::uint64_t sim_trials = 100000, sim_seed = 1;
  std::string sim_mode = "moments", sim_sweep, sim_out = "simulate";
  double sim_r1 = 0.0, sim_r2 = 0.0;
  CLI::App* sim = app.add_subcommand("simulate", "constant-composition Monte Carlo");
  add_model_flags(sim, sim_model);
  sim->add_option("--n", sim_n, "blocklength")->capture_default_str();
  sim->add_option("--trials", sim_trials, "Monte Carlo trials")->capture_default_str();
  sim->add_option("--seed", sim_seed, "base seed (MACDISP_SEED overrides)")
      ->capture_default_str();
  sim->add_option("--workers", sim_workers, "worker threads")->capture_default_str();
  sim->add_option("--mode", sim_mode, "moments | bound | clt")->capture_default_str();
  sim->add_option("--r1", sim_r1, "rate for user 1, nats/use (bound mode)")
      ->capture_default_str();
  sim->add_option("--r2", sim_r2, "rate for user 2, nats/use (bound mode)")
      ->capture_default_str();
  sim->add_option("--sweep-n", sim_sweep,
                  "comma-separated n list; emits a CLT-distance CSV");
  sim->add_option("--out", sim_out, "output file prefix")->capture_default_str();

  double g_p1 = 1.0, g_p2 = 1.0;
  int g_m = 8;
  bool g_closed = false;
  std::string g_sweep, g_out = "gaussian";
  CLI::App* gauss = app.add_subcommand("gaussian", "Gaussian channel moments");
  gauss->add_option("--p1", g_p1, "power of user 1")->capture_default_str();
  gauss->add_option("--p2", g_p2, "power of user 2")->capture_default_str();
  gauss->add_option("--m", g_m, "quadrature points per input")->capture_default_str();
  gauss->add_option("--m-sweep", g_sweep, "range a:b; emits a convergence CSV");
  gauss->add_flag("--closed-form", g_closed, "closed-form moments only");
  gauss->add_option("--out", g_out, "output file prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (region->parsed())
      return run_region(region_model, capacity_union, region_n, region_eps,
                        region_res, region_out);
    if (disp->parsed()) return run_dispersion(disp_model, disp_out);
    if (sim->parsed())
      return run_simulate(sim_model, sim_n, sim_trials, sim_seed, sim_workers,
                          sim_mode, sim_r1, sim_r2, sim_sweep, sim_out);
    if (gauss->parsed())
      return run_gaussian(g_p1, g_p2, g_m, g_sweep, g_closed, g_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
