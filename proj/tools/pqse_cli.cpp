// pqse: command-line front end for the subspace-expansion experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pqse/harness.hpp"

namespace {

using namespace pqse;

struct SharedArgs {
  std::string spin_ring;
  std::string hamiltonian;
  std::string ref;
  std::string basis = "power";
  std::string dt = "auto";
  std::size_t rmin = 1;
  std::size_t rmax = 1;
  std::vector<double> deltas{0.0};
  std::size_t instances = 1;
  std::uint64_t seed = 0;
  std::string criterion = "variance";
  std::string a_grid = "-0.5,5,50";
  std::string out;
  std::string format = "csv";
  std::size_t threads = 1;
  bool rescale = false;
  bool fidelity = false;
  bool timing = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_real(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw CLI::ValidationError(what, "'" + s + "' is not a number");
  return v;
}

void add_shared(CLI::App* app, SharedArgs& a, bool needs_system) {
  auto* ring = app->add_option("--spin-ring", a.spin_ring, "n,J,h,seed: disordered Heisenberg ring");
  auto* file = app->add_option("--hamiltonian", a.hamiltonian, "Pauli-sum file")->check(CLI::ExistingFile);
  ring->excludes(file);
  if (needs_system) {
    auto* grp = app->add_option_group("system");
    grp->add_option(ring);
    grp->add_option(file);
    grp->require_option(1);
  }
  app->add_option("--ref", a.ref, "reference bitstring (overrides the file's ref line)");
  app->add_option("--basis", a.basis, "power|rte")->check(CLI::IsMember({"power", "rte"}));
  app->add_option("--dt", a.dt, "RTE timestep: auto or a positive float");
  app->add_option("--rmin", a.rmin, "smallest Krylov order")->check(CLI::PositiveNumber);
  app->add_option("--rmax", a.rmax, "largest Krylov order")->check(CLI::PositiveNumber);
  app->add_option("--delta", a.deltas, "noise strengths")->delimiter(',');
  app->add_option("--instances", a.instances, "noise instances per delta")->check(CLI::PositiveNumber);
  app->add_option("--seed", a.seed, "master seed for noise draws");
  app->add_option("--criterion", a.criterion, "variance|energy2")->check(CLI::IsMember({"variance", "energy2"}));
  app->add_option("--a-grid", a.a_grid, "TQSE threshold exponents lo,hi,count");
  app->add_option("--out", a.out, "output path (default stdout)");
  app->add_option("--format", a.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--rescale", a.rescale, "use H / ||H||");
  app->add_flag("--fidelity", a.fidelity, "record overlap with the exact ground state");
  app->add_flag("--timing", a.timing, "add a wall_time column (output no longer reproducible)");
}

ExperimentConfig make_config(const SharedArgs& a) {
  ExperimentConfig cfg;
  if (!a.spin_ring.empty()) {
    const auto f = split(a.spin_ring, ',');
    if (f.size() != 4) throw CLI::ValidationError("--spin-ring", "expected n,J,h,seed");
    SpinRingSystem ring;
    ring.n = static_cast<std::size_t>(std::stoul(f[0]));
    ring.coupling = to_real(f[1], "--spin-ring");
    ring.disorder = to_real(f[2], "--spin-ring");
    ring.disorder_seed = std::stoull(f[3]);
    cfg.system = ring;
    if (!a.ref.empty()) throw CLI::ValidationError("--ref", "only valid with --hamiltonian");
  } else {
    PauliFileSystem pf;
    pf.path = a.hamiltonian;
    if (!a.ref.empty()) pf.reference_bits = a.ref;
    cfg.system = pf;
  }
  cfg.basis = a.basis == "rte" ? BasisKind::rte : BasisKind::power;
  if (a.dt != "auto") cfg.dt = to_real(a.dt, "--dt");
  cfg.r_min = a.rmin;
  cfg.r_max = std::max(a.rmax, a.rmin);
  cfg.deltas = a.deltas;
  cfg.instances = a.instances;
  cfg.master_seed = a.seed;
  const auto g = split(a.a_grid, ',');
  if (g.size() != 3) throw CLI::ValidationError("--a-grid", "expected lo,hi,count");
  cfg.a_grid = threshold_grid(to_real(g[0], "--a-grid"), to_real(g[1], "--a-grid"),
                              static_cast<std::size_t>(std::stoul(g[2])));
  cfg.rescale = a.rescale;
  cfg.fidelity = a.fidelity;
  cfg.record_timing = a.timing;
  cfg.threads = a.threads;
  return cfg;
}

Method pqse_method(const SharedArgs& a) { return a.criterion == "energy2" ? Method::pqse_alt : Method::pqse; }

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void emit_records(const SharedArgs& a, const std::vector<ExperimentRecord>& records) {
  if (a.format == "json")
    write_output(a.out, records_to_json(records, a.timing).dump(2) + "\n");
  else
    write_output(a.out, records_to_csv(records, a.timing));
}

void run_moments(const SharedArgs& a) {
  const ExperimentConfig cfg = make_config(a);
  cfg.validate();
  const ResolvedSystem sys = resolve_system(cfg.system, cfg.rescale);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::string csv;

  if (cfg.basis == BasisKind::power) {
    csv = "delta,instance,k,mu\n";
    const std::size_t kmax = 2 * cfg.r_max;
    const MomentSequence clean = compute_moments(sys.hamiltonian, sys.reference, 2 * kmax);
    for (double delta : cfg.deltas)
      for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
        const auto mu = perturb_moments(clean, kmax, NoiseSpec{delta, cfg.master_seed, inst});
        for (std::size_t k = 0; k <= kmax; ++k) {
          csv += format_real(delta) + "," + std::to_string(inst) + "," + std::to_string(k) + "," +
                 format_real(mu[k]) + "\n";
          arr.push_back({{"delta", delta}, {"instance", inst}, {"k", k}, {"mu", mu[k]}});
        }
      }
  } else {
    csv = "delta,instance,i,j,S_re,S_im,H_re,H_im,H2_re,H2_im\n";
    const double dt = cfg.dt ? *cfg.dt : default_rte_timestep(sys.hamiltonian);
    const RteTensors clean = rte_tensors(sys.hamiltonian, sys.reference, cfg.r_max, dt);
    for (double delta : cfg.deltas)
      for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
        const auto t = perturb_rte_tensors(clean, NoiseSpec{delta, cfg.master_seed, inst});
        for (Eigen::Index i = 0; i < t.order(); ++i)
          for (Eigen::Index j = 0; j < t.order(); ++j) {
            const cplx s = t.overlap(i, j), h = t.energy(i, j), h2 = t.energy_sq(i, j);
            csv += format_real(delta) + "," + std::to_string(inst) + "," + std::to_string(i) + "," +
                   std::to_string(j) + "," + format_real(s.real()) + "," + format_real(s.imag()) + "," +
                   format_real(h.real()) + "," + format_real(h.imag()) + "," + format_real(h2.real()) + "," +
                   format_real(h2.imag()) + "\n";
            arr.push_back({{"delta", delta},
                           {"instance", inst},
                           {"i", i},
                           {"j", j},
                           {"S", {s.real(), s.imag()}},
                           {"H", {h.real(), h.imag()}},
                           {"H2", {h2.real(), h2.imag()}}});
          }
      }
  }
  write_output(a.out, a.format == "json" ? arr.dump(2) + "\n" : csv);
}

void run_methods(const SharedArgs& a, std::vector<Method> methods, const std::string& summary) {
  ExperimentConfig cfg = make_config(a);
  cfg.methods = std::move(methods);
  cfg.validate();
  const auto records = run_experiment(cfg);
  emit_records(a, records);
  if (!summary.empty()) write_output(summary, aggregate_to_csv(aggregate(records)));
}

void run_hist(const SharedArgs& a, const std::string& input, const std::vector<Method>& methods) {
  std::vector<ExperimentRecord> records;
  if (!input.empty()) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + input + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    records = records_from_csv(buf.str());
  } else {
    if (a.spin_ring.empty() && a.hamiltonian.empty())
      throw CLI::ValidationError("hist", "give --in or a system to simulate");
    ExperimentConfig cfg = make_config(a);
    cfg.methods = methods;
    cfg.validate();
    records = run_experiment(cfg);
  }
  const auto rows = emit_histograms(records);
  write_output(a.out, a.format == "json" ? histograms_to_json(rows).dump(2) + "\n" : histograms_to_csv(rows));
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned quantum subspace expansion experiments"};
  app.require_subcommand(1);

  SharedArgs args;
  std::string summary;
  std::string input;
  std::vector<std::string> method_names{"qse", "tqse", "pqse", "pqse_alt"};

  auto* moments = app.add_subcommand("moments", "print clean or noisy subspace data");
  auto* qse = app.add_subcommand("qse", "plain QSE");
  auto* tqse = app.add_subcommand("tqse", "thresholded QSE with the best-case threshold scan");
  auto* pqse = app.add_subcommand("pqse", "partitioned QSE");
  auto* sweep = app.add_subcommand("sweep", "several methods over an R and delta grid");
  auto* hist = app.add_subcommand("hist", "partition-order and retained-dimension histograms");

  for (auto* sub : {moments, qse, tqse, pqse, sweep}) add_shared(sub, args, true);
  add_shared(hist, args, false);
  for (auto* sub : {qse, tqse, pqse, sweep})
    sub->add_option("--summary", summary, "also write per-(method, delta, R) means and minima here");
  for (auto* sub : {sweep, hist})
    sub->add_option("--methods", method_names, "subset of qse,tqse,pqse,pqse_alt")->delimiter(',');
  hist->add_option("--in", input, "records CSV from a previous sweep")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*moments)
      run_moments(args);
    else if (*qse)
      run_methods(args, {Method::qse}, summary);
    else if (*tqse)
      run_methods(args, {Method::tqse}, summary);
    else if (*pqse)
      run_methods(args, {pqse_method(args)}, summary);
    else if (*sweep)
      run_methods(args, parse_methods(method_names), summary);
    else if (*hist)
      run_hist(args, input, parse_methods(method_names));
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
