#pragma once

// Experiment engine: sweeps over (method, R, delta, instance), error
// metrics, aggregation, histograms, and deterministic CSV / JSON output.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pqse/gevp.hpp"
#include "pqse/noise.hpp"
#include "pqse/pauli.hpp"
#include "pqse/pqse.hpp"
#include "pqse/simulator.hpp"
#include "pqse/subspace.hpp"

namespace pqse {

/// Threshold used by TQSE when no noise is injected.
inline constexpr double kNoiselessThreshold = 1e-13;

enum class Method { qse, tqse, pqse, pqse_alt };
enum class BasisKind { power, rte };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::qse: return "qse";
    case Method::tqse: return "tqse";
    case Method::pqse: return "pqse";
    case Method::pqse_alt: return "pqse_alt";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "qse") return Method::qse;
  if (s == "tqse") return Method::tqse;
  if (s == "pqse") return Method::pqse;
  if (s == "pqse_alt") return Method::pqse_alt;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline std::string to_string(BasisKind b) { return b == BasisKind::power ? "power" : "rte"; }

struct SpinRingSystem {
  std::size_t n = 10;
  double coupling = 0.1;
  double disorder = 1.0;
  std::uint64_t disorder_seed = 0;
};

struct PauliFileSystem {
  std::string path;
  std::optional<std::string> reference_bits;  // overrides the file's "# ref:" line
};

using SystemSpec = std::variant<SpinRingSystem, PauliFileSystem>;

struct ExperimentConfig {
  SystemSpec system = SpinRingSystem{};
  BasisKind basis = BasisKind::power;
  std::optional<double> dt;  // RTE timestep; nullopt = pi / ||H||
  std::vector<Method> methods{Method::qse};
  std::size_t r_min = 1;
  std::size_t r_max = 1;
  std::vector<double> deltas{0.0};
  std::size_t instances = 1;
  std::uint64_t master_seed = 0;
  std::vector<double> a_grid = threshold_grid();
  bool rescale = false;   // H -> H / ||H||
  bool fidelity = false;  // overlap of each estimate with the exact ground state
  bool record_timing = false;
  std::size_t threads = 1;

  void validate() const {
    if (instances < 1) throw std::invalid_argument("instances must be >= 1");
    if (r_min < 1 || r_max < r_min) throw std::invalid_argument("R range must satisfy 1 <= rmin <= rmax");
    if (deltas.empty()) throw std::invalid_argument("delta list is empty");
    for (double d : deltas)
      if (!(d >= 0.0)) throw std::invalid_argument("noise strengths must be non-negative");
    if (methods.empty()) throw std::invalid_argument("no methods selected");
    if (a_grid.empty()) throw std::invalid_argument("threshold grid is empty");
    if (dt && !(*dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  }
};

struct ExperimentRecord {
  Method method = Method::qse;
  BasisKind basis = BasisKind::power;
  std::size_t order = 0;  // R
  double delta = 0.0;
  std::size_t instance = 0;
  bool ok = true;
  std::string message;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double eps_rel = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> retained_dim;
  std::optional<double> best_a;
  std::optional<double> tau;
  std::vector<std::size_t> sequence;
  std::optional<std::size_t> partition_order;
  std::optional<bool> terminated_early;
  std::optional<double> final_variance;
  std::optional<double> fidelity;
  double wall_time = 0.0;
};

/// Hamiltonian and reference state of an experiment.
struct ResolvedSystem {
  PauliSum hamiltonian;
  std::string reference_bits;
  StateVector reference;
};

inline ResolvedSystem resolve_system(const SystemSpec& spec, bool rescale) {
  PauliSum h(1);
  std::string bits;
  if (const auto* ring = std::get_if<SpinRingSystem>(&spec)) {
    const DisorderSpec disorder{ring->coupling, ring->disorder, ring->disorder_seed};
    h = build_spin_ring(ring->n, disorder);
    bits = field_only_ground_bits(draw_disorder(ring->n, ring->disorder, ring->disorder_seed));
  } else {
    const auto& file = std::get<PauliFileSystem>(spec);
    std::ifstream in(file.path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open Hamiltonian file '" + file.path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_pauli_file(buf.str());
    h = std::move(parsed.hamiltonian);
    if (file.reference_bits)
      bits = *file.reference_bits;
    else if (parsed.reference_bits)
      bits = *parsed.reference_bits;
    else
      throw std::invalid_argument("no reference bitstring: pass --ref or add a '# ref:' line");
    if (bits.size() != h.num_qubits()) throw std::invalid_argument("reference bitstring length must equal n");
  }
  if (h.num_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("systems above " + std::to_string(kMaxDenseQubits) +
                                " qubits exceed the dense simulator");
  if (rescale) {
    const double norm = exact_ground(h).spectral_norm;
    if (norm == 0.0) throw std::invalid_argument("cannot rescale a zero Hamiltonian");
    h = h.scaled(1.0 / norm);
  }
  StateVector ref = basis_state(bits);
  return {std::move(h), std::move(bits), std::move(ref)};
}

namespace detail {

struct CleanData {
  std::optional<MomentSequence> moments;  // through mu_{4 R_max}
  std::optional<RteTensors> tensors;      // order R_max
};

inline double fidelity_of(const Eigen::VectorXcd& b, const ResolvedSystem& sys, const Spectrum& spec,
                          const KrylovBasis& basis) {
  const StateVector psi = reconstruct_state(b, sys.hamiltonian, sys.reference, basis);
  const double nrm2 = psi.amplitudes().squaredNorm();
  if (nrm2 == 0.0) return 0.0;
  return std::norm(state_overlap(spec.ground_state, psi)) / nrm2;
}

struct InstanceContext {
  const ExperimentConfig& cfg;
  const ResolvedSystem& sys;
  const Spectrum& spectrum;
  const CleanData& clean;
  KrylovBasis basis;
};

/// All records for one (delta, instance): indexed [R - r_min][method].
inline std::vector<ExperimentRecord> run_instance(const InstanceContext& ctx, double delta, std::size_t instance) {
  const auto& cfg = ctx.cfg;
  const double truth = ctx.spectrum.ground_energy;
  const NoiseSpec noise{delta, cfg.master_seed, instance};

  std::optional<MomentSequence> noisy_moments;
  std::optional<RteTensors> noisy_tensors;
  if (cfg.basis == BasisKind::power)
    noisy_moments = perturb_moments(*ctx.clean.moments, 2 * cfg.r_max, noise);
  else
    noisy_tensors = perturb_rte_tensors(*ctx.clean.tensors, noise);

  std::vector<ExperimentRecord> out;
  for (std::size_t r = cfg.r_min; r <= cfg.r_max; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (Method method : cfg.methods) {
      ExperimentRecord rec;
      rec.method = method;
      rec.basis = cfg.basis;
      rec.order = r;
      rec.delta = delta;
      rec.instance = instance;
      const auto start = std::chrono::steady_clock::now();
      try {
        SubspaceProblem noisy_problem;
        SubspaceProblem clean_problem;
        if (cfg.basis == BasisKind::power) {
          noisy_problem = hankel_matrices(*noisy_moments, r);
          if (method == Method::tqse) clean_problem = hankel_matrices(*ctx.clean.moments, r);
        } else {
          noisy_problem = noisy_tensors->leading_block(ri).problem();
          if (method == Method::tqse) clean_problem = ctx.clean.tensors->leading_block(ri).problem();
        }
        Eigen::VectorXcd coeffs;
        switch (method) {
          case Method::qse: {
            const auto sol = solve_gevp(noisy_problem, 0.0);
            rec.energy = sol.ground_energy();
            rec.retained_dim = static_cast<std::size_t>(sol.retained_dim);
            coeffs = sol.ground_coeffs;
            break;
          }
          case Method::tqse: {
            GevpSolution sol;
            if (delta == 0.0) {
              sol = solve_gevp(noisy_problem, kNoiselessThreshold);
              rec.tau = kNoiselessThreshold;
            } else {
              auto scan = tqse_scan(noisy_problem, noisy_problem.hmat - clean_problem.hmat,
                                    noisy_problem.smat - clean_problem.smat, truth, cfg.a_grid);
              rec.best_a = scan.best_a;
              rec.tau = scan.tau;
              sol = std::move(scan.solution);
            }
            rec.energy = sol.ground_energy();
            rec.retained_dim = static_cast<std::size_t>(sol.retained_dim);
            coeffs = sol.ground_coeffs;
            break;
          }
          case Method::pqse:
          case Method::pqse_alt: {
            PqseOptions opts;
            opts.criterion = method == Method::pqse ? Criterion::variance : Criterion::energy_squared;
            PqseResult res;
            if (cfg.basis == BasisKind::power) {
              const std::size_t k = method == Method::pqse ? 2 * r : 2 * r - 1;
              res = pqse_run(noisy_moments->truncated(k), r, opts);
            } else {
              res = pqse_run(noisy_tensors->leading_block(ri), r, opts);
            }
            rec.energy = res.energy;
            rec.sequence = res.sequence;
            rec.partition_order = res.order;
            rec.terminated_early = res.terminated_early;
            rec.final_variance = res.final_variance;
            coeffs = res.b;
            break;
          }
        }
        rec.eps_rel = relative_error(rec.energy, truth);
        if (cfg.fidelity) rec.fidelity = fidelity_of(coeffs, ctx.sys, ctx.spectrum, ctx.basis);
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.message = e.what();
        rec.energy = std::numeric_limits<double>::quiet_NaN();
        rec.eps_rel = std::numeric_limits<double>::quiet_NaN();
      }
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace detail

/// Clean data is generated once per run and shared by every instance; the
/// output order is (delta, R, method, instance) regardless of thread count.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ResolvedSystem sys = resolve_system(cfg.system, cfg.rescale);
  const Spectrum spectrum = exact_ground(sys.hamiltonian);
  if (spectrum.ground_energy == 0.0) throw std::invalid_argument("exact ground energy is zero; eps_rel undefined");

  detail::CleanData clean;
  KrylovBasis basis = PowerBasis{};
  if (cfg.basis == BasisKind::power) {
    clean.moments = compute_moments(sys.hamiltonian, sys.reference, 4 * cfg.r_max);
  } else {
    const double dt = cfg.dt ? *cfg.dt : std::numbers::pi / spectrum.spectral_norm;
    clean.tensors = rte_tensors(sys.hamiltonian, sys.reference, cfg.r_max, dt);
    basis = RteBasis{dt};
  }
  const detail::InstanceContext ctx{cfg, sys, spectrum, clean, basis};

  const std::size_t n_delta = cfg.deltas.size();
  const std::size_t n_tasks = n_delta * cfg.instances;
  std::vector<std::vector<ExperimentRecord>> per_task(n_tasks);
  std::vector<std::string> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        per_task[task] = detail::run_instance(ctx, cfg.deltas[task / cfg.instances], task % cfg.instances);
      } catch (const std::exception& e) {
        errors[task] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.threads, n_tasks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  const std::size_t n_r = cfg.r_max - cfg.r_min + 1;
  const std::size_t n_m = cfg.methods.size();
  std::vector<ExperimentRecord> records;
  records.reserve(n_tasks * n_r * n_m);
  for (std::size_t d = 0; d < n_delta; ++d)
    for (std::size_t r = 0; r < n_r; ++r)
      for (std::size_t m = 0; m < n_m; ++m)
        for (std::size_t i = 0; i < cfg.instances; ++i)
          records.push_back(per_task[d * cfg.instances + i][r * n_m + m]);
  return records;
}

// ---------------------------------------------------------------------------
// Aggregation

struct GroupStats {
  Method method;
  std::size_t order;
  double delta;
  std::size_t count = 0;
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

struct MinimumError {
  Method method;
  double delta;
  double xi;
  std::size_t arg_order;
};

struct Aggregate {
  std::vector<GroupStats> groups;  // sorted by (method, delta, R)
  std::vector<MinimumError> minima;
};

/// Mean eps_rel and standard error per (method, R, delta); xi = min over R
/// of the mean per (method, delta). Failed rows are excluded and counted.
inline Aggregate aggregate(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  using Key = std::tuple<Method, double, std::size_t>;
  std::map<Key, std::vector<double>> values;
  std::map<Key, std::size_t> failures;
  for (const auto& r : records) {
    const Key key{r.method, r.delta, r.order};
    auto& v = values[key];
    if (r.ok && std::isfinite(r.eps_rel))
      v.push_back(r.eps_rel);
    else
      ++failures[key];
  }
  Aggregate agg;
  std::map<std::pair<Method, double>, MinimumError> minima;
  for (const auto& [key, v] : values) {
    GroupStats g{std::get<0>(key), std::get<2>(key), std::get<1>(key)};
    g.count = v.size();
    g.failed = failures.count(key) ? failures.at(key) : 0;
    if (!v.empty()) {
      double sum = 0.0;
      for (double x : v) sum += x;
      g.mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - g.mean) * (x - g.mean);
      g.std_error = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                                       std::sqrt(static_cast<double>(v.size()))
                                 : 0.0;
      const std::pair<Method, double> mk{g.method, g.delta};
      auto it = minima.find(mk);
      if (it == minima.end() || g.mean < it->second.xi) minima[mk] = {g.method, g.delta, g.mean, g.order};
    }
    agg.groups.push_back(g);
  }
  for (const auto& [k, m] : minima) agg.minima.push_back(m);
  return agg;
}

// ---------------------------------------------------------------------------
// Histograms

struct HistogramRow {
  std::string table;  // order | partitions | top_sequence | retained_dim
  Method method;
  std::size_t order;  // R
  double delta;
  std::string key;
  std::size_t count;
};

inline std::string format_sequence(const std::vector<std::size_t>& seq) {
  std::string s;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) s += '+';
    s += std::to_string(seq[i]);
  }
  return s;
}

/// Per (method, R, delta): PQSE partition-order counts over bins 1..R,
/// partition-length counts, the five most frequent sequences; TQSE retained
/// dimension counts over bins 1..R.
inline std::vector<HistogramRow> emit_histograms(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<Method, std::size_t, double>;
  std::map<Key, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records)
    if (r.ok && r.method != Method::qse) groups[{r.method, r.order, r.delta}].push_back(&r);

  std::vector<HistogramRow> rows;
  for (const auto& [key, recs] : groups) {
    const auto [method, order, delta] = key;
    if (method == Method::tqse) {
      std::vector<std::size_t> counts(order + 1, 0);
      for (const auto* r : recs)
        if (r->retained_dim && *r->retained_dim >= 1 && *r->retained_dim <= order) ++counts[*r->retained_dim];
      for (std::size_t d = 1; d <= order; ++d)
        rows.push_back({"retained_dim", method, order, delta, std::to_string(d), counts[d]});
      continue;
    }
    std::vector<std::size_t> order_counts(order + 1, 0);
    std::map<std::size_t, std::size_t> partition_counts;
    std::map<std::string, std::size_t> sequences;
    for (const auto* r : recs) {
      if (r->sequence.empty()) continue;
      const std::size_t o = partition_order(r->sequence);
      if (o > order) throw std::logic_error("record with partition order above R");
      ++order_counts[o];
      ++partition_counts[r->sequence.size()];
      ++sequences[format_sequence(r->sequence)];
    }
    for (std::size_t o = 1; o <= order; ++o)
      rows.push_back({"order", method, order, delta, std::to_string(o), order_counts[o]});
    for (const auto& [p, c] : partition_counts)
      rows.push_back({"partitions", method, order, delta, std::to_string(p), c});
    std::vector<std::pair<std::string, std::size_t>> ranked(sequences.begin(), sequences.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
      rows.push_back({"top_sequence", method, order, delta, ranked[i].first, ranked[i].second});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }
inline std::string opt_real(double x) { return std::isnan(x) ? std::string() : format_real(x); }
template <typename T>
std::string opt_uint(const std::optional<T>& x) {
  return x ? std::to_string(*x) : std::string();
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& record_csv_columns() {
  static const std::vector<std::string> cols{
      "method",   "basis",    "R",     "delta",      "instance",         "status",         "message",
      "E_g",      "eps_rel",  "retained_dim", "best_a", "tau",          "sequence",       "order",
      "partitions", "terminated_early", "final_variance", "fidelity"};
  return cols;
}

inline std::string records_to_csv(const std::vector<ExperimentRecord>& records, bool with_timing = false) {
  std::string out;
  const auto& cols = record_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  if (with_timing) out += ",wall_time";
  out += '\n';
  for (const auto& r : records) {
    std::vector<std::string> f{to_string(r.method),
                               to_string(r.basis),
                               std::to_string(r.order),
                               format_real(r.delta),
                               std::to_string(r.instance),
                               r.ok ? "ok" : "error",
                               detail::sanitize(r.message),
                               detail::opt_real(r.energy),
                               detail::opt_real(r.eps_rel),
                               detail::opt_uint(r.retained_dim),
                               detail::opt_real(r.best_a),
                               detail::opt_real(r.tau),
                               format_sequence(r.sequence),
                               detail::opt_uint(r.partition_order),
                               r.sequence.empty() ? std::string() : std::to_string(r.sequence.size()),
                               r.terminated_early ? (*r.terminated_early ? "1" : "0") : "",
                               detail::opt_real(r.final_variance),
                               detail::opt_real(r.fidelity)};
    if (with_timing) f.push_back(format_real(r.wall_time));
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += '\n';
  }
  return out;
}

/// Inverse of records_to_csv (wall_time is read when present).
inline std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("records CSV: missing header");
  const auto header = detail::split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const auto& c : record_csv_columns())
    if (!col.count(c)) throw std::invalid_argument("records CSV: missing column '" + c + "'");

  auto real = [](const std::string& s) { return std::stod(s); };
  std::vector<ExperimentRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() < header.size()) throw ParseError(line_no, "too few fields");
    auto at = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    try {
      ExperimentRecord r;
      r.method = parse_method(at("method"));
      r.basis = at("basis") == "rte" ? BasisKind::rte : BasisKind::power;
      r.order = std::stoul(at("R"));
      r.delta = real(at("delta"));
      r.instance = std::stoul(at("instance"));
      r.ok = at("status") == "ok";
      r.message = at("message");
      if (!at("E_g").empty()) r.energy = real(at("E_g"));
      if (!at("eps_rel").empty()) r.eps_rel = real(at("eps_rel"));
      if (!at("retained_dim").empty()) r.retained_dim = std::stoul(at("retained_dim"));
      if (!at("best_a").empty()) r.best_a = real(at("best_a"));
      if (!at("tau").empty()) r.tau = real(at("tau"));
      if (!at("sequence").empty()) {
        std::string s = at("sequence");
        std::size_t pos = 0;
        while (pos <= s.size()) {
          const auto plus = s.find('+', pos);
          r.sequence.push_back(std::stoul(s.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos)));
          if (plus == std::string::npos) break;
          pos = plus + 1;
        }
      }
      if (!at("order").empty()) r.partition_order = std::stoul(at("order"));
      if (!at("terminated_early").empty()) r.terminated_early = at("terminated_early") == "1";
      if (!at("final_variance").empty()) r.final_variance = real(at("final_variance"));
      if (!at("fidelity").empty()) r.fidelity = real(at("fidelity"));
      if (col.count("wall_time") && !f[col.at("wall_time")].empty()) r.wall_time = real(f[col.at("wall_time")]);
      records.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return records;
}

inline nlohmann::ordered_json records_to_json(const std::vector<ExperimentRecord>& records, bool with_timing = false) {
  auto opt = [](const auto& x) -> nlohmann::ordered_json {
    if (x) return *x;
    return nullptr;
  };
  auto real = [](double x) -> nlohmann::ordered_json {
    if (std::isnan(x)) return nullptr;
    return x;
  };
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["method"] = to_string(r.method);
    j["basis"] = to_string(r.basis);
    j["R"] = r.order;
    j["delta"] = r.delta;
    j["instance"] = r.instance;
    j["status"] = r.ok ? "ok" : "error";
    j["message"] = r.message;
    j["E_g"] = real(r.energy);
    j["eps_rel"] = real(r.eps_rel);
    j["retained_dim"] = opt(r.retained_dim);
    j["best_a"] = opt(r.best_a);
    j["tau"] = opt(r.tau);
    j["sequence"] = r.sequence;
    j["order"] = opt(r.partition_order);
    j["terminated_early"] = opt(r.terminated_early);
    j["final_variance"] = opt(r.final_variance);
    j["fidelity"] = opt(r.fidelity);
    if (with_timing) j["wall_time"] = r.wall_time;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string aggregate_to_csv(const Aggregate& agg) {
  std::string out = "kind,method,delta,R,count,failed,mean_eps_rel,std_error\n";
  for (const auto& g : agg.groups)
    out += "mean," + to_string(g.method) + "," + format_real(g.delta) + "," + std::to_string(g.order) + "," +
           std::to_string(g.count) + "," + std::to_string(g.failed) + "," + detail::opt_real(g.mean) + "," +
           detail::opt_real(g.std_error) + "\n";
  for (const auto& m : agg.minima)
    out += "xi," + to_string(m.method) + "," + format_real(m.delta) + "," + std::to_string(m.arg_order) + ",,," +
           format_real(m.xi) + ",\n";
  return out;
}

inline std::string histograms_to_csv(const std::vector<HistogramRow>& rows) {
  std::string out = "table,method,R,delta,key,count\n";
  for (const auto& r : rows)
    out += r.table + "," + to_string(r.method) + "," + std::to_string(r.order) + "," + format_real(r.delta) + "," +
           r.key + "," + std::to_string(r.count) + "\n";
  return out;
}

inline nlohmann::ordered_json histograms_to_json(const std::vector<HistogramRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"table", r.table},
                   {"method", to_string(r.method)},
                   {"R", r.order},
                   {"delta", r.delta},
                   {"key", r.key},
                   {"count", r.count}});
  return arr;
}

}  // namespace pqse
