#include "stmi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <tuple>
#include <utility>

#include "json.hpp"

#include "stmi/ansatz.hpp"
#include "stmi/bounds.hpp"
#include "stmi/channel.hpp"
#include "stmi/classical.hpp"
#include "stmi/models.hpp"
#include "stmi/optimizer.hpp"
#include "stmi/parallel.hpp"
#include "stmi/petz.hpp"

namespace stmi {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bail(const std::string& where, int line,
                       const std::string& msg) {
  std::ostringstream os;
  os << where;
  if (line > 0) os << ":" << line;
  os << ": " << msg;
  throw ConfigError(os.str());
}

std::string json_scalar(const ordered_json& v, const std::string& name,
                        const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  bail(name, 0, "key '" + key + "': unsupported value type");
}

std::string json_value(const ordered_json& v, const std::string& name,
                       const std::string& key) {
  if (!v.is_array()) return json_scalar(v, name, key);
  std::string out;
  for (const auto& el : v) {
    if (!out.empty()) out += ", ";
    out += json_scalar(el, name, key);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

Config Config::parse_text(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.name_ = name;

  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(name + ": " + e.what());
    }
    if (!j.is_object()) bail(name, 0, "top level must be an object");
    for (const auto& [k, v] : j.items()) {
      if (v.is_object()) {
        for (const auto& [k2, v2] : v.items()) {
          if (v2.is_object())
            bail(name, 0, "key '" + k + "." + k2 +
                              "': only one nesting level is supported");
          cfg.kv_[k + "." + k2] = Entry{json_value(v2, name, k + "." + k2), 0};
        }
      } else {
        cfg.kv_[k] = Entry{json_value(v, name, k), 0};
      }
    }
    return cfg;
  }

  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t[0] == '[') {
      if (t.back() != ']') bail(name, lineno, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) bail(name, lineno, "empty section name");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) bail(name, lineno, "expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) bail(name, lineno, "empty key");
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.kv_.count(full)) bail(name, lineno, "duplicate key '" + full + "'");
    cfg.kv_[full] = Entry{value, lineno};
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_text(buf.str(), path);
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  out.reserve(kv_.size());
  for (const auto& [k, v] : kv_) out.push_back(k);
  return out;
}

void Config::fail(const std::string& key, const std::string& msg) const {
  auto it = kv_.find(key);
  bail(name_, it == kv_.end() ? 0 : it->second.line,
       "key '" + key + "': " + msg);
}

std::string Config::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) fail(key, "missing required key");
  return it->second.value;
}

std::string Config::str(const std::string& key,
                        const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second.value;
}

double Config::number(const std::string& key) const {
  std::string v = str(key);
  const char* s = v.c_str();
  char* end = nullptr;
  double x = std::strtod(s, &end);
  if (end == s || *end != '\0') fail(key, "expected a number, got '" + v + "'");
  return x;
}

double Config::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long Config::integer(const std::string& key) const {
  std::string v = str(key);
  const char* s = v.c_str();
  char* end = nullptr;
  long long x = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0')
    fail(key, "expected an integer, got '" + v + "'");
  return x;
}

long long Config::integer(const std::string& key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = str(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "expected a boolean, got '" + str(key) + "'");
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::string v = str(key);
  for (char& c : v)
    if (c == ',') c = ' ';
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    const char* s = tok.c_str();
    char* end = nullptr;
    double x = std::strtod(s, &end);
    if (end == s || *end != '\0')
      fail(key, "expected a list of numbers, got '" + str(key) + "'");
    out.push_back(x);
  }
  if (out.empty()) fail(key, "expected a non-empty list of numbers");
  return out;
}

std::vector<double> Config::numbers(const std::string& key,
                                    const std::vector<double>& fallback) const {
  return has(key) ? numbers(key) : fallback;
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

namespace {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open output file: " + path);
    auto put = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) f << ',';
        f << cells[i];
      }
      f << '\n';
    };
    put(header);
    for (const auto& r : rows) put(r);
    f.flush();
    if (!f) throw Error("failed writing output file: " + path);
  }
};

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open output file: " + path);
  f << j.dump(2) << "\n";
  f.flush();
  if (!f) throw Error("failed writing output file: " + path);
}

void write_manifest(const Config& cfg, const std::string& kind,
                    std::uint64_t seed, const std::vector<std::string>& outputs,
                    int exit_code, double wall_seconds) {
  ordered_json m;
  m["schema"] = 1;
  m["kind"] = kind;
  m["version"] = kVersion;
  m["seed"] = seed;
  ordered_json c = ordered_json::object();
  for (const auto& k : cfg.keys()) c[k] = cfg.str(k);
  m["config"] = c;
  m["outputs"] = outputs;
  m["exit_code"] = exit_code;
  m["wall_time_seconds"] = wall_seconds;
  write_json(outputs.front() + ".manifest.json", m);
}

std::string bool_cell(bool v) { return v ? "1" : "0"; }

// ---------------------------------------------------------------------------
// shared config pieces
// ---------------------------------------------------------------------------

OptimizerConfig optimizer_from(const Config& cfg, std::uint64_t seed) {
  OptimizerConfig o;
  o.seed = seed;
  o.eta = cfg.number("optimizer.eta", o.eta);
  o.max_iters = static_cast<int>(cfg.integer("optimizer.max_iters", o.max_iters));
  o.grad_tol = cfg.number("optimizer.grad_tol", o.grad_tol);
  o.restarts = static_cast<int>(cfg.integer("optimizer.restarts", o.restarts));
  o.backtrack = cfg.number("optimizer.backtrack", o.backtrack);
  o.ancilla_dim =
      static_cast<int>(cfg.integer("optimizer.ancilla_dim", o.ancilla_dim));
  o.record_trajectory = false;
  if (o.max_iters < 1) cfg.fail("optimizer.max_iters", "must be positive");
  if (o.restarts < 1) cfg.fail("optimizer.restarts", "must be positive");
  return o;
}

std::vector<std::string> methods_from(const Config& cfg) {
  std::string m = cfg.str("method.method", "ansatz");
  if (m == "ansatz" || m == "variational") return {m};
  if (m == "both") return {"ansatz", "variational"};
  cfg.fail("method.method", "expected ansatz, variational, or both");
}

EnvKind env_from(const Config& cfg) {
  std::string e = cfg.str("series.env", "mixed");
  if (e == "mixed") return EnvKind::mixed;
  if (e == "zeros") return EnvKind::zeros;
  if (e == "random-product") return EnvKind::random_product;
  cfg.fail("series.env", "expected mixed, zeros, or random-product");
}

// ---------------------------------------------------------------------------
// random instances
// ---------------------------------------------------------------------------

KrausChannel random_qubit_channel(Rng& rng, int env_dim) {
  TensorSpace us({Factor{"A", 2}, Factor{"E", env_dim}});
  Mat u = random_unitary(2 * env_dim, rng);
  Mat e = Mat::Zero(env_dim, env_dim);
  e(0, 0) = 1.0;
  DensityMatrix env =
      DensityMatrix::unchecked(TensorSpace::single("E", env_dim), e);
  return channel_from_unitary(u, us, env, {"A"});
}

DensityMatrix random_qubit_state(Rng& rng) {
  return DensityMatrix::unchecked(TensorSpace::single("A", 2),
                                  random_rho(2, 2, rng));
}

HermitianObservable random_qubit_obs(Rng& rng) {
  return HermitianObservable(TensorSpace::single("A", 2),
                             random_hermitian(2, rng));
}

struct BoundsBatch {
  int total = 0;
  int failures = 0;
  double worst_margin = kInf;
};

BoundsBatch theorem1_batch(int n, std::uint64_t seed, Csv* csv) {
  BoundsBatch out;
  out.total = n;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    KrausChannel ch = random_qubit_channel(rng, 2 + (i % 2));
    DensityMatrix rho = random_qubit_state(rng);
    HermitianObservable oa = random_qubit_obs(rng);
    HermitianObservable ob = random_qubit_obs(rng);
    Theorem1Report rep = verify_theorem1(rho, ch, oa, ob);
    double margin = std::min({rep.margin_retarded, rep.margin_symmetric,
                              rep.margin_mi});
    out.worst_margin = std::min(out.worst_margin, margin);
    if (!rep.ok) ++out.failures;
    if (csv)
      csv->rows.push_back({"theorem1", std::to_string(i), bool_cell(rep.ok),
                           format_number(margin)});
  }
  return out;
}

BoundsBatch superdensity_batch(int n, std::uint64_t seed, Csv* csv) {
  BoundsBatch out;
  out.total = n;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    KrausChannel ch = random_qubit_channel(rng, 2 + (i % 2));
    DensityMatrix rho = random_qubit_state(rng);
    Mat h = random_hermitian(2, rng);
    h -= (h.trace() / 2.0) * Mat::Identity(2, 2);
    HermitianObservable oa(TensorSpace::single("A", 2), h);
    HermitianObservable ob = random_qubit_obs(rng);
    SuperdensityReport rep = superdensity_bound(rho, ch, oa, ob);
    double ident = std::abs(rep.two_point_connected - rep.two_point_expected);
    bool ok = rep.ok && ident <= 1e-10;
    double margin = std::min(rep.margin_j, rep.margin_mi);
    out.worst_margin = std::min(out.worst_margin, margin);
    if (!ok) ++out.failures;
    if (csv)
      csv->rows.push_back({"superdensity", std::to_string(i), bool_cell(ok),
                           format_number(margin)});
  }
  return out;
}

BoundsBatch causal_batch(int n, std::uint64_t seed, Csv* csv) {
  BoundsBatch out;
  out.total = n;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    KrausChannel ch = random_qubit_channel(rng, 2 + (i % 2));
    DensityMatrix rho = random_qubit_state(rng);
    HermitianObservable ob = random_qubit_obs(rng);
    Mat ua = random_unitary(2, rng);
    CausalInfluenceReport rep = causal_influence_bound(rho, ch, ob, ua);
    out.worst_margin = std::min(out.worst_margin, rep.margin);
    if (!rep.ok) ++out.failures;
    if (csv)
      csv->rows.push_back({"causal", std::to_string(i), bool_cell(rep.ok),
                           format_number(rep.margin)});
  }
  return out;
}

RMat random_stochastic(int rows, int cols, Rng& rng) {
  RMat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      double x = -std::log(1.0 - rng.uniform());
      m(r, c) = x;
      sum += x;
    }
    m.col(c) /= sum;
  }
  return m;
}

struct ClassicalRow {
  int instance = 0;
  bool ok = false;
  double margin_response = 0.0;
  double margin_correlation = 0.0;
  double cmi = 0.0;
  double j_value = 0.0;
  double copy_mi = 0.0;
};

ClassicalRow classical_instance(std::uint64_t seed, int idx, int max_dim) {
  Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(idx + 1));
  auto rint = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  int na = rint(2, max_dim);
  int nab = rint(2, 3);
  int nb = rint(2, max_dim);
  int nbb = rint(2, 3);
  TensorSpace in_space({Factor{"A", na}, Factor{"Ab", nab}});
  TensorSpace out_space({Factor{"B", nb}, Factor{"Bb", nbb}});
  RMat probs = random_stochastic(na * nab, 1, rng);
  Distribution p_in(in_space, probs.col(0));
  StochasticMap m = StochasticMap::make(
      in_space, out_space, random_stochastic(nb * nbb, na * nab, rng));

  RMat n_a = random_stochastic(na, na, rng) - RMat::Identity(na, na);
  RVec o_b(nb), o_a(na);
  for (int i = 0; i < nb; ++i) o_b(i) = rng.gauss();
  for (int i = 0; i < na; ++i) o_a(i) = rng.gauss();

  ClassicalBoundsReport rep =
      verify_classical_bounds(p_in, m, n_a, o_b, o_a, {"B"});

  int nwg = rint(2, 3);
  TensorSpace k_out({Factor{"A", na}, Factor{"Wg", nwg}});
  StochasticMap k = StochasticMap::make(TensorSpace::single("A", na), k_out,
                                        random_stochastic(na * nwg, na, rng));
  double cmi = coupling_record_cmi(p_in, m, k, {"B"});

  ClassicalRow row;
  row.instance = idx;
  row.margin_response = rep.margin_response;
  row.margin_correlation = rep.margin_correlation;
  row.cmi = cmi;
  row.j_value = rep.j_value;
  row.copy_mi = rep.copy_mi;
  row.ok = rep.ok && cmi < 1e-12;
  return row;
}

struct MarkovSetup {
  DensityMatrix rho_in;
  KrausChannel evolution;
};

MarkovSetup markov_setup(int d_c, std::uint64_t seed) {
  Rng rng(seed);
  Mat ra = random_rho(2, 2, rng);
  Mat rc = random_rho(d_c, d_c, rng);
  TensorSpace sac({Factor{"A", 2}, Factor{"C", d_c}});
  DensityMatrix rho = DensityMatrix::unchecked(sac, kron(ra, rc));
  Mat u = kron(random_unitary(2, rng), identity(d_c));
  return MarkovSetup{rho, unitary_channel(u, sac)};
}

struct N2Row {
  int instance = 0;
  double grad_norm = 0.0;
  double objective_half = 0.0;
  double j1 = 0.0;
  double diff = 0.0;
  bool ok = false;
};

N2Row n2_instance(std::uint64_t seed, int idx, OptimizerConfig oc,
                  double grad_tol, double match_tol) {
  Rng rng(seed + 1315423911ULL * static_cast<std::uint64_t>(idx + 1));
  Mat psi = rng.cgauss(2, 1);
  psi /= psi.norm();
  DensityMatrix rho = DensityMatrix::unchecked(TensorSpace::single("A", 2),
                                               psi * psi.adjoint());
  double p = 0.25 + 0.5 * rng.uniform();
  KrausChannel ch =
      compose(depolarizing(p),
              unitary_channel(random_unitary(2, rng), TensorSpace::single("A", 2)));
  oc.seed = seed + static_cast<std::uint64_t>(idx);
  StmiResult r = optimize_j1(rho, ch, {"A"}, oc);
  StationarityN2 s = stationarity_check_n2(rho, ch, {"A"}, r.coupling);
  N2Row row;
  row.instance = idx;
  row.grad_norm = s.grad_norm;
  row.objective_half = s.objective_half;
  row.j1 = s.j1;
  row.diff = std::abs(s.objective_half - s.j1);
  row.ok = s.grad_norm < grad_tol && row.diff < match_tol;
  return row;
}

// ---------------------------------------------------------------------------
// experiment kinds
// ---------------------------------------------------------------------------

struct SweepRow {
  double p = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double j1 = 0.0;
  double mi = 0.0;
  double relent = 0.0;
  bool converged = false;
};

SweepRow sweep_point(const DensityMatrix& rho_in, const KrausChannel& ch,
                     double p, const std::string& method,
                     const OptimizerConfig& oc) {
  SweepRow row;
  row.p = p;
  row.seed = oc.seed;
  row.method = method;
  if (method == "ansatz") {
    AnsatzSolveResult r = ansatz_solve(ch, rho_in);
    IsometryCoupling v = swap_coupling_from_rho_w(r.state.rho_w);
    CouplingValue cv = evaluate_coupling(rho_in, v, ch, {"A"});
    row.j1 = r.objective.value;
    row.mi = cv.mi_term;
    row.relent = cv.relent_term;
    row.converged = r.converged;
  } else {
    StmiResult r = optimize_j1(rho_in, ch, {"A"}, oc);
    row.j1 = r.value;
    row.mi = r.mi_term;
    row.relent = r.relent_term;
    row.converged = r.converged || r.divergent;
  }
  return row;
}

int run_channel_sweep(const Config& cfg, std::ostream& log,
                      const std::string& output) {
  std::string family = cfg.str("channel.family");
  if (family != "depolarizing" && family != "dephasing")
    cfg.fail("channel.family", "expected depolarizing or dephasing");
  std::vector<double> ps = cfg.numbers("sweep.p");
  for (double p : ps)
    if (p < 0.0 || p > 1.0) cfg.fail("sweep.p", "entries must lie in [0, 1]");
  double alpha = cfg.number("input.alpha", M_PI / 4.0);
  double eps = cfg.number("input.epsilon", 0.01);
  if (eps < 0.0 || eps >= 1.0)
    cfg.fail("input.epsilon", "must lie in [0, 1)");
  std::vector<std::string> methods = methods_from(cfg);
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
  OptimizerConfig oc = optimizer_from(cfg, seed);
  DensityMatrix rho_in = chi_state(alpha, eps);

  int n = static_cast<int>(ps.size() * methods.size());
  std::vector<SweepRow> rows = parallel_map<SweepRow>(n, [&](int job) {
    double p = ps[job / methods.size()];
    const std::string& method = methods[job % methods.size()];
    return sweep_point(rho_in, family == "depolarizing" ? depolarizing(p)
                                                        : dephasing(p),
                       p, method, oc);
  });
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return std::tie(a.p, a.method) < std::tie(b.p, b.method);
                   });

  Csv csv;
  csv.header = {"p", "seed", "method", "J1", "mi_term", "relent_term",
                "converged"};
  bool all_converged = true;
  for (const auto& r : rows) {
    all_converged = all_converged && r.converged;
    csv.rows.push_back({format_number(r.p), std::to_string(r.seed), r.method,
                        format_number(r.j1), format_number(r.mi),
                        format_number(r.relent), bool_cell(r.converged)});
  }
  csv.write(output);
  log << "wrote " << csv.rows.size() << " rows to " << output << "\n";
  if (cfg.flag("run.strict", false) && !all_converged)
    return kExitNonConvergence;
  return kExitOk;
}

int run_time_series(const Config& cfg, std::ostream& log,
                    const std::string& output) {
  std::string model = cfg.str("system.model");
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));

  TimeSeriesOptions opt;
  opt.times = cfg.numbers("series.times", opt.times);
  opt.alphas = cfg.numbers("series.alphas", opt.alphas);
  opt.epsilon = cfg.number("series.epsilon", 0.0);
  opt.method = cfg.str("method.method", "ansatz");
  if (opt.method != "ansatz" && opt.method != "variational" &&
      opt.method != "both")
    cfg.fail("method.method", "expected ansatz, variational, or both");
  opt.env = env_from(cfg);
  opt.site = static_cast<int>(cfg.integer("series.site", -1));
  opt.opt = optimizer_from(cfg, seed);

  std::vector<TimeSeriesPoint> rows;
  if (model == "mbl") {
    MblParams p;
    p.L = static_cast<int>(cfg.integer("system.L", p.L));
    p.w = cfg.number("system.w", p.w);
    p.xi = cfg.number("system.xi", p.xi);
    p.seed = static_cast<std::uint64_t>(cfg.integer("system.seed", seed));
    p.include_three_body = cfg.flag("system.three_body", true);
    rows = stmi_time_series(p, opt);
  } else if (model == "floquet") {
    for (double t : opt.times)
      if (std::abs(t - std::round(t)) > 1e-9 || t < 1.0)
        cfg.fail("series.times", "floquet times must be whole period counts");
    FloquetParams p;
    p.L = static_cast<int>(cfg.integer("system.L", p.L));
    p.g = cfg.number("system.g", p.g);
    p.h = cfg.number("system.h", p.h);
    p.tau = cfg.number("system.tau", p.tau);
    rows = stmi_time_series(p, opt);
  } else {
    cfg.fail("system.model", "expected mbl or floquet");
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const TimeSeriesPoint& a, const TimeSeriesPoint& b) {
                     return std::tie(a.t, a.alpha, a.method) <
                            std::tie(b.t, b.alpha, b.method);
                   });

  Csv csv;
  csv.header = {"t",  "alpha_or_p", "seed",        "method",
                "J1", "mi_term",    "relent_term", "converged"};
  bool all_converged = true;
  for (const auto& r : rows) {
    all_converged = all_converged && r.converged;
    csv.rows.push_back({format_number(r.t), format_number(r.alpha),
                        std::to_string(r.seed), r.method, format_number(r.j1),
                        format_number(r.mi_term), format_number(r.relent_term),
                        bool_cell(r.converged)});
  }
  csv.write(output);
  log << "wrote " << csv.rows.size() << " rows to " << output << "\n";
  if (cfg.flag("run.strict", false) && !all_converged)
    return kExitNonConvergence;
  return kExitOk;
}

int run_verify_bounds(const Config& cfg, std::ostream& log,
                      const std::string& output) {
  std::uint64_t seed = static_cast<std::uint64_t>(
      cfg.integer("suite.seed", cfg.integer("run.seed", 0)));
  int n1 = static_cast<int>(cfg.integer("suite.theorem1", 200));
  int n2 = static_cast<int>(cfg.integer("suite.superdensity", 100));
  int n3 = static_cast<int>(cfg.integer("suite.causal", 100));

  Csv csv;
  csv.header = {"suite", "instance", "ok", "margin"};
  BoundsBatch b1 = theorem1_batch(n1, seed, &csv);
  BoundsBatch b2 = superdensity_batch(n2, seed + 1, &csv);
  BoundsBatch b3 = causal_batch(n3, seed + 2, &csv);
  csv.write(output);

  int failures = b1.failures + b2.failures + b3.failures;
  log << "theorem1: " << b1.total - b1.failures << "/" << b1.total
      << " ok, worst margin " << format_number(b1.worst_margin) << "\n"
      << "superdensity: " << b2.total - b2.failures << "/" << b2.total
      << " ok, worst margin " << format_number(b2.worst_margin) << "\n"
      << "causal: " << b3.total - b3.failures << "/" << b3.total
      << " ok, worst margin " << format_number(b3.worst_margin) << "\n";
  return failures == 0 ? kExitOk : kExitAssertion;
}

int run_markov_check(const Config& cfg, std::ostream& log,
                     const std::string& output,
                     std::vector<std::string>& outputs) {
  std::uint64_t seed = static_cast<std::uint64_t>(
      cfg.integer("instance.seed", cfg.integer("run.seed", 0)));
  int d_c = static_cast<int>(cfg.integer("instance.d_c", 2));
  if (d_c < 2 || d_c > 4) cfg.fail("instance.d_c", "must lie in [2, 4]");
  double threshold = cfg.number("instance.threshold", 1e-3);
  bool expect = cfg.flag("instance.expect_markov", true);
  OptimizerConfig oc = optimizer_from(cfg, seed);

  MarkovSetup s = markov_setup(d_c, seed);
  MarkovReport rep =
      markov_check(s.rho_in, s.evolution, "A", {"A"}, {"C"}, oc, threshold);
  double gap = rep.j_abc - rep.j_ab;

  Csv csv;
  csv.header = {"j_ab",           "j_abc",        "gap",
                "petz_error",     "mirror_check", "untraced_value",
                "markov"};
  csv.rows.push_back({format_number(rep.j_ab), format_number(rep.j_abc),
                      format_number(gap),
                      format_number(rep.petz_reconstruction_error),
                      format_number(rep.mirror_operator_check),
                      format_number(rep.untraced_value),
                      bool_cell(rep.markov)});
  csv.write(output);

  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "markov-check";
  j["j_ab"] = rep.j_ab;
  j["j_abc"] = rep.j_abc;
  j["gap"] = gap;
  j["petz_reconstruction_error"] = rep.petz_reconstruction_error;
  j["mirror_operator_check"] = rep.mirror_operator_check;
  j["untraced_value"] = rep.untraced_value;
  j["threshold"] = rep.threshold;
  j["markov"] = rep.markov;
  j["converged_ab"] = rep.converged_ab;
  j["converged_abc"] = rep.converged_abc;
  std::string report_path = output + ".report.json";
  write_json(report_path, j);
  outputs.push_back(report_path);

  log << "j_ab=" << format_number(rep.j_ab)
      << " j_abc=" << format_number(rep.j_abc)
      << " petz_error=" << format_number(rep.petz_reconstruction_error)
      << " markov=" << (rep.markov ? "yes" : "no") << "\n";
  return rep.markov == expect ? kExitOk : kExitAssertion;
}

int run_classical(const Config& cfg, std::ostream& log,
                  const std::string& output) {
  std::uint64_t seed = static_cast<std::uint64_t>(
      cfg.integer("suite.seed", cfg.integer("run.seed", 0)));
  int n = static_cast<int>(cfg.integer("suite.instances", 500));
  int max_dim = static_cast<int>(cfg.integer("suite.max_dim", 4));
  if (max_dim < 2 || max_dim > 8) cfg.fail("suite.max_dim", "must lie in [2, 8]");

  std::vector<ClassicalRow> rows = parallel_map<ClassicalRow>(
      n, [&](int i) { return classical_instance(seed, i, max_dim); });

  Csv csv;
  csv.header = {"instance",          "ok",  "margin_response",
                "margin_correlation", "cmi", "J1",
                "copy_mi"};
  int failures = 0;
  double worst_cmi = 0.0;
  for (const auto& r : rows) {
    if (!r.ok) ++failures;
    worst_cmi = std::max(worst_cmi, r.cmi);
    csv.rows.push_back({std::to_string(r.instance), bool_cell(r.ok),
                        format_number(r.margin_response),
                        format_number(r.margin_correlation),
                        format_number(r.cmi), format_number(r.j_value),
                        format_number(r.copy_mi)});
  }
  csv.write(output);
  log << n - failures << "/" << n << " instances ok, worst cmi "
      << format_number(worst_cmi) << "\n";
  return failures == 0 ? kExitOk : kExitAssertion;
}

int run_appendix_c(const Config& cfg, std::ostream& log,
                   const std::string& output,
                   std::vector<std::string>& outputs) {
  std::vector<double> eps =
      cfg.numbers("test.epsilons", {1e-2, 1e-3, 1e-4});
  bool assert_bands = cfg.flag("test.assert", true);
  AppendixCReport rep = appendix_c_test(eps);

  std::vector<int> order(rep.epsilons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return rep.epsilons[a] < rep.epsilons[b]; });

  Csv csv;
  csv.header = {"epsilon", "xa_value", "swap_value"};
  for (int i : order)
    csv.rows.push_back({format_number(rep.epsilons[i]),
                        format_number(rep.xa_values[i]),
                        format_number(rep.swap_values[i])});
  csv.write(output);

  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "appendix-c";
  j["epsilons"] = rep.epsilons;
  j["xa_values"] = rep.xa_values;
  j["swap_values"] = rep.swap_values;
  j["xa_slope"] = rep.xa_slope;
  j["swap_slope"] = rep.swap_slope;
  j["slope_ratio"] = rep.slope_ratio;
  j["ok"] = rep.ok;
  std::string report_path = output + ".report.json";
  write_json(report_path, j);
  outputs.push_back(report_path);

  log << "xa_slope=" << format_number(rep.xa_slope)
      << " swap_slope=" << format_number(rep.swap_slope)
      << " ratio=" << format_number(rep.slope_ratio)
      << (rep.ok ? " ok" : " FAIL") << "\n";
  return (!assert_bands || rep.ok) ? kExitOk : kExitAssertion;
}

int run_stationarity_n2(const Config& cfg, std::ostream& log,
                        const std::string& output) {
  std::uint64_t seed = static_cast<std::uint64_t>(
      cfg.integer("suite.seed", cfg.integer("run.seed", 0)));
  int n = static_cast<int>(cfg.integer("suite.instances", 10));
  double grad_tol = cfg.number("suite.grad_tol", 1e-5);
  double match_tol = cfg.number("suite.match_tol", 1e-6);
  OptimizerConfig oc = optimizer_from(cfg, seed);

  std::vector<N2Row> rows = parallel_map<N2Row>(n, [&](int i) {
    return n2_instance(seed, i, oc, grad_tol, match_tol);
  });

  Csv csv;
  csv.header = {"instance", "grad_norm", "objective_half", "J1", "diff", "ok"};
  int failures = 0;
  for (const auto& r : rows) {
    if (!r.ok) ++failures;
    csv.rows.push_back({std::to_string(r.instance),
                        format_number(r.grad_norm),
                        format_number(r.objective_half), format_number(r.j1),
                        format_number(r.diff), bool_cell(r.ok)});
  }
  csv.write(output);
  log << n - failures << "/" << n << " instances ok\n";
  return failures == 0 ? kExitOk : kExitAssertion;
}

}  // namespace

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

int run_experiment(const Config& cfg, std::ostream& log) {
  auto t0 = std::chrono::steady_clock::now();
  std::string kind = cfg.str("run.kind");
  std::string output = cfg.str("run.output");
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
  std::vector<std::string> outputs{output};

  int code = kExitOk;
  if (kind == "stmi-channel-sweep") {
    code = run_channel_sweep(cfg, log, output);
  } else if (kind == "stmi-time-series") {
    code = run_time_series(cfg, log, output);
  } else if (kind == "verify-bounds") {
    code = run_verify_bounds(cfg, log, output);
  } else if (kind == "markov-check") {
    code = run_markov_check(cfg, log, output, outputs);
  } else if (kind == "classical") {
    code = run_classical(cfg, log, output);
  } else if (kind == "appendix-c") {
    code = run_appendix_c(cfg, log, output, outputs);
  } else if (kind == "stationarity-n2") {
    code = run_stationarity_n2(cfg, log, output);
  } else {
    cfg.fail("run.kind", "unknown experiment kind '" + kind + "'");
  }

  double wall = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  write_manifest(cfg, kind, seed, outputs, code, wall);
  return code;
}

// ---------------------------------------------------------------------------
// entangled-input counterexample
// ---------------------------------------------------------------------------

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(x.size());
  ym /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - xm) * (y[i] - ym);
    den += (x[i] - xm) * (x[i] - xm);
  }
  if (den < 1e-12) throw Error("appendix_c_test: epsilon values must differ");
  return num / den;
}

}  // namespace

AppendixCReport appendix_c_test(const std::vector<double>& epsilons) {
  if (epsilons.size() < 2)
    throw Error("appendix_c_test: need at least two epsilon values");
  for (double e : epsilons)
    if (!(e > 0.0) || e > 0.1)
      throw Error("appendix_c_test: epsilon values must lie in (0, 0.1]");

  TensorSpace sp({Factor{"Abar", 2}, Factor{"A", 2}});
  Vec gamma = Vec::Zero(4);
  gamma(0) = gamma(3) = 1.0 / std::sqrt(2.0);
  Mat xa = kron(identity(2), pauli_x());
  KrausChannel id = identity_channel(sp);
  std::vector<std::string> b_labels{"Abar", "A"};

  AppendixCReport rep;
  rep.epsilons = epsilons;
  for (double e : epsilons) {
    Mat rin = (1.0 - e) * (gamma * gamma.adjoint()) +
              (e / 4.0) * Mat::Identity(4, 4);
    Mat rx = xa * rin * xa.adjoint();
    rep.xa_values.push_back(relative_entropy(rx, rin).value);

    DensityMatrix rho_in(sp, rin);
    BlochMax bm = bloch_maximize([&](const Mat& rw) {
      IsometryCoupling v = swap_coupling_from_rho_w(
          DensityMatrix::unchecked(TensorSpace::single("W", 2), rw));
      CouplingValue cv = evaluate_coupling(rho_in, v, id, b_labels);
      return cv.objective.is_finite() ? cv.objective.value : -kInf;
    });
    rep.swap_values.push_back(bm.value);
  }

  std::vector<double> x;
  for (double e : epsilons) x.push_back(-std::log(e));
  rep.xa_slope = fit_slope(x, rep.xa_values);
  rep.swap_slope = fit_slope(x, rep.swap_values);
  rep.slope_ratio = rep.xa_slope / rep.swap_slope;
  rep.ok = std::abs(rep.xa_slope - 1.0) <= 0.05 &&
           std::abs(rep.swap_slope - 0.75) <= 0.05 &&
           std::abs(rep.slope_ratio - 4.0 / 3.0) <= 0.1;
  return rep;
}

// ---------------------------------------------------------------------------
// verification suites
// ---------------------------------------------------------------------------

bool SuiteReport::ok() const {
  for (const auto& c : checks)
    if (!c.ok) return false;
  return true;
}

namespace {

void add_check(SuiteReport& rep, std::ostream& log, const std::string& name,
               bool ok, const std::string& detail) {
  rep.checks.push_back(SuiteCheck{name, ok, detail});
  log << (ok ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
}

void suite_oracle(SuiteReport& rep, std::ostream& log) {
  TensorSpace sa = TensorSpace::single("A", 2);
  Rng rng(5);
  KrausChannel ch = unitary_channel(random_unitary(2, rng), sa);
  OptimizerConfig oc;
  oc.restarts = 4;
  oc.max_iters = 3000;
  oc.seed = 7;
  oc.record_trajectory = false;

  struct Case {
    const char* name;
    Mat rho;
    double expect;
  };
  Mat skew = Mat::Zero(2, 2);
  skew(0, 0) = 0.9;
  skew(1, 1) = 0.1;
  std::vector<Case> cases{
      {"skewed", skew, std::log(1.0 / 0.9 + 1.0 / 0.1)},
      {"mixed", 0.5 * Mat::Identity(2, 2), std::log(4.0)}};
  for (const auto& c : cases) {
    DensityMatrix rho = DensityMatrix::unchecked(sa, c.rho);
    ClosedFormUnitary cf = closed_form_unitary(rho);
    AnsatzSolveResult a = ansatz_solve(ch, rho);
    StmiResult v = optimize_j1(rho, ch, {"A"}, oc);
    std::ostringstream d;
    d << "closed form " << format_number(c.expect) << ", ansatz "
      << format_number(a.objective.value) << ", variational "
      << format_number(v.value);
    bool ok = std::abs(cf.j1.value - c.expect) < 1e-9 &&
              std::abs(a.objective.value - c.expect) < 1e-3 &&
              std::abs(v.value - c.expect) < 1e-3;
    add_check(rep, log, std::string("oracle ") + c.name, ok, d.str());
  }
}

void suite_bounds(SuiteReport& rep, std::ostream& log) {
  BoundsBatch b1 = theorem1_batch(60, 101, nullptr);
  BoundsBatch b2 = superdensity_batch(40, 202, nullptr);
  BoundsBatch b3 = causal_batch(40, 303, nullptr);
  std::ostringstream d1, d2, d3;
  d1 << b1.total << " instances, worst margin " << format_number(b1.worst_margin);
  d2 << b2.total << " instances, worst margin " << format_number(b2.worst_margin);
  d3 << b3.total << " instances, worst margin " << format_number(b3.worst_margin);
  add_check(rep, log, "bounds theorem1", b1.failures == 0, d1.str());
  add_check(rep, log, "bounds superdensity", b2.failures == 0, d2.str());
  add_check(rep, log, "bounds causal", b3.failures == 0, d3.str());
}

void suite_stationarity(SuiteReport& rep, std::ostream& log) {
  double worst_grad = 0.0;
  bool fp_ok = true;
  for (int i = 0; i < 5; ++i) {
    Rng rng(1000 + 31 * i);
    DensityMatrix rho = random_qubit_state(rng);
    KrausChannel ch = random_qubit_channel(rng, 2);
    FixedPointResult fp = fixed_point_solve(ch, rho);
    if (!fp.converged) {
      fp_ok = false;
      continue;
    }
    IsometryCoupling v = swap_coupling_from_rho_w(fp.state.rho_w);
    Problem prob = make_problem(rho, ch, {"A"}, v.d_w());
    double g = prob.gradient(v.v).norm();
    worst_grad = std::max(worst_grad, g);
    fp_ok = fp_ok && g < 1e-5;
  }
  std::ostringstream d;
  d << "5 instances, worst gradient norm " << format_number(worst_grad);
  add_check(rep, log, "stationarity fixed-point", fp_ok, d.str());

  OptimizerConfig oc;
  oc.restarts = 6;
  oc.max_iters = 4000;
  oc.record_trajectory = false;
  double worst_n2 = 0.0, worst_diff = 0.0;
  bool n2_ok = true;
  for (int i = 0; i < 3; ++i) {
    N2Row r = n2_instance(2000, i, oc, 1e-5, 1e-6);
    worst_n2 = std::max(worst_n2, r.grad_norm);
    worst_diff = std::max(worst_diff, r.diff);
    n2_ok = n2_ok && r.ok;
  }
  std::ostringstream d2;
  d2 << "3 instances, worst gradient " << format_number(worst_n2)
     << ", worst halved-objective gap " << format_number(worst_diff);
  add_check(rep, log, "stationarity doubled-copy", n2_ok, d2.str());
}

void suite_markov(SuiteReport& rep, std::ostream& log) {
  MarkovSetup s = markov_setup(2, 42);
  OptimizerConfig oc;
  oc.restarts = 6;
  oc.max_iters = 4000;
  oc.seed = 42;
  oc.record_trajectory = false;
  MarkovReport r = markov_check(s.rho_in, s.evolution, "A", {"A"}, {"C"}, oc);
  std::ostringstream d;
  d << "gap " << format_number(r.j_abc - r.j_ab) << ", petz error "
    << format_number(r.petz_reconstruction_error) << ", mirror "
    << format_number(r.mirror_operator_check);
  bool ok = r.markov && r.petz_reconstruction_error < 1e-8 &&
            r.mirror_operator_check < 1e-8;
  add_check(rep, log, "markov decoupled instance", ok, d.str());
}

void suite_classical(SuiteReport& rep, std::ostream& log) {
  int n = 120;
  std::vector<ClassicalRow> rows = parallel_map<ClassicalRow>(
      n, [&](int i) { return classical_instance(99, i, 4); });
  int failures = 0;
  double worst_cmi = 0.0;
  for (const auto& r : rows) {
    if (!r.ok) ++failures;
    worst_cmi = std::max(worst_cmi, r.cmi);
  }
  std::ostringstream d;
  d << n << " instances, " << failures << " failures, worst cmi "
    << format_number(worst_cmi);
  add_check(rep, log, "classical bounds", failures == 0, d.str());
}

}  // namespace

std::vector<std::string> list_suites() {
  return {"oracle", "bounds", "stationarity", "markov", "classical", "all"};
}

SuiteReport run_suite(const std::string& name, std::ostream& log) {
  SuiteReport rep;
  rep.suite = name;
  if (name == "oracle") {
    suite_oracle(rep, log);
  } else if (name == "bounds") {
    suite_bounds(rep, log);
  } else if (name == "stationarity") {
    suite_stationarity(rep, log);
  } else if (name == "markov") {
    suite_markov(rep, log);
  } else if (name == "classical") {
    suite_classical(rep, log);
  } else if (name == "all") {
    suite_oracle(rep, log);
    suite_bounds(rep, log);
    suite_stationarity(rep, log);
    suite_markov(rep, log);
    suite_classical(rep, log);
  } else {
    throw Error("unknown suite '" + name + "'; see `stmi list-suites`");
  }
  return rep;
}

}  // namespace stmi
