#include "gbd/cli.hpp"

#include "gbd/anchor.hpp"
#include "gbd/approximant.hpp"
#include "gbd/parallel.hpp"
#include "gbd/random.hpp"
#include "gbd/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <variant>

namespace gbd::cli {

namespace {

using json = nlohmann::ordered_json;
using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
  std::string schema;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::string csv() const {
    std::ostringstream os;
    os << "# " << schema << " schema=1";
    for (const auto& [k, v] : params) os << ' ' << k << '=' << v;
    os << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) os << format_double(v);
              else if constexpr (std::is_same_v<T, bool>) os << (v ? "true" : "false");
              else os << v;
            },
            row[i]);
      }
      os << '\n';
    }
    return os.str();
  }

  std::string to_json() const {
    json j;
    j["schema"] = schema;
    j["schema_version"] = 1;
    json params_json = json::object();
    for (const auto& [k, v] : params) params_json[k] = v;
    j["params"] = params_json;
    json rows_json = json::array();
    for (const auto& row : rows) {
      json r = json::object();
      for (std::size_t i = 0; i < row.size(); ++i)
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(v)) r[columns[i]] = v;
                else r[columns[i]] = format_double(v);
              } else {
                r[columns[i]] = v;
              }
            },
            row[i]);
      rows_json.push_back(r);
    }
    j["rows"] = rows_json;
    return j.dump(2) + "\n";
  }
};

void add_table(Outputs& out, const std::string& stem, const Table& t) {
  out.files.emplace_back(stem + ".csv", t.csv());
  out.files.emplace_back(stem + ".json", t.to_json());
}

std::string join(const std::vector<double>& xs, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? std::string(1, sep) : "") + format_double(xs[i]);
  return s;
}

double parse_number(const std::string& token) {
  if (auto slash = token.find('/'); slash != std::string::npos) {
    const double a = parse_double(token.substr(0, slash));
    const double b = parse_double(token.substr(slash + 1));
    if (b == 0.0) throw InputError("division by zero in '" + token + "'");
    return a / b;
  }
  return parse_double(token);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> xs;
  std::string token;
  std::istringstream is(text);
  while (std::getline(is, token, ',')) {
    if (token.empty()) continue;
    try {
      xs.push_back(parse_number(token));
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError("invalid number '" + token + "'");
    }
  }
  return xs;
}

SliceMode parse_mode(const std::string& m) {
  if (m == "auto") return SliceMode::Auto;
  if (m == "sampled") return SliceMode::Sampled;
  if (m == "exact") return SliceMode::Exact;
  throw InputError("unknown slice mode '" + m + "' (expected auto, sampled or exact)");
}

SliceQuadrature quadrature(const RunConfig& cfg) {
  SliceQuadrature q;
  q.h = cfg.h;
  q.delta = cfg.delta;
  q.mode = parse_mode(cfg.mode);
  return q;
}

std::vector<std::pair<std::string, std::string>> common_params(const RunConfig& cfg, const GeneratorSpec& spec) {
  std::vector<std::pair<std::string, std::string>> p{
      {"field", spec.name.empty() ? cfg.field_path : spec.name},
      {"dim", std::to_string(spec.dim())},
      {"p", format_double(cfg.p)},
      {"h", format_double(cfg.h)},
      {"delta", format_double(cfg.delta)},
      {"mode", cfg.mode},
  };
  if (!cfg.basis.empty()) {
    std::vector<double> flat;
    for (const auto& v : cfg.basis) flat.insert(flat.end(), v.begin(), v.end());
    p.emplace_back("basis", join(flat));
  }
  if (!cfg.pair_signs.empty()) {
    std::vector<double> s(cfg.pair_signs.begin(), cfg.pair_signs.end());
    p.emplace_back("pair_signs", join(s));
  }
  if (!cfg.thresholds.empty()) p.emplace_back("thresholds", join(cfg.thresholds));
  return p;
}

Mat basis_matrix(const RunConfig& cfg, int d) {
  if (cfg.basis.empty()) return Mat::Identity(d, d);
  if (static_cast<int>(cfg.basis.size()) != d) throw InputError("basis must list " + std::to_string(d) + " vectors");
  Mat B(d, d);
  for (int j = 0; j < d; ++j) {
    if (static_cast<int>(cfg.basis[j].size()) != d) throw InputError("basis vectors must have " + std::to_string(d) + " entries");
    for (int i = 0; i < d; ++i) B(i, j) = cfg.basis[j][i];
  }
  return B;
}

// Lattice constructions need the canonical basis: v = A^{-T}u(A^{-1}·) with
// A = B^{-1} turns the configured basis into the standard one.
struct Prepared {
  GeneratorSpec spec;
  VectorField field;
  DirectionSet dirs;
  double condition = 1.0;
};

Prepared prepare_canonical(const RunConfig& cfg) {
  GeneratorSpec spec = load_field(cfg);
  const int d = spec.dim();
  VectorField field = build_field(spec);
  const Mat B = basis_matrix(cfg, d);
  double cond = 1.0;
  if (!B.isIdentity(0.0)) {
    BasisTransform t = transform_basis(field, B.inverse());
    field = t.field;
    cond = t.condition;
  }
  DirectionSet dirs = make_direction_set(Mat::Identity(d, d), cfg.pair_signs, cfg.thresholds);
  return {std::move(spec), std::move(field), std::move(dirs), cond};
}

}  // namespace

const std::string& Outputs::file(const std::string& name) const {
  for (const auto& [n, content] : files)
    if (n == name) return content;
  throw std::out_of_range("no output named " + name);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("config '" + path + "': expected a JSON object");
  RunConfig c;
  static const std::set<std::string> known{"field", "corpus", "basis", "pair_signs", "thresholds", "eps", "p", "h",
                                           "delta", "mode", "probe_step", "n_candidates", "n_anchors", "seed", "eta",
                                           "R", "threads", "out", "dump", "d", "method", "starts", "cache"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw InputError("config '" + path + "': unknown key '" + key + "'");
      if (key == "field") c.field_path = value.get<std::string>();
      else if (key == "corpus") c.corpus_name = value.get<std::string>();
      else if (key == "basis") c.basis = value.get<std::vector<std::vector<double>>>();
      else if (key == "pair_signs") c.pair_signs = value.get<std::vector<int>>();
      else if (key == "thresholds") c.thresholds = value.get<std::vector<double>>();
      else if (key == "eps") c.eps = value.get<std::vector<double>>();
      else if (key == "p") c.p = value.get<double>();
      else if (key == "h") c.h = value.get<double>();
      else if (key == "delta") c.delta = value.get<double>();
      else if (key == "mode") c.mode = value.get<std::string>();
      else if (key == "probe_step") c.probe_step = value.get<double>();
      else if (key == "n_candidates") c.n_candidates = value.get<int>();
      else if (key == "n_anchors") c.n_anchors = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "eta") c.eta = value.get<double>();
      else if (key == "R") c.R = value.get<double>();
      else if (key == "threads") c.threads = value.get<int>();
      else if (key == "out") c.out_dir = value.get<std::string>();
      else if (key == "dump") c.dump = value.get<bool>();
      else if (key == "d") c.korn_d = value.get<int>();
      else if (key == "method") c.korn_method = value.get<std::string>();
      else if (key == "starts") c.korn_starts = value.get<int>();
      else if (key == "cache") c.korn_cache = value.get<std::string>();
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  return c;
}

void validate(const RunConfig& c) {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InputError(std::string(name) + " must be positive");
  };
  positive(c.p, "p");
  if (c.p < 1.0) throw InputError("p must be at least 1");
  positive(c.h, "h");
  positive(c.delta, "delta");
  positive(c.eta, "eta");
  parse_mode(c.mode);
  if (c.eps.empty()) throw InputError("eps list is empty");
  for (std::size_t k = 0; k < c.eps.size(); ++k) {
    positive(c.eps[k], "eps");
    if (k > 0 && !(c.eps[k] < c.eps[k - 1])) throw InputError("eps list must be strictly decreasing");
  }
  if (c.n_candidates < 4) throw InputError("n_candidates must be at least 4");
  if (c.n_anchors < 1) throw InputError("n_anchors must be positive");
  if (c.threads < 0) throw InputError("threads must be positive");
  if (c.korn_starts < 1) throw InputError("starts must be positive");
  for (double t : c.thresholds) positive(t, "threshold");
  for (int s : c.pair_signs)
    if (s != 1 && s != -1) throw InputError("pair signs must be +1 or -1");
}

GeneratorSpec load_field(const RunConfig& cfg) {
  if (!cfg.field_path.empty()) {
    if (!std::filesystem::exists(cfg.field_path)) throw InputError("field descriptor not found: " + cfg.field_path);
    try {
      return read_field_spec(cfg.field_path);
    } catch (const std::exception& e) {
      throw InputError(cfg.field_path + ": " + e.what());
    }
  }
  if (!cfg.corpus_name.empty()) {
    try {
      return corpus_field(cfg.corpus_name);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }
  throw InputError("no field given (use --field PATH or --corpus NAME)");
}

DirectionSet directions(const RunConfig& cfg, int d) {
  try {
    return make_direction_set(basis_matrix(cfg, d), cfg.pair_signs, cfg.thresholds);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

Outputs cmd_energy(const RunConfig& cfg) {
  const GeneratorSpec spec = load_field(cfg);
  const int d = spec.dim();
  const VectorField field = build_field(spec);
  const DirectionSet dirs = directions(cfg, d);
  const DirectionalEnergy e = lambda_V(field, dirs, quadrature(cfg), cfg.p);

  Table t;
  t.schema = "gbd_slice energy";
  t.params = common_params(cfg, spec);
  t.columns = {"row", "kind"};
  for (int i = 0; i < d; ++i) t.columns.push_back("xi_" + std::to_string(i + 1));
  for (const char* c : {"beta", "weight", "lambda", "lambda_p", "exact_lambda", "exact_lambda_p", "h", "delta"})
    t.columns.emplace_back(c);

  double exact_total = 0.0, exact_total_p = 0.0;
  bool exact_all = true;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const Direction& dir = dirs[k];
    std::vector<Cell> row{static_cast<long long>(k), std::string(dir.is_pair() ? "pair" : "basis")};
    for (int i = 0; i < d; ++i) row.emplace_back(dir.xi(i));
    row.insert(row.end(), {dir.threshold, dir.weight(), e.lambda[k], e.lambda_p[k]});
    try {
      const SliceEnergy ex = exact_lambda(spec, dir.xi, dir.threshold, cfg.p);
      row.insert(row.end(), {ex.lambda, ex.lambda_p});
      exact_total += ex.lambda;
      exact_total_p += ex.lambda_p;
    } catch (const std::domain_error&) {
      row.insert(row.end(), {std::string(), std::string()});
      exact_all = false;
    }
    row.insert(row.end(), {cfg.h, cfg.delta});
    t.rows.push_back(row);
  }
  auto summary_row = [&](const char* name, double a, double b, std::optional<std::pair<double, double>> ex) {
    std::vector<Cell> row{std::string(name), std::string("sum")};
    for (int i = 0; i < d; ++i) row.emplace_back(std::string());
    row.insert(row.end(), {std::string(), std::string(), a, b});
    if (ex) row.insert(row.end(), {ex->first, ex->second});
    else row.insert(row.end(), {std::string(), std::string()});
    row.insert(row.end(), {cfg.h, cfg.delta});
    t.rows.push_back(row);
  };
  summary_row("total", e.lambda_V, e.lambda_pV,
              exact_all ? std::optional(std::make_pair(exact_total, exact_total_p)) : std::nullopt);
  summary_row("weighted", e.M, e.M_p, std::nullopt);

  Outputs out;
  add_table(out, "energy", t);
  std::ostringstream s;
  s << "field " << (spec.name.empty() ? cfg.field_path : spec.name) << ": Lambda^V = " << format_double(e.lambda_V)
    << ", Lambda^{p,V} = " << format_double(e.lambda_pV) << ", M = " << format_double(e.M) << "\n";
  out.summary = s.str();
  return out;
}

Outputs cmd_approximate(const RunConfig& cfg) {
  const Prepared prep = prepare_canonical(cfg);
  const int d = prep.spec.dim();
  SweepOptions o;
  o.eps = cfg.eps;
  o.p = cfg.p;
  o.eta = cfg.eta;
  o.R = cfg.R > 0.0 ? cfg.R : std::numeric_limits<double>::infinity();
  o.n_candidates = cfg.n_candidates;
  o.seed = cfg.seed;
  o.probe_step = cfg.probe_step;
  o.quad = quadrature(cfg);
  const SweepResult res = convergence_sweep(prep.field, prep.dirs, o);

  Table t;
  t.schema = "gbd_slice approximate";
  t.params = common_params(cfg, prep.spec);
  t.params.insert(t.params.end(), {{"eps", join(cfg.eps)},
                                   {"eta", format_double(cfg.eta)},
                                   {"R", cfg.R > 0.0 ? format_double(cfg.R) : "inf"},
                                   {"n_candidates", std::to_string(cfg.n_candidates)},
                                   {"seed", std::to_string(cfg.seed)},
                                   {"probe_step", cfg.probe_step > 0.0 ? format_double(cfg.probe_step) : "eps/8"}});
  t.columns = {"eps", "lambda", "M", "energy", "perimeter_inner", "perimeter", "bad_volume", "bad_count",
               "good_count", "ratio", "discrepancy", "discrepancy_inner"};
  for (int i = 0; i < d; ++i) t.columns.push_back("y_" + std::to_string(i + 1));
  for (const char* c : {"phi", "phi_threshold", "energy_avg", "two_M", "feasible_fraction", "korn_constant",
                        "korn_violations", "korn_max_ratio", "probe_step"})
    t.columns.emplace_back(c);

  Outputs out;
  std::ostringstream summary;
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    const SweepRow& r = res.rows[k];
    std::vector<Cell> row{r.eps,
                          r.report.lambda,
                          r.report.M,
                          r.report.energy,
                          r.report.perimeter_inner,
                          r.report.perimeter,
                          r.report.bad_volume,
                          static_cast<long long>(r.report.bad_count),
                          static_cast<long long>(r.report.good_count),
                          r.report.ratio,
                          r.discrepancy,
                          r.discrepancy_inner};
    for (int i = 0; i < d; ++i) row.emplace_back(r.anchor.y(i));
    row.insert(row.end(), {r.anchor.phi, r.anchor.phi_threshold, r.anchor.energy_avg, r.anchor.energy_bound,
                           r.feasible_fraction});
    if (r.korn) {
      row.insert(row.end(), {r.korn->constant, static_cast<long long>(r.korn->violations), r.korn->max_ratio});
      out.violation = out.violation || r.korn->violations > 0;
    } else {
      row.insert(row.end(), {std::string(), std::string(), std::string()});
    }
    row.emplace_back(r.probe_step);
    t.rows.push_back(row);
    out.violation = out.violation || r.report.ratio_infinite;
    summary << "eps " << format_double(r.eps) << ": ratio " << format_double(r.report.ratio) << ", bad cubes "
            << r.report.bad_count << ", discrepancy " << format_double(r.discrepancy) << "\n";
    if (cfg.dump) {
      std::ostringstream dump;
      write_approximant(dump, build(prep.field, r.eps, r.anchor.y, prep.dirs));
      out.files.emplace_back("approximant_" + std::to_string(k) + ".txt", dump.str());
    }
  }
  add_table(out, "sweep", t);
  std::rotate(out.files.begin(), out.files.end() - 2, out.files.end());
  out.summary = summary.str();
  return out;
}

Outputs cmd_korn(const RunConfig& cfg) {
  const KornMethod method = [&] {
    try {
      return parse_korn_method(cfg.korn_method);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }();
  if (cfg.korn_d < 2 || cfg.korn_d > 3) throw InputError("korn: d must be 2 or 3");
  if (method == KornMethod::Eig && cfg.p != 2.0) throw InputError("korn: eig method requires p = 2");
  KornCache cache;
  if (!cfg.korn_cache.empty()) cache = KornCache::load(cfg.korn_cache);
  const int starts = method == KornMethod::Search ? cfg.korn_starts : 0;
  auto cached = cache.find(cfg.korn_d, cfg.p, method, cfg.seed);
  const bool hit = cached.has_value() && cached->starts == starts;
  const KornEstimate est = hit ? *cached : korn_constant(cfg.korn_d, cfg.p, method, cfg.seed, cfg.korn_starts);
  if (!cfg.korn_cache.empty() && !hit) {
    cache.store(est);
    cache.save(cfg.korn_cache);
  }

  Table t;
  t.schema = "gbd_slice korn";
  t.params = {{"d", std::to_string(est.d)}, {"p", format_double(est.p)}, {"method", to_string(est.method)},
              {"seed", std::to_string(est.seed)}, {"starts", std::to_string(est.starts)}};
  t.columns = {"d", "p", "method", "seed", "starts", "constant", "lower_bound", "quotient_dim", "certified_upper"};
  std::vector<Cell> row{static_cast<long long>(est.d), est.p, to_string(est.method), static_cast<long long>(est.seed),
                        static_cast<long long>(est.starts), est.constant, est.lower_bound,
                        static_cast<long long>(est.quotient_dim)};
  if (est.p <= 2.0) row.emplace_back(korn_upper_bound(est.d, est.p));
  else row.emplace_back(std::string());
  t.rows.push_back(row);
  Outputs out;
  add_table(out, "korn", t);
  out.summary = "Korn constant d=" + std::to_string(est.d) + " p=" + format_double(est.p) + " (" +
                to_string(est.method) + "): " + format_double(est.constant) + (hit ? " [cached]" : "") + "\n";
  return out;
}

Outputs cmd_anchor_diag(const RunConfig& cfg) {
  const Prepared prep = prepare_canonical(cfg);
  const int d = prep.spec.dim();
  const DirectionalEnergy e = lambda_V(prep.field, prep.dirs, quadrature(cfg), cfg.p);
  const double M = cfg.p == 1.0 ? e.M : e.M_p;
  PhiOptions phi;
  phi.probe_step = cfg.probe_step;

  Table t, s;
  t.schema = "gbd_slice anchor-diag";
  t.params = common_params(cfg, prep.spec);
  t.params.insert(t.params.end(), {{"eps", join(cfg.eps)},
                                   {"n_anchors", std::to_string(cfg.n_anchors)},
                                   {"seed", std::to_string(cfg.seed)},
                                   {"probe_step", cfg.probe_step > 0.0 ? format_double(cfg.probe_step) : "eps/8"}});
  s.schema = "gbd_slice anchor-summary";
  s.params = t.params;
  t.columns = {"eps", "index"};
  for (int i = 0; i < d; ++i) t.columns.push_back("y_" + std::to_string(i + 1));
  for (const char* c : {"phi", "phi_tail", "phi_threshold", "in_Q_eps", "energy_avg", "two_M", "in_Q_upper", "feasible"})
    t.columns.emplace_back(c);
  s.columns = {"eps", "mean_phi", "phi_threshold", "fraction_Q_eps", "fraction_Q_upper", "feasible_fraction",
               "mean_energy_avg", "M"};

  std::ostringstream summary;
  for (std::size_t k = 0; k < cfg.eps.size(); ++k) {
    const double eps = cfg.eps[k];
    const auto ys = anchor_candidates(d, cfg.n_anchors, split_seed(cfg.seed, k));
    const auto diags = anchor_diagnostics(prep.field, eps, prep.dirs, M, ys, cfg.p, phi);
    std::size_t q = 0, u = 0, f = 0;
    std::vector<double> energies;
    for (std::size_t c = 0; c < diags.size(); ++c) {
      const AnchorDiagnostics& a = diags[c];
      std::vector<Cell> row{eps, static_cast<long long>(c)};
      for (int i = 0; i < d; ++i) row.emplace_back(a.y(i));
      row.insert(row.end(), {a.phi, a.phi_tail, a.phi_threshold, a.in_Q_eps, a.energy_avg, a.energy_bound,
                             a.in_Q_upper, a.feasible()});
      t.rows.push_back(row);
      q += a.in_Q_eps;
      u += a.in_Q_upper;
      f += a.feasible();
      energies.push_back(a.energy_avg);
    }
    const double n = static_cast<double>(diags.size());
    s.rows.push_back({eps, diags.front().phi_mean, diags.front().phi_threshold, q / n, u / n, f / n,
                      pairwise_sum(energies) / n, M});
    summary << "eps " << format_double(eps) << ": feasible fraction " << format_double(f / n) << "\n";
  }
  Outputs out;
  add_table(out, "anchors", t);
  add_table(out, "anchor_summary", s);
  out.summary = summary.str();
  return out;
}

Outputs cmd_corpus_list(const RunConfig& cfg) {
  Table t;
  t.schema = "gbd_slice corpus";
  t.params = {{"p", format_double(cfg.p)}};
  t.columns = {"name", "kind", "dim", "lambda_e1", "lambda_e2", "lambda_e1_e2", "lambda_V", "M", "lambda_pV"};
  std::ostringstream summary;
  for (const GeneratorSpec& spec : corpus()) {
    const DirectionSet dirs = canonical_directions(spec.dim());
    std::vector<Cell> row{spec.name, to_string(spec.kind()), static_cast<long long>(spec.dim())};
    double total = 0.0, M = 0.0, total_p = 0.0;
    for (const Direction& dir : dirs) {
      const SliceEnergy ex = exact_lambda(spec, dir.xi, dir.threshold, cfg.p);
      row.emplace_back(ex.lambda);
      total += ex.lambda;
      total_p += ex.lambda_p;
      M += dir.weight() * ex.lambda;
    }
    row.insert(row.end(), {total, M, total_p});
    t.rows.push_back(row);
    summary << spec.name << " (" << to_string(spec.kind()) << "): Lambda^V = " << format_double(total) << "\n";
  }
  Outputs out;
  add_table(out, "corpus", t);
  out.summary = summary.str();
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directional slice energies and cube approximants for GBD fields", "gbd_slice"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path, eps_text;
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, candidates, anchors, d, starts;
  std::optional<double> h, delta, eta, R, probe;
  std::optional<std::string> mode, method, cache, field, corpus_name, out_dir;
  bool no_dump = false;

  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print this help message and exit");
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--field", field, "field descriptor file");
    sub->add_option("--corpus", corpus_name, "built-in corpus field name");
    sub->add_option("--eps", eps_text, "comma-separated, strictly decreasing (fractions like 1/8 allowed)");
    sub->add_option("--p", p, "exponent (1 = GBD energy)");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--threads", threads, "worker count (fallback: GBD_SLICE_THREADS)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--h", h, "slice sampling step");
    sub->add_option("--delta", delta, "hyperplane grid step");
    sub->add_option("--mode", mode, "slice analysis: auto, sampled or exact");
    sub->add_option("--probe-step", probe, "probe grid step (default eps/8)");
  };
  CLI::App* energy = app.add_subcommand("energy", "directional energies Λ^ξ, Λ^V and M");
  CLI::App* approx = app.add_subcommand("approximate", "ε-sweep of cube approximants");
  CLI::App* korn = app.add_subcommand("korn", "discrete Korn constant");
  CLI::App* diag = app.add_subcommand("anchor-diag", "anchor feasibility diagnostics");
  CLI::App* corp = app.add_subcommand("corpus", "built-in test fields");
  CLI::App* corp_list = corp->add_subcommand("list", "names and closed-form energies");
  corp->require_subcommand(1);
  for (CLI::App* sub : {energy, approx, korn, diag, corp_list}) add_common(sub);
  for (CLI::App* sub : {approx, diag}) {
    sub->add_option("--eta", eta, "discrepancy threshold");
    sub->add_option("--R", R, "discrepancy ball radius");
    sub->add_option("--candidates", candidates, "anchor candidates per ε");
    sub->add_option("--anchors", anchors, "sampled anchors per ε (anchor-diag)");
  }
  approx->add_flag("--no-dump", no_dump, "skip approximant dumps");
  korn->add_option("--d", d, "dimension (2 or 3)");
  korn->add_option("--method", method, "eig or search");
  korn->add_option("--starts", starts, "random starts for search");
  korn->add_option("--cache", cache, "cache table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (field) cfg.field_path = *field;
    if (corpus_name) cfg.corpus_name = *corpus_name;
    if (!eps_text.empty()) cfg.eps = parse_list(eps_text);
    if (p) cfg.p = *p;
    else if (korn->parsed() && config_path.empty()) cfg.p = 2.0;
    if (seed) cfg.seed = *seed;
    if (h) cfg.h = *h;
    if (delta) cfg.delta = *delta;
    if (mode) cfg.mode = *mode;
    if (probe) cfg.probe_step = *probe;
    if (eta) cfg.eta = *eta;
    if (R) cfg.R = *R;
    if (candidates) cfg.n_candidates = *candidates;
    if (anchors) cfg.n_anchors = *anchors;
    if (d) cfg.korn_d = *d;
    if (method) cfg.korn_method = *method;
    if (starts) cfg.korn_starts = *starts;
    if (cache) cfg.korn_cache = *cache;
    if (out_dir) cfg.out_dir = *out_dir;
    if (no_dump) cfg.dump = false;
    if (threads) cfg.threads = *threads;
    validate(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  int n_threads = cfg.threads;
  if (!threads && n_threads == 0) n_threads = thread_count_from_env();
  set_thread_count(n_threads > 0 ? n_threads : 1);

  Outputs result;
  try {
    if (energy->parsed()) result = cmd_energy(cfg);
    else if (approx->parsed()) result = cmd_approximate(cfg);
    else if (korn->parsed()) result = cmd_korn(cfg);
    else if (diag->parsed()) result = cmd_anchor_diag(cfg);
    else result = cmd_corpus_list(cfg);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  }

  if (cfg.out_dir.empty()) {
    out << result.files.front().second;
  } else {
    try {
      std::filesystem::create_directories(cfg.out_dir);
      for (const auto& [name, content] : result.files) {
        const auto path = std::filesystem::path(cfg.out_dir) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InputError("cannot write " + path.string());
        f << content;
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitInput;
    }
    out << result.summary;
  }
  if (result.violation) {
    err << "bound violation detected\n";
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace gbd::cli
