// Acceptance suite: one PASS/FAIL line per criterion.

#include "gbd/anchor.hpp"
#include "gbd/approximant.hpp"
#include "gbd/cli.hpp"
#include "gbd/generators.hpp"
#include "gbd/interpolation.hpp"
#include "gbd/parallel.hpp"
#include "gbd/random.hpp"
#include "gbd/slicing.hpp"
#include "gbd/text.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace gbd;

namespace {

constexpr std::uint64_t kSeed = 42;
const std::vector<double> kSweepEps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const std::string& title, const Verdict& v, double seconds) {
  std::printf("criterion %2d: %s  %s (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), seconds);
  for (const auto& n : v.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

CubeVertexData random_vertices(Rng& rng, int d) {
  std::normal_distribution<double> N(0.0, 1.0);
  return CubeVertexData::sample(d, [&](const Vec&) {
    Vec v(d);
    for (int a = 0; a < d; ++a) v(a) = N(rng);
    return v;
  });
}

bool is_cracked(const GeneratorSpec& s) {
  return s.kind() == GeneratorKind::ScalarJump || s.kind() == GeneratorKind::PiecewiseRigid ||
         s.kind() == GeneratorKind::Sum;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  Clock clock;
  Verdict v;
  auto rng = make_rng(kSeed, 1);
  for (int d = 2; d <= 3; ++d) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const CubeVertexData data = project_compatible(random_vertices(rng, d));
      std::vector<int> idx(d, 0);
      while (true) {
        Vec x(d);
        for (int a = 0; a < d; ++a) x(a) = idx[a] / 4.0;
        worst = std::max(worst, sym_gradient(data, x).norm());
        int a = 0;
        while (a < d && ++idx[a] == 5) idx[a++] = 0;
        if (a == d) break;
      }
    }
    v.note("d=" + std::to_string(d) + ": max |e(v)| over 1000 projected datasets = " + fmt(worst));
    v.require(worst <= 1e-10, "max |e(v)| <= 1e-10 (d=" + std::to_string(d) + ")");
  }
  const double t = clock.seconds();
  v.require(t < 5.0, "runtime < 5 s");
  report(1, "rigidity of compatible vertex data", v, t);
}

double korn_c2 = 0.0;

void criterion_2() {
  Clock clock;
  Verdict v;
  const KornEstimate eig = korn_constant(2, 2.0, KornMethod::Eig, kSeed);
  const KornEstimate search = korn_constant(2, 2.0, KornMethod::Search, kSeed, 200);
  korn_c2 = eig.constant;
  const double rel = std::abs(search.constant - eig.constant) / eig.constant;
  v.note("eig C = " + fmt(eig.constant, 8) + ", search C = " + fmt(search.constant, 8) + ", relative gap " + fmt(rel));
  v.require(rel <= 0.05, "eig/search agreement within 5%");
  auto rng = make_rng(kSeed, 2);
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const CubeVertexData data = random_vertices(rng, 2);
    const double lhs = cube_energy(data, 2.0), rhs = fd_rhs(data, 2.0);
    worst = std::max(worst, lhs / rhs);
    violations += lhs > eig.constant * rhs * (1 + 1e-12);
  }
  v.note("10^4 random datasets: " + std::to_string(violations) + " violations, max ratio " + fmt(worst, 6));
  v.require(violations == 0, "zero violations of the discrete Korn inequality");
  const double t = clock.seconds();
  v.require(t < 30.0, "runtime < 30 s");
  report(2, "discrete Korn constant (d=2, p=2)", v, t);
}

// Sampled vs closed-form energies over the corpus; `p` selects Λ or Λ^p.
void energy_oracles(Verdict& v, double p) {
  SliceQuadrature q;
  q.h = 1e-3;
  q.delta = 1e-2;
  q.mode = SliceMode::Sampled;
  double worst = 0.0;
  std::string worst_at;
  for (const GeneratorSpec& spec : corpus()) {
    const VectorField f = build_field(spec);
    for (const Direction& dir : canonical_directions(2)) {
      const SliceEnergy ex = exact_lambda(spec, dir.xi, dir.threshold, p);
      const SliceEnergy sm = lambda_xi(f, dir.xi, q, dir.threshold, p);
      const double e = p == 1.0 ? ex.lambda : ex.lambda_p, s = p == 1.0 ? sm.lambda : sm.lambda_p;
      const double err = e == 0.0 ? (s == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : std::abs(s - e) / e;
      if (err > worst) {
        worst = err;
        worst_at = spec.name + " xi=(" + format_vec(dir.xi, ',') + ")";
      }
    }
  }
  v.note("max relative error sampled vs exact over 8 fields x 3 directions: " + fmt(worst) +
         (worst_at.empty() ? "" : " at " + worst_at));
  v.require(worst <= 0.02, "all sampled energies within 2% of the closed form");
}

void criterion_3() {
  Clock clock;
  Verdict v;
  energy_oracles(v, 1.0);
  SliceQuadrature q;
  q.mode = SliceMode::Sampled;
  const DirectionalEnergy id = lambda_V(build_field(corpus_field("linear_identity")), canonical_directions(2), q);
  v.note("identity field: Lambda^V = " + fmt(id.lambda_V, 6) + " (sum |xi| Lambda^xi = " + fmt(id.M, 6) + ")");
  v.require(std::abs(id.lambda_V - 4.0) <= 0.02 * 4.0, "identity-field Lambda^V = 4 within 2%");
  const double crack = lambda_xi(build_field(corpus_field("crack_vertical")), Vec{{1.0, 1.0}}, q).lambda;
  v.note("crack field: Lambda^{e1+e2} = " + fmt(crack, 6) + " (1/sqrt2 = " + fmt(1 / std::sqrt(2.0), 6) + ")");
  v.require(std::abs(crack - 1 / std::sqrt(2.0)) <= 0.02 / std::sqrt(2.0), "crack-field Lambda^{e1+e2} = 1/sqrt2 within 2%");
  const double t = clock.seconds();
  v.require(t < 60.0, "runtime < 60 s");
  report(3, "directional energy oracles", v, t);
}

std::map<std::string, SweepResult> sweeps(double p) {
  std::map<std::string, SweepResult> out;
  for (const GeneratorSpec& spec : corpus()) {
    SweepOptions o;
    o.eps = kSweepEps;
    o.p = p;
    o.eta = 0.01;
    o.seed = kSeed;
    o.n_candidates = 16;
    out.emplace(spec.name, convergence_sweep(build_field(spec), canonical_directions(2), o));
  }
  return out;
}

void ratio_bounds(Verdict& v, const std::map<std::string, SweepResult>& all) {
  for (const GeneratorSpec& spec : corpus()) {
    if (!is_cracked(spec)) continue;
    const SweepResult& s = all.at(spec.name);
    std::vector<double> r;
    bool finite = true;
    for (const SweepRow& row : s.rows) {
      r.push_back(row.report.ratio);
      finite = finite && !row.report.ratio_infinite;
    }
    const double mx = *std::max_element(r.begin(), r.end()), mn = *std::min_element(r.begin(), r.end());
    std::string line = spec.name + ": ratios";
    for (double x : r) line += " " + fmt(x);
    v.note(line);
    v.require(finite && mn > 0.0 && mx / mn <= 10.0, spec.name + " max/min ratio <= 10");
    v.require(mx <= 5.0 * r.front(), spec.name + " no ratio above 5x the eps=1/8 value");
  }
}

void bad_set_bounds(Verdict& v, const std::map<std::string, SweepResult>& all) {
  for (const GeneratorSpec& spec : corpus()) {
    if (!is_cracked(spec)) continue;
    const SweepResult& s = all.at(spec.name);
    const DirectionSet dirs = canonical_directions(2);
    double min_beta = std::numeric_limits<double>::infinity();
    for (const Direction& d : dirs) min_beta = std::min(min_beta, std::min(d.threshold, 1.0));
    std::string line = spec.name + ": |B|/eps";
    const double first = s.rows.front().report.bad_volume / s.rows.front().eps;
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
      const SweepRow& row = s.rows[k];
      const double lhs = row.eps * static_cast<double>(row.report.bad_count);
      const double bound = row.anchor.energy_bound / min_beta;
      const bool premise = row.anchor.energy_avg <= row.anchor.energy_bound;
      v.require(!premise || lhs <= bound,
                spec.name + " eps=" + fmt(row.eps) + ": eps*bad_count " + fmt(lhs) + " <= 2M/min beta " + fmt(bound));
      v.require(premise, spec.name + " eps=" + fmt(row.eps) + ": selected anchor satisfies energy_avg <= 2M");
      if (k > 0)
        v.require(row.report.bad_volume < s.rows[k - 1].report.bad_volume,
                  spec.name + " |B| decreasing at eps=" + fmt(row.eps));
      const double scaled = row.report.bad_volume / row.eps;
      line += " " + fmt(scaled);
      v.require(scaled <= 4.0 * first && scaled >= first / 4.0, spec.name + " |B|/eps within x4 of eps=1/8");
    }
    v.note(line);
  }
}

void discrepancy_bounds(Verdict& v, const std::map<std::string, SweepResult>& all) {
  for (const GeneratorSpec& spec : corpus()) {
    const SweepResult& s = all.at(spec.name);
    int inversions = 0;
    std::string line = spec.name + ": discrepancy";
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
      line += " " + fmt(s.rows[k].discrepancy);
      if (k > 0 && s.rows[k].discrepancy > s.rows[k - 1].discrepancy) ++inversions;
    }
    v.note(line);
    v.require(inversions <= 1, spec.name + " discrepancy nonincreasing up to one inversion");
    const double area = spec.domain.volume();
    v.require(s.rows.back().discrepancy <= 0.05 * area, spec.name + " discrepancy <= 0.05|Omega| at eps=1/64");
  }
}

void criterion_4(const std::map<std::string, SweepResult>& all, double seconds) {
  Clock clock;
  Verdict v;
  ratio_bounds(v, all);
  report(4, "uniform energy bound along the eps sweep", v, seconds + clock.seconds());
}

void criterion_5(const std::map<std::string, SweepResult>& all) {
  Clock clock;
  Verdict v;
  bad_set_bounds(v, all);
  report(5, "bad-set count and volume bounds", v, clock.seconds());
}

void criterion_6(const std::map<std::string, SweepResult>& all) {
  Clock clock;
  Verdict v;
  discrepancy_bounds(v, all);
  report(6, "convergence in measure", v, clock.seconds());
}

void criterion_7() {
  Clock clock;
  Verdict v;
  const DirectionSet dirs = canonical_directions(2);
  for (const GeneratorSpec& spec : corpus()) {
    const VectorField f = build_field(spec);
    const double M = lambda_V(f, dirs, SliceQuadrature{}).M;
    std::string line = spec.name + " (M=" + fmt(M) + "):";
    for (std::size_t k = 1; k < kSweepEps.size(); ++k) {
      const double eps = kSweepEps[k];
      const auto ys = anchor_candidates(2, 256, split_seed(kSeed, 700 + k));
      const auto diags = anchor_diagnostics(f, eps, dirs, M, ys, 1.0);
      std::vector<double> avg;
      std::size_t feasible = 0;
      for (const auto& a : diags) {
        avg.push_back(a.energy_avg);
        feasible += a.feasible();
      }
      const double mean = pairwise_sum(avg) / static_cast<double>(avg.size());
      const double frac = static_cast<double>(feasible) / static_cast<double>(diags.size());
      line += " eps=" + fmt(eps) + " mean/M=" + (M > 0 ? fmt(mean / M) : std::string("0/0")) + " feasible=" + fmt(frac);
      v.require(mean <= M * 1.02, spec.name + " eps=" + fmt(eps) + ": mean energy_avg <= 1.02 M");
      v.require(frac >= 0.25, spec.name + " eps=" + fmt(eps) + ": feasible fraction >= 1/4");
    }
    v.note(line);
  }
  report(7, "anchor averaging and feasible anchors", v, clock.seconds());
}

// L¹ norms and measures over a probe grid; everything vanishes outside Ω
// expanded by two cells, so that box carries the integrals.
struct ChainTerms {
  double lip_lhs = 0.0, lip_rhs = 0.0;          // T_k∘(ℓ-truncated hat) vs ℓ-truncated hat
  double cube_lhs = 0.0, cube_rhs = 0.0;        // counting bound
  double count_lhs = 0.0, count_rhs = 0.0;      // Markov bound on the count
  double markov_lhs = 0.0, markov_rhs = 0.0;    // convergence-in-measure bound
};

ChainTerms lemma_chain(const VectorField& f, double eps, const Vec& y, double k, double l, double eta) {
  const int d = f.dim();
  const BoxDomain& dom = f.domain();
  const ProbeGrid grid = probe_grid(dom.lower() - Vec::Constant(d, 2 * eps), dom.upper() + Vec::Constant(d, 2 * eps), eps / 8);
  const KernelDiscretization hat_l(f, eps, y, Kernel::Hat, l), ind_l(f, eps, y, Kernel::Indicator, l),
      hat(f, eps, y, Kernel::Hat);
  ChainTerms c;
  const double R = k;
  double big_u = 0.0, big_u_r = 0.0, ind_err = 0.0, tk_err = 0.0, bad = 0.0;
  for (const Vec& x : grid.points) {
    const double r = x.norm();
    const Vec u = f(x), hl = hat_l(x), ue = hat(x);
    if (r < k) {
      c.lip_lhs += (truncate(hl, k) - truncate(u, k)).norm();
      c.lip_rhs += (hl - truncate(u, l)).norm();
      c.cube_lhs += (truncate(ue, k) - truncate(hl, k)).norm();
      tk_err += (truncate(ue, k) - truncate(u, k)).norm();
    }
    if (r < k + eps * std::sqrt(double(d)) && u.norm() > l / 2) big_u += 1;
    if (r < l) ind_err += (ind_l(x) - truncate(u, l)).norm();
    if (r < R) {
      if ((ue - u).norm() > eta) bad += 1;
      if (u.norm() > k / 2) big_u_r += 1;
    }
  }
  const double cell = grid.cell_volume;
  c.lip_lhs *= cell;
  c.lip_rhs *= cell;
  c.cube_lhs *= cell;
  // Lattice points within B_{k+ε√d} where |u| exceeds ℓ.
  const LatticeSamples lattice(f, covering_window(eps, y, dom.lower(), dom.upper()));
  double count = 0.0;
  for (std::size_t j = 0; j < lattice.window().size(); ++j) {
    const Vec xb = lattice.window().point(lattice.window().index(j));
    if (xb.norm() < k + eps * std::sqrt(double(d)) && lattice.value(lattice.window().index(j)).norm() > l) count += 1;
  }
  c.cube_rhs = 2 * k * std::pow(2 * eps, d) * count;
  c.count_lhs = std::pow(eps, d) * count;
  c.count_rhs = big_u * cell + (2 / l) * ind_err * cell;
  c.markov_lhs = bad * cell;
  c.markov_rhs = big_u_r * cell + tk_err * cell / eta;
  return c;
}

void criterion_8() {
  Clock clock;
  Verdict v;
  auto rng = make_rng(kSeed, 8);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  double pou = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec x{{U(rng), U(rng)}};
    const Vec y = uniform_in_unit_cube(rng, 2);
    const double eps = 0.05;
    double total = 0.0;
    oracle::for_each_offset(2, 2, [&](const std::vector<int>& o) {
      Vec xb(2);
      for (int a = 0; a < 2; ++a) xb(a) = eps * (y(a) + std::floor(x(a) / eps - y(a)) + o[a]);
      total += hat_kernel((x - xb) / eps);
    });
    pou = std::max(pou, std::abs(total - 1.0));
  }
  v.note("HAT partition-of-unity residual at 10^4 points: " + fmt(pou));
  v.require(pou <= 1e-12, "partition-of-unity residual <= 1e-12");

  std::normal_distribution<double> N(0.0, 3.0);
  std::uniform_real_distribution<double> L(0.1, 5.0);
  double tk = 0.0, tk_scaled = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec t(3);
    for (int a = 0; a < 3; ++a) t(a) = N(rng);
    const double k = L(rng), l = k + L(rng);
    const double r = (truncate(truncate(t, l), k) - truncate(t, k)).norm();
    tk = std::max(tk, r);
    tk_scaled = std::max(tk_scaled, r / (std::numeric_limits<double>::epsilon() * k));
  }
  v.note("T_k = T_k o T_l on 1000 vectors: max residual " + fmt(tk) + " = " + fmt(tk_scaled) + " DBL_EPSILON*k");
  v.require(tk_scaled <= 4.0, "T_k = T_k o T_l up to roundoff (<= 4 DBL_EPSILON*k)");

  const double eps = 1.0 / 32;
  const Vec y = anchor_candidates(2, 1, kSeed).front();
  for (const GeneratorSpec& spec : corpus()) {
    const VectorField f = build_field(spec);
    for (double l : {1.25, 2.0}) {
      const ChainTerms c = lemma_chain(f, eps, y, 1.0, l, 0.01);
      const double slack = 1e-12;
      const std::string tag = spec.name + " l=" + fmt(l);
      v.require(c.lip_lhs <= c.lip_rhs + slack, tag + ": truncation step " + fmt(c.lip_lhs) + " <= " + fmt(c.lip_rhs));
      v.require(c.cube_lhs <= c.cube_rhs + slack, tag + ": cube count step " + fmt(c.cube_lhs) + " <= " + fmt(c.cube_rhs));
      v.require(c.count_lhs <= c.count_rhs + slack, tag + ": Markov count step " + fmt(c.count_lhs) + " <= " + fmt(c.count_rhs));
      if (l == 2.0) {
        const ChainTerms m = lemma_chain(f, eps, y, 2.0, 3.0, 0.01);
        v.require(m.markov_lhs <= m.markov_rhs + slack,
                  tag + ": measure step " + fmt(m.markov_lhs) + " <= " + fmt(m.markov_rhs));
      }
      if (spec.name == "crack_vertical" && l == 1.25)
        v.note("crack_vertical, k=1, l=1.25: " + fmt(c.lip_lhs) + " <= " + fmt(c.lip_rhs) + ", " + fmt(c.cube_lhs) +
               " <= " + fmt(c.cube_rhs) + ", " + fmt(c.count_lhs) + " <= " + fmt(c.count_rhs));
    }
  }
  report(8, "discretization identities and inequality chain", v, clock.seconds());
}

void criterion_9(const std::map<std::string, SweepResult>& all, double seconds) {
  Clock clock;
  Verdict v;
  energy_oracles(v, 2.0);
  ratio_bounds(v, all);
  bad_set_bounds(v, all);
  discrepancy_bounds(v, all);
  std::size_t cubes = 0, violations = 0;
  double worst = 0.0;
  for (const auto& [name, s] : all)
    for (const SweepRow& row : s.rows) {
      if (!row.korn) {
        v.require(false, name + ": per-cube Korn check missing");
        continue;
      }
      cubes += row.korn->cubes;
      violations += row.korn->violations;
      worst = std::max(worst, row.korn->max_ratio);
      v.require(std::abs(row.korn->constant - korn_c2) <= 1e-12 * korn_c2, name + ": p=2 Korn constant in use");
    }
  v.note("per-cube p-energy check: " + std::to_string(cubes) + " GOOD cubes, " + std::to_string(violations) +
         " violations, max ratio " + fmt(worst) + " vs C=" + fmt(korn_c2, 8));
  v.require(violations == 0, "per-cube p=2 Korn bound never violated");
  report(9, "p = 2 pipeline", v, seconds + clock.seconds());
}

void criterion_10() {
  Clock clock;
  Verdict v;
  cli::RunConfig cfg;
  cfg.corpus_name = "sum_strain_crack";
  cfg.eps = kSweepEps;
  cfg.seed = kSeed;
  std::vector<cli::Outputs> runs;
  for (int n : {1, 4, 8}) {
    set_thread_count(n);
    runs.push_back(cli::cmd_approximate(cfg));
  }
  set_thread_count(1);
  std::size_t bytes = 0;
  for (const auto& [name, content] : runs[0].files) bytes += content.size();
  v.note(std::to_string(runs[0].files.size()) + " files, " + std::to_string(bytes) + " bytes per run");
  for (std::size_t r = 1; r < runs.size(); ++r) {
    v.require(runs[r].files.size() == runs[0].files.size(), "same file set");
    for (std::size_t i = 0; i < runs[0].files.size() && i < runs[r].files.size(); ++i)
      v.require(runs[r].files[i] == runs[0].files[i],
                runs[0].files[i].first + " identical at " + std::to_string(r == 1 ? 4 : 8) + " workers");
  }
  report(10, "byte-identical output at 1, 4 and 8 workers", v, clock.seconds());
}

}  // namespace

int main() {
  set_thread_count(1);
  std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));
  criterion_1();
  criterion_2();
  criterion_3();
  Clock c1;
  const auto p1 = sweeps(1.0);
  const double t1 = c1.seconds();
  criterion_4(p1, t1);
  criterion_5(p1);
  criterion_6(p1);
  criterion_7();
  criterion_8();
  Clock c2;
  const auto p2 = sweeps(2.0);
  criterion_9(p2, c2.seconds());
  criterion_10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
