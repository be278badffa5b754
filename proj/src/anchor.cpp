#include "gbd/anchor.hpp"

#include "gbd/parallel.hpp"
#include "gbd/random.hpp"
#include "gbd/text.hpp"
#include "gbd/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gbd {

Vec truncate(const Vec& t, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncate: level must be positive");
  const double n = t.norm();
  return n > k ? Vec(t * (k / n)) : t;
}

std::string to_string(Kernel kernel) { return kernel == Kernel::Indicator ? "indicator" : "hat"; }

double indicator_kernel(const Vec& x) {
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) >= -0.5 && x(i) < 0.5)) return 0.0;
  return 1.0;
}

double hat_kernel(const Vec& x) {
  double w = 1.0;
  for (int i = 0; i < x.size(); ++i) w *= std::max(0.0, 1.0 - std::abs(x(i)));
  return w;
}

KernelDiscretization::KernelDiscretization(VectorField field, double eps, Vec y, Kernel kernel, double level)
    : field_(std::move(field)), eps_(eps), y_(std::move(y)), kernel_(kernel), level_(level) {
  if (!(eps > 0.0)) throw std::invalid_argument("kernel discretization: eps must be positive");
  if (!(level > 0.0)) throw std::invalid_argument("kernel discretization: truncation level must be positive");
  if (y_.size() != field_.dim()) throw std::invalid_argument("kernel discretization: anchor dimension mismatch");
}

std::vector<Vec> KernelDiscretization::support(const Vec& x) const {
  const int d = field_.dim();
  const Vec rel = x / eps_ - y_;
  std::vector<Vec> pts;
  if (kernel_ == Kernel::Indicator) {
    Vec j(d);
    for (int i = 0; i < d; ++i) j(i) = std::floor(rel(i) + 0.5);
    pts.push_back(eps_ * (y_ + j));
    return pts;
  }
  Vec base(d);
  for (int i = 0; i < d; ++i) base(i) = std::floor(rel(i));
  for (int w = 0; w < (1 << d); ++w) {
    Vec j = base;
    for (int i = 0; i < d; ++i) j(i) += (w >> i) & 1;
    const Vec xbar = eps_ * (y_ + j);
    if (hat_kernel((x - xbar) / eps_) > 0.0) pts.push_back(xbar);
  }
  return pts;
}

Vec KernelDiscretization::operator()(const Vec& x) const {
  Vec out = zeros(field_.dim());
  for (const Vec& xbar : support(x)) {
    const double w = kernel_ == Kernel::Indicator ? 1.0 : hat_kernel((x - xbar) / eps_);
    Vec u = field_(xbar);
    if (std::isfinite(level_)) u = truncate(u, level_);
    out += w * u;
  }
  return out;
}

PhiEvaluator::PhiEvaluator(VectorField field, double eps, PhiOptions options)
    : field_(std::move(field)), eps_(eps), options_(options) {
  if (!(eps > 0.0)) throw std::invalid_argument("phi: eps must be positive");
  if (options_.extra_terms < 0) throw std::invalid_argument("phi: extra_terms must be nonnegative");
  const BoxDomain& dom = field_.domain();
  const int d = field_.dim();
  const double h = options_.probe_step > 0.0 ? options_.probe_step : eps / 8.0;
  probes_ = probe_grid(dom.lower() - Vec::Constant(d, eps), dom.upper() + Vec::Constant(d, eps), h);
  const std::size_t n = probes_.points.size();
  u_.resize(n * static_cast<std::size_t>(d));
  norm_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& x = probes_.points[k];
    const Vec u = field_(x);
    for (int i = 0; i < d; ++i) u_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = u(i);
    norm_[k] = x.norm();
    u_max_ = std::max(u_max_, u.norm());
    radius_ = std::max(radius_, norm_[k]);
  }
  k_max_ = std::max(1, static_cast<int>(std::ceil(dom.max_norm())));
}

namespace {

inline void truncate_into(const double* src, double k, int d, double* dst) {
  double n2 = 0.0;
  for (int i = 0; i < d; ++i) n2 += src[i] * src[i];
  const double scale = n2 > k * k ? k / std::sqrt(n2) : 1.0;
  for (int i = 0; i < d; ++i) dst[i] = src[i] * scale;
}

inline double dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

PhiValue PhiEvaluator::operator()(const Vec& y) const {
  const int d = field_.dim();
  const auto ud = static_cast<std::size_t>(d);
  const BoxDomain& dom = field_.domain();
  const LatticeSamples lattice(field_,
                               covering_window(eps_, y, dom.lower() - Vec::Constant(d, eps_),
                                               dom.upper() + Vec::Constant(d, eps_)));
  const LatticeWindow& win = lattice.window();

  PhiValue out;
  out.k_max = k_max_;
  out.terms = k_max_ + options_.extra_terms;
  out.probe_step = probes_.step;
  // Beyond k_sat every truncation is the identity and B_k covers all probes,
  // so the remaining terms repeat the last one.
  const double u_sup = std::max(u_max_, lattice.max_norm());
  const int k_sat = std::max(1, static_cast<int>(std::ceil(std::max(u_sup, radius_))));
  const int k_last = std::min(out.terms, k_sat);

  const std::size_t npts = win.size();
  std::vector<std::vector<double>> trunc(static_cast<std::size_t>(k_last), std::vector<double>(npts * ud));
  for (int k = 1; k <= k_last; ++k)
    for (std::size_t j = 0; j < npts; ++j)
      truncate_into(lattice.at(j), k, d, trunc[static_cast<std::size_t>(k - 1)].data() + j * ud);

  std::vector<std::size_t> stride(ud);
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) {
    stride[static_cast<std::size_t>(i)] = s;
    s *= static_cast<std::size_t>(win.count(i));
  }

  const std::size_t n = probes_.points.size();
  std::vector<std::vector<double>> contrib(static_cast<std::size_t>(k_last), std::vector<double>(n, 0.0));
  std::array<double, kMaxDim> t{}, tu{}, hat{};
  std::array<std::size_t, 1 << kMaxDim> corner{};
  std::array<double, 1 << kMaxDim> weight{};
  for (std::size_t p = 0; p < n; ++p) {
    const Vec& x = probes_.points[p];
    std::size_t base = 0, nearest = 0;
    for (int i = 0; i < d; ++i) {
      const double rel = x(i) / eps_ - y(i);
      const double fl = std::floor(rel);
      t[static_cast<std::size_t>(i)] = rel - fl;
      base += static_cast<std::size_t>(static_cast<long>(fl) - win.lo(i)) * stride[static_cast<std::size_t>(i)];
      nearest += static_cast<std::size_t>(static_cast<long>(std::floor(rel + 0.5)) - win.lo(i)) *
                 stride[static_cast<std::size_t>(i)];
    }
    const int nc = 1 << d;
    for (int w = 0; w < nc; ++w) {
      std::size_t idx = base;
      double wt = 1.0;
      for (int i = 0; i < d; ++i) {
        const bool up = (w >> i) & 1;
        if (up) idx += stride[static_cast<std::size_t>(i)];
        wt *= up ? t[static_cast<std::size_t>(i)] : 1.0 - t[static_cast<std::size_t>(i)];
      }
      corner[static_cast<std::size_t>(w)] = idx;
      weight[static_cast<std::size_t>(w)] = wt;
    }
    const double* u = u_.data() + p * ud;
    for (int k = 1; k <= k_last; ++k) {
      if (!(norm_[p] < k)) continue;
      const auto& tk = trunc[static_cast<std::size_t>(k - 1)];
      truncate_into(u, k, d, tu.data());
      std::fill(hat.begin(), hat.end(), 0.0);
      for (int w = 0; w < nc; ++w) {
        const double* v = tk.data() + corner[static_cast<std::size_t>(w)] * ud;
        for (int i = 0; i < d; ++i) hat[static_cast<std::size_t>(i)] += weight[static_cast<std::size_t>(w)] * v[i];
      }
      const double* ind = tk.data() + nearest * ud;
      contrib[static_cast<std::size_t>(k - 1)][p] = dist(ind, tu.data(), d) + dist(hat.data(), tu.data(), d);
    }
  }

  double value = 0.0, last = 0.0;
  for (int k = 1; k <= k_last; ++k) {
    last = probes_.cell_volume * pairwise_sum(contrib[static_cast<std::size_t>(k - 1)]);
    value += std::ldexp(last, -k);
  }
  for (int k = k_last + 1; k <= out.terms; ++k) value += std::ldexp(last, -k);
  out.value = value;
  if (k_sat <= out.terms) {
    out.tail_bound = std::ldexp(last, -out.terms);
  } else {
    const double region = probes_.cell_volume * static_cast<double>(n);
    out.tail_bound = 4.0 * region * (out.terms + 2) * std::ldexp(1.0, -out.terms);
  }
  return out;
}

PhiValue phi_epsilon(const VectorField& field, double eps, const Vec& y, PhiOptions options) {
  return PhiEvaluator(field, eps, options)(y);
}

double energy_avg(const LatticeSamples& samples, const DirectionSet& dirs, double p) {
  const LatticeWindow& win = samples.window();
  const int d = win.dim();
  if (!dirs.is_canonical()) throw std::invalid_argument("energy_avg: lattice sums need the canonical basis");
  std::vector<double> per_dir;
  for (const Direction& dir : dirs) {
    IVec shift(d);
    for (int i = 0; i < d; ++i) shift(i) = static_cast<long>(std::lround(dir.coeffs(i)));
    std::vector<double> terms;
    for (std::size_t k = 0; k < win.size(); ++k) {
      if (!samples.in_domain(k)) continue;
      const IVec j = win.index(k);
      const IVec j2 = j + shift;
      if (!win.contains(j2)) continue;
      const std::size_t k2 = win.flat(j2);
      if (!samples.in_domain(k2)) continue;
      const double* a = samples.at(k);
      const double* b = samples.at(k2);
      double delta = 0.0, scale = 0.0;
      for (int i = 0; i < d; ++i) {
        delta += dir.xi(i) * (b[i] - a[i]);
        scale += std::abs(dir.xi(i)) * (std::abs(a[i]) + std::abs(b[i]));
      }
      delta = std::abs(delta);
      if (delta <= roundoff_floor(scale)) delta = 0.0;
      terms.push_back(p == 1.0 ? std::min(delta, dir.threshold) : std::min(std::pow(delta, p), 1.0));
    }
    per_dir.push_back(pairwise_sum(terms));
  }
  return std::pow(win.eps, d - 1) * pairwise_sum(per_dir);
}

double energy_avg(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs, double p) {
  const BoxDomain& dom = field.domain();
  const LatticeSamples samples(field, covering_window(eps, y, dom.lower(), dom.upper()));
  return energy_avg(samples, dirs, p);
}

std::vector<Vec> anchor_candidates(int d, int n, std::uint64_t seed) {
  std::vector<Vec> ys;
  for (int c = 0; c < n; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    ys.push_back(uniform_in_unit_cube(rng, d));
  }
  return ys;
}

std::vector<AnchorDiagnostics> anchor_diagnostics(const VectorField& field, double eps, const DirectionSet& dirs,
                                                  double M, const std::vector<Vec>& ys, double p,
                                                  PhiOptions options) {
  const PhiEvaluator phi(field, eps, options);
  const BoxDomain& dom = field.domain();
  auto diags = parallel_map<AnchorDiagnostics>(ys.size(), [&](std::size_t c) {
    AnchorDiagnostics a;
    a.y = ys[c];
    const PhiValue v = phi(a.y);
    a.phi = v.value;
    a.phi_tail = v.tail_bound;
    const LatticeSamples samples(field, covering_window(eps, a.y, dom.lower(), dom.upper()));
    a.energy_avg = energy_avg(samples, dirs, p);
    return a;
  });
  std::vector<double> phis;
  for (const auto& a : diags) phis.push_back(a.phi);
  const double mean = phis.empty() ? 0.0 : pairwise_sum(phis) / static_cast<double>(phis.size());
  for (auto& a : diags) {
    a.phi_mean = mean;
    a.phi_threshold = std::sqrt(mean);
    a.in_Q_eps = a.phi <= a.phi_threshold;
    a.energy_bound = 2.0 * M;
    a.in_Q_upper = a.energy_avg <= a.energy_bound;
  }
  return diags;
}

AnchorSelection select_anchor(const VectorField& field, double eps, const DirectionSet& dirs, double M,
                              int n_candidates, std::uint64_t seed, double p, PhiOptions options) {
  if (n_candidates < 4) throw std::invalid_argument("select_anchor: need at least 4 candidates");
  AnchorSelection sel;
  sel.candidates = anchor_diagnostics(field, eps, dirs, M, anchor_candidates(field.dim(), n_candidates, seed), p,
                                      options);
  int feasible = 0;
  const AnchorDiagnostics* chosen = nullptr;
  for (const auto& a : sel.candidates)
    if (a.feasible()) {
      ++feasible;
      if (!chosen) chosen = &a;
    }
  sel.feasible_fraction = static_cast<double>(feasible) / n_candidates;
  if (!chosen) {
    const auto& a = sel.candidates.front();
    std::ostringstream msg;
    msg << "select_anchor: no feasible anchor among " << n_candidates << " candidates at eps " << format_double(eps)
        << " (mean phi " << format_double(a.phi_mean) << ", threshold " << format_double(a.phi_threshold)
        << ", 2M " << format_double(a.energy_bound) << ")";
    throw std::runtime_error(msg.str());
  }
  sel.chosen = *chosen;
  sel.y = chosen->y;
  return sel;
}

double measure_discrepancy(const PointMap& u, const PointMap& v, const BoxDomain& region, double R, double eta,
                           double probe_step) {
  if (!(eta > 0.0)) throw std::invalid_argument("measure_discrepancy: eta must be positive");
  if (region.is_empty()) return 0.0;
  const ProbeGrid grid = probe_grid(region.lower(), region.upper(), probe_step);
  std::vector<double> hits(grid.points.size(), 0.0);
  parallel_for(grid.points.size(), [&](std::size_t k) {
    const Vec& x = grid.points[k];
    if (x.norm() < R && (u(x) - v(x)).norm() > eta) hits[k] = 1.0;
  });
  return grid.cell_volume * pairwise_sum(hits);
}

}  // namespace gbd
