#include "alexot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "alexot/error.hpp"

namespace alexot::oracle {

namespace {

// Degree-5, 7-point rule on the reference triangle (barycentric coordinates).
struct TriangleRule {
  std::array<std::array<double, 3>, 7> bary;
  std::array<double, 7> weight;
};

const TriangleRule& rule() {
  static const TriangleRule r = [] {
    const double s = std::sqrt(15.0);
    const double a = (6.0 - s) / 21.0, b = (6.0 + s) / 21.0;
    const double wa = (155.0 - s) / 1200.0, wb = (155.0 + s) / 1200.0;
    TriangleRule t{};
    t.bary = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
               {a, a, 1 - 2 * a},
               {a, 1 - 2 * a, a},
               {1 - 2 * a, a, a},
               {b, b, 1 - 2 * b},
               {b, 1 - 2 * b, b},
               {1 - 2 * b, b, b}}};
    t.weight = {9.0 / 40, wa, wa, wa, wb, wb, wb};
    return t;
  }();
  return r;
}

double triangle_rule(Point2 p0, Point2 p1, Point2 p2, const std::function<double(Point2)>& g, int refine) {
  if (refine > 0) {
    const Point2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m20 = 0.5 * (p2 + p0);
    return triangle_rule(p0, m01, m20, g, refine - 1) + triangle_rule(m01, p1, m12, g, refine - 1) +
           triangle_rule(m20, m12, p2, g, refine - 1) + triangle_rule(m01, m12, m20, g, refine - 1);
  }
  const double a = 0.5 * std::abs(cross(p1 - p0, p2 - p0));
  const TriangleRule& r = rule();
  double sum = 0.0;
  for (int q = 0; q < 7; ++q) {
    const Point2 x = r.bary[q][0] * p0 + r.bary[q][1] * p1 + r.bary[q][2] * p2;
    sum += r.weight[q] * g(x);
  }
  return a * sum;
}

bool inside(const Polygon& poly, Point2 x) { return contains(poly, x, 0.0); }

std::size_t argmax_site(const SiteSet& sites, Point2 x) {
  std::size_t best = 0;
  double best_value = sites.affine(0, x);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const double v = sites.affine(i, x);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

// Transportation simplex on a spanning tree rooted at an artificial node that
// is linked to every supply and demand node by a big-M arc.
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
      : S_(supply.size()), T_(demand.size()), n_(S_ + T_ + 1), root_(S_ + T_), cost_(cost) {
    double max_cost = 0.0;
    for (double c : cost) max_cost = std::max(max_cost, std::abs(c));
    big_m_ = (max_cost + 1.0) * static_cast<double>(n_);
    cost_tol_ = 1e-12 * (max_cost + 1.0);

    const std::size_t arcs = S_ * T_ + S_ + T_;
    flow_.assign(arcs, 0.0);
    parent_.assign(n_, kNone);
    pred_.assign(n_, kNone);
    up_.assign(n_, false);
    depth_.assign(n_, 0);
    potential_.assign(n_, 0.0);
    first_child_.assign(n_, kNone);
    next_sibling_.assign(n_, kNone);
    prev_sibling_.assign(n_, kNone);

    for (std::size_t v = 0; v < S_ + T_; ++v) {
      const bool source = v < S_;
      const std::size_t a = S_ * T_ + v;
      flow_[a] = source ? supply[v] : demand[v - S_];
      pred_[v] = a;
      up_[v] = source;  // sources drain into the root, the root feeds sinks
      depth_[v] = 1;
      potential_[v] = source ? -big_m_ : big_m_;
      link(v, root_);
    }
    block_ = std::max<std::size_t>(std::size_t(std::sqrt(double(S_ * T_))), 10);
  }

  std::size_t run() {
    std::size_t pivots = 0;
    const std::size_t limit = 50 * (S_ * T_ + n_) + 1000;
    std::size_t arc;
    while (find_entering(arc)) {
      pivot(arc);
      if (++pivots > limit) throw Error(ErrorCode::Infeasible, "transport simplex did not terminate");
    }
    return pivots;
  }

  double artificial_flow() const {
    double sum = 0.0;
    for (std::size_t a = S_ * T_; a < flow_.size(); ++a) sum += flow_[a];
    return sum;
  }

  double primal_cost() const {
    std::vector<double> terms;
    terms.reserve(S_ * T_);
    for (std::size_t a = 0; a < S_ * T_; ++a)
      if (flow_[a] != 0.0) terms.push_back(flow_[a] * cost_[a]);
    return pairwise_sum(terms);
  }

  // psi_t = potential of sink t; phi_s = min_t (c_st - psi_t) is then feasible.
  double dual_bound(std::span<const double> supply, std::span<const double> demand) const {
    std::vector<double> terms;
    terms.reserve(S_ + T_);
    for (std::size_t t = 0; t < T_; ++t) terms.push_back(demand[t] * potential_[S_ + t]);
    for (std::size_t s = 0; s < S_; ++s) {
      double phi = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < T_; ++t) phi = std::min(phi, cost_[s * T_ + t] - potential_[S_ + t]);
      terms.push_back(supply[s] * phi);
    }
    return pairwise_sum(terms);
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double reduced_cost(std::size_t a) const {
    const std::size_t s = a / T_, t = a % T_;
    return cost_[a] + potential_[s] - potential_[S_ + t];
  }

  bool find_entering(std::size_t& out) {
    const std::size_t m = S_ * T_;
    std::size_t scanned = 0;
    double best = -cost_tol_;
    std::size_t best_arc = kNone;
    std::size_t in_block = 0;
    while (scanned < m) {
      const std::size_t a = next_arc_;
      next_arc_ = next_arc_ + 1 == m ? 0 : next_arc_ + 1;
      ++scanned;
      const double rc = reduced_cost(a);
      if (rc < best) {
        best = rc;
        best_arc = a;
      }
      if (++in_block == block_) {
        if (best_arc != kNone) break;
        in_block = 0;
      }
    }
    out = best_arc;
    return best_arc != kNone;
  }

  void link(std::size_t v, std::size_t p) {
    parent_[v] = p;
    prev_sibling_[v] = kNone;
    next_sibling_[v] = first_child_[p];
    if (first_child_[p] != kNone) prev_sibling_[first_child_[p]] = v;
    first_child_[p] = v;
  }

  void unlink(std::size_t v) {
    const std::size_t p = parent_[v];
    if (prev_sibling_[v] != kNone)
      next_sibling_[prev_sibling_[v]] = next_sibling_[v];
    else
      first_child_[p] = next_sibling_[v];
    if (next_sibling_[v] != kNone) prev_sibling_[next_sibling_[v]] = prev_sibling_[v];
    parent_[v] = prev_sibling_[v] = next_sibling_[v] = kNone;
  }

  double arc_cost(std::size_t a) const {
    return a < S_ * T_ ? cost_[a] : big_m_;
  }

  void pivot(std::size_t entering) {
    const std::size_t u = entering / T_, v = S_ + entering % T_;

    std::size_t join_u = u, join_v = v;
    while (join_u != join_v) {
      if (depth_[join_u] > depth_[join_v]) {
        join_u = parent_[join_u];
      } else if (depth_[join_v] > depth_[join_u]) {
        join_v = parent_[join_v];
      } else {
        join_u = parent_[join_u];
        join_v = parent_[join_v];
      }
    }
    const std::size_t join = join_u;

    // The cycle runs join -> ... -> u -> v -> ... -> join. The leaving arc is
    // the last blocking arc in that order, which keeps the tree strongly feasible.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t leave = kNone;
    bool leave_on_u_side = false;
    for (std::size_t x = u; x != join; x = parent_[x]) {
      if (up_[x] && flow_[pred_[x]] < delta) {
        delta = flow_[pred_[x]];
        leave = x;
        leave_on_u_side = true;
      }
    }
    for (std::size_t x = v; x != join; x = parent_[x]) {
      if (!up_[x] && flow_[pred_[x]] <= delta) {
        delta = flow_[pred_[x]];
        leave = x;
        leave_on_u_side = false;
      }
    }

    for (std::size_t x = u; x != join; x = parent_[x]) flow_[pred_[x]] += up_[x] ? -delta : delta;
    for (std::size_t x = v; x != join; x = parent_[x]) flow_[pred_[x]] += up_[x] ? delta : -delta;
    flow_[entering] += delta;

    // Re-hang the stem from the entering arc's endpoint on the leaving side up
    // to the leaving node under the other endpoint.
    const std::size_t q = leave_on_u_side ? u : v;
    const std::size_t p = leave_on_u_side ? v : u;
    std::size_t new_parent = p, new_pred = entering;
    bool new_up = leave_on_u_side;  // entering arc runs u -> v
    std::size_t x = q;
    while (true) {
      const std::size_t old_parent = parent_[x], old_pred = pred_[x];
      const bool old_up = up_[x];
      unlink(x);
      link(x, new_parent);
      pred_[x] = new_pred;
      up_[x] = new_up;
      if (x == leave) break;
      new_parent = x;
      new_pred = old_pred;
      new_up = !old_up;
      x = old_parent;
    }
    refresh_subtree(q);
  }

  void refresh_subtree(std::size_t top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const std::size_t x = stack_.back();
      stack_.pop_back();
      const std::size_t p = parent_[x];
      const double c = arc_cost(pred_[x]);
      potential_[x] = up_[x] ? potential_[p] - c : potential_[p] + c;
      depth_[x] = depth_[p] + 1;
      for (std::size_t ch = first_child_[x]; ch != kNone; ch = next_sibling_[ch]) stack_.push_back(ch);
    }
  }

  std::size_t S_, T_, n_, root_;
  std::span<const double> cost_;
  double big_m_ = 0.0;
  double cost_tol_ = 0.0;
  std::vector<double> flow_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<bool> up_;
  std::vector<double> potential_;
  std::vector<std::size_t> first_child_, next_sibling_, prev_sibling_;
  std::vector<std::size_t> stack_;
  std::size_t next_arc_ = 0;
  std::size_t block_ = 10;
};

// Part of cell i within "depth" s of the line separating it from cell j.
Polygon strip(const SiteSet& sites, const PowerDiagram& diagram, std::size_t i, std::size_t j, double s) {
  const Point2 d = sites.points[j] - sites.points[i];
  const double level = sites.heights[i] - sites.heights[j];
  // cell i lies in { x . d <= level }; keep { x . d >= level - s }
  return clip(diagram.cells[i], HalfPlane{-d, -(level - s)}, diagram.eps);
}

double strip_depth_for_mass(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma, std::size_t i,
                            std::size_t j, double mu, int refine) {
  const Point2 d = sites.points[j] - sites.points[i];
  const double level = sites.heights[i] - sites.heights[j];
  double hi = 0.0;
  for (const Point2& x : diagram.cells[i].vertices) hi = std::max(hi, level - dot(x, d));
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(hi) + 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (quadrature_mass(strip(sites, diagram, i, j, mid), sigma, refine) < mu) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

int refine_for(const Density& sigma) { return sigma.is_grid() ? 3 : 0; }

}  // namespace

double quadrature(const Polygon& poly, const Density& sigma, const std::function<double(Point2)>& f, int refine) {
  if (poly.size() < 3) return 0.0;
  auto g = [&](Point2 x) { return f(x) * sigma(x); };
  std::vector<double> parts;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k)
    parts.push_back(triangle_rule(poly[0], poly[k], poly[k + 1], g, refine));
  return pairwise_sum(parts);
}

double quadrature_mass(const Polygon& poly, const Density& sigma, int refine) {
  return quadrature(poly, sigma, [](Point2) { return 1.0; }, refine);
}

McEstimate mc_cell_measures(const SiteSet& sites, const Polygon& domain, const Density& sigma, std::size_t n_samples,
                            std::uint64_t seed) {
  const std::size_t k = sites.size();
  const auto box = bounding_box(domain.vertices);
  const double omega_area = area(domain);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box[0].x, box[1].x), uy(box[0].y, box[1].y);
  std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
  std::size_t drawn = 0;
  while (drawn < n_samples) {
    const Point2 x{ux(rng), uy(rng)};
    if (!inside(domain, x)) continue;
    ++drawn;
    const double v = sigma(x);
    const std::size_t i = argmax_site(sites, x);
    sum[i] += v;
    sum_sq[i] += v * v;
  }
  McEstimate est;
  est.samples = n_samples;
  est.masses.resize(k);
  est.std_errors.resize(k);
  const double n = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < k; ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, sum_sq[i] / n - mean * mean);
    est.masses[i] = omega_area * mean;
    est.std_errors[i] = omega_area * std::sqrt(var / (n - 1.0));
  }
  return est;
}

McScalar mc_integrate(const Polygon& domain, const Density& sigma, const std::function<double(Point2)>& f,
                      std::size_t n_samples, std::uint64_t seed) {
  const auto box = bounding_box(domain.vertices);
  const double omega_area = area(domain);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box[0].x, box[1].x), uy(box[0].y, box[1].y);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t drawn = 0;
  while (drawn < n_samples) {
    const Point2 x{ux(rng), uy(rng)};
    if (!inside(domain, x)) continue;
    ++drawn;
    const double v = f(x) * sigma(x);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {omega_area * mean, omega_area * std::sqrt(var / (n - 1.0))};
}

GridDiscretization discretize(const Polygon& domain, const Density& sigma, int resolution, double total) {
  if (resolution < 1) throw Error(ErrorCode::InvalidInput, "resolution must be positive");
  const auto box = bounding_box(domain.vertices);
  const double hx = (box[1].x - box[0].x) / resolution, hy = (box[1].y - box[0].y) / resolution;
  const double eps = geometric_tolerance(domain);
  GridDiscretization g;
  g.resolution = resolution;
  std::vector<double> raw;
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Polygon square = make_box({box[0].x + i * hx, box[0].y + j * hy}, {box[0].x + (i + 1) * hx, box[0].y + (j + 1) * hy});
      Polygon piece = intersect(square, domain, eps);
      if (area(piece) <= 0.0) continue;
      const Point2 c = centroid(piece);
      const double m = sigma.is_grid() ? sigma(c) * area(piece) : quadrature_mass(piece, sigma);
      g.pieces.push_back(std::move(piece));
      g.atoms.push_back(c);
      raw.push_back(m);
    }
  }
  g.scale = total / pairwise_sum(raw);
  g.masses.resize(raw.size());
  for (std::size_t s = 0; s < raw.size(); ++s) g.masses[s] = raw[s] * g.scale;
  return g;
}

TransportResult transport_simplex(std::span<const double> supplies, std::span<const double> demands,
                                  std::span<const double> costs) {
  if (supplies.empty() || demands.empty()) throw Error(ErrorCode::InvalidInput, "empty transport problem");
  if (costs.size() != supplies.size() * demands.size()) throw Error(ErrorCode::InvalidInput, "cost matrix size mismatch");
  for (double m : supplies)
    if (!(m >= 0.0)) throw Error(ErrorCode::InvalidInput, "negative supply");
  for (double m : demands)
    if (!(m >= 0.0)) throw Error(ErrorCode::InvalidInput, "negative demand");
  const double s_total = pairwise_sum(supplies), d_total = pairwise_sum(demands);
  if (std::abs(s_total - d_total) > 1e-10 * std::max(s_total, d_total))
    throw Error(ErrorCode::Infeasible, "supplies and demands do not balance");

  // Balance exactly so that the artificial arcs can drain to zero.
  std::vector<double> demand(demands.begin(), demands.end());
  for (double& d : demand) d *= s_total / d_total;

  NetworkSimplex ns(supplies, demand, costs);
  TransportResult r;
  r.pivots = ns.run();
  if (ns.artificial_flow() > 1e-9 * s_total) throw Error(ErrorCode::Infeasible, "transport problem is infeasible");
  r.cost = ns.primal_cost();
  r.dual_bound = ns.dual_bound(supplies, demand);
  return r;
}

TransportResult lp_transport_cost(const GridDiscretization& grid, std::span<const Point2> sites,
                                  std::span<const double> targets) {
  if (sites.size() != targets.size()) throw Error(ErrorCode::InvalidInput, "one target per site");
  const std::size_t S = grid.atoms.size(), T = sites.size();
  std::vector<double> cost(S * T);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t t = 0; t < T; ++t) cost[s * T + t] = squared_norm(grid.atoms[s] - sites[t]);
  return transport_simplex(grid.masses, targets, cost);
}

double induced_plan_cost(const GridDiscretization& grid, const PowerDiagram& diagram, std::span<const Point2> sites,
                         const Density& sigma) {
  std::vector<std::array<Point2, 2>> cell_boxes;
  for (const Polygon& c : diagram.cells)
    cell_boxes.push_back(c.empty() ? std::array<Point2, 2>{} : bounding_box(c.vertices));
  std::vector<double> terms;
  for (std::size_t s = 0; s < grid.pieces.size(); ++s) {
    const Polygon& piece = grid.pieces[s];
    const auto pb = bounding_box(piece.vertices);
    for (std::size_t i = 0; i < diagram.cells.size(); ++i) {
      if (diagram.cells[i].empty()) continue;
      const auto& cb = cell_boxes[i];
      if (cb[1].x < pb[0].x || cb[0].x > pb[1].x || cb[1].y < pb[0].y || cb[0].y > pb[1].y) continue;
      const Polygon part = intersect(piece, diagram.cells[i], diagram.eps);
      if (area(part) <= 0.0) continue;
      const double m = sigma.is_grid() ? sigma(grid.atoms[s]) * area(part) : quadrature_mass(part, sigma);
      terms.push_back(grid.scale * m * squared_norm(grid.atoms[s] - sites[i]));
    }
  }
  return pairwise_sum(terms);
}

double labeling_cost(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma) {
  std::vector<double> terms;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Point2 p = sites.points[i];
    terms.push_back(quadrature(diagram.cells[i], sigma, [p](Point2 x) { return squared_norm(x - p); }, refine_for(sigma)));
  }
  return pairwise_sum(terms);
}

double swap_cost_delta(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma, std::size_t i,
                       std::size_t j, double mu) {
  const int refine = refine_for(sigma);
  const double si = strip_depth_for_mass(sites, diagram, sigma, i, j, mu, refine);
  const double sj = strip_depth_for_mass(sites, diagram, sigma, j, i, mu, refine);
  const Point2 pi = sites.points[i], pj = sites.points[j];
  // |x - p_j|^2 - |x - p_i|^2 on the strip leaving i, and the reverse on the strip leaving j
  auto to_j = [&](Point2 x) { return squared_norm(x - pj) - squared_norm(x - pi); };
  auto to_i = [&](Point2 x) { return squared_norm(x - pi) - squared_norm(x - pj); };
  return quadrature(strip(sites, diagram, i, j, si), sigma, to_j, refine) +
         quadrature(strip(sites, diagram, j, i, sj), sigma, to_i, refine);
}

PartitionCheck random_partition_cost_check(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma,
                                           std::span<const double> targets, int n_trials, std::uint64_t seed,
                                           double mass_tol) {
  PartitionCheck out;
  const int refine = refine_for(sigma);
  std::vector<double> masses(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) masses[i] = quadrature_mass(diagram.cells[i], sigma, refine);
  const double total = pairwise_sum(masses);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (std::abs(masses[i] - targets[i]) > mass_tol * total) {
      out.skipped = true;
      return out;
    }
  }
  out.cost = labeling_cost(sites, diagram, sigma);
  if (diagram.edges.empty()) {
    out.passed = true;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, diagram.edges.size() - 1);
  std::uniform_real_distribution<double> frac(0.05, 0.5);
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_trials; ++t) {
    const DiagramEdge& e = diagram.edges[pick(rng)];
    const double mu = frac(rng) * std::min(masses[e.i], masses[e.j]);
    out.min_gap = std::min(out.min_gap, swap_cost_delta(sites, diagram, sigma, e.i, e.j, mu));
    ++out.trials;
  }
  out.passed = out.min_gap >= -1e-12 * std::max(out.cost, 1e-300);
  return out;
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y[i] = x[i] + step;
    const double fp = f(y);
    y[i] = x[i] - step;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

FdReport fd_check_gradient(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& gradient, double step,
                           double floor) {
  const Eigen::VectorXd fd = fd_gradient(f, x, step);
  FdReport r;
  r.checked = static_cast<std::size_t>(x.size());
  r.max_abs_error = (fd - gradient).cwiseAbs().maxCoeff();
  r.max_rel_error = r.max_abs_error / std::max(gradient.cwiseAbs().maxCoeff(), floor);
  return r;
}

FdReport fd_check_jacobian(const VectorFn& F, const Eigen::VectorXd& x, const Eigen::MatrixXd& jacobian, double step,
                           double floor) {
  FdReport r;
  Eigen::VectorXd y = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    y[j] = x[j] + step;
    const Eigen::VectorXd fp = F(y);
    y[j] = x[j] - step;
    const Eigen::VectorXd fm = F(y);
    y[j] = x[j];
    const Eigen::VectorXd col = (fp - fm) / (2.0 * step);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double err = std::abs(col[i] - jacobian(i, j));
      r.max_abs_error = std::max(r.max_abs_error, err);
      if (std::abs(jacobian(i, j)) > floor) {
        r.max_rel_error = std::max(r.max_rel_error, err / std::abs(jacobian(i, j)));
        ++r.checked;
      }
    }
  }
  return r;
}

}  // namespace alexot::oracle
