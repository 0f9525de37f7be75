#include "alexot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alexot/error.hpp"
#include "alexot/parallel.hpp"

namespace alexot {

namespace {

constexpr int kDeg = kMaxMomentDegree;
using Coeffs = std::array<std::array<double, kDeg + 1>, kDeg + 1>;

Coeffs to_coeffs(const LocalPolynomial& f) {
  Coeffs out{};
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b) out[a][b] = f.c[a][b];
  return out;
}

Coeffs multiply(const Coeffs& p, const Coeffs& q, int degree) {
  Coeffs r{};
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      if (p[a][b] == 0.0) continue;
      for (int c = 0; a + c <= degree; ++c)
        for (int d = 0; a + b + c + d <= degree; ++d) r[a + c][b + d] += p[a][b] * q[c][d];
    }
  return r;
}

double contract(const Coeffs& f, const MomentTable& m) {
  double s = 0.0;
  for (int a = 0; a <= m.degree(); ++a)
    for (int b = 0; a + b <= m.degree(); ++b) s += f[a][b] * m(a, b);
  return s;
}

int degree_of(const Coeffs& f) {
  int d = 0;
  for (int a = 0; a <= kDeg; ++a)
    for (int b = 0; a + b <= kDeg; ++b)
      if (f[a][b] != 0.0) d = std::max(d, a + b);
  return d;
}

// Re-expands f about a new origin: X = X' + s where s = new_origin - origin.
LocalPolynomial shift(const LocalPolynomial& f, Point2 new_origin) {
  const Point2 s = new_origin - f.origin;
  LocalPolynomial g;
  g.origin = new_origin;
  const double binom[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b) {
      const double c = f.c[a][b];
      if (c == 0.0) continue;
      for (int i = 0; i <= a; ++i)
        for (int j = 0; j <= b; ++j)
          g.c[i][j] += c * binom[a][i] * binom[b][j] * std::pow(s.x, a - i) * std::pow(s.y, b - j);
    }
  return g;
}

double integrate_polynomial_density(const Polygon& poly, const Coeffs& sigma_local, const LocalPolynomial& f) {
  const Coeffs product = multiply(to_coeffs(f), sigma_local, kDeg);
  return contract(product, moments(poly, degree_of(product), f.origin));
}

double integrate_grid(const Polygon& poly, const GridDensity& g, const LocalPolynomial& f) {
  const auto [lo, hi] = bounding_box(poly.vertices);
  const double dx = g.dx();
  const double dy = g.dy();
  auto cell_index = [](double v, double v0, double d, int n) {
    return std::clamp(static_cast<int>(std::floor((v - v0) / d)), 0, n - 2);
  };
  const int i0 = cell_index(lo.x, g.x0, dx, g.nx), i1 = cell_index(hi.x, g.x0, dx, g.nx);
  const int j0 = cell_index(lo.y, g.y0, dy, g.ny), j1 = cell_index(hi.y, g.y0, dy, g.ny);
  const double eps = 1e-14 * std::max(diameter(poly), 1.0);

  double total = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const double ys = g.y0 + j * dy;
    // Rows and columns at the grid edge extend to cover anything just outside the box.
    const double ylo = j == 0 ? -std::numeric_limits<double>::infinity() : ys;
    const double yhi = j == g.ny - 2 ? std::numeric_limits<double>::infinity() : ys + dy;
    Polygon row = poly;
    if (std::isfinite(ylo)) row = clip(row, HalfPlane{{0.0, -1.0}, -ylo}, eps);
    if (std::isfinite(yhi)) row = clip(row, HalfPlane{{0.0, 1.0}, yhi}, eps);
    if (row.empty()) continue;
    for (int i = i0; i <= i1; ++i) {
      const double xs = g.x0 + i * dx;
      const double xlo = i == 0 ? -std::numeric_limits<double>::infinity() : xs;
      const double xhi = i == g.nx - 2 ? std::numeric_limits<double>::infinity() : xs + dx;
      Polygon piece = row;
      if (std::isfinite(xlo)) piece = clip(piece, HalfPlane{{-1.0, 0.0}, -xlo}, eps);
      if (std::isfinite(xhi)) piece = clip(piece, HalfPlane{{1.0, 0.0}, xhi}, eps);
      if (piece.empty()) continue;
      // On this square sigma = alpha + beta u + gamma v + delta u v with
      // u = X / dx, v = Y / dy about the square's lower-left node.
      const double s00 = g.node(i, j), s10 = g.node(i + 1, j);
      const double s01 = g.node(i, j + 1), s11 = g.node(i + 1, j + 1);
      Coeffs sigma_local{};
      sigma_local[0][0] = s00;
      sigma_local[1][0] = (s10 - s00) / dx;
      sigma_local[0][1] = (s01 - s00) / dy;
      sigma_local[1][1] = (s11 - s10 - s01 + s00) / (dx * dy);
      total += integrate_polynomial_density(piece, sigma_local, shift(f, {xs, ys}));
    }
  }
  return total;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Density::Density(GridDensity d) : kind_(std::move(d)) {}

double Density::operator()(Point2 x) const {
  return std::visit(overloaded{
                        [](const UniformDensity& d) { return d.c; },
                        [&](const AffineDensity& d) { return d.a * x.x + d.b * x.y + d.c; },
                        [&](const GridDensity& g) {
                          const double dx = g.dx(), dy = g.dy();
                          const double cx = std::clamp(x.x, g.x0, g.x1);
                          const double cy = std::clamp(x.y, g.y0, g.y1);
                          const int i = std::clamp(static_cast<int>(std::floor((cx - g.x0) / dx)), 0, g.nx - 2);
                          const int j = std::clamp(static_cast<int>(std::floor((cy - g.y0) / dy)), 0, g.ny - 2);
                          const double u = (cx - (g.x0 + i * dx)) / dx;
                          const double v = (cy - (g.y0 + j * dy)) / dy;
                          return (1 - u) * (1 - v) * g.node(i, j) + u * (1 - v) * g.node(i + 1, j) +
                                 (1 - u) * v * g.node(i, j + 1) + u * v * g.node(i + 1, j + 1);
                        },
                    },
                    kind_);
}

void Density::validate_on(const Polygon& domain) const {
  std::visit(overloaded{
                 [](const UniformDensity& d) {
                   if (!(d.c > 0.0) || !std::isfinite(d.c))
                     throw Error(ErrorCode::NonPositiveDensity, "uniform density must be positive");
                 },
                 [&](const AffineDensity& d) {
                   if (!std::isfinite(d.a) || !std::isfinite(d.b) || !std::isfinite(d.c))
                     throw Error(ErrorCode::InvalidInput, "affine density coefficients must be finite");
                   for (const Point2& v : domain.vertices)
                     if (!(d.a * v.x + d.b * v.y + d.c > 0.0))
                       throw Error(ErrorCode::NonPositiveDensity, "affine density is not positive on the domain");
                 },
                 [&](const GridDensity& g) {
                   if (g.nx < 2 || g.ny < 2 || !(g.x1 > g.x0) || !(g.y1 > g.y0))
                     throw Error(ErrorCode::InvalidInput, "grid density needs nx, ny >= 2 and a nondegenerate box");
                   if (g.values.size() != static_cast<std::size_t>(g.nx) * g.ny)
                     throw Error(ErrorCode::InvalidInput, "grid density has the wrong number of values");
                   for (double v : g.values)
                     if (!std::isfinite(v) || !(v > 0.0))
                       throw Error(ErrorCode::NonPositiveDensity, "grid density values must be finite and positive");
                   const double eps = geometric_tolerance(domain);
                   for (const Point2& v : domain.vertices)
                     if (v.x < g.x0 - eps || v.x > g.x1 + eps || v.y < g.y0 - eps || v.y > g.y1 + eps)
                       throw Error(ErrorCode::InvalidInput, "grid density does not cover the domain");
                 },
             },
             kind_);
}

double Density::max_on(const Polygon& domain) const {
  return std::visit(overloaded{
                        [](const UniformDensity& d) { return d.c; },
                        [&](const AffineDensity& d) {
                          double m = -std::numeric_limits<double>::infinity();
                          for (const Point2& v : domain.vertices) m = std::max(m, d.a * v.x + d.b * v.y + d.c);
                          return m;
                        },
                        [](const GridDensity& g) { return *std::max_element(g.values.begin(), g.values.end()); },
                    },
                    kind_);
}

GridDensity parse_grid_density(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("grid density JSON: ") + e.what());
  }
  GridDensity g;
  try {
    g.nx = j.at("nx").get<int>();
    g.ny = j.at("ny").get<int>();
    g.x0 = j.at("x0").get<double>();
    g.y0 = j.at("y0").get<double>();
    g.x1 = j.at("x1").get<double>();
    g.y1 = j.at("y1").get<double>();
    g.values = j.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("grid density JSON: ") + e.what());
  }
  if (g.nx < 2 || g.ny < 2 || g.values.size() != static_cast<std::size_t>(g.nx) * g.ny)
    throw Error(ErrorCode::InvalidInput, "grid density JSON: values must hold nx * ny entries with nx, ny >= 2");
  for (double v : g.values)
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "grid density JSON: values must be positive");
  return g;
}

GridDensity load_grid_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open grid density file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid_density(ss.str());
}

std::string grid_density_to_json(const GridDensity& g) {
  nlohmann::json j{{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0},
                   {"x1", g.x1}, {"y1", g.y1}, {"values", g.values}};
  return j.dump();
}

double integrate(const Polygon& poly, const Density& sigma, const LocalPolynomial& f) {
  if (poly.size() < 3) return 0.0;
  return std::visit(overloaded{
                        [&](const UniformDensity& d) {
                          Coeffs s{};
                          s[0][0] = d.c;
                          return integrate_polynomial_density(poly, s, f);
                        },
                        [&](const AffineDensity& d) {
                          Coeffs s{};
                          s[0][0] = d.a * f.origin.x + d.b * f.origin.y + d.c;
                          s[1][0] = d.a;
                          s[0][1] = d.b;
                          return integrate_polynomial_density(poly, s, f);
                        },
                        [&](const GridDensity& g) { return integrate_grid(poly, g, f); },
                    },
                    sigma.kind());
}

double total_mass(const Polygon& domain, const Density& sigma) {
  LocalPolynomial one = LocalPolynomial::constant(1.0);
  if (!domain.empty()) one.origin = domain.vertices.front();
  return integrate(domain, sigma, one);
}

double MeasureVector::min() const {
  return masses.empty() ? 0.0 : *std::min_element(masses.begin(), masses.end());
}

MeasureVector cell_measures(const PowerDiagram& diagram, const Density& sigma) {
  MeasureVector out;
  out.masses.assign(diagram.size(), 0.0);
  parallel_for(diagram.size(), [&](std::size_t i) {
    const Polygon& cell = diagram.cells[i];
    if (cell.empty()) return;
    LocalPolynomial one = LocalPolynomial::constant(1.0);
    one.origin = cell.vertices.front();
    out.masses[i] = integrate(cell, sigma, one);
  });
  out.total = pairwise_sum(out.masses);
  return out;
}

double edge_integral(Point2 a, Point2 b, const Density& sigma) {
  const double length = distance(a, b);
  if (length == 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const UniformDensity& d) { return d.c * length; },
                        [&](const AffineDensity&) { return length * sigma(0.5 * (a + b)); },
                        [&](const GridDensity& g) {
                          // sigma restricted to the segment is quadratic between
                          // grid-line crossings, so Simpson is exact per piece.
                          std::vector<double> ts{0.0, 1.0};
                          const Point2 d = b - a;
                          auto add_crossings = [&](double start, double delta, double origin, double step, int n) {
                            if (delta == 0.0) return;
                            for (int i = 1; i < n - 1; ++i) {
                              const double t = (origin + i * step - start) / delta;
                              if (t > 0.0 && t < 1.0) ts.push_back(t);
                            }
                          };
                          add_crossings(a.x, d.x, g.x0, g.dx(), g.nx);
                          add_crossings(a.y, d.y, g.y0, g.dy(), g.ny);
                          std::sort(ts.begin(), ts.end());
                          double s = 0.0;
                          for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
                            const double t0 = ts[k], t1 = ts[k + 1];
                            if (t1 <= t0) continue;
                            const double f0 = sigma(a + t0 * d);
                            const double fm = sigma(a + 0.5 * (t0 + t1) * d);
                            const double f1 = sigma(a + t1 * d);
                            s += (t1 - t0) * (f0 + 4.0 * fm + f1) / 6.0;
                          }
                          return length * s;
                        },
                    },
                    sigma.kind());
}

double linear_part_integral(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma) {
  std::vector<double> parts(diagram.size(), 0.0);
  parallel_for(diagram.size(), [&](std::size_t i) {
    const Polygon& cell = diagram.cells[i];
    if (cell.empty()) return;
    LocalPolynomial f;
    f.origin = cell.vertices.front();
    f.c[0][0] = sites.affine(i, f.origin);
    f.c[1][0] = sites.points[i].x;
    f.c[0][1] = sites.points[i].y;
    parts[i] = integrate(cell, sigma, f);
  });
  return pairwise_sum(parts);
}

double quadratic_cost(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma) {
  std::vector<double> parts(diagram.size(), 0.0);
  parallel_for(diagram.size(), [&](std::size_t i) {
    const Polygon& cell = diagram.cells[i];
    if (cell.empty()) return;
    LocalPolynomial f;
    f.origin = sites.points[i];
    f.c[2][0] = 1.0;
    f.c[0][2] = 1.0;
    parts[i] = integrate(cell, sigma, f);
  });
  return pairwise_sum(parts);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace alexot
