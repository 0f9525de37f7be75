#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "alexot/geometry.hpp"
#include "alexot/power_diagram.hpp"

namespace alexot {

struct UniformDensity {
  double c = 1.0;
};

/// sigma(x, y) = a x + b y + c
struct AffineDensity {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
};

/// Bilinear interpolation of node values on a regular nx-by-ny node grid
/// spanning [x0, x1] x [y0, y1]. values are row-major: values[j * nx + i] is
/// the node at (x0 + i dx, y0 + j dy).
struct GridDensity {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
  std::vector<double> values;

  double dx() const { return (x1 - x0) / (nx - 1); }
  double dy() const { return (y1 - y0) / (ny - 1); }
  double node(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

class Density {
 public:
  using Kind = std::variant<UniformDensity, AffineDensity, GridDensity>;

  Density() = default;
  Density(UniformDensity d) : kind_(d) {}
  Density(AffineDensity d) : kind_(d) {}
  Density(GridDensity d);

  static Density uniform(double c = 1.0) { return Density(UniformDensity{c}); }
  static Density affine(double a, double b, double c) { return Density(AffineDensity{a, b, c}); }

  const Kind& kind() const { return kind_; }
  bool is_grid() const { return std::holds_alternative<GridDensity>(kind_); }

  double operator()(Point2 x) const;

  /// Throws NonPositiveDensity unless sigma > 0 on the domain (checked at the
  /// domain vertices and, for grids, at every node). Grids must also cover
  /// the domain.
  void validate_on(const Polygon& domain) const;

  /// Upper bound of sigma over the domain; attained for uniform and affine
  /// densities, the largest node value for grids.
  double max_on(const Polygon& domain) const;

 private:
  Kind kind_ = UniformDensity{};
};

/// Reads the grid density JSON {nx, ny, x0, y0, x1, y1, values}.
GridDensity parse_grid_density(const std::string& json_text);
GridDensity load_grid_density(const std::string& path);
std::string grid_density_to_json(const GridDensity& grid);

/// Polynomial sum c[a][b] (x - origin.x)^a (y - origin.y)^b with a + b <= 2.
struct LocalPolynomial {
  Point2 origin;
  std::array<std::array<double, 3>, 3> c{};

  static LocalPolynomial constant(double v) {
    LocalPolynomial p;
    p.c[0][0] = v;
    return p;
  }
};

/// Exact integral of f * sigma over a convex polygon. Uniform and affine
/// densities reduce to polygon moments; grid densities are split along grid
/// lines, where sigma is a polynomial on each piece.
double integrate(const Polygon& poly, const Density& sigma, const LocalPolynomial& f);

double total_mass(const Polygon& domain, const Density& sigma);

struct MeasureVector {
  std::vector<double> masses;
  double total = 0.0;

  std::size_t size() const { return masses.size(); }
  double min() const;
};

MeasureVector cell_measures(const PowerDiagram& diagram, const Density& sigma);

/// Line integral of sigma along the segment [a, b].
double edge_integral(Point2 a, Point2 b, const Density& sigma);

/// sum_i integral over cell_i of (x . p_i + h_i) sigma dx, i.e. the integral
/// of the potential u over the domain.
double linear_part_integral(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma);

/// sum_i integral over cell_i of |x - p_i|^2 sigma dx: the quadratic cost of
/// sending every cell to its site.
double quadratic_cost(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace alexot
