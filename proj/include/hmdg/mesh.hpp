#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmdg/quadrature.hpp"

namespace hmdg {

using Index = Eigen::Index;

/// One cell's view of a facet. The cell's outward normal on the facet is
/// `sign * facet.normal`.
struct FacetSide {
  Index cell = -1;
  int local_facet = -1;
  int sign = 0;
};

struct Facet {
  /// Global orientation: vertices[0] < vertices[1]; the facet parameter
  /// s in [-1, 1] runs from vertices[0] to vertices[1].
  std::array<Index, 2> vertices{};
  std::array<FacetSide, 2> sides{};
  int num_sides = 0;
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
  double length = 0.0;
  /// 0 for interior facets; >= 1 on the boundary (1..4 = bottom, right, top,
  /// left for structured rectangles, 1 for loaded meshes).
  int boundary_marker = 0;

  bool is_boundary() const { return num_sides == 1; }
};

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rectangle {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

/// Facet quadrature: physical points, weights summing to the facet length and
/// the Legendre parameter s in [-1, 1] of each point.
struct FacetQuadrature {
  Eigen::Matrix2Xd points;
  Eigen::VectorXd weights;
  Eigen::VectorXd params;

  Eigen::Index size() const { return weights.size(); }
};

/// Conforming triangulation of a polygonal domain with a deduplicated facet
/// table. Immutable after construction.
///
/// Local facet i of a cell is the edge opposite local vertex i, i.e. the edge
/// (v[i+1], v[i+2]). Cells are stored counterclockwise.
class Mesh {
 public:
  /// Builds the facet table from raw connectivity. Clockwise cells are
  /// reoriented and reported through `warnings` (if non-null).
  /// Throws TopologyError for missing vertices, degenerate cells, facets shared
  /// by more than two cells and hanging nodes on the boundary.
  static Mesh from_connectivity(Eigen::Matrix2Xd vertices, std::vector<std::array<Index, 3>> cells,
                                std::vector<std::string>* warnings = nullptr);

  Index num_vertices() const { return vertices_.cols(); }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  Index num_facets() const { return static_cast<Index>(facets_.size()); }

  const Eigen::Matrix2Xd& vertices() const { return vertices_; }
  Eigen::Vector2d vertex(Index v) const { return vertices_.col(v); }
  const std::array<Index, 3>& cell(Index c) const { return cells_[static_cast<std::size_t>(c)]; }
  const std::vector<std::array<Index, 3>>& cells() const { return cells_; }
  const Facet& facet(Index f) const { return facets_[static_cast<std::size_t>(f)]; }
  const std::vector<Facet>& facets() const { return facets_; }
  /// Global facet index of local facet `i` of cell `c`.
  Index cell_facet(Index c, int i) const { return cell_facets_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]; }
  /// Outward-normal sign of local facet `i` of cell `c` relative to the facet normal.
  int cell_facet_sign(Index c, int i) const { return cell_signs_[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]; }
  /// The side record of facet `f` that belongs to cell `c`.
  const FacetSide& side_of(Index f, Index c) const;

  double cell_area(Index c) const { return areas_[static_cast<std::size_t>(c)]; }
  Eigen::Vector2d cell_centroid(Index c) const;
  /// Longest edge of the cell.
  double cell_diameter(Index c) const { return diameters_[static_cast<std::size_t>(c)]; }
  /// Jacobian of the affine map from the reference triangle.
  Eigen::Matrix2d cell_jacobian(Index c) const;
  /// h = max facet length.
  double h() const { return h_; }
  double total_area() const;
  /// Smallest interior angle over all cells, in degrees.
  double min_angle_degrees() const;

  /// Physical-cell quadrature exact to `degree`; weights sum to the cell area.
  QuadratureRule cell_quadrature(Index c, int degree) const;

 private:
  friend Mesh build_structured_mesh(int nx, const Rectangle& domain);
  Mesh() = default;

  Eigen::Matrix2Xd vertices_;
  std::vector<std::array<Index, 3>> cells_;
  std::vector<Facet> facets_;
  std::vector<std::array<Index, 3>> cell_facets_;
  std::vector<std::array<int, 3>> cell_signs_;
  std::vector<double> areas_;
  std::vector<double> diameters_;
  double h_ = 0.0;
};

/// nx x nx grid of `domain` with every square split along its (x_min, y_min)
/// to (x_max, y_max) diagonal: 2 nx^2 triangles. Throws InvalidArgument for nx = 0.
Mesh build_structured_mesh(int nx, const Rectangle& domain = {});

/// Reads the text format
///   vertices N / cells M
///   x y            (N lines)
///   i j k          (M lines, 0-based)
/// Throws ParseError (with line number) or TopologyError.
Mesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
Mesh read_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Gauss-Legendre rule on facet `f` exact to `order` (order >= 1).
FacetQuadrature facet_quadrature(const Mesh& mesh, Index f, int order);

}  // namespace hmdg
