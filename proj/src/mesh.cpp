#include "hmdg/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "hmdg/errors.hpp"

namespace hmdg {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ac = c - a;
  return 0.5 * (ab.x() * ac.y() - ab.y() * ac.x());
}

bool point_inside_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d t = b - a;
  const double len2 = t.squaredNorm();
  const double s = (p - a).dot(t) / len2;
  if (s <= 1e-10 || s >= 1.0 - 1e-10) return false;
  const Eigen::Vector2d d = p - (a + s * t);
  return d.norm() <= 1e-10 * std::sqrt(len2);
}

}  // namespace

Mesh Mesh::from_connectivity(Eigen::Matrix2Xd vertices, std::vector<std::array<Index, 3>> cells,
                             std::vector<std::string>* warnings) {
  Mesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.cells_ = std::move(cells);
  const Index nv = mesh.vertices_.cols();

  double scale = 0.0;
  for (Index v = 0; v < nv; ++v) scale = std::max(scale, mesh.vertices_.col(v).cwiseAbs().maxCoeff());
  scale = std::max(scale, 1.0);

  for (std::size_t c = 0; c < mesh.cells_.size(); ++c) {
    auto& cell = mesh.cells_[c];
    for (Index v : cell) {
      if (v < 0 || v >= nv) {
        throw TopologyError("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
      }
    }
    if (cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2]) {
      throw TopologyError("cell " + std::to_string(c) + " repeats a vertex");
    }
    const double area = signed_area(mesh.vertices_.col(cell[0]), mesh.vertices_.col(cell[1]),
                                    mesh.vertices_.col(cell[2]));
    if (std::abs(area) <= 1e-14 * scale * scale) {
      throw TopologyError("cell " + std::to_string(c) + " is degenerate");
    }
    if (area < 0.0) {
      std::swap(cell[1], cell[2]);
      if (warnings) warnings->push_back("cell " + std::to_string(c) + " was clockwise; reoriented");
    }
  }

  std::map<std::pair<Index, Index>, Index> facet_ids;
  mesh.cell_facets_.resize(mesh.cells_.size());
  mesh.cell_signs_.resize(mesh.cells_.size());
  mesh.areas_.resize(mesh.cells_.size());
  mesh.diameters_.resize(mesh.cells_.size());
  for (std::size_t c = 0; c < mesh.cells_.size(); ++c) {
    const auto& cell = mesh.cells_[c];
    mesh.areas_[c] = signed_area(mesh.vertices_.col(cell[0]), mesh.vertices_.col(cell[1]),
                                 mesh.vertices_.col(cell[2]));
    double diameter = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Index p = cell[static_cast<std::size_t>((i + 1) % 3)];
      const Index q = cell[static_cast<std::size_t>((i + 2) % 3)];
      const auto key = std::minmax(p, q);
      auto [it, inserted] = facet_ids.try_emplace({key.first, key.second}, static_cast<Index>(mesh.facets_.size()));
      if (inserted) {
        Facet facet;
        facet.vertices = {key.first, key.second};
        const Eigen::Vector2d t = mesh.vertices_.col(key.second) - mesh.vertices_.col(key.first);
        facet.length = t.norm();
        facet.normal = Eigen::Vector2d(t.y(), -t.x()) / facet.length;
        mesh.facets_.push_back(facet);
      }
      Facet& facet = mesh.facets_[static_cast<std::size_t>(it->second)];
      if (facet.num_sides == 2) {
        throw TopologyError("facet (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                            ") is shared by more than two cells");
      }
      // Counterclockwise traversal p -> q has its outward normal on the right.
      const int sign = (p == facet.vertices[0]) ? 1 : -1;
      facet.sides[static_cast<std::size_t>(facet.num_sides++)] = FacetSide{static_cast<Index>(c), i, sign};
      mesh.cell_facets_[c][static_cast<std::size_t>(i)] = it->second;
      mesh.cell_signs_[c][static_cast<std::size_t>(i)] = sign;
      diameter = std::max(diameter, facet.length);
    }
    mesh.diameters_[c] = diameter;
  }

  std::vector<Index> boundary_vertices;
  for (auto& facet : mesh.facets_) {
    mesh.h_ = std::max(mesh.h_, facet.length);
    if (facet.num_sides == 1) {
      facet.boundary_marker = 1;
      boundary_vertices.push_back(facet.vertices[0]);
      boundary_vertices.push_back(facet.vertices[1]);
    }
  }
  std::sort(boundary_vertices.begin(), boundary_vertices.end());
  boundary_vertices.erase(std::unique(boundary_vertices.begin(), boundary_vertices.end()), boundary_vertices.end());
  // A hanging node shows up as a boundary vertex lying inside a boundary facet.
  for (const auto& facet : mesh.facets_) {
    if (facet.num_sides != 1) continue;
    const Eigen::Vector2d a = mesh.vertices_.col(facet.vertices[0]);
    const Eigen::Vector2d b = mesh.vertices_.col(facet.vertices[1]);
    for (Index v : boundary_vertices) {
      if (v == facet.vertices[0] || v == facet.vertices[1]) continue;
      if (point_inside_segment(mesh.vertices_.col(v), a, b)) {
        throw TopologyError("non-conforming connectivity: vertex " + std::to_string(v) + " hangs on facet (" +
                            std::to_string(facet.vertices[0]) + ", " + std::to_string(facet.vertices[1]) + ")");
      }
    }
  }
  return mesh;
}

const FacetSide& Mesh::side_of(Index f, Index c) const {
  const Facet& fc = facet(f);
  for (int s = 0; s < fc.num_sides; ++s) {
    if (fc.sides[static_cast<std::size_t>(s)].cell == c) return fc.sides[static_cast<std::size_t>(s)];
  }
  throw InvalidArgument("facet " + std::to_string(f) + " is not adjacent to cell " + std::to_string(c));
}

Eigen::Vector2d Mesh::cell_centroid(Index c) const {
  const auto& v = cell(c);
  return (vertices_.col(v[0]) + vertices_.col(v[1]) + vertices_.col(v[2])) / 3.0;
}

Eigen::Matrix2d Mesh::cell_jacobian(Index c) const {
  const auto& v = cell(c);
  Eigen::Matrix2d J;
  J.col(0) = vertices_.col(v[1]) - vertices_.col(v[0]);
  J.col(1) = vertices_.col(v[2]) - vertices_.col(v[0]);
  return J;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (double x : areas_) a += x;
  return a;
}

double Mesh::min_angle_degrees() const {
  double min_angle = 180.0;
  for (const auto& cell : cells_) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d p = vertices_.col(cell[static_cast<std::size_t>(i)]);
      const Eigen::Vector2d a = vertices_.col(cell[static_cast<std::size_t>((i + 1) % 3)]) - p;
      const Eigen::Vector2d b = vertices_.col(cell[static_cast<std::size_t>((i + 2) % 3)]) - p;
      const double angle = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
      min_angle = std::min(min_angle, angle * 180.0 / std::numbers::pi);
    }
  }
  return min_angle;
}

QuadratureRule Mesh::cell_quadrature(Index c, int degree) const {
  const QuadratureRule& ref = reference_triangle_rule(degree);
  const Eigen::Matrix2d J = cell_jacobian(c);
  const Eigen::Vector2d origin = vertices_.col(cell(c)[0]);
  QuadratureRule rule;
  rule.points = (J * ref.points).colwise() + origin;
  rule.weights = ref.weights * (2.0 * cell_area(c));
  return rule;
}

Mesh build_structured_mesh(int nx, const Rectangle& domain) {
  if (nx < 1) throw InvalidArgument("build_structured_mesh: nx must be >= 1");
  if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min)) {
    throw InvalidArgument("build_structured_mesh: empty domain");
  }
  const Index n1 = nx + 1;
  Eigen::Matrix2Xd vertices(2, n1 * n1);
  for (Index j = 0; j < n1; ++j) {
    for (Index i = 0; i < n1; ++i) {
      vertices(0, j * n1 + i) = domain.x_min + (domain.x_max - domain.x_min) * static_cast<double>(i) / nx;
      vertices(1, j * n1 + i) = domain.y_min + (domain.y_max - domain.y_min) * static_cast<double>(j) / nx;
    }
  }
  std::vector<std::array<Index, 3>> cells;
  cells.reserve(static_cast<std::size_t>(2 * nx * nx));
  for (Index j = 0; j < nx; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index v00 = j * n1 + i;
      const Index v10 = v00 + 1;
      const Index v01 = v00 + n1;
      const Index v11 = v01 + 1;
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  Mesh mesh = Mesh::from_connectivity(std::move(vertices), std::move(cells));
  const double tol = 1e-12 * std::max(domain.x_max - domain.x_min, domain.y_max - domain.y_min);
  for (auto& facet : mesh.facets_) {
    if (!facet.is_boundary()) continue;
    const Eigen::Vector2d mid = 0.5 * (mesh.vertices_.col(facet.vertices[0]) + mesh.vertices_.col(facet.vertices[1]));
    if (std::abs(mid.y() - domain.y_min) < tol) facet.boundary_marker = 1;
    else if (std::abs(mid.x() - domain.x_max) < tol) facet.boundary_marker = 2;
    else if (std::abs(mid.y() - domain.y_max) < tol) facet.boundary_marker = 3;
    else facet.boundary_marker = 4;
  }
  return mesh;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line) {
  T value{};
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("expected a number, got '" + std::string(token) + "'", line);
  }
  return value;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_ws(line).empty()) return true;
  }
  return false;
}

}  // namespace

Mesh read_mesh(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_content_line(in, line, line_no)) throw ParseError("empty mesh file", line_no + 1);
  auto header = split_ws(line);
  if (!header.empty() && header.size() == 5 && header[2] == "/") header.erase(header.begin() + 2);
  if (header.size() != 4 || header[0] != "vertices" || header[2] != "cells") {
    throw ParseError("expected header 'vertices N / cells M'", line_no);
  }
  const auto nv = parse_number<long long>(header[1], line_no);
  const auto nc = parse_number<long long>(header[3], line_no);
  if (nv < 3 || nc < 1) throw ParseError("mesh needs at least 3 vertices and 1 cell", line_no);

  Eigen::Matrix2Xd vertices(2, nv);
  for (long long v = 0; v < nv; ++v) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of file in vertex block", line_no + 1);
    const auto tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError("vertex line needs 2 coordinates", line_no);
    vertices(0, v) = parse_number<double>(tokens[0], line_no);
    vertices(1, v) = parse_number<double>(tokens[1], line_no);
  }
  std::vector<std::array<Index, 3>> cells(static_cast<std::size_t>(nc));
  for (long long c = 0; c < nc; ++c) {
    if (!next_content_line(in, line, line_no)) throw ParseError("unexpected end of file in cell block", line_no + 1);
    const auto tokens = split_ws(line);
    if (tokens.size() != 3) throw ParseError("cell line needs 3 vertex indices", line_no);
    for (std::size_t i = 0; i < 3; ++i) cells[static_cast<std::size_t>(c)][i] = parse_number<long long>(tokens[i], line_no);
  }
  if (next_content_line(in, line, line_no)) throw ParseError("trailing content after cell block", line_no);
  return Mesh::from_connectivity(std::move(vertices), std::move(cells), warnings);
}

Mesh load_mesh(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file " + path.string());
  return read_mesh(in, warnings);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.num_vertices() << " / cells " << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (Index v = 0; v < mesh.num_vertices(); ++v) out << mesh.vertex(v).x() << ' ' << mesh.vertex(v).y() << '\n';
  for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

FacetQuadrature facet_quadrature(const Mesh& mesh, Index f, int order) {
  if (order < 1) throw InvalidArgument("facet_quadrature: order must be >= 1");
  const Facet& facet = mesh.facet(f);
  Eigen::VectorXd s, w;
  gauss_legendre(gauss_points_for_degree(order), s, w);
  const Eigen::Vector2d a = mesh.vertex(facet.vertices[0]);
  const Eigen::Vector2d b = mesh.vertex(facet.vertices[1]);
  FacetQuadrature rule;
  rule.params = s;
  rule.weights = w * (0.5 * facet.length);
  rule.points.resize(2, s.size());
  for (Index q = 0; q < s.size(); ++q) rule.points.col(q) = 0.5 * (a + b) + 0.5 * s[q] * (b - a);
  return rule;
}

}  // namespace hmdg
