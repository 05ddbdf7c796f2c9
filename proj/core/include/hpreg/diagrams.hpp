#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

namespace hpreg {

/// Largest total vertex count the enumerators accept.
inline constexpr int kMaxDiagramVertices = 24;
/// Largest number of diagrams enumerate_diagrams materializes.
inline constexpr std::size_t kMaxDiagramList = 5'000'000;

/// Edge between vertex `a` of level `j1` and vertex `b` of level `j2`, j1 < j2.
struct DiagramEdge {
  int j1;
  int a;
  int j2;
  int b;
  bool operator==(const DiagramEdge&) const = default;
};

/// Levels l_1..l_p of labelled vertices, every vertex in exactly one edge,
/// no edge inside a level.
struct Diagram {
  std::vector<int> levels;
  std::vector<DiagramEdge> edges;
};

/// Calls visit once per diagram of the given orders. Vertices are matched in
/// canonical order (the first free vertex always takes the next edge), so
/// every diagram appears exactly once. Odd totals produce no diagrams.
/// Throws size_limit beyond 24 vertices, validation on negative orders.
void for_each_diagram(const std::vector<int>& orders, const std::function<void(const Diagram&)>& visit);

/// All diagrams as a list. Throws size_limit if the list would exceed
/// kMaxDiagramList entries.
std::vector<Diagram> enumerate_diagrams(const std::vector<int>& orders);

/// True iff the levels split into pairs with no edge between different
/// pairs (exhaustive pairing search, p <= 12). Odd p is never regular.
bool is_regular(const Diagram& d);

/// r(j) levels of one cardinality, used 2 m_j times.
struct LevelGroup {
  int cardinality;
  int pairs;  // m_j
};

/// Groups a level tuple by cardinality. Throws validation when some
/// cardinality occurs an odd number of times (no pairing into m_j exists).
std::vector<LevelGroup> level_groups(const std::vector<int>& orders);

/// Number of regular diagrams over all level orderings of the groups:
/// (2 nu - 1)!! nu! / (m_1! ... m_l!) * prod (r(j)!)^{m_j}, nu = sum m_j.
std::uint64_t count_regular(const std::vector<LevelGroup>& groups);

/// Number of regular diagrams for one fixed level tuple,
/// prod_j (2 m_j - 1)!! (r(j)!)^{m_j}; zero when no pairing exists.
std::uint64_t count_regular_for_orders(const std::vector<int>& orders);

struct DiagramCensus {
  std::uint64_t total = 0;
  std::uint64_t regular = 0;
};

DiagramCensus census(const std::vector<int>& orders);

/// E[prod_j H_{l_j}(zeta_j)] for a standard Gaussian vector with the given
/// correlation matrix: the sum over diagrams of prod_edges rho(j1, j2).
/// Throws validation on a malformed matrix, size_limit beyond 24 vertices.
double hermite_product_moment(const std::vector<int>& orders, const Eigen::MatrixXd& correlation);

}  // namespace hpreg
