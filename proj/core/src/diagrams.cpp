#include "hpreg/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hpreg/errors.hpp"

namespace hpreg {
namespace {

int check_orders(const std::vector<int>& orders) {
  int total = 0;
  for (int l : orders) {
    if (l < 0) fail(ErrorCode::validation, "diagram level cardinality must be nonnegative");
    total += l;
  }
  if (total > kMaxDiagramVertices) {
    fail(ErrorCode::size_limit, "diagram enumeration limited to 24 vertices, got " + std::to_string(total));
  }
  return total;
}

// Depth-first matching over flat vertex indices. owner[v] is the level of v.
class Matcher {
 public:
  Matcher(const std::vector<int>& orders, const std::function<void(const Diagram&)>& visit)
      : visit_(visit) {
    diagram_.levels = orders;
    for (int j = 0; j < static_cast<int>(orders.size()); ++j) {
      for (int a = 0; a < orders[j]; ++a) {
        owner_.push_back(j);
        slot_.push_back(a);
      }
    }
    used_.assign(owner_.size(), false);
  }

  void run() { step(0); }

 private:
  void step(std::size_t from) {
    while (from < used_.size() && used_[from]) ++from;
    if (from == used_.size()) {
      visit_(diagram_);
      return;
    }
    used_[from] = true;
    for (std::size_t v = from + 1; v < used_.size(); ++v) {
      if (used_[v] || owner_[v] == owner_[from]) continue;
      used_[v] = true;
      diagram_.edges.push_back({owner_[from], slot_[from], owner_[v], slot_[v]});
      step(from + 1);
      diagram_.edges.pop_back();
      used_[v] = false;
    }
    used_[from] = false;
  }

  const std::function<void(const Diagram&)>& visit_;
  Diagram diagram_;
  std::vector<int> owner_;
  std::vector<int> slot_;
  std::vector<bool> used_;
};

bool pairing_search(std::vector<bool>& paired, const std::vector<std::vector<int>>& links) {
  const auto first = std::find(paired.begin(), paired.end(), false);
  if (first == paired.end()) return true;
  const auto i = static_cast<std::size_t>(first - paired.begin());
  paired[i] = true;
  for (std::size_t j = i + 1; j < paired.size(); ++j) {
    if (paired[j]) continue;
    // Every edge of i and of j must stay inside {i, j}.
    bool closed = true;
    for (std::size_t k = 0; k < paired.size() && closed; ++k) {
      if (k == i || k == j) continue;
      closed = links[i][k] == 0 && links[j][k] == 0;
    }
    if (!closed) continue;
    paired[j] = true;
    if (pairing_search(paired, links)) return true;
    paired[j] = false;
  }
  paired[i] = false;
  return false;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) fail(ErrorCode::overflow, "regular-diagram count overflows 64 bits");
  return out;
}

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f = checked_mul(f, static_cast<std::uint64_t>(i));
  return f;
}

std::uint64_t double_factorial_odd(int n) {  // (2n - 1)!!
  std::uint64_t f = 1;
  for (int i = 1; i <= 2 * n - 1; i += 2) f = checked_mul(f, static_cast<std::uint64_t>(i));
  return f;
}

std::uint64_t power(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

}  // namespace

void for_each_diagram(const std::vector<int>& orders, const std::function<void(const Diagram&)>& visit) {
  const int total = check_orders(orders);
  if (total % 2 == 1) return;
  Matcher(orders, visit).run();
}

std::vector<Diagram> enumerate_diagrams(const std::vector<int>& orders) {
  std::vector<Diagram> out;
  for_each_diagram(orders, [&](const Diagram& d) {
    if (out.size() == kMaxDiagramList) fail(ErrorCode::size_limit, "too many diagrams to list");
    out.push_back(d);
  });
  return out;
}

bool is_regular(const Diagram& d) {
  const std::size_t p = d.levels.size();
  if (p % 2 == 1 || p == 0) return false;
  if (p > 12) fail(ErrorCode::size_limit, "regularity search limited to 12 levels");
  std::vector<std::vector<int>> links(p, std::vector<int>(p, 0));
  for (const auto& e : d.edges) {
    ++links[e.j1][e.j2];
    ++links[e.j2][e.j1];
  }
  std::vector<bool> paired(p, false);
  return pairing_search(paired, links);
}

std::vector<LevelGroup> level_groups(const std::vector<int>& orders) {
  std::map<int, int> counts;
  for (int l : orders) ++counts[l];
  std::vector<LevelGroup> groups;
  for (const auto& [r, n] : counts) {
    if (n % 2 == 1) {
      fail(ErrorCode::validation, "cardinality " + std::to_string(r) + " occurs an odd number of times");
    }
    groups.push_back({r, n / 2});
  }
  return groups;
}

std::uint64_t count_regular(const std::vector<LevelGroup>& groups) {
  if (groups.empty()) fail(ErrorCode::validation, "count_regular needs at least one group");
  int nu = 0;
  for (const auto& g : groups) {
    if (g.pairs < 1 || g.cardinality < 1) fail(ErrorCode::validation, "inconsistent level multiplicity");
    nu += g.pairs;
  }
  // (2 nu - 1)!! nu! / prod m_j! is the multinomial nu! / prod m_j! times (2 nu - 1)!!.
  std::uint64_t multinomial = 1;
  int placed = 0;
  for (const auto& g : groups) {
    for (int i = 1; i <= g.pairs; ++i) {
      ++placed;
      multinomial = checked_mul(multinomial, static_cast<std::uint64_t>(placed)) / static_cast<std::uint64_t>(i);
    }
  }
  std::uint64_t count = checked_mul(double_factorial_odd(nu), multinomial);
  for (const auto& g : groups) count = checked_mul(count, power(factorial(g.cardinality), g.pairs));
  return count;
}

std::uint64_t count_regular_for_orders(const std::vector<int>& orders) {
  if (orders.empty() || orders.size() % 2 == 1) return 0;
  std::map<int, int> counts;
  for (int l : orders) ++counts[l];
  std::uint64_t count = 1;
  for (const auto& [r, n] : counts) {
    if (n % 2 == 1) return 0;
    count = checked_mul(count, checked_mul(double_factorial_odd(n / 2), power(factorial(r), n / 2)));
  }
  return count;
}

DiagramCensus census(const std::vector<int>& orders) {
  DiagramCensus c;
  for_each_diagram(orders, [&](const Diagram& d) {
    ++c.total;
    if (is_regular(d)) ++c.regular;
  });
  return c;
}

double hermite_product_moment(const std::vector<int>& orders, const Eigen::MatrixXd& correlation) {
  const auto p = static_cast<Eigen::Index>(orders.size());
  if (correlation.rows() != p || correlation.cols() != p) {
    fail(ErrorCode::validation, "correlation matrix must be p x p");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(correlation(i, i) - 1.0) > 1e-12) fail(ErrorCode::validation, "correlation diagonal must be 1");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(correlation(i, j) - correlation(j, i)) > 1e-12) {
        fail(ErrorCode::validation, "correlation matrix must be symmetric");
      }
      if (std::abs(correlation(i, j)) > 1.0 + 1e-12) fail(ErrorCode::validation, "correlation outside [-1, 1]");
    }
  }
  double total = 0.0;
  for_each_diagram(orders, [&](const Diagram& d) {
    double term = 1.0;
    for (const auto& e : d.edges) term *= correlation(e.j1, e.j2);
    total += term;
  });
  return total;
}

}  // namespace hpreg
