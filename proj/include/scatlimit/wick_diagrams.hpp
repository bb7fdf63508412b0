#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace scatlimit {

// A complete diagram of order (ℓ_1..ℓ_p). Vertices are numbered level by
// level; vertex v belongs to level level_of(v).
struct Diagram {
  std::vector<int> order;
  std::vector<std::pair<int, int>> edges;  // (u, v) with u < v
  // counts[i][i'] = #A_{i,i'} for i < i'; zero on and below the diagonal.
  std::vector<std::vector<int>> counts;
  bool regular = false;

  std::size_t levels() const { return order.size(); }
  int level_of(int vertex) const;
  int edge_count(int i, int k) const { return i < k ? counts[i][k] : counts[k][i]; }
};

struct DiagramOptions {
  int max_vertices = 20;
};

// Visits every complete diagram in canonical order: the lowest unmatched
// vertex is paired with each admissible partner in increasing order.
// SizeLimit when Σℓ exceeds the cap; nothing is visited for odd Σℓ.
void for_each_diagram(std::span<const int> order, const std::function<void(const Diagram&)>& visit,
                      const DiagramOptions& opts = {});
std::vector<Diagram> enumerate_diagrams(std::span<const int> order, const DiagramOptions& opts = {});

struct DiagramTally {
  std::size_t total = 0;
  std::size_t regular = 0;
  std::size_t non_regular() const { return total - regular; }
};
DiagramTally tally_diagrams(std::span<const int> order, const DiagramOptions& opts = {});

// Whether the levels split into pairs with no edges across pairs, given the
// level adjacency counts.
bool is_regular(const std::vector<std::vector<int>>& counts);

struct LevelPair {
  int first = 0;
  int second = 0;
  int edges = 0;
};
// The unique pairing of a regular diagram, ordered by first level. NotRegular otherwise.
std::vector<LevelPair> regular_split(const Diagram& d);

// Correlation matrix, row-major p x p.
struct CorrelationMatrix {
  std::size_t p = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t k) const { return values[i * p + k]; }
};

// E[Π H_{ℓ_i}(Z_i)] = Σ over complete diagrams of Π_e cov[d1(e), d2(e)].
double hermite_moment(std::span<const int> order, const CorrelationMatrix& cov, const DiagramOptions& opts = {});
// Same sum with the top branches of the enumeration spread over OpenMP
// threads; partial sums are combined in branch order, so the result does not
// depend on the thread count.
double hermite_moment_parallel(std::span<const int> order, const CorrelationMatrix& cov,
                               const DiagramOptions& opts = {});

}  // namespace scatlimit
