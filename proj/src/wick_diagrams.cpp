#include "scatlimit/wick_diagrams.hpp"

#include <numeric>
#include <string>

#include "scatlimit/errors.hpp"

namespace scatlimit {

namespace {

struct Layout {
  std::vector<int> order;
  std::vector<int> level;  // level of each vertex
  int vertices = 0;
};

Layout make_layout(std::span<const int> order, const DiagramOptions& opts) {
  if (order.size() < 2) throw ShapeError("a diagram order needs at least two levels");
  Layout l;
  for (int v : order) {
    if (v < 1) throw ShapeError("diagram levels must have at least one vertex");
    l.order.push_back(v);
    l.vertices += v;
  }
  if (l.vertices > opts.max_vertices)
    throw SizeLimit("order has " + std::to_string(l.vertices) + " vertices, cap is " +
                    std::to_string(opts.max_vertices));
  for (std::size_t i = 0; i < order.size(); ++i) l.level.insert(l.level.end(), order[i], static_cast<int>(i));
  return l;
}

int lowest_unmatched(const std::vector<int>& partner) {
  for (std::size_t v = 0; v < partner.size(); ++v)
    if (partner[v] < 0) return static_cast<int>(v);
  return -1;
}

struct Matcher {
  const Layout& lay;
  std::vector<int> partner;

  explicit Matcher(const Layout& l) : lay(l), partner(l.vertices, -1) {}

  template <class Leaf>
  void run(Leaf&& leaf) {
    const int v = lowest_unmatched(partner);
    if (v < 0) {
      leaf(partner);
      return;
    }
    for (int u = v + 1; u < lay.vertices; ++u) {
      if (partner[u] >= 0 || lay.level[u] == lay.level[v]) continue;
      partner[v] = u;
      partner[u] = v;
      run(leaf);
      partner[v] = partner[u] = -1;
    }
  }
};

Diagram build(const Layout& lay, const std::vector<int>& partner) {
  Diagram d;
  d.order = lay.order;
  const std::size_t p = lay.order.size();
  d.counts.assign(p, std::vector<int>(p, 0));
  for (int v = 0; v < lay.vertices; ++v) {
    const int u = partner[v];
    if (u <= v) continue;
    d.edges.emplace_back(v, u);
    const int a = lay.level[v], b = lay.level[u];
    ++d.counts[std::min(a, b)][std::max(a, b)];
  }
  d.regular = is_regular(d.counts);
  return d;
}

// Partial matchings covering the two lowest unmatched vertices; each is one
// independent branch of the enumeration, listed in canonical order.
std::vector<std::vector<int>> branches(const Layout& lay) {
  std::vector<std::vector<int>> out;
  std::vector<int> partner(lay.vertices, -1);
  auto extend = [&](auto&& self, int depth) -> void {
    const int v = lowest_unmatched(partner);
    if (v < 0 || depth == 2) {
      out.push_back(partner);
      return;
    }
    for (int u = v + 1; u < lay.vertices; ++u) {
      if (partner[u] >= 0 || lay.level[u] == lay.level[v]) continue;
      partner[v] = u;
      partner[u] = v;
      self(self, depth + 1);
      partner[v] = partner[u] = -1;
    }
  };
  extend(extend, 0);
  return out;
}

double prefix_weight(const Layout& lay, const std::vector<int>& partner, const CorrelationMatrix& cov) {
  double w = 1.0;
  for (int v = 0; v < lay.vertices; ++v)
    if (partner[v] > v) w *= cov(lay.level[v], lay.level[partner[v]]);
  return w;
}

// Σ over completions of the prefix of the product of the remaining edge weights.
double complete_sum(const Layout& lay, std::vector<int> partner, const CorrelationMatrix& cov) {
  auto rec = [&](auto&& self) -> double {
    const int v = lowest_unmatched(partner);
    if (v < 0) return 1.0;
    double s = 0.0;
    for (int u = v + 1; u < lay.vertices; ++u) {
      if (partner[u] >= 0 || lay.level[u] == lay.level[v]) continue;
      const double c = cov(lay.level[v], lay.level[u]);
      if (c == 0.0) continue;
      partner[v] = u;
      partner[u] = v;
      s += c * self(self);
      partner[v] = partner[u] = -1;
    }
    return s;
  };
  return rec(rec);
}

void check_cov(const Layout& lay, const CorrelationMatrix& cov) {
  if (cov.p != lay.order.size() || cov.values.size() != cov.p * cov.p)
    throw ShapeError("correlation matrix must be " + std::to_string(lay.order.size()) + " x " +
                     std::to_string(lay.order.size()));
}

}  // namespace

int Diagram::level_of(int vertex) const {
  int acc = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    acc += order[i];
    if (vertex < acc) return static_cast<int>(i);
  }
  return -1;
}

void for_each_diagram(std::span<const int> order, const std::function<void(const Diagram&)>& visit,
                      const DiagramOptions& opts) {
  const Layout lay = make_layout(order, opts);
  if (lay.vertices % 2 != 0) return;
  Matcher m(lay);
  m.run([&](const std::vector<int>& partner) { visit(build(lay, partner)); });
}

std::vector<Diagram> enumerate_diagrams(std::span<const int> order, const DiagramOptions& opts) {
  std::vector<Diagram> out;
  for_each_diagram(order, [&](const Diagram& d) { out.push_back(d); }, opts);
  return out;
}

DiagramTally tally_diagrams(std::span<const int> order, const DiagramOptions& opts) {
  DiagramTally t;
  for_each_diagram(
      order,
      [&](const Diagram& d) {
        ++t.total;
        if (d.regular) ++t.regular;
      },
      opts);
  return t;
}

bool is_regular(const std::vector<std::vector<int>>& counts) {
  const std::size_t p = counts.size();
  if (p % 2 != 0) return false;
  // Connected components of the level graph must all have exactly two levels.
  std::vector<int> comp(p, -1);
  for (std::size_t s = 0; s < p; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    comp[s] = static_cast<int>(s);
    std::size_t size = 0;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      ++size;
      for (std::size_t b = 0; b < p; ++b) {
        const int c = a < b ? counts[a][b] : counts[b][a];
        if (a != b && c > 0 && comp[b] < 0) {
          comp[b] = static_cast<int>(s);
          stack.push_back(b);
        }
      }
    }
    if (size != 2) return false;
  }
  return true;
}

std::vector<LevelPair> regular_split(const Diagram& d) {
  if (!is_regular(d.counts)) throw NotRegular("diagram levels cannot be split into isolated pairs");
  std::vector<LevelPair> out;
  const std::size_t p = d.levels();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = i + 1; k < p; ++k)
      if (d.counts[i][k] > 0) out.push_back({static_cast<int>(i), static_cast<int>(k), d.counts[i][k]});
  return out;
}

double hermite_moment(std::span<const int> order, const CorrelationMatrix& cov, const DiagramOptions& opts) {
  const Layout lay = make_layout(order, opts);
  check_cov(lay, cov);
  if (lay.vertices % 2 != 0) return 0.0;
  const auto br = branches(lay);
  double total = 0.0;
  for (const auto& b : br) {
    const double w = prefix_weight(lay, b, cov);
    if (w != 0.0) total += w * complete_sum(lay, b, cov);
  }
  return total;
}

double hermite_moment_parallel(std::span<const int> order, const CorrelationMatrix& cov,
                               const DiagramOptions& opts) {
  const Layout lay = make_layout(order, opts);
  check_cov(lay, cov);
  if (lay.vertices % 2 != 0) return 0.0;
  const auto br = branches(lay);
  std::vector<double> part(br.size(), 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(br.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < nb; ++i) {
    const double w = prefix_weight(lay, br[i], cov);
    if (w != 0.0) part[i] = w * complete_sum(lay, br[i], cov);
  }
  double total = 0.0;
  for (double v : part) total += v;
  return total;
}

}  // namespace scatlimit
