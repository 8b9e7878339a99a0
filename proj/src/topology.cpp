#include "hkg/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace hkg::topo {

SimpleGraph SimpleGraph::from_triples(const std::vector<Triple>& triples) {
  SimpleGraph g;
  int max_node = -1;
  for (const auto& t : triples)
    max_node = std::max({max_node, t.subject, t.object});
  g.adjacency_.resize(max_node + 1);

  std::set<std::pair<int, int>> seen;
  for (const auto& t : triples) {
    if (t.subject == t.object) {
      ++g.self_loops_dropped;
      continue;
    }
    int u = std::min<int>(t.subject, t.object);
    int v = std::max<int>(t.subject, t.object);
    if (!seen.insert({u, v}).second) {
      ++g.parallel_edges_dropped;
      continue;
    }
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
  g.edges_.assign(seen.begin(), seen.end());
  return g;
}

bool SimpleGraph::has_edge(int u, int v) const {
  if (u < 0 || u >= num_nodes() || v < 0 || v >= num_nodes()) return false;
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

namespace {

void require_edge(const SimpleGraph& g, int s, int o) {
  if (!g.has_edge(s, o))
    throw std::invalid_argument("edge (" + std::to_string(s) + "," +
                                std::to_string(o) + ") not in graph");
}

// Sorted-list intersection size.
int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  int count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++count; ++ia; ++ib; }
  }
  return count;
}

// Neighbors of `side` that are not o, not s, and not adjacent to `other`.
std::vector<int> square_candidates(const SimpleGraph& g, int side, int other) {
  std::vector<int> out;
  for (int k : g.neighbors(side)) {
    if (k == other || k == side) continue;
    if (g.has_edge(k, other)) continue;
    out.push_back(k);
  }
  return out;
}

}  // namespace

int triangles(const SimpleGraph& g, int s, int o) {
  require_edge(g, s, o);
  return intersection_size(g.neighbors(s), g.neighbors(o));
}

SquareCounts squares(const SimpleGraph& g, int s, int o) {
  require_edge(g, s, o);
  std::vector<int> ks = square_candidates(g, s, o);  // N(s) side
  std::vector<int> ws = square_candidates(g, o, s);  // N(o) side

  SquareCounts out;
  std::vector<int> cycles_through_k(ks.size(), 0);
  std::vector<int> cycles_through_w(ws.size(), 0);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (std::size_t j = 0; j < ws.size(); ++j) {
      if (g.has_edge(ks[i], ws[j])) {
        ++cycles_through_k[i];
        ++cycles_through_w[j];
      }
    }
  }
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (cycles_through_k[i] > 0) {
      ++out.n_sq_s;
      out.gamma_max = std::max(out.gamma_max, cycles_through_k[i]);
    }
  for (std::size_t j = 0; j < ws.size(); ++j)
    if (cycles_through_w[j] > 0) {
      ++out.n_sq_o;
      out.gamma_max = std::max(out.gamma_max, cycles_through_w[j]);
    }
  return out;
}

EdgeCurvature balanced_forman(const SimpleGraph& g, int s, int o) {
  require_edge(g, s, o);
  EdgeCurvature c;
  c.s = s;
  c.o = o;
  c.d_s = g.degree(s);
  c.d_o = g.degree(o);
  c.n_triangles = triangles(g, s, o);
  SquareCounts sq = squares(g, s, o);
  c.n_sq_s = sq.n_sq_s;
  c.n_sq_o = sq.n_sq_o;
  c.gamma_max = sq.gamma_max;

  int dmin = std::min(c.d_s, c.d_o);
  int dmax = std::max(c.d_s, c.d_o);
  if (dmin <= 1) {  // leaf edge, curvature fixed to 0 by convention
    c.ric = 0.0;
    c.degenerate = true;
    return c;
  }
  double ric = 2.0 / c.d_s + 2.0 / c.d_o - 2.0 +
               2.0 * c.n_triangles / dmax + static_cast<double>(c.n_triangles) / dmin;
  if (c.gamma_max > 0)
    ric += (c.n_sq_s + c.n_sq_o) / (static_cast<double>(c.gamma_max) * dmax);
  c.ric = ric;
  return c;
}

CurvatureReport curvature_report(const SimpleGraph& g, int threads) {
  CurvatureReport report;
  const auto& edges = g.edges();
  report.per_edge.resize(edges.size());

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      report.per_edge[i] = balanced_forman(g, edges[i].first, edges[i].second);
  };
  if (threads <= 1 || edges.size() < 2) {
    worker(0, edges.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (edges.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t begin = std::min(edges.size(), t * chunk);
      std::size_t end = std::min(edges.size(), begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  report.sorted_curvatures.reserve(edges.size());
  for (const auto& c : report.per_edge) {
    report.sorted_curvatures.push_back(c.ric);
    if (c.ric <= 0.0) ++report.n_nonpositive;
    if (c.ric < 0.0) ++report.n_strictly_negative;
    if (c.degenerate) ++report.n_degenerate;
  }
  std::sort(report.sorted_curvatures.begin(), report.sorted_curvatures.end());
  report.oversquashing_proportion =
      edges.empty() ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(report.n_nonpositive) / edges.size();
  return report;
}

namespace {
std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

std::string report_to_csv(const CurvatureReport& report) {
  std::ostringstream out;
  out << "s,o,d_s,d_o,triangles,sq_s,sq_o,gamma_max,ric\n";
  for (const auto& c : report.per_edge) {
    out << c.s << ',' << c.o << ',' << c.d_s << ',' << c.d_o << ','
        << c.n_triangles << ',' << c.n_sq_s << ',' << c.n_sq_o << ','
        << c.gamma_max << ',' << format_double(c.ric) << '\n';
  }
  out << "# oversquashing_proportion=" << format_double(report.oversquashing_proportion)
      << " nonpositive=" << report.n_nonpositive
      << " strictly_negative=" << report.n_strictly_negative
      << " degenerate_min_degree_1=" << report.n_degenerate << '\n';
  return out.str();
}

std::string distribution_to_csv(const CurvatureReport& report) {
  std::ostringstream out;
  out << "rank,ric\n";
  for (std::size_t i = 0; i < report.sorted_curvatures.size(); ++i)
    out << i << ',' << format_double(report.sorted_curvatures[i]) << '\n';
  return out.str();
}

}  // namespace hkg::topo
