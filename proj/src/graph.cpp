#include "neardup/graph.hpp"

#include <algorithm>
#include <tuple>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "neardup/error.hpp"
#include "neardup/hash.hpp"
#include "neardup/parallel.hpp"

namespace neardup {

namespace {

void canonicalize_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    return std::tie(l.a, l.b, r.score) < std::tie(r.a, r.b, l.score);
  });
  edges.erase(std::unique(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
                return l.a == r.a && l.b == r.b;
              }),
              edges.end());
}

}  // namespace

SimilarityGraph build_graph(std::vector<std::string> doc_ids, std::vector<Edge> edges, bool weighted) {
  const std::size_t n = doc_ids.size();
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : doc_ids) {
      if (!seen.insert(id).second) throw_data("duplicate node id '" + id + "'");
    }
  }
  for (auto& e : edges) {
    if (e.a >= n || e.b >= n) throw_data("edge endpoint index out of range");
    if (e.a == e.b) throw_data("self-loop on '" + doc_ids[e.a] + "'");
    if (e.b < e.a) std::swap(e.a, e.b);
  }
  canonicalize_edges(edges);
  return SimilarityGraph{std::move(doc_ids), std::move(edges), weighted};
}

SimilarityGraph build_graph(std::span<const std::string> doc_ids, std::span<const ScoredPair> edges,
                            bool weighted) {
  std::unordered_map<std::string_view, DocIndex> index;
  index.reserve(doc_ids.size());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) index.emplace(doc_ids[i], static_cast<DocIndex>(i));
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    auto ia = index.find(e.id_a);
    if (ia == index.end()) throw_data("edge endpoint '" + e.id_a + "' is not a corpus document");
    auto ib = index.find(e.id_b);
    if (ib == index.end()) throw_data("edge endpoint '" + e.id_b + "' is not a corpus document");
    out.push_back({ia->second, ib->second, e.score});
  }
  return build_graph(std::vector<std::string>(doc_ids.begin(), doc_ids.end()), std::move(out), weighted);
}

Clustering clustering_from_labels(std::span<const std::string> doc_ids, std::span<const std::uint32_t> labels,
                                  std::string method_tag) {
  if (doc_ids.size() != labels.size()) throw_internal("label vector does not match document count");
  std::unordered_map<std::uint32_t, std::size_t> smallest;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = smallest.emplace(labels[i], i);
    if (!fresh && doc_ids[i] < doc_ids[it->second]) it->second = i;
  }
  Clustering c;
  c.method_tag = std::move(method_tag);
  c.doc_ids.assign(doc_ids.begin(), doc_ids.end());
  c.cluster_ids.reserve(labels.size());
  for (std::uint32_t l : labels) c.cluster_ids.push_back(doc_ids[smallest[l]]);
  return c;
}

std::vector<std::uint32_t> dense_labels(const Clustering& c) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::uint32_t> labels;
  labels.reserve(c.size());
  for (const auto& cid : c.cluster_ids) {
    auto [it, fresh] = ids.emplace(cid, static_cast<std::uint32_t>(ids.size()));
    labels.push_back(it->second);
  }
  return labels;
}

Clustering gold_clustering(std::span<const Document> docs) {
  Clustering c;
  c.method_tag = "gold";
  for (const auto& d : docs) {
    if (!d.gold_cluster) throw_data("document '" + d.id + "' has no gold_cluster label");
    c.doc_ids.push_back(d.id);
    c.cluster_ids.push_back(*d.gold_cluster);
  }
  return c;
}

std::vector<std::uint32_t> component_labels(const SimilarityGraph& g) {
  std::vector<std::uint32_t> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : g.edges) {
    const auto ra = find(e.a);
    const auto rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::uint32_t> labels(g.node_count());
  for (std::uint32_t i = 0; i < labels.size(); ++i) labels[i] = find(i);
  return labels;
}

Clustering connected_components(const SimilarityGraph& g) {
  return clustering_from_labels(g.nodes, component_labels(g), "components");
}

namespace {

// Weighted undirected graph for one Louvain level. Adjacency excludes
// self-loops, which live in `self` (weight of the loop, counted once).
struct LevelGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> nbrs;
  std::vector<double> weights;
  std::vector<double> self;
  std::vector<double> degree;

  std::size_t size() const noexcept { return self.size(); }
};

struct WeightedEdge {
  std::uint32_t a;
  std::uint32_t b;
  double w;
};

LevelGraph make_level(std::size_t n, std::vector<WeightedEdge> edges, std::vector<double> self) {
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& l, const WeightedEdge& r) {
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });
  std::vector<WeightedEdge> merged;
  for (const auto& e : edges) {
    if (!merged.empty() && merged.back().a == e.a && merged.back().b == e.b) {
      merged.back().w += e.w;
    } else {
      merged.push_back(e);
    }
  }
  LevelGraph g;
  g.self = std::move(self);
  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : merged) ++deg[e.a], ++deg[e.b];
  g.offsets.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + deg[i];
  g.nbrs.resize(g.offsets.back());
  g.weights.resize(g.offsets.back());
  std::vector<std::size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& e : merged) {
    g.nbrs[cursor[e.a]] = e.b, g.weights[cursor[e.a]++] = e.w;
    g.nbrs[cursor[e.b]] = e.a, g.weights[cursor[e.b]++] = e.w;
  }
  g.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double k = 2.0 * g.self[i];
    for (std::size_t p = g.offsets[i]; p < g.offsets[i + 1]; ++p) k += g.weights[p];
    g.degree[i] = k;
  }
  return g;
}

std::vector<std::uint32_t> visit_order(std::size_t n, std::uint64_t seed, std::uint64_t salt) {
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (seed == 0) return order;
  std::mt19937_64 rng(derive_seed(seed, salt));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// One level of local moving. Returns true when any node changed community.
bool local_moving(const LevelGraph& g, double two_m, double resolution, std::uint64_t seed, std::uint64_t salt,
                  std::vector<std::uint32_t>& comm) {
  const std::size_t n = g.size();
  comm.resize(n);
  std::iota(comm.begin(), comm.end(), 0u);
  std::vector<double> tot(g.degree);
  std::vector<double> link(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  const auto order = visit_order(n, seed, salt);
  constexpr double kMinGain = 1e-12;

  bool any_move = false;
  for (bool moved = true; moved;) {
    moved = false;
    for (std::uint32_t i : order) {
      const std::uint32_t home = comm[i];
      const double k = g.degree[i];
      touched.clear();
      for (std::size_t p = g.offsets[i]; p < g.offsets[i + 1]; ++p) {
        const std::uint32_t c = comm[g.nbrs[p]];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        link[c] += g.weights[p];
      }
      tot[home] -= k;
      const double scale = resolution * k / two_m;
      const double stay = link[home] - tot[home] * scale;
      std::uint32_t best = home;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (std::uint32_t c : touched) {
        if (c == home) continue;
        const double gain = link[c] - tot[c] * scale;
        // Ties go to the lowest community id.
        if (gain > best_gain || (gain == best_gain && c < best)) {
          best_gain = gain;
          best = c;
        }
      }
      if (best == home || !(best_gain > stay + kMinGain)) best = home;
      tot[best] += k;
      comm[i] = best;
      if (best != home) moved = any_move = true;
      for (std::uint32_t c : touched) link[c] = 0.0, seen[c] = 0;
    }
  }
  return any_move;
}

// Louvain over one component whose nodes are numbered by sorted id. Returns
// the community of each node; communities are numbered by lowest member.
std::vector<std::uint32_t> louvain_component(std::size_t n, std::vector<WeightedEdge> edges, double two_m,
                                             const LouvainConfig& cfg, std::uint64_t component) {
  std::vector<std::uint32_t> member(n);
  std::iota(member.begin(), member.end(), 0u);
  LevelGraph level = make_level(n, std::move(edges), std::vector<double>(n, 0.0));
  std::vector<std::uint32_t> comm;
  for (std::uint64_t depth = 0;; ++depth) {
    if (!local_moving(level, two_m, cfg.resolution, cfg.seed, derive_seed(component, depth), comm)) break;

    std::vector<std::uint32_t> remap(level.size(), std::numeric_limits<std::uint32_t>::max());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (remap[comm[i]] == std::numeric_limits<std::uint32_t>::max()) remap[comm[i]] = next++;
    }
    for (auto& m : member) m = remap[comm[m]];

    std::vector<double> self(next, 0.0);
    std::vector<WeightedEdge> coarse;
    for (std::uint32_t i = 0; i < level.size(); ++i) {
      const std::uint32_t ci = remap[comm[i]];
      self[ci] += level.self[i];
      for (std::size_t p = level.offsets[i]; p < level.offsets[i + 1]; ++p) {
        const std::uint32_t j = level.nbrs[p];
        if (j < i) continue;
        const std::uint32_t cj = remap[comm[j]];
        if (ci == cj) {
          self[ci] += level.weights[p];
        } else {
          coarse.push_back({std::min(ci, cj), std::max(ci, cj), level.weights[p]});
        }
      }
    }
    level = make_level(next, std::move(coarse), std::move(self));
    if (next == 1) break;
  }
  return member;
}

}  // namespace

double modularity(const SimilarityGraph& g, std::span<const std::uint32_t> labels, double resolution) {
  if (labels.size() != g.node_count()) throw_internal("label vector does not match node count");
  double m = 0.0;
  std::unordered_map<std::uint32_t, double> internal;
  std::unordered_map<std::uint32_t, double> degree;
  for (const auto& e : g.edges) {
    const double w = g.weighted ? std::max(e.score, 0.0) : 1.0;
    m += w;
    degree[labels[e.a]] += w;
    degree[labels[e.b]] += w;
    if (labels[e.a] == labels[e.b]) internal[labels[e.a]] += w;
  }
  if (m == 0.0) return 0.0;
  double q = 0.0;
  for (const auto& [c, d] : degree) {
    auto it = internal.find(c);
    const double in = it == internal.end() ? 0.0 : it->second;
    q += in / m - resolution * (d / (2.0 * m)) * (d / (2.0 * m));
  }
  return q;
}

std::vector<std::uint32_t> louvain_labels(const SimilarityGraph& g, const LouvainConfig& cfg) {
  if (!(cfg.resolution > 0.0)) throw_config("louvain resolution must be > 0");
  const std::size_t n = g.node_count();
  std::vector<std::uint32_t> labels(n);
  std::iota(labels.begin(), labels.end(), 0u);

  double m = 0.0;
  for (const auto& e : g.edges) m += g.weighted ? std::max(e.score, 0.0) : 1.0;
  if (m == 0.0) return labels;

  const auto roots = component_labels(g);
  std::unordered_map<std::uint32_t, std::uint32_t> comp_of_root;
  std::vector<std::vector<std::uint32_t>> comps;
  for (std::uint32_t v = 0; v < n; ++v) {
    auto [it, fresh] = comp_of_root.emplace(roots[v], static_cast<std::uint32_t>(comps.size()));
    if (fresh) comps.emplace_back();
    comps[it->second].push_back(v);
  }
  std::vector<std::uint32_t> local_of(n);
  for (auto& nodes : comps) {
    std::sort(nodes.begin(), nodes.end(), [&](std::uint32_t l, std::uint32_t r) { return g.nodes[l] < g.nodes[r]; });
    for (std::uint32_t r = 0; r < nodes.size(); ++r) local_of[nodes[r]] = r;
  }
  std::vector<std::vector<WeightedEdge>> comp_edges(comps.size());
  for (const auto& e : g.edges) {
    const double w = g.weighted ? std::max(e.score, 0.0) : 1.0;
    const std::uint32_t la = local_of[e.a];
    const std::uint32_t lb = local_of[e.b];
    comp_edges[comp_of_root[roots[e.a]]].push_back({std::min(la, lb), std::max(la, lb), w});
  }

  parallel_for(comps.size(), [&](std::size_t c) {
    const auto& nodes = comps[c];
    if (nodes.size() < 2) return;
    const auto member = louvain_component(nodes.size(), std::move(comp_edges[c]), 2.0 * m, cfg, c);
    // Label each community by the graph index of its smallest-id member.
    std::vector<std::uint32_t> rep(nodes.size(), std::numeric_limits<std::uint32_t>::max());
    for (std::uint32_t r = 0; r < nodes.size(); ++r) {
      if (rep[member[r]] == std::numeric_limits<std::uint32_t>::max()) rep[member[r]] = nodes[r];
      labels[nodes[r]] = rep[member[r]];
    }
  }, 1);
  return labels;
}

Clustering louvain(const SimilarityGraph& g, const LouvainConfig& cfg) {
  return clustering_from_labels(g.nodes, louvain_labels(g, cfg), "louvain");
}

ClusterStats cluster_stats(const Clustering& c) {
  ClusterStats st;
  st.documents = c.size();
  std::unordered_map<std::string_view, std::size_t> sizes;
  for (const auto& cid : c.cluster_ids) ++sizes[cid];
  st.clusters = sizes.size();
  for (const auto& [cid, size] : sizes) {
    if (size == 1) {
      ++st.singletons;
      continue;
    }
    ++st.non_singleton_clusters;
    st.reproduced_documents += size;
    st.max_size = std::max(st.max_size, size);
  }
  if (st.non_singleton_clusters > 0) {
    st.mean_defined = true;
    st.mean_size = static_cast<double>(st.reproduced_documents) / static_cast<double>(st.non_singleton_clusters);
  } else {
    st.max_size = st.documents > 0 ? 1 : 0;
  }
  return st;
}

void write_clustering(std::ostream& out, const Clustering& c) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return c.doc_ids[l] < c.doc_ids[r]; });
  for (std::size_t i : order) out << c.doc_ids[i] << '\t' << c.cluster_ids[i] << '\n';
}

void save_clustering(const std::filesystem::path& path, const Clustering& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot write clustering file " + path.string());
  write_clustering(out, c);
}

Clustering read_clustering(std::istream& in, const std::string& origin) {
  Clustering c;
  c.method_tag = "file";
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw_data(origin + ":" + std::to_string(line_no) + ": expected `doc_id<TAB>cluster_id`");
    }
    std::string id = line.substr(0, tab);
    if (!seen.insert(id).second) {
      throw_data(origin + ":" + std::to_string(line_no) + ": document '" + id + "' assigned twice");
    }
    c.doc_ids.push_back(std::move(id));
    c.cluster_ids.push_back(line.substr(tab + 1));
  }
  return c;
}

Clustering load_clustering(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open clustering file " + path.string());
  return read_clustering(in, path.string());
}

}  // namespace neardup
