// Copyright 2026 The mbqc-selftest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MBQC_GRAPHS_HPP
#define MBQC_GRAPHS_HPP

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mbqc {

/// Vertex-colored graph plus the per-color non-conflict partitions
/// that drive the protocol bookkeeping.
struct ColoredGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;           // normalized u < v
  std::vector<int> coloring;                        // color label per vertex
  std::map<int, std::vector<std::vector<int>>> partitions;  // color -> subsets

  std::vector<int> colors() const {
    std::set<int> cs(coloring.begin(), coloring.end());
    return {cs.begin(), cs.end()};
  }

  std::vector<int> color_class(int color) const {
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
      if (coloring[static_cast<std::size_t>(v)] == color) out.push_back(v);
    return out;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (const auto& e : edges) {
      if (e.first == v) out.push_back(e.second);
      if (e.second == v) out.push_back(e.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool adjacent(int u, int v) const {
    const auto e = std::minmax(u, v);
    return std::find(edges.begin(), edges.end(), std::pair<int, int>{e.first, e.second}) !=
           edges.end();
  }
};

inline ColoredGraph make_colored_graph(int n, std::vector<std::pair<int, int>> edges,
                                       std::vector<int> coloring) {
  ColoredGraph g;
  g.n = n;
  for (auto& e : edges) {
    if (e.first == e.second) throw std::invalid_argument("graph: self-loop");
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= n) throw std::invalid_argument("graph: vertex out of range");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("graph: duplicate edge");
  g.edges = std::move(edges);
  if (static_cast<int>(coloring.size()) != n)
    throw std::invalid_argument("graph: coloring size mismatch");
  g.coloring = std::move(coloring);
  return g;
}

struct Violation {
  std::string kind;  // "coloring", "partition-cover", "non-conflict"
  std::vector<int> vertices;
  std::string message;
};

/// Violations are data, not failures: empty list iff the coloring is proper,
/// partitions cover each color class exactly once, and every subset
/// satisfies the non-conflict condition (no two members share a neighbor).
inline std::vector<Violation> validate(const ColoredGraph& g) {
  std::vector<Violation> out;
  for (const auto& e : g.edges) {
    if (g.coloring[static_cast<std::size_t>(e.first)] ==
        g.coloring[static_cast<std::size_t>(e.second)]) {
      out.push_back({"coloring",
                     {e.first, e.second},
                     "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                         ") joins same-colored vertices"});
    }
  }
  for (const auto& [color, subsets] : g.partitions) {
    std::map<int, int> count;
    for (const auto& s : subsets)
      for (int v : s) ++count[v];
    for (int v : g.color_class(color)) {
      auto it = count.find(v);
      const int c = it == count.end() ? 0 : it->second;
      if (c != 1)
        out.push_back({"partition-cover",
                       {v},
                       "vertex " + std::to_string(v) + " covered " + std::to_string(c) +
                           " times in color " + std::to_string(color)});
    }
    for (const auto& [v, c] : count) {
      if (g.coloring[static_cast<std::size_t>(v)] != color)
        out.push_back({"partition-cover",
                       {v},
                       "vertex " + std::to_string(v) + " listed under wrong color " +
                           std::to_string(color)});
    }
    for (const auto& s : subsets) {
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) {
          const auto na = g.neighbors(s[i]);
          const auto nb = g.neighbors(s[j]);
          std::vector<int> common;
          std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                                std::back_inserter(common));
          if (!common.empty())
            out.push_back({"non-conflict",
                           {s[i], s[j], common.front()},
                           "vertices " + std::to_string(s[i]) + "," + std::to_string(s[j]) +
                               " share neighbor " + std::to_string(common.front())});
        }
    }
  }
  return out;
}

namespace detail {

/// Conflict graph on a color class: u ~ v iff N_u and N_v intersect.
inline std::vector<std::vector<bool>> conflict_matrix(const ColoredGraph& g,
                                                      const std::vector<int>& verts) {
  const std::size_t k = verts.size();
  std::vector<std::vector<int>> nbrs(k);
  for (std::size_t i = 0; i < k; ++i) nbrs[i] = g.neighbors(verts[i]);
  std::vector<std::vector<bool>> conflict(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<int> common;
      std::set_intersection(nbrs[i].begin(), nbrs[i].end(), nbrs[j].begin(), nbrs[j].end(),
                            std::back_inserter(common));
      conflict[i][j] = conflict[j][i] = !common.empty();
    }
  return conflict;
}

inline bool color_conflict_graph(const std::vector<std::vector<bool>>& conflict,
                                 std::vector<int>& assign, std::size_t pos, int num_colors) {
  if (pos == assign.size()) return true;
  for (int c = 0; c < num_colors; ++c) {
    bool ok = true;
    for (std::size_t j = 0; j < pos; ++j)
      if (conflict[pos][j] && assign[j] == c) {
        ok = false;
        break;
      }
    if (!ok) continue;
    assign[pos] = c;
    if (color_conflict_graph(conflict, assign, pos + 1, num_colors)) return true;
  }
  assign[pos] = -1;
  return false;
}

}  // namespace detail

/// Greedy first-fit partition of the color class into non-conflict subsets.
/// Vertices are taken in degree-descending order (index ascending on ties),
/// so the result is deterministic; the subset count is an upper bound on
/// the true minimum.
inline std::vector<std::vector<int>> partition_non_conflict(const ColoredGraph& g, int color) {
  std::vector<int> verts = g.color_class(color);
  std::sort(verts.begin(), verts.end(), [&](int a, int b) {
    const auto da = g.neighbors(a).size();
    const auto db = g.neighbors(b).size();
    if (da != db) return da > db;
    return a < b;
  });
  std::vector<std::vector<int>> subsets;
  std::vector<std::vector<int>> subset_nbrs;  // sorted union of neighborhoods
  for (int v : verts) {
    const auto nv = g.neighbors(v);
    bool placed = false;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      std::vector<int> common;
      std::set_intersection(nv.begin(), nv.end(), subset_nbrs[s].begin(), subset_nbrs[s].end(),
                            std::back_inserter(common));
      if (common.empty()) {
        subsets[s].push_back(v);
        std::vector<int> merged;
        std::set_union(nv.begin(), nv.end(), subset_nbrs[s].begin(), subset_nbrs[s].end(),
                       std::back_inserter(merged));
        subset_nbrs[s] = std::move(merged);
        placed = true;
        break;
      }
    }
    if (!placed) {
      subsets.push_back({v});
      subset_nbrs.push_back(nv);
    }
  }
  for (auto& s : subsets) std::sort(s.begin(), s.end());
  return subsets;
}

/// Exact minimum number of non-conflict subsets (chromatic number of the
/// conflict graph). Exhaustive; only for color classes of size <= 12.
inline int min_partition_count(const ColoredGraph& g, int color) {
  const std::vector<int> verts = g.color_class(color);
  if (verts.size() > 12)
    throw std::invalid_argument("min_partition_count: color class too large for exhaustive mode");
  if (verts.empty()) return 0;
  const auto conflict = detail::conflict_matrix(g, verts);
  for (int l = 1; l <= static_cast<int>(verts.size()); ++l) {
    std::vector<int> assign(verts.size(), -1);
    if (detail::color_conflict_graph(conflict, assign, 0, l)) return l;
  }
  return static_cast<int>(verts.size());
}

/// Fills partitions for every color with the greedy construction.
inline void compute_partitions(ColoredGraph& g) {
  g.partitions.clear();
  for (int c : g.colors()) g.partitions[c] = partition_non_conflict(g, c);
}

/// c3 = k + 8 * sum_i l_i (the 3-colorable form 3 + 8(l_B+l_W+l_R) is the
/// k = 3 case).
inline int group_count(const ColoredGraph& g) {
  if (g.partitions.empty()) throw std::invalid_argument("group_count: partitions not computed");
  const int k = static_cast<int>(g.colors().size());
  int sum_l = 0;
  for (const auto& [color, subsets] : g.partitions)
    sum_l += static_cast<int>(subsets.size());
  return k + 8 * sum_l;
}

/// Deterministic partner choice for a non-conflict subset: each member
/// takes its lowest-index neighbor that is unclaimed and, when possible,
/// not adjacent to partners already chosen (keeps the reduced pairs
/// disconnected from each other); falls back to lowest-index unclaimed.
inline std::map<int, int> choose_partners(const ColoredGraph& g, const std::vector<int>& subset) {
  std::map<int, int> partner;
  std::set<int> claimed;
  std::vector<int> members = subset;
  std::sort(members.begin(), members.end());
  for (int v : members) {
    const auto nv = g.neighbors(v);
    if (nv.empty()) throw std::invalid_argument("choose_partners: vertex has no neighbor");
    int chosen = -1;
    for (int cand : nv) {
      if (claimed.count(cand)) continue;
      bool clash = false;
      for (const auto& [m, p] : partner)
        if (g.adjacent(cand, p)) {
          clash = true;
          break;
        }
      if (!clash) {
        chosen = cand;
        break;
      }
    }
    if (chosen < 0) {
      for (int cand : nv)
        if (!claimed.count(cand)) {
          chosen = cand;
          break;
        }
    }
    if (chosen < 0) throw std::invalid_argument("choose_partners: no unclaimed neighbor");
    partner[v] = chosen;
    claimed.insert(chosen);
  }
  return partner;
}

/// rows x cols triangular lattice: grid edges plus the down-right diagonal,
/// 3-colored by (r + c) mod 3. Partitions split each color class by row
/// mod 3, which meets the non-conflict condition with l <= 3 per color.
inline ColoredGraph triangular_lattice(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("triangular_lattice: need rows,cols >= 1");
  const int n = rows * cols;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> coloring(static_cast<std::size_t>(n));
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      coloring[static_cast<std::size_t>(id(r, c))] = (r + c) % 3;
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
      if (r + 1 < rows && c + 1 < cols) edges.push_back({id(r, c), id(r + 1, c + 1)});
    }
  ColoredGraph g = make_colored_graph(n, std::move(edges), std::move(coloring));
  for (int color : g.colors()) {
    std::vector<std::vector<int>> subsets(3);
    for (int v : g.color_class(color)) subsets[static_cast<std::size_t>((v / cols) % 3)].push_back(v);
    subsets.erase(std::remove_if(subsets.begin(), subsets.end(),
                                 [](const std::vector<int>& s) { return s.empty(); }),
                  subsets.end());
    g.partitions[color] = subsets;
  }
  return g;
}

// Graph file format, version 1.
inline nlohmann::ordered_json graph_to_json(const ColoredGraph& g) {
  nlohmann::ordered_json j;
  j["format"] = 1;
  j["n"] = g.n;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) j["edges"].push_back({e.first, e.second});
  j["coloring"] = g.coloring;
  nlohmann::ordered_json parts = nlohmann::json::object();
  for (const auto& [color, subsets] : g.partitions) parts[std::to_string(color)] = subsets;
  j["partitions"] = parts;
  return j;
}

inline ColoredGraph graph_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"].get<int>() != 1)
    throw std::invalid_argument("graph_from_json: unsupported format version");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  ColoredGraph g = make_colored_graph(j.at("n").get<int>(), std::move(edges),
                                      j.at("coloring").get<std::vector<int>>());
  if (j.contains("partitions")) {
    for (const auto& [key, subsets] : j.at("partitions").items())
      g.partitions[std::stoi(key)] = subsets.get<std::vector<std::vector<int>>>();
  } else {
    compute_partitions(g);
  }
  return g;
}

}  // namespace mbqc

#endif  // MBQC_GRAPHS_HPP
