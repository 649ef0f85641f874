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

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "mbqc/graphs.hpp"

using namespace mbqc;

namespace {

ColoredGraph fig2a_like() {
  std::ifstream f(std::string(MBQC_TEST_DATA_DIR) + "/fig2a.json");
  REQUIRE(f.good());
  nlohmann::json j;
  f >> j;
  return graph_from_json(j);
}

}  // namespace

TEST_CASE("single vertex with one subset validates", "[graphs]") {
  ColoredGraph g = make_colored_graph(1, {}, {0});
  g.partitions[0] = {{0}};
  REQUIRE(validate(g).empty());
}

TEST_CASE("same-colored edge is reported with its vertices", "[graphs]") {
  ColoredGraph g = make_colored_graph(2, {{0, 1}}, {0, 0});
  const auto violations = validate(g);
  REQUIRE_FALSE(violations.empty());
  REQUIRE(violations.front().kind == "coloring");
  REQUIRE(violations.front().vertices == std::vector<int>{0, 1});
}

TEST_CASE("non-conflict violations name the shared neighbor", "[graphs]") {
  // Path 0-1-2 with 0 and 2 in one subset: they share neighbor 1.
  ColoredGraph g = make_colored_graph(3, {{0, 1}, {1, 2}}, {0, 1, 0});
  g.partitions[0] = {{0, 2}};
  g.partitions[1] = {{1}};
  const auto violations = validate(g);
  REQUIRE(violations.size() == 1);
  REQUIRE(violations.front().kind == "non-conflict");
  REQUIRE(violations.front().vertices == std::vector<int>{0, 2, 1});
}

TEST_CASE("partition cover errors are reported", "[graphs]") {
  ColoredGraph g = make_colored_graph(2, {{0, 1}}, {0, 1});
  g.partitions[0] = {{0}, {0}};  // vertex covered twice
  g.partitions[1] = {{1}};
  const auto violations = validate(g);
  REQUIRE(violations.size() == 1);
  REQUIRE(violations.front().kind == "partition-cover");
}

TEST_CASE("fig2a fixture validates with l_B = 2", "[graphs]") {
  ColoredGraph g = fig2a_like();
  REQUIRE(validate(g).empty());
  REQUIRE(g.partitions.at(0).size() == 2);
  REQUIRE(g.partitions.at(0).size() <= 2);
  // Greedy partition reproduces the stored counts.
  for (int color : g.colors())
    REQUIRE(partition_non_conflict(g, color).size() == g.partitions.at(color).size());
}

TEST_CASE("isolated vertices fit in one subset", "[graphs]") {
  ColoredGraph g = make_colored_graph(4, {}, {0, 0, 0, 0});
  const auto subsets = partition_non_conflict(g, 0);
  REQUIRE(subsets.size() == 1);
  REQUIRE(subsets.front().size() == 4);
}

TEST_CASE("path endpoints with a shared neighbor need two subsets", "[graphs]") {
  ColoredGraph g = make_colored_graph(3, {{0, 1}, {1, 2}}, {0, 1, 0});
  const auto subsets = partition_non_conflict(g, 0);
  REQUIRE(subsets.size() == 2);
  // Exhaustive check agrees: both orderings of {0,2} conflict.
  REQUIRE(min_partition_count(g, 0) == 2);
}

TEST_CASE("greedy partitions always validate and cover", "[graphs]") {
  std::vector<ColoredGraph> corpus;
  corpus.push_back(fig2a_like());
  corpus.push_back(triangular_lattice(2, 3));
  corpus.push_back(triangular_lattice(3, 3));
  corpus.push_back(make_colored_graph(3, {{0, 1}, {1, 2}}, {0, 1, 0}));
  for (auto& g : corpus) {
    compute_partitions(g);
    REQUIRE(validate(g).empty());
    for (int color : g.colors()) {
      std::size_t covered = 0;
      for (const auto& s : g.partitions.at(color)) covered += s.size();
      REQUIRE(covered == g.color_class(color).size());
    }
  }
}

TEST_CASE("greedy matches the exhaustive minimum on small graphs", "[graphs]") {
  std::vector<ColoredGraph> corpus;
  corpus.push_back(fig2a_like());
  corpus.push_back(triangular_lattice(2, 2));
  corpus.push_back(triangular_lattice(2, 3));
  corpus.push_back(make_colored_graph(3, {{0, 1}, {1, 2}}, {0, 1, 0}));
  for (const auto& g : corpus)
    for (int color : g.colors()) {
      if (g.color_class(color).size() > 12) continue;
      REQUIRE(static_cast<int>(partition_non_conflict(g, color).size()) ==
              min_partition_count(g, color));
    }
}

TEST_CASE("triangular lattice shapes", "[graphs]") {
  ColoredGraph single = triangular_lattice(1, 1);
  REQUIRE(single.n == 1);
  REQUIRE(single.edges.empty());

  // 2x2: proper 3-coloring verified by exhaustive edge scan.
  ColoredGraph lat = triangular_lattice(2, 2);
  for (const auto& e : lat.edges)
    REQUIRE(lat.coloring[static_cast<std::size_t>(e.first)] !=
            lat.coloring[static_cast<std::size_t>(e.second)]);
  REQUIRE(validate(lat).empty());

  for (int rows = 1; rows <= 4; ++rows)
    for (int cols = 1; cols <= 4; ++cols) {
      ColoredGraph g = triangular_lattice(rows, cols);
      REQUIRE(validate(g).empty());
      for (int color : g.colors()) REQUIRE(g.partitions.at(color).size() <= 3);
    }
}

TEST_CASE("group counts", "[graphs]") {
  // l = (1,1,1) on the triangle: 3 + 8*3 = 27.
  ColoredGraph tri = make_colored_graph(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 1, 2});
  compute_partitions(tri);
  REQUIRE(group_count(tri) == 27);

  // 3x3 lattice reaches l = 3 per color: 3 + 8*9 = 75.
  ColoredGraph lat = triangular_lattice(3, 3);
  int sum_l = 0;
  for (int color : lat.colors()) sum_l += static_cast<int>(lat.partitions.at(color).size());
  REQUIRE(sum_l == 9);
  REQUIRE(group_count(lat) == 75);

  // Four colors with l = (1,2,1,1): 4 + 8*5 = 44.
  ColoredGraph four =
      make_colored_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {0, 1, 1, 2, 3});
  compute_partitions(four);
  REQUIRE(four.partitions.at(1).size() == 2);
  REQUIRE(group_count(four) == 44);
}

TEST_CASE("group count is monotone in the partition sizes", "[graphs]") {
  ColoredGraph g = make_colored_graph(4, {}, {0, 0, 1, 1});
  g.partitions[0] = {{0, 1}};
  g.partitions[1] = {{2, 3}};
  const int base = group_count(g);
  g.partitions[0] = {{0}, {1}};
  REQUIRE(group_count(g) > base);
}

TEST_CASE("partner choice", "[graphs]") {
  ColoredGraph tri = make_colored_graph(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 1, 2});
  const auto partners = choose_partners(tri, {0});
  REQUIRE(partners.at(0) == 1);

  ColoredGraph lonely = make_colored_graph(1, {}, {0});
  REQUIRE_THROWS_AS(choose_partners(lonely, {0}), std::invalid_argument);
}

TEST_CASE("graph JSON round trip", "[graphs]") {
  ColoredGraph g = fig2a_like();
  const auto j = graph_to_json(g);
  REQUIRE(j["format"] == 1);
  ColoredGraph back = graph_from_json(j);
  REQUIRE(back.n == g.n);
  REQUIRE(back.edges == g.edges);
  REQUIRE(back.coloring == g.coloring);
  REQUIRE(back.partitions == g.partitions);

  nlohmann::json bad = j;
  bad["format"] = 2;
  REQUIRE_THROWS_AS(graph_from_json(bad), std::invalid_argument);

  // Omitted partitions are computed greedily on load.
  nlohmann::json no_parts = j;
  no_parts.erase("partitions");
  ColoredGraph computed = graph_from_json(no_parts);
  REQUIRE_FALSE(computed.partitions.empty());
  REQUIRE(validate(computed).empty());
}
