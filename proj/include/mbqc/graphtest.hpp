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

#ifndef MBQC_GRAPHTEST_HPP
#define MBQC_GRAPHTEST_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include <json.hpp>

#include "mbqc/belltest.hpp"
#include "mbqc/device.hpp"
#include "mbqc/extraction.hpp"
#include "mbqc/graphs.hpp"
#include "mbqc/hilbert.hpp"
#include "mbqc/rng.hpp"

namespace mbqc {

/// One prepared copy flowing through a protocol. `realize` resolves a
/// logical measurement label at a site to the physical observable and an
/// outcome sign (identity for direct runs; basis compensation under
/// delegation). Born draws come from the copy's own stream, so copies are
/// independent and order-reproducible.
struct PreparedCopy {
  PureState state;
  RngStream rng{0};
  std::function<std::pair<Matrix, int>(int site, ObsLabel, RngStream&)> realize;
  std::function<void(int site, ObsLabel, int outcome)> on_measure;

  int measure_label(int site, ObsLabel label) {
    auto [matrix, sign] = realize(site, label, rng);
    BinaryObservable obs{site, matrix};
    auto [raw, post] = measure(state, obs, rng);
    state = std::move(post);
    const int outcome = sign * raw;
    if (on_measure) on_measure(site, label, outcome);
    return outcome;
  }

  /// Applies the realized Z observable as a unitary (graph-state
  /// correction; the outcome sign is a global phase here).
  void apply_z_unitary(int site) {
    auto [matrix, sign] = realize(site, ObsLabel::Z, rng);
    (void)sign;
    state = apply_local(state, site, matrix);
  }
};

using CopySource = std::function<PreparedCopy(std::uint64_t copy_id)>;

inline CopySource direct_copy_source(std::shared_ptr<const DeviceModel> device, RngStream base) {
  return [device, base](std::uint64_t id) {
    PreparedCopy c;
    c.rng = base.child(2, id);
    c.state = device->make_copy(c.rng);
    c.realize = [device](int site, ObsLabel l, RngStream& rng) {
      Matrix m = device->base_observable(site, l);
      if (device->obs_hook) m = device->obs_hook(m, site, l, rng);
      return std::pair<Matrix, int>(std::move(m), +1);
    };
    return c;
  };
}

// ---------------------------------------------------------------------------
// Stabilizer test
// ---------------------------------------------------------------------------

struct StabilizerVerdict {
  int color = 0;
  bool pass = false;
  std::int64_t copies = 0;
  std::int64_t failed_copies = 0;
};

/// One copy of the stabilizer test: Z on non-x_color sites, X on x_color
/// sites (ascending site order), then every x_color site's X outcome must
/// equal the product of its neighbors' Z outcomes.
inline bool stabilizer_copy_consistent(PreparedCopy& copy, const ColoredGraph& g, int x_color) {
  std::vector<int> outcome(static_cast<std::size_t>(g.n), 0);
  for (int v = 0; v < g.n; ++v) {
    const ObsLabel l = g.coloring[static_cast<std::size_t>(v)] == x_color ? ObsLabel::X
                                                                          : ObsLabel::Z;
    outcome[static_cast<std::size_t>(v)] = copy.measure_label(v, l);
  }
  for (int v : g.color_class(x_color)) {
    int predicted = 1;
    for (int nb : g.neighbors(v)) predicted *= outcome[static_cast<std::size_t>(nb)];
    if (outcome[static_cast<std::size_t>(v)] != predicted) return false;
  }
  return true;
}

inline StabilizerVerdict run_stabilizer_test_group(const CopySource& source,
                                                   const std::vector<std::uint64_t>& copy_ids,
                                                   const ColoredGraph& g, int x_color) {
  StabilizerVerdict v;
  v.color = x_color;
  v.copies = static_cast<std::int64_t>(copy_ids.size());
  for (std::uint64_t id : copy_ids) {
    PreparedCopy copy = source(id);
    if (!stabilizer_copy_consistent(copy, g, x_color)) ++v.failed_copies;
  }
  v.pass = v.failed_copies == 0;
  return v;
}

inline StabilizerVerdict run_stabilizer_test(const DeviceModel& device, const ColoredGraph& g,
                                             int x_color, std::int64_t m, std::uint64_t seed) {
  auto dev = std::make_shared<const DeviceModel>(device);
  CopySource source = direct_copy_source(dev, RngStream(seed));
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return run_stabilizer_test_group(source, ids, g, x_color);
}

/// Exact probability that one copy passes the color's stabilizer test,
/// by branch enumeration over all measurement histories.
inline double stabilizer_pass_probability(
    const PureState& state,
    const std::function<std::pair<Matrix, int>(int site, ObsLabel)>& realize,
    const ColoredGraph& g, int x_color) {
  const int n = g.n;
  std::vector<Matrix> obs(static_cast<std::size_t>(n));
  std::vector<int> signs(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const ObsLabel l = g.coloring[static_cast<std::size_t>(v)] == x_color ? ObsLabel::X
                                                                          : ObsLabel::Z;
    auto [m, s] = realize(v, l);
    obs[static_cast<std::size_t>(v)] = std::move(m);
    signs[static_cast<std::size_t>(v)] = s;
  }
  const std::vector<int> x_sites = g.color_class(x_color);

  double total = 0.0;
  std::vector<int> outcome(static_cast<std::size_t>(n), 0);
  std::function<void(const Vector&, int)> walk = [&](const Vector& amps, int site) {
    if (amps.squaredNorm() < 1e-30) return;
    if (site == n) {
      for (int v : x_sites) {
        int predicted = 1;
        for (int nb : g.neighbors(v)) predicted *= outcome[static_cast<std::size_t>(nb)];
        if (outcome[static_cast<std::size_t>(v)] != predicted) return;
      }
      total += amps.squaredNorm();
      return;
    }
    const Eigen::Index d = state.dims[static_cast<std::size_t>(site)];
    const Matrix proj_plus =
        0.5 * (Matrix::Identity(d, d) + obs[static_cast<std::size_t>(site)]);
    PureState tmp{state.dims, amps};
    Vector plus = detail::apply_site_matrix(tmp, site, proj_plus);
    Vector minus = amps - plus;
    outcome[static_cast<std::size_t>(site)] = signs[static_cast<std::size_t>(site)];
    walk(plus, site + 1);
    outcome[static_cast<std::size_t>(site)] = -signs[static_cast<std::size_t>(site)];
    walk(minus, site + 1);
  };
  walk(state.amps, 0);
  return total;
}

// ---------------------------------------------------------------------------
// Color-protocol reduction
// ---------------------------------------------------------------------------

/// Measures out everything except the subset and its partners: Z on the
/// same-color sites outside the subset, then Z on every other-color
/// non-partner site (ascending order), fixing each -1 outcome by Z on the
/// still-unmeasured neighbors.
struct ReducedPairs {
  PureState state;  // full space; measured sites are frozen
  std::vector<std::pair<int, int>> pairs;  // (subset site, partner), site-ascending
};

inline ReducedPairs reduce_copy(PreparedCopy& copy, const ColoredGraph& g, int color,
                                const std::vector<int>& subset,
                                const std::map<int, int>& partners) {
  std::set<int> keep(subset.begin(), subset.end());
  for (const auto& [a, b] : partners) keep.insert(b);
  std::set<int> measured;
  auto measure_out = [&](int v) {
    const int outcome = copy.measure_label(v, ObsLabel::Z);
    measured.insert(v);
    if (outcome == -1) {
      for (int nb : g.neighbors(v))
        if (!measured.count(nb)) copy.apply_z_unitary(nb);
    }
  };
  for (int v : g.color_class(color))
    if (!keep.count(v)) measure_out(v);
  for (int v = 0; v < g.n; ++v) {
    if (g.coloring[static_cast<std::size_t>(v)] == color) continue;
    if (keep.count(v)) continue;
    if (!measured.count(v)) measure_out(v);
  }
  ReducedPairs out;
  out.state = copy.state;
  for (int a : subset) out.pairs.push_back({a, partners.at(a)});
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

/// Fidelity of the reduced pair state with the trusted Bell pair.
inline double pair_bell_fidelity(const PureState& st, int site_a, int site_b) {
  const Matrix rho = reduced_density(st, {site_a, site_b});
  ColoredGraph pair_graph = make_colored_graph(2, {{0, 1}}, {0, 1});
  const Vector phi = make_graph_state(pair_graph).amps;
  return (phi.adjoint() * rho * phi)(0, 0).real();
}

// ---------------------------------------------------------------------------
// Color protocol + Test (4)
// ---------------------------------------------------------------------------

struct SitePairTest {
  int color = 0;
  int subset_index = 0;
  int site = 0;
  int partner = 0;
  std::array<double, 8> averages{};
  std::array<std::int64_t, 8> minus_counts{};
  Test2Verdicts verdicts;
  bool pass = false;
  EpsilonSet eps;
  DeltaChain chain;
};

/// Runs the reduction + 8-group Bell checks for one non-conflict subset.
/// group_copy_ids must hold 8 groups of m copy ids.
inline std::vector<SitePairTest> run_color_protocol(
    const CopySource& source, const std::vector<std::vector<std::uint64_t>>& group_copy_ids,
    const ColoredGraph& g, int color, int subset_index, const std::vector<int>& subset,
    double c1) {
  if (group_copy_ids.size() != 8)
    throw std::invalid_argument("run_color_protocol: expected 8 groups");
  // Pre: the subset satisfies the non-conflict condition.
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      const auto na = g.neighbors(subset[i]);
      const auto nb = g.neighbors(subset[j]);
      std::vector<int> common;
      std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                            std::back_inserter(common));
      if (!common.empty())
        throw std::invalid_argument("run_color_protocol: subset violates non-conflict condition");
    }
  const std::map<int, int> partners = choose_partners(g, subset);
  const std::int64_t m = static_cast<std::int64_t>(group_copy_ids[0].size());

  std::map<int, std::array<std::int64_t, 8>> sums;
  std::map<int, std::array<std::int64_t, 8>> minus;
  for (int a : subset) {
    sums[a] = {};
    minus[a] = {};
  }
  for (int grp = 0; grp < 8; ++grp) {
    const auto& setting = test2_settings()[static_cast<std::size_t>(grp)];
    for (std::uint64_t id : group_copy_ids[static_cast<std::size_t>(grp)]) {
      PreparedCopy copy = source(id);
      ReducedPairs red = reduce_copy(copy, g, color, subset, partners);
      copy.state = red.state;
      for (const auto& [a, b] : red.pairs) {
        const int o1 = copy.measure_label(a, setting.first);
        const int o2 = copy.measure_label(b, setting.second);
        const int p = o1 * o2;
        sums[a][static_cast<std::size_t>(grp)] += p;
        if (p < 0) ++minus[a][static_cast<std::size_t>(grp)];
      }
    }
  }

  std::vector<SitePairTest> out;
  for (int a : subset) {
    SitePairTest t;
    t.color = color;
    t.subset_index = subset_index;
    t.site = a;
    t.partner = partners.at(a);
    for (int grp = 0; grp < 8; ++grp) {
      t.averages[static_cast<std::size_t>(grp)] =
          static_cast<double>(sums[a][static_cast<std::size_t>(grp)]) / static_cast<double>(m);
      t.minus_counts[static_cast<std::size_t>(grp)] = minus[a][static_cast<std::size_t>(grp)];
    }
    t.verdicts = compute_test2_verdicts(t.averages, t.minus_counts, m, c1);
    t.pass = t.verdicts.all();
    if (t.pass) {
      Test2Report stub;
      stub.m = m;
      stub.c1 = c1;
      stub.pass = true;
      t.eps = epsilons_from_report(stub);
      t.chain = delta_chain(t.eps);
    }
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const SitePairTest& x, const SitePairTest& y) { return x.site < y.site; });
  return out;
}

struct Test4Report {
  int n = 0;
  int k = 0;
  std::map<int, int> l_per_color;
  int c3 = 0;
  std::int64_t m = 0;
  double c1 = 0;
  std::uint64_t seed = 0;
  std::vector<StabilizerVerdict> stabilizer;
  std::vector<SitePairTest> site_tests;
  std::map<int, double> final_defect;  // Tr[sigma (I - P'_i)] per color
  std::int64_t copies_consumed = 0;
  bool pass = false;
};

/// Full Test (4) over an arbitrary copy source: seeded split of c3*m+1
/// copies into c3 groups of m plus one final copy, k stabilizer groups,
/// one 8-group block per non-conflict subset, and exact final-copy
/// diagnostics. Group blocks are uniformly 8 wide in the order
/// (color ascending, subset ascending).
inline Test4Report run_test4_with_source(const CopySource& raw_source, const ColoredGraph& g,
                                         std::int64_t m, double c1, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("run_test4: m must be >= 1");
  {
    const auto violations = validate(g);
    if (!violations.empty())
      throw std::invalid_argument("run_test4: graph invalid: " + violations.front().message);
  }

  Test4Report rep;
  rep.n = g.n;
  const auto colors = g.colors();
  rep.k = static_cast<int>(colors.size());
  for (int c : colors)
    rep.l_per_color[c] = static_cast<int>(g.partitions.at(c).size());
  rep.c3 = group_count(g);
  rep.m = m;
  rep.c1 = c1;
  rep.seed = seed;

  std::int64_t consumed = 0;
  CopySource source = [&raw_source, &consumed](std::uint64_t id) {
    ++consumed;
    return raw_source(id);
  };

  const std::int64_t total = static_cast<std::int64_t>(rep.c3) * m + 1;
  RngStream root(seed);
  std::vector<std::uint64_t> perm(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  RngStream shuffle_rng = root.child(1);
  shuffle(perm, shuffle_rng);
  auto group_ids = [&](int group) {
    std::vector<std::uint64_t> ids(static_cast<std::size_t>(m));
    for (std::int64_t j = 0; j < m; ++j)
      ids[static_cast<std::size_t>(j)] = perm[static_cast<std::size_t>(group * m + j)];
    return ids;
  };

  bool all_pass = true;
  int group = 0;
  for (int color : colors) {
    StabilizerVerdict v = run_stabilizer_test_group(source, group_ids(group), g, color);
    all_pass = all_pass && v.pass;
    rep.stabilizer.push_back(v);
    ++group;
  }
  for (int color : colors) {
    const auto& subsets = g.partitions.at(color);
    for (std::size_t si = 0; si < subsets.size(); ++si) {
      std::vector<std::vector<std::uint64_t>> block(8);
      for (int b = 0; b < 8; ++b) block[static_cast<std::size_t>(b)] = group_ids(group + b);
      group += 8;
      auto tests = run_color_protocol(source, block, g, color, static_cast<int>(si),
                                      subsets[si], c1);
      for (auto& t : tests) {
        all_pass = all_pass && t.pass;
        rep.site_tests.push_back(std::move(t));
      }
    }
  }

  // Final copy: exact diagnostics against the device's own projectors.
  PreparedCopy final_copy = source(perm[static_cast<std::size_t>(rep.c3 * m)]);
  for (int color : colors) {
    auto realize_exact = [&final_copy](int site, ObsLabel l) {
      return final_copy.realize(site, l, final_copy.rng);
    };
    const double p = stabilizer_pass_probability(final_copy.state, realize_exact, g, color);
    rep.final_defect[color] = std::max(0.0, 1.0 - p);
  }

  rep.copies_consumed = consumed;
  rep.pass = all_pass;
  return rep;
}

inline Test4Report run_test4(const DeviceModel& device, const ColoredGraph& g, std::int64_t m,
                             double c1, std::uint64_t seed) {
  auto dev = std::make_shared<const DeviceModel>(device);
  return run_test4_with_source(direct_copy_source(dev, RngStream(seed)), g, m, c1, seed);
}

struct Test4Guarantees {
  double delta = 0;
  double defect_threshold = 0;  // alpha / m
  std::vector<int> flagged_colors;  // colors whose final defect exceeds the threshold
};

/// delta = c2 (log n / m)^(1/4); flags final-copy defects above alpha/m.
inline Test4Guarantees test4_guarantees(const Test4Report& report, double alpha,
                                        double c2 = 1.0) {
  if (!report.pass) throw std::invalid_argument("test4_guarantees: report did not pass");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("test4_guarantees: alpha out of (0,1)");
  Test4Guarantees out;
  out.delta = c2 * std::pow(std::log(static_cast<double>(report.n)) /
                                static_cast<double>(report.m),
                            0.25);
  out.defect_threshold = alpha / static_cast<double>(report.m);
  for (const auto& [color, defect] : report.final_defect)
    if (defect > out.defect_threshold) out.flagged_colors.push_back(color);
  return out;
}

inline nlohmann::ordered_json test4_report_to_json(const Test4Report& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "test4_report";
  j["graph"] = {{"n", r.n}, {"k", r.k}, {"c3", r.c3}};
  nlohmann::ordered_json ls = nlohmann::json::object();
  for (const auto& [c, l] : r.l_per_color) ls[std::to_string(c)] = l;
  j["graph"]["l"] = ls;
  j["m"] = r.m;
  j["c1"] = r.c1;
  j["seed"] = r.seed;
  j["copies_consumed"] = r.copies_consumed;
  j["stabilizer"] = nlohmann::json::array();
  for (const auto& v : r.stabilizer)
    j["stabilizer"].push_back({{"color", v.color},
                               {"pass", v.pass},
                               {"copies", v.copies},
                               {"failed_copies", v.failed_copies}});
  j["site_tests"] = nlohmann::json::array();
  for (const auto& t : r.site_tests) {
    nlohmann::ordered_json e;
    e["color"] = t.color;
    e["subset"] = t.subset_index;
    e["site"] = t.site;
    e["partner"] = t.partner;
    e["averages"] = t.averages;
    e["verdicts"] = {{"eq1_xz", t.verdicts.eq1_xz},
                     {"eq1_zx", t.verdicts.eq1_zx},
                     {"eq2", t.verdicts.eq2},
                     {"eq3", t.verdicts.eq3},
                     {"eq4", t.verdicts.eq4}};
    e["pass"] = t.pass;
    if (t.pass) {
      e["epsilons"] = {{"e1", t.eps.e1}, {"e2", t.eps.e2}, {"e3", t.eps.e3},
                       {"e4", t.eps.e4}, {"e5", t.eps.e5}};
      e["delta1"] = t.chain.d1;
      e["delta2"] = t.chain.d2;
    }
    j["site_tests"].push_back(e);
  }
  nlohmann::ordered_json fd = nlohmann::json::object();
  for (const auto& [c, d] : r.final_defect) fd[std::to_string(c)] = d;
  j["final_defect"] = fd;
  j["pass"] = r.pass;
  return j;
}

/// Per-site epsilon/delta table as CSV.
inline std::string test4_site_table_csv(const Test4Report& r) {
  std::string csv = "color,subset,site,partner,pass,e1,e2,e3,e4,e5,delta1,delta2\n";
  for (const auto& t : r.site_tests) {
    csv += std::to_string(t.color) + "," + std::to_string(t.subset_index) + "," +
           std::to_string(t.site) + "," + std::to_string(t.partner) + "," +
           (t.pass ? "1" : "0") + "," + std::to_string(t.eps.e1) + "," +
           std::to_string(t.eps.e2) + "," + std::to_string(t.eps.e3) + "," +
           std::to_string(t.eps.e4) + "," + std::to_string(t.eps.e5) + "," +
           std::to_string(t.chain.d1) + "," + std::to_string(t.chain.d2) + "\n";
  }
  return csv;
}

}  // namespace mbqc

#endif  // MBQC_GRAPHTEST_HPP
