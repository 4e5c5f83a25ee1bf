//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_MOLGRAPH_HPP_
#define SCAFFDIFF_MOLGRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scaffdiff/domain.hpp"

namespace scaffdiff {

inline double covalent_radius(const std::string &element) {
  static const std::map<std::string, double> radii = {
      {"C", 0.77}, {"N", 0.75}, {"O", 0.73},  {"F", 0.71},  {"P", 1.10},
      {"S", 1.03}, {"Cl", 0.99}, {"Br", 1.14}, {"I", 1.33}, {"H", 0.37}};
  auto it = radii.find(element);
  SCAFFDIFF_CHECK(it != radii.end(), "no covalent radius for '", element, "'");
  return it->second;
}

inline int64_t max_valence(const std::string &element) {
  static const std::map<std::string, int64_t> limits = {
      {"C", 4}, {"N", 3}, {"O", 2},  {"F", 1}, {"P", 5},
      {"S", 6}, {"Cl", 1}, {"Br", 1}, {"I", 1}, {"H", 1}};
  auto it = limits.find(element);
  SCAFFDIFF_CHECK(it != limits.end(), "no valence limit for '", element, "'");
  return it->second;
}

/// Element-labeled bond graph; coordinates are forgotten once bonds are
/// inferred.
struct MolGraph {
  std::vector<std::string> elements;
  std::vector<std::pair<int64_t, int64_t>> bonds;  // i < j
  std::vector<std::vector<int64_t>> adj;

  int64_t size() const { return static_cast<int64_t>(elements.size()); }
};

/// Bond between i and j iff |d_ij - (r_i + r_j)| <= tol.
inline MolGraph infer_bonds(const Tensor &coords,
                            const std::vector<std::string> &elements,
                            double tol = 0.4) {
  SCAFFDIFF_CHECK(coords.rows() == static_cast<int64_t>(elements.size()),
                  "infer_bonds: ", coords.rows(), " coords vs ",
                  elements.size(), " elements");
  MolGraph g;
  g.elements = elements;
  g.adj.resize(elements.size());
  for (int64_t i = 0; i < coords.rows(); ++i) {
    for (int64_t j = i + 1; j < coords.rows(); ++j) {
      double d2 = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        const double d = coords.at(i, k) - coords.at(j, k);
        d2 += d * d;
      }
      const double d = std::sqrt(d2);
      const double expected = covalent_radius(elements[static_cast<size_t>(i)]) +
                              covalent_radius(elements[static_cast<size_t>(j)]);
      if (std::fabs(d - expected) <= tol) {
        g.bonds.emplace_back(i, j);
        g.adj[static_cast<size_t>(i)].push_back(j);
        g.adj[static_cast<size_t>(j)].push_back(i);
      }
    }
  }
  return g;
}

inline MolGraph infer_bonds(const PointSet &atoms, double tol = 0.4) {
  std::vector<std::string> elements;
  for (int64_t i = 0; i < atoms.size(); ++i) elements.push_back(atoms.element(i));
  return infer_bonds(atoms.coords, elements, tol);
}

namespace detail {

// One round of color refinement: new color = (old color, sorted neighbor
// colors), relabeled to ordinal ranks. Returns true if the partition split.
inline bool refine_colors(const MolGraph &g, std::vector<int64_t> &colors) {
  const int64_t n = g.size();
  std::vector<std::string> keys(static_cast<size_t>(n));
  for (int64_t v = 0; v < n; ++v) {
    std::vector<int64_t> nb;
    for (int64_t u : g.adj[static_cast<size_t>(v)])
      nb.push_back(colors[static_cast<size_t>(u)]);
    std::sort(nb.begin(), nb.end());
    std::string key = std::to_string(colors[static_cast<size_t>(v)]);
    for (int64_t c : nb) key += "," + std::to_string(c);
    keys[static_cast<size_t>(v)] = std::move(key);
  }
  std::vector<std::string> uniq = keys;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  bool changed = false;
  for (int64_t v = 0; v < n; ++v) {
    const int64_t c = static_cast<int64_t>(
        std::lower_bound(uniq.begin(), uniq.end(), keys[static_cast<size_t>(v)]) -
        uniq.begin());
    if (c != colors[static_cast<size_t>(v)]) changed = true;
    colors[static_cast<size_t>(v)] = c;
  }
  return changed;
}

inline void refine_to_stable(const MolGraph &g, std::vector<int64_t> &colors) {
  while (refine_colors(g, colors)) {
  }
}

inline std::string encode_with_discrete_colors(
    const MolGraph &g, const std::vector<int64_t> &colors) {
  const int64_t n = g.size();
  std::vector<int64_t> rank(static_cast<size_t>(n));
  for (int64_t v = 0; v < n; ++v) rank[static_cast<size_t>(v)] = colors[static_cast<size_t>(v)];
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t v = 0; v < n; ++v) order[static_cast<size_t>(rank[static_cast<size_t>(v)])] = v;
  std::string enc;
  for (int64_t i = 0; i < n; ++i)
    enc += g.elements[static_cast<size_t>(order[static_cast<size_t>(i)])] + ",";
  enc += "|";
  std::vector<std::pair<int64_t, int64_t>> edges;
  for (const auto &[a, b] : g.bonds) {
    int64_t ra = rank[static_cast<size_t>(a)], rb = rank[static_cast<size_t>(b)];
    edges.emplace_back(std::min(ra, rb), std::max(ra, rb));
  }
  std::sort(edges.begin(), edges.end());
  for (const auto &[a, b] : edges)
    enc += std::to_string(a) + "-" + std::to_string(b) + ";";
  return enc;
}

inline std::string canonical_search(const MolGraph &g,
                                    std::vector<int64_t> colors) {
  refine_to_stable(g, colors);
  const int64_t n = g.size();

  // Find the first non-singleton color class.
  int64_t target_color = -1;
  for (int64_t c = 0; c < n && target_color < 0; ++c) {
    int64_t count = 0;
    for (int64_t v = 0; v < n; ++v)
      if (colors[static_cast<size_t>(v)] == c) ++count;
    if (count > 1) target_color = c;
  }
  if (target_color < 0) return encode_with_discrete_colors(g, colors);

  // Individualize each member in turn; keep the smallest encoding.
  std::string best;
  for (int64_t v = 0; v < n; ++v) {
    if (colors[static_cast<size_t>(v)] != target_color) continue;
    std::vector<int64_t> child = colors;
    for (int64_t u = 0; u < n; ++u)
      child[static_cast<size_t>(u)] = child[static_cast<size_t>(u)] * 2 + 1;
    child[static_cast<size_t>(v)] -= 1;  // v sorts before its classmates
    const std::string enc = canonical_search(g, std::move(child));
    if (best.empty() || enc < best) best = enc;
  }
  return best;
}

}  // namespace detail

/// Canonical text form of the bond graph: equal strings iff the element-
/// labeled graphs are isomorphic. Uses color refinement with
/// individualization backtracking, which is exact at molecule sizes.
inline std::string canonical_graph_string(const MolGraph &g) {
  if (g.size() == 0) return "";
  std::vector<std::string> keys;
  for (int64_t v = 0; v < g.size(); ++v)
    keys.push_back(g.elements[static_cast<size_t>(v)] + "/" +
                   std::to_string(g.adj[static_cast<size_t>(v)].size()));
  std::vector<std::string> uniq = keys;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<int64_t> colors(static_cast<size_t>(g.size()));
  for (int64_t v = 0; v < g.size(); ++v)
    colors[static_cast<size_t>(v)] = static_cast<int64_t>(
        std::lower_bound(uniq.begin(), uniq.end(), keys[static_cast<size_t>(v)]) -
        uniq.begin());
  return detail::canonical_search(g, std::move(colors));
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_MOLGRAPH_HPP_
