//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_TESTS_FIXTURES_HPP_
#define SCAFFDIFF_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "scaffdiff/conservation.hpp"
#include "scaffdiff/domain.hpp"

namespace scaffdiff::testing {

// Synthetic complexes with chemistry-plausible geometry: zigzag carbon
// scaffold (bond ~1.53 A), an R-group chain growing from the anchor, and a
// ring of pocket residues around the growth direction. All molecules pass
// the validity rules by construction.

inline constexpr double kDx = 1.25;
inline constexpr double kDy = 0.88;

inline PointSet make_chain(int64_t n, const std::vector<std::string> &types,
                           double x0, double twist) {
  PointSet ps;
  ps.coords = Tensor({n, 3});
  ps.types = Tensor({n, kAtomTypes});
  for (int64_t i = 0; i < n; ++i) {
    const double lift = (i % 2) ? kDy : 0.0;
    ps.coords.at(i, 0) = x0 + static_cast<double>(i) * kDx;
    ps.coords.at(i, 1) = lift * std::cos(twist);
    ps.coords.at(i, 2) = lift * std::sin(twist);
    ps.types.at(i, element_index(types[static_cast<size_t>(i) % types.size()])) = 1.0;
  }
  ps.residue_id.assign(static_cast<size_t>(n), -1);
  return ps;
}

/// One tuple; `index` varies R-group size, atom types and the pocket twist.
inline ComplexTuple make_tuple(int64_t index, int64_t n_rgroup = 0) {
  const double twist = 2.0 * M_PI * static_cast<double>(index) / 16.0;
  ComplexTuple tuple;

  // Scaffold: 5 carbons along x, anchor at the far end (atom 4).
  static_cast<PointSet &>(tuple.scaffold) =
      make_chain(5, {"C"}, 0.0, 0.0);
  tuple.scaffold.anchor_index = 4;

  // R-group: chain continuing past the anchor, twisted out of plane.
  const int64_t n_r = n_rgroup > 0 ? n_rgroup : 3 + (index % 4);
  static const std::vector<std::vector<std::string>> patterns = {
      {"C", "N", "C", "O", "C", "C"},
      {"C", "O", "C", "N", "C", "C"},
      {"C", "C", "N", "C", "O", "C"}};
  const auto &pat = patterns[static_cast<size_t>(index % 3)];
  RGroup rg;
  rg.coords = Tensor({n_r, 3});
  rg.types = Tensor({n_r, kAtomTypes});
  const double ax = tuple.scaffold.coords.at(4, 0);
  for (int64_t j = 0; j < n_r; ++j) {
    const double lift = ((j + 1) % 2) ? kDy : 0.0;
    rg.coords.at(j, 0) = ax + static_cast<double>(j + 1) * kDx;
    rg.coords.at(j, 1) = lift * std::cos(twist);
    rg.coords.at(j, 2) = lift * std::sin(twist);
    rg.types.at(j, element_index(pat[static_cast<size_t>(j)])) = 1.0;
  }
  rg.residue_id.assign(static_cast<size_t>(n_r), -1);
  tuple.rgroup = std::move(rg);

  // Pocket: 8 residues of 4 atoms ringed around the R-group region.
  // Residue 0 carries a carboxylate-like C(O)(O)C motif.
  const int64_t n_res = 8, per_res = 4;
  Pocket pocket;
  pocket.coords = Tensor({n_res * per_res, 3});
  pocket.types = Tensor({n_res * per_res, kAtomTypes});
  for (int64_t r = 0; r < n_res; ++r) {
    const double phi = 2.0 * M_PI * static_cast<double>(r) / n_res + twist;
    const double cx = ax + 1.0 + 0.7 * static_cast<double>(r);
    const double cy = 3.4 * std::cos(phi);
    const double cz = 3.4 * std::sin(phi);
    std::vector<std::array<double, 3>> offsets;
    std::vector<std::string> rtypes;
    if (r == 0) {
      offsets = {{0, 0, 0}, {1.3, 0, 0}, {-0.65, 1.13, 0}, {0, 0, 1.4}};
      rtypes = {"C", "O", "O", "C"};
    } else {
      offsets = {{0, 0, 0}, {0.8, 0.8, 0.8}, {1.6, 1.6, 1.6}, {2.4, 2.4, 2.4}};
      rtypes = {"C", "N", "C", "O"};
    }
    for (int64_t k = 0; k < per_res; ++k) {
      const int64_t i = r * per_res + k;
      pocket.coords.at(i, 0) = cx + offsets[static_cast<size_t>(k)][0];
      pocket.coords.at(i, 1) = cy + offsets[static_cast<size_t>(k)][1];
      pocket.coords.at(i, 2) = cz + offsets[static_cast<size_t>(k)][2];
      pocket.types.at(i, element_index(rtypes[static_cast<size_t>(k)])) = 1.0;
      pocket.residue_id.push_back(r);
    }
  }
  tuple.pocket = std::move(pocket);

  tuple.affinity = -6.0 + 0.2 * static_cast<double>(index % 5) +
                   0.05 * static_cast<double>(n_r);
  tuple.validate();
  return tuple;
}

inline std::vector<ComplexTuple> make_dataset(int64_t n) {
  std::vector<ComplexTuple> out;
  for (int64_t i = 0; i < n; ++i) out.push_back(make_tuple(i));
  return out;
}

/// A3M fixture: first `n_conserved` columns identical across rows, the rest
/// maximally spread; rows wrap at the amino alphabet.
inline std::string make_a3m(int64_t n_residues, int64_t n_conserved,
                            int64_t n_rows = 8) {
  static const std::string aa = "ACDEFGHIKLMNPQRSTVWY";
  std::string text;
  for (int64_t r = 0; r < n_rows; ++r) {
    text += ">seq" + std::to_string(r) + "\n";
    std::string row;
    for (int64_t c = 0; c < n_residues; ++c) {
      if (c < n_conserved)
        row += 'A';
      else
        row += aa[static_cast<size_t>((r + c) % 20)];
    }
    text += row + "\n";
  }
  return text;
}

/// Conservation track straight from per-residue scores.
inline ConservationTrack make_track(const std::vector<double> &scores) {
  ConservationTrack t;
  t.scores = scores;
  return t;
}

inline AugmentedPocket augment_with_scores(const Pocket &pocket,
                                           const std::vector<double> &scores) {
  std::map<int64_t, int64_t> identity;
  for (int64_t r : pocket.residue_id) identity[r] = r;
  return augment_pocket(pocket, make_track(scores), identity);
}

/// Coordinate RMSD minimized over atom permutations (exact for small N).
inline double best_rmsd(const Tensor &a, const Tensor &b) {
  SCAFFDIFF_CHECK(a.rows() == b.rows(), "best_rmsd: atom count mismatch");
  const int64_t n = a.rows();
  std::vector<int64_t> perm(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  double best = 1e300;
  do {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t k = 0; k < 3; ++k) {
        const double d = a.at(i, k) - b.at(perm[static_cast<size_t>(i)], k);
        acc += d * d;
      }
    best = std::min(best, acc);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(n));
}

}  // namespace scaffdiff::testing

#endif  // SCAFFDIFF_TESTS_FIXTURES_HPP_
