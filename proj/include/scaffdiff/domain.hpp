//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_DOMAIN_HPP_
#define SCAFFDIFF_DOMAIN_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scaffdiff/tensor.hpp"

namespace scaffdiff {

// Fixed atom vocabulary; index order defines the one-hot layout.
inline const std::vector<std::string> &atom_vocabulary() {
  static const std::vector<std::string> vocab = {
      "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "H"};
  return vocab;
}

inline constexpr int64_t kAtomTypes = 10;

inline int64_t element_index(const std::string &symbol) {
  const auto &vocab = atom_vocabulary();
  for (size_t i = 0; i < vocab.size(); ++i)
    if (vocab[i] == symbol) return static_cast<int64_t>(i);
  std::string listing;
  for (const auto &s : vocab) listing += (listing.empty() ? "" : ", ") + s;
  throw Error("unknown element '" + symbol + "'; vocabulary: " + listing);
}

inline const std::string &element_symbol(int64_t index) {
  SCAFFDIFF_CHECK(index >= 0 && index < kAtomTypes,
                  "element index ", index, " outside vocabulary");
  return atom_vocabulary()[static_cast<size_t>(index)];
}

inline Tensor onehot_encode(const std::string &symbol) {
  Tensor v({1, kAtomTypes});
  v.at(0, element_index(symbol)) = 1.0;
  return v;
}

/// Argmax decoding; works for noisy continuous type rows too.
inline std::string onehot_decode(const Tensor &types, int64_t row) {
  SCAFFDIFF_CHECK(types.cols() == kAtomTypes, "type row has width ",
                  types.cols(), ", expected ", kAtomTypes);
  int64_t best = 0;
  for (int64_t j = 1; j < kAtomTypes; ++j)
    if (types.at(row, j) > types.at(row, best)) best = j;
  return element_symbol(best);
}

/// Atoms as coordinates plus one-hot types. residue_id is nonnegative for
/// pocket atoms and -1 for ligand atoms.
struct PointSet {
  Tensor coords;                    // N x 3
  Tensor types;                     // N x K
  std::vector<int64_t> residue_id;  // length N

  int64_t size() const { return coords.rows(); }

  void validate(const std::string &what, bool is_pocket) const {
    SCAFFDIFF_CHECK(coords.cols() == 3, what, ": coords must be N x 3");
    SCAFFDIFF_CHECK(types.cols() == kAtomTypes, what, ": types must be N x ",
                    kAtomTypes);
    SCAFFDIFF_CHECK(types.rows() == coords.rows(), what,
                    ": coords/types row mismatch");
    SCAFFDIFF_CHECK(static_cast<int64_t>(residue_id.size()) == coords.rows(),
                    what, ": residue_id length mismatch");
    SCAFFDIFF_CHECK(coords.all_finite(), what, ": non-finite coordinate");
    for (int64_t i = 0; i < types.rows(); ++i) {
      double total = 0.0;
      int ones = 0;
      for (int64_t j = 0; j < kAtomTypes; ++j) {
        const double v = types.at(i, j);
        SCAFFDIFF_CHECK(v == 0.0 || v == 1.0, what, ": one-hot violation at atom ",
                        i);
        total += v;
        if (v == 1.0) ++ones;
      }
      SCAFFDIFF_CHECK(total == 1.0 && ones == 1, what,
                      ": one-hot violation at atom ", i);
    }
    for (size_t i = 0; i < residue_id.size(); ++i) {
      if (is_pocket)
        SCAFFDIFF_CHECK(residue_id[i] >= 0, what, ": atom ", i,
                        " has negative residue_id");
      else
        SCAFFDIFF_CHECK(residue_id[i] == -1, what, ": ligand atom ", i,
                        " must carry residue_id -1");
    }
  }

  std::string element(int64_t i) const { return onehot_decode(types, i); }
};

using Pocket = PointSet;
using RGroup = PointSet;

struct Scaffold : PointSet {
  int64_t anchor_index = 0;  // attachment atom

  void validate_scaffold() const {
    validate("scaffold", false);
    SCAFFDIFF_CHECK(anchor_index >= 0 && anchor_index < size(),
                    "scaffold: anchor index ", anchor_index,
                    " outside [0,", size(), ")");
  }
};

/// Pocket plus per-atom conservation scores in [0,1].
struct AugmentedPocket {
  Pocket pocket;
  Tensor conservation;  // N_P x 1

  void validate() const {
    pocket.validate("pocket", true);
    SCAFFDIFF_CHECK(conservation.cols() == 1 &&
                        conservation.rows() == pocket.size(),
                    "conservation must be N_P x 1");
    for (int64_t i = 0; i < conservation.rows(); ++i) {
      const double c = conservation.at(i, 0);
      SCAFFDIFF_CHECK(c >= 0.0 && c <= 1.0, "conservation score ", c,
                      " at atom ", i, " outside [0,1]");
    }
  }
};

struct ComplexTuple {
  Pocket pocket;
  Scaffold scaffold;
  std::optional<RGroup> rgroup;     // absent at sampling time
  std::optional<double> affinity;   // label for affinity pretraining
  std::optional<int64_t> pocket_id; // provenance of generated records

  void validate() const {
    pocket.validate("pocket", true);
    scaffold.validate_scaffold();
    if (rgroup) {
      rgroup->validate("rgroup", false);
      // No shared atoms: an R-group atom sitting exactly on a scaffold atom
      // would alias the same physical atom.
      for (int64_t i = 0; i < rgroup->size(); ++i) {
        for (int64_t j = 0; j < scaffold.size(); ++j) {
          double d2 = 0.0;
          for (int64_t k = 0; k < 3; ++k) {
            const double d = rgroup->coords.at(i, k) - scaffold.coords.at(j, k);
            d2 += d * d;
          }
          SCAFFDIFF_CHECK(d2 > 1e-12, "rgroup atom ", i,
                          " coincides with scaffold atom ", j);
        }
      }
    }
    if (affinity)
      SCAFFDIFF_CHECK(std::isfinite(*affinity), "non-finite affinity label");
  }
};

inline std::array<double, 3> center_of_mass(const Tensor &coords) {
  std::array<double, 3> com = {0.0, 0.0, 0.0};
  for (int64_t i = 0; i < coords.rows(); ++i)
    for (int64_t k = 0; k < 3; ++k) com[static_cast<size_t>(k)] += coords.at(i, k);
  for (auto &v : com) v /= static_cast<double>(coords.rows());
  return com;
}

inline void translate(Tensor &coords, const std::array<double, 3> &delta) {
  for (int64_t i = 0; i < coords.rows(); ++i)
    for (int64_t k = 0; k < 3; ++k) coords.at(i, k) += delta[static_cast<size_t>(k)];
}

/// Rigidly translates the whole tuple so the scaffold center of mass sits at
/// the origin. Returns the removed offset (add it back to invert).
inline std::pair<ComplexTuple, std::array<double, 3>> center_on_scaffold(
    const ComplexTuple &tuple) {
  SCAFFDIFF_CHECK(tuple.scaffold.size() >= 1,
                  "center_on_scaffold: empty scaffold");
  const auto com = center_of_mass(tuple.scaffold.coords);
  const std::array<double, 3> neg = {-com[0], -com[1], -com[2]};
  ComplexTuple out = tuple;
  translate(out.scaffold.coords, neg);
  translate(out.pocket.coords, neg);
  if (out.rgroup) translate(out.rgroup->coords, neg);
  return {std::move(out), com};
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_DOMAIN_HPP_
