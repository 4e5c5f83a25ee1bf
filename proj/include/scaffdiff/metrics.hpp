//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_METRICS_HPP_
#define SCAFFDIFF_METRICS_HPP_

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "scaffdiff/conservation.hpp"
#include "scaffdiff/molgraph.hpp"

namespace scaffdiff {

// ---------------------------------------------------------------------------
// Validity

struct ValidityConfig {
  double anchor_min = 0.9;   // R-group must bond to the anchor atom
  double anchor_max = 2.0;
  double bond_tol = 0.4;
  double clash_dist = 0.8;
};

struct ValidityCheck {
  bool valid = true;
  std::string reason;
};

namespace detail {

inline double atom_dist(const Tensor &a, int64_t i, const Tensor &b,
                        int64_t j) {
  double d2 = 0.0;
  for (int64_t k = 0; k < 3; ++k) {
    const double d = a.at(i, k) - b.at(j, k);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

inline PointSet merge_molecule(const Scaffold &scaffold, const RGroup &rgroup) {
  const int64_t n = scaffold.size() + rgroup.size();
  PointSet mol;
  mol.coords = Tensor({n, 3});
  mol.types = Tensor({n, kAtomTypes});
  for (int64_t i = 0; i < scaffold.size(); ++i) {
    for (int64_t k = 0; k < 3; ++k) mol.coords.at(i, k) = scaffold.coords.at(i, k);
    for (int64_t k = 0; k < kAtomTypes; ++k)
      mol.types.at(i, k) = scaffold.types.at(i, k);
  }
  for (int64_t i = 0; i < rgroup.size(); ++i) {
    const int64_t r = scaffold.size() + i;
    for (int64_t k = 0; k < 3; ++k) mol.coords.at(r, k) = rgroup.coords.at(i, k);
    for (int64_t k = 0; k < kAtomTypes; ++k)
      mol.types.at(r, k) = rgroup.types.at(i, k);
  }
  mol.residue_id.assign(static_cast<size_t>(n), -1);
  return mol;
}

}  // namespace detail

/// Structural feasibility of one decorated molecule against the reference
/// scaffold: scaffold preserved, R-group bonded to the anchor, one connected
/// component, no clashes, valences within limits.
inline ValidityCheck check_validity(const ComplexTuple &molecule,
                                    const Scaffold &reference,
                                    const ValidityConfig &cfg = {}) {
  auto fail = [](std::string why) {
    return ValidityCheck{false, std::move(why)};
  };
  if (!molecule.rgroup) return fail("no R-group");
  const Scaffold &s = molecule.scaffold;
  if (s.size() != reference.size() || s.anchor_index != reference.anchor_index)
    return fail("scaffold changed");
  for (int64_t i = 0; i < s.size(); ++i) {
    for (int64_t k = 0; k < 3; ++k)
      if (s.coords.at(i, k) != reference.coords.at(i, k))
        return fail("scaffold changed");
    for (int64_t k = 0; k < kAtomTypes; ++k)
      if (s.types.at(i, k) != reference.types.at(i, k))
        return fail("scaffold changed");
  }

  const RGroup &r = *molecule.rgroup;
  bool anchored = false;
  for (int64_t i = 0; i < r.size() && !anchored; ++i) {
    const double d =
        detail::atom_dist(r.coords, i, s.coords, s.anchor_index);
    anchored = d >= cfg.anchor_min && d <= cfg.anchor_max;
  }
  if (!anchored) return fail("R-group not bonded to anchor");

  const PointSet mol = detail::merge_molecule(s, r);
  for (int64_t i = 0; i < mol.size(); ++i)
    for (int64_t j = i + 1; j < mol.size(); ++j)
      if (detail::atom_dist(mol.coords, i, mol.coords, j) < cfg.clash_dist)
        return fail("atom clash");

  const MolGraph g = infer_bonds(mol, cfg.bond_tol);
  std::vector<bool> reached(static_cast<size_t>(mol.size()), false);
  std::vector<int64_t> stack = {s.anchor_index};
  reached[static_cast<size_t>(s.anchor_index)] = true;
  while (!stack.empty()) {
    const int64_t v = stack.back();
    stack.pop_back();
    for (int64_t u : g.adj[static_cast<size_t>(v)])
      if (!reached[static_cast<size_t>(u)]) {
        reached[static_cast<size_t>(u)] = true;
        stack.push_back(u);
      }
  }
  for (bool ok : reached)
    if (!ok) return fail("disconnected bond graph");

  for (int64_t i = 0; i < g.size(); ++i)
    if (static_cast<int64_t>(g.adj[static_cast<size_t>(i)].size()) >
        max_valence(g.elements[static_cast<size_t>(i)]))
      return fail("valence exceeded at atom " + std::to_string(i));
  return {};
}

/// Fraction of valid molecules; an empty list counts as 0.0 with a warning.
inline double validity(const std::vector<ComplexTuple> &molecules,
                       const Scaffold &reference,
                       const ValidityConfig &cfg = {},
                       std::vector<ValidityCheck> *checks = nullptr) {
  if (molecules.empty()) {
    std::cerr << "warning: validity over an empty molecule list is 0.0\n";
    return 0.0;
  }
  int64_t valid = 0;
  for (const auto &m : molecules) {
    ValidityCheck c = check_validity(m, reference, cfg);
    if (c.valid) ++valid;
    if (checks) checks->push_back(std::move(c));
  }
  return static_cast<double>(valid) / static_cast<double>(molecules.size());
}

// ---------------------------------------------------------------------------
// Uniqueness

/// Identity of a molecule = canonical form of its inferred bond graph
/// (elements + bonds; coordinates excluded).
inline std::string molecule_identity(const ComplexTuple &molecule,
                                     double bond_tol = 0.4) {
  SCAFFDIFF_CHECK(molecule.rgroup.has_value(),
                  "molecule_identity: no R-group");
  const PointSet mol =
      detail::merge_molecule(molecule.scaffold, *molecule.rgroup);
  return canonical_graph_string(infer_bonds(mol, bond_tol));
}

inline double uniqueness(const std::vector<ComplexTuple> &molecules,
                         double bond_tol = 0.4) {
  SCAFFDIFF_CHECK(!molecules.empty(), "uniqueness: empty molecule list");
  std::unordered_set<std::string> seen;
  for (const auto &m : molecules) seen.insert(molecule_identity(m, bond_tol));
  return static_cast<double>(seen.size()) /
         static_cast<double>(molecules.size());
}

// ---------------------------------------------------------------------------
// Interaction detection

enum class InteractionKind { hbond, hydrophobic, saltbridge };

inline std::string to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::hbond: return "hbond";
    case InteractionKind::hydrophobic: return "hydrophobic";
    case InteractionKind::saltbridge: return "saltbridge";
  }
  return "?";
}

struct InteractionRecord {
  InteractionKind kind;
  int64_t ligand_atom = 0;
  int64_t pocket_atom = 0;
  int64_t residue_id = 0;
  double distance = 0.0;
  bool conserved = false;

  bool operator==(const InteractionRecord &o) const {
    return kind == o.kind && ligand_atom == o.ligand_atom &&
           pocket_atom == o.pocket_atom && residue_id == o.residue_id &&
           conserved == o.conserved && std::fabs(distance - o.distance) < 1e-9;
  }
};

struct InteractionConfig {
  double hbond_max = 3.5;
  double hydrophobic_max = 4.0;
  double saltbridge_max = 4.0;
  double bond_tol = 0.4;
  double conserved_threshold = 0.4;
};

namespace detail {

/// Oxygens that sit in a carboxylate-like group: O bonded to a carbon that
/// carries at least two oxygens.
inline std::vector<bool> carboxylate_oxygens(const MolGraph &g) {
  std::vector<bool> out(static_cast<size_t>(g.size()), false);
  for (int64_t c = 0; c < g.size(); ++c) {
    if (g.elements[static_cast<size_t>(c)] != "C") continue;
    std::vector<int64_t> oxy;
    for (int64_t u : g.adj[static_cast<size_t>(c)])
      if (g.elements[static_cast<size_t>(u)] == "O") oxy.push_back(u);
    if (oxy.size() >= 2)
      for (int64_t o : oxy) out[static_cast<size_t>(o)] = true;
  }
  return out;
}

}  // namespace detail

/// Geometric non-covalent contacts between R-group and pocket atoms:
///   hbond        N/O -- N/O pairs within hbond_max
///   hydrophobic  C -- C pairs within hydrophobic_max
///   saltbridge   pocket N vs ligand carboxylate O (and the symmetric
///                pocket carboxylate O vs ligand N) within saltbridge_max
/// Exhaustive over atom pairs; records ordered by (ligand, pocket, kind).
inline std::vector<InteractionRecord> detect_interactions(
    const AugmentedPocket &pocket, const RGroup &rgroup,
    const InteractionConfig &cfg = {}) {
  SCAFFDIFF_CHECK(pocket.pocket.coords.all_finite() &&
                      rgroup.coords.all_finite(),
                  "detect_interactions: non-finite coordinates");
  const MolGraph lig_graph = infer_bonds(rgroup, cfg.bond_tol);
  const MolGraph poc_graph = infer_bonds(pocket.pocket, cfg.bond_tol);
  const std::vector<bool> lig_carbox = detail::carboxylate_oxygens(lig_graph);
  const std::vector<bool> poc_carbox = detail::carboxylate_oxygens(poc_graph);

  std::vector<InteractionRecord> records;
  for (int64_t li = 0; li < rgroup.size(); ++li) {
    const std::string le = rgroup.element(li);
    for (int64_t pi = 0; pi < pocket.pocket.size(); ++pi) {
      const std::string pe = pocket.pocket.element(pi);
      const double d =
          detail::atom_dist(rgroup.coords, li, pocket.pocket.coords, pi);
      const int64_t rid = pocket.pocket.residue_id[static_cast<size_t>(pi)];
      const bool conserved =
          pocket.conservation.at(pi, 0) > cfg.conserved_threshold;
      auto push = [&](InteractionKind kind) {
        records.push_back({kind, li, pi, rid, d, conserved});
      };

      const bool l_no = le == "N" || le == "O";
      const bool p_no = pe == "N" || pe == "O";
      if (l_no && p_no && d <= cfg.hbond_max) push(InteractionKind::hbond);
      if (le == "C" && pe == "C" && d <= cfg.hydrophobic_max)
        push(InteractionKind::hydrophobic);
      const bool lig_acid = le == "O" && lig_carbox[static_cast<size_t>(li)];
      const bool poc_acid = pe == "O" && poc_carbox[static_cast<size_t>(pi)];
      if (d <= cfg.saltbridge_max &&
          ((pe == "N" && lig_acid) || (le == "N" && poc_acid)))
        push(InteractionKind::saltbridge);
    }
  }
  std::sort(records.begin(), records.end(),
            [](const InteractionRecord &a, const InteractionRecord &b) {
              if (a.ligand_atom != b.ligand_atom)
                return a.ligand_atom < b.ligand_atom;
              if (a.pocket_atom != b.pocket_atom)
                return a.pocket_atom < b.pocket_atom;
              return static_cast<int>(a.kind) < static_cast<int>(b.kind);
            });
  return records;
}

/// Mean count of contacts with residues whose conservation score strictly
/// exceeds the threshold, plus the per-molecule counts.
inline std::pair<double, std::vector<int64_t>> conserved_interaction_stats(
    const AugmentedPocket &pocket, const std::vector<RGroup> &molecules,
    double threshold = 0.4) {
  InteractionConfig cfg;
  cfg.conserved_threshold = threshold;
  std::vector<int64_t> counts;
  double total = 0.0;
  for (const auto &mol : molecules) {
    int64_t n = 0;
    for (const auto &rec : detect_interactions(pocket, mol, cfg))
      if (rec.conserved) ++n;
    counts.push_back(n);
    total += static_cast<double>(n);
  }
  const double mean =
      molecules.empty() ? 0.0 : total / static_cast<double>(molecules.size());
  return {mean, counts};
}

// ---------------------------------------------------------------------------
// Reports and model comparison

struct PocketEval {
  int64_t pocket_id = 0;
  int64_t n_molecules = 0;
  double validity = 0.0;
  double uniqueness = 0.0;
  double mean_interactions = 0.0;
  double mean_conserved_interactions = 0.0;
};

struct EvalReport {
  double validity = 0.0;
  double uniqueness = 0.0;
  double mean_interactions = 0.0;
  double mean_conserved_interactions = 0.0;
  std::vector<PocketEval> pockets;
};

struct WinTie {
  double a_wins = 0.0;
  double b_wins = 0.0;
  double ties = 0.0;
};

/// Fraction of pockets where report A strictly beats report B per metric;
/// ties reported separately. The two reports must cover identical pockets.
inline std::map<std::string, WinTie> compare_models(const EvalReport &a,
                                                    const EvalReport &b) {
  SCAFFDIFF_CHECK(a.pockets.size() == b.pockets.size(),
                  "compare_models: reports cover ", a.pockets.size(), " vs ",
                  b.pockets.size(), " pockets");
  std::map<int64_t, const PocketEval *> bmap;
  for (const auto &p : b.pockets) bmap[p.pocket_id] = &p;

  std::map<std::string, WinTie> out;
  auto tally = [&](const std::string &metric, double va, double vb) {
    WinTie &wt = out[metric];
    const double w = 1.0 / static_cast<double>(a.pockets.size());
    if (va > vb)
      wt.a_wins += w;
    else if (vb > va)
      wt.b_wins += w;
    else
      wt.ties += w;
  };
  for (const auto &pa : a.pockets) {
    auto it = bmap.find(pa.pocket_id);
    SCAFFDIFF_CHECK(it != bmap.end(), "compare_models: pocket ",
                    pa.pocket_id, " missing from second report");
    const PocketEval &pb = *it->second;
    tally("validity", pa.validity, pb.validity);
    tally("uniqueness", pa.uniqueness, pb.uniqueness);
    tally("interactions", pa.mean_interactions, pb.mean_interactions);
    tally("conserved_interactions", pa.mean_conserved_interactions,
          pb.mean_conserved_interactions);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pose export

/// Standard XYZ block: atom count, comment, one "El x y z" line per atom.
inline void write_xyz(std::ostream &os, const PointSet &atoms,
                      const std::string &comment) {
  os << atoms.size() << "\n" << comment << "\n";
  os.precision(6);
  os << std::fixed;
  for (int64_t i = 0; i < atoms.size(); ++i)
    os << atoms.element(i) << " " << atoms.coords.at(i, 0) << " "
       << atoms.coords.at(i, 1) << " " << atoms.coords.at(i, 2) << "\n";
}

inline PointSet molecule_atoms(const ComplexTuple &molecule) {
  SCAFFDIFF_CHECK(molecule.rgroup.has_value(), "molecule has no R-group");
  return detail::merge_molecule(molecule.scaffold, *molecule.rgroup);
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_METRICS_HPP_
