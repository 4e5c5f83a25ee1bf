//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_DATASET_IO_HPP_
#define SCAFFDIFF_DATASET_IO_HPP_

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scaffdiff/domain.hpp"

namespace scaffdiff {

// Dataset files carry one JSON record per line:
//   {"pocket": {"coords": [[x,y,z],...], "types": ["C",...],
//               "residue_id": [...]},
//    "scaffold": {"coords": ..., "types": ..., "anchor": i},
//    "rgroup": {...} | null, "affinity": f | null}
// Generated outputs may additionally carry "pocket_id".

namespace detail {

inline PointSet pointset_from_json(const nlohmann::json &j,
                                   const std::string &what, bool is_pocket,
                                   size_t line_no) {
  auto fail = [&](const std::string &msg) -> void {
    throw Error("line " + std::to_string(line_no) + ": " + what + ": " + msg);
  };
  if (!j.is_object()) fail("expected an object");
  if (!j.contains("coords") || !j.contains("types"))
    fail("missing 'coords' or 'types'");
  const auto &coords = j.at("coords");
  const auto &types = j.at("types");
  if (!coords.is_array() || coords.empty()) fail("'coords' must be a nonempty array");
  if (!types.is_array() || types.size() != coords.size())
    fail("'types' length does not match 'coords'");

  const int64_t n = static_cast<int64_t>(coords.size());
  PointSet ps;
  ps.coords = Tensor({n, 3});
  ps.types = Tensor({n, kAtomTypes});
  for (int64_t i = 0; i < n; ++i) {
    const auto &row = coords.at(static_cast<size_t>(i));
    if (!row.is_array() || row.size() != 3)
      fail("coords[" + std::to_string(i) + "] must hold 3 numbers");
    for (int64_t k = 0; k < 3; ++k)
      ps.coords.at(i, k) = row.at(static_cast<size_t>(k)).get<double>();
    const auto &sym = types.at(static_cast<size_t>(i));
    if (!sym.is_string()) fail("types[" + std::to_string(i) + "] must be a string");
    try {
      ps.types.at(i, element_index(sym.get<std::string>())) = 1.0;
    } catch (const Error &e) {
      fail(e.what());
    }
  }

  if (is_pocket) {
    if (!j.contains("residue_id")) fail("missing 'residue_id'");
    const auto &rid = j.at("residue_id");
    if (!rid.is_array() || rid.size() != static_cast<size_t>(n))
      fail("'residue_id' length does not match atoms");
    for (const auto &r : rid) ps.residue_id.push_back(r.get<int64_t>());
  } else {
    ps.residue_id.assign(static_cast<size_t>(n), -1);
  }
  return ps;
}

inline nlohmann::json pointset_to_json(const PointSet &ps, bool is_pocket) {
  nlohmann::json j;
  auto coords = nlohmann::json::array();
  auto types = nlohmann::json::array();
  for (int64_t i = 0; i < ps.size(); ++i) {
    coords.push_back({ps.coords.at(i, 0), ps.coords.at(i, 1), ps.coords.at(i, 2)});
    types.push_back(ps.element(i));
  }
  j["coords"] = std::move(coords);
  j["types"] = std::move(types);
  if (is_pocket) j["residue_id"] = ps.residue_id;
  return j;
}

}  // namespace detail

inline ComplexTuple tuple_from_json(const nlohmann::json &j, size_t line_no) {
  auto fail = [&](const std::string &msg) -> void {
    throw Error("line " + std::to_string(line_no) + ": " + msg);
  };
  if (!j.is_object()) fail("record must be a JSON object");
  static const std::vector<std::string> known = {"pocket", "scaffold", "rgroup",
                                                 "affinity", "pocket_id"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto &k : known) ok = ok || k == it.key();
    if (!ok) fail("unknown record key '" + it.key() + "'");
  }
  if (!j.contains("pocket") || !j.contains("scaffold"))
    fail("record needs 'pocket' and 'scaffold'");

  ComplexTuple tuple;
  tuple.pocket = detail::pointset_from_json(j.at("pocket"), "pocket", true, line_no);
  const auto &sj = j.at("scaffold");
  static_cast<PointSet &>(tuple.scaffold) =
      detail::pointset_from_json(sj, "scaffold", false, line_no);
  if (!sj.contains("anchor")) fail("scaffold: missing 'anchor'");
  tuple.scaffold.anchor_index = sj.at("anchor").get<int64_t>();

  if (j.contains("rgroup") && !j.at("rgroup").is_null())
    tuple.rgroup = detail::pointset_from_json(j.at("rgroup"), "rgroup", false, line_no);
  if (j.contains("affinity") && !j.at("affinity").is_null())
    tuple.affinity = j.at("affinity").get<double>();
  if (j.contains("pocket_id") && !j.at("pocket_id").is_null())
    tuple.pocket_id = j.at("pocket_id").get<int64_t>();

  try {
    tuple.validate();
  } catch (const Error &e) {
    fail(e.what());
  }
  return tuple;
}

inline nlohmann::json tuple_to_json(const ComplexTuple &tuple) {
  nlohmann::json j;
  j["pocket"] = detail::pointset_to_json(tuple.pocket, true);
  j["scaffold"] = detail::pointset_to_json(tuple.scaffold, false);
  j["scaffold"]["anchor"] = tuple.scaffold.anchor_index;
  j["rgroup"] = tuple.rgroup ? detail::pointset_to_json(*tuple.rgroup, false)
                             : nlohmann::json();
  j["affinity"] = tuple.affinity ? nlohmann::json(*tuple.affinity)
                                 : nlohmann::json();
  if (tuple.pocket_id) j["pocket_id"] = *tuple.pocket_id;
  return j;
}

/// Reads a JSON-lines dataset; malformed records are rejected with their
/// line number. An empty file yields an empty list.
inline std::vector<ComplexTuple> load_dataset(const std::string &path) {
  std::ifstream in(path);
  SCAFFDIFF_CHECK(in.good(), "cannot open dataset file '", path, "'");
  std::vector<ComplexTuple> tuples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw Error("line " + std::to_string(line_no) + ": JSON parse error: " +
                  e.what());
    }
    tuples.push_back(tuple_from_json(j, line_no));
  }
  return tuples;
}

inline void save_dataset(const std::string &path,
                         const std::vector<ComplexTuple> &tuples) {
  std::ofstream out(path);
  SCAFFDIFF_CHECK(out.good(), "cannot write dataset file '", path, "'");
  for (const auto &t : tuples) out << tuple_to_json(t).dump() << "\n";
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_DATASET_IO_HPP_
