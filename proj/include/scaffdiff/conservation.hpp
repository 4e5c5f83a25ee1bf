//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_CONSERVATION_HPP_
#define SCAFFDIFF_CONSERVATION_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scaffdiff/domain.hpp"

namespace scaffdiff {

inline bool is_amino_letter(char c) {
  static const std::string aa = "ACDEFGHIKLMNPQRSTVWY";
  return aa.find(c) != std::string::npos;
}

/// Multiple sequence alignment over the 20 amino acids plus gap.
/// Row 0 is the query; all rows share the query's match columns.
struct Msa {
  std::vector<std::string> ids;
  std::vector<std::string> rows;

  size_t n_rows() const { return rows.size(); }
  size_t n_cols() const { return rows.empty() ? 0 : rows[0].size(); }
  const std::string &query() const { return rows[0]; }
};

/// Per query-residue conservation scores in [0,1].
struct ConservationTrack {
  std::vector<double> scores;
};

/// Parses HH-suite A3M text: ">" headers, uppercase/'-' match columns,
/// lowercase (and '.') insertions that are stripped before aligning.
inline Msa parse_a3m(const std::string &text) {
  SCAFFDIFF_CHECK(!text.empty(), "parse_a3m: empty input");

  // Collect (id, raw sequence) blocks; sequences may wrap over lines.
  std::vector<std::string> ids, raw;
  std::string line;
  size_t pos = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '>') {
      ids.push_back(line.substr(1));
      raw.emplace_back();
      saw_header = true;
    } else if (saw_header) {
      raw.back() += line;
    } else {
      // Headerless input: one sequence per line.
      ids.push_back("seq" + std::to_string(ids.size()));
      raw.push_back(line);
    }
  }
  SCAFFDIFF_CHECK(!raw.empty(), "parse_a3m: no sequences found");

  Msa msa;
  msa.ids = std::move(ids);
  for (size_t r = 0; r < raw.size(); ++r) {
    std::string aligned;
    for (size_t c = 0; c < raw[r].size(); ++c) {
      const char ch = raw[r][c];
      if (std::islower(static_cast<unsigned char>(ch)) || ch == '.')
        continue;  // insertion relative to the query
      if (ch == '-' || is_amino_letter(ch)) {
        aligned.push_back(ch);
        continue;
      }
      throw Error("parse_a3m: illegal character '" + std::string(1, ch) +
                  "' at row " + std::to_string(r + 1) + ", col " +
                  std::to_string(c + 1));
    }
    msa.rows.push_back(std::move(aligned));
  }
  for (size_t r = 1; r < msa.rows.size(); ++r)
    SCAFFDIFF_CHECK(msa.rows[r].size() == msa.rows[0].size(),
                    "parse_a3m: ragged alignment at row ", r + 1, ": length ",
                    msa.rows[r].size(), " != query length ",
                    msa.rows[0].size(), " (col ",
                    std::min(msa.rows[r].size(), msa.rows[0].size()) + 1, ")");
  return msa;
}

/// score_i = (1 - H_i/ln20) * (1 - gapfrac_i) with H_i the Shannon entropy
/// of the column's amino-acid distribution, gaps excluded from the
/// distribution but counted in gapfrac. Columns where the query itself is a
/// gap are dropped so the track indexes query residues.
inline ConservationTrack column_conservation(const Msa &msa) {
  SCAFFDIFF_CHECK(msa.n_rows() >= 1, "column_conservation: empty MSA");
  static const double ln20 = std::log(20.0);
  ConservationTrack track;
  for (size_t col = 0; col < msa.n_cols(); ++col) {
    if (msa.query()[col] == '-') continue;
    std::map<char, int64_t> counts;
    int64_t gaps = 0;
    for (const auto &row : msa.rows) {
      if (row[col] == '-')
        ++gaps;
      else
        ++counts[row[col]];
    }
    const int64_t total = static_cast<int64_t>(msa.n_rows());
    const int64_t present = total - gaps;
    double entropy = 0.0;
    for (const auto &[aa, n] : counts) {
      const double p = static_cast<double>(n) / static_cast<double>(present);
      entropy -= p * std::log(p);
    }
    const double gapfrac = static_cast<double>(gaps) / static_cast<double>(total);
    double score = present == 0 ? 0.0 : (1.0 - entropy / ln20) * (1.0 - gapfrac);
    track.scores.push_back(std::clamp(score, 0.0, 1.0));
  }
  return track;
}

/// Broadcasts residue-level scores to pocket atoms via residue_id.
inline AugmentedPocket augment_pocket(
    const Pocket &pocket, const ConservationTrack &track,
    const std::map<int64_t, int64_t> &residue_index_map) {
  AugmentedPocket out;
  out.pocket = pocket;
  out.conservation = Tensor({pocket.size(), 1});
  for (int64_t i = 0; i < pocket.size(); ++i) {
    const int64_t rid = pocket.residue_id[static_cast<size_t>(i)];
    auto it = residue_index_map.find(rid);
    SCAFFDIFF_CHECK(it != residue_index_map.end(),
                    "augment_pocket: residue ", rid,
                    " has no conservation mapping");
    SCAFFDIFF_CHECK(it->second >= 0 &&
                        it->second < static_cast<int64_t>(track.scores.size()),
                    "augment_pocket: residue ", rid, " maps to track index ",
                    it->second, " outside [0,", track.scores.size(), ")");
    out.conservation.at(i, 0) = track.scores[static_cast<size_t>(it->second)];
  }
  out.validate();
  return out;
}

/// Pocket with all-zero conservation, for runs without alignments.
inline AugmentedPocket augment_pocket_zero(const Pocket &pocket) {
  AugmentedPocket out;
  out.pocket = pocket;
  out.conservation = Tensor({pocket.size(), 1});
  return out;
}

/// Residues whose score strictly exceeds the threshold.
inline std::set<int64_t> conserved_residues(const AugmentedPocket &aug,
                                            double threshold = 0.4) {
  std::set<int64_t> out;
  for (int64_t i = 0; i < aug.pocket.size(); ++i)
    if (aug.conservation.at(i, 0) > threshold)
      out.insert(aug.pocket.residue_id[static_cast<size_t>(i)]);
  return out;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_CONSERVATION_HPP_
