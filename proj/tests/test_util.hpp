#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "repro/dataset.hpp"
#include "repro/rng.hpp"

namespace testutil {

// Legal encoded row with a loosely label-dependent shape.
inline repro::Row RandomRow(repro::Rng& rng, bool repro_label) {
  repro::Row r{};
  r[0] = 1 + static_cast<double>(rng.Below(repro_label ? 40 : 60));
  for (std::size_t j = 1; j <= 5; ++j) {
    r[j] = rng.Bernoulli(repro_label ? 0.6 : 0.35) ? 1.0 : 0.0;
  }
  if (r[5] == 1.0) r[4] = 1.0;
  for (std::size_t j = 6; j < 9; ++j) r[j] = static_cast<double>(rng.Below(3)) - 1.0;
  return r;
}

inline repro::Dataset RandomDataset(repro::Rng& rng, std::size_t n_repro, std::size_t n_irrepro) {
  repro::Dataset ds;
  std::int64_t id = 1;
  for (std::size_t i = 0; i < n_repro + n_irrepro; ++i) {
    repro::LabeledExample e;
    const bool pos = i < n_repro;
    e.features = RandomRow(rng, pos);
    e.label = pos ? repro::Label::kReproducible : repro::Label::kIrreproducible;
    e.source_id = id++;
    ds.examples.push_back(e);
  }
  rng.Shuffle(ds.examples.begin(), ds.examples.end());
  return ds;
}

// Per-feature 2x2 or 3-level counts laid out deterministically: within each
// class, row i takes the value "true" when i < count.
struct MarginalCounts {
  int method[2], main[2], cls[2], parse[2], comp[2];
  int native_pos[2], native_neg[2];
};

inline MarginalCounts ReportedMarginals() {
  return MarginalCounts{{181, 48}, {148, 18}, {146, 34}, {137, 33}, {84, 1}, {82, 16}, {80, 30}};
}

// 270 reproducible + 87 irreproducible rows reconstructed from published
// per-class percentages. LOC follows a fixed ramp per class.
inline repro::Dataset ReconstructedFixture() {
  const auto m = ReportedMarginals();
  repro::Dataset ds;
  const int n[2] = {270, 87};
  std::int64_t id = 1;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n[c]; ++i) {
      repro::LabeledExample e;
      e.label = c == 0 ? repro::Label::kReproducible : repro::Label::kIrreproducible;
      e.source_id = id++;
      auto& r = e.features;
      r[0] = c == 0 ? 1 + (i * 7) % 64 : 1 + (i * 11) % 106;
      r[1] = i < m.method[c];
      r[2] = i < m.main[c];
      r[3] = i < m.cls[c];
      r[4] = i < m.parse[c];
      r[5] = i < m.comp[c];
      // rows [0, pos) are +1, [pos, pos+neg) are -1, the rest 0
      r[6] = i < m.native_pos[c] ? 1 : (i < m.native_pos[c] + m.native_neg[c] ? -1 : 0);
      r[7] = (i % 5 == 0) ? -1 : ((i % 7 == 0) ? 1 : 0);
      r[8] = (i % 6 == 0) ? 1 : ((i % 9 == 0) ? -1 : 0);
      ds.examples.push_back(e);
    }
  }
  return ds;
}

inline double Distance(const repro::Row& a, const repro::Row& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

}  // namespace testutil
