#pragma once

#include "bosoncert/distributions.hpp"
#include "bosoncert/interferometer.hpp"

#include <vector>

namespace fixtures {

inline bosoncert::FockState first_modes(int m, int n) {
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < n; ++i) occ[static_cast<std::size_t>(i)] = 1;
  return bosoncert::FockState(occ);
}

// (40, 5) Haar device and its exact boson table, computed once per process.
inline const bosoncert::Interferometer& haar40() {
  static const bosoncert::Interferometer device = bosoncert::haar_unitary(40, 1);
  return device;
}
inline const bosoncert::OutcomeDistribution& haar40_boson() {
  static const bosoncert::OutcomeDistribution table =
      bosoncert::boson_distribution(haar40(), first_modes(40, 5));
  return table;
}

}  // namespace fixtures
