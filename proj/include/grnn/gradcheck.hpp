#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grnn {

struct GradCheckRow {
  std::string config;
  double max_rel_error;
  int num_params;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  double max_rel_error = 0.0;
  double seconds = 0.0;

  bool passed(double threshold = 1e-5) const { return max_rel_error < threshold; }
};

/// Sweeps the analytic gradient of the full training objective against
/// central finite differences (step 1e-6) over random configurations:
/// 20-vertex graphs with ~60 edges, d in {1,3,5}, K in {1,2,4}, both cell
/// kinds, both head/loss pairings, with and without weight decay. Every
/// parameter coordinate is checked.
GradCheckReport run_gradcheck(std::uint64_t seed);

}  // namespace grnn
