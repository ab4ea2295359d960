#pragma once

#include <vector>

namespace febench {

// Electron counts per Rydberg-frequency bin. Bins are uniform with centres f_ry
// (Hz); a count is taken as spread evenly over its bin.
struct DetuningDistribution {
  std::vector<double> f_ry;    // bin centres, Hz
  std::vector<double> counts;  // electrons per bin
  double bin_width = 0.0;      // Hz; 0 = point masses at f_ry
  double total_electrons = 0.0;
  double f_ry_peak = 0.0;  // Hz, bin with the most electrons

  void validate() const;
  double sum() const;
  // single bin holding n electrons
  static DetuningDistribution delta(double f, double n, double bin_width = 0.0);
};

// Scale all counts (e.g. a reduced electron density).
DetuningDistribution scaled(const DetuningDistribution& d, double factor);
// Bin-wise sum of two distributions on the same grid.
DetuningDistribution combined(const DetuningDistribution& a, const DetuningDistribution& b);

}  // namespace febench
