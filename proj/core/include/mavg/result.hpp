#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mavg {

// Everything a pricing run reports. Optional fields stay empty when the
// engine has no such knob (e.g. the chain engine has no path count).
struct PriceResult {
  double price = 0.0;
  double ci_radius = 0.0;  // 95% half-width; 0 when the method is deterministic
  long long n_paths = 0;   // Monte Carlo paths behind price (0 = deterministic)
  double runtime_s = 0.0;
  std::vector<std::string> warnings;

  std::string model;   // "bs", "cs", "rbergomi"
  std::string engine;  // "gprghq", "ls", "bc"
  int window = 0;      // M
  int steps = 0;       // N
  double maturity = 0.0;

  std::optional<long long> train_paths;  // P
  std::optional<int> quad_order;         // Q
  std::optional<int> degree;             // LS polynomial degree
  std::optional<int> feature_window;     // J (rough Bergomi conditioning depth)
  std::optional<unsigned long long> seed;
};

}  // namespace mavg
