#include "bfpo/labeling.hpp"

#include <cmath>

#include "bfpo/errors.hpp"

namespace bfpo {

LabelConfig LabelConfig::canonical_cfg(double alpha, double tau) {
  LabelConfig cfg;
  cfg.b1 = 3.0;
  cfg.b2 = -2.0 * alpha;
  cfg.b3 = 0.5;
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.canonical = true;
  cfg.validate();
  return cfg;
}

LabelConfig LabelConfig::general(double b1, double b2, double b3, double alpha, double tau) {
  LabelConfig cfg{b1, b2, b3, alpha, tau, false};
  cfg.validate();
  return cfg;
}

void LabelConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
  if (!std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(b3) || !std::isfinite(alpha))
    throw InvalidInput("label constants must be finite");
  if (canonical && (b1 != 3.0 || b3 != 0.5 || b2 != -2.0 * alpha))
    throw InvalidInput("canonical label config requires b1=3, b3=1/2, b2=-2*alpha");
}

double label_hw_hl(int safe_hw, int safe_hl, const LabelConfig& cfg) {
  return cfg.b3 * (cfg.b1 * safe_hw - safe_hl + cfg.b2);
}

double label_pairwise(int i_help_first, int i_safe_first, int i_safe_second,
                      const LabelConfig& cfg) {
  // Expanded form
  //   (B1B3-B3) Ih sf + (B1B3-B3) Ih ss - B1B3 ss + B3 sf + 2 B2B3 Ih - B2B3
  // regrouped over integer factors in {-1,0,1}:
  //   B1B3 * u + B3 * v + B2B3 * w,
  //   u = Ih(sf+ss) - ss,  v = sf - Ih(sf+ss),  w = 2 Ih - 1.
  // Swapping the pair maps (u,v,w) -> (-u,-v,-w), so the float result
  // negates exactly.
  const int u = i_help_first * (i_safe_first + i_safe_second) - i_safe_second;
  const int v = i_safe_first - i_help_first * (i_safe_first + i_safe_second);
  const int w = 2 * i_help_first - 1;
  return (cfg.b1 * cfg.b3) * u + cfg.b3 * v + (cfg.b2 * cfg.b3) * w;
}

std::array<double, 4> label_table(const LabelConfig& cfg) {
  return {label_hw_hl(1, 0, cfg), label_hw_hl(1, 1, cfg), label_hw_hl(0, 0, cfg),
          label_hw_hl(0, 1, cfg)};
}

double label_shift_offset(const LabelConfig& cfg, double p1, double p2) {
  return cfg.b3 * (cfg.b1 * p1 - p2);
}

}  // namespace bfpo
