#pragma once

#include <array>

namespace bfpo {

/// Constants of the bi-factorial labeling family
///   g_I(win, lose) = B3 * (B1 * I_safe(win) - I_safe(lose) + B2).
/// Canonical mode pins B1 = 3, B3 = 1/2, B2 = -2*alpha, which makes the
/// label table (with the four safety cases ordered safe/unsafe win x lose)
///   (1) win safe, lose unsafe : 3/2 - alpha
///   (2) both safe             : 1 - alpha
///   (3) both unsafe           : -alpha
///   (4) win unsafe, lose safe : -1/2 - alpha
/// alpha shifts all four values; its sign is a free modeling choice (the
/// nonzero shift keeps case (3) away from zero).
struct LabelConfig {
  double b1 = 3.0;
  double b2 = -1.0;
  double b3 = 0.5;
  double alpha = 0.5;
  double tau = 1.0;
  bool canonical = true;

  static LabelConfig canonical_cfg(double alpha, double tau);
  static LabelConfig general(double b1, double b2, double b3, double alpha, double tau);
  void validate() const;
};

/// Label for an oriented pair: the more helpful response has safety label
/// `safe_hw`, the less helpful one `safe_hl`.
double label_hw_hl(int safe_hw, int safe_hl, const LabelConfig& cfg);

/// Orientation-free pairwise form over (I_help, I_safe(y), I_safe(y')).
/// Evaluated through the expanded polynomial, not by sorting into (win,
/// lose); the two routes agreeing is a test, not a definition. The term
/// grouping keeps the value exactly skew-symmetric in floating point:
/// swapping the pair negates every integer factor, and IEEE rounding
/// commutes with negation.
double label_pairwise(int i_help_first, int i_safe_first, int i_safe_second,
                      const LabelConfig& cfg);

/// The four case values (1)..(4) described on LabelConfig.
std::array<double, 4> label_table(const LabelConfig& cfg);

/// Constant added to every oriented label when the safety labels inside g_I
/// are shifted by p1 (win side) and p2 (lose side): B3 * (B1*p1 - p2).
double label_shift_offset(const LabelConfig& cfg, double p1, double p2);

}  // namespace bfpo
