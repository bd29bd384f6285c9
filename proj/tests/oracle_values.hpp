#pragma once

// Reference values from tests/oracles/compute_oracles.py (mpmath, 40 digits).
// They share no code with the library. Regenerate with that script.

namespace oracle {

// ∫₀¹ dt/√(t(1−t)(400−16t)) = (π/20)·₂F₁(1/2,1/2;1|0.04)
inline constexpr double kEulerIntegralLambda20 = 0.15868678474541662373;
inline constexpr double kRootSmallL13X1 = -0.062746066806228228495;
inline constexpr double kRootLargeL13X1 = -15.937253933193771772;
inline constexpr double kRootSmallLm6Xm2 = -0.79175608052620054072;
inline constexpr double kRootLargeLm6Xm2 = -20.208243919473799459;
inline constexpr double kHyp2F1HalfAtHalf = 1.180340599016096226;
inline constexpr double kHyp2F1ThirdAtL13 = 1.4458436392661296301;
inline constexpr double kMuLambda13 = 0.15767078078675458763;
inline constexpr double kDrDlambda20 = 0.050511572391185255255;
inline constexpr double kDrDlambda20Quad = 0.050511572391185255255;
inline constexpr double kDpDlambda13 = 0.068849697107910934768;
inline constexpr double kX0Lm6 = 0.16666666666666666667;
inline constexpr double kX1Lm6 = 0.1909830056250525759;
inline constexpr double kX2Lm6 = 1.3090169943749474241;
inline constexpr double kX0L16 = -0.0625;
inline constexpr double kX1L16 = -3.9364916731037084426;
inline constexpr double kX2L16 = -0.06350832689629155741;
inline constexpr double kZ1Lm6 = 0.21132486540518711775;
inline constexpr double kZ2Lm6 = 0.25706586412167716091;
inline constexpr double kZ3Lm6 = 0.74293413587832283909;
inline constexpr double kZ4Lm6 = 0.78867513459481288225;
inline constexpr double kMeasureOnePlusXPlusY = 0.32306594721945051409;
inline constexpr double kR5 = 1.5079826022795133882;
inline constexpr double kRm6 = 1.7273117540142897766;
inline constexpr double kR20 = 2.9906749573234868881;
inline constexpr double kP13 = 2.6929502193690791973;
inline constexpr double kPm6 = 1.198701419402047373;
inline constexpr double kQ13 = 2.6228677651650680982;
inline constexpr double kQm6 = 1.7273117540142897766;

}  // namespace oracle
