#pragma once

// Builders for the differential mechanisms studied here. Every builder
// returns a finalized graph with an empty diagnostics list. Rigid couplings
// use sign +1: coupled shafts are taken to share one orientation.

#include <string_view>
#include <vector>

#include "gearnet/mechanism.hpp"

namespace gearnet {

struct GearParams {
  /// Worm reduction from the input to each first-stage ring.
  double k = 20.0;
  /// Step-up from each second-stage ring to its output.
  double j = 2.0;
  double input_inertia = 1e-3;
  /// Rings R1..R6 and first-stage side gears S1..S6.
  double ring_inertia = 0.0;
  double inner_side_inertia = 0.0;
  /// Second-stage side gears S7..S12; identical by construction.
  double side_inertia = 1e-4;
  double output_inertia = 0.0;
};

/// Throws ValidationError unless k > 0, j > 0 and all inertias are >= 0.
void check(const GearParams& params);

/// Ring R and sides S1, S2 joined by one differential; all three external.
MechanismGraph build_two_output_diff(double ring_inertia = 1.0, double side_inertia = 1.0);

/// Three-output open differential, 22 shafts and 18 rows:
///   W1..W3  worm pairs I -> R1..R3 (ratio k)
///   D1..D3  differentials R1:{S1,S2}, R2:{S3,S4}, R3:{S5,S6}
///   C1..C6  couplings S1-S7, S2-S12, S3-S8, S4-S9, S5-S11, S6-S10
///   D4..D6  differentials R4:{S7,S8}, R5:{S9,S10}, R6:{S11,S12}
///   J1..J3  fixed ratios R4 -> O1, R5 -> O2, R6 -> O3 (ratio j)
/// External shafts are I, O1, O2, O3.
MechanismGraph build_3ood(const GearParams& params = {});

/// Earlier three-output layout: three worm-driven differentials whose
/// adjacent side gears are coupled into X1 (SG2, SG3), X2 (SG4, SG5) and
/// X3 (SG6, SG1). External shafts are I, X1, X2, X3.
MechanismGraph build_initial_design(const GearParams& params = {});

struct TwoTwoParams {
  double root_inertia = 1.0;
  double intermediate_inertia = 1.0;
  double leaf_inertia = 1.0;
};

/// Root differential (ring "root", sides L and R) whose sides are the rings
/// of two child differentials with outputs A, B (under L) and C, D (under R).
MechanismGraph build_2_2d(const TwoTwoParams& params = {});

/// Three planetary stages in series with rings X, Y, Z as outputs:
///   P1 sun T1, ring X, carrier I
///   P2 sun T2, ring Y, carrier T1
///   P3 sun T1, ring Z, carrier T2
/// Unit inertia on every shaft. Throws ValidationError for rho <= 0.
MechanismGraph build_multi_axle(double rho = 2.0, double inertia = 1.0);

/// Names accepted by build_named.
std::vector<std::string_view> builder_names();

/// Instantiates "2od", "3ood", "initial", "2-2d" or "multi-axle".
MechanismGraph build_named(std::string_view name, const GearParams& params = {});

}  // namespace gearnet
