#pragma once

// Binary field snapshots ("EMH1") and the trajectory CSV table. Snapshots are
// written atomically (tmp + rename) and round-trip bit exactly.

#include <string>
#include <vector>

#include "emhydro/fields.hpp"
#include "emhydro/lagrangian.hpp"

namespace emhydro::io {

inline constexpr uint32_t kSnapshotVersion = 1;

struct Snapshot {
  fields::SpinorField field;
  double time = 0.0;
  PhysicalConstants constants;
};

// layout: magic "EMH1" | u32 version | u32 nx ny nz | f64 dx dy dz | f64 time
// | f64 hbar c eps0 l | G_a as (re, im) f64 pairs, a-major, z-fastest
void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

// header check only; throws SnapshotError on bad magic/version/size
void validate_snapshot(const std::string& path);

// columns: label, t, q1..q3, theta1..theta3 (canonical ranges), qdot1..qdot3,
// thetadot1..thetadot3, S_weber, log_rho, flags
void write_trajectory_csv(const std::string& path,
                          const std::vector<lagrangian::Trajectory>& trajs);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace emhydro::io
