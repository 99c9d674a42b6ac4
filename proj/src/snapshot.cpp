#include "emhydro/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

namespace emhydro::io {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'H', '1'};

void put(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get(std::istream& is, void* p, size_t n) {
  if (!is.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) {
    throw SnapshotError("snapshot truncated");
  }
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& snap) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw SnapshotError("cannot open for writing: " + tmp);
    put(os, kMagic, 4);
    const uint32_t version = kSnapshotVersion;
    put(os, &version, 4);
    for (int a = 0; a < 3; ++a) {
      const uint32_t d = static_cast<uint32_t>(snap.field.grid.dims[a]);
      put(os, &d, 4);
    }
    for (int a = 0; a < 3; ++a) put(os, &snap.field.grid.spacing[a], 8);
    put(os, &snap.time, 8);
    put(os, &snap.constants.hbar, 8);
    put(os, &snap.constants.c, 8);
    put(os, &snap.constants.eps0, 8);
    put(os, &snap.constants.l, 8);
    for (int a = 0; a < 3; ++a) {
      put(os, snap.field.G[a].data(), snap.field.grid.size() * sizeof(fields::cplx));
    }
    if (!os) throw SnapshotError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open: " + path);
  char magic[4];
  get(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw SnapshotError("bad snapshot magic in " + path);
  }
  uint32_t version = 0;
  get(is, &version, 4);
  if (version != kSnapshotVersion) {
    throw SnapshotError("unsupported snapshot version in " + path);
  }
  Snapshot snap;
  for (int a = 0; a < 3; ++a) {
    uint32_t d = 0;
    get(is, &d, 4);
    snap.field.grid.dims[a] = static_cast<int>(d);
  }
  for (int a = 0; a < 3; ++a) get(is, &snap.field.grid.spacing[a], 8);
  snap.field.grid.validate();
  get(is, &snap.time, 8);
  get(is, &snap.constants.hbar, 8);
  get(is, &snap.constants.c, 8);
  get(is, &snap.constants.eps0, 8);
  get(is, &snap.constants.l, 8);
  snap.constants.validate();
  for (int a = 0; a < 3; ++a) {
    snap.field.G[a].resize(snap.field.grid.size());
    get(is, snap.field.G[a].data(), snap.field.grid.size() * sizeof(fields::cplx));
  }
  return snap;
}

void validate_snapshot(const std::string& path) {
  const Snapshot snap = read_snapshot(path);
  (void)snap;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<lagrangian::Trajectory>& trajs) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw SnapshotError("cannot open for writing: " + tmp);
    os << "label,t,q1,q2,q3,theta1,theta2,theta3,qdot1,qdot2,qdot3,"
          "thetadot1,thetadot2,thetadot3,S_weber,log_rho,flags\n";
    for (size_t i = 0; i < trajs.size(); ++i) {
      for (const auto& s : trajs[i].samples) {
        int wb = 0, wg = 0;
        const so3::EulerAngles th = lagrangian::Trajectory::canonical(s.theta, wb, wg);
        os << i << ',' << format_double(s.t);
        for (int a = 0; a < 3; ++a) os << ',' << format_double(s.q[a]);
        os << ',' << format_double(th.alpha) << ',' << format_double(th.beta) << ','
           << format_double(th.gamma);
        for (int a = 0; a < 3; ++a) os << ',' << format_double(s.qdot[a]);
        for (int a = 0; a < 3; ++a) os << ',' << format_double(s.thetadot[a]);
        os << ',' << format_double(s.S_weber) << ',' << format_double(s.log_rho) << ','
           << trajs[i].flags << '\n';
      }
    }
    if (!os) throw SnapshotError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace emhydro::io
