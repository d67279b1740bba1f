#pragma once

#include <string>

#include "pvdc/pointcloud.hpp"

namespace pvdc {

// "PVPC" container: magic, version u32, n u32, c u32, then n*c row-major f32
// little-endian scalars. Columns 0..2 are xyz; any further columns are
// per-point feature channels (c >= 3).
void save_pvpc(const std::string& path, const PointCloud<double>& cloud);
PointCloud<double> load_pvpc(const std::string& path);

// plain-text export, one "x y z [features...]" line per point
void save_xyz(const std::string& path, const PointCloud<double>& cloud);

} // namespace pvdc
