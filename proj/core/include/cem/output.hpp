#pragma once

#include <filesystem>

#include "cem/crack.hpp"
#include "cem/dynamics.hpp"
#include "cem/scenario.hpp"

namespace cem {

/// Legacy ASCII VTK unstructured grid: deformed points, surviving cells
/// (partial QUADs as their surviving triangle), point data u/v, cell data
/// max principal stress and failure flag.
void write_vtk_snapshot(const EsfemAssembly& assembly, const KinematicState& state,
                        const std::vector<Voigt>& sigma,
                        const std::filesystem::path& path);

void write_timeseries(const std::vector<TimeseriesRow>& rows,
                      const std::filesystem::path& path);

void write_crack_path(const std::vector<CrackTip>& tips,
                      const std::vector<CrackEvent>& events, const EdgeTopology& topo,
                      const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& data);

}  // namespace cem
