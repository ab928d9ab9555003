#include "cem/output.hpp"

#include <fstream>
#include <iomanip>

namespace cem {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file " + path.string());
  return out;
}

}  // namespace

void write_vtk_snapshot(const EsfemAssembly& assembly, const KinematicState& state,
                        const std::vector<Voigt>& sigma,
                        const std::filesystem::path& path) {
  const Mesh2D& mesh = assembly.mesh();
  const EdgeTopology& topo = assembly.topology();
  const EffectiveElements& eff = assembly.effective();

  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n"
      << "crack element snapshot t=" << std::setprecision(17) << state.t << "\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  out << std::setprecision(12);
  for (size_t n = 0; n < mesh.nodes.size(); ++n)
    out << mesh.nodes[n].x + state.u[2 * n] << " " << mesh.nodes[n].y + state.u[2 * n + 1]
        << " 0\n";

  struct Cell {
    int elem;
    std::array<int, 4> nodes;
    int count;
  };
  std::vector<Cell> cells;
  int list_len = 0;
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    if (eff.state[e] == ElemState::Failed) continue;
    Cell c;
    c.elem = e;
    if (eff.state[e] == ElemState::Partial) {
      const auto& t = eff.partial_tri[e];
      c.nodes = {t[0], t[1], t[2], -1};
      c.count = 3;
    } else {
      c.nodes = mesh.elements[e].nodes;
      c.count = mesh.elements[e].node_count();
    }
    list_len += c.count + 1;
    cells.push_back(c);
  }
  out << "CELLS " << cells.size() << " " << list_len << "\n";
  for (const Cell& c : cells) {
    out << c.count;
    for (int i = 0; i < c.count; ++i) out << " " << c.nodes[i];
    out << "\n";
  }
  out << "CELL_TYPES " << cells.size() << "\n";
  for (const Cell& c : cells) out << (c.count == 3 ? 5 : 9) << "\n";

  out << "POINT_DATA " << mesh.nodes.size() << "\n";
  out << "VECTORS displacement double\n";
  for (size_t n = 0; n < mesh.nodes.size(); ++n)
    out << state.u[2 * n] << " " << state.u[2 * n + 1] << " 0\n";
  out << "VECTORS velocity double\n";
  for (size_t n = 0; n < mesh.nodes.size(); ++n)
    out << state.v[2 * n] << " " << state.v[2 * n + 1] << " 0\n";

  out << "CELL_DATA " << cells.size() << "\n";
  out << "SCALARS max_principal_stress double 1\nLOOKUP_TABLE default\n";
  for (const Cell& c : cells) {
    double acc = 0.0;
    int count = 0;
    for (int edge : topo.element_edges[c.elem]) {
      if (!assembly.domains()[edge].active) continue;
      acc += max_principal(sigma[edge]).first;
      ++count;
    }
    out << (count > 0 ? acc / count : 0.0) << "\n";
  }
  out << "SCALARS failure_flag int 1\nLOOKUP_TABLE default\n";
  for (const Cell& c : cells) out << (eff.state[c.elem] == ElemState::Partial ? 1 : 0) << "\n";
}

void write_timeseries(const std::vector<TimeseriesRow>& rows,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_s,kinetic_J_per_m,strain_J_per_m,external_work_J_per_m,"
         "dissipated_J_per_m,crack_length_m,tip_speed_m_per_s\n";
  out << std::setprecision(17);
  for (const TimeseriesRow& r : rows)
    out << r.time << "," << r.energy.kinetic << "," << r.energy.strain << ","
        << r.energy.external << "," << r.energy.dissipated << "," << r.crack_length << ","
        << r.tip_speed << "\n";
}

void write_crack_path(const std::vector<CrackTip>& tips,
                      const std::vector<CrackEvent>& events, const EdgeTopology& topo,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "# tip_id time_s x_m y_m cumulative_length_m G_J_per_m2 event\n";
  out << std::setprecision(17);
  std::vector<double> cum(tips.size(), 0.0);
  for (const CrackTip& tip : tips) {
    if (tip.path.empty()) continue;
    out << tip.id << " " << tip.seeded_at << " " << tip.path.front().x << " "
        << tip.path.front().y << " 0 0 seed\n";
  }
  for (const CrackEvent& ev : events) {
    const Vec2& qp = topo.edges[ev.to_edge].qp;
    const char* kind = ev.kind == EventKind::FullSplit     ? "full"
                       : ev.kind == EventKind::PartialSplit ? "partial"
                                                            : "initiation";
    if (ev.tip >= 0 && ev.tip < static_cast<int>(cum.size()))
      cum[ev.tip] += ev.segment_length;
    out << ev.tip << " " << ev.time << " " << qp.x << " " << qp.y << " "
        << (ev.tip >= 0 ? cum[ev.tip] : 0.0) << " " << ev.G << " " << kind << "\n";
  }
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cem
