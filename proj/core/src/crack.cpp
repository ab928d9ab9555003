#include "cem/crack.hpp"

#include <algorithm>
#include <cmath>

namespace cem {

std::pair<double, Vec2> max_principal(const Voigt& sigma) {
  const double s11 = sigma[0], s22 = sigma[1], s12 = sigma[2];
  const double mean = 0.5 * (s11 + s22);
  const double radius = std::hypot(0.5 * (s11 - s22), s12);
  const double s1 = mean + radius;
  Vec2 dir;
  if (radius == 0.0) {
    dir = {1.0, 0.0};  // degenerate eigenspace, tie rule
  } else if (std::abs(s12) > 0.0) {
    dir = Vec2{s12, s1 - s11}.normalized();
  } else {
    dir = s11 >= s22 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }
  // deterministic sign: first nonzero component positive
  if (dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0)) dir = dir * -1.0;
  return {s1, dir};
}

Vec2 edge_stretch(const Edge& edge, const std::vector<double>& u,
                  const std::vector<Vec2>& X) {
  const int n1 = edge.n1, n2 = edge.n2;  // ascending by construction
  const double ref = (X[n2] - X[n1]).norm();
  if (ref == 0.0) throw Error("edge has zero reference length");
  const Vec2 du{u[2 * n2] - u[2 * n1], u[2 * n2 + 1] - u[2 * n1 + 1]};
  const Vec2 cur = (X[n2] + Vec2{u[2 * n2], u[2 * n2 + 1]}) -
                   (X[n1] + Vec2{u[2 * n1], u[2 * n1 + 1]});
  // H(ratio - 1) with H(0) = 0: an exactly unstretched edge does not open
  return cur.norm() / ref > 1.0 ? du : Vec2{0.0, 0.0};
}

double energy_release_rate(const Vec2& tip_qp, const Vec2& cand_qp, const Voigt& sigma_cand,
                           const Vec2& delta_d) {
  const Vec2 d = cand_qp - tip_qp;
  if (d.norm() == 0.0) throw Error("coincident quadrature points");
  const Vec2 n = d.normalized().perp();
  const auto [s1, p] = max_principal(sigma_cand);
  // magnitudes: the ascending-node-ID sign of delta_d is arbitrary relative
  // to the physical opening direction, so only tension (s1 > 0) gates G
  return std::max(0.0, 0.5 * s1 * std::abs(p.dot(n)) * std::abs(n.dot(delta_d)));
}

CrackFront::CrackFront(EsfemAssembly& assembly, const std::vector<Vec2>& reference_coords)
    : assembly_(&assembly),
      X_(&reference_coords),
      edge_used_(assembly.topology().edges.size(), 0) {
  // seam edges can never become candidates
  for (size_t e = 0; e < edge_used_.size(); ++e)
    if (assembly.topology().edges[e].seam) edge_used_[e] = 1;
}

int CrackFront::add_tip(int edge, std::optional<Vec2> incoming_dir, double time) {
  CrackTip tip;
  tip.id = static_cast<int>(tips_.size());
  tip.edge = edge;
  tip.arrival_time = time;
  tip.seeded_at = time;
  tip.incoming_dir = incoming_dir;
  const Edge& ed = assembly_->topology().edges[edge];
  tip.witness_n1 = ed.n1;
  tip.witness_n2 = ed.n2;
  tip.witness_ref = ((*X_)[ed.n2] - (*X_)[ed.n1]).norm();
  tip.witness_gauge = tip.witness_ref;
  tip.path.push_back(assembly_->topology().edges[edge].qp);
  tip.visited_edges.push_back(edge);
  edge_used_[edge] = 1;
  tips_.push_back(std::move(tip));
  return tips_.back().id;
}

int CrackFront::seed_tip_at_node(int node, const Vec2& seam_dir, double time) {
  const EdgeTopology& topo = assembly_->topology();
  const Vec2 dir = seam_dir.normalized();
  int best = -1;
  double best_align = -1.0;
  for (int e : topo.node_edges[node]) {
    const Edge& ed = topo.edges[e];
    if (ed.seam || edge_used_[e]) continue;
    bool surviving = false;
    for (int k = 0; k < 2; ++k)
      if (ed.elems[k] >= 0 && assembly_->effective().state[ed.elems[k]] != ElemState::Failed)
        surviving = true;
    if (!surviving) continue;
    const int other = ed.n1 == node ? ed.n2 : ed.n1;
    const Vec2 along = ((*X_)[other] - (*X_)[node]).normalized();
    const double align = along.dot(dir);  // forward continuation of the seam
    if (align > best_align + 1e-12) {
      best_align = align;
      best = e;
    }
  }
  if (best < 0) throw Error("no suitable edge to seed a crack tip at node " + std::to_string(node));
  const int id = add_tip(best, dir, time);

  // a coincident (seam-duplicated) node pair supplies the crack opening for
  // the seeded tip: the mouth pair (farthest from the tip) carries the full
  // notch-flank relative motion
  const std::vector<Vec2>& X = *X_;
  double best_dist = -1.0;
  for (int i = 0; i < static_cast<int>(X.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(X.size()); ++j) {
      if ((X[j] - X[i]).norm() > 1e-12) continue;
      const double d = (X[i] - X[node]).norm();
      if (d > best_dist) {
        best_dist = d;
        tips_[id].witness_n1 = i;
        tips_[id].witness_n2 = j;
        tips_[id].witness_ref = 0.0;
      }
    }
  if (best_dist > 0.0)
    tips_[id].witness_gauge =
        seed_gauge_ > 0.0 ? seed_gauge_
                          : (topo.edges[best].qp - X[tips_[id].witness_n1]).norm();
  return id;
}

std::vector<Candidate> CrackFront::candidate_quadratures(const CrackTip& tip) const {
  std::vector<Candidate> out;
  const EdgeTopology& topo = assembly_->topology();
  const EffectiveElements& eff = assembly_->effective();
  const Edge& te = topo.edges[tip.edge];
  for (int k = 0; k < 2; ++k) {
    const int elem = te.elems[k];
    if (elem < 0 || eff.state[elem] == ElemState::Failed) continue;
    for (int e : topo.element_edges[elem]) {
      if (e == tip.edge || edge_used_[e]) continue;
      const Edge& ce = topo.edges[e];
      if (ce.seam) continue;
      if (eff.state[elem] == ElemState::Partial) {
        const auto& tri = eff.partial_tri[elem];
        bool has1 = false, has2 = false;
        for (int n : tri) {
          has1 |= n == ce.n1;
          has2 |= n == ce.n2;
        }
        if (!has1 || !has2) continue;
      }
      out.push_back({elem, e});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Candidate& a, const Candidate& b) { return a.edge < b.edge; });
  return out;
}

void CrackFront::fail_element(int elem) {
  if (assembly_->effective().state[elem] != ElemState::Failed) {
    if (assembly_->effective().state[elem] == ElemState::Partial) --partial_count_;
    ++failed_count_;
  }
  assembly_->set_element_failed(elem);
}

std::vector<CrackEvent> CrackFront::advance(const std::vector<Voigt>& sigma,
                                            const std::vector<double>& u, double time) {
  std::vector<CrackEvent> emitted;
  const EdgeTopology& topo = assembly_->topology();
  for (CrackTip& tip : tips_) {
    if (tip.arrested) continue;
    const std::vector<Candidate> cands = candidate_quadratures(tip);
    const Edge& te = topo.edges[tip.edge];
    const int w1 = std::min(tip.witness_n1, tip.witness_n2);
    const int w2 = std::max(tip.witness_n1, tip.witness_n2);
    Vec2 delta{u[2 * w2] - u[2 * w1], u[2 * w2 + 1] - u[2 * w1 + 1]};
    const Vec2 cur = ((*X_)[w2] + Vec2{u[2 * w2], u[2 * w2 + 1]}) -
                     ((*X_)[w1] + Vec2{u[2 * w1], u[2 * w1 + 1]});
    // Heaviside gate: the witness separation must exceed its reference
    if (!(cur.norm() > tip.witness_ref)) continue;
    if (delta.x == 0.0 && delta.y == 0.0) continue;
    // translate the witness opening to the gauge distance behind the tip via
    // the sqrt(r) crack-opening profile, so a receding witness does not
    // overstate the opening available at the tip
    if (tip.witness_gauge > 0.0) {
      const double d_w = (te.qp - (*X_)[w1]).norm();
      if (d_w > tip.witness_gauge)
        delta = delta * std::sqrt(tip.witness_gauge / d_w);
    }

    // candidate pool: the element-adjacent edges plus every surviving edge
    // incident on a tip-edge node, so the path can round the tip-edge nodes
    // even when the adjacent elements offer no forward continuation
    std::vector<Candidate> pool = cands;
    for (int n : {te.n1, te.n2})
      for (int e : topo.node_edges[n]) {
        if (e == tip.edge || edge_used_[e] || topo.edges[e].seam) continue;
        const Edge& ce = topo.edges[e];
        int elem = -1;
        for (int k = 0; k < 2; ++k)
          if (ce.elems[k] >= 0 &&
              assembly_->effective().state[ce.elems[k]] != ElemState::Failed)
            elem = ce.elems[k];
        if (elem < 0) continue;
        pool.push_back({elem, e});
      }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.edge < b.edge; });
    pool.erase(std::unique(pool.begin(), pool.end(),
                           [](const Candidate& a, const Candidate& b) {
                             return a.edge == b.edge;
                           }),
               pool.end());
    if (pool.empty()) {
      tip.arrested = true;
      continue;
    }
    int win = -1;
    double win_g = 0.0;
    for (const Candidate& c : pool) {
      if (tip.incoming_dir) {
        // the path may kink by at most 80 degrees per segment; a sliding
        // opening would otherwise favor degenerate right-angle jumps
        const Vec2 dir = (topo.edges[c.edge].qp - te.qp).normalized();
        if (dir.dot(*tip.incoming_dir) < 0.17364817766693041) continue;
      }
      const double g = energy_release_rate(te.qp, topo.edges[c.edge].qp, sigma[c.edge], delta);
      if (g > win_g) {  // strict: ties resolved by the lowest-edge-ID ordering
        win_g = g;
        win = static_cast<int>(&c - pool.data());
      }
    }
    if (win < 0) continue;
    const Candidate& c = pool[win];
    const double gc = assembly_->material_of(c.element).Gc;
    if (!(win_g > gc)) continue;

    // remember the first value that crossed Gc for this edge while the
    // tip-speed cap delays the topological update
    if (tip.pending_edge != c.edge) {
      tip.pending_edge = c.edge;
      tip.pending_g = win_g;
    }
    const Edge& we = topo.edges[c.edge];
    const double seg = (we.qp - te.qp).norm();
    if (max_tip_speed_ > 0.0) {
      const double dwell = time - tip.arrival_time;
      if (dwell <= 0.0 || seg / dwell > max_tip_speed_) continue;
    }
    // G_at_failure charges only the driving newly released for this segment:
    // excess already present when the candidate first became critical was
    // spent driving the previous advance, not this one
    win_g = gc + std::max(0.0, win_g - tip.pending_g);
    tip.pending_edge = -1;
    tip.pending_g = 0.0;
    CrackEvent ev;
    ev.time = time;
    ev.tip = tip.id;
    ev.from_edge = tip.edge;
    ev.to_edge = c.edge;
    ev.element = c.element;
    ev.G = win_g;
    ev.segment_length = seg;

    const Element& el = assembly_->mesh().elements[c.element];
    bool full = true;
    if (el.kind == ElemKind::QUAD &&
        assembly_->effective().state[c.element] == ElemState::Intact) {
      // shared corner between the tip edge and the winning edge -> pattern I
      int corner = -1;
      for (int a : {te.n1, te.n2})
        for (int b : {we.n1, we.n2})
          if (a == b) corner = a;
      if (corner >= 0) {
        full = false;
        std::array<int, 3> tri{};
        int t = 0;
        for (int i = 0; i < 4; ++i)
          if (el.nodes[i] != corner) tri[t++] = el.nodes[i];
        assembly_->set_element_partial(c.element, tri);
        ++partial_count_;
        ev.kind = EventKind::PartialSplit;
      }
    }
    if (full) {
      fail_element(c.element);
      ev.kind = EventKind::FullSplit;
    }

    dissipated_ += win_g * seg;
    tip.incoming_dir = (we.qp - te.qp).normalized();
    tip.edge = c.edge;
    tip.arrival_time = time;
    tip.path.push_back(we.qp);
    tip.visited_edges.push_back(c.edge);
    edge_used_[c.edge] = 1;
    events_.push_back(ev);
    emitted.push_back(ev);
  }
  return emitted;
}

std::optional<int> CrackFront::initiate_from_strength(
    const std::vector<Voigt>& sigma, double time,
    const std::function<bool(const Vec2&)>& eligible) {
  const EdgeTopology& topo = assembly_->topology();
  const EffectiveElements& eff = assembly_->effective();
  int best = -1;
  double best_excess = 0.0;
  for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
    const Edge& ed = topo.edges[e];
    if (!ed.boundary() || ed.seam || edge_used_[e]) continue;
    const int elem = ed.elems[0] >= 0 ? ed.elems[0] : ed.elems[1];
    if (eff.state[elem] == ElemState::Failed) continue;
    const MaterialModel& m = assembly_->material_of(elem);
    if (!m.ft) continue;
    if (eligible && !eligible(ed.qp)) continue;
    const double s1 = max_principal(sigma[e]).first;
    if (s1 > *m.ft && s1 - *m.ft > best_excess) {
      best_excess = s1 - *m.ft;
      best = e;
    }
  }
  if (best < 0) return std::nullopt;
  const int id = add_tip(best, std::nullopt, time);
  // the over-strength boundary element breaks with the initiation: the new
  // tip needs free faces behind it, or its witness edge could never open
  const int spawn = topo.edges[best].elems[0] >= 0 ? topo.edges[best].elems[0]
                                                   : topo.edges[best].elems[1];
  fail_element(spawn);
  CrackEvent ev;
  ev.time = time;
  ev.tip = id;
  ev.from_edge = best;
  ev.to_edge = best;
  ev.element = spawn;
  ev.kind = EventKind::Initiation;
  events_.push_back(ev);
  return id;
}

std::vector<CrackMetricsSample> crack_metrics(const std::vector<CrackEvent>& events,
                                              const std::vector<double>& sample_times,
                                              double window) {
  if (sample_times.size() >= 2) {
    double min_dt = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < sample_times.size(); ++i)
      min_dt = std::min(min_dt, sample_times[i] - sample_times[i - 1]);
    if (window < 2.0 * min_dt)
      throw Error("crack metrics window must span at least two sample intervals");
  }
  auto length_at = [&](double t) {
    double l = 0.0;
    for (const CrackEvent& ev : events)
      if (ev.time <= t) l += ev.segment_length;
    return l;
  };
  auto dissipated_at = [&](double t) {
    double d = 0.0;
    for (const CrackEvent& ev : events)
      if (ev.time <= t) d += ev.G * ev.segment_length;
    return d;
  };
  std::vector<CrackMetricsSample> out;
  out.reserve(sample_times.size());
  for (double t : sample_times) {
    CrackMetricsSample s;
    s.time = t;
    s.cumulative_length = length_at(t);
    s.dissipated = dissipated_at(t);
    s.tip_speed = (length_at(t + 0.5 * window) - length_at(t - 0.5 * window)) / window;
    out.push_back(s);
  }
  return out;
}

}  // namespace cem
