#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cem/esfem.hpp"

namespace cem {

/// Largest principal stress and its unit direction (deterministic sign:
/// first nonzero component positive; hydrostatic states report (1, 0)).
std::pair<double, Vec2> max_principal(const Voigt& sigma);

/// Relative end-node displacement of an edge, gated to zero unless the edge
/// is elongated. Node order is ascending node ID.
Vec2 edge_stretch(const Edge& edge, const std::vector<double>& u,
                  const std::vector<Vec2>& X);

/// G for a candidate segment from the tip edge quadrature point to the
/// candidate edge quadrature point, given the smoothed stress there.
double energy_release_rate(const Vec2& tip_qp, const Vec2& cand_qp, const Voigt& sigma_cand,
                           const Vec2& delta_d);

enum class EventKind { FullSplit, PartialSplit, Initiation };

struct CrackEvent {
  double time = 0.0;
  int tip = -1;
  int from_edge = -1;
  int to_edge = -1;
  int element = -1;  // element crossed (or spawn element for initiation)
  EventKind kind = EventKind::FullSplit;
  double G = 0.0;           // J/m^2 at emission
  double segment_length = 0.0;  // m
};

struct CrackTip {
  int id = -1;
  int edge = -1;  // current tip edge
  double arrival_time = 0.0;
  double seeded_at = 0.0;
  std::optional<Vec2> incoming_dir;
  // Witness pair: the crack-face node pair whose separation supplies the
  // opening displacement delta_d for this tip. Seeded tips use the seam-mouth
  // duplicate nodes (reference separation 0); initiated tips use the spawn
  // edge (reference separation = its rest length, so the Heaviside gate
  // requires genuine elongation).
  int witness_n1 = -1, witness_n2 = -1;
  double witness_ref = 0.0;  // reference separation for the Heaviside gate
  // Gauge distance for the sqrt(r) crack-opening profile: the witness
  // separation is translated to this distance behind the tip, so a witness
  // far in the wake does not overstate the opening at the tip.
  double witness_gauge = 0.0;
  // First G value that exceeded Gc for the currently favored edge while the
  // tip-speed cap delayed the advance; recorded as G_at_failure on emission.
  int pending_edge = -1;
  double pending_g = 0.0;
  bool arrested = false;
  std::vector<Vec2> path;          // quadrature-point polyline
  std::vector<int> visited_edges;  // edges already on this tip's path
};

struct Candidate {
  int element = -1;
  int edge = -1;
};

class CrackFront {
 public:
  CrackFront(EsfemAssembly& assembly, const std::vector<Vec2>& reference_coords);

  /// Register a pre-existing tip on `edge`; no dissipated energy is charged.
  int add_tip(int edge, std::optional<Vec2> incoming_dir, double time);

  /// Seed a tip at a seam endpoint: picks the surviving incident edge that
  /// best continues the seam direction and places the tip there.
  int seed_tip_at_node(int node, const Vec2& seam_dir, double time);

  std::vector<Candidate> candidate_quadratures(const CrackTip& tip) const;

  /// One advance attempt per active tip; returns the emitted events.
  std::vector<CrackEvent> advance(const std::vector<Voigt>& sigma,
                                  const std::vector<double>& u, double time);

  /// Strength-based initiation: at most one new tip per call (the global
  /// maximizer of sigma_1 over eligible boundary edges exceeding f_t).
  std::optional<int> initiate_from_strength(const std::vector<Voigt>& sigma, double time,
                                            const std::function<bool(const Vec2&)>& eligible);

  /// Cap on apparent tip speed (segment length over dwell time); 0 = off.
  void set_max_tip_speed(double v) { max_tip_speed_ = v; }

  /// Override the witness gauge distance for subsequently seeded tips;
  /// 0 = use the seeding-time tip-to-witness distance.
  void set_seed_gauge(double g) { seed_gauge_ = g; }

  const std::vector<CrackTip>& tips() const { return tips_; }
  const std::vector<CrackEvent>& events() const { return events_; }
  double dissipated() const { return dissipated_; }
  int failed_count() const { return failed_count_; }
  int partial_count() const { return partial_count_; }

 private:
  void fail_element(int elem);

  EsfemAssembly* assembly_;
  const std::vector<Vec2>* X_;
  std::vector<CrackTip> tips_;
  std::vector<CrackEvent> events_;
  double dissipated_ = 0.0;
  double max_tip_speed_ = 0.0;
  double seed_gauge_ = 0.0;
  int failed_count_ = 0;
  int partial_count_ = 0;
  std::vector<char> edge_used_;  // edges consumed by any path / tip
};

struct CrackMetricsSample {
  double time = 0.0;
  double cumulative_length = 0.0;
  double tip_speed = 0.0;
  double dissipated = 0.0;
};

/// Time series of cumulative crack length, smoothed tip speed and U_d.
std::vector<CrackMetricsSample> crack_metrics(const std::vector<CrackEvent>& events,
                                              const std::vector<double>& sample_times,
                                              double window);

}  // namespace cem
