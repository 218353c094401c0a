#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mmag/sphere.hpp"
#include "mmag/wire_film.hpp"

namespace mmag {

// Two joined wires sharing their junction director in a single node array:
//   nodes[0]                junction (wire a at 0 and wire b at 0, same storage)
//   nodes[1 .. n_a]         wire a interior/end nodes
//   nodes[n_a+1 .. n_a+n_b] wire b interior/end nodes
// The junction identity m_a(0) == m_b(0) therefore holds structurally: there
// is exactly one stored vector, so the equality is bitwise at every iterate.
struct JoinedWireField {
  int n_a = 0;  // segments of wire a
  int n_b = 0;  // segments of wire b
  std::vector<Eigen::Vector3d> nodes;

  JoinedWireField() = default;
  JoinedWireField(int segments_a, int segments_b, const Eigen::Vector3d& fill = {0, 0, 1})
      : n_a(segments_a), n_b(segments_b) {
    if (segments_a < 1 || segments_b < 1)
      throw InvalidArgument("each wire needs at least one segment");
    nodes.assign(1 + segments_a + segments_b, fill);
  }

  const Eigen::Vector3d& a(int j) const { return nodes[index_a(j)]; }
  const Eigen::Vector3d& b(int j) const { return nodes[index_b(j)]; }
  Eigen::Vector3d& a(int j) { return nodes[index_a(j)]; }
  Eigen::Vector3d& b(int j) { return nodes[index_b(j)]; }

  int index_a(int j) const {
    if (j < 0 || j > n_a) throw InvalidArgument("wire a node index out of range");
    return j;
  }
  int index_b(int j) const {
    if (j < 0 || j > n_b) throw InvalidArgument("wire b node index out of range");
    return j == 0 ? 0 : n_a + j;
  }
};

// Both wires share the square cross-section coefficients. Wire a runs along
// the third coordinate axis (transverse components 1,2 in 0-based indexing:
// m1, m2); wire b runs along the first axis (transverse m2, m3).
struct WireWireParams {
  double lambda = 1.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  AnisotropyModel anisotropy;
  std::vector<Eigen::Vector3d> applied_a;   // per node of wire a (index 0 = junction)
  std::vector<Eigen::Vector3d> applied_b;  // per node of wire b (index 0 = junction)
};

namespace detail {

inline WireParams branch_params(const WireWireParams& p, bool wire_a) {
  WireParams w;
  w.lambda = p.lambda;
  w.section_area = 1.0;  // unit reference section for both branches
  w.alpha = p.alpha;
  w.beta = p.beta;
  w.gamma = p.gamma;
  w.transverse = wire_a ? std::array<int, 2>{0, 1} : std::array<int, 2>{1, 2};
  w.anisotropy = p.anisotropy;
  w.applied = wire_a ? p.applied_a : p.applied_b;
  return w;
}

inline DirectorField1D extract_a(const JoinedWireField& f) {
  DirectorField1D out;
  out.nodes.assign(f.nodes.begin(), f.nodes.begin() + (f.n_a + 1));
  return out;
}

inline DirectorField1D extract_b(const JoinedWireField& f) {
  DirectorField1D out;
  out.nodes.reserve(f.n_b + 1);
  out.nodes.push_back(f.nodes[0]);
  out.nodes.insert(out.nodes.end(), f.nodes.begin() + (f.n_a + 1), f.nodes.end());
  return out;
}

}  // namespace detail

inline void validate_params(const WireWireParams& p, const JoinedWireField& f) {
  if (!(p.lambda > 0)) throw InvalidArgument("exchange constant must be positive");
  if (!p.applied_a.empty() && static_cast<int>(p.applied_a.size()) != f.n_a + 1)
    throw InvalidArgument("applied field on wire a must have one sample per node");
  if (!p.applied_b.empty() && static_cast<int>(p.applied_b.size()) != f.n_b + 1)
    throw InvalidArgument("applied field on wire b must have one sample per node");
}

inline EnergyBreakdown coupled_energy(const JoinedWireField& f, const WireWireParams& p) {
  validate_params(p, f);
  const EnergyBreakdown ea = wire_energy(detail::extract_a(f), detail::branch_params(p, true));
  const EnergyBreakdown eb = wire_energy(detail::extract_b(f), detail::branch_params(p, false));
  return ea + eb;
}

inline void coupled_energy_gradient(const JoinedWireField& f, const WireWireParams& p,
                                    std::vector<Eigen::Vector3d>& out) {
  validate_params(p, f);
  std::vector<Eigen::Vector3d> ga, gb;
  wire_energy_gradient(detail::extract_a(f), detail::branch_params(p, true), ga);
  wire_energy_gradient(detail::extract_b(f), detail::branch_params(p, false), gb);
  out.assign(f.nodes.size(), Eigen::Vector3d::Zero());
  for (int j = 0; j <= f.n_a; ++j) out[j] += ga[j];
  out[0] += gb[0];  // junction accumulates contributions from both chains
  for (int j = 1; j <= f.n_b; ++j) out[f.n_a + j] += gb[j];
}

struct JoinedFunctional {
  const WireWireParams* params;
  int n_a, n_b;

  JoinedWireField wrap(const std::vector<Eigen::Vector3d>& nodes) const {
    JoinedWireField f;
    f.n_a = n_a;
    f.n_b = n_b;
    f.nodes = nodes;
    return f;
  }
  double value(const std::vector<Eigen::Vector3d>& nodes) const {
    return coupled_energy(wrap(nodes), *params).total;
  }
  void euclidean_gradient(const std::vector<Eigen::Vector3d>& nodes,
                          std::vector<Eigen::Vector3d>& out) const {
    coupled_energy_gradient(wrap(nodes), *params, out);
  }
};

struct WireWireSolution {
  JoinedWireField field;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

inline WireWireSolution minimize_wire_wire(const WireWireParams& p, int segments_a,
                                           int segments_b, const MinimizeOptions& opts) {
  JoinedWireField probe(segments_a, segments_b);
  validate_params(p, probe);
  validate(opts);

  JoinedFunctional f{&p, segments_a, segments_b};
  const auto starts = standard_starts(probe.nodes.size(), opts.multistart, opts.seed);
  MinimizeResult r = multistart_minimize(f, starts, opts);

  WireWireSolution out;
  out.field.n_a = segments_a;
  out.field.n_b = segments_b;
  out.field.nodes = std::move(r.nodes);
  out.energy = coupled_energy(out.field, p);
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.start_index = r.start_index;
  return out;
}

}  // namespace mmag
