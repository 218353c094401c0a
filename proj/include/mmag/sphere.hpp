#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "mmag/errors.hpp"

namespace mmag {

// Orthogonal projection of an ambient vector onto the tangent plane of the
// unit sphere at m. m must be unit within 1e-6.
template <typename DerivedM, typename DerivedV>
Eigen::Matrix<typename DerivedM::Scalar, 3, 1> project_tangent(
    const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedM::Scalar;
  const Eigen::Matrix<Scalar, 3, 1> mm = m;
  if (std::abs(mm.norm() - Scalar(1)) > Scalar(1e-6))
    throw InvalidState("tangent projection requires a unit base point");
  return v - mm.dot(v) * mm;
}

// Metric retraction: normalize m + v back to the sphere.
template <typename DerivedM, typename DerivedV>
Eigen::Matrix<typename DerivedM::Scalar, 3, 1> retract(
    const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedM::Scalar;
  const Eigen::Matrix<Scalar, 3, 1> w = m + v;
  const Scalar n = w.norm();
  if (n <= Scalar(1e-12)) throw StepCollapse("retraction collapsed: |m + v| is numerically zero");
  return w / n;
}

// Pointwise anisotropy density phi(m) = strength * (1 - (axis.m)^2): even,
// non-negative, minimized along +-axis. strength == 0 is the isotropic case.
struct AnisotropyModel {
  Eigen::Vector3d axis{0, 0, 1};
  double strength = 0;

  static AnisotropyModel zero() { return {}; }
  static AnisotropyModel uniaxial(const Eigen::Vector3d& axis, double strength) {
    if (!(strength >= 0)) throw InvalidArgument("anisotropy strength must be non-negative");
    const double n = axis.norm();
    if (!(n > 1e-12)) throw InvalidArgument("anisotropy axis must be nonzero");
    return {axis / n, strength};
  }

  double value(const Eigen::Vector3d& m) const {
    const double c = axis.dot(m);
    return strength * (1.0 - c * c);
  }
  Eigen::Vector3d gradient(const Eigen::Vector3d& m) const {
    return -2.0 * strength * axis.dot(m) * axis;
  }
};

struct IterationInfo {
  int start_index;
  int iteration;
  double energy;
  double gradient_sup;  // sup over nodes of the tangent gradient norm
  double step;
  const std::vector<Eigen::Vector3d>& nodes;
};

struct MinimizeOptions {
  int max_iterations = 20000;
  double gradient_tolerance = 1e-8;
  double initial_step = 1.0;
  double armijo_constant = 1e-4;    // in (0, 1/2]
  double backtracking_ratio = 0.5;  // in (0, 1)
  int multistart = 8;               // axis constants first, then seeded random fields
  std::uint64_t seed = 12345;
  std::function<void(const IterationInfo&)> observer;  // optional per-iterate hook
};

inline void validate(const MinimizeOptions& o) {
  if (o.max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");
  if (!(o.gradient_tolerance > 0)) throw InvalidArgument("gradient tolerance must be positive");
  if (!(o.initial_step > 0)) throw InvalidArgument("initial step must be positive");
  if (!(o.armijo_constant > 0 && o.armijo_constant <= 0.5))
    throw InvalidArgument("armijo constant must lie in (0, 1/2]");
  if (!(o.backtracking_ratio > 0 && o.backtracking_ratio < 1))
    throw InvalidArgument("backtracking ratio must lie in (0, 1)");
  if (o.multistart < 1) throw InvalidArgument("multistart count must be at least 1");
}

struct MinimizeResult {
  std::vector<Eigen::Vector3d> nodes;
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  int start_index = 0;
};

// Projected-gradient descent with Armijo backtracking on a product of unit
// spheres. The functional must provide
//   double value(const std::vector<Eigen::Vector3d>&)
//   void euclidean_gradient(const std::vector<Eigen::Vector3d>&, std::vector<Eigen::Vector3d>&)
template <typename Functional>
MinimizeResult minimize_field(const Functional& f, std::vector<Eigen::Vector3d> nodes,
                              const MinimizeOptions& opts, int start_index = 0) {
  validate(opts);
  for (auto& m : nodes) {
    const double n = m.norm();
    if (!(std::abs(n - 1.0) <= 1e-9))
      throw InvalidState("minimization requires unit director nodes");
    m /= n;  // sharpen to the sphere so every iterate is unit to machine precision
  }

  const std::size_t n_nodes = nodes.size();
  std::vector<Eigen::Vector3d> grad(n_nodes), trial(n_nodes);

  double energy = f.value(nodes);
  if (!std::isfinite(energy)) throw Diverged("initial energy is not finite");

  double step = opts.initial_step;
  MinimizeResult out;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    f.euclidean_gradient(nodes, grad);
    double gsup = 0, gg = 0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      grad[i] = project_tangent(nodes[i], grad[i]);
      gsup = std::max(gsup, grad[i].norm());
      gg += grad[i].squaredNorm();
    }
    if (opts.observer) opts.observer({start_index, iter, energy, gsup, step, nodes});
    if (gsup <= opts.gradient_tolerance) {
      out.converged = true;
      break;
    }

    // One growth notch per iteration, then backtrack until Armijo holds.
    double s = std::min(2.0 * step, 1e3 * opts.initial_step);
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt) {
      for (std::size_t i = 0; i < n_nodes; ++i) trial[i] = retract(nodes[i], -s * grad[i]);
      const double trial_energy = f.value(trial);
      if (!std::isfinite(trial_energy)) throw Diverged("line search produced a non-finite energy");
      if (trial_energy <= energy - opts.armijo_constant * s * gg) {
        accepted = true;
        nodes.swap(trial);
        energy = trial_energy;
        step = s;
        break;
      }
      s *= opts.backtracking_ratio;
    }
    if (!accepted) break;  // numerically stationary: no descent at the smallest step
  }

  out.nodes = std::move(nodes);
  out.energy = energy;
  out.iterations = iter;
  out.start_index = start_index;
  return out;
}

// Deterministic multistart initial fields: the six axis constants first, then
// uniformly random unit fields drawn from a counter-based seeded generator.
inline std::vector<std::vector<Eigen::Vector3d>> standard_starts(std::size_t n_nodes,
                                                                 int count,
                                                                 std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("multistart count must be at least 1");
  std::vector<std::vector<Eigen::Vector3d>> starts;
  const Eigen::Vector3d axes[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                   {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int k = 0; k < std::min(count, 6); ++k)
    starts.emplace_back(n_nodes, axes[k]);
  for (int k = 6; k < count; ++k) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k));
    std::vector<Eigen::Vector3d> field(n_nodes);
    for (auto& m : field) {
      // uniform on the sphere via area-preserving cylindrical coordinates
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double z = 2.0 * u - 1.0;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = 2.0 * std::numbers::pi * v;
      m = {r * std::cos(t), r * std::sin(t), z};
      m /= m.norm();
    }
    starts.push_back(std::move(field));
  }
  return starts;
}

inline unsigned worker_thread_count(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("MMAG_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed >= 1) n = static_cast<unsigned>(parsed);
  }
  if (n < 1) n = 1;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs every start (in parallel when allowed) and keeps the best result;
// ties on energy resolve to the lowest start index, independent of schedule.
template <typename Functional>
MinimizeResult multistart_minimize(const Functional& f,
                                   const std::vector<std::vector<Eigen::Vector3d>>& starts,
                                   const MinimizeOptions& opts) {
  if (starts.empty()) throw InvalidArgument("multistart requires at least one start");
  std::vector<MinimizeResult> results(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());

  const unsigned n_threads = worker_thread_count(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= starts.size()) return;
      try {
        results[k] = minimize_field(f, starts[k], opts, static_cast<int>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k)
    if (results[k].energy < results[best].energy) best = k;
  return results[best];
}

// Central-difference check of the tangent gradient along a random tangent
// direction; returns |fd - <g,d>| / max(1, |<g,d>|).
template <typename Functional>
double fd_gradient_check(const Functional& f, const std::vector<Eigen::Vector3d>& nodes,
                         double h_fd, std::uint64_t seed = 7777) {
  if (!(h_fd >= 1e-8 && h_fd <= 1e-4))
    throw InvalidArgument("finite-difference step must lie in [1e-8, 1e-4]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::Vector3d> dir(nodes.size());
  double dsup = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Eigen::Vector3d raw(gauss(rng), gauss(rng), gauss(rng));
    dir[i] = project_tangent(nodes[i], raw);
    dsup = std::max(dsup, dir[i].norm());
  }
  if (dsup > 0)
    for (auto& d : dir) d /= dsup;

  std::vector<Eigen::Vector3d> grad(nodes.size());
  f.euclidean_gradient(nodes, grad);
  double analytic = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    analytic += project_tangent(nodes[i], grad[i]).dot(dir[i]);

  std::vector<Eigen::Vector3d> plus(nodes.size()), minus(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    plus[i] = nodes[i] + h_fd * dir[i];
    minus[i] = nodes[i] - h_fd * dir[i];
  }
  const double fd = (f.value(plus) - f.value(minus)) / (2.0 * h_fd);
  return std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
}

}  // namespace mmag
