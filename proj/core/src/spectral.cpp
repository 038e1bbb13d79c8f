#include "unseg/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "unseg/error.hpp"

namespace unseg {
namespace {

struct Eigenpair {
  double value = 0.0;  // eigenvalue of L_sym
  int component = 0;
  int rank = 0;        // position within the component
  Eigen::VectorXd local;
};

// Symmetric normalized adjacency N = D^-1/2 W D^-1/2 restricted to one
// component, in local indexing.
struct ComponentOperator {
  std::vector<std::size_t> nodes;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  ComponentOperator(const AffinityGraph& g, std::vector<std::size_t> members)
      : nodes(std::move(members)), rows(nodes.size()) {
    std::vector<long> local(g.n, -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<long>(i);
    std::vector<double> inv_sqrt(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      inv_sqrt[i] = 1.0 / std::sqrt(g.degree(nodes[i]));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const auto& [j, w] : g.adjacency[nodes[i]]) {
        const auto lj = static_cast<std::size_t>(local[j]);
        rows[i].emplace_back(lj, w * inv_sqrt[i] * inv_sqrt[lj]);
      }
    }
  }

  std::size_t size() const { return nodes.size(); }

  Eigen::MatrixXd dense_laplacian() const {
    const auto m = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& [j, v] : rows[i]) lap(i, j) -= v;
    }
    return lap;
  }

  // y = (I + N) x, whose spectrum is 2 - spectrum(L_sym), inside [0, 2].
  void apply_shifted(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y = x;
    for (std::size_t i = 0; i < size(); ++i) {
      double acc = 0.0;
      for (const auto& [j, v] : rows[i]) acc += v * x[j];
      y[i] += acc;
    }
  }
};

std::vector<Eigenpair> dense_pairs(const ComponentOperator& op, int want, int component) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.dense_laplacian());
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::eigensolver, "dense eigensolver failed on a component of " +
                                       std::to_string(op.size()) + " nodes");
  }
  std::vector<Eigenpair> out;
  for (int r = 0; r < want; ++r) {
    out.push_back({solver.eigenvalues()[r], component, r, solver.eigenvectors().col(r)});
  }
  return out;
}

// Largest eigenpairs of I + N by repeated Lanczos runs. Each run is
// orthogonalized against the locked vectors; converged Ritz pairs from the
// top of the spectrum are locked, and runs continue until `want` pairs are
// locked and a further run finds nothing above the smallest of them.
std::vector<Eigenpair> lanczos_pairs(const ComponentOperator& op, int want, int component,
                                     const SpectralOptions& options) {
  const auto m = static_cast<Eigen::Index>(op.size());
  std::mt19937_64 rng(options.seed ^ (0x9E3779B97F4A7C15ull * (component + 1)));
  std::normal_distribution<double> gauss;

  std::vector<Eigen::VectorXd> locked;
  std::vector<double> locked_theta;

  auto orthogonalize = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index cols) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : locked) w -= u.dot(w) * u;
      if (cols > 0) {
        w -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
      }
    }
  };

  // Returns converged top Ritz pairs (descending) of one run.
  auto run = [&](Eigen::Index steps) {
    std::vector<std::pair<double, Eigen::VectorXd>> converged;
    Eigen::MatrixXd basis(m, steps);
    Eigen::VectorXd alpha(steps), beta(steps);
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = gauss(rng);
    orthogonalize(v, basis, 0);
    double norm = v.norm();
    if (norm < 1e-12) return converged;
    v /= norm;
    Eigen::VectorXd w(m);
    Eigen::Index used = 0;
    double last_beta = 0.0;
    for (Eigen::Index j = 0; j < steps; ++j) {
      basis.col(j) = v;
      used = j + 1;
      op.apply_shifted(v, w);
      alpha[j] = v.dot(w);
      orthogonalize(w, basis, j + 1);
      last_beta = w.norm();
      beta[j] = last_beta;
      if (last_beta < 1e-12) {
        last_beta = 0.0;
        break;
      }
      v = w / last_beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(alpha.head(used), beta.head(std::max<Eigen::Index>(used - 1, 0)),
                               Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) return converged;
    for (Eigen::Index r = used - 1; r >= 0; --r) {
      const double residual = std::abs(last_beta * tri.eigenvectors()(used - 1, r));
      if (residual > options.tolerance) break;
      Eigen::VectorXd x = basis.leftCols(used) * tri.eigenvectors().col(r);
      x.normalize();
      converged.emplace_back(tri.eigenvalues()[r], std::move(x));
    }
    return converged;
  };

  const Eigen::Index base_steps = std::max<Eigen::Index>(2 * want + 20, 40);
  Eigen::Index steps = std::min<Eigen::Index>(base_steps, m);
  int restarts = 0;
  bool verifying = false;
  while (static_cast<Eigen::Index>(locked.size()) < m) {
    const Eigen::Index room = m - static_cast<Eigen::Index>(locked.size());
    auto found = run(std::min(steps, room));
    if (found.empty()) {
      if (++restarts > options.max_restarts) {
        throw Error(Errc::eigensolver,
                    "Lanczos did not converge: component of " + std::to_string(m) +
                        " nodes, " + std::to_string(locked.size()) + " of " +
                        std::to_string(want) + " eigenpairs locked after " +
                        std::to_string(restarts) + " restarts");
      }
      steps = std::min<Eigen::Index>(2 * steps, room);
      continue;
    }
    if (verifying) {
      std::vector<double> sorted = locked_theta;
      std::sort(sorted.rbegin(), sorted.rend());
      if (found.front().first <= sorted[want - 1] + options.tolerance) break;
    }
    for (auto& [theta, x] : found) {
      locked.push_back(std::move(x));
      locked_theta.push_back(theta);
    }
    if (static_cast<int>(locked.size()) >= want) verifying = true;
  }

  std::vector<std::size_t> order(locked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return locked_theta[a] > locked_theta[b]; });
  std::vector<Eigenpair> out;
  for (int r = 0; r < want && r < static_cast<int>(order.size()); ++r) {
    // Rayleigh quotient on L_sym for the reported eigenvalue.
    const auto& x = locked[order[r]];
    Eigen::VectorXd y(m);
    op.apply_shifted(x, y);
    out.push_back({2.0 - x.dot(y), component, r, x});
  }
  return out;
}

}  // namespace

std::vector<int> connected_components(const AffinityGraph& graph, int* count) {
  std::vector<int> comp(graph.n, -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < graph.n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : graph.adjacency[u]) {
        if (w > 0.0 && comp[v] < 0) {
          comp[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

Eigen::MatrixXd normalized_laplacian(const AffinityGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> deg(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) deg[i] = graph.degree(i);
  for (std::size_t i = 0; i < graph.n; ++i) {
    if (deg[i] <= 0.0) continue;
    lap(i, i) = 1.0;
    for (const auto& [j, w] : graph.adjacency[i]) {
      lap(i, j) -= w / std::sqrt(deg[i] * deg[j]);
    }
  }
  return lap;
}

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double v = vectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

SpectralEmbedding spectral_embed(const AffinityGraph& graph, int d,
                                 const SpectralOptions& options) {
  if (d < 1 || static_cast<std::size_t>(d) > graph.n) {
    throw Error(Errc::invalid_argument, "embedding dimension must lie in [1, n]");
  }
  SpectralEmbedding out;
  out.isolated = graph.isolated();
  const std::size_t active =
      static_cast<std::size_t>(std::count(out.isolated.begin(), out.isolated.end(), false));
  if (static_cast<std::size_t>(d) > active) {
    throw Error(Errc::invalid_argument,
                "embedding dimension " + std::to_string(d) + " exceeds the " +
                    std::to_string(active) + " non-isolated nodes");
  }

  int count = 0;
  const auto comp = connected_components(graph, &count);
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t i = 0; i < graph.n; ++i) {
    if (!out.isolated[i]) members[comp[i]].push_back(i);
  }

  std::vector<Eigenpair> pairs;
  std::vector<ComponentOperator> ops;
  ops.reserve(count);
  for (int c = 0; c < count; ++c) {
    if (members[c].empty()) continue;
    ++out.components;
    ops.emplace_back(graph, members[c]);
    const auto& op = ops.back();
    const int want = static_cast<int>(std::min<std::size_t>(d, op.size()));
    auto found = op.size() <= options.dense_limit
                     ? dense_pairs(op, want, static_cast<int>(ops.size() - 1))
                     : lanczos_pairs(op, want, static_cast<int>(ops.size() - 1), options);
    for (auto& p : found) pairs.push_back(std::move(p));
  }

  // Round-off around zero must not reorder the null space between runs.
  auto key = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
  std::stable_sort(pairs.begin(), pairs.end(), [&](const Eigenpair& a, const Eigenpair& b) {
    if (key(a.value) != key(b.value)) return key(a.value) < key(b.value);
    if (a.component != b.component) return a.component < b.component;
    return a.rank < b.rank;
  });

  out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(graph.n), d);
  out.eigenvalues.resize(d);
  for (int c = 0; c < d; ++c) {
    const auto& p = pairs[c];
    out.eigenvalues[c] = p.value;
    const auto& nodes = ops[p.component].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.vectors(static_cast<Eigen::Index>(nodes[i]), c) = p.local[i];
    }
  }
  normalize_signs(out.vectors);
  return out;
}

}  // namespace unseg
