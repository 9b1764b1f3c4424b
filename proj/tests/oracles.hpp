#pragma once

// Independent reference implementations used by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "seads/boardgames.hpp"
#include "seads/neural.hpp"

namespace oracle {

/// Central finite difference of a scalar function of one parameter slot.
inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-6) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

/// |a - b| <= rtol * max(|a|, |b|) + atol
inline bool close(double a, double b, double rtol, double atol = 1e-9) {
  return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

/// Worst relative error between analytic gradients of every parameter of `net`
/// and finite differences of `loss`.
inline double worst_gradient_error(seads::nn::Mlp& net, const seads::nn::MlpGradients& analytic,
                                   const std::function<double()>& loss, double h = 1e-6, double atol = 1e-8) {
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      const double fd = central_difference(loss, layer.weight.data()[i], h);
      const double an = analytic.weight[l].data()[i];
      worst = std::max(worst, std::abs(fd - an) / (std::max(std::abs(fd), std::abs(an)) + atol));
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      const double fd = central_difference(loss, layer.bias.data()[i], h);
      const double an = analytic.bias[l].data()[i];
      worst = std::max(worst, std::abs(fd - an) / (std::max(std::abs(fd), std::abs(an)) + atol));
    }
  }
  return worst;
}

/// Minimum of sum cost(i, perm[i]) over all injective row->column maps.
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  std::vector<int> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, cols[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

/// Best total score over all orderings of `labels` (multiset-preserving relabelling).
inline double brute_force_relabel_score(const Eigen::MatrixXd& score, std::vector<int> labels) {
  std::sort(labels.begin(), labels.end());
  double best = -INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) s += score(static_cast<Eigen::Index>(i), labels[i]);
    best = std::max(best, s);
  } while (std::next_permutation(labels.begin(), labels.end()));
  return best;
}

/// Layer sizes of a breadth-first search from the goal over boards keyed by
/// their text form, using only apply_move.
inline std::vector<std::size_t> layer_sizes(const seads::GameSpec& spec, int max_depth) {
  using namespace seads;
  const auto moves = enumerate_moves(spec);
  std::set<std::string> seen;
  std::vector<Board> frontier{goal_board(spec)};
  seen.insert(serialize_board(frontier[0]));
  std::vector<std::size_t> sizes{1};
  for (int d = 1; d <= max_depth; ++d) {
    std::vector<Board> next;
    for (const auto& b : frontier)
      for (const auto& mv : moves) {
        Board c = apply_move(b, mv);
        if (seen.insert(serialize_board(c)).second) next.push_back(std::move(c));
      }
    sizes.push_back(next.size());
    frontier = std::move(next);
  }
  return sizes;
}

/// Plain bitwise CRC-32 (reflected polynomial 0xEDB88320, init and final xor 0xFFFFFFFF).
inline std::uint32_t crc32(const std::string& s) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (unsigned char ch : s) {
    c ^= ch;
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return c ^ 0xFFFFFFFFu;
}

}  // namespace oracle
