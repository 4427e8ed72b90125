#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sae {

// Quadrature rule normalized against the standard normal density:
// sum_k f(z_k) * w_k approximates E[f(Z)] with Z ~ N(0, 1), so the
// weights sum to one and the nodes are symmetric about zero.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// Gauss-Hermite rule for the probabilists' weight, built by Golub-Welsch:
// the nodes are the eigenvalues of the Jacobi matrix (diag 0, off-diag
// sqrt(j)) and the weights are the squared first eigenvector components
// (mu_0 = 1).  Exact for polynomials of degree <= 2K - 1 against phi(z).
inline QuadratureRule gauss_hermite_normalized(int K) {
  if (K < 1 || K > 64)
    throw std::domain_error("gauss_hermite_normalized: K must be in [1, 64]");

  std::vector<double> d(K, 0.0);   // diagonal
  std::vector<double> e(K, 0.0);   // off-diagonal, e[j] couples j and j+1
  std::vector<double> q(K, 0.0);   // first row of the eigenvector matrix
  for (int j = 1; j < K; ++j) e[j - 1] = std::sqrt(static_cast<double>(j));
  q[0] = 1.0;

  // Implicit-shift QL iteration on the symmetric tridiagonal matrix,
  // carrying the single eigenvector row along in the plane rotations.
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < K; ++l) {
    int iter = 0;
    for (;;) {
      int m = l;
      for (; m + 1 < K; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == 60)
        throw std::runtime_error("gauss_hermite_normalized: QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double rr = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(rr, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        rr = std::hypot(f, g);
        e[i + 1] = rr;
        if (rr == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / rr;
        c = g / rr;
        g = d[i + 1] - p;
        rr = (d[i] - g) * s + 2.0 * c * b;
        p = s * rr;
        d[i + 1] = g + p;
        g = c * rr - b;
        f = q[i + 1];
        q[i + 1] = s * q[i] + c * f;
        q[i] = c * q[i] - s * f;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }

  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  QuadratureRule rule;
  rule.nodes.resize(K);
  rule.weights.resize(K);
  for (int k = 0; k < K; ++k) {
    rule.nodes[k] = d[order[k]];
    rule.weights[k] = q[order[k]] * q[order[k]];
  }

  // Enforce exact symmetry about zero; QL leaves O(eps) asymmetries.
  for (int k = 0; k < K / 2; ++k) {
    const int j = K - 1 - k;
    const double z = 0.5 * (rule.nodes[j] - rule.nodes[k]);
    rule.nodes[j] = z;
    rule.nodes[k] = -z;
    const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
    rule.weights[j] = w;
    rule.weights[k] = w;
  }
  if (K % 2 == 1) rule.nodes[K / 2] = 0.0;
  return rule;
}

}  // namespace sae
