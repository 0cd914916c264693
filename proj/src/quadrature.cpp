// quadrature.cpp — Golub-Welsch construction of Gauss-Legendre rules

#include "risim/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "risim/errors.hpp"

namespace risim {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw InputError("gauss_legendre: need at least one node");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        j(k, k - 1) = b;
        j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return es.eigenvalues()(a) < es.eigenvalues()(b); });
    for (int i = 0; i < n; ++i) {
        const int c = order[static_cast<std::size_t>(i)];
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(c);
        const double v0 = es.eigenvectors()(0, c);
        rule.weights[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;
    }
    // symmetrize to remove eigensolver round-off
    for (int i = 0; i < n / 2; ++i) {
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
        const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
        const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
        rule.nodes[a] = -x;
        rule.nodes[b] = x;
        rule.weights[a] = rule.weights[b] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

} // namespace risim
