#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "grail/common.hpp"
#include "grail/math.hpp"

namespace grail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
// returned in descending order; eigenvectors are the matching columns of V.
inline void jacobi_eigen_symmetric(Matrix a, std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw std::invalid_argument("jacobi: matrix must be square");
    vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) vectors.at(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.a) scale = std::max(scale, std::fabs(x));
    const double tol = (scale == 0.0 ? 1.0 : scale) * 1e-15;

    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a.at(p, q)));
        if (off <= tol) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) <= tol) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors.at(k, p);
                    const double vkq = vectors.at(k, q);
                    vectors.at(k, p) = c * vkp - s * vkq;
                    vectors.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    values.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) values[i] = a.at(i, i);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
    std::vector<double> sorted_vals(n);
    Matrix sorted_vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = values[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs.at(i, j) = vectors.at(i, order[j]);
    }
    values = std::move(sorted_vals);
    vectors = std::move(sorted_vecs);
}

// Project mean-centered parameter snapshots onto the top-k principal
// directions. Works on the snapshot-count-sized Gram matrix, so the
// parameter dimension never appears in the eigenproblem. Coordinates come
// out as sqrt(mu_j) * u_ij with a deterministic sign convention.
inline std::vector<std::vector<double>> pca_project(
    const std::vector<std::vector<double>>& snapshots, std::size_t k) {
    const std::size_t m = snapshots.size();
    if (m < 2) throw std::invalid_argument("pca_project: need at least 2 snapshots");
    const std::size_t n = snapshots.front().size();
    for (const auto& s : snapshots) {
        if (s.size() != n)
            throw std::invalid_argument("pca_project: snapshots have unequal lengths");
    }
    if (k == 0 || k > std::min(m, n))
        throw std::invalid_argument("pca_project: k must be in [1, min(#snapshots, length)]");

    std::vector<double> mean(n, 0.0);
    for (const auto& s : snapshots)
        for (std::size_t j = 0; j < n; ++j) mean[j] += s[j];
    for (double& v : mean) v /= static_cast<double>(m);

    std::vector<std::vector<double>> centered(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) centered[i][j] = snapshots[i][j] - mean[j];

    Matrix gram(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t) s += centered[i][t] * centered[j][t];
            gram.at(i, j) = s;
            gram.at(j, i) = s;
        }
    }

    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    jacobi_eigen_symmetric(gram, eigenvalues, eigenvectors);

    std::vector<std::vector<double>> points(m, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        const double mu = std::max(eigenvalues[j], 0.0);
        const double root = std::sqrt(mu);
        // Fix the eigenvector sign: largest-magnitude component positive.
        std::size_t pivot = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (std::fabs(eigenvectors.at(i, j)) > std::fabs(eigenvectors.at(pivot, j))) pivot = i;
        }
        const double sign = eigenvectors.at(pivot, j) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < m; ++i) points[i][j] = sign * root * eigenvectors.at(i, j);
    }
    return points;
}

// CSV: header `step,pc1,pc2`, 17-significant-digit floats.
inline std::string trajectory_csv(const std::vector<long>& steps,
                                  const std::vector<std::vector<double>>& points) {
    if (steps.size() != points.size())
        throw std::invalid_argument("trajectory_csv: steps/points length mismatch");
    std::ostringstream out;
    out << "step,pc1,pc2\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() < 2)
            throw std::invalid_argument("trajectory_csv: points must have >= 2 components");
        out << steps[i] << ',' << format_double(points[i][0]) << ','
            << format_double(points[i][1]) << '\n';
    }
    return out.str();
}

}  // namespace grail
