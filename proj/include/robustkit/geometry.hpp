#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "robustkit/common.hpp"

namespace robustkit::geometry {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Ball {
    Vec center;
    double radius = 0.0;
};

struct ToleranceConfig {
    double boundary_rel = 1e-12;     // slack for the in-ball test inside Welzl
    double span_rel = 1e-10;         // rank cutoff, relative to max column norm
};

namespace detail {

inline void check_points(const std::vector<Vec>& points) {
    if (points.empty()) throw EmptyInput("point set is empty");
    const auto dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim)
            throw DimensionMismatch("points have mixed dimensions");
        if (!p.allFinite()) throw NonFinite("point has NaN/Inf coordinate");
    }
}

// Orthonormal basis of span{columns of D} by modified Gram-Schmidt with
// column pivoting; directions with residual norm below tol are dropped.
inline Mat span_basis(const Mat& D, double span_rel) {
    if (D.cols() == 0) return Mat(D.rows(), 0);
    Mat work = D;
    double max_norm = 0.0;
    for (Eigen::Index j = 0; j < work.cols(); ++j)
        max_norm = std::max(max_norm, work.col(j).norm());
    const double tol = span_rel * max_norm;

    Mat basis(D.rows(), D.cols());
    Eigen::Index rank = 0;
    std::vector<bool> used(static_cast<std::size_t>(work.cols()), false);
    for (;;) {
        Eigen::Index pivot = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < work.cols(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double n = work.col(j).norm();
            if (n > best) {
                best = n;
                pivot = j;
            }
        }
        if (pivot < 0) break;
        used[static_cast<std::size_t>(pivot)] = true;
        Vec q = work.col(pivot) / work.col(pivot).norm();
        basis.col(rank++) = q;
        for (Eigen::Index j = 0; j < work.cols(); ++j)
            if (!used[static_cast<std::size_t>(j)])
                work.col(j) -= q.dot(work.col(j)) * q;
    }
    return basis.leftCols(rank);
}

// Smallest ball with all of `support` on its boundary: the circumsphere in
// the support's affine hull.  c = p0 + sum lambda_i (p_i - p0) with
// A lambda = b, A_ij = 2 (p_i-p0).(p_j-p0), b_i = |p_i-p0|^2.
// Returns false when the support is affinely dependent within tolerance.
inline bool circumball(const std::vector<Vec>& support, Ball& out) {
    if (support.empty()) {
        out.center = Vec();
        out.radius = -1.0;  // sentinel: nothing is inside
        return true;
    }
    const Vec& p0 = support.front();
    const auto k = static_cast<Eigen::Index>(support.size()) - 1;
    if (k == 0) {
        out.center = p0;
        out.radius = 0.0;
        return true;
    }
    Mat A(k, k);
    Vec b(k);
    Mat Q(p0.size(), k);
    for (Eigen::Index i = 0; i < k; ++i)
        Q.col(i) = support[static_cast<std::size_t>(i) + 1] - p0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) A(i, j) = 2.0 * Q.col(i).dot(Q.col(j));
        b(i) = Q.col(i).squaredNorm();
    }
    Eigen::FullPivLU<Mat> lu(A);
    lu.setThreshold(1e-12);
    if (lu.rank() < k) return false;
    Vec lambda = lu.solve(b);
    out.center = p0 + Q * lambda;
    out.radius = (out.center - p0).norm();
    return true;
}

inline bool in_ball(const Vec& p, const Ball& b, double rel) {
    if (b.radius < 0.0) return false;
    return (p - b.center).norm() <= b.radius * (1.0 + rel) + 1e-14;
}

// Welzl's algorithm with move-to-front over points in reduced coordinates.
class Welzl {
public:
    Welzl(std::vector<Vec> pts, Eigen::Index dim, double boundary_rel)
        : pts_(std::move(pts)), dim_(dim), rel_(boundary_rel) {}

    Ball solve() {
        support_.clear();
        return recurse(pts_.size());
    }

private:
    Ball recurse(std::size_t n) {
        Ball b;
        circumball(support_, b);
        if (n == 0 || static_cast<Eigen::Index>(support_.size()) == dim_ + 1)
            return b;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_ball(pts_[i], b, rel_)) continue;
            support_.push_back(pts_[i]);
            b = recurse(i);
            support_.pop_back();
            // move-to-front
            std::rotate(pts_.begin(), pts_.begin() + static_cast<std::ptrdiff_t>(i),
                        pts_.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        }
        return b;
    }

    std::vector<Vec> pts_;
    std::vector<Vec> support_;
    Eigen::Index dim_;
    double rel_;
};

}  // namespace detail

// Exact minimum enclosing ball.  Points are first projected onto the
// orthonormal basis of their affine span (rank <= n-1), Welzl runs in the
// reduced coordinates, and the center is mapped back.  The radius is
// unchanged by the projection.
inline Ball meb_exact(const std::vector<Vec>& points,
                      const ToleranceConfig& tol = {}) {
    detail::check_points(points);
    const std::size_t n = points.size();
    const Vec& origin = points.front();
    if (n == 1) return {origin, 0.0};

    Mat D(origin.size(), static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 1; i < n; ++i)
        D.col(static_cast<Eigen::Index>(i - 1)) = points[i] - origin;
    Mat basis = detail::span_basis(D, tol.span_rel);
    const Eigen::Index r = basis.cols();
    if (r == 0) return {origin, 0.0};  // all points coincide

    std::vector<Vec> reduced(n);
    reduced[0] = Vec::Zero(r);
    for (std::size_t i = 1; i < n; ++i)
        reduced[i] = basis.transpose() * (points[i] - origin);

    detail::Welzl solver(std::move(reduced), r, tol.boundary_rel);
    Ball rb = solver.solve();
    return {origin + basis * rb.center, rb.radius};
}

// Independent oracle: enumerate every candidate support subset, take the
// smallest circumball that encloses all points.  Ties within 1e-12 go to the
// earliest (lexicographically smallest) support index list.
inline Ball meb_bruteforce(const std::vector<Vec>& points,
                           const ToleranceConfig& tol = {}) {
    detail::check_points(points);
    const std::size_t n = points.size();
    if (n > 10) throw TooManyPoints("brute-force oracle limited to n <= 10");
    const Vec& origin = points.front();

    Mat D(origin.size(), static_cast<Eigen::Index>(n - 1));
    for (std::size_t i = 1; i < n; ++i)
        D.col(static_cast<Eigen::Index>(i - 1)) = points[i] - origin;
    Mat basis = (n > 1) ? detail::span_basis(D, tol.span_rel)
                        : Mat(origin.size(), 0);
    const auto r = static_cast<std::size_t>(basis.cols());

    std::vector<Vec> reduced(n);
    for (std::size_t i = 0; i < n; ++i)
        reduced[i] = basis.transpose() * (points[i] - origin);

    const std::size_t max_size = std::min(n, r + 1);
    Ball best;
    best.radius = std::numeric_limits<double>::infinity();

    // subsets in lexicographic order of index lists, grouped by size
    std::vector<std::size_t> comb;
    auto consider = [&](const std::vector<std::size_t>& sel) {
        std::vector<Vec> sup;
        sup.reserve(sel.size());
        for (auto i : sel) sup.push_back(reduced[i]);
        Ball cand;
        if (!detail::circumball(sup, cand)) return;
        for (const auto& p : reduced)
            if ((p - cand.center).norm() > cand.radius + 1e-10 * (1.0 + cand.radius))
                return;
        if (cand.radius < best.radius - 1e-12) best = cand;
    };
    for (std::size_t sz = 1; sz <= std::max<std::size_t>(max_size, 1); ++sz) {
        comb.assign(sz, 0);
        std::iota(comb.begin(), comb.end(), std::size_t{0});
        for (;;) {
            consider(comb);
            // next combination
            std::size_t i = sz;
            while (i > 0 && comb[i - 1] == n - sz + (i - 1)) --i;
            if (i == 0) break;
            ++comb[i - 1];
            for (std::size_t j = i; j < sz; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
    return {origin + basis * best.center, best.radius};
}

// Iterative approximation (Badoiu-Clarkson): start at any point, move the
// center a 1/(i+1) fraction toward the farthest point.  Radius is within
// (1 + 1/iterations) of optimal; intended fallback for n > 64.
inline Ball meb_coreset(const std::vector<Vec>& points, int iterations) {
    detail::check_points(points);
    if (iterations < 1) throw Error("iterations must be positive");
    Vec c = points.front();
    for (int i = 1; i <= iterations; ++i) {
        double worst = -1.0;
        const Vec* far = &points.front();
        for (const auto& p : points) {
            const double d = (p - c).squaredNorm();
            if (d > worst) {
                worst = d;
                far = &p;
            }
        }
        c += (*far - c) / static_cast<double>(i + 1);
    }
    double radius = 0.0;
    for (const auto& p : points) radius = std::max(radius, (p - c).norm());
    return {std::move(c), radius};
}

// Deterministic random orthogonal matrix with det +1: orthonormalize a
// seeded Gaussian matrix (QR with positive R diagonal), then flip the last
// column if the determinant is negative.
inline Mat random_rotation(Eigen::Index dim, std::uint64_t seed) {
    if (dim < 1) throw Error("dim must be >= 1");
    auto rng = make_rng(SeedHasher().add(std::uint64_t{0x526f7461u}).add(seed).add(
        static_cast<std::int64_t>(dim)).value());
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat G(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) G(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    if (Q.determinant() < 0.0) Q.col(dim - 1) = -Q.col(dim - 1);
    return Q;
}

}  // namespace robustkit::geometry
