#pragma once

#include <utility>

#include <Eigen/Dense>

#include "bifkit/tridiag.hpp"

namespace bifkit {

/// Uniform 1D mesh on (a, b) with homogeneous Dirichlet conditions.
/// Only the n interior nodes are stored; boundary values are implicitly
/// zero in every operator.
struct Grid {
    int n = 0;          // interior node count
    double a = 0.0;     // left endpoint
    double b = 0.0;     // right endpoint
    double h = 0.0;     // spacing, (b - a) / (n + 1)
    Eigen::VectorXd nodes;         // interior coordinates a + i*h, i = 1..n
    Tridiag lap;                   // second difference (1, -2, 1) / h^2
    Tridiag grad;                  // centered first difference (-1, 0, 1) / (2h)
    Eigen::VectorXd quad_weights;  // composite trapezoid, zero boundary terms

    double length() const { return b - a; }
};

/// Builds the mesh and difference operators. Requires n >= 8.
Grid build_grid(int n, std::pair<double, double> interval);

/// Composite-trapezoid quadrature of an interior nodal vector (the
/// boundary values are zero, so no endpoint terms appear).
double quad(const Grid& g, const Eigen::VectorXd& f);

struct Eigenpair {
    double sigma1 = 0.0;      // principal eigenvalue of -lap
    Eigen::VectorXd phi0;     // positive eigenvector, quad(phi0^2) = 1
};

/// Smallest eigenvalue of -lap with its positive eigenvector, computed by
/// inverse power iteration with shift 0. Throws on stagnation.
Eigenpair principal_eigenpair(const Grid& g);

}  // namespace bifkit
