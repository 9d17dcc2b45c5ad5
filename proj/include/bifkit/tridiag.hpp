#pragma once

#include <Eigen/Dense>

namespace bifkit {

/// Tridiagonal matrix in three-band storage. `lower` and `upper` have
/// size n-1; row i of the dense matrix is (lower[i-1], diag[i], upper[i]).
struct Tridiag {
    Eigen::VectorXd lower;
    Eigen::VectorXd diag;
    Eigen::VectorXd upper;

    Eigen::Index rows() const { return diag.size(); }

    static Tridiag zero(Eigen::Index n);
    static Tridiag identity(Eigen::Index n);

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;

    Tridiag& scale(double s);
    Tridiag& add_scaled(double s, const Tridiag& other);
    Tridiag& add_diagonal(const Eigen::VectorXd& d);

    /// Infinity norm (max absolute row sum).
    double norm_inf() const;
};

/// LU factorization of a tridiagonal matrix with partial pivoting
/// (row swaps introduce one extra superdiagonal of fill-in).
class TridiagLU {
public:
    explicit TridiagLU(const Tridiag& A);

    bool singular() const { return singular_; }
    double min_pivot() const { return min_pivot_; }
    double max_pivot() const { return max_pivot_; }

    /// Solves A x = b. Call only if !singular().
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    /// Cheap condition estimate ||A||_inf * ||A^{-1} w||_inf / ||w||_inf
    /// with an alternating-sign probe vector. Returns +inf when singular.
    double condition_estimate(const Tridiag& A) const;

private:
    Eigen::Index n_;
    Eigen::VectorXd dl_, d_, du_, du2_;  // factored bands
    Eigen::VectorXi pivot_;              // 1 if rows i,i+1 were swapped
    bool singular_ = false;
    double min_pivot_ = 0.0;
    double max_pivot_ = 0.0;
};

}  // namespace bifkit
