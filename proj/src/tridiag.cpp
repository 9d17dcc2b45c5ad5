#include "bifkit/tridiag.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bifkit {

Tridiag Tridiag::zero(Eigen::Index n) {
    Tridiag t;
    t.lower = Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0);
    t.diag = Eigen::VectorXd::Zero(n);
    t.upper = Eigen::VectorXd::Zero(n > 0 ? n - 1 : 0);
    return t;
}

Tridiag Tridiag::identity(Eigen::Index n) {
    Tridiag t = zero(n);
    t.diag.setOnes();
    return t;
}

Eigen::VectorXd Tridiag::apply(const Eigen::VectorXd& x) const {
    const Eigen::Index n = rows();
    if (x.size() != n) throw std::invalid_argument("Tridiag::apply: size mismatch");
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0) v += lower[i - 1] * x[i - 1];
        if (i + 1 < n) v += upper[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

Eigen::MatrixXd Tridiag::dense() const {
    const Eigen::Index n = rows();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        M(i, i) = diag[i];
        if (i > 0) M(i, i - 1) = lower[i - 1];
        if (i + 1 < n) M(i, i + 1) = upper[i];
    }
    return M;
}

Tridiag& Tridiag::scale(double s) {
    lower *= s;
    diag *= s;
    upper *= s;
    return *this;
}

Tridiag& Tridiag::add_scaled(double s, const Tridiag& other) {
    if (other.rows() != rows()) throw std::invalid_argument("Tridiag::add_scaled: size mismatch");
    lower += s * other.lower;
    diag += s * other.diag;
    upper += s * other.upper;
    return *this;
}

Tridiag& Tridiag::add_diagonal(const Eigen::VectorXd& d) {
    if (d.size() != rows()) throw std::invalid_argument("Tridiag::add_diagonal: size mismatch");
    diag += d;
    return *this;
}

double Tridiag::norm_inf() const {
    const Eigen::Index n = rows();
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = std::abs(diag[i]);
        if (i > 0) r += std::abs(lower[i - 1]);
        if (i + 1 < n) r += std::abs(upper[i]);
        m = std::max(m, r);
    }
    return m;
}

TridiagLU::TridiagLU(const Tridiag& A) : n_(A.rows()) {
    dl_ = A.lower;
    d_ = A.diag;
    du_ = A.upper;
    du2_ = Eigen::VectorXd::Zero(n_ > 2 ? n_ - 2 : 0);
    pivot_ = Eigen::VectorXi::Zero(n_ > 1 ? n_ - 1 : 0);

    min_pivot_ = std::numeric_limits<double>::infinity();
    max_pivot_ = 0.0;

    // dgttrf-style elimination with row interchange when the subdiagonal
    // entry dominates the pivot.
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            pivot_[i] = 0;
            if (d_[i] != 0.0) {
                const double m = dl_[i] / d_[i];
                dl_[i] = m;  // store multiplier
                d_[i + 1] -= m * du_[i];
            }
            if (i + 2 < n_) du2_[i] = 0.0;
        } else {
            pivot_[i] = 1;
            const double m = d_[i] / dl_[i];
            d_[i] = dl_[i];
            dl_[i] = m;
            const double tmp = du_[i];
            du_[i] = d_[i + 1];
            d_[i + 1] = tmp - m * d_[i + 1];
            if (i + 2 < n_) {
                du2_[i] = du_[i + 1];
                du_[i + 1] = -m * du_[i + 1];
            }
        }
        const double ap = std::abs(d_[i]);
        min_pivot_ = std::min(min_pivot_, ap);
        max_pivot_ = std::max(max_pivot_, ap);
    }
    if (n_ > 0) {
        const double ap = std::abs(d_[n_ - 1]);
        min_pivot_ = std::min(min_pivot_, ap);
        max_pivot_ = std::max(max_pivot_, ap);
    }

    const double eps = std::numeric_limits<double>::epsilon();
    singular_ = !(min_pivot_ > eps * std::max(1.0, max_pivot_) * 16.0);
}

Eigen::VectorXd TridiagLU::solve(const Eigen::VectorXd& b) const {
    if (b.size() != n_) throw std::invalid_argument("TridiagLU::solve: size mismatch");
    if (singular_) throw std::runtime_error("TridiagLU::solve: singular matrix");
    Eigen::VectorXd x = b;
    // forward substitution with the recorded interchanges
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
        if (pivot_[i] == 1) std::swap(x[i], x[i + 1]);
        x[i + 1] -= dl_[i] * x[i];
    }
    // back substitution on the banded U
    x[n_ - 1] /= d_[n_ - 1];
    if (n_ > 1) {
        x[n_ - 2] = (x[n_ - 2] - du_[n_ - 2] * x[n_ - 1]) / d_[n_ - 2];
    }
    for (Eigen::Index i = n_ - 3; i >= 0; --i) {
        x[i] = (x[i] - du_[i] * x[i + 1] - du2_[i] * x[i + 2]) / d_[i];
    }
    return x;
}

double TridiagLU::condition_estimate(const Tridiag& A) const {
    if (singular_) return std::numeric_limits<double>::infinity();
    // two probes: an oscillating one and a smooth one, so both ends of the
    // spectrum of near-null directions are seen
    Eigen::VectorXd w1(n_);
    for (Eigen::Index i = 0; i < n_; ++i) w1[i] = (i % 2 == 0) ? 1.0 : -1.0;
    const double amp1 = solve(w1).lpNorm<Eigen::Infinity>();
    const double amp2 = solve(Eigen::VectorXd::Ones(n_)).lpNorm<Eigen::Infinity>();
    return A.norm_inf() * std::max(amp1, amp2);
}

}  // namespace bifkit
