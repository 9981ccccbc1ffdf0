#pragma once
#include <optional>
#include <vector>

#include "qls/numerics.hpp"

namespace qls {

/// Hermitian block encoding U with isometry G, so that G^dagger U G = A / alpha_a.
/// Built as U = [[B, sqrt(I-B^2)], [sqrt(I-B^2), -B]] for B = A/alpha_a, which is
/// a Hermitian unitary, hence G^dagger U^2 G = I holds automatically.
struct BlockEncoding {
    CMat u;  // unitary on dimension 2d
    CMat g;  // isometry, 2d x d
    double alpha_a = 1.0;
    double alpha_ainv = 0.0;  // norm bound on A^{-1}; 0 when not set
    bool rescaled = false;    // alpha_a >= 2||A||, both bounds powers of 3
    int m = 0;                // log3(alpha_a * alpha_ainv), valid when rescaled

    std::size_t dim() const { return g.cols(); }
    CMat encoded() const { return g.adjoint() * (u * g); }  // A / alpha_a
    CMat matrix() const;                                    // A itself
};

BlockEncoding build_block_encoding(const CMat& a, double alpha_a);

/// Rounds alpha_a up to a power of 3 with alpha_a >= 2||A||, rounds the given
/// inverse-norm bound up to a power of 3, and bumps it once more if the stage
/// count m = log3(alpha_a * alpha_ainv) would be zero.
BlockEncoding rescale_for_solver(const BlockEncoding& be, double alpha_ainv);

/// W = (2 G G^dagger - I) U.
CMat walk_operator(const BlockEncoding& be);

/// One invariant subspace of the qubitized encoding. 2D subspaces carry the
/// walk eigenpairs with phases +/- arccos(lambda/alpha_a); 1D subspaces occur
/// only at |lambda/alpha_a| = 1.
struct QubitizedSubspace {
    double lambda = 0.0;  // eigenvalue of A
    double ratio = 0.0;   // lambda / alpha_a
    double theta = 0.0;   // arccos(ratio)
    int dimension = 2;
    CVec phi0, phi1;            // orthonormal basis of the subspace
    CVec phi_plus, phi_minus;   // walk eigenvectors (2D case)
};

std::vector<QubitizedSubspace> qubitize(const BlockEncoding& be);

/// Odd Chebyshev approximation of the sign function: g(x) = sum_{odd j} beta_j T_j(x)
/// with g in [1-eps, 1] on [nu, 1], odd, and |g| <= 1 on [-1, 1].
struct ChebSignApprox {
    std::vector<double> beta;  // index j = degree; even entries are zero
    int degree = 0;
    double nu = 0.0, eps = 0.0;
    double achieved_error = 0.0;  // worst band violation measured on the grid

    double eval(double x) const;  // Clenshaw
};

ChebSignApprox cheb_sign_approx(double nu, double eps);

/// The four Fourier threshold functions entering quantum signal processing:
/// f_c odd (the band selector), f_a even, completed pointwise by
/// f_b = sqrt(1 - f_a^2 - f_c^2) and f_d = 0, with a two-stage renormalization
/// forcing f_a(0) = 1 exactly.
struct ThresholdQuartet {
    double theta0 = 0.0, phi = 0.0, eps = 0.0;
    ChebSignApprox g;

    int degree() const { return g.degree; }

    double fa(double theta) const;
    double fb(double theta) const;
    double fc(double theta) const;
    double fd(double theta) const { (void)theta; return 0.0; }

    /// 2x2 operator f_a I + i f_b Z + i f_c X + i f_d Y at eigenphase theta.
    CMat f_op(double theta) const;

  private:
    double fa1(double theta) const;
    double fb1(double theta) const;
    double fa1_at0 = 0.0, fb1_at0 = 0.0;
    friend ThresholdQuartet threshold_quartet(double, double, double);
};

ThresholdQuartet threshold_quartet(double theta0, double phi, double eps);

/// sin(rho*theta) / (rho*sin(theta)), extended by continuity to 1 at theta = 0.
double dirichlet_ratio(int rho, double theta);

/// The sandwich 1 - (1/6) rho^2 sin^2 t <= ratio <= 1 - ((4pi-8)/pi^3) rho^2 sin^2 t.
struct DirichletBounds {
    double lower = 0.0, upper = 0.0;
};
DirichletBounds dirichlet_sandwich(int rho, double theta);

}  // namespace qls
