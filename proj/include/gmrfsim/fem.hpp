#pragma once

#include "gmrfsim/chebyshev.hpp"
#include "gmrfsim/sparse.hpp"

#include <array>
#include <string>
#include <vector>

namespace gmrfsim {

/// Linear-triangle mesh. Triangles are re-oriented to positive signed area on
/// validation; duplicate nodes (within 1e-12) and degenerate triangles are
/// rejected.
struct TriMesh {
    struct Node {
        double x, y;
    };
    std::vector<Node> nodes;
    std::vector<std::array<int, 3>> triangles;

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
    double triangle_area(int t) const; // signed
    void validate_and_orient();        // throws on invalid mesh
    double total_area() const;
};

/// Regular nx-by-ny node lattice with spacing h, each cell split into two
/// triangles with a consistent diagonal.
TriMesh grid_mesh(int nx, int ny, double h);

/// Mesh text format: "n_nodes n_triangles", node "x y" lines, then 0-based
/// triangle "i j k" lines.
TriMesh read_mesh_file(const std::string& path);
void write_mesh_file(const TriMesh& mesh, const std::string& path);

/// Per-triangle symmetric positive definite 2x2 tensors (h11, h12, h22).
struct AnisotropyField {
    std::vector<std::array<double, 3>> tensors; // one per triangle

    void validate(int n_triangles) const; // throws on size or SPD failure
};

/// Anisotropy file: one "h11 h12 h22" line per triangle.
AnisotropyField read_anisotropy_file(const std::string& path, int n_triangles);

/// Lumped mass matrix: C_ii = <psi_i, 1> = sum of incident triangle areas / 3.
DiagonalMatrix assemble_mass_lumped(const TriMesh& mesh);

/// P1 stiffness G_ij = <grad psi_i, grad psi_j>; rows sum to zero.
SparseSymMatrix assemble_stiffness(const TriMesh& mesh);

/// Anisotropic stiffness G_ij = <grad psi_i, H grad psi_j> with H constant per
/// triangle; equals assemble_stiffness when every H is the identity.
SparseSymMatrix assemble_stiffness_aniso(const TriMesh& mesh, const AnisotropyField& H);

/// Matern field parameters in d = 2. The SPDE exponent alpha = nu + 1 must be
/// a positive integer.
struct MaternParams {
    double sigma2 = 1.0;
    double range_phi = 1.0; // scale parameter phi; kappa = 1/phi
    double nu = 1.0;
    int alpha_spde = 2;

    static MaternParams make(double sigma2, double range_phi, double nu);
    void validate() const;
    double kappa() const { return 1.0 / range_phi; }
    double tau() const; // sigma kappa^nu sqrt((4 pi)^{d/2} Gamma(nu + d/2) / Gamma(nu))
};

/// The (S, D, P) triple with Q = D P(S) D.
struct PrecisionOperator {
    SparseSymMatrix S;
    DiagonalMatrix D;
    TargetFunction P; // mode inv_sqrt; P_coeffs strictly positive on spectrum

    int n() const { return S.n(); }
};

/// S = (1/kappa^2) C^{-1/2} G C^{-1/2}, D = (kappa^alpha / tau) C^{1/2},
/// P(x) = (1+x)^alpha with C the lumped mass matrix. Pass a null H for the
/// stationary operator.
PrecisionOperator matern_operator(const TriMesh& mesh, const MaternParams& params,
                                  const AnisotropyField* H = nullptr);

/// Modified Bessel function of the second kind, integer or half-integer order
/// nu >= 0. Ascending series for x <= 2; exponentially convergent quadrature
/// of the integral representation above; half-integers in closed form.
double bessel_k(double nu, double x);

/// Matern covariance C(h) = sigma^2 / (2^{nu-1} Gamma(nu)) (h/phi)^nu K_nu(h/phi),
/// C(0) = sigma^2. nu must be integer or half-integer.
double matern_covariance(double h, const MaternParams& params);

/// Model semivariance sigma^2 - C(h).
double matern_variogram(double h, const MaternParams& params);

} // namespace gmrfsim
