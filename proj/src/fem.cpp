#include "gmrfsim/fem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gmrfsim {

double TriMesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Node& p1 = nodes[tri[0]];
    const Node& p2 = nodes[tri[1]];
    const Node& p3 = nodes[tri[2]];
    return 0.5 * ((p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y));
}

void TriMesh::validate_and_orient() {
    const int nn = n_nodes();
    if (nn < 3) throw std::invalid_argument("mesh: need at least 3 nodes");
    for (auto& tri : triangles)
        for (int v : tri)
            if (v < 0 || v >= nn) throw std::out_of_range("mesh: triangle index out of range");

    for (int t = 0; t < n_triangles(); ++t) {
        double a = triangle_area(t);
        if (a < 0.0) {
            std::swap(triangles[t][1], triangles[t][2]);
            a = -a;
        }
        if (!(a > 0.0)) {
            std::ostringstream msg;
            msg << "mesh: degenerate triangle " << t;
            throw std::invalid_argument(msg.str());
        }
    }

    // duplicate detection at 1e-12: lexicographic sort brings duplicates together
    std::vector<int> order(nn);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (nodes[a].x != nodes[b].x) return nodes[a].x < nodes[b].x;
        return nodes[a].y < nodes[b].y;
    });
    for (int i = 1; i < nn; ++i) {
        const Node& a = nodes[order[i - 1]];
        const Node& b = nodes[order[i]];
        if (std::abs(a.x - b.x) <= 1e-12 && std::abs(a.y - b.y) <= 1e-12) {
            std::ostringstream msg;
            msg << "mesh: duplicate nodes " << order[i - 1] << " and " << order[i];
            throw std::invalid_argument(msg.str());
        }
    }
}

double TriMesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < n_triangles(); ++t) a += std::abs(triangle_area(t));
    return a;
}

TriMesh grid_mesh(int nx, int ny, double h) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("grid_mesh: nx, ny must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("grid_mesh: h must be > 0");
    TriMesh mesh;
    mesh.nodes.reserve(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) mesh.nodes.push_back({ix * h, iy * h});
    mesh.triangles.reserve(static_cast<std::size_t>(nx - 1) * (ny - 1) * 2);
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
            const int v00 = iy * nx + ix;
            const int v10 = v00 + 1;
            const int v01 = v00 + nx;
            const int v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    mesh.validate_and_orient();
    return mesh;
}

TriMesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    int nn = 0, nt = 0;
    if (!(in >> nn >> nt)) throw std::runtime_error("mesh file: bad header: " + path);
    TriMesh mesh;
    mesh.nodes.resize(nn);
    for (auto& node : mesh.nodes)
        if (!(in >> node.x >> node.y)) throw std::runtime_error("mesh file: truncated nodes");
    mesh.triangles.resize(nt);
    for (auto& tri : mesh.triangles)
        if (!(in >> tri[0] >> tri[1] >> tri[2]))
            throw std::runtime_error("mesh file: truncated triangles");
    mesh.validate_and_orient();
    return mesh;
}

void write_mesh_file(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    out << mesh.n_nodes() << " " << mesh.n_triangles() << "\n";
    for (const auto& node : mesh.nodes) out << node.x << " " << node.y << "\n";
    for (const auto& tri : mesh.triangles) out << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
}

void AnisotropyField::validate(int n_triangles) const {
    if (static_cast<int>(tensors.size()) != n_triangles)
        throw std::invalid_argument("anisotropy: one tensor per triangle required");
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const auto& [h11, h12, h22] = tensors[t];
        if (!(h11 > 0.0) || !(h11 * h22 - h12 * h12 > 0.0)) {
            std::ostringstream msg;
            msg << "anisotropy: tensor " << t << " is not symmetric positive definite";
            throw std::invalid_argument(msg.str());
        }
    }
}

AnisotropyField read_anisotropy_file(const std::string& path, int n_triangles) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open anisotropy file: " + path);
    AnisotropyField field;
    field.tensors.resize(n_triangles);
    for (auto& tensor : field.tensors)
        if (!(in >> tensor[0] >> tensor[1] >> tensor[2]))
            throw std::runtime_error("anisotropy file: truncated");
    field.validate(n_triangles);
    return field;
}

DiagonalMatrix assemble_mass_lumped(const TriMesh& mesh) {
    DiagonalMatrix C;
    C.entries.assign(mesh.n_nodes(), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const double third = mesh.triangle_area(t) / 3.0;
        if (!(third > 0.0)) throw std::invalid_argument("mass assembly: degenerate triangle");
        for (int v : mesh.triangles[t]) C.entries[v] += third;
    }
    return C;
}

namespace {

// b_a = y_b - y_c, c_a = x_c - x_b for (a, b, c) cyclic; grad psi_a = (b_a, c_a) / (2A).
struct ElementGeometry {
    double b[3], c[3], area;

    explicit ElementGeometry(const TriMesh& mesh, int t) {
        const auto& tri = mesh.triangles[t];
        const auto& p = mesh.nodes;
        for (int a = 0; a < 3; ++a) {
            const auto& pb = p[tri[(a + 1) % 3]];
            const auto& pc = p[tri[(a + 2) % 3]];
            b[a] = pb.y - pc.y;
            c[a] = pc.x - pb.x;
        }
        area = mesh.triangle_area(t);
        if (!(area > 0.0)) throw std::invalid_argument("stiffness assembly: degenerate triangle");
    }
};

} // namespace

SparseSymMatrix assemble_stiffness(const TriMesh& mesh) {
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry g(mesh, t);
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a)
            for (int e = 0; e < 3; ++e)
                triplets.push_back(
                    {tri[a], tri[e], (g.b[a] * g.b[e] + g.c[a] * g.c[e]) / (4.0 * g.area)});
    }
    return from_triplets(mesh.n_nodes(), triplets);
}

SparseSymMatrix assemble_stiffness_aniso(const TriMesh& mesh, const AnisotropyField& H) {
    H.validate(mesh.n_triangles());
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeometry g(mesh, t);
        const auto& [h11, h12, h22] = H.tensors[t];
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a)
            for (int e = a; e < 3; ++e) {
                // one value per unordered pair, emitted to both orientations:
                // FP contraction would otherwise round the h12 cross term
                // differently under an (a, e) swap and break strict symmetry
                const double v = (h11 * g.b[a] * g.b[e] + h12 * (g.b[a] * g.c[e] + g.c[a] * g.b[e]) +
                                  h22 * g.c[a] * g.c[e]) /
                                 (4.0 * g.area);
                triplets.push_back({tri[a], tri[e], v});
                if (e != a) triplets.push_back({tri[e], tri[a], v});
            }
    }
    return from_triplets(mesh.n_nodes(), triplets);
}

MaternParams MaternParams::make(double sigma2, double range_phi, double nu) {
    MaternParams p;
    p.sigma2 = sigma2;
    p.range_phi = range_phi;
    p.nu = nu;
    p.alpha_spde = static_cast<int>(std::lround(nu + 1.0));
    p.validate();
    return p;
}

void MaternParams::validate() const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("MaternParams: sigma2 must be > 0");
    if (!(range_phi > 0.0)) throw std::invalid_argument("MaternParams: range must be > 0");
    if (!(nu > 0.0)) throw std::invalid_argument("MaternParams: nu must be > 0");
    if (alpha_spde < 1 || std::abs(nu + 1.0 - alpha_spde) > 1e-9)
        throw std::invalid_argument(
            "MaternParams: alpha = nu + 1 must be a positive integer (d = 2)");
}

double MaternParams::tau() const {
    const double pi = 3.14159265358979323846264338328;
    return std::sqrt(sigma2) * std::pow(kappa(), nu) *
           std::sqrt(4.0 * pi * std::tgamma(nu + 1.0) / std::tgamma(nu));
}

PrecisionOperator matern_operator(const TriMesh& mesh, const MaternParams& params,
                                  const AnisotropyField* H) {
    params.validate();
    const DiagonalMatrix C = assemble_mass_lumped(mesh);
    const SparseSymMatrix G = H ? assemble_stiffness_aniso(mesh, *H) : assemble_stiffness(mesh);

    const double k2 = params.kappa() * params.kappa();
    std::vector<Triplet> triplets;
    triplets.reserve(G.nnz());
    for (int i = 0; i < G.n(); ++i)
        for (std::size_t k = G.row_offsets()[i]; k < G.row_offsets()[i + 1]; ++k) {
            const int j = G.col_indices()[k];
            triplets.push_back(
                {i, j, G.values()[k] / (k2 * std::sqrt(C.entries[i] * C.entries[j]))});
        }

    PrecisionOperator op;
    op.S = from_triplets(G.n(), triplets, SymmetryMode::symmetrize);
    op.D.entries.resize(C.entries.size());
    const double scale = std::pow(params.kappa(), params.alpha_spde) / params.tau();
    for (std::size_t i = 0; i < C.entries.size(); ++i)
        op.D.entries[i] = scale * std::sqrt(C.entries[i]);
    op.D.validate_invertible();

    // P(x) = (1+x)^alpha by binomial coefficients
    const int a = params.alpha_spde;
    op.P.mode = TargetFunction::Mode::inv_sqrt;
    op.P.P_coeffs.assign(a + 1, 0.0);
    double binom = 1.0;
    for (int l = 0; l <= a; ++l) {
        op.P.P_coeffs[l] = binom;
        binom = binom * (a - l) / (l + 1);
    }
    op.P.check_positive(gershgorin_interval(op.S, true));
    return op;
}

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008;
constexpr double kPi = 3.14159265358979323846264338328;

// Ascending series for K_0 and K_1, accurate for x <= 2 (terms are (x^2/4)^k).
void bessel_k01_series(double x, double& k0, double& k1) {
    const double q = 0.25 * x * x;
    const double lg = std::log(0.5 * x);

    // I_0, I_1 and the psi-weighted companion sums, accumulated together.
    double term0 = 1.0;   // (x^2/4)^k / (k!)^2
    double i0 = term0, s0 = 0.0, h = 0.0;
    double term1 = 1.0;   // (x^2/4)^k / (k! (k+1)!)
    double i1 = term1, s1 = term1; // s1 terms carry H_k + H_{k+1}
    for (int k = 1; k < 60; ++k) {
        term0 *= q / (static_cast<double>(k) * k);
        h += 1.0 / k;
        i0 += term0;
        s0 += term0 * h;
        term1 *= q / (static_cast<double>(k) * (k + 1));
        i1 += term1;
        s1 += term1 * (2.0 * h + 1.0 / (k + 1));
        if (term0 < 1e-19 * i0 && term1 < 1e-19 * i1) break;
    }
    i1 *= 0.5 * x;
    k0 = -(lg + kEulerGamma) * i0 + s0;
    k1 = 1.0 / x + lg * i1 - 0.25 * x * (s1 - 2.0 * kEulerGamma * (i1 / (0.5 * x)));
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoid rule; the
// integrand is even and analytic, so the discretization error decays like
// exp(-c/step) and the step below leaves it far under the double rounding
// floor relative to exp(-x).
double bessel_k_quadrature(double nu, double x) {
    const double step = std::min(1.0 / 16.0, kPi * kPi / (2.0 * (x + 50.0)));
    double sum = 0.5 * std::exp(-x); // t = 0 term: cosh(0) = 1
    for (int m = 1; m < 100000; ++m) {
        const double t = m * step;
        const double term = std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
        sum += term;
        if (term < sum * 1e-20) break;
    }
    return sum * step;
}

} // namespace

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be > 0");
    if (nu < 0.0) nu = -nu; // K_{-nu} = K_nu
    const double two_nu = 2.0 * nu;
    if (std::abs(two_nu - std::round(two_nu)) > 1e-9)
        throw std::invalid_argument("bessel_k: order must be integer or half-integer");
    const bool half_integer = std::abs(nu - std::round(nu)) > 0.25;

    if (half_integer) {
        double km1 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x); // K_{1/2}
        if (nu < 1.0) return km1;
        double k = km1 * (1.0 + 1.0 / x); // K_{3/2}
        for (double m = 1.5; m + 0.5 < nu + 0.25; m += 1.0) {
            const double next = km1 + (2.0 * m / x) * k;
            km1 = k;
            k = next;
        }
        return k;
    }

    const int order = static_cast<int>(std::lround(nu));
    double k0, k1;
    if (x <= 2.0) {
        bessel_k01_series(x, k0, k1);
    } else {
        k0 = bessel_k_quadrature(0.0, x);
        k1 = bessel_k_quadrature(1.0, x);
    }
    if (order == 0) return k0;
    if (order == 1) return k1;
    double km1 = k0, k = k1;
    for (int m = 1; m < order; ++m) {
        const double next = km1 + (2.0 * m / x) * k;
        km1 = k;
        k = next;
    }
    return k;
}

double matern_covariance(double h, const MaternParams& params) {
    if (h < 0.0) throw std::domain_error("matern_covariance: h must be >= 0");
    if (!(params.sigma2 > 0.0) || !(params.range_phi > 0.0) || !(params.nu > 0.0))
        throw std::invalid_argument("matern_covariance: bad parameters");
    const double two_nu = 2.0 * params.nu;
    if (std::abs(two_nu - std::round(two_nu)) > 1e-9)
        throw std::invalid_argument("matern_covariance: nu must be integer or half-integer");
    if (h == 0.0) return params.sigma2;
    const double u = h / params.range_phi;
    return params.sigma2 * std::pow(u, params.nu) * bessel_k(params.nu, u) /
           (std::pow(2.0, params.nu - 1.0) * std::tgamma(params.nu));
}

double matern_variogram(double h, const MaternParams& params) {
    return params.sigma2 - matern_covariance(h, params);
}

} // namespace gmrfsim
