#include "endspec/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "endspec/numerics.hpp"

#include <lapacke.h>

namespace endspec {

void Grid1D::validate() const
{
    if (!(L > 0.0))
        throw DomainError("grid length must be positive");
    if (n_points < 50)
        throw DomainError("grid needs at least 50 points");
    if (h() > 0.1)
        throw GridWarning("grid too coarse: h = " + std::to_string(h()) + " > 0.1");
}

Mesh uniform_mesh(double L, int n_points, double r0, bool scaled)
{
    Mesh m;
    double h = L / (n_points + 1);
    m.x.resize(n_points + 2);
    for (int j = 0; j <= n_points + 1; ++j)
        m.x[j] = j * h;
    m.scaled = scaled;
    if (scaled) {
        if (!(r0 < L))
            throw DomainError("truncation length must exceed the scaling radius");
        auto j = static_cast<std::size_t>(std::ceil(r0 / h - 1e-9));
        m.junction = std::clamp<std::size_t>(j, 1, n_points);
    } else {
        m.junction = m.x.size() - 1;
    }
    return m;
}

Mesh aligned_mesh(std::vector<double> anchors, double r0, double L, double h, int level, bool scaled)
{
    anchors.push_back(0.0);
    anchors.push_back(r0);
    std::sort(anchors.begin(), anchors.end());
    std::vector<double> cuts;
    for (double a : anchors)
        if (a >= 0.0 && a <= r0 && (cuts.empty() || a - cuts.back() > 1e-12))
            cuts.push_back(a);
    if (!(L > r0))
        throw DomainError("mesh length must exceed the scaling radius");
    cuts.push_back(L);
    Mesh m;
    m.scaled = scaled;
    m.x.push_back(0.0);
    long refine = 1L << level;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s], b = cuts[s + 1];
        long cells = std::max(1L, static_cast<long>(std::ceil((b - a) / h - 1e-9))) * refine;
        for (long c = 1; c <= cells; ++c)
            m.x.push_back(c == cells ? b : a + (b - a) * double(c) / cells);
        if (std::abs(b - r0) < 1e-12)
            m.junction = m.x.size() - 1;
    }
    if (!scaled)
        m.junction = m.x.size() - 1;
    return m;
}

FdSystem assemble(const ModeOperator& op, cplx stretch, const Mesh& mesh)
{
    if (op.kind != ModeKind::cylindrical)
        throw DomainError("only half-line mode operators are discretized here");
    const auto& x = mesh.x;
    std::size_t J = mesh.junction;
    std::vector<cplx> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        z[i] = (i <= J) ? cplx(x[i]) : x[J] + stretch * (x[i] - x[J]);

    std::size_t n = mesh.unknowns();
    FdSystem s;
    s.diag.resize(n);
    s.upper.resize(n > 0 ? n - 1 : 0);
    s.weight.resize(n);
    s.z.assign(z.begin() + 1, z.end() - 1);
    for (std::size_t j = 1; j <= n; ++j) {
        cplx hm = z[j] - z[j - 1], hp = z[j + 1] - z[j];
        cplx d = 0.5 * (hm + hp);
        double lo = x[j] - 0.5 * (x[j] - x[j - 1]);
        double hi = x[j] + 0.5 * (x[j + 1] - x[j]);
        double vint = op.potential.integral(lo, hi);
        s.weight[j - 1] = d;
        s.diag[j - 1] = 1.0 / hm + 1.0 / hp + op.mode_mu * d + vint;
        if (j < n)
            s.upper[j - 1] = -1.0 / hp;
    }
    return s;
}

SparseMatrixC FdSystem::symmetric() const
{
    std::size_t n = size();
    std::vector<cplx> r(n);
    for (std::size_t j = 0; j < n; ++j)
        r[j] = std::sqrt(weight[j]);
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(3 * n);
    for (std::size_t j = 0; j < n; ++j) {
        t.emplace_back(j, j, diag[j] / weight[j]);
        if (j + 1 < n) {
            cplx a = upper[j] / (r[j] * r[j + 1]);
            t.emplace_back(j, j + 1, a);
            t.emplace_back(j + 1, j, a);
        }
    }
    SparseMatrixC A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

SparseMatrixC FdSystem::pencil(cplx lambda) const
{
    std::size_t n = size();
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(3 * n);
    for (std::size_t j = 0; j < n; ++j) {
        t.emplace_back(j, j, diag[j] - lambda * weight[j]);
        if (j + 1 < n) {
            t.emplace_back(j, j + 1, upper[j]);
            t.emplace_back(j + 1, j, upper[j]);
        }
    }
    SparseMatrixC A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

namespace {

std::string grid_text(const Grid1D& g)
{
    std::ostringstream os;
    os.precision(12);
    os << "L=" << g.L << " n=" << g.n_points << " h=" << g.h()
       << " scheme=" << (g.scheme == Scheme::fd2 ? "FD2" : "FD4");
    return os.str();
}

// Five-point rows where the stencil sits in one uniform region, three-point rows elsewhere.
SparseMatrixC assemble_fd4(const ModeOperator& op, cplx stretch, const Mesh& mesh)
{
    const auto& x = mesh.x;
    std::size_t J = mesh.junction, n = mesh.unknowns(), last = x.size() - 1;
    std::vector<cplx> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        z[i] = (i <= J) ? cplx(x[i]) : x[J] + stretch * (x[i] - x[J]);
    bool pointwise = op.potential.smoothness() == Smoothness::continuous;
    std::vector<Eigen::Triplet<cplx>> t;
    auto put = [&](std::size_t row, long col, cplx v) {
        if (col >= 1 && col <= static_cast<long>(n))
            t.emplace_back(row - 1, col - 1, v);
    };
    for (std::size_t j = 1; j <= n; ++j) {
        double vj;
        if (pointwise) {
            vj = op.potential(x[j]);
        } else {
            double lo = x[j] - 0.5 * (x[j] - x[j - 1]), hi = x[j] + 0.5 * (x[j + 1] - x[j]);
            vj = op.potential.integral(lo, hi) / (hi - lo);
        }
        long jl = static_cast<long>(j);
        bool left_region = j + 2 <= J || (j + 2 <= last && J == last);
        bool right_region = j >= J + 2;
        bool ghost_left = j == 1 && (J >= 3 || J == last);
        bool ghost_right = j + 1 == last && (j >= J + 2 || J == last);
        bool five = (left_region || right_region) && (j >= 2 || ghost_left) && (j + 2 <= last || ghost_right);
        if (five) {
            cplx hh = right_region ? stretch * (x[j + 1] - x[j]) : cplx(x[j + 1] - x[j]);
            cplx s = 1.0 / (hh * hh);
            cplx c2 = s / 12.0, c1 = -4.0 / 3.0 * s, c0 = 2.5 * s;
            cplx diag = c0 + op.mode_mu + vj;
            // odd reflection across Dirichlet ends
            if (j == 1)
                diag -= c2;
            if (j == n)
                diag -= c2;
            put(j, jl, diag);
            put(j, jl - 1, c1);
            put(j, jl + 1, c1);
            if (j >= 3)
                put(j, jl - 2, c2);
            if (j + 2 <= n)
                put(j, jl + 2, c2);
        } else {
            cplx hm = z[j] - z[j - 1], hp = z[j + 1] - z[j];
            put(j, jl - 1, -2.0 / (hm * (hm + hp)));
            put(j, jl, 2.0 / (hm * hp) + op.mode_mu + vj);
            put(j, jl + 1, -2.0 / (hp * (hm + hp)));
        }
    }
    SparseMatrixC A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

DiscretizedOperator finish(SparseMatrixC A, const Mesh& mesh, std::vector<cplx> weights, const Grid1D& g,
                           std::string tag, bool real_symmetric)
{
    DiscretizedOperator d;
    d.matrix = Eigen::MatrixXcd(A);
    d.sparse = std::move(A);
    d.nodes.assign(mesh.x.begin() + 1, mesh.x.end() - 1);
    d.weights = std::move(weights);
    d.grid = grid_text(g);
    d.operator_tag = std::move(tag);
    d.real_symmetric = real_symmetric;
    return d;
}

} // namespace

DiscretizedOperator discretize(const ScaledModeOperator& op, const Grid1D& grid)
{
    grid.validate();
    if (!(grid.L > op.scaling_radius))
        throw DomainError("grid length must exceed the scaling radius");
    cplx stretch = 1.0 + op.theta.theta();
    Mesh mesh = uniform_mesh(grid.L, grid.n_points, op.scaling_radius, true);
    bool real = op.theta.is_real();
    if (grid.scheme == Scheme::fd4) {
        SparseMatrixC A = assemble_fd4(op.base, stretch, mesh);
        std::vector<cplx> w(mesh.unknowns(), cplx(grid.h()));
        return finish(std::move(A), mesh, std::move(w), grid, op.form(), op.theta.theta() == 0.0);
    }
    FdSystem s = assemble(op.base, stretch, mesh);
    return finish(s.symmetric(), mesh, s.weight, grid, op.form(), real);
}

DiscretizedOperator discretize(const ModeOperator& op, const Grid1D& grid)
{
    double r0 = std::max(op.potential.support_radius(), grid.h());
    return discretize(dilate_mode(op, ScalingParameter::unitary(0.0), r0), grid);
}

DiscretizedOperator from_sparse(SparseMatrixC A, std::string tag, bool real_symmetric)
{
    DiscretizedOperator d;
    d.matrix = Eigen::MatrixXcd(A);
    d.sparse = std::move(A);
    d.operator_tag = std::move(tag);
    d.real_symmetric = real_symmetric;
    return d;
}

namespace {

double inf_norm(const SparseMatrixC& A)
{
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(A, k); it; ++it)
            rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

SparseMatrixC shifted(const SparseMatrixC& A, cplx z)
{
    SparseMatrixC I(A.rows(), A.cols());
    I.setIdentity();
    SparseMatrixC M = A - z * I;
    M.makeCompressed();
    return M;
}

bool sort_key(cplx a, cplx b)
{
    if (a.real() != b.real())
        return a.real() < b.real();
    return a.imag() < b.imag();
}

} // namespace

double residual_certificate(const SparseMatrixC& A, double norm_a, cplx z, int seed)
{
    if (norm_a == 0.0)
        return 0.0;
    const long n = A.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd x(n);
    for (long i = 0; i < n; ++i)
        x(i) = cplx(nd(rng), nd(rng));
    x.normalize();
    cplx shift = z;
    Eigen::SparseLU<SparseMatrixC> lu;
    for (int attempt = 0; attempt < 4; ++attempt) {
        lu.compute(shifted(A, shift));
        if (lu.info() == Eigen::Success)
            break;
        shift = z + cplx(1e-14 * norm_a * (attempt + 1), 1e-14 * norm_a);
    }
    if (lu.info() != Eigen::Success)
        return 0.0;
    for (int it = 0; it < 3; ++it) {
        Eigen::VectorXcd y = lu.solve(x);
        double ny = y.norm();
        if (!std::isfinite(ny) || ny == 0.0)
            break;
        x = y / ny;
    }
    Eigen::VectorXcd r = A * x - z * x;
    return r.norm() / norm_a;
}

namespace {

bool is_hessenberg(const SparseMatrixC& A)
{
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(A, k); it; ++it)
            if (it.row() > it.col() + 1 && it.value() != cplx(0.0))
                return false;
    return true;
}

} // namespace

std::vector<cplx> eigenvalues(const DiscretizedOperator& op)
{
    std::vector<cplx> out;
    if (op.real_symmetric) {
        Eigen::MatrixXd R = op.matrix.real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NumericalError("symmetric eigensolver failed");
        for (long i = 0; i < es.eigenvalues().size(); ++i)
            out.emplace_back(es.eigenvalues()(i), 0.0);
    } else if (is_hessenberg(op.sparse)) {
        // already Hessenberg: QR sweep straight away
        lapack_int n = static_cast<lapack_int>(op.matrix.rows());
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor> H = op.matrix;
        std::vector<lapack_complex_double> w(n);
        lapack_int info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n,
                                         reinterpret_cast<lapack_complex_double*>(H.data()), n, w.data(),
                                         nullptr, 1);
        if (info != 0)
            throw NumericalError("zhseqr failed, info " + std::to_string(info));
        for (auto& v : w)
            out.emplace_back(reinterpret_cast<const cplx&>(v));
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, false);
        if (es.info() != Eigen::Success)
            throw NumericalError("complex eigensolver failed");
        for (long i = 0; i < es.eigenvalues().size(); ++i)
            out.push_back(es.eigenvalues()(i));
    }
    std::sort(out.begin(), out.end(), sort_key);
    return out;
}

std::vector<EigenPair> eig(const DiscretizedOperator& op, double residual_bound)
{
    auto values = eigenvalues(op);
    double na = inf_norm(op.sparse);
    std::vector<EigenPair> out(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        double r = residual_certificate(op.sparse, na, values[i], static_cast<int>(i) + 1);
        out[i] = {values[i], r, r <= residual_bound};
    });
    return out;
}

std::vector<EigenPair> eig(const Eigen::MatrixXcd& matrix, double residual_bound)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(matrix, true);
    if (es.info() != Eigen::Success)
        throw NumericalError("complex eigensolver failed");
    double na = matrix.cwiseAbs().rowwise().sum().maxCoeff();
    std::vector<EigenPair> out;
    for (long i = 0; i < matrix.rows(); ++i) {
        Eigen::VectorXcd v = es.eigenvectors().col(i);
        cplx z = es.eigenvalues()(i);
        double r = na > 0.0 ? (matrix * v - z * v).norm() / (na * v.norm()) : 0.0;
        out.push_back({z, r, r <= residual_bound});
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return sort_key(a.value, b.value); });
    return out;
}

cplx exterior_wavenumber(cplx z, double mu, cplx stretch)
{
    cplx k = std::sqrt(z - mu);
    if ((k * stretch).imag() < 0.0)
        k = -k;
    return k;
}

std::vector<double> potential_anchors(const ModeOperator& op, double r0)
{
    std::vector<double> a{0.0};
    for (double b : op.potential.breakpoints())
        if (b > 0.0 && b < r0)
            a.push_back(b);
    a.push_back(r0);
    return a;
}

namespace {

cplx rayleigh(const SparseMatrixC& A, const Eigen::VectorXcd& x)
{
    Eigen::VectorXcd ax = A * x;
    return x.transpose().dot(ax) / x.transpose().dot(x);
}

} // namespace

RefinedEigenvalue refine_eigenvalue(const ScaledModeOperator& op, cplx guess, double h,
                                    const RefineOptions& options)
{
    RefinedEigenvalue out;
    out.start = guess;
    cplx stretch = 1.0 + op.theta.theta();
    double r0 = op.scaling_radius;
    cplx k = exterior_wavenumber(guess, op.base.mode_mu, stretch);
    double gamma = (k * stretch).imag();
    if (!(gamma > 1e-8)) {
        out.note = "eigenfunction does not decay in the scaled exterior";
        return out;
    }
    double ext = std::clamp(options.decay_exponent / (2.0 * gamma), 4.0 * h, options.max_exterior);
    out.exterior_length = ext;
    auto anchors = potential_anchors(op.base, r0);

    cplx shift = guess;
    Eigen::VectorXcd x;
    double residual = 0.0;
    for (int level = 0; level < options.levels; ++level) {
        Mesh mesh = aligned_mesh(anchors, r0, r0 + ext, h, level, true);
        FdSystem sys = assemble(op.base, stretch, mesh);
        SparseMatrixC A = sys.symmetric();
        const long n = A.rows();
        x = Eigen::VectorXcd::Ones(n).normalized();
        Eigen::SparseLU<SparseMatrixC> lu;
        lu.analyzePattern(shifted(A, shift));
        auto factor = [&](cplx s) {
            lu.factorize(shifted(A, s));
            return lu.info() == Eigen::Success;
        };
        if (!factor(shift)) {
            shift += cplx(1e-9, 1e-9) * (1.0 + std::abs(shift));
            if (!factor(shift)) {
                out.note = "singular shift";
                return out;
            }
        }
        for (int it = 0; it < 3; ++it) {
            Eigen::VectorXcd y = lu.solve(x);
            x = y / y.norm();
        }
        cplx rq = rayleigh(A, x);
        for (int it = 0; it < 30; ++it) {
            if (!factor(rq))
                break;
            Eigen::VectorXcd y = lu.solve(x);
            double ny = y.norm();
            if (!std::isfinite(ny))
                break;
            x = y / ny;
            cplx next = rayleigh(A, x);
            bool done = std::abs(next - rq) <= 1e-15 * (1.0 + std::abs(rq));
            rq = next;
            if (done)
                break;
        }
        if (level == 0 && std::abs(rq - guess) > options.acceptance_radius * (1.0 + std::abs(guess))) {
            out.note = "iteration left the neighbourhood of the starting value";
            return out;
        }
        out.level_values.push_back(rq);
        shift = rq;
        residual = (A * x - rq * x).norm() / inf_norm(A);
    }
    auto ex = richardson(out.level_values);
    out.value = ex.value;
    out.error_estimate = ex.error;
    out.residual = residual;
    out.ok = std::isfinite(out.value.real()) && std::isfinite(out.value.imag());
    return out;
}

std::vector<ResonanceItem> ResonanceSet::resonances() const
{
    std::vector<ResonanceItem> r;
    for (auto& i : items)
        if (i.kind == ItemKind::resonance)
            r.push_back(i);
    return r;
}

std::vector<ResonanceItem> ResonanceSet::bound_states() const
{
    std::vector<ResonanceItem> r;
    for (auto& i : items)
        if (i.kind == ItemKind::bound)
            r.push_back(i);
    return r;
}

double auto_scaling_radius(const std::vector<ModeOperator>& model)
{
    double r = 0.0;
    for (auto& op : model)
        r = std::max(r, op.potential.support_radius());
    return r > 0.0 ? r : 1.0;
}

namespace {

struct Candidate {
    cplx value;
    double residual;
    double error;
    bool used = false;
};

bool is_bound(cplx z, double mu, double real_tol)
{
    return std::abs(z.imag()) <= real_tol * (1.0 + std::abs(z)) && z.real() < mu;
}

std::vector<Candidate> coarse_candidates(const ModeOperator& op, const ScalingParameter& theta,
                                         const Grid1D& grid, double r0, const ResonanceOptions& o,
                                         std::vector<std::string>& notes)
{
    auto d = discretize(dilate_mode(op, theta, r0), grid);
    auto values = eigenvalues(d);
    RaySet rays = essential_rays({{op.mode_mu, "mu"}}, theta);
    double na = inf_norm(d.sparse);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        cplx z = values[i];
        if (std::abs(z) > o.energy_window)
            continue;
        if (distance_to_rays(z, rays) <= o.rays_tolerance * (1.0 + std::abs(z)))
            continue;
        double res = residual_certificate(d.sparse, na, z, static_cast<int>(i) + 1);
        if (res > o.residual_bound) {
            notes.push_back("uncertified eigenvalue skipped");
            continue;
        }
        out.push_back({z, res, 0.0});
    }
    return out;
}

// Continuum discretization points move with theta by O(1); true eigenvalues only by the grid error.
bool seen_everywhere(cplx z, std::size_t g, std::size_t T, const std::vector<std::vector<Candidate>>& lists)
{
    for (std::size_t t = 0; t < T; ++t) {
        bool hit = false;
        for (auto& c : lists[g * T + t])
            hit = hit || std::abs(c.value - z) <= 1e-2 * (1.0 + std::abs(z));
        if (!hit)
            return false;
    }
    return true;
}

void refine_candidates(std::vector<Candidate>& list, const ScaledModeOperator& op, const Grid1D& grid,
                       const ResonanceOptions& o, std::vector<std::string>& notes)
{
    std::vector<Candidate> kept;
    for (auto& c : list) {
        auto r = refine_eigenvalue(op, c.value, grid.h(), o.refine);
        if (!r.ok) {
            std::ostringstream os;
            os << "refinement failed near " << c.value << ": " << r.note;
            notes.push_back(os.str());
            continue;
        }
        if (r.residual > o.residual_bound) {
            notes.push_back("refined eigenvector residual above bound");
            continue;
        }
        kept.push_back({r.value, r.residual, r.error_estimate});
    }
    list = std::move(kept);
}

} // namespace

ResonanceSet find_resonances(const std::vector<ModeOperator>& model, const std::vector<ScalingParameter>& thetas,
                             const Grid1D& grid, const ResonanceOptions& o)
{
    if (thetas.empty())
        throw DomainError("empty scaling sweep");
    if (model.empty())
        throw DomainError("empty model");
    int sign = 0;
    for (auto& t : thetas) {
        if (!in_gamma(t.theta()))
            throw DomainError("sweep values must lie in the admissible region");
        int s = t.theta().imag() > 0 ? 1 : (t.theta().imag() < 0 ? -1 : 0);
        if (sign != 0 && s != 0 && s != sign)
            throw DomainError("sweep values must share the sign of Im theta");
        if (s != 0)
            sign = s;
    }
    grid.validate();
    double r0 = o.scaling_radius > 0.0 ? o.scaling_radius : auto_scaling_radius(model);

    // identical modes are solved once and carried as multiplicity
    std::vector<std::size_t> first;
    std::vector<int> count;
    std::map<std::string, std::size_t> group_of;
    for (std::size_t i = 0; i < model.size(); ++i) {
        auto [it, fresh] = group_of.emplace(model[i].identity(), first.size());
        if (fresh) {
            first.push_back(i);
            count.push_back(0);
        }
        ++count[it->second];
    }

    std::size_t G = first.size(), T = thetas.size();
    std::vector<std::vector<Candidate>> lists(G * T);
    std::vector<std::vector<std::string>> notes(G * T);
    parallel_for(G * T, [&](std::size_t task) {
        std::size_t g = task / T, t = task % T;
        lists[task] = coarse_candidates(model[first[g]], thetas[t], grid, r0, o, notes[task]);
    });
    std::vector<std::vector<Candidate>> filtered(G * T);
    for (std::size_t task = 0; task < G * T; ++task)
        for (auto& c : lists[task])
            if (seen_everywhere(c.value, task / T, T, lists))
                filtered[task].push_back(c);
    lists = std::move(filtered);
    if (o.extrapolate)
        parallel_for(G * T, [&](std::size_t task) {
            std::size_t g = task / T, t = task % T;
            refine_candidates(lists[task], dilate_mode(model[first[g]], thetas[t], r0), grid, o, notes[task]);
        });

    ResonanceSet set;
    for (auto& n : notes)
        set.warnings.insert(set.warnings.end(), n.begin(), n.end());

    for (std::size_t g = 0; g < G; ++g) {
        const ModeOperator& op = model[first[g]];
        std::vector<Candidate*> seeds;
        for (auto& c : lists[g * T])
            seeds.push_back(&c);
        std::stable_sort(seeds.begin(), seeds.end(),
                         [](auto* a, auto* b) { return std::abs(a->value.imag()) > std::abs(b->value.imag()); });
        std::vector<ResonanceItem> emitted;
        for (auto* seed : seeds) {
            std::vector<Candidate*> chain{seed};
            seed->used = true;
            cplx mean = seed->value;
            bool complete = true;
            for (std::size_t t = 1; t < T; ++t) {
                Candidate* best = nullptr;
                double link = 1e-3 * (1.0 + std::abs(mean));
                for (auto& c : lists[g * T + t]) {
                    if (c.used)
                        continue;
                    double d = std::abs(c.value - mean);
                    if (d <= link && (!best || d < std::abs(best->value - mean)))
                        best = &c;
                }
                if (!best) {
                    complete = false;
                    break;
                }
                best->used = true;
                chain.push_back(best);
                mean = 0.0;
                for (auto* c : chain)
                    mean += c->value;
                mean /= double(chain.size());
            }
            std::ostringstream where;
            where << seed->value;
            if (!complete) {
                set.warnings.push_back("point " + where.str() + " not reproduced across the sweep");
                continue;
            }
            double spread = 0.0, res = 0.0, err = 0.0;
            for (auto* c : chain) {
                spread = std::max(spread, std::abs(c->value - mean));
                res = std::max(res, c->residual);
                err = std::max(err, c->error);
            }
            if (spread > o.stability_tolerance) {
                set.warnings.push_back("point " + where.str() + " moves with theta (spread " +
                                       std::to_string(spread) + ")");
                continue;
            }
            ResonanceItem item;
            item.z = mean;
            item.residual = res;
            item.theta_spread = spread;
            item.multiplicity = count[g];
            item.mode = first[g];
            item.mu = op.mode_mu;
            item.kind = is_bound(mean, op.mode_mu, o.real_tolerance) ? ItemKind::bound : ItemKind::resonance;
            if (item.kind == ItemKind::bound)
                item.z = cplx(mean.real(), 0.0);
            item.error_estimate = err;
            item.method = "complex-scaling";
            emitted.push_back(item);
        }
        for (std::size_t a = 0; a < emitted.size(); ++a)
            for (std::size_t b = a + 1; b < emitted.size(); ++b)
                if (std::abs(emitted[a].z - emitted[b].z) < 2.0 * o.stability_tolerance) {
                    emitted[a].ambiguous = emitted[b].ambiguous = true;
                    set.warnings.push_back("ambiguous clusters within twice the stability tolerance");
                }
        set.items.insert(set.items.end(), emitted.begin(), emitted.end());
    }
    std::sort(set.items.begin(), set.items.end(), [](auto& a, auto& b) {
        if (a.mode != b.mode)
            return a.mode < b.mode;
        return sort_key(a.z, b.z);
    });
    std::ostringstream prov;
    prov << "grid " << grid_text(grid) << "; R0=" << r0 << "; sweep=" << T;
    set.provenance = prov.str();
    return set;
}

std::vector<RefinedEigenvalue> bound_states(const ModeOperator& op, const ScalingParameter& theta,
                                            const Grid1D& grid, const ResonanceOptions& o)
{
    double r0 = o.scaling_radius > 0.0 ? o.scaling_radius : auto_scaling_radius({op});
    auto scaled = dilate_mode(op, theta, r0);
    auto d = discretize(scaled, grid);
    auto values = eigenvalues(d);
    RaySet rays = essential_rays({{op.mode_mu, "mu"}}, theta);
    std::vector<RefinedEigenvalue> out;
    for (cplx z : values) {
        // coarse complex-scaled values carry an O(h^2) imaginary part
        if (!is_bound(z, op.mode_mu, theta.is_real() ? 1e-6 : 1e-2))
            continue;
        if (distance_to_rays(z, rays) <= o.rays_tolerance * (1.0 + std::abs(z)))
            continue;
        auto r = o.extrapolate ? refine_eigenvalue(scaled, z, grid.h(), o.refine) : RefinedEigenvalue{};
        if (!o.extrapolate) {
            r.value = r.start = z;
            r.ok = true;
        }
        if (!r.ok)
            continue;
        if (o.extrapolate && !theta.is_real() &&
            std::abs(r.value.imag()) > std::max(o.real_tolerance * (1.0 + std::abs(r.value)), 10.0 * r.error_estimate))
            continue;
        r.value = cplx(r.value.real(), 0.0);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.value.real() < b.value.real(); });
    return out;
}


void LineGrid::validate() const
{
    if (!(t1 > t0) || n_points < 50)
        throw DomainError("line grid needs t1 > t0 and at least 50 points");
    if (h() > 0.1)
        throw GridWarning("line grid too coarse: h = " + std::to_string(h()) + " > 0.1");
}

namespace {

// edge weight p, node mass w, potential q: sum p (f' )^2 + sum q w f^2 against sum w f^2
DiscretizedOperator weighted_line(const LineGrid& g, const std::function<double(double)>& p,
                                  const std::function<double(double)>& w, const std::function<double(double)>& q,
                                  std::string tag)
{
    g.validate();
    const double h = g.h();
    const int total = g.n_points + 2;
    int first = g.left == LineBoundary::dirichlet ? 1 : 0;
    int last = g.right == LineBoundary::dirichlet ? total - 2 : total - 1;
    const int m = last - first + 1;
    auto t = [&](int j) { return g.t0 + j * h; };
    std::vector<double> mass(m), diag(m, 0.0), off(m > 0 ? m - 1 : 0);
    for (int j = first; j <= last; ++j) {
        double cell = (j == 0 || j == total - 1) ? 0.5 * h : h;
        mass[j - first] = w(t(j)) * cell;
        diag[j - first] = q(t(j)) * w(t(j)) * cell;
    }
    for (int j = 0; j + 1 < total; ++j) {
        double pe = p(t(j) + 0.5 * h) / h;
        if (j >= first && j <= last)
            diag[j - first] += pe;
        if (j + 1 >= first && j + 1 <= last)
            diag[j + 1 - first] += pe;
        if (j >= first && j + 1 <= last)
            off[j - first] = -pe;
    }
    std::vector<Eigen::Triplet<cplx>> tr;
    for (int i = 0; i < m; ++i) {
        tr.emplace_back(i, i, diag[i] / mass[i]);
        if (i + 1 < m) {
            double v = off[i] / std::sqrt(mass[i] * mass[i + 1]);
            tr.emplace_back(i, i + 1, v);
            tr.emplace_back(i + 1, i, v);
        }
    }
    DiscretizedOperator d;
    d.sparse = SparseMatrixC(m, m);
    d.sparse.setFromTriplets(tr.begin(), tr.end());
    d.sparse.makeCompressed();
    for (int j = first; j <= last; ++j) {
        d.nodes.push_back(t(j));
        d.weights.emplace_back(mass[j - first]);
    }
    std::ostringstream os;
    os << "line [" << g.t0 << "," << g.t1 << "] n=" << g.n_points << " ends "
       << (g.left == LineBoundary::dirichlet ? "D" : "N") << (g.right == LineBoundary::dirichlet ? "D" : "N");
    d.grid = os.str();
    d.operator_tag = std::move(tag);
    d.real_symmetric = true;
    return d;
}

} // namespace

DiscretizedOperator discretize_line(const LineOperator& op, const LineGrid& grid)
{
    auto one = [](double) { return 1.0; };
    return weighted_line(grid, one, one, [&](double t) { return op.potential(t); }, op.describe());
}

DiscretizedOperator discretize_cusp(const ModeOperator& op, const LineGrid& grid)
{
    if (op.kind != ModeKind::cusp)
        throw DomainError("discretize_cusp needs a cusp mode operator");
    // u = e^t: the form u^{2-n}|f'|^2 du becomes e^{(1-n)t}|f_t|^2 dt, the mass u^{-n} du becomes e^{(1-n)t} dt
    const double a = 1.0 - op.dimension_n;
    const double mu = op.mode_mu;
    auto e = [a](double t) { return std::exp(a * t); };
    return weighted_line(grid, e, e, [mu](double t) { return mu * std::exp(2.0 * t); }, op.describe());
}

std::vector<double> lowest_eigenvalues(const DiscretizedOperator& op, int count)
{
    const auto& A = op.sparse;
    const lapack_int n = static_cast<lapack_int>(A.rows());
    if (!op.real_symmetric || n == 0)
        throw DomainError("lowest_eigenvalues needs a real symmetric operator");
    std::vector<double> d(n), e(n > 1 ? n - 1 : 1, 0.0);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col())
                d[it.row()] = it.value().real();
            else if (it.row() == it.col() + 1)
                e[it.col()] = it.value().real();
            else if (std::abs(it.row() - it.col()) > 1)
                throw DomainError("lowest_eigenvalues needs a tridiagonal operator");
        }
    count = std::clamp(count, 1, static_cast<int>(n));
    lapack_int m = 0, nsplit = 0;
    std::vector<double> w(n);
    std::vector<lapack_int> iblock(n), isplit(n);
    lapack_int info = LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, 1, count, 2.0 * std::numeric_limits<double>::min(), d.data(), e.data(), &m, &nsplit,
                                     w.data(), iblock.data(), isplit.data());
    if (info != 0)
        throw NumericalError("tridiagonal bisection failed");
    w.resize(m);
    return w;
}

} // namespace endspec
