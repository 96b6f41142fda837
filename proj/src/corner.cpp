#include "endspec/corner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "endspec/numerics.hpp"

namespace endspec {

void CornerModel::validate() const
{
    if (!(r0 > 0.0))
        throw DomainError("corner scaling radius must be positive");
    if (v1.support_radius() > r0 || v2.support_radius() > r0)
        throw DomainError("end potentials must be supported in [0, R0]");
    for (auto& b : coupling) {
        if (!(b.a1 >= 0.0 && b.b1 > b.a1 && b.a2 >= 0.0 && b.b2 > b.a2))
            throw DomainError("coupling box needs a < b on both axes");
        if (b.b1 > r0 || b.b2 > r0)
            throw DomainError("coupling must be supported in [0, R0]^2");
        if (!std::isfinite(b.value))
            throw DomainError("coupling must be bounded");
    }
}

bool CornerModel::separable() const
{
    for (auto& b : coupling)
        if (b.value != 0.0)
            return false;
    return true;
}

CornerModel CornerModel::swapped() const
{
    CornerModel m = *this;
    std::swap(m.v1, m.v2);
    for (auto& b : m.coupling) {
        std::swap(b.a1, b.a2);
        std::swap(b.b1, b.b2);
    }
    return m;
}

double CornerModel::coupling_average(double lo1, double hi1, double lo2, double hi2) const
{
    double s = 0.0;
    for (auto& b : coupling) {
        double o1 = std::max(0.0, std::min(hi1, b.b1) - std::max(lo1, b.a1));
        double o2 = std::max(0.0, std::min(hi2, b.b2) - std::max(lo2, b.a2));
        s += b.value * o1 * o2;
    }
    return s / ((hi1 - lo1) * (hi2 - lo2));
}

namespace {

ModeOperator axis_op(const RadialPotential& v) { return {ModeKind::cylindrical, 0.0, 0, v}; }

std::vector<ChannelEntry> shifted(const ResonanceSet& set, const CrossSectionSpectrum& y, const std::string& tag)
{
    std::vector<ChannelEntry> out;
    for (auto& it : set.items)
        for (double mu : y.thresholds()) {
            std::ostringstream os;
            os << tag << (it.kind == ItemKind::bound ? " bound" : " resonance") << " + mu=" << mu;
            out.push_back({it.z + mu, mu, os.str()});
        }
    return out;
}

} // namespace

ChannelSpectrum channel_spectra(const CornerModel& model, const std::vector<ScalingParameter>& thetas,
                                const Grid1D& grid, const ResonanceOptions& options)
{
    model.validate();
    ChannelSpectrum c;
    c.h3 = model.y.thresholds();
    ResonanceOptions o = options;
    o.scaling_radius = model.r0;
    if (!model.v1.is_zero())
        c.h1_pp = shifted(find_resonances({axis_op(model.v1)}, thetas, grid, o), model.y, "H1");
    if (!model.v2.is_zero())
        c.h2_pp = shifted(find_resonances({axis_op(model.v2)}, thetas, grid, o), model.y, "H2");
    return c;
}

RaySet corner_essential_spectrum(const CornerModel& model, const ScalingParameter& theta,
                                 const ChannelSpectrum& channels)
{
    model.validate();
    std::vector<Threshold> t;
    for (double mu : channels.h3)
        t.push_back({mu, "H3 mu=" + std::to_string(mu)});
    for (auto& e : channels.h1_pp)
        t.push_back({e.z, e.provenance});
    for (auto& e : channels.h2_pp)
        t.push_back({e.z, e.provenance});
    return essential_rays(t, theta);
}

void Grid2D::validate() const
{
    if (!(L > 0.0) || n < 4)
        throw DomainError("2D grid needs L > 0 and n >= 4");
}

namespace {

struct Axis {
    FdSystem sys;
    SparseMatrixC A;
    std::vector<double> lo, hi;
};

Axis make_axis(const RadialPotential& v, const ScalingParameter& theta, const Mesh& mesh)
{
    Axis a;
    a.sys = assemble(axis_op(v), 1.0 + theta.theta(), mesh);
    a.A = a.sys.symmetric();
    const auto& x = mesh.x;
    for (std::size_t j = 1; j + 1 < x.size(); ++j) {
        a.lo.push_back(x[j] - 0.5 * (x[j] - x[j - 1]));
        a.hi.push_back(x[j] + 0.5 * (x[j + 1] - x[j]));
    }
    return a;
}

SparseMatrixC kron_sum(const CornerModel& model, const Axis& a1, const Axis& a2, double mu)
{
    const long n1 = a1.A.rows(), n2 = a2.A.rows();
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(n1 * n2 * 5));
    for (int k = 0; k < a1.A.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(a1.A, k); it; ++it)
            for (long j = 0; j < n2; ++j)
                t.emplace_back(it.row() * n2 + j, it.col() * n2 + j, it.value());
    for (int k = 0; k < a2.A.outerSize(); ++k)
        for (SparseMatrixC::InnerIterator it(a2.A, k); it; ++it)
            for (long i = 0; i < n1; ++i)
                t.emplace_back(i * n2 + it.row(), i * n2 + it.col(), it.value());
    bool coupled = !model.separable();
    for (long i = 0; i < n1; ++i)
        for (long j = 0; j < n2; ++j) {
            double w = coupled ? model.coupling_average(a1.lo[i], a1.hi[i], a2.lo[j], a2.hi[j]) : 0.0;
            if (mu != 0.0 || w != 0.0)
                t.emplace_back(i * n2 + j, i * n2 + j, cplx(mu + w));
        }
    SparseMatrixC A(n1 * n2, n1 * n2);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

std::vector<double> axis_anchors(const CornerModel& m, int axis)
{
    std::vector<double> a = axis_op(axis == 1 ? m.v1 : m.v2).potential.breakpoints();
    for (auto& b : m.coupling) {
        a.push_back(axis == 1 ? b.a1 : b.a2);
        a.push_back(axis == 1 ? b.b1 : b.b2);
    }
    std::vector<double> out;
    for (double x : a)
        if (x > 0.0 && x < m.r0)
            out.push_back(x);
    return out;
}

} // namespace

CornerOperator corner_discretize(const CornerModel& model, const ScalingParameter& theta, const Grid2D& grid,
                                 std::size_t mode, const CornerOptions& options)
{
    model.validate();
    grid.validate();
    if (mode >= model.y.size())
        throw DomainError("Y-mode index out of range");
    if (!(grid.L > model.r0))
        throw DomainError("2D grid length must exceed the scaling radius");
    Mesh mesh = uniform_mesh(grid.L, grid.n, model.r0, true);
    Axis a1 = make_axis(model.v1, theta, mesh), a2 = make_axis(model.v2, theta, mesh);
    CornerOperator op;
    op.mu = model.y.entries()[mode].mu;
    op.sparse = kron_sum(model, a1, a2, op.mu);
    op.a1 = a1.A;
    op.a2 = a2.A;
    op.n1 = static_cast<int>(a1.A.rows());
    op.n2 = static_cast<int>(a2.A.rows());
    op.real_symmetric = theta.is_real();
    if (static_cast<std::size_t>(op.n1) * op.n2 <= options.dense_limit)
        op.dense = Eigen::MatrixXcd(op.sparse);
    std::ostringstream os;
    os << "corner mode mu=" << op.mu << " theta=" << theta.theta() << " L=" << grid.L << " n=" << grid.n;
    op.tag = os.str();
    return op;
}

std::vector<cplx> corner_dense_eigenvalues(const CornerOperator& op)
{
    if (op.dense.size() == 0)
        throw DomainError("2D grid too large for a dense solve; use the Kronecker or sparse path");
    std::vector<cplx> out;
    if (op.real_symmetric) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense.real(), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NumericalError("2D symmetric eigensolver failed");
        for (long i = 0; i < es.eigenvalues().size(); ++i)
            out.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.dense, false);
        if (es.info() != Eigen::Success)
            throw NumericalError("2D eigensolver failed");
        for (long i = 0; i < es.eigenvalues().size(); ++i)
            out.push_back(es.eigenvalues()(i));
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

std::vector<cplx> corner_eigenvalues(const CornerModel& model, const ScalingParameter& theta, const Grid2D& grid,
                                     std::size_t mode, const CornerOptions& options)
{
    CornerOptions o = options;
    if (model.separable())
        o.dense_limit = 0;
    CornerOperator op = corner_discretize(model, theta, grid, mode, o);
    if (!model.separable())
        return corner_dense_eigenvalues(op);
    bool real = theta.is_real();
    auto e1 = eigenvalues(from_sparse(op.a1, "axis 1", real));
    auto e2 = eigenvalues(from_sparse(op.a2, "axis 2", real));
    std::vector<cplx> out;
    out.reserve(e1.size() * e2.size());
    for (cplx a : e1)
        for (cplx b : e2)
            out.push_back(a + b + op.mu);
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

cplx corner_refine(const SparseMatrixC& A, cplx guess, double* residual)
{
    const long n = A.rows();
    SparseMatrixC I(n, n);
    I.setIdentity();
    Eigen::SparseLU<SparseMatrixC> lu;
    SparseMatrixC M = A - guess * I;
    M.makeCompressed();
    lu.analyzePattern(M);
    auto factor = [&](cplx s) {
        SparseMatrixC P = A - s * I;
        P.makeCompressed();
        lu.factorize(P);
        return lu.info() == Eigen::Success;
    };
    cplx shift = guess;
    if (!factor(shift)) {
        shift += cplx(1e-9, 1e-9) * (1.0 + std::abs(shift));
        if (!factor(shift))
            throw NumericalError("singular shift in 2D refinement");
    }
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n).normalized();
    for (int it = 0; it < 3; ++it) {
        Eigen::VectorXcd y = lu.solve(x);
        x = y / y.norm();
    }
    auto rq = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd av = A * v;
        return cplx((v.array() * av.array()).sum() / (v.array() * v.array()).sum());
    };
    cplx z = rq(x);
    for (int it = 0; it < 25; ++it) {
        if (!factor(z))
            break;
        Eigen::VectorXcd y = lu.solve(x);
        double ny = y.norm();
        if (!std::isfinite(ny))
            break;
        x = y / ny;
        cplx next = rq(x);
        bool done = std::abs(next - z) <= 1e-14 * (1.0 + std::abs(z));
        z = next;
        if (done)
            break;
    }
    if (residual) {
        Eigen::VectorXcd r = A * x - z * x;
        double na = 0.0;
        Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < A.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(A, k); it; ++it)
                rows(it.row()) += std::abs(it.value());
        na = rows.maxCoeff();
        *residual = r.norm() / na;
    }
    return z;
}

namespace {

struct Point {
    cplx z;
    double residual = 0.0;
    double error = 0.0;
    bool used = false;
};

ResonanceSet separable_resonances(const CornerModel& model, const std::vector<ScalingParameter>& thetas,
                                  const Grid1D& grid, const CornerOptions& o, const ResonanceOptions& ro)
{
    ResonanceOptions opt = ro;
    opt.scaling_radius = model.r0;
    ResonanceSet set;
    if (model.v1.is_zero() || model.v2.is_zero())
        return set;  // one free axis: everything sits on rays
    auto s1 = find_resonances({axis_op(model.v1)}, thetas, grid, opt);
    auto s2 = find_resonances({axis_op(model.v2)}, thetas, grid, opt);
    set.warnings = s1.warnings;
    set.warnings.insert(set.warnings.end(), s2.warnings.begin(), s2.warnings.end());
    auto channels = ChannelSpectrum{model.y.thresholds(), shifted(s1, model.y, "H1"), shifted(s2, model.y, "H2")};
    for (std::size_t k = 0; k < model.y.size(); ++k) {
        double mu = model.y.entries()[k].mu;
        for (auto& a : s1.items)
            for (auto& b : s2.items) {
                ResonanceItem it;
                it.z = a.z + b.z + mu;
                if (std::abs(it.z) > o.energy_window)
                    continue;
                bool off = true;
                for (auto& t : thetas)
                    off = off && distance_to_rays(it.z, corner_essential_spectrum(model, t, channels)) >
                                     o.rays_tolerance * (1.0 + std::abs(it.z));
                if (!off)
                    continue;
                it.residual = std::max(a.residual, b.residual);
                it.theta_spread = a.theta_spread + b.theta_spread;
                it.multiplicity = model.y.entries()[k].multiplicity;
                it.mode = k;
                it.mu = mu;
                it.kind = (a.kind == ItemKind::bound && b.kind == ItemKind::bound) ? ItemKind::bound
                                                                                   : ItemKind::resonance;
                it.error_estimate = a.error_estimate + b.error_estimate;
                it.method = "separable";
                set.items.push_back(it);
            }
    }
    return set;
}

} // namespace

ResonanceSet corner_resonances(const CornerModel& model, const std::vector<ScalingParameter>& thetas,
                               const Grid2D& grid, const Grid1D& channel_grid, const CornerOptions& o,
                               const ResonanceOptions& ro)
{
    model.validate();
    grid.validate();
    if (thetas.empty())
        throw DomainError("empty scaling sweep");
    for (auto& t : thetas)
        if (!in_gamma(t.theta()))
            throw DomainError("sweep values must lie in the admissible region");
    ResonanceSet set;
    if (model.separable()) {
        set = separable_resonances(model, thetas, channel_grid, o, ro);
    } else {
        ResonanceOptions opt = ro;
        opt.scaling_radius = model.r0;
        CornerModel bare = model;
        bare.coupling.clear();
        ChannelSpectrum ch = channel_spectra(model, thetas, channel_grid, opt);
        const std::size_t T = thetas.size();
        std::vector<std::vector<std::vector<Point>>> lists(model.y.size(), std::vector<std::vector<Point>>(T));
        std::vector<std::string> notes;
        for (std::size_t k = 0; k < model.y.size(); ++k) {
            std::vector<std::vector<cplx>> coarse(T);
            parallel_for(T, [&](std::size_t t) {
                RaySet rays = corner_essential_spectrum(model, thetas[t], ch);
                CornerOperator op = corner_discretize(model, thetas[t], grid, k, o);
                std::vector<cplx> guesses = op.dense.size() ? corner_dense_eigenvalues(op)
                                                            : corner_eigenvalues(bare, thetas[t], grid, k, o);
                for (cplx g : guesses)
                    if (std::abs(g) <= o.energy_window &&
                        distance_to_rays(g, rays) > o.rays_tolerance * (1.0 + std::abs(g)))
                        coarse[t].push_back(g);
            });
            // a resonance shows up at every theta; continuum debris does not
            std::vector<std::pair<std::size_t, cplx>> jobs;
            for (std::size_t t = 0; t < T; ++t)
                for (cplx g : coarse[t]) {
                    bool everywhere = true;
                    for (std::size_t u = 0; u < T && everywhere; ++u) {
                        bool hit = false;
                        for (cplx q : coarse[u])
                            hit = hit || std::abs(q - g) <= 1e-2 * (1.0 + std::abs(g));
                        everywhere = hit;
                    }
                    if (everywhere)
                        jobs.emplace_back(t, g);
                }
            std::vector<std::optional<Point>> refined(jobs.size());
            const double mu = model.y.entries()[k].mu;
            const auto a1 = axis_anchors(model, 1), a2 = axis_anchors(model, 2);
            const double href = std::min(grid.h(), o.refine_h);
            parallel_for(jobs.size(), [&](std::size_t j) {
                auto [t, g] = jobs[j];
                std::vector<cplx> lv;
                double res = 0.0;
                cplx z = g;
                try {
                    for (int level = 0; level < o.levels; ++level) {
                        Mesh m1 = aligned_mesh(a1, model.r0, grid.L, href, level, true);
                        Mesh m2 = aligned_mesh(a2, model.r0, grid.L, href, level, true);
                        Axis x1 = make_axis(model.v1, thetas[t], m1), x2 = make_axis(model.v2, thetas[t], m2);
                        z = corner_refine(kron_sum(model, x1, x2, mu), z, &res);
                        lv.push_back(z);
                    }
                } catch (const NumericalError&) {
                    return;
                }
                if (std::abs(lv.front() - g) > 0.05 * (1.0 + std::abs(g)))
                    return;
                auto ex = richardson(lv);
                refined[j] = Point{ex.value, res, ex.error};
            });
            for (std::size_t j = 0; j < jobs.size(); ++j)
                if (refined[j])
                    lists[k][jobs[j].first].push_back(*refined[j]);
            // chain across the sweep, strongest decay first
            auto& L0 = lists[k][0];
            std::vector<Point*> seeds;
            for (auto& p : L0)
                seeds.push_back(&p);
            std::stable_sort(seeds.begin(), seeds.end(),
                             [](auto* a, auto* b) { return std::abs(a->z.imag()) > std::abs(b->z.imag()); });
            std::vector<ResonanceItem> emitted;
            for (auto* s : seeds) {
                if (s->used)
                    continue;
                s->used = true;
                std::vector<Point*> chain{s};
                cplx mean = s->z;
                bool complete = true;
                for (std::size_t t = 1; t < T && complete; ++t) {
                    Point* best = nullptr;
                    for (auto& p : lists[k][t])
                        if (!p.used && std::abs(p.z - mean) <= 1e-2 * (1.0 + std::abs(mean)) &&
                            (!best || std::abs(p.z - mean) < std::abs(best->z - mean)))
                            best = &p;
                    if (!best) {
                        complete = false;
                        break;
                    }
                    best->used = true;
                    chain.push_back(best);
                    mean = 0.0;
                    for (auto* c : chain)
                        mean += c->z;
                    mean /= double(chain.size());
                }
                if (!complete)
                    continue;
                double spread = 0.0, res = 0.0, err = 0.0;
                for (auto* c : chain) {
                    spread = std::max(spread, std::abs(c->z - mean));
                    res = std::max(res, c->residual);
                    err = std::max(err, c->error);
                }
                if (spread > o.stability_tolerance) {
                    std::ostringstream os;
                    os << "2D point " << mean << " moves with theta (spread " << spread << ")";
                    notes.push_back(os.str());
                    continue;
                }
                bool dup = false;
                for (auto& e : emitted)
                    dup = dup || std::abs(e.z - mean) < 10.0 * o.stability_tolerance;
                if (dup)
                    continue;
                ResonanceItem it;
                it.z = mean;
                it.residual = res;
                it.theta_spread = spread;
                it.multiplicity = model.y.entries()[k].multiplicity;
                it.mode = k;
                it.mu = model.y.entries()[k].mu;
                it.kind = std::abs(mean.imag()) <= std::max(1e-6 * (1.0 + std::abs(mean)), err) ? ItemKind::bound
                                                                                 : ItemKind::resonance;
                if (it.kind == ItemKind::bound)
                    it.z = mean.real();
                it.error_estimate = err;
                it.method = "corner-2d";
                emitted.push_back(it);
            }
            set.items.insert(set.items.end(), emitted.begin(), emitted.end());
        }
        set.warnings = notes;
    }
    std::sort(set.items.begin(), set.items.end(), [](auto& a, auto& b) {
        if (a.mode != b.mode)
            return a.mode < b.mode;
        return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
    });
    std::ostringstream prov;
    prov << "corner L=" << grid.L << " n=" << grid.n << " R0=" << model.r0 << " sweep=" << thetas.size();
    set.provenance = prov.str();
    return set;
}

namespace {

// Monotone matching of two sorted lists; unmatched entries are births (in b) or deaths (in a).
void match_sorted(const std::vector<double>& a, const std::vector<double>& b, std::vector<bool>& a_hit,
                  std::vector<bool>& b_hit)
{
    const std::size_t n = a.size(), m = b.size();
    const double skip = 1e3;
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j <= m; ++j) {
            if (i == 0 && j == 0)
                continue;
            double best = std::numeric_limits<double>::infinity();
            if (i > 0)
                best = std::min(best, c[i - 1][j] + skip);
            if (j > 0)
                best = std::min(best, c[i][j - 1] + skip);
            if (i > 0 && j > 0)
                best = std::min(best, c[i - 1][j - 1] + std::abs(a[i - 1] - b[j - 1]));
            c[i][j] = best;
        }
    a_hit.assign(n, false);
    b_hit.assign(m, false);
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && c[i][j] == c[i - 1][j - 1] + std::abs(a[i - 1] - b[j - 1])) {
            a_hit[i - 1] = b_hit[j - 1] = true;
            --i;
            --j;
        } else if (i > 0 && c[i][j] == c[i - 1][j] + skip) {
            --i;
        } else {
            --j;
        }
    }
}

double distance_to_set(double x, const std::vector<double>& s, double* nearest)
{
    double best = std::numeric_limits<double>::infinity();
    for (double y : s)
        if (std::abs(x - y) < best) {
            best = std::abs(x - y);
            if (nearest)
                *nearest = y;
        }
    return best;
}

} // namespace

AccumulationReport accumulation_check(const std::function<CornerModel(double)>& family,
                                      const std::vector<double>& parameters, const Grid1D& grid,
                                      double birth_tolerance, const ResonanceOptions& options)
{
    auto build = [&](double s) {
        CornerModel m = family(s);
        m.validate();
        if (!m.separable())
            throw DomainError("accumulation check handles separable families only");
        return m;
    };
    auto compute = [&](const CornerModel& m, double s) {
        ResonanceOptions o = options;
        o.scaling_radius = m.r0;
        std::vector<double> e1, e2;
        auto theta = default_theta();
        if (!m.v1.is_zero())
            for (auto& r : bound_states(axis_op(m.v1), theta, grid, o))
                e1.push_back(r.value.real());
        if (!m.v2.is_zero())
            for (auto& r : bound_states(axis_op(m.v2), theta, grid, o))
                e2.push_back(r.value.real());
        AccumulationStep st;
        st.parameter = s;
        for (double mu : m.y.thresholds()) {
            for (double e : e1)
                st.channel_pp.push_back(mu + e);
            for (double e : e2)
                st.channel_pp.push_back(mu + e);
            for (double a : e1)
                for (double b : e2)
                    st.full_pp.push_back(mu + a + b);
        }
        std::sort(st.channel_pp.begin(), st.channel_pp.end());
        std::sort(st.full_pp.begin(), st.full_pp.end());
        return st;
    };

    AccumulationReport rep;
    std::vector<CornerModel> models;
    for (double s : parameters)
        models.push_back(build(s));
    rep.steps.resize(parameters.size());
    parallel_for(parameters.size(), [&](std::size_t i) { rep.steps[i] = compute(models[i], parameters[i]); });

    auto pick = [](const AccumulationStep& st, bool channel) -> const std::vector<double>& {
        return channel ? st.channel_pp : st.full_pp;
    };
    auto allowed_set = [](const CornerModel& m, const AccumulationStep& st, bool channel) {
        std::vector<double> s = m.y.thresholds();
        if (!channel)
            s.insert(s.end(), st.channel_pp.begin(), st.channel_pp.end());
        return s;
    };
    // values present in b but not in a
    auto unmatched = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<bool> ah, bh;
        match_sorted(a, b, ah, bh);
        std::vector<double> out;
        for (std::size_t j = 0; j < bh.size(); ++j)
            if (!bh[j])
                out.push_back(b[j]);
        return out;
    };

    // A birth far from the allowed set may only reflect a coarse parameter step: bisect on the
    // count to find where the value first appears and measure it there.
    auto settle = [&](double lo, double hi, double value, bool channel, bool forward) {
        // invariant: the value is missing at lo and present at hi (forward), or the reverse
        auto lost = [&](const AccumulationStep& with, const AccumulationStep& without) {
            return unmatched(pick(without, channel), pick(with, channel));
        };
        AccumulationStep slo = compute(build(lo), lo), shi = compute(build(hi), hi);
        for (int it = 0; it < 12; ++it) {
            double mid = 0.5 * (lo + hi);
            AccumulationStep smid = compute(build(mid), mid);
            bool changed = forward ? !lost(smid, slo).empty() : !lost(slo, smid).empty();
            if (changed) {
                hi = mid;
                shi = smid;
            } else {
                lo = mid;
                slo = smid;
            }
        }
        auto fresh = forward ? lost(shi, slo) : lost(slo, shi);
        double where = forward ? hi : lo;
        if (fresh.empty())
            return std::pair{where, value};
        double best = fresh.front();
        for (double f : fresh)
            if (std::abs(f - value) < std::abs(best - value))
                best = f;
        return std::pair{where, best};
    };

    auto record = [&](std::size_t i, double value, bool channel, bool forward) {
        const std::string where = channel ? "channel" : "H";
        double param = forward ? parameters[i] : parameters[i - 1];
        double near = std::numeric_limits<double>::quiet_NaN();
        auto allowed = allowed_set(models[i], rep.steps[i], channel);
        double d = distance_to_set(value, allowed, &near);
        if (d > birth_tolerance) {
            auto [p, v] = settle(parameters[i - 1], parameters[i], value, channel, forward);
            CornerModel mp = build(p);
            allowed = allowed_set(mp, compute(mp, p), channel);
            param = p;
            value = v;
            d = distance_to_set(value, allowed, &near);
        }
        AccumulationEvent ev{param, value, d, where, d <= birth_tolerance};
        rep.births.push_back(ev);
        if (ev.allowed) {
            if (std::none_of(rep.targets.begin(), rep.targets.end(),
                             [&](double t) { return std::abs(t - near) < 1e-12; }))
                rep.targets.push_back(near);
        } else {
            std::ostringstream os;
            os << where << " eigenvalue " << value << " appears at parameter " << param << " at distance " << d
               << " from the allowed set";
            rep.flags.push_back(os.str());
        }
    };

    for (std::size_t i = 1; i < rep.steps.size(); ++i)
        for (bool channel : {true, false}) {
            const auto& prev = pick(rep.steps[i - 1], channel);
            const auto& cur = pick(rep.steps[i], channel);
            for (double v : unmatched(prev, cur))
                record(i, v, channel, true);
            // disappearances are births when the family is run backwards
            for (double v : unmatched(cur, prev))
                record(i, v, channel, false);
        }

    // within one operator: tight clusters away from the allowed set
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
        const auto& v = rep.steps[i].channel_pp;
        for (std::size_t j = 0; j + 2 < v.size(); ++j)
            if (v[j + 2] - v[j] < 1e-3 &&
                distance_to_set(v[j + 1], models[i].y.thresholds(), nullptr) > birth_tolerance) {
                std::ostringstream os;
                os << "cluster of channel eigenvalues near " << v[j + 1] << " at parameter "
                   << rep.steps[i].parameter;
                rep.flags.push_back(os.str());
            }
    }
    std::sort(rep.targets.begin(), rep.targets.end());
    return rep;
}

} // namespace endspec
