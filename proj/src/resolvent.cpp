#include "endspec/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "endspec/numerics.hpp"

namespace endspec {

namespace {

const cplx I1(0.0, 1.0);

bool on_node(double x, double h) { return std::abs(x / h - std::round(x / h)) < 1e-7; }

} // namespace

cplx free_mode_kernel(cplx Lambda, double u, double v)
{
    if (Lambda == 0.0)
        throw DomainError("free kernel is singular at the threshold");
    return I1 / (2.0 * Lambda) * (std::exp(I1 * Lambda * std::abs(u - v)) - std::exp(I1 * Lambda * (u + v)));
}

cplx discrete_free_green(cplx Lambda, double h, long i, long j)
{
    if (i < 1 || j < 1)
        return 0.0;
    cplx ld = 2.0 / h * std::asin(h * Lambda / 2.0);
    cplx zeta = std::exp(I1 * ld * h);
    if (zeta == 1.0)
        throw DomainError("discrete kernel is singular at the threshold");
    cplx a = std::exp(I1 * ld * h * double(std::abs(i - j)));
    cplx b = std::exp(I1 * ld * h * double(i + j));
    return h * h * (a - b) / (1.0 / zeta - zeta);
}

double weighted_norm(const SampledFunction& f, WeightedSpaceParam w, double cross_section_factor)
{
    if (f.values.size() < 3)
        throw DomainError("weighted norm needs at least 3 samples");
    std::vector<double> y(f.values.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        y[j] = std::exp(2.0 * w.delta * j * f.h) * std::norm(f.values[j]);
    double total = simpson(y, f.h);
    double tail = 0.5 * f.h * (y[y.size() - 2] + y.back());
    if (total > 0.0 && tail > 1e-6 * total)
        throw DomainError("weighted norm does not converge on the sampled range");
    return total * cross_section_factor;
}

double CutoffFamily::operator()(Cutoff which, double u) const
{
    double s = (u - core_radius) / collar;
    switch (which) {
    case Cutoff::phi1:
        return 1.0 - rho(0.8, 1.0, s);
    case Cutoff::phi2:
        return rho(0.0, 0.2, s);
    case Cutoff::psi1:
        return 1.0 - rho(0.4, 0.6, s);
    case Cutoff::psi2:
        return 1.0 - (1.0 - rho(0.4, 0.6, s));
    }
    return 0.0;
}

double cutoff_eval(const CutoffFamily& family, Cutoff which, double u) { return family(which, u); }

double cutoff_gap(const CutoffFamily& family, Cutoff phi, Cutoff psi, double h, double u_max)
{
    std::vector<double> grad, supp;
    for (double u = 0.0; u <= u_max + 1e-12; u += h) {
        double p = family(phi, u);
        if (p > 0.0 && p < 1.0)
            grad.push_back(u);
        if (family(psi, u) > 0.0)
            supp.push_back(u);
    }
    double best = std::numeric_limits<double>::infinity();
    for (double a : grad)
        for (double b : supp)
            best = std::min(best, std::abs(a - b));
    return best;
}

CoreModel CoreModel::trivial(const CrossSectionSpectrum& cs, double core_radius)
{
    return {reduce_cylindrical(cs), core_radius, 1.0};
}

CoreModel CoreModel::single(const ModeOperator& op, double core_radius) { return {{op}, core_radius, 1.0}; }

ParametrixAssembler::ParametrixAssembler(CoreModel core, ParametrixGrid grid) : core_(std::move(core))
{
    if (core_.modes.empty())
        throw DomainError("core model has no modes");
    if (grid.n < 10 || !(grid.extra > 0.0) || !(core_.collar > 0.0) || core_.core_radius < 0.0)
        throw DomainError("invalid parametrix grid");
    cut_ = {core_.core_radius, core_.collar};
    double a = core_.core_radius + core_.collar;
    n_ = grid.n;
    // h snapped to collar/q; the outer edge floats near a + extra
    long q = std::max(1L, std::lround(core_.collar * (n_ + 1) / (a + grid.extra)));
    h_ = core_.collar / q;
    if (std::lround(a / h_) >= n_ || !on_node(core_.core_radius, h_))
        throw DomainError("choose n so that the core radius is a grid node");
    for (auto& m : core_.modes) {
        if (m.kind != ModeKind::cylindrical)
            throw DomainError("parametrix is built for cylindrical modes only");
        if (m.potential.support_radius() > core_.core_radius + 1e-12)
            throw DomainError("potential must be supported in the core");
    }
    u_.resize(n_ + 1);
    for (int i = 0; i <= n_; ++i)
        u_[i] = (i + 1) * h_;
    for (double u : u_) {
        phi1_.push_back(cut_(Cutoff::phi1, u));
        phi2_.push_back(cut_(Cutoff::phi2, u));
        psi1_.push_back(cut_(Cutoff::psi1, u));
        psi2_.push_back(cut_(Cutoff::psi2, u));
    }

    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < core_.modes.size(); ++i) {
        auto [it, fresh] = seen.emplace(core_.modes[i].identity(), group_first_.size());
        if (fresh) {
            group_first_.push_back(i);
            group_count_.push_back(0);
        }
        ++group_count_[it->second];
    }

    // the double: [0, 2a], potential reflected about a, Dirichlet at both ends
    long nd = std::lround(2.0 * a / h_) - 1;
    long rows = std::min<long>(n_ + 1, nd);
    for (std::size_t g = 0; g < group_first_.size(); ++g) {
        const auto& V = core_.modes[group_first_[g]].potential;
        auto cell = [&](double u) { return V.integral(u - 0.5 * h_, u + 0.5 * h_) / h_; };
        Eigen::VectorXd d(nd), e(nd - 1);
        for (long i = 0; i < nd; ++i) {
            double u = (i + 1) * h_;
            d(i) = 2.0 / (h_ * h_) + cell(std::min(u, 2.0 * a - u));
            if (i + 1 < nd)
                e(i) = -1.0 / (h_ * h_);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success)
            throw NumericalError("eigendecomposition of the double failed");
        auto dbl = std::make_shared<Double>();
        dbl->E = es.eigenvalues();
        dbl->Q = es.eigenvectors().topRows(rows);
        doubles_.push_back(dbl);
        std::vector<double> vc(n_ + 1);
        for (int i = 0; i <= n_; ++i)
            vc[i] = cell(u_[i]);
        vcell_.push_back(std::move(vc));
    }
}

Eigen::MatrixXcd ParametrixAssembler::shifted_operator(std::size_t g, cplx lambda) const
{
    double mu = group_mu(g);
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n_ + 1, n_);
    double off = -1.0 / (h_ * h_);
    for (int i = 0; i <= n_; ++i) {
        if (i < n_)
            D(i, i) = 2.0 / (h_ * h_) + vcell_[g][i] + mu - lambda;
        if (i >= 1)
            D(i, i - 1) = off;
        if (i + 1 < n_)
            D(i, i + 1) = off;
    }
    return D;
}

ParametrixBlock ParametrixAssembler::block(std::size_t g, cplx lambda, cplx Lambda) const
{
    double mu = group_mu(g);
    const Double& dbl = *doubles_[g];
    const long N = n_ + 1, rows = dbl.Q.rows();

    Eigen::VectorXd inv_re(dbl.E.size()), inv_im(dbl.E.size());
    for (long k = 0; k < dbl.E.size(); ++k) {
        cplx d = dbl.E(k) + mu - lambda;
        if (std::abs(d) < 1e-8)
            throw DomainError("lambda is an eigenvalue of the discretized double");
        inv_re(k) = (1.0 / d).real();
        inv_im(k) = (1.0 / d).imag();
    }
    // only rows under Psi1 and columns under Phi1 are needed
    long r1 = 0, c1 = 0;
    for (long i = 0; i < rows; ++i) {
        if (psi1_[i] != 0.0)
            r1 = i + 1;
        if (phi1_[i] != 0.0)
            c1 = i + 1;
    }
    Eigen::MatrixXd Qr = dbl.Q.topRows(r1), Qcol = dbl.Q.topRows(c1);
    Eigen::MatrixXd A = (Qr * inv_re.asDiagonal()) * Qcol.transpose();
    Eigen::MatrixXd B = (Qr * inv_im.asDiagonal()) * Qcol.transpose();

    std::vector<long> idx(N);
    for (long i = 0; i < N; ++i)
        idx[i] = std::lround((u_[i] - core_.core_radius) / h_);
    // discrete kernel depends on |I-J| and I+J only
    long top = 2 * idx.back() + 2;
    cplx ld = 2.0 / h_ * std::asin(h_ * Lambda / 2.0);
    cplx zeta = std::exp(I1 * ld * h_);
    if (zeta == 1.0)
        throw DomainError("discrete kernel is singular at the threshold");
    std::vector<cplx> pw(top + 1);
    for (long k = 0; k <= top; ++k)
        pw[k] = std::exp(I1 * ld * h_ * double(k));
    cplx pref = h_ * h_ / (1.0 / zeta - zeta);

    ParametrixBlock b;
    b.mu = mu;
    b.multiplicity = group_count_[g];
    b.Lambda = Lambda;
    b.S = Eigen::MatrixXcd::Zero(N, N);
    for (long j = 0; j < N; ++j)
        for (long i = 0; i < N; ++i) {
            cplx s = 0.0;
            if (i < r1 && j < c1 && psi1_[i] != 0.0 && phi1_[j] != 0.0)
                s += psi1_[i] * cplx(A(i, j), B(i, j)) * phi1_[j];
            if (idx[i] >= 1 && idx[j] >= 1 && psi2_[i] != 0.0 && phi2_[j] != 0.0)
                s += psi2_[i] * pref * (pw[std::abs(idx[i] - idx[j])] - pw[idx[i] + idx[j]]) * phi2_[j];
            b.S(i, j) = s;
        }

    // S (Delta - lambda) with a tridiagonal right factor
    double off = -1.0 / (h_ * h_);
    b.G.resize(n_, n_);
    for (int j = 0; j < n_; ++j) {
        cplx dj = 2.0 / (h_ * h_) + vcell_[g][j] + mu - lambda;
        Eigen::VectorXcd col = b.S.col(j).head(n_) * dj + b.S.col(j + 1).head(n_) * off;
        if (j >= 1)
            col += b.S.col(j - 1).head(n_) * off;
        col(j) -= 1.0;
        b.G.col(j) = col;
    }
    return b;
}

std::vector<ParametrixBlock> ParametrixAssembler::blocks(const SpectralSurfacePoint& point) const
{
    std::vector<ParametrixBlock> out;
    for (std::size_t g = 0; g < groups(); ++g) {
        double mu = group_mu(g);
        std::size_t k = point.thresholds.size();
        for (std::size_t i = 0; i < point.thresholds.size(); ++i)
            if (std::abs(point.thresholds[i] - mu) < 1e-12)
                k = i;
        if (k == point.thresholds.size())
            throw DomainError("surface point does not track threshold " + std::to_string(mu));
        out.push_back(block(g, point.lambda, point.branches[k]));
    }
    return out;
}

std::vector<double> ResidualReport::singular_values() const
{
    std::vector<double> out;
    for (auto& b : blocks) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(b.G);
        for (long i = 0; i < svd.singularValues().size(); ++i)
            out.insert(out.end(), b.multiplicity, svd.singularValues()(i));
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

double ResidualReport::norm() const
{
    auto s = singular_values();
    return s.empty() ? 0.0 : s.front();
}

Eigen::MatrixXcd ResidualReport::dense() const
{
    long n = 0;
    for (auto& b : blocks)
        n += b.G.rows() * b.multiplicity;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    long at = 0;
    for (auto& b : blocks)
        for (int m = 0; m < b.multiplicity; ++m) {
            M.block(at, at, b.G.rows(), b.G.cols()) = b.G;
            at += b.G.rows();
        }
    return M;
}

ResidualReport residual_G(const SpectralSurfacePoint& point, const CoreModel& core, const ParametrixGrid& grid)
{
    ParametrixAssembler pa(core, grid);
    return {pa.blocks(point)};
}

namespace {

// 1 / ||M^{-1}||_2 by power iteration on M^{-H} M^{-1}; far cheaper than an SVD for the scan
double sigma_min_of(const Eigen::MatrixXcd& G)
{
    const long n = G.rows();
    Eigen::MatrixXcd M = G + Eigen::MatrixXcd::Identity(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::MatrixXcd Mh = M.adjoint();
    Eigen::PartialPivLU<Eigen::MatrixXcd> luh(Mh);
    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n).normalized();
    double s = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXcd y = luh.solve(lu.solve(x));
        double ny = y.norm();
        if (!std::isfinite(ny))
            return 0.0;
        double next = 1.0 / std::sqrt(ny);
        x = y / ny;
        bool done = it > 2 && std::abs(next - s) <= 1e-10 * next;
        s = next;
        if (done)
            break;
    }
    return s;
}

cplx branch(cplx z, double mu, int sheet)
{
    cplx L = std::sqrt(z - mu);
    if ((L.imag() > 0.0) != (sheet > 0))
        L = -L;
    return L;
}

// reciprocal of <b, (Id+G)^{-1} S b>, the resolvent matrix element; zeros of det(Id+G)
// coming from a kernel of S cancel here, true poles do not
cplx fredholm_objective(const ParametrixAssembler& pa, std::size_t g, cplx z, int sheet)
{
    auto b = pa.block(g, z, branch(z, pa.group_mu(g), sheet));
    const long n = b.G.rows();
    Eigen::MatrixXcd M = b.G + Eigen::MatrixXcd::Identity(n, n);
    Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(n);
    Eigen::VectorXcd sb = b.S.topLeftCorner(n, n) * ones;
    Eigen::VectorXcd x = M.partialPivLu().solve(sb);
    return 1.0 / ones.dot(x);
}

bool secant(const std::function<cplx(cplx)>& F, cplx z0, cplx z1, cplx& root)
{
    cplx f0 = F(z0), f1 = F(z1);
    for (int it = 0; it < 60; ++it) {
        if (f1 == f0)
            break;
        cplx z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
        if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag()))
            return false;
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = F(z1);
        if (std::abs(z1 - z0) < 1e-13 * (1.0 + std::abs(z1))) {
            root = z1;
            return true;
        }
    }
    root = z1;
    return std::abs(f1) < 1e-10;
}

ParametrixGrid level_grid(const ParametrixGrid& g, int level)
{
    return {(g.n + 1) * (1 << level) - 1, g.extra};
}

} // namespace

double fredholm_sigma_min(const std::vector<ParametrixBlock>& blocks)
{
    double s = std::numeric_limits<double>::infinity();
    for (auto& b : blocks)
        s = std::min(s, sigma_min_of(b.G));
    return s;
}

PoleSearchResult pole_search(int sheet, const Rectangle& rect, const CoreModel& core, const ParametrixGrid& grid,
                             const PoleSearchOptions& o)
{
    if (!(rect.hi.real() > rect.lo.real() && rect.hi.imag() > rect.lo.imag()))
        throw DomainError("search rectangle is empty");
    if (sheet != 1 && sheet != -1)
        throw DomainError("sheet must be +1 or -1");
    if (o.scan_re < 3 || o.scan_im < 3 || o.levels < 1)
        throw DomainError("scan needs at least 3 points per side");

    std::vector<std::unique_ptr<ParametrixAssembler>> levels;
    for (int k = 0; k < o.levels; ++k)
        levels.push_back(std::make_unique<ParametrixAssembler>(core, level_grid(grid, k)));
    const auto& pa = *levels[0];
    for (std::size_t g = 0; g < pa.groups(); ++g) {
        double mu = pa.group_mu(g);
        double dx = std::max({rect.lo.real() - mu, 0.0, mu - rect.hi.real()});
        double dy = std::max({rect.lo.imag(), 0.0, -rect.hi.imag()});
        if (std::hypot(dx, dy) < o.threshold_margin)
            throw DomainError("search rectangle must stay away from the thresholds");
    }

    PoleSearchResult res;
    const int nx = o.scan_re, ny = o.scan_im;
    auto at = [&](int i, int j) {
        return cplx(rect.lo.real() + (rect.hi.real() - rect.lo.real()) * i / (nx - 1),
                    rect.lo.imag() + (rect.hi.imag() - rect.lo.imag()) * j / (ny - 1));
    };
    for (std::size_t g = 0; g < pa.groups(); ++g) {
        std::vector<double> val(nx * ny);
        parallel_for(val.size(), [&](std::size_t t) {
            cplx z = at(int(t % nx), int(t / nx));
            try {
                val[t] = sigma_min_of(pa.block(g, z, branch(z, pa.group_mu(g), sheet)).G);
            } catch (const DomainError&) {
                val[t] = 0.0;
            }
        });
        std::vector<cplx> cands;
        // edge minima are usually the flank of an interior pole; only an edge
        // candidate that refines to nothing inside the box is inconclusive
        std::vector<char> edge;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double v = val[j * nx + i];
                if (v >= o.candidate_level)
                    continue;
                bool minimum = true;
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        int a = i + di, b = j + dj;
                        if ((di || dj) && a >= 0 && a < nx && b >= 0 && b < ny && val[b * nx + a] < v)
                            minimum = false;
                    }
                if (!minimum)
                    continue;
                cands.push_back(at(i, j));
                edge.push_back(i == 0 || j == 0 || i == nx - 1 || j == ny - 1);
            }

        cplx step((rect.hi.real() - rect.lo.real()) / (nx - 1) * 0.1,
                  (rect.hi.imag() - rect.lo.imag()) / (ny - 1) * 0.1);
        auto outside = [&] {
            res.inconclusive = true;
            res.warnings.push_back("scan minimum on the rectangle boundary");
        };
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            cplx c = cands[ci];
            bool left = false;
            Pole p;
            p.group = g;
            cplx z = c;
            bool ok = true;
            for (int k = 0; k < o.levels && ok; ++k) {
                const auto& lv = *levels[k];
                auto F = [&](cplx w) { return fredholm_objective(lv, g, w, sheet); };
                cplx root;
                cplx d = k == 0 ? step : step * 1e-3;
                ok = secant(F, z, z + d, root);
                if (ok) {
                    z = root;
                    p.level_values.push_back(root);
                }
                if (ok && k == 0) {
                    left = !rect.contains(root);
                    bool again = left;
                    for (auto& q : res.poles)
                        again = again || (q.group == g && std::abs(q.level_values[0] - root) < 1e-8);
                    if (again)
                        break;
                }
            }
            if (ok && static_cast<int>(p.level_values.size()) < o.levels) {
                if (left && edge[ci])
                    outside();
                continue;
            }
            if (!ok) {
                if (edge[ci])
                    outside();
                else
                    res.warnings.push_back("secant refinement did not converge");
                continue;
            }
            const auto& finest = *levels.back();
            p.sigma_min = sigma_min_of(finest.block(g, z, branch(z, pa.group_mu(g), sheet)).G);
            p.certified = p.sigma_min < o.certificate;
            auto ex = richardson(p.level_values);
            p.z = ex.value;
            p.error_estimate = ex.error;
            if (!rect.contains(p.z)) {
                if (edge[ci])
                    outside();
                continue;
            }
            bool dup = false;
            for (auto& q : res.poles)
                dup = dup || (q.group == g && std::abs(q.z - p.z) < 1e-6);
            if (!dup)
                res.poles.push_back(p);
        }
    }
    std::sort(res.poles.begin(), res.poles.end(), [](auto& a, auto& b) { return a.z.real() < b.z.real(); });
    return res;
}

AnalyticVector& AnalyticVector::add(GaussianTail t)
{
    if (!(t.alpha > 0.0) || t.m < 0)
        throw DomainError("gaussian tail needs alpha > 0 and m >= 0");
    tails_.push_back(t);
    return *this;
}

AnalyticVector& AnalyticVector::add(CoreBump b)
{
    if (!(b.a >= 0.0 && b.b > b.a && b.w > 0.0 && 2.0 * b.w <= b.b - b.a))
        throw DomainError("core bump needs 0 <= a, 2w <= b - a");
    bumps_.push_back(b);
    return *this;
}

cplx AnalyticVector::operator()(cplx z) const
{
    cplx s = 0.0;
    for (auto& t : tails_)
        s += t.c * std::pow(z, t.m) * std::exp(-t.alpha * (z - t.shift) * (z - t.shift));
    if (z.imag() == 0.0) {
        double u = z.real();
        for (auto& b : bumps_)
            s += b.c * rho(b.a, b.a + b.w, u) * (1.0 - rho(b.b - b.w, b.b, u));
    }
    return s;
}

cplx AnalyticVector::reflected(cplx z) const { return std::conj((*this)(std::conj(z))); }

double AnalyticVector::core_extent() const
{
    double e = 0.0;
    for (auto& b : bumps_)
        e = std::max(e, b.b);
    return e;
}

std::vector<cplx> continue_matrix_element(const ModeOperator& op, const AnalyticVector& f, const AnalyticVector& g,
                                          const std::vector<cplx>& path, const ScalingParameter& theta,
                                          const ContinuationOptions& o)
{
    if (path.empty())
        return {};
    if (!(path.front().real() < 0.0))
        throw DomainError("the path must start in the left half-plane");
    if (!(o.h > 0.0) || o.levels < 1 || !(o.exterior > 0.0))
        throw DomainError("invalid continuation options");
    double r0 = o.scaling_radius > 0.0
                    ? o.scaling_radius
                    : std::max({op.potential.support_radius(), f.core_extent(), g.core_extent(), 1.0});
    if (f.core_extent() > r0 || g.core_extent() > r0 || op.potential.support_radius() > r0)
        throw DomainError("core data must lie inside the scaling radius");
    cplx stretch = 1.0 + theta.theta();
    auto anchors = potential_anchors(op, r0);

    std::vector<std::vector<cplx>> per_level(o.levels, std::vector<cplx>(path.size()));
    for (int k = 0; k < o.levels; ++k) {
        Mesh mesh = aligned_mesh(anchors, r0, r0 + o.exterior, o.h, k, true);
        FdSystem sys = assemble(op, stretch, mesh);
        const std::size_t n = sys.size();
        Eigen::VectorXcd rhs(n), gh(n);
        for (std::size_t j = 0; j < n; ++j) {
            rhs(j) = sys.weight[j] * f(sys.z[j]);
            gh(j) = sys.weight[j] * g.reflected(sys.z[j]);
        }
        Eigen::SparseLU<SparseMatrixC> lu;
        lu.analyzePattern(sys.pencil(path.front()));
        for (std::size_t p = 0; p < path.size(); ++p) {
            SparseMatrixC P = sys.pencil(path[p]);
            lu.factorize(P);
            if (lu.info() != Eigen::Success)
                throw NumericalError("resolvent solve failed on the path");
            Eigen::VectorXcd x = lu.solve(rhs);
            double growth = x.norm() / std::max(rhs.norm(), 1e-300);
            if (!std::isfinite(growth) || growth > 1e12)
                throw NumericalError("path point sits on the discrete spectrum");
            per_level[k][p] = (gh.array() * x.array()).sum();
        }
    }
    std::vector<cplx> out(path.size());
    for (std::size_t p = 0; p < path.size(); ++p) {
        std::vector<cplx> row;
        for (int k = 0; k < o.levels; ++k)
            row.push_back(per_level[k][p]);
        out[p] = richardson(row).value;
    }
    return out;
}

} // namespace endspec
