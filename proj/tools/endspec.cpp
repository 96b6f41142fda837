// endspec command-line front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"

#include "endspec/corner.hpp"
#include "endspec/discretize.hpp"
#include "endspec/io.hpp"
#include "endspec/lap.hpp"
#include "endspec/numerics.hpp"
#include "endspec/oracle.hpp"
#include "endspec/resolvent.hpp"

namespace fs = std::filesystem;
using namespace endspec;

namespace {

enum Exit { ok = 0, io_failure = 1, schema = 2, numerical = 3 };

bool verbose = false;

void note(const std::string& s)
{
    if (verbose)
        std::cerr << "[endspec] " << s << "\n";
}

struct Run {
    RunConfig cfg;
    fs::path out;
    std::vector<std::string> warnings;

    bool wants(const std::string& f) const
    {
        return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), f) != cfg.output.formats.end();
    }
    CsvTable table(std::vector<std::string> cols, const std::string& cmd) const
    {
        CsvTable t(std::move(cols));
        stamp(t, cfg, cmd);
        return t;
    }
    void save(const CsvTable& t, const std::string& name) const
    {
        if (!wants("csv"))
            return;
        t.save(out / name);
        note("wrote " + (out / name).string());
    }
    void plot(const PlanePlot& p, const std::string& name) const
    {
        if (!wants("svg"))
            return;
        p.save(out / name);
        note("wrote " + (out / name).string());
    }
    void warn(const std::string& w)
    {
        warnings.push_back(w);
        std::cerr << "warning: " << w << "\n";
    }
    void flush_warnings(const std::string& cmd) const
    {
        if (warnings.empty())
            return;
        auto t = table({"warning"}, cmd);
        for (auto& w : warnings)
            t.row({w});
        t.save(out / "warnings.csv");
    }
};

// one operator per distinct mode, with its multiplicity
std::vector<std::pair<ModeOperator, int>> distinct(const std::vector<ModeOperator>& modes)
{
    std::vector<std::pair<ModeOperator, int>> out;
    std::map<std::string, std::size_t> seen;
    for (auto& m : modes) {
        auto [it, fresh] = seen.emplace(m.identity(), out.size());
        if (fresh)
            out.emplace_back(m, 1);
        else
            ++out[it->second].second;
    }
    return out;
}

ScalingParameter as_theta(cplx t) { return t.imag() == 0.0 ? ScalingParameter::unitary(t.real()) : ScalingParameter::make(t); }

std::string kind_name(ItemKind k) { return k == ItemKind::bound ? "bound" : "resonance"; }

void cmd_spectrum(Run& r)
{
    auto& cfg = r.cfg;
    if (cfg.model.geometry == "cusp") {
        const auto& n = cfg.numerics;
        LineGrid g{n.t0, n.t1, n.line_n};
        g.left = g.right = n.line_ends == "dirichlet" ? LineBoundary::dirichlet : LineBoundary::neumann;
        auto t = r.table({"mode", "mu", "multiplicity", "index", "value", "form"}, "spectrum");
        t.provenance("line", "t in [" + fmt(n.t0) + ", " + fmt(n.t1) + "] n=" + std::to_string(n.line_n) + " ends " +
                                 n.line_ends);
        auto modes = distinct(cfg.modes());
        for (std::size_t k = 0; k < modes.size(); ++k) {
            auto line = cusp_to_schrodinger(modes[k].first);
            auto ev = lowest_eigenvalues(discretize_line(line, g), 5);
            for (std::size_t i = 0; i < ev.size(); ++i)
                t.row({std::to_string(k), fmt(modes[k].first.mode_mu), std::to_string(modes[k].second),
                       std::to_string(i), fmt(ev[i]), line.describe()});
            std::cout << "mode " << k << " (" << line.describe() << "): bottom " << fmt(ev.front()) << "\n";
        }
        r.save(t, "spectrum.csv");
        return;
    }
    auto t = r.table({"mode", "mu", "multiplicity", "value", "error_estimate", "residual"}, "spectrum");
    auto theta = as_theta(cfg.numerics.theta);
    auto modes = distinct(cfg.modes());
    std::vector<std::vector<RefinedEigenvalue>> found(modes.size());
    parallel_for(modes.size(), [&](std::size_t k) {
        found[k] = bound_states(modes[k].first, theta, cfg.grid(), cfg.resonance_options());
    });
    for (std::size_t k = 0; k < modes.size(); ++k)
        for (auto& e : found[k]) {
            t.row({std::to_string(k), fmt(modes[k].first.mode_mu), std::to_string(modes[k].second),
                   fmt(e.value.real()), fmt(e.error_estimate), fmt(e.residual)});
            std::cout << "mode " << k << " bound state " << fmt(e.value.real()) << "\n";
        }
    if (t.rows() == 0)
        std::cout << "no bound states\n";
    r.save(t, "spectrum.csv");
}

void cmd_resonances(Run& r)
{
    auto& cfg = r.cfg;
    auto modes = cfg.modes();
    auto sweep = cfg.sweep();
    auto opts = cfg.resonance_options();
    auto set = find_resonances(modes, sweep, cfg.grid(), opts);
    auto t = r.table({"re", "im", "residual", "theta_spread", "mode", "method", "kind", "multiplicity",
                      "error_estimate", "ambiguous"},
                     "resonances");
    for (auto& w : set.warnings)
        r.warn(w);
    for (auto& it : set.items) {
        t.row({fmt(it.z.real()), fmt(it.z.imag()), fmt(it.residual), fmt(it.theta_spread), std::to_string(it.mode),
               it.method, kind_name(it.kind), std::to_string(it.multiplicity), fmt(it.error_estimate),
               it.ambiguous ? "1" : "0"});
        std::cout << kind_name(it.kind) << " " << fmt(it.z) << " (mode " << it.mode << ")\n";
    }
    r.save(t, "resonances.csv");
    if (r.wants("svg")) {
        PlanePlot p;
        p.title = "scaled spectrum at theta = " + fmt(sweep.front().theta());
        double r0 = opts.scaling_radius > 0.0 ? opts.scaling_radius : auto_scaling_radius(modes);
        std::vector<Threshold> th;
        for (auto& [m, mult] : distinct(modes)) {
            for (cplx z : eigenvalues(discretize(dilate_mode(m, sweep.front(), r0), cfg.grid())))
                if (std::abs(z) <= opts.energy_window)
                    p.points.push_back(z);
            th.push_back({m.mode_mu, "mu=" + fmt(m.mode_mu)});
        }
        p.rays = essential_rays(th, sweep.front());
        for (auto& it : set.items)
            p.highlights.push_back(it.z);
        r.plot(p, "resonances.svg");
    }
}

void cmd_essential(Run& r)
{
    auto& cfg = r.cfg;
    auto t = r.table({"theta_re", "theta_im", "origin_re", "origin_im", "direction_re", "direction_im",
                      "direction_arg", "source"},
                     "essential-spectrum");
    std::optional<ChannelSpectrum> ch;
    CornerModel cm;
    if (cfg.model.geometry == "corner") {
        cm = cfg.corner();
        ch = channel_spectra(cm, cfg.sweep(), cfg.grid(), cfg.resonance_options());
    }
    std::vector<ScalingParameter> thetas = cfg.numerics.thetas.empty() ? std::vector{as_theta(cfg.numerics.theta)}
                                                                       : cfg.sweep();
    RaySet first;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        RaySet rays;
        if (ch) {
            rays = corner_essential_spectrum(cm, thetas[i], *ch);
        } else {
            std::vector<Threshold> th;
            auto cs = cfg.cross_section();
            for (auto& e : cs.entries())
                th.push_back({e.mu, "mu=" + fmt(e.mu) + " x" + std::to_string(e.multiplicity)});
            rays = essential_rays(th, thetas[i]);
        }
        if (i == 0)
            first = rays;
        for (auto& ray : rays.rays)
            t.row({fmt(thetas[i].theta().real()), fmt(thetas[i].theta().imag()), fmt(ray.origin.real()),
                   fmt(ray.origin.imag()), fmt(ray.direction.real()), fmt(ray.direction.imag()),
                   fmt(std::arg(ray.direction)), ray.source});
    }
    std::cout << first.rays.size() << " rays at theta = " << fmt(thetas.front().theta()) << "\n";
    r.save(t, "rays.csv");
    PlanePlot p;
    p.title = "essential spectrum at theta = " + fmt(thetas.front().theta());
    p.rays = first;
    r.plot(p, "rays.svg");
}

AnalyticVector vector_of(const std::vector<TermSpec>& terms, const std::string& which)
{
    if (terms.empty())
        throw ConfigError("task." + which + ": needs at least one term");
    AnalyticVector v;
    for (auto& t : terms) {
        if (t.type == "gaussian")
            v.add(GaussianTail{t.c, t.m, t.alpha, t.shift});
        else
            v.add(CoreBump{t.c, t.a, t.b, t.w});
    }
    return v;
}

void cmd_continue(Run& r)
{
    auto& cfg = r.cfg;
    auto modes = cfg.modes();
    auto k = static_cast<std::size_t>(cfg.task.phi_mode);
    if (k >= modes.size())
        throw ConfigError("task.phi.mode: no such mode");
    auto f = vector_of(cfg.task.f, "f");
    auto g = cfg.task.g.empty() ? f : vector_of(cfg.task.g, "g");
    std::vector<cplx> path = cfg.task.path.empty() ? std::vector{cfg.task.lambda} : cfg.task.path;
    ContinuationOptions o;
    o.scaling_radius = cfg.numerics.scaling_radius;
    auto values = continue_matrix_element(modes[k], f, g, path, as_theta(cfg.numerics.theta), o);
    auto t = r.table({"lambda_re", "lambda_im", "value_re", "value_im"}, "continue");
    for (std::size_t i = 0; i < path.size(); ++i) {
        t.row({fmt(path[i].real()), fmt(path[i].imag()), fmt(values[i].real()), fmt(values[i].imag())});
        std::cout << fmt(path[i]) << " -> " << fmt(values[i]) << "\n";
    }
    r.save(t, "continuation.csv");
}

void cmd_parametrix(Run& r)
{
    auto& cfg = r.cfg;
    auto core = cfg.core();
    ParametrixGrid grid{cfg.task.parametrix_n};
    auto cs = cfg.cross_section();
    std::vector<int> flags(cs.size(), 1);
    auto point = surface_point(cfg.task.lambda, cs, flags, cfg.task.lambda.imag() == 0.0 ? Side::above : Side::none);
    auto rep = residual_G(point, core, grid);
    auto sv = rep.singular_values();
    auto t = r.table({"index", "sigma", "ratio_2k"}, "parametrix-check");
    t.provenance("lambda", fmt(cfg.task.lambda));
    t.provenance("parametrix_n", std::to_string(grid.n));
    double top = sv.empty() ? 0.0 : sv.front();
    bool decay = true;
    std::size_t resolved = 0;
    for (std::size_t i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * top)
            resolved = i + 1;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        std::size_t k = i + 1;
        std::string ratio;
        if (2 * k <= resolved) {
            double q = sv[2 * k - 1] / sv[k - 1];
            ratio = fmt(q);
            decay = decay && q <= 0.5;
        }
        t.row({std::to_string(k), fmt(sv[i]), ratio});
    }
    double smin = fredholm_sigma_min(rep.blocks);
    t.provenance("norm_G", fmt(rep.norm()));
    t.provenance("sigma_min_I_plus_G", fmt(smin));
    t.provenance("decay_check", decay ? "pass" : "fail");
    r.save(t, "parametrix.csv");
    std::cout << "||G|| = " << fmt(rep.norm()) << ", sigma_min(I+G) = " << fmt(smin)
              << ", decay sigma_2k <= sigma_k/2: " << (decay ? "yes" : "no") << "\n";
    if (!decay)
        r.warn("singular values of G do not halve between k and 2k");
    if (cfg.task.export_matrices)
        for (std::size_t b = 0; b < rep.blocks.size(); ++b) {
            write_matrix(r.out / ("G_block" + std::to_string(b) + ".bin"), rep.blocks[b].G);
            write_matrix(r.out / ("S_block" + std::to_string(b) + ".bin"), rep.blocks[b].S);
        }
    if (cfg.task.pole_search) {
        auto res = pole_search(cfg.task.sheet, {cfg.task.rect_lo, cfg.task.rect_hi}, core, grid);
        auto pt = r.table({"re", "im", "error_estimate", "sigma_min", "group", "certified"}, "parametrix-check");
        pt.provenance("sheet", std::to_string(cfg.task.sheet));
        pt.provenance("rectangle", fmt(cfg.task.rect_lo) + " .. " + fmt(cfg.task.rect_hi));
        for (auto& p : res.poles) {
            pt.row({fmt(p.z.real()), fmt(p.z.imag()), fmt(p.error_estimate), fmt(p.sigma_min), std::to_string(p.group),
                    p.certified ? "1" : "0"});
            std::cout << "pole " << fmt(p.z) << (p.certified ? "" : " (uncertified)") << "\n";
        }
        for (auto& w : res.warnings)
            r.warn(w);
        if (res.inconclusive)
            r.warn("pole search inconclusive near the rectangle boundary");
        r.save(pt, "poles.csv");
    }
}

void cmd_lap(Run& r)
{
    auto& cfg = r.cfg;
    auto modes = cfg.modes();
    auto k = static_cast<std::size_t>(cfg.task.phi_mode);
    if (k >= modes.size())
        throw ConfigError("task.phi.mode: no such mode");
    std::vector<ModeVector> phi(modes.size());
    phi[k] = ModeVector::plateau(cfg.task.phi_plateau[0], cfg.task.phi_plateau[1], cfg.task.phi_plateau[2]);
    LapOptions o;
    o.p = cfg.task.p;
    if (!cfg.task.epsilons.empty())
        o.epsilon_grid = cfg.task.epsilons;
    o.theta = cfg.numerics.theta;
    o.scaling_radius = cfg.numerics.scaling_radius;
    auto rep = lap_estimate(modes, phi, cfg.task.a, cfg.task.b, o);
    auto t = r.table({"epsilon", "value", "points"}, "lap");
    t.provenance("interval", "(" + fmt(rep.a) + ", " + fmt(rep.b) + ") p=" + fmt(rep.p));
    t.provenance("verdict", to_string(rep.verdict));
    t.provenance("sup_estimate", fmt(rep.sup_estimate));
    for (std::size_t i = 0; i < rep.values.size(); ++i)
        t.row({fmt(rep.epsilon_grid[i]), fmt(rep.values[i]), std::to_string(rep.points[i])});
    r.save(t, "lap.csv");
    std::cout << "verdict " << to_string(rep.verdict) << ", sup estimate " << fmt(rep.sup_estimate) << "\n";
    if (rep.verdict == LapVerdict::inconclusive)
        r.warn("limiting-absorption verdict inconclusive on (" + fmt(rep.a) + ", " + fmt(rep.b) + ")");
}

bool cmd_corner(Run& r)
{
    auto& cfg = r.cfg;
    auto model = cfg.corner();
    auto sweep = cfg.sweep();
    auto opts = cfg.resonance_options();
    Grid2D g2{cfg.numerics.L2, cfg.numerics.n2};
    note("channel spectra");
    auto ch = channel_spectra(model, sweep, cfg.grid(), opts);
    auto ct = r.table({"channel", "re", "im", "mu", "provenance"}, "corner");
    for (double mu : ch.h3)
        ct.row({"H3", fmt(mu), fmt(0.0), fmt(mu), "cross-section"});
    for (auto& e : ch.h1_pp)
        ct.row({"H1", fmt(e.z.real()), fmt(e.z.imag()), fmt(e.mu), e.provenance});
    for (auto& e : ch.h2_pp)
        ct.row({"H2", fmt(e.z.real()), fmt(e.z.imag()), fmt(e.mu), e.provenance});
    r.save(ct, "channels.csv");

    auto theta = as_theta(cfg.numerics.theta);
    auto rays = corner_essential_spectrum(model, theta, ch);
    auto rt = r.table({"origin_re", "origin_im", "direction_re", "direction_im", "source"}, "corner");
    for (auto& ray : rays.rays)
        rt.row({fmt(ray.origin.real()), fmt(ray.origin.imag()), fmt(ray.direction.real()), fmt(ray.direction.imag()),
                ray.source});
    r.save(rt, "corner_rays.csv");

    note("2D resonances");
    CornerOptions co;
    co.stability_tolerance = cfg.numerics.corner_stability;
    co.rays_tolerance = cfg.numerics.rays_tolerance;
    co.energy_window = cfg.numerics.energy_window;
    auto set = corner_resonances(model, sweep, g2, cfg.grid(), co, opts);
    for (auto& w : set.warnings)
        r.warn(w);
    auto t = r.table({"re", "im", "residual", "theta_spread", "mode", "method", "kind", "multiplicity",
                      "error_estimate"},
                     "corner");
    t.provenance("grid2d", "L=" + fmt(g2.L) + " n=" + std::to_string(g2.n));
    for (auto& it : set.items) {
        t.row({fmt(it.z.real()), fmt(it.z.imag()), fmt(it.residual), fmt(it.theta_spread), std::to_string(it.mode),
               it.method, kind_name(it.kind), std::to_string(it.multiplicity), fmt(it.error_estimate)});
        std::cout << kind_name(it.kind) << " " << fmt(it.z) << " (Y-mode " << it.mode << ")\n";
    }
    r.save(t, "corner_resonances.csv");
    if (r.wants("svg")) {
        PlanePlot p;
        p.title = "corner spectrum, Y-mode 0, theta = " + fmt(theta.theta());
        if (!theta.is_real())
            for (cplx z : corner_eigenvalues(model, theta, g2, 0, co))
                if (std::abs(z) <= co.energy_window)
                    p.points.push_back(z);
        p.rays = rays;
        for (auto& it : set.items)
            p.highlights.push_back(it.z);
        r.plot(p, "corner.svg");
    }

    if (!cfg.task.accumulation)
        return true;
    note("accumulation check");
    if (!model.separable())
        throw ConfigError("task.accumulation: needs a separable corner (no coupling)");
    double width = cfg.model.v1.type == "well" ? cfg.model.v1.width : 1.0;
    auto family = [&](double s) {
        CornerModel m = model;
        m.v1 = RadialPotential::well(s, width);
        m.r0 = std::max(model.r0, width);
        return m;
    };
    std::vector<double> params;
    for (double s = cfg.task.family_min; s <= cfg.task.family_max + 1e-12; s += cfg.task.family_step)
        params.push_back(s);
    auto rep = accumulation_check(family, params, cfg.grid(), cfg.task.birth_tolerance, opts);
    auto at = r.table({"record", "parameter", "value", "distance", "where", "allowed"}, "corner");
    for (auto& st : rep.steps) {
        for (double v : st.channel_pp)
            at.row({"channel_pp", fmt(st.parameter), fmt(v), "", "channel", ""});
        for (double v : st.full_pp)
            at.row({"full_pp", fmt(st.parameter), fmt(v), "", "H", ""});
    }
    for (auto& b : rep.births)
        at.row({"birth", fmt(b.parameter), fmt(b.value), fmt(b.distance), b.where, b.allowed ? "1" : "0"});
    std::string targets;
    for (double x : rep.targets)
        targets += (targets.empty() ? "" : " ") + fmt(x);
    at.provenance("targets", targets.empty() ? "none" : targets);
    r.save(at, "accumulation.csv");
    std::cout << "accumulation targets: " << (targets.empty() ? "none" : targets) << "\n";
    for (auto& f : rep.flags)
        std::cerr << "flag: " << f << "\n";
    return rep.ok();
}

int cmd_oracle(Run& r, const std::string& kind, double v0, double a, double b, double mu)
{
    RadialPotential v;
    std::string label;
    if (kind == "well") {
        v = RadialPotential::well(v0, a);
        label = "well V0=" + fmt(v0) + " a=" + fmt(a);
    } else if (kind == "barrier") {
        v = RadialPotential::barrier(v0, a, b);
        label = "barrier V0=" + fmt(v0) + " on [" + fmt(a) + ", " + fmt(b) + "]";
    } else if (kind == "config") {
        auto modes = distinct(r.cfg.modes());
        auto k = static_cast<std::size_t>(r.cfg.task.phi_mode);
        if (k >= modes.size())
            throw ConfigError("task.phi.mode: no such mode");
        v = modes[k].first.potential;
        mu = modes[k].first.mode_mu;
        label = modes[k].first.describe();
        if (v.smoothness() != Smoothness::piecewise_constant && !v.is_zero())
            throw ConfigError("the matching-equation oracle needs a piecewise-constant potential");
    } else {
        throw ConfigError("oracle: kind must be well, barrier or config");
    }
    auto t = r.table({"kind", "re", "im"}, "oracle");
    t.provenance("potential", label);
    t.provenance("mu", fmt(mu));
    for (double e : oracle_bound_states(v, mu)) {
        t.row({"bound", fmt(e), fmt(0.0)});
        std::cout << "bound " << fmt(e) << "\n";
    }
    for (cplx z : oracle_resonances(v, mu, r.cfg.numerics.energy_window)) {
        t.row({"resonance", fmt(z.real()), fmt(z.imag())});
        std::cout << "resonance " << fmt(z) << "\n";
    }
    r.save(t, "oracle.csv");
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    // "-V0" is the documented spelling of the oracle strength; CLI11 wants it long
    std::vector<std::string> args(argv, argv + argc);
    for (auto& s : args)
        if (s == "-V0")
            s = "--V0";
    std::vector<char*> cargs;
    for (auto& s : args)
        cargs.push_back(s.data());

    CLI::App app{"endspec: spectra, resonances and resolvent continuation for model ends"};
    std::string config_path, out_dir;
    unsigned threads = 0;
    app.add_option("--config", config_path, "JSON run configuration (see docs/config.schema.json)");
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--threads", threads, "worker threads (default: $ENDSPEC_THREADS or all cores)");
    app.add_flag("--verbose", verbose, "progress on stderr");
    app.require_subcommand(1);

    std::map<std::string, std::string> help{
        {"spectrum", "bound states per mode (cusp: bottom of the line operator)"},
        {"resonances", "complex-scaling resonances and bound states"},
        {"essential-spectrum", "rays of the rotated essential spectrum"},
        {"continue", "matrix element of the resolvent along a path"},
        {"parametrix-check", "singular values of the parametrix residual G, optional pole search"},
        {"lap", "limiting-absorption estimate on an interval"},
        {"corner", "channels, rays and resonances of a corner model"},
        {"oracle", "matching-equation bound states and resonances"}};
    std::map<std::string, CLI::App*> subs;
    for (auto& [name, text] : help)
        subs[name] = app.add_subcommand(name, text)->fallthrough();
    std::string okind = "config";
    double v0 = 5.0, oa = 1.0, ob = 2.0, omu = 0.0;
    auto* o = subs["oracle"];
    o->add_option("kind", okind, "well | barrier | config")->check(CLI::IsMember({"well", "barrier", "config"}));
    o->add_option("--V0", v0, "well depth or barrier height (also -V0)");
    o->add_option("-a", oa, "well width, or barrier start");
    o->add_option("-b", ob, "barrier end");
    o->add_option("--mu", omu, "mode threshold");

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : schema;
    }
    if (threads > 0)
        set_thread_count(threads);

    std::string command;
    for (auto& [name, sub] : subs)
        if (sub->parsed())
            command = name;

    Run run;
    try {
        if (!config_path.empty())
            run.cfg = load_config(config_path);
        else
            run.cfg = parse_config(nlohmann::json::object());
        if (!run.cfg.task.command.empty() && run.cfg.task.command != command)
            throw ConfigError("task.command is '" + run.cfg.task.command + "' but the subcommand is '" + command + "'");
        run.out = out_dir.empty() ? fs::path(run.cfg.output.directory) : fs::path(out_dir);
        fs::create_directories(run.out);
        note("command " + command + ", " + std::to_string(thread_count()) + " threads, output " + run.out.string());

        int code = ok;
        if (command == "spectrum")
            cmd_spectrum(run);
        else if (command == "resonances")
            cmd_resonances(run);
        else if (command == "essential-spectrum")
            cmd_essential(run);
        else if (command == "continue")
            cmd_continue(run);
        else if (command == "parametrix-check")
            cmd_parametrix(run);
        else if (command == "lap")
            cmd_lap(run);
        else if (command == "corner") {
            if (!cmd_corner(run)) {
                run.warn("eigenvalues accumulate away from the allowed set");
                code = numerical;
            }
        } else if (command == "oracle")
            code = cmd_oracle(run, okind, v0, oa, ob, omu);
        run.flush_warnings(command);
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return schema;
    } catch (const GridWarning& e) {
        std::cerr << "grid rejected: " << e.what() << "\n";
        return schema;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return schema;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return io_failure;
    }
}
