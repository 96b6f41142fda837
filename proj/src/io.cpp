#include "endspec/io.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace endspec {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object())
        throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto& [k, v] : j.items())
        if (!ok.count(k))
            throw ConfigError(where + ": unknown key '" + k + "'");
}

double num(const json& j, const std::string& where)
{
    if (!j.is_number())
        throw ConfigError(where + ": expected a number");
    double x = j.get<double>();
    if (!std::isfinite(x))
        throw ConfigError(where + ": not finite");
    return x;
}

int integer(const json& j, const std::string& where)
{
    if (!j.is_number_integer())
        throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& where)
{
    if (!j.is_string())
        throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

bool flag(const json& j, const std::string& where)
{
    if (!j.is_boolean())
        throw ConfigError(where + ": expected true or false");
    return j.get<bool>();
}

template <class F>
void opt(const json& j, const char* key, F&& set)
{
    if (j.contains(key))
        set(j.at(key));
}

std::string one_of(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    std::string s = text(j, where);
    for (auto* a : allowed)
        if (s == a)
            return s;
    throw ConfigError(where + ": '" + s + "' is not an allowed value");
}

void positive(double x, const std::string& where)
{
    if (!(x > 0.0))
        throw ConfigError(where + ": must be positive");
}

PotentialSpec parse_potential(const json& j, const std::string& where)
{
    only_keys(j, where, {"type", "depth", "width", "height", "value", "amplitude", "a", "b", "file"});
    if (!j.contains("type"))
        throw ConfigError(where + ": 'type' is required");
    PotentialSpec p;
    p.type = one_of(j["type"], where + ".type", {"zero", "well", "barrier", "step", "bump", "table"});
    opt(j, "depth", [&](auto& v) { p.depth = num(v, where + ".depth"); });
    opt(j, "width", [&](auto& v) { p.width = num(v, where + ".width"); });
    opt(j, "height", [&](auto& v) { p.height = num(v, where + ".height"); });
    opt(j, "value", [&](auto& v) { p.value = num(v, where + ".value"); });
    opt(j, "amplitude", [&](auto& v) { p.amplitude = num(v, where + ".amplitude"); });
    opt(j, "a", [&](auto& v) { p.a = num(v, where + ".a"); });
    opt(j, "b", [&](auto& v) { p.b = num(v, where + ".b"); });
    opt(j, "file", [&](auto& v) { p.file = text(v, where + ".file"); });
    auto need = [&](const char* key) {
        if (!j.contains(key))
            throw ConfigError(where + ": type '" + p.type + "' needs '" + key + "'");
    };
    if (p.type == "well") {
        need("depth");
        positive(p.width, where + ".width");
    } else if (p.type == "barrier") {
        need("height");
    } else if (p.type == "step") {
        need("value");
    } else if (p.type == "bump") {
        need("amplitude");
    } else if (p.type == "table") {
        need("file");
    }
    if ((p.type == "barrier" || p.type == "step" || p.type == "bump") && !(p.a >= 0.0 && p.b > p.a))
        throw ConfigError(where + ": needs 0 <= a < b");
    return p;
}

TermSpec parse_term(const json& j, const std::string& where)
{
    only_keys(j, where, {"type", "c", "m", "alpha", "shift", "a", "b", "w"});
    if (!j.contains("type"))
        throw ConfigError(where + ": 'type' is required");
    TermSpec t;
    t.type = one_of(j["type"], where + ".type", {"gaussian", "bump"});
    opt(j, "c", [&](auto& v) { t.c = num(v, where + ".c"); });
    opt(j, "m", [&](auto& v) { t.m = integer(v, where + ".m"); });
    opt(j, "alpha", [&](auto& v) { t.alpha = num(v, where + ".alpha"); });
    opt(j, "shift", [&](auto& v) { t.shift = num(v, where + ".shift"); });
    opt(j, "a", [&](auto& v) { t.a = num(v, where + ".a"); });
    opt(j, "b", [&](auto& v) { t.b = num(v, where + ".b"); });
    opt(j, "w", [&](auto& v) { t.w = num(v, where + ".w"); });
    if (t.m < 0)
        throw ConfigError(where + ".m: must be >= 0");
    positive(t.alpha, where + ".alpha");
    positive(t.w, where + ".w");
    if (t.type == "bump" && !(t.a >= 0.0 && t.b - t.a >= 2.0 * t.w))
        throw ConfigError(where + ": bump needs 0 <= a and b - a >= 2 w");
    return t;
}

std::vector<TermSpec> parse_terms(const json& j, const std::string& where)
{
    if (!j.is_array())
        throw ConfigError(where + ": expected an array");
    std::vector<TermSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_term(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_model(const json& j, ModelConfig& m)
{
    only_keys(j, "model", {"geometry", "cross_section", "dimension", "potentials", "profile", "core", "corner"});
    opt(j, "geometry", [&](auto& v) { m.geometry = one_of(v, "model.geometry", {"cylindrical", "cusp", "corner"}); });
    opt(j, "cross_section", [&](auto& v) {
        only_keys(v, "model.cross_section", {"kind", "radius", "length", "thresholds"});
        if (!v.contains("kind"))
            throw ConfigError("model.cross_section: 'kind' is required");
        m.cross_section =
            one_of(v["kind"], "model.cross_section.kind", {"point", "circle", "dirichlet-interval", "explicit"});
        if (m.cross_section == "circle") {
            if (!v.contains("radius"))
                throw ConfigError("model.cross_section: circle needs 'radius'");
            m.cross_parameter = num(v["radius"], "model.cross_section.radius");
            positive(m.cross_parameter, "model.cross_section.radius");
        } else if (m.cross_section == "dirichlet-interval") {
            if (!v.contains("length"))
                throw ConfigError("model.cross_section: dirichlet-interval needs 'length'");
            m.cross_parameter = num(v["length"], "model.cross_section.length");
            positive(m.cross_parameter, "model.cross_section.length");
        } else if (m.cross_section == "explicit") {
            if (!v.contains("thresholds") || !v["thresholds"].is_array() || v["thresholds"].empty())
                throw ConfigError("model.cross_section: explicit needs a nonempty 'thresholds' list");
            for (std::size_t i = 0; i < v["thresholds"].size(); ++i) {
                const auto& t = v["thresholds"][i];
                std::string w = "model.cross_section.thresholds[" + std::to_string(i) + "]";
                only_keys(t, w, {"mu", "multiplicity"});
                if (!t.contains("mu"))
                    throw ConfigError(w + ": 'mu' is required");
                ThresholdEntry e{num(t["mu"], w + ".mu"), 1};
                opt(t, "multiplicity", [&](auto& x) { e.multiplicity = integer(x, w + ".multiplicity"); });
                if (e.mu < 0.0 || e.multiplicity < 1)
                    throw ConfigError(w + ": need mu >= 0 and multiplicity >= 1");
                m.thresholds.push_back(e);
            }
        }
    });
    opt(j, "dimension", [&](auto& v) {
        m.dimension = integer(v, "model.dimension");
        if (m.dimension < 2)
            throw ConfigError("model.dimension: must be >= 2");
    });
    opt(j, "potentials", [&](auto& v) {
        if (!v.is_array())
            throw ConfigError("model.potentials: expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::string w = "model.potentials[" + std::to_string(i) + "]";
            only_keys(v[i], w, {"mode", "potential"});
            if (!v[i].contains("mode") || !v[i].contains("potential"))
                throw ConfigError(w + ": needs 'mode' and 'potential'");
            int mode = integer(v[i]["mode"], w + ".mode");
            if (mode < 0)
                throw ConfigError(w + ".mode: must be >= 0");
            m.potentials.emplace_back(static_cast<std::size_t>(mode), parse_potential(v[i]["potential"], w + ".potential"));
        }
    });
    opt(j, "profile", [&](auto& v) {
        only_keys(v, "model.profile", {"r", "amplitude", "a", "b"});
        ProfileSpec p;
        opt(v, "r", [&](auto& x) { p.r = num(x, "model.profile.r"); });
        opt(v, "amplitude", [&](auto& x) { p.amplitude = num(x, "model.profile.amplitude"); });
        opt(v, "a", [&](auto& x) { p.a = num(x, "model.profile.a"); });
        opt(v, "b", [&](auto& x) { p.b = num(x, "model.profile.b"); });
        positive(p.r, "model.profile.r");
        if (!(p.a >= 0.0 && p.b > p.a))
            throw ConfigError("model.profile: needs 0 <= a < b");
        m.profile = p;
    });
    opt(j, "core", [&](auto& v) {
        only_keys(v, "model.core", {"radius", "collar"});
        opt(v, "radius", [&](auto& x) { m.core_radius = num(x, "model.core.radius"); });
        opt(v, "collar", [&](auto& x) { m.collar = num(x, "model.core.collar"); });
        if (m.core_radius < 0.0)
            throw ConfigError("model.core.radius: must be >= 0");
        positive(m.collar, "model.core.collar");
    });
    opt(j, "corner", [&](auto& v) {
        only_keys(v, "model.corner", {"v1", "v2", "r0", "coupling"});
        opt(v, "v1", [&](auto& x) { m.v1 = parse_potential(x, "model.corner.v1"); });
        opt(v, "v2", [&](auto& x) { m.v2 = parse_potential(x, "model.corner.v2"); });
        opt(v, "r0", [&](auto& x) { m.r0 = num(x, "model.corner.r0"); });
        positive(m.r0, "model.corner.r0");
        opt(v, "coupling", [&](auto& x) {
            if (!x.is_array())
                throw ConfigError("model.corner.coupling: expected an array");
            for (std::size_t i = 0; i < x.size(); ++i) {
                std::string w = "model.corner.coupling[" + std::to_string(i) + "]";
                only_keys(x[i], w, {"a1", "b1", "a2", "b2", "value"});
                CouplingBox b;
                for (auto [key, dst] : {std::pair{"a1", &b.a1}, std::pair{"b1", &b.b1}, std::pair{"a2", &b.a2},
                                        std::pair{"b2", &b.b2}, std::pair{"value", &b.value}}) {
                    if (!x[i].contains(key))
                        throw ConfigError(w + ": '" + key + "' is required");
                    *dst = num(x[i][key], w + "." + key);
                }
                m.coupling.push_back(b);
            }
        });
    });
}

void parse_numerics(const json& j, NumericsConfig& n)
{
    only_keys(j, "numerics", {"L", "n", "scheme", "thetas", "theta", "rays_tolerance", "stability_tolerance",
                              "residual_bound", "energy_window", "e_max", "scaling_radius", "extrapolate", "grid2d",
                              "line"});
    opt(j, "L", [&](auto& v) { n.L = num(v, "numerics.L"); });
    opt(j, "n", [&](auto& v) { n.n = integer(v, "numerics.n"); });
    opt(j, "scheme", [&](auto& v) {
        n.scheme = one_of(v, "numerics.scheme", {"fd2", "fd4"}) == "fd4" ? Scheme::fd4 : Scheme::fd2;
    });
    opt(j, "thetas", [&](auto& v) {
        if (!v.is_array() || v.empty())
            throw ConfigError("numerics.thetas: expected a nonempty array");
        for (std::size_t i = 0; i < v.size(); ++i)
            n.thetas.push_back(parse_complex(v[i], "numerics.thetas[" + std::to_string(i) + "]"));
    });
    opt(j, "theta", [&](auto& v) { n.theta = parse_complex(v, "numerics.theta"); });
    opt(j, "rays_tolerance", [&](auto& v) { n.rays_tolerance = num(v, "numerics.rays_tolerance"); });
    opt(j, "stability_tolerance", [&](auto& v) { n.stability_tolerance = num(v, "numerics.stability_tolerance"); });
    opt(j, "residual_bound", [&](auto& v) { n.residual_bound = num(v, "numerics.residual_bound"); });
    opt(j, "energy_window", [&](auto& v) { n.energy_window = num(v, "numerics.energy_window"); });
    opt(j, "e_max", [&](auto& v) { n.e_max = num(v, "numerics.e_max"); });
    opt(j, "scaling_radius", [&](auto& v) { n.scaling_radius = num(v, "numerics.scaling_radius"); });
    opt(j, "extrapolate", [&](auto& v) { n.extrapolate = flag(v, "numerics.extrapolate"); });
    opt(j, "grid2d", [&](auto& v) {
        only_keys(v, "numerics.grid2d", {"L", "n", "stability_tolerance"});
        opt(v, "L", [&](auto& x) { n.L2 = num(x, "numerics.grid2d.L"); });
        opt(v, "n", [&](auto& x) { n.n2 = integer(x, "numerics.grid2d.n"); });
        opt(v, "stability_tolerance", [&](auto& x) { n.corner_stability = num(x, "numerics.grid2d.stability_tolerance"); });
        positive(n.L2, "numerics.grid2d.L");
        positive(n.corner_stability, "numerics.grid2d.stability_tolerance");
        if (n.n2 < 4)
            throw ConfigError("numerics.grid2d.n: must be >= 4");
    });
    opt(j, "line", [&](auto& v) {
        only_keys(v, "numerics.line", {"t0", "t1", "n", "ends"});
        opt(v, "t0", [&](auto& x) { n.t0 = num(x, "numerics.line.t0"); });
        opt(v, "t1", [&](auto& x) { n.t1 = num(x, "numerics.line.t1"); });
        opt(v, "n", [&](auto& x) { n.line_n = integer(x, "numerics.line.n"); });
        opt(v, "ends", [&](auto& x) { n.line_ends = one_of(x, "numerics.line.ends", {"neumann", "dirichlet"}); });
        if (!(n.t1 > n.t0) || n.line_n < 50)
            throw ConfigError("numerics.line: needs t1 > t0 and n >= 50");
    });
    positive(n.L, "numerics.L");
    if (n.n < 50)
        throw ConfigError("numerics.n: must be >= 50");
    for (double x : {n.rays_tolerance, n.stability_tolerance, n.residual_bound, n.energy_window})
        positive(x, "numerics tolerances");
    if (n.e_max < 0.0 || n.scaling_radius < 0.0)
        throw ConfigError("numerics: e_max and scaling_radius must be >= 0");
    for (cplx t : n.thetas)
        if (!(t.imag() == 0.0 ? t.real() >= 0.0 : in_gamma(t)))
            throw ConfigError("numerics.thetas: value outside the admissible region");
    if (!(n.theta.imag() == 0.0 ? n.theta.real() >= 0.0 : in_gamma(n.theta)))
        throw ConfigError("numerics.theta: value outside the admissible region");
}

void parse_task(const json& j, TaskConfig& t)
{
    only_keys(j, "task", {"command", "lambda", "path", "f", "g", "interval", "p", "epsilons", "phi", "rectangle",
                          "sheet", "pole_search", "parametrix_n", "export_matrices", "accumulation"});
    opt(j, "command", [&](auto& v) {
        t.command = one_of(v, "task.command", {"spectrum", "resonances", "essential-spectrum", "continue",
                                               "parametrix-check", "lap", "corner", "oracle"});
    });
    opt(j, "lambda", [&](auto& v) { t.lambda = parse_complex(v, "task.lambda"); });
    opt(j, "path", [&](auto& v) {
        if (!v.is_array() || v.empty())
            throw ConfigError("task.path: expected a nonempty array");
        for (std::size_t i = 0; i < v.size(); ++i)
            t.path.push_back(parse_complex(v[i], "task.path[" + std::to_string(i) + "]"));
    });
    opt(j, "f", [&](auto& v) { t.f = parse_terms(v, "task.f"); });
    opt(j, "g", [&](auto& v) { t.g = parse_terms(v, "task.g"); });
    opt(j, "interval", [&](auto& v) {
        if (!v.is_array() || v.size() != 2)
            throw ConfigError("task.interval: expected [a, b]");
        t.a = num(v[0], "task.interval[0]");
        t.b = num(v[1], "task.interval[1]");
        if (!(t.b > t.a))
            throw ConfigError("task.interval: needs a < b");
    });
    opt(j, "p", [&](auto& v) {
        t.p = num(v, "task.p");
        if (t.p < 1.0)
            throw ConfigError("task.p: must be >= 1");
    });
    opt(j, "epsilons", [&](auto& v) {
        if (!v.is_array() || v.size() < 2)
            throw ConfigError("task.epsilons: expected at least two values");
        for (std::size_t i = 0; i < v.size(); ++i) {
            double e = num(v[i], "task.epsilons[" + std::to_string(i) + "]");
            positive(e, "task.epsilons");
            t.epsilons.push_back(e);
        }
    });
    opt(j, "phi", [&](auto& v) {
        only_keys(v, "task.phi", {"mode", "a", "b", "w"});
        opt(v, "mode", [&](auto& x) { t.phi_mode = integer(x, "task.phi.mode"); });
        opt(v, "a", [&](auto& x) { t.phi_plateau[0] = num(x, "task.phi.a"); });
        opt(v, "b", [&](auto& x) { t.phi_plateau[1] = num(x, "task.phi.b"); });
        opt(v, "w", [&](auto& x) { t.phi_plateau[2] = num(x, "task.phi.w"); });
        if (t.phi_mode < 0 || !(t.phi_plateau[0] >= 0.0 && t.phi_plateau[1] - t.phi_plateau[0] >= 2.0 * t.phi_plateau[2]))
            throw ConfigError("task.phi: needs mode >= 0, a >= 0 and b - a >= 2 w");
        positive(t.phi_plateau[2], "task.phi.w");
    });
    opt(j, "rectangle", [&](auto& v) {
        only_keys(v, "task.rectangle", {"lo", "hi"});
        if (!v.contains("lo") || !v.contains("hi"))
            throw ConfigError("task.rectangle: needs 'lo' and 'hi'");
        t.rect_lo = parse_complex(v["lo"], "task.rectangle.lo");
        t.rect_hi = parse_complex(v["hi"], "task.rectangle.hi");
        if (!(t.rect_hi.real() > t.rect_lo.real() && t.rect_hi.imag() > t.rect_lo.imag()))
            throw ConfigError("task.rectangle: hi must exceed lo in both parts");
    });
    opt(j, "sheet", [&](auto& v) {
        t.sheet = integer(v, "task.sheet");
        if (t.sheet != 1 && t.sheet != -1)
            throw ConfigError("task.sheet: must be 1 or -1");
    });
    opt(j, "pole_search", [&](auto& v) { t.pole_search = flag(v, "task.pole_search"); });
    opt(j, "parametrix_n", [&](auto& v) {
        t.parametrix_n = integer(v, "task.parametrix_n");
        if (t.parametrix_n < 20)
            throw ConfigError("task.parametrix_n: must be >= 20");
    });
    opt(j, "export_matrices", [&](auto& v) { t.export_matrices = flag(v, "task.export_matrices"); });
    opt(j, "accumulation", [&](auto& v) {
        only_keys(v, "task.accumulation", {"min", "max", "step", "birth_tolerance"});
        t.accumulation = true;
        opt(v, "min", [&](auto& x) { t.family_min = num(x, "task.accumulation.min"); });
        opt(v, "max", [&](auto& x) { t.family_max = num(x, "task.accumulation.max"); });
        opt(v, "step", [&](auto& x) { t.family_step = num(x, "task.accumulation.step"); });
        opt(v, "birth_tolerance", [&](auto& x) { t.birth_tolerance = num(x, "task.accumulation.birth_tolerance"); });
        positive(t.family_step, "task.accumulation.step");
        positive(t.birth_tolerance, "task.accumulation.birth_tolerance");
        if (!(t.family_max > t.family_min))
            throw ConfigError("task.accumulation: needs max > min");
    });
}

void parse_output(const json& j, OutputConfig& o)
{
    only_keys(j, "output", {"directory", "formats"});
    opt(j, "directory", [&](auto& v) { o.directory = text(v, "output.directory"); });
    opt(j, "formats", [&](auto& v) {
        if (!v.is_array())
            throw ConfigError("output.formats: expected an array");
        o.formats.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto f = one_of(v[i], "output.formats[" + std::to_string(i) + "]", {"csv", "svg"});
            if (std::find(o.formats.begin(), o.formats.end(), f) != o.formats.end())
                throw ConfigError("output.formats: duplicate entry '" + f + "'");
            o.formats.push_back(f);
        }
    });
}

} // namespace

cplx parse_complex(const json& j, const std::string& where)
{
    if (j.is_number())
        return {num(j, where), 0.0};
    if (j.is_array() && j.size() == 2)
        return {num(j[0], where + "[0]"), num(j[1], where + "[1]")};
    throw ConfigError(where + ": expected a number or [re, im]");
}

RunConfig parse_config(const json& j, const std::filesystem::path& base)
{
    only_keys(j, "config", {"model", "numerics", "task", "output"});
    RunConfig c;
    c.base = base;
    c.source = j;
    opt(j, "model", [&](auto& v) { parse_model(v, c.model); });
    opt(j, "numerics", [&](auto& v) { parse_numerics(v, c.numerics); });
    opt(j, "task", [&](auto& v) { parse_task(v, c.task); });
    opt(j, "output", [&](auto& v) { parse_output(v, c.output); });
    if (c.model.profile && (c.model.cross_section != "circle" || c.model.cross_parameter != c.model.profile->r))
        throw ConfigError("model.profile: needs a circle cross-section with the same radius r");
    if (c.model.profile && !c.model.potentials.empty())
        throw ConfigError("model: give either 'profile' or 'potentials', not both");
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, path.parent_path());
}

RadialPotential PotentialSpec::build(const std::filesystem::path& base) const
{
    if (type == "zero")
        return RadialPotential::zero();
    if (type == "well")
        return RadialPotential::well(depth, width);
    if (type == "barrier")
        return RadialPotential::barrier(height, a, b);
    if (type == "step")
        return RadialPotential::step(value, a, b);
    if (type == "bump")
        return RadialPotential::bump(amplitude, a, b);
    std::filesystem::path p = file;
    if (p.is_relative())
        p = base / p;
    return RadialPotential::from_file(p);
}

std::vector<ScalingParameter> RunConfig::sweep() const
{
    if (numerics.thetas.empty())
        return default_theta_sweep();
    std::vector<ScalingParameter> out;
    for (cplx t : numerics.thetas)
        out.push_back(t.imag() == 0.0 ? ScalingParameter::unitary(t.real()) : ScalingParameter::make(t));
    return out;
}

CrossSectionSpectrum RunConfig::cross_section() const
{
    if (model.cross_section == "explicit")
        return make_cross_section(model.thresholds);
    return make_cross_section(model.cross_section, model.cross_parameter, numerics.e_max);
}

std::vector<ModeOperator> RunConfig::modes() const
{
    auto cs = cross_section();
    if (model.geometry == "cusp")
        return reduce_cusp(cs, model.dimension);
    std::map<std::size_t, RadialPotential> pots;
    if (model.profile) {
        auto prof = WarpedProfile::bump(model.profile->r, model.profile->amplitude, model.profile->a, model.profile->b);
        for (std::size_t k = 0; k < cs.size(); ++k)
            pots[k] = warped_product_potential(prof, static_cast<int>(k));
    }
    for (auto& [mode, spec] : model.potentials) {
        if (pots.count(mode))
            throw ConfigError("model.potentials: mode " + std::to_string(mode) + " given twice");
        pots[mode] = spec.build(base);
    }
    return reduce_cylindrical(cs, pots);
}

Grid1D RunConfig::grid() const { return {numerics.L, numerics.n, numerics.scheme}; }

ResonanceOptions RunConfig::resonance_options() const
{
    ResonanceOptions o;
    o.rays_tolerance = numerics.rays_tolerance;
    o.stability_tolerance = numerics.stability_tolerance;
    o.residual_bound = numerics.residual_bound;
    o.energy_window = numerics.energy_window;
    o.scaling_radius = numerics.scaling_radius;
    o.extrapolate = numerics.extrapolate;
    return o;
}

CornerModel RunConfig::corner() const
{
    CornerModel m;
    m.v1 = model.v1.build(base);
    m.v2 = model.v2.build(base);
    m.y = cross_section();
    m.coupling = model.coupling;
    m.r0 = model.r0;
    return m;
}

CoreModel RunConfig::core() const
{
    CoreModel c;
    c.modes = modes();
    c.core_radius = model.core_radius;
    c.collar = model.collar;
    return c;
}

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& cfg)
{
    // json objects keep keys sorted, so the dump is canonical
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.source.dump())));
    return buf;
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(cplx z) { return fmt(z.real()) + (z.imag() < 0 ? "" : "+") + fmt(z.imag()) + "i"; }

void CsvTable::row(std::vector<std::string> cells)
{
    if (cells.size() != columns_.size())
        throw DomainError("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const
{
    for (auto& [k, v] : meta_)
        os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
        os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            bool quote = r[i].find_first_of(",\"\n") != std::string::npos;
            if (i)
                os << ",";
            if (quote) {
                os << '"';
                for (char ch : r[i])
                    os << (ch == '"' ? "\"\"" : std::string(1, ch));
                os << '"';
            } else {
                os << r[i];
            }
        }
        os << "\n";
    }
}

void CsvTable::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    write(out);
}

void stamp(CsvTable& t, const RunConfig& cfg, const std::string& command)
{
    const auto& n = cfg.numerics;
    t.provenance("tool", "endspec 0.3.0");
    t.provenance("command", command);
    t.provenance("config_fnv1a", config_hash(cfg));
    std::ostringstream grid;
    grid << "L=" << fmt(n.L) << " n=" << n.n << " scheme=" << (n.scheme == Scheme::fd4 ? "fd4" : "fd2")
         << " h=" << fmt(n.L / (n.n + 1));
    t.provenance("grid", grid.str());
    std::ostringstream tol;
    tol << "rays=" << fmt(n.rays_tolerance) << " stability=" << fmt(n.stability_tolerance)
        << " residual=" << fmt(n.residual_bound) << " window=" << fmt(n.energy_window);
    t.provenance("tolerances", tol.str());
    std::ostringstream th;
    auto sweep = cfg.sweep();
    for (std::size_t i = 0; i < sweep.size(); ++i)
        th << (i ? " " : "") << fmt(sweep[i].theta());
    t.provenance("thetas", th.str());
}

void PlanePlot::save(const std::filesystem::path& path) const
{
    std::vector<cplx> all = points;
    all.insert(all.end(), highlights.begin(), highlights.end());
    for (auto& r : rays.rays)
        all.push_back(r.origin);
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    if (!all.empty()) {
        x0 = x1 = all[0].real();
        y0 = y1 = all[0].imag();
        for (cplx z : all) {
            x0 = std::min(x0, z.real());
            x1 = std::max(x1, z.real());
            y0 = std::min(y0, z.imag());
            y1 = std::max(y1, z.imag());
        }
    }
    double pad = 0.1 * std::max({x1 - x0, y1 - y0, 1.0});
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    const double W = 640, H = 480;
    auto X = [&](double x) { return 40 + (x - x0) / (x1 - x0) * (W - 60); };
    auto Y = [&](double y) { return H - 30 - (y - y0) / (y1 - y0) * (H - 60); };
    std::ostringstream s;
    s << std::setprecision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"40\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n";
    if (y0 < 0 && y1 > 0)
        s << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(0)
          << "\" stroke=\"#999\"/>\n";
    if (x0 < 0 && x1 > 0)
        s << "<line x1=\"" << X(0) << "\" y1=\"" << Y(y0) << "\" x2=\"" << X(0) << "\" y2=\"" << Y(y1)
          << "\" stroke=\"#999\"/>\n";
    for (auto& r : rays.rays) {
        // run the ray until it leaves the box
        double tmax = 1e300;
        cplx d = r.direction;
        if (d.real() > 0)
            tmax = std::min(tmax, (x1 - r.origin.real()) / d.real());
        if (d.real() < 0)
            tmax = std::min(tmax, (x0 - r.origin.real()) / d.real());
        if (d.imag() > 0)
            tmax = std::min(tmax, (y1 - r.origin.imag()) / d.imag());
        if (d.imag() < 0)
            tmax = std::min(tmax, (y0 - r.origin.imag()) / d.imag());
        cplx e = r.origin + std::max(0.0, tmax) * d;
        s << "<line x1=\"" << X(r.origin.real()) << "\" y1=\"" << Y(r.origin.imag()) << "\" x2=\"" << X(e.real())
          << "\" y2=\"" << Y(e.imag()) << "\" stroke=\"#3a7\" stroke-width=\"1.5\"/>\n";
    }
    for (cplx z : points)
        s << "<circle cx=\"" << X(z.real()) << "\" cy=\"" << Y(z.imag()) << "\" r=\"1.8\" fill=\"#456\"/>\n";
    for (cplx z : highlights)
        s << "<circle cx=\"" << X(z.real()) << "\" cy=\"" << Y(z.imag())
          << "\" r=\"4\" fill=\"none\" stroke=\"#c22\" stroke-width=\"1.5\"/>\n";
    s << "<text x=\"40\" y=\"" << H - 8 << "\" font-family=\"sans-serif\" font-size=\"11\">Re [" << x0 << ", " << x1
      << "]  Im [" << y0 << ", " << y1 << "]</text>\n";
    s << "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << s.str();
}

namespace {

void write_raw(const std::filesystem::path& path, std::uint64_t rows, std::uint64_t cols, std::uint32_t dtype,
               const std::vector<double>& payload)
{
    static_assert(std::endian::native == std::endian::little, "matrix files are little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    const char magic[8] = {'E', 'N', 'D', 'S', 'P', 'E', 'C', '\0'};
    std::uint32_t reserved = 0;
    out.write(magic, 8);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(&dtype), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 8));
}

} // namespace

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m)
{
    std::vector<double> p;
    p.reserve(static_cast<std::size_t>(m.size()) * 2);
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) {
            p.push_back(m(i, j).real());
            p.push_back(m(i, j).imag());
        }
    write_raw(path, m.rows(), m.cols(), 2, p);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m)
{
    std::vector<double> p;
    p.reserve(static_cast<std::size_t>(m.size()));
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j)
            p.push_back(m(i, j));
    write_raw(path, m.rows(), m.cols(), 1, p);
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    char magic[8];
    std::uint64_t rows = 0, cols = 0;
    std::uint32_t dtype = 0, reserved = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    in.read(reinterpret_cast<char*>(&dtype), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, "ENDSPEC\0", 8) != 0 || (dtype != 1 && dtype != 2))
        throw Error(path.string() + " is not an endspec matrix file");
    Eigen::MatrixXcd m(static_cast<long>(rows), static_cast<long>(cols));
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j) {
            double v[2] = {0.0, 0.0};
            in.read(reinterpret_cast<char*>(v), dtype == 2 ? 16 : 8);
            m(static_cast<long>(i), static_cast<long>(j)) = cplx(v[0], v[1]);
        }
    if (!in)
        throw Error(path.string() + " is truncated");
    return m;
}

} // namespace endspec
