#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "endspec/corner.hpp"
#include "endspec/discretize.hpp"
#include "endspec/lap.hpp"
#include "endspec/resolvent.hpp"

namespace endspec {

// Bad configuration: unknown key, wrong type, value out of range. Maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct PotentialSpec {
    std::string type = "zero";  // zero | well | barrier | step | bump | table
    double depth = 0.0, width = 1.0, height = 0.0, value = 0.0, amplitude = 0.0;
    double a = 0.0, b = 1.0;
    std::string file;

    RadialPotential build(const std::filesystem::path& base) const;
};

struct ProfileSpec {
    double r = 1.0;
    double amplitude = 0.0;
    double a = 0.0, b = 1.0;
};

struct ModelConfig {
    std::string geometry = "cylindrical";  // cylindrical | cusp | corner
    std::string cross_section = "point";    // point | circle | dirichlet-interval | explicit
    double cross_parameter = 1.0;
    std::vector<ThresholdEntry> thresholds;  // explicit list
    int dimension = 2;
    std::vector<std::pair<std::size_t, PotentialSpec>> potentials;
    std::optional<ProfileSpec> profile;
    double core_radius = 1.0;
    double collar = 1.0;
    PotentialSpec v1, v2;
    std::vector<CouplingBox> coupling;
    double r0 = 1.0;
};

struct NumericsConfig {
    double L = 12.0;
    int n = 800;
    Scheme scheme = Scheme::fd2;
    std::vector<cplx> thetas;  // empty: default sweep
    cplx theta{0.4, 0.3};
    double rays_tolerance = 0.02;
    double stability_tolerance = 1e-6;
    double residual_bound = 1e-10;
    double energy_window = 40.0;
    double e_max = 10.0;
    double scaling_radius = 0.0;
    bool extrapolate = true;
    double L2 = 8.0;
    int n2 = 40;
    double corner_stability = 1e-4;
    double t0 = -15.0, t1 = 15.0;
    int line_n = 2000;
    std::string line_ends = "neumann";
};

struct TermSpec {
    std::string type = "gaussian";  // gaussian | bump
    double c = 1.0;
    int m = 1;
    double alpha = 1.0;
    double shift = 0.0;
    double a = 0.0, b = 1.0, w = 0.25;
};

struct TaskConfig {
    std::string command;
    cplx lambda{-1.0, 0.0};
    std::vector<cplx> path;
    std::vector<TermSpec> f, g;
    double a = 1.0, b = 2.0;
    double p = 2.0;
    std::vector<double> epsilons;
    std::vector<double> phi_plateau{0.0, 1.0, 0.25};  // a, b, w of the test function
    int phi_mode = 0;
    cplx rect_lo{0.0, -1.0}, rect_hi{10.0, 0.0};
    int sheet = -1;
    bool pole_search = false;
    int parametrix_n = 300;
    bool export_matrices = false;
    bool accumulation = false;
    double family_min = 1.0, family_max = 100.0, family_step = 1.0;
    double birth_tolerance = 0.1;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "svg"};
};

struct RunConfig {
    ModelConfig model;
    NumericsConfig numerics;
    TaskConfig task;
    OutputConfig output;
    std::filesystem::path base;  // directory of the config file, for relative paths
    nlohmann::json source;       // as given, after parsing

    std::vector<ScalingParameter> sweep() const;
    CrossSectionSpectrum cross_section() const;
    std::vector<ModeOperator> modes() const;
    Grid1D grid() const;
    ResonanceOptions resonance_options() const;
    CornerModel corner() const;
    CoreModel core() const;
};

// Parses and validates; unknown keys and bad values raise ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

// [re, im] or a plain number
cplx parse_complex(const nlohmann::json& j, const std::string& where);

// 64-bit FNV-1a of the bytes
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const RunConfig& cfg);

// Table with a '#' provenance block; numbers written with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void provenance(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    void write(std::ostream& os) const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double x);
std::string fmt(cplx z);

// provenance lines shared by every table of a run
void stamp(CsvTable& t, const RunConfig& cfg, const std::string& command);

// complex-plane scatter with rays drawn to the edge of the view
struct PlanePlot {
    std::string title;
    std::vector<cplx> points;
    std::vector<cplx> highlights;
    RaySet rays;

    void save(const std::filesystem::path& path) const;
};

// Header: "ENDSPEC\0", u64 rows, u64 cols, u32 dtype (1 f64, 2 c128), u32 reserved; row-major payload,
// little-endian.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXcd read_matrix(const std::filesystem::path& path);

} // namespace endspec
