#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "endspec/io.hpp"

using namespace endspec;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "endspec_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("defaults")
{
    auto c = parse_config(json::object());
    CHECK(c.numerics.L == 12.0);
    CHECK(c.numerics.n == 800);
    CHECK(c.numerics.theta == cplx(0.4, 0.3));
    CHECK(c.numerics.rays_tolerance == 0.02);
    CHECK(c.numerics.stability_tolerance == 1e-6);
    CHECK(c.sweep().size() == 5);
    CHECK(c.output.directory == "out");
    CHECK(c.cross_section().size() == 1);
}

TEST_CASE("unknown keys and bad values are rejected")
{
    CHECK_THROWS_AS(parse_config(json::parse(R"({"modle": {}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"numerics": {"nn": 3}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"numerics": {"n": "many"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"numerics": {"n": 10}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"numerics": {"theta": [0.1, 0.2]}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"geometry": "sphere"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"cross_section": {"kind": "circle"}}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"potentials": [{"mode": 0, "potential": {"type": "well", "depth": 1, "wdth": 1}}]}})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"output": {"formats": ["csv", "csv"]}})")), ConfigError);
    CHECK_THROWS_AS(load_config(scratch("missing.json")), ConfigError);
    {
        std::ofstream os(scratch("broken.json"));
        os << "{\"model\": ";
    }
    CHECK_THROWS_AS(load_config(scratch("broken.json")), ConfigError);
}

TEST_CASE("complex values")
{
    CHECK(parse_complex(json(0.5), "x") == cplx(0.5, 0.0));
    CHECK(parse_complex(json::parse("[0.4, 0.3]"), "x") == cplx(0.4, 0.3));
    CHECK_THROWS_AS(parse_complex(json::parse("[1, 2, 3]"), "x"), ConfigError);
    CHECK_THROWS_AS(parse_complex(json("i"), "x"), ConfigError);
    auto c = parse_config(json::parse(R"({"numerics": {"thetas": [[0.4, 0.3], 0.5]}})"));
    REQUIRE(c.sweep().size() == 2);
    CHECK(c.sweep()[1].theta() == cplx(0.5, 0.0));
}

TEST_CASE("models from configuration")
{
    auto c = parse_config(json::parse(R"({
        "model": {"cross_section": {"kind": "circle", "radius": 1},
                  "potentials": [{"mode": 0, "potential": {"type": "barrier", "height": 8, "a": 1, "b": 2}}]},
        "numerics": {"e_max": 5}})"));
    auto modes = c.modes();
    REQUIRE(modes.size() == 5);
    CHECK(modes[0].potential(1.5) == 8.0);
    CHECK(modes[1].potential.is_zero());
    CHECK(modes[3].mode_mu == 4.0);
}

TEST_CASE("hash")
{
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    auto a = parse_config(json::parse(R"({"numerics": {"n": 400, "L": 10}})"));
    auto b = parse_config(json::parse(R"({"numerics": {"L": 10, "n": 400}})"));
    auto c = parse_config(json::parse(R"({"numerics": {"L": 10, "n": 401}})"));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("csv tables are deterministic")
{
    auto make = [] {
        CsvTable t({"name", "value"});
        t.provenance("grid", "L=12 n=800");
        t.row({"plain", fmt(0.1)});
        t.row({"with, comma", fmt(cplx(1.0, -2.5))});
        t.row({"say \"hi\"", fmt(-0.0)});
        std::ostringstream os;
        t.write(os);
        return os.str();
    };
    std::string s = make();
    CHECK(s == make());
    CHECK(s ==
          "# grid: L=12 n=800\n"
          "name,value\n"
          "plain,0.10000000000000001\n"
          "\"with, comma\",1-2.5i\n"
          "\"say \"\"hi\"\"\",-0\n");
    CsvTable t({"a", "b"});
    CHECK_THROWS_AS(t.row({"1"}), DomainError);
}

TEST_CASE("17 significant digits round-trip")
{
    for (double x : {0.1, 1.0 / 3.0, -0.931426119417907, 6.02214076e23, 5e-324})
        CHECK(std::strtod(fmt(x).c_str(), nullptr) == x);
}

TEST_CASE("matrix files round-trip")
{
    Eigen::MatrixXcd m(3, 2);
    m << cplx(1, 2), cplx(3, -4), cplx(0.1, 0), cplx(-7, 1e-300), cplx(5, 5), cplx(0, -1);
    write_matrix(scratch("m.bin"), m);
    CHECK(read_matrix(scratch("m.bin")) == m);

    Eigen::MatrixXd r(2, 3);
    r << 1, 2, 3, 4, 5, 6;
    write_matrix(scratch("r.bin"), r);
    Eigen::MatrixXcd back = read_matrix(scratch("r.bin"));
    CHECK(back.real() == r);
    CHECK(back.imag().norm() == 0.0);

    // header layout
    std::ifstream in(scratch("r.bin"), std::ios::binary);
    char head[32];
    in.read(head, 32);
    CHECK(std::memcmp(head, "ENDSPEC\0", 8) == 0);
    std::uint64_t rows, cols;
    std::uint32_t dtype;
    std::memcpy(&rows, head + 8, 8);
    std::memcpy(&cols, head + 16, 8);
    std::memcpy(&dtype, head + 24, 4);
    CHECK(rows == 2);
    CHECK(cols == 3);
    CHECK(dtype == 1);
    CHECK(std::filesystem::file_size(scratch("r.bin")) == 32 + 6 * 8);

    {
        std::ofstream os(scratch("junk.bin"), std::ios::binary);
        os << "not a matrix at all, just some text";
    }
    CHECK_THROWS_AS(read_matrix(scratch("junk.bin")), Error);
}

TEST_CASE("plots are written")
{
    PlanePlot p;
    p.title = "test";
    p.points = {{1, -1}, {2, -0.5}};
    p.highlights = {{1.5, -0.2}};
    p.rays = essential_rays({{0.0, "mu=0"}}, default_theta());
    p.save(scratch("p.svg"));
    std::ifstream in(scratch("p.svg"));
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("<circle") != std::string::npos);
    CHECK(text.find("<line") != std::string::npos);
}

}
