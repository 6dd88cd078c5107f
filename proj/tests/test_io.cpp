#include "curvednbody/errors.hpp"
#include "curvednbody/io.hpp"
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cnb;
using namespace cnb::io;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "curvednbody_test_io";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> fields_of(const json& config) {
    try {
        (void)parse_config(config);
    } catch (const ValidationError& e) {
        return e.fields();
    }
    return {};
}

const json kSixBody = json::parse(R"({
  "family": {"kind": "six-body", "mass": 1, "alpha": 1, "beta": 1.4142135623730951},
  "integrator": {"method": "rk4-projected", "step": 0.001},
  "t_end": 1, "sampling": 0.1, "outputs": ["trajectory_csv"], "seed": 7
})");

}  // namespace

TEST_CASE("run configuration parsing") {
    const RunConfig c = parse_config(kSixBody);
    CHECK(c.family.kind == FamilyKind::ComplementarySixBody);
    CHECK(c.integrator.step == 1e-3);
    CHECK(c.seed == 7);
    CHECK(c.wants(Output::TrajectoryCsv));
    CHECK_FALSE(c.wants(Output::HopfCsv));

    SUBCASE("every bad field is reported at once") {
        json bad = kSixBody;
        bad["family"]["alpha"] = 0;
        bad["integrator"]["step"] = -1;
        bad["t_end"] = "ten";
        bad["outputs"] = {"trajectory_csv", "movie"};
        bad["bogus"] = 1;
        const auto f = fields_of(bad);
        for (const char* name : {"family.alpha", "integrator.step", "t_end", "outputs[1]", "bogus"}) {
            CAPTURE(name);
            CHECK(std::find(f.begin(), f.end(), name) != f.end());
        }
    }
    SUBCASE("unknown kind and keys foreign to the kind") {
        json bad = kSixBody;
        bad["family"] = {{"kind", "lagrangian"}, {"r", 0.5}, {"alpha", 1}};
        const auto f = fields_of(bad);
        CHECK(std::find(f.begin(), f.end(), "family.alpha") != f.end());
        CHECK_THROWS_AS(parse_kind("trefoil"), ValidationError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_config(scratch("does_not_exist.json")), IoError); }
}

TEST_CASE("config hash is canonical and stable") {
    const RunConfig c = parse_config(kSixBody);
    const std::string h = config_hash(to_json(c));
    CHECK(h.size() == 16);
    CHECK(h == config_hash(to_json(parse_config(to_json(c)))));
    json reordered = json::parse(R"({"seed": 7, "outputs": ["trajectory_csv"], "sampling": 0.1, "t_end": 1,
        "integrator": {"step": 0.001, "method": "rk4-projected"},
        "family": {"beta": 1.4142135623730951, "alpha": 1, "mass": 1, "kind": "six-body"}})");
    CHECK(config_hash(to_json(parse_config(reordered))) == h);
    json other = kSixBody;
    other["seed"] = 8;
    CHECK(config_hash(to_json(parse_config(other))) != h);
}

TEST_CASE("key=value parameters for verify") {
    const json j = parse_key_values("lagrangian", {"m=1", "r=0.5"});
    const FamilySpec s = parse_family(j, "");
    CHECK(s.kind == FamilyKind::LagrangianElliptic);
    CHECK(s.mass == 1.0);
    CHECK(s.r == 0.5);
    CHECK_THROWS_AS(parse_key_values("lagrangian", {"r"}), ValidationError);
    CHECK_THROWS_AS(parse_family(parse_key_values("lagrangian", {"r=abc"}), ""), ValidationError);
    CHECK(parse_family(parse_key_values("eulerian", {"η=1.5"}), "").eta == 1.5);
}

TEST_CASE("trajectory CSV round trip is bit exact") {
    const RunConfig config = parse_config(kSixBody);
    const OrbitFamily f = build_family(config.family);
    const FileHeader header = make_header(config, f);
    const TrajectoryRecord rec = integrate(f, 0.0, 1.0, config.integrator, 0.1);
    const fs::path path = scratch("round_trip.csv");
    write_trajectory_csv(path, header, rec);

    const TrajectoryFile back = read_trajectory_csv(path);
    CHECK(back.header.config_hash == header.config_hash);
    CHECK(back.header.seed == header.seed);
    CHECK(back.header.masses == header.masses);
    REQUIRE(back.states.size() == rec.states.size());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        CHECK(back.states[k].time() == rec.times[k]);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(back.states[k][i].position.coords() == rec.states[k][i].position.coords());
            CHECK(back.states[k][i].velocity == rec.states[k][i].velocity);
        }
    }
    CHECK(back.lines.front() == 7);

    SUBCASE("format_double round-trips random values") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1e3, 1e3);
        for (int k = 0; k < 1000; ++k) {
            const double v = u(rng) * std::pow(10.0, k % 30 - 15);
            CHECK(std::stod(format_double(v)) == v);
        }
    }
}

TEST_CASE("malformed trajectory files") {
    const fs::path empty = scratch("empty.csv");
    std::ofstream(empty).close();
    CHECK_THROWS_AS(read_trajectory_csv(empty), IoError);
    CHECK_THROWS_AS(read_trajectory_csv(scratch("missing.csv")), IoError);

    const fs::path broken = scratch("broken.csv");
    std::ofstream(broken) << "# tool: curved-nbody 0.1.0\n# config_hash: 0\n# seed: 1\n# sigma: 1\n# masses: 1\n"
                             "t,body_index,w,x,y,z,vw,vx,vy,vz\n0,0,1,0,0,zero,0,1,0,0\n";
    try {
        (void)read_trajectory_csv(broken);
        FAIL("malformed row accepted");
    } catch (const IoError& e) {
        REQUIRE(e.line());
        CHECK(*e.line() == 7);
    }
}

TEST_CASE("projection outputs") {
    const OrbitFamily f = complementary_six_body(1.0, 1.0, std::sqrt(2.0));
    RunConfig config = parse_config(kSixBody);
    const FileHeader header = make_header(config, f);
    const std::vector<SystemState> states{f.state(0.0), f.state(0.5)};

    const fs::path hopf_path = scratch("hopf.csv");
    write_projection_csv(hopf_path, header, states, Projection::Hopf, config.pole);
    std::istringstream in(slurp(hopf_path));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::vector<double> v;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 5);
        const double expected = v[1] < 3 ? 1.0 : -1.0;  // bodies 0-2 on C2, 3-5 on C1
        CHECK(std::abs(v[2] - expected) <= 1e-12);
        CHECK(std::abs(v[3]) <= 1e-12);
        CHECK(std::abs(v[4]) <= 1e-12);
        ++rows;
    }
    CHECK(rows == 12);

    const fs::path script = scratch("hopf.gp");
    write_gnuplot_script(script, hopf_path, 6, Projection::Hopf);
    CHECK(slurp(script).find("hopf.csv") != std::string::npos);

    SUBCASE("stereographic pole on a body is a projection singularity") {
        CHECK_THROWS_AS(write_projection_csv(scratch("stereo.csv"), header, states, Projection::Stereographic,
                                             Vec4(1, 0, 0, 0)),
                        ProjectionSingularity);
    }
}

TEST_CASE("errors map to exit codes") {
    CHECK(exit_code_for(ValidationError("x", "bad")) == kExitValidation);
    CHECK(exit_code_for(IoError("f", "gone")) == kExitIo);
    CHECK(exit_code_for(ProjectionSingularity("pole")) == kExitSingularity);
    CHECK(exit_code_for(SingularityError(SingularityKind::Collision, 0, 1, 0.0)) == kExitSingularity);
    const json e = error_json(ValidationError(std::vector<std::string>{"a", "b"}, "two bad"));
    CHECK(e["fields"] == json({"a", "b"}));
}
