// curved-nbody: simulate, verify and analyse relative equilibria of the
// curved N-body problem on S3 and H3.

#include "curvednbody/com_analysis.hpp"
#include "curvednbody/errors.hpp"
#include "curvednbody/io.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cnb;
using namespace cnb::io;

namespace {

struct CommonFlags {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::vector<double> pole;
};

RunConfig effective_config(const CommonFlags& f) {
    RunConfig c = load_config(f.config);
    if (f.seed) {
        c.seed = *f.seed;
        c.search.seed = *f.seed;
    }
    if (f.tolerance) {
        if (!(*f.tolerance > 0.0)) throw ValidationError("--tolerance", "tolerance must be positive");
        c.search.classify.tolerance = *f.tolerance;
    }
    if (!f.pole.empty()) {
        const Vec4 p(f.pole[0], f.pole[1], f.pole[2], f.pole[3]);
        if (!(p.norm() > 0.0)) throw ValidationError("--pole", "pole must be nonzero");
        c.pole = p.normalized();
    }
    return c;
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
    return fs::path(dir);
}

void write_projection(const fs::path& dir, Output which, const FileHeader& header,
                      const std::vector<SystemState>& states, const Vec4& pole, std::vector<std::string>& written,
                      std::span<const std::size_t> lines = {}) {
    const Projection mode = which == Output::HopfCsv ? Projection::Hopf : Projection::Stereographic;
    const fs::path data = dir / file_name(which);
    fs::path script = data;
    script.replace_extension(".gp");
    write_projection_csv(data, header, states, mode, pole, lines);
    write_gnuplot_script(script, data, header.masses.size(), mode);
    written.push_back(data.string());
    written.push_back(script.string());
}

int cmd_simulate(const CommonFlags& flags) {
    const RunConfig config = effective_config(flags);
    const OrbitFamily family = build_family(config.family);
    const FileHeader header = make_header(config, family);
    const fs::path dir = prepare_dir(flags.out_dir);
    std::vector<std::string> written;

    TrajectoryRecord record;
    try {
        record = integrate(family, 0.0, config.t_end, config.integrator, config.sampling);
    } catch (const IntegrationFailure& e) {
        if (config.wants(Output::TrajectoryCsv) && !e.partial().states.empty())
            write_trajectory_csv(dir / "trajectory.partial.csv", header, e.partial());
        throw;
    }

    if (config.wants(Output::TrajectoryCsv)) {
        write_trajectory_csv(dir / file_name(Output::TrajectoryCsv), header, record);
        written.push_back((dir / file_name(Output::TrajectoryCsv)).string());
    }
    json conservation = conservation_report(header, record);
    if (config.wants(Output::ConservationJson)) {
        write_json(dir / file_name(Output::ConservationJson), conservation);
        written.push_back((dir / file_name(Output::ConservationJson)).string());
    }
    for (Output o : {Output::HopfCsv, Output::StereographicCsv})
        if (config.wants(o)) write_projection(dir, o, header, record.states, config.pole, written);
    if (config.wants(Output::ComReportJson)) {
        write_json(dir / file_name(Output::ComReportJson), com_report(header, search_com(family, config.search)));
        written.push_back((dir / file_name(Output::ComReportJson)).string());
    }

    json summary{{"command", "simulate"},
                 {"family", std::string(to_string(family.kind()))},
                 {"config_hash", header.config_hash},
                 {"seed", header.seed},
                 {"samples", record.times.size()},
                 {"max_energy_drift", conservation["max_energy_drift"]},
                 {"max_angular_momentum_drift", conservation["max_angular_momentum_drift"]},
                 {"written", written}};
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& kind, const std::vector<std::string>& tokens, double tolerance) {
    const FamilySpec spec = parse_family(parse_key_values(kind, tokens), "");
    json out{{"command", "verify"}, {"family", to_json(spec)}, {"tolerance", tolerance}};
    try {
        const OrbitFamily family = build_family(spec, "");
        const auto times = check_times(family);
        const double worst = std::max(family.validation_residual(), max_residual(family, times));
        const ConservedQuantities c = conserved_quantities(family.state(0.0));

        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, LagrangianParams>) {
                    out["omega"] = p.omega;
                    out["y"] = p.y;
                } else if constexpr (std::is_same_v<P, EulerianParams>) {
                    out["beta"] = p.beta;
                    out["x"] = p.x;
                } else {
                    out["alpha"] = p.alpha;
                    out["beta"] = p.beta;
                }
            },
            family.params());
        if (family.mass_scaling()) out["beta_squared_form"] = std::string(to_string(*family.mass_scaling()));
        out["max_residual"] = worst;
        out["energy"] = c.energy;
        out["angular_momentum"] = c.angular_momentum;
        out["angular_momentum_order"] = {"wx", "wy", "wz", "xy", "xz", "yz"};
        out["passed"] = worst <= tolerance;
        std::cout << out.dump(2) << "\n";
        return worst <= tolerance ? kExitOk : kExitCheckFailed;
    } catch (const FamilyValidationError& e) {
        out["max_residual"] = std::isfinite(e.max_residual()) ? json(e.max_residual()) : json("inf");
        out["passed"] = false;
        out["message"] = e.what();
        std::cout << out.dump(2) << "\n";
        return kExitCheckFailed;
    }
}

int cmd_search_com(const CommonFlags& flags) {
    const RunConfig config = effective_config(flags);
    const OrbitFamily family = build_family(config.family);
    if (family.sigma() != Sigma::Sphere)
        throw ValidationError("family.kind", "the centre-of-mass search needs an S3 family");
    const FileHeader header = make_header(config, family);
    const fs::path dir = prepare_dir(flags.out_dir);

    const SearchReport report = search_com(family, config.search);
    const fs::path path = dir / file_name(Output::ComReportJson);
    write_json(path, com_report(header, report));

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    json summary{{"command", "search-com"},
                 {"family", report.family},
                 {"config_hash", header.config_hash},
                 {"seed", config.search.seed},
                 {"fixed", report.fixed},
                 {"uniform_geodesic", report.uniform_geodesic},
                 {"neither", report.neither},
                 {"survivors", report.survivors.size()},
                 {"resonance", report.resonance.triggered},
                 {"report", path.string()}};
    std::cout << summary.dump(2) << "\n";

    const bool certificate_family = family.kind() == FamilyKind::ComplementarySixBody ||
                                    family.kind() == FamilyKind::ComplementaryPolygonPair;
    return certificate_family && !report.survivors.empty() ? kExitCheckFailed : kExitOk;
}

int cmd_project(const std::string& trajectory, const std::string& mode, const CommonFlags& flags) {
    const TrajectoryFile file = read_trajectory_csv(trajectory);
    const fs::path dir = prepare_dir(flags.out_dir);
    Vec4 pole = Vec4::Constant(0.5);
    if (!flags.pole.empty()) {
        pole = Vec4(flags.pole[0], flags.pole[1], flags.pole[2], flags.pole[3]);
        if (!(pole.norm() > 0.0)) throw ValidationError("--pole", "pole must be nonzero");
        pole.normalize();
    }
    std::vector<std::string> written;
    const Output which = mode == "hopf" ? Output::HopfCsv : Output::StereographicCsv;
    write_projection(dir, which, file.header, file.states, pole, written, file.lines);
    json summary{{"command", "project"}, {"mode", mode}, {"samples", file.states.size()}, {"written", written}};
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relative equilibria of the curved N-body problem on S3 and H3"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    CommonFlags flags;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
        if (config_required) opt->required();
        sub->add_option("--out-dir", flags.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", flags.seed, "override the configured seed");
        sub->add_option("--tolerance", flags.tolerance, "override the search tolerance");
        sub->add_option("--pole", flags.pole, "stereographic pole w x y z")->expected(4);
    };

    auto* simulate = app.add_subcommand("simulate", "integrate a family and write the requested outputs");
    add_common(simulate, true);

    std::string kind;
    std::vector<std::string> kv;
    double verify_tolerance = kFamilyResidualTolerance;
    auto* verify = app.add_subcommand("verify", "check a closed-form family by substitution");
    verify->add_option("kind", kind, "lagrangian | eulerian | six-body | polygon-pair")->required();
    verify->add_option("params", kv, "key=value parameters, e.g. m=1 r=0.5");
    verify->add_option("--tolerance", verify_tolerance, "largest accepted residual")->capture_default_str();

    auto* search = app.add_subcommand("search-com", "search S3 for centre-of-mass-like points");
    add_common(search, true);

    std::string trajectory, mode = "hopf";
    auto* project = app.add_subcommand("project", "project a trajectory CSV to three dimensions");
    project->add_option("trajectory", trajectory, "trajectory CSV written by simulate")->required();
    project->add_option("--mode", mode, "hopf | stereographic")
        ->check(CLI::IsMember({"hopf", "stereographic"}))
        ->capture_default_str();
    project->add_option("--out-dir", flags.out_dir, "output directory")->capture_default_str();
    project->add_option("--pole", flags.pole, "stereographic pole w x y z")->expected(4);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*verify) return cmd_verify(kind, kv, verify_tolerance);
        if (*search) return cmd_search_com(flags);
        if (*project) return cmd_project(trajectory, mode, flags);
    } catch (const std::exception& e) {
        std::cerr << error_json(e).dump() << "\n";
        return exit_code_for(e);
    }
    return kExitValidation;
}
