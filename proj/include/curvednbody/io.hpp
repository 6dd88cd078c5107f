#pragma once

#include "curvednbody/com_analysis.hpp"
#include "curvednbody/families.hpp"
#include "curvednbody/integrators.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cnb::io {

inline constexpr std::string_view kToolName = "curved-nbody";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,  // verify residual too large, or search-com found survivors
    kExitValidation = 2,
    kExitSingularity = 3,
    kExitIo = 4,
};

/// A family by kind plus the parameters a user may give. Frequencies are
/// normally derived by the constructor; an explicit omega (Lagrangian) or beta
/// (Eulerian) bypasses that and is validated as given.
struct FamilySpec {
    FamilyKind kind = FamilyKind::ComplementarySixBody;
    double mass = 1.0;
    int sign = 1;
    double r = 0.5;
    std::optional<double> y;  // default √(1 − r²)
    double z = 0.0;
    std::optional<double> omega;
    double eta = 2.0;
    std::optional<double> alpha;
    std::optional<double> beta;
    int n = 3;
    int m = 3;
    double phase_n = 0.0;
    double phase_m = 0.0;
};

FamilyKind parse_kind(std::string_view name);

/// Reads a family object such as {"kind": "six-body", "alpha": 1, "beta": 1.41}.
/// "m", "α", "β", "ω" and "η" are accepted as aliases. Keys are case-sensitive:
/// "M" is the size of the second polygon, "m" the mass. Every malformed or
/// unknown field is reported at once.
FamilySpec parse_family(const nlohmann::json& j, const std::string& prefix = "family.");
nlohmann::json to_json(const FamilySpec& spec);

/// Builds and validates the family. ValidationError field names carry `prefix`.
OrbitFamily build_family(const FamilySpec& spec, const std::string& prefix = "family.");

/// "key=value" tokens to a family object, numbers parsed as such.
nlohmann::json parse_key_values(std::string_view kind, const std::vector<std::string>& tokens);

enum class Output { TrajectoryCsv, ConservationJson, HopfCsv, StereographicCsv, ComReportJson };

std::string_view to_string(Output o) noexcept;
std::string_view file_name(Output o) noexcept;

struct RunConfig {
    FamilySpec family;
    IntegratorConfig integrator;
    double t_end = 10.0;
    double sampling = 0.1;
    std::vector<Output> outputs{Output::TrajectoryCsv, Output::ConservationJson};
    std::uint64_t seed = 20240917;
    SearchOptions search;
    Vec4 pole = Vec4::Constant(0.5);

    bool wants(Output o) const;
};

/// Parses and checks a whole configuration, reporting every offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// The effective configuration with every default filled in.
nlohmann::json to_json(const RunConfig& config);

/// FNV-1a 64-bit of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);

struct FileHeader {
    std::string tool = std::string(kToolName) + " " + std::string(kToolVersion);
    std::string config_hash;
    std::uint64_t seed = 0;
    Sigma sigma = Sigma::Sphere;
    std::vector<double> masses;
};

FileHeader make_header(const RunConfig& config, const OrbitFamily& family);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double v);

void write_trajectory_csv(const std::filesystem::path& path, const FileHeader& header,
                          const TrajectoryRecord& record);

struct TrajectoryFile {
    FileHeader header;
    std::vector<SystemState> states;
    std::vector<std::size_t> lines;  // 1-based line of each state's body-0 row
};

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);

nlohmann::json conservation_report(const FileHeader& header, const TrajectoryRecord& record);

enum class Projection { Hopf, Stereographic };

/// One row per body per sample: t, body_index, X, Y, Z. Stereographic
/// collisions with the pole are collected and thrown together as a
/// ProjectionSingularity listing the offending rows: lines of the source file
/// when source_lines (line of body 0 per state) is given, data rows otherwise.
void write_projection_csv(const std::filesystem::path& path, const FileHeader& header,
                          const std::vector<SystemState>& states, Projection mode, const Vec4& pole,
                          std::span<const std::size_t> source_lines = {});
void write_gnuplot_script(const std::filesystem::path& script, const std::filesystem::path& data,
                          std::size_t bodies, Projection mode);

nlohmann::json com_report(const FileHeader& header, const SearchReport& report);

/// Machine-readable error object written to stderr by the tool.
nlohmann::json error_json(const std::exception& e);
int exit_code_for(const std::exception& e);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace cnb::io
