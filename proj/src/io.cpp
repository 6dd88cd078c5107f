#include "curvednbody/io.hpp"

#include "curvednbody/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cnb::io {

namespace {

using nlohmann::json;

// Accumulates offending fields and their reasons.
class Problems {
public:
    void add(const std::string& field, const std::string& reason) {
        fields_.push_back(field);
        reasons_.push_back(field + ": " + reason);
    }
    void merge(const ValidationError& e, const std::string& prefix) {
        for (const auto& f : e.fields()) fields_.push_back(prefix + f);
        reasons_.emplace_back(e.reason());
    }
    bool empty() const { return fields_.empty(); }
    void raise(const std::string& what) const {
        if (fields_.empty()) return;
        std::string msg = what;
        for (const auto& r : reasons_) msg += "\n  " + r;
        throw ValidationError(fields_, msg);
    }

private:
    std::vector<std::string> fields_;
    std::vector<std::string> reasons_;
};

const std::map<std::string, std::string>& aliases() {
    static const std::map<std::string, std::string> table{
        {"m", "mass"}, {"α", "alpha"}, {"β", "beta"}, {"ω", "omega"}, {"η", "eta"}};
    return table;
}

std::set<std::string> allowed_keys(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::LagrangianElliptic: return {"kind", "mass", "r", "y", "z", "omega", "sign"};
        case FamilyKind::EulerianHyperbolic: return {"kind", "mass", "eta", "beta", "sign"};
        case FamilyKind::ComplementarySixBody: return {"kind", "mass", "alpha", "beta"};
        case FamilyKind::ComplementaryPolygonPair:
            return {"kind", "mass", "N", "M", "alpha", "beta", "phase_n", "phase_m"};
        case FamilyKind::UnequalMassPolygonPair: return {"kind"};
    }
    return {"kind"};
}

bool read_number(const json& j, double& out) {
    if (!j.is_number()) return false;
    out = j.get<double>();
    return std::isfinite(out);
}

bool read_integer(const json& j, long long& out) {
    if (j.is_number_integer()) {
        out = j.get<long long>();
        return true;
    }
    if (j.is_number_float()) {
        const double d = j.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
            out = static_cast<long long>(d);
            return true;
        }
    }
    return false;
}

std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError(path.string(), "write failed");
}

void write_header(std::ostream& out, const FileHeader& h) {
    out << "# tool: " << h.tool << "\n";
    out << "# config_hash: " << h.config_hash << "\n";
    out << "# seed: " << h.seed << "\n";
    out << "# sigma: " << static_cast<int>(h.sigma) << "\n";
    out << "# masses: ";
    for (std::size_t i = 0; i < h.masses.size(); ++i) out << (i ? "," : "") << format_double(h.masses[i]);
    out << "\n";
}

json header_json(const FileHeader& h) {
    return json{{"tool", h.tool},
                {"config_hash", h.config_hash},
                {"seed", h.seed},
                {"sigma", static_cast<int>(h.sigma)},
                {"masses", h.masses}};
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

const char* kTrajectoryColumns = "t,body_index,w,x,y,z,vw,vx,vy,vz";

json vec_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json search_options_json(const SearchOptions& o) {
    return json{{"samples", o.samples},
                {"window", o.classify.window},
                {"tolerance", o.classify.tolerance},
                {"classify_samples", o.classify.samples},
                {"probes_per_circle", o.probes_per_circle},
                {"field_test", o.field_test},
                {"field_tolerance", o.field_tolerance}};
}

}  // namespace

FamilyKind parse_kind(std::string_view name) {
    for (FamilyKind k : {FamilyKind::LagrangianElliptic, FamilyKind::EulerianHyperbolic,
                         FamilyKind::ComplementarySixBody, FamilyKind::ComplementaryPolygonPair})
        if (name == to_string(k)) return k;
    throw ValidationError("kind", "unknown family kind '" + std::string(name) +
                                      "' (expected lagrangian, eulerian, six-body or polygon-pair)");
}

FamilySpec parse_family(const json& j, const std::string& prefix) {
    if (!j.is_object()) throw ValidationError(prefix.empty() ? "family" : prefix.substr(0, prefix.size() - 1),
                                              "family must be an object");
    Problems problems;
    FamilySpec spec;
    if (!j.contains("kind") || !j["kind"].is_string()) {
        problems.add(prefix + "kind", "missing or not a string");
        problems.raise("invalid family");
    }
    try {
        spec.kind = parse_kind(j["kind"].get<std::string>());
    } catch (const ValidationError& e) {
        problems.merge(e, prefix);
        problems.raise("invalid family");
    }

    const auto allowed = allowed_keys(spec.kind);
    for (const auto& [raw, value] : j.items()) {
        const auto alias = aliases().find(raw);
        const std::string key = alias == aliases().end() ? raw : alias->second;
        const std::string field = prefix + key;
        if (!allowed.count(key)) {
            problems.add(prefix + raw, "unknown field for a " + std::string(to_string(spec.kind)) + " family");
            continue;
        }
        if (key == "kind") continue;
        if (key == "N" || key == "M" || key == "sign") {
            long long v = 0;
            if (!read_integer(value, v) || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
                problems.add(field, "must be an integer");
                continue;
            }
            (key == "N" ? spec.n : key == "M" ? spec.m : spec.sign) = static_cast<int>(v);
            continue;
        }
        double v = 0.0;
        if (!read_number(value, v)) {
            problems.add(field, "must be a finite number");
            continue;
        }
        if (key == "mass") spec.mass = v;
        else if (key == "r") spec.r = v;
        else if (key == "y") spec.y = v;
        else if (key == "z") spec.z = v;
        else if (key == "omega") spec.omega = v;
        else if (key == "eta") spec.eta = v;
        else if (key == "alpha") spec.alpha = v;
        else if (key == "beta") spec.beta = v;
        else if (key == "phase_n") spec.phase_n = v;
        else if (key == "phase_m") spec.phase_m = v;
    }
    problems.raise("invalid family");
    return spec;
}

json to_json(const FamilySpec& s) {
    json j{{"kind", std::string(to_string(s.kind))}, {"mass", s.mass}};
    switch (s.kind) {
        case FamilyKind::LagrangianElliptic:
            j["r"] = s.r;
            j["z"] = s.z;
            j["sign"] = s.sign;
            if (s.y) j["y"] = *s.y;
            if (s.omega) j["omega"] = *s.omega;
            break;
        case FamilyKind::EulerianHyperbolic:
            j["eta"] = s.eta;
            j["sign"] = s.sign;
            if (s.beta) j["beta"] = *s.beta;
            break;
        case FamilyKind::ComplementaryPolygonPair:
            j["N"] = s.n;
            j["M"] = s.m;
            j["phase_n"] = s.phase_n;
            j["phase_m"] = s.phase_m;
            [[fallthrough]];
        case FamilyKind::ComplementarySixBody:
            j["alpha"] = s.alpha.value_or(1.0);
            j["beta"] = s.beta.value_or(std::sqrt(2.0));
            break;
        case FamilyKind::UnequalMassPolygonPair: break;
    }
    return j;
}

OrbitFamily build_family(const FamilySpec& s, const std::string& prefix) {
    try {
        switch (s.kind) {
            case FamilyKind::LagrangianElliptic: {
                const double y = s.y.value_or(s.r > 0.0 && s.r < 1.0 ? std::sqrt(1.0 - s.r * s.r - s.z * s.z) : 0.0);
                if (s.omega) return validate_family(s.kind, LagrangianParams{s.mass, s.r, y, s.z, *s.omega});
                return lagrangian_elliptic(s.mass, s.r, y, s.z, s.sign);
            }
            case FamilyKind::EulerianHyperbolic:
                if (s.beta) {
                    const double x = s.eta > 1.0 ? std::sqrt(s.eta * s.eta - 1.0) : 0.0;
                    return validate_family(s.kind, EulerianParams{s.mass, s.eta, x, *s.beta});
                }
                return eulerian_hyperbolic(s.mass, s.eta, s.sign);
            case FamilyKind::ComplementarySixBody:
                if (s.n != 3 || s.m != 3) throw ValidationError("N", "the six-body family has three bodies per circle");
                return complementary_six_body(s.mass, s.alpha.value_or(1.0), s.beta.value_or(std::sqrt(2.0)));
            case FamilyKind::ComplementaryPolygonPair:
                return complementary_polygon_pair(PolygonPairParams{s.n, s.m, s.mass, s.alpha.value_or(1.0),
                                                                    s.beta.value_or(std::sqrt(2.0)), s.phase_n,
                                                                    s.phase_m});
            case FamilyKind::UnequalMassPolygonPair: break;
        }
        throw ValidationError("kind", "unequal-mass polygon pairs are not implemented");
    } catch (const ValidationError& e) {
        std::vector<std::string> fields;
        for (const auto& f : e.fields()) fields.push_back(prefix + f);
        throw ValidationError(fields, e.reason());
    }
}

json parse_key_values(std::string_view kind, const std::vector<std::string>& tokens) {
    json j{{"kind", std::string(kind)}};
    std::vector<std::string> bad;
    for (const auto& token : tokens) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
            bad.push_back(token);
            continue;
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (const auto v = parse_double(value)) j[key] = *v;
        else j[key] = value;
    }
    if (!bad.empty()) throw ValidationError(bad, "expected key=value");
    return j;
}

std::string_view to_string(Output o) noexcept {
    switch (o) {
        case Output::TrajectoryCsv: return "trajectory_csv";
        case Output::ConservationJson: return "conservation_json";
        case Output::HopfCsv: return "hopf_csv";
        case Output::StereographicCsv: return "stereographic_csv";
        case Output::ComReportJson: return "com_report_json";
    }
    return "unknown";
}

std::string_view file_name(Output o) noexcept {
    switch (o) {
        case Output::TrajectoryCsv: return "trajectory.csv";
        case Output::ConservationJson: return "conservation.json";
        case Output::HopfCsv: return "hopf.csv";
        case Output::StereographicCsv: return "stereographic.csv";
        case Output::ComReportJson: return "com_report.json";
    }
    return "unknown";
}

bool RunConfig::wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ValidationError("config", "configuration must be a JSON object");
    Problems problems;
    RunConfig c;

    static const std::set<std::string> top{"family", "integrator", "t_end", "sampling", "outputs",
                                           "seed",   "search",     "pole"};
    for (const auto& [key, value] : j.items())
        if (!top.count(key)) problems.add(key, "unknown field");

    auto number = [&](const json& obj, const std::string& key, const std::string& field, double& out) {
        if (!obj.contains(key)) return;
        if (!read_number(obj[key], out)) problems.add(field, "must be a finite number");
    };
    auto count = [&](const json& obj, const std::string& key, const std::string& field, std::size_t& out) {
        if (!obj.contains(key)) return;
        long long v = 0;
        if (!read_integer(obj[key], v) || v < 0) problems.add(field, "must be a non-negative integer");
        else out = static_cast<std::size_t>(v);
    };

    bool family_ok = false;
    if (!j.contains("family")) {
        problems.add("family", "required");
    } else {
        try {
            c.family = parse_family(j["family"]);
            family_ok = true;
        } catch (const ValidationError& e) {
            problems.merge(e, "");
        }
    }

    if (j.contains("integrator")) {
        const json& in = j["integrator"];
        if (!in.is_object()) {
            problems.add("integrator", "must be an object");
        } else {
            static const std::set<std::string> keys{"method", "step", "projection_tolerance", "max_constraint_drift",
                                                    "arithmetic"};
            for (const auto& [key, value] : in.items())
                if (!keys.count(key)) problems.add("integrator." + key, "unknown field");
            if (in.contains("method")) {
                const std::string m = in["method"].is_string() ? in["method"].get<std::string>() : "";
                if (m == to_string(Method::RK4Projected)) c.integrator.method = Method::RK4Projected;
                else if (m == to_string(Method::SymmetricProjected)) c.integrator.method = Method::SymmetricProjected;
                else problems.add("integrator.method", "expected rk4-projected or symmetric-projected");
            }
            if (in.contains("arithmetic")) {
                const std::string a = in["arithmetic"].is_string() ? in["arithmetic"].get<std::string>() : "";
                if (a == to_string(Arithmetic::Binary64)) c.integrator.arithmetic = Arithmetic::Binary64;
                else if (a == to_string(Arithmetic::Binary128)) c.integrator.arithmetic = Arithmetic::Binary128;
                else problems.add("integrator.arithmetic", "expected binary64 or binary128");
            }
            number(in, "step", "integrator.step", c.integrator.step);
            number(in, "projection_tolerance", "integrator.projection_tolerance", c.integrator.projection_tolerance);
            number(in, "max_constraint_drift", "integrator.max_constraint_drift", c.integrator.max_constraint_drift);
            try {
                c.integrator.validate();
            } catch (const ValidationError& e) {
                problems.merge(e, "integrator.");
            }
        }
    }

    number(j, "t_end", "t_end", c.t_end);
    if (!(c.t_end > 0.0)) problems.add("t_end", "must be positive");
    number(j, "sampling", "sampling", c.sampling);
    if (!(c.sampling > 0.0)) problems.add("sampling", "must be positive");

    if (j.contains("seed")) {
        const json& seed = j["seed"];
        if (seed.is_number_unsigned()) c.seed = seed.get<std::uint64_t>();
        else if (seed.is_number_integer() && seed.get<long long>() >= 0) c.seed = seed.get<long long>();
        else problems.add("seed", "must be a non-negative integer");
    }
    c.search.seed = c.seed;

    if (j.contains("outputs")) {
        const json& out = j["outputs"];
        if (!out.is_array()) {
            problems.add("outputs", "must be an array of output names");
        } else {
            c.outputs.clear();
            for (std::size_t k = 0; k < out.size(); ++k) {
                bool matched = false;
                for (Output o : {Output::TrajectoryCsv, Output::ConservationJson, Output::HopfCsv,
                                 Output::StereographicCsv, Output::ComReportJson}) {
                    if (out[k].is_string() && out[k].get<std::string>() == to_string(o)) {
                        if (!c.wants(o)) c.outputs.push_back(o);
                        matched = true;
                    }
                }
                if (!matched) problems.add("outputs[" + std::to_string(k) + "]", "unknown output");
            }
        }
    }

    if (j.contains("search")) {
        const json& s = j["search"];
        if (!s.is_object()) {
            problems.add("search", "must be an object");
        } else {
            static const std::set<std::string> keys{"samples", "window", "tolerance", "classify_samples",
                                                    "probes_per_circle", "field_test", "field_tolerance"};
            for (const auto& [key, value] : s.items())
                if (!keys.count(key)) problems.add("search." + key, "unknown field");
            count(s, "samples", "search.samples", c.search.samples);
            count(s, "classify_samples", "search.classify_samples", c.search.classify.samples);
            count(s, "probes_per_circle", "search.probes_per_circle", c.search.probes_per_circle);
            number(s, "window", "search.window", c.search.classify.window);
            number(s, "tolerance", "search.tolerance", c.search.classify.tolerance);
            number(s, "field_tolerance", "search.field_tolerance", c.search.field_tolerance);
            if (s.contains("field_test")) {
                if (!s["field_test"].is_boolean()) problems.add("search.field_test", "must be a boolean");
                else c.search.field_test = s["field_test"].get<bool>();
            }
            if (!(c.search.classify.window > 0.0)) problems.add("search.window", "must be positive");
            if (!(c.search.classify.tolerance > 0.0)) problems.add("search.tolerance", "must be positive");
            if (c.search.classify.samples < 3) problems.add("search.classify_samples", "must be at least 3");
        }
    }

    if (j.contains("pole")) {
        const json& p = j["pole"];
        bool ok = p.is_array() && p.size() == 4;
        for (std::size_t k = 0; ok && k < 4; ++k) ok = read_number(p[k], c.pole[static_cast<int>(k)]);
        if (!ok || !(c.pole.norm() > 0.0)) problems.add("pole", "must be four finite numbers, not all zero");
        else c.pole.normalize();
    }

    if (family_ok) {
        const bool on_sphere = c.family.kind != FamilyKind::EulerianHyperbolic;
        if (!on_sphere && c.wants(Output::HopfCsv)) problems.add("outputs", "hopf_csv needs an S3 family");
        if (!on_sphere && c.wants(Output::StereographicCsv))
            problems.add("outputs", "stereographic_csv needs an S3 family");
        if (!on_sphere && c.wants(Output::ComReportJson))
            problems.add("outputs", "com_report_json needs an S3 family");
        try {
            (void)build_family(c.family);
        } catch (const ValidationError& e) {
            problems.merge(e, "");
        }
    }

    problems.raise("invalid configuration");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open configuration");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config", path.string() + ": malformed JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json outputs = json::array();
    for (Output o : c.outputs) outputs.push_back(std::string(to_string(o)));
    return json{{"family", to_json(c.family)},
                {"integrator",
                 {{"method", std::string(to_string(c.integrator.method))},
                  {"arithmetic", std::string(to_string(c.integrator.arithmetic))},
                  {"step", c.integrator.step},
                  {"projection_tolerance", c.integrator.projection_tolerance},
                  {"max_constraint_drift", c.integrator.max_constraint_drift}}},
                {"t_end", c.t_end},
                {"sampling", c.sampling},
                {"outputs", outputs},
                {"seed", c.seed},
                {"search", search_options_json(c.search)},
                {"pole", vec_json(c.pole)}};
}

std::string config_hash(const json& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

FileHeader make_header(const RunConfig& config, const OrbitFamily& family) {
    FileHeader h;
    h.config_hash = config_hash(to_json(config));
    h.seed = config.seed;
    h.sigma = family.sigma();
    h.masses.assign(family.body_count(), family.mass());
    return h;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

void write_trajectory_csv(const std::filesystem::path& path, const FileHeader& header,
                          const TrajectoryRecord& record) {
    auto out = open_for_writing(path);
    write_header(out, header);
    out << kTrajectoryColumns << "\n";
    for (const SystemState& s : record.states) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const Vec4& q = s[i].position.coords();
            const Vec4& v = s[i].velocity;
            out << format_double(s.time()) << "," << i;
            for (int k = 0; k < 4; ++k) out << "," << format_double(q[k]);
            for (int k = 0; k < 4; ++k) out << "," << format_double(v[k]);
            out << "\n";
        }
    }
    finish(out, path);
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open trajectory");
    const std::string name = path.string();

    TrajectoryFile file;
    bool have_sigma = false, have_masses = false, have_columns = false;
    std::string line;
    std::size_t line_no = 0;

    std::vector<Body> pending;
    double pending_time = 0.0;
    std::size_t pending_line = 0;

    auto flush = [&]() {
        try {
            file.states.emplace_back(file.header.sigma, std::move(pending), pending_time);
        } catch (const Error& e) {
            throw IoError(name, std::string("invalid state: ") + e.what(), pending_line);
        }
        file.lines.push_back(pending_line);
        pending.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const auto colon = text.find(':');
            if (colon == std::string_view::npos) continue;
            const auto key = trim(text.substr(1, colon - 1));
            const auto value = trim(text.substr(colon + 1));
            if (key == "tool") file.header.tool = std::string(value);
            else if (key == "config_hash") file.header.config_hash = std::string(value);
            else if (key == "seed") {
                const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), file.header.seed);
                if (ec != std::errc() || p != value.data() + value.size()) throw IoError(name, "bad seed", line_no);
            } else if (key == "sigma") {
                if (value == "1") file.header.sigma = Sigma::Sphere;
                else if (value == "-1") file.header.sigma = Sigma::Hyperbolic;
                else throw IoError(name, "sigma must be 1 or -1", line_no);
                have_sigma = true;
            } else if (key == "masses") {
                for (auto part : split(value, ',')) {
                    const auto m = parse_double(trim(part));
                    if (!m) throw IoError(name, "bad mass '" + std::string(part) + "'", line_no);
                    file.header.masses.push_back(*m);
                }
                have_masses = true;
            }
            continue;
        }
        if (!have_columns) {
            if (text != kTrajectoryColumns)
                throw IoError(name, std::string("expected column header '") + kTrajectoryColumns + "'", line_no);
            if (!have_sigma || !have_masses) throw IoError(name, "header block lacks sigma or masses", line_no);
            have_columns = true;
            continue;
        }
        const auto cells = split(text, ',');
        if (cells.size() != 10) throw IoError(name, "expected 10 columns", line_no);
        double values[10];
        for (std::size_t k = 0; k < 10; ++k) {
            const auto v = parse_double(trim(cells[k]));
            if (!v) throw IoError(name, "bad number '" + std::string(cells[k]) + "'", line_no);
            values[k] = *v;
        }
        const auto n = file.header.masses.size();
        const double index = values[1];
        if (index != static_cast<double>(pending.size()) || pending.size() >= n)
            throw IoError(name, "body_index out of sequence", line_no);
        if (pending.empty()) {
            pending_time = values[0];
            pending_line = line_no;
        } else if (values[0] != pending_time) {
            throw IoError(name, "time changes within a sample", line_no);
        }
        try {
            pending.push_back(Body{file.header.masses[pending.size()],
                                   ManifoldPoint(Vec4(values[2], values[3], values[4], values[5]), file.header.sigma),
                                   Vec4(values[6], values[7], values[8], values[9])});
        } catch (const Error& e) {
            throw IoError(name, e.what(), line_no);
        }
        if (pending.size() == n) flush();
    }
    if (!pending.empty()) throw IoError(name, "file ends in the middle of a sample", line_no);
    if (!have_columns || file.states.empty()) throw IoError(name, "no trajectory samples");
    return file;
}

json conservation_report(const FileHeader& header, const TrajectoryRecord& record) {
    json j = header_json(header);
    json times = json::array(), energy = json::array(), momentum = json::array(), drift = json::array();
    double max_energy = 0.0, max_drift = 0.0;
    std::array<double, 6> max_c{};
    const auto& first = record.conserved.front();
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const auto& cq = record.conserved[k];
        times.push_back(record.times[k]);
        energy.push_back(cq.energy);
        momentum.push_back(cq.angular_momentum);
        drift.push_back(record.constraint_drift[k]);
        max_energy = std::max(max_energy, std::abs(cq.energy - first.energy));
        for (int c = 0; c < 6; ++c)
            max_c[c] = std::max(max_c[c], std::abs(cq.angular_momentum[c] - first.angular_momentum[c]));
        max_drift = std::max(max_drift, record.constraint_drift[k]);
    }
    j["angular_momentum_order"] = {"wx", "wy", "wz", "xy", "xz", "yz"};
    j["times"] = times;
    j["energy"] = energy;
    j["angular_momentum"] = momentum;
    j["constraint_drift"] = drift;
    j["max_energy_drift"] = max_energy;
    j["max_angular_momentum_drift"] = max_c;
    j["max_constraint_drift"] = max_drift;
    return j;
}

void write_projection_csv(const std::filesystem::path& path, const FileHeader& header,
                          const std::vector<SystemState>& states, Projection mode, const Vec4& pole,
                          std::span<const std::size_t> source_lines) {
    if (mode == Projection::Hopf && header.sigma != Sigma::Sphere)
        throw DomainError("the Hopf map is defined on S3 only");
    if (mode == Projection::Stereographic && header.sigma != Sigma::Sphere)
        throw DomainError("stereographic projection is defined on S3 only");

    const ManifoldPoint pole_point(pole, Sigma::Sphere);
    std::ostringstream body;
    std::vector<std::size_t> collisions;
    std::size_t row = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const SystemState& s = states[k];
        for (std::size_t i = 0; i < s.size(); ++i) {
            ++row;
            Vec3 x;
            try {
                x = mode == Projection::Hopf ? hopf(s[i].position) : stereographic(s[i].position, pole_point);
            } catch (const ProjectionSingularity&) {
                collisions.push_back(source_lines.empty() ? row : source_lines[k] + i);
                continue;
            }
            body << format_double(s.time()) << "," << i << "," << format_double(x[0]) << "," << format_double(x[1])
                 << "," << format_double(x[2]) << "\n";
        }
    }
    if (!collisions.empty()) {
        std::ostringstream msg;
        msg << "stereographic pole collision at " << (source_lines.empty() ? "data row" : "line")
            << (collisions.size() > 1 ? "s " : " ");
        for (std::size_t c = 0; c < collisions.size(); ++c) msg << (c ? "," : "") << collisions[c];
        throw ProjectionSingularity(msg.str());
    }

    auto out = open_for_writing(path);
    write_header(out, header);
    out << "# projection: " << (mode == Projection::Hopf ? "hopf" : "stereographic") << "\n";
    if (mode == Projection::Stereographic)
        out << "# pole: " << format_double(pole[0]) << "," << format_double(pole[1]) << ","
            << format_double(pole[2]) << "," << format_double(pole[3]) << "\n";
    out << "t,body_index,X,Y,Z\n" << body.str();
    finish(out, path);
}

void write_gnuplot_script(const std::filesystem::path& script, const std::filesystem::path& data,
                          std::size_t bodies, Projection mode) {
    auto out = open_for_writing(script);
    out << "# gnuplot -p " << script.filename().string() << "\n";
    out << "set datafile separator ','\n";
    out << "set datafile commentschars '#t'\n";
    out << "set xlabel 'X'\nset ylabel 'Y'\nset zlabel 'Z'\n";
    out << "set view equal xyz\n";
    if (mode == Projection::Hopf) {
        out << "set title 'Hopf images on S2'\n";
        out << "set parametric\nset urange [0:2*pi]\nset vrange [-pi/2:pi/2]\nset isosamples 24,12\n";
        out << "splot cos(u)*cos(v), sin(u)*cos(v), sin(v) with lines lc rgb '#d0d0d0' notitle, \\\n";
    } else {
        out << "set title 'Stereographic projection'\n";
        out << "splot \\\n";
    }
    for (std::size_t b = 0; b < bodies; ++b) {
        out << "  '" << data.filename().string() << "' using ($2==" << b << " ? $3 : 1/0):4:5 with "
            << (mode == Projection::Hopf ? "points pt 7" : "lines") << " title 'body " << b << "'"
            << (b + 1 < bodies ? ", \\\n" : "\n");
    }
    finish(out, script);
}

json com_report(const FileHeader& header, const SearchReport& r) {
    json j = header_json(header);
    j["family"] = r.family;
    j["note"] = "finite-window numerical certificate, not a proof";
    json frame = json::array();
    for (int row = 0; row < 4; ++row) frame.push_back(vec_json(r.action.frame.row(row).transpose()));
    j["action"] = {{"gamma", r.action.gamma}, {"delta", r.action.delta}, {"frame", frame}};
    j["options"] = search_options_json(r.options);
    j["options"]["seed"] = r.options.seed;
    j["resonance"] = {{"triggered", r.resonance.triggered},
                      {"ratio", r.resonance.ratio},
                      {"numerator", r.resonance.numerator},
                      {"denominator", r.resonance.denominator}};
    j["warnings"] = r.warnings;
    j["counts"] = {{"fixed", r.fixed},
                   {"uniform_geodesic", r.uniform_geodesic},
                   {"neither", r.neither},
                   {"total", r.fixed + r.uniform_geodesic + r.neither},
                   {"survivors", r.survivors.size()}};

    auto candidate = [](const Candidate& c) {
        json o{{"index", c.index},
               {"probe", c.probe},
               {"point", vec_json(c.point.coords())},
               {"verdict", std::string(to_string(c.classification.verdict))},
               {"max_deviation", c.classification.max_deviation},
               {"circle_distance", c.circle_distance},
               {"survivor", c.survivor}};
        if (c.classification.witness) o["witness"] = vec_json(c.classification.witness->normal);
        if (c.equidistance)
            o["equidistance"] = {{"passed", c.equidistance->passed}, {"spread", c.equidistance->spread}};
        if (c.field_norm) o["field_norm"] = std::isfinite(*c.field_norm) ? json(*c.field_norm) : json("inf");
        return o;
    };
    j["survivors"] = json::array();
    for (const auto& c : r.survivors) j["survivors"].push_back(candidate(c));
    j["motion_hits"] = json::array();
    for (const auto& c : r.motion_hits) j["motion_hits"].push_back(candidate(c));

    json edges = json::array();
    for (std::size_t b = 0; b <= r.histogram_fixed.size(); ++b) edges.push_back(-17 + static_cast<int>(b));
    j["histograms"] = {{"log10_max_deviation_edges", edges},
                       {"fixed", r.histogram_fixed},
                       {"uniform_geodesic", r.histogram_geodesic},
                       {"neither", r.histogram_neither}};
    return j;
}

json error_json(const std::exception& e) {
    json j{{"message", e.what()}};
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
        j["error"] = "validation";
        j["fields"] = v->fields();
    } else if (const auto* f = dynamic_cast<const FamilyValidationError*>(&e)) {
        j["error"] = "family-validation";
        j["max_residual"] = std::isfinite(f->max_residual()) ? json(f->max_residual()) : json("inf");
    } else if (const auto* s = dynamic_cast<const SingularityError*>(&e)) {
        j["error"] = "singularity";
        j["kind"] = s->kind() == SingularityKind::Antipodal ? "antipodal" : "collision";
        if (s->first()) j["body_i"] = *s->first();
        if (s->second()) j["body_j"] = *s->second();
        if (std::isfinite(s->time())) j["time"] = s->time();
    } else if (const auto* f = dynamic_cast<const IntegrationFailure*>(&e)) {
        j = std::visit([](const auto& cause) { return error_json(cause); }, f->cause());
        j["samples_recorded"] = f->partial().times.size();
    } else if (const auto* r = dynamic_cast<const StepRejected*>(&e)) {
        j["error"] = "step-rejected";
        j["drift"] = r->drift();
        j["time"] = r->time();
    } else if (dynamic_cast<const ProjectionSingularity*>(&e)) {
        j["error"] = "projection-singularity";
    } else if (const auto* io = dynamic_cast<const IoError*>(&e)) {
        j["error"] = "io";
        j["path"] = io->path();
        if (io->line()) j["line"] = *io->line();
    } else if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ConstraintViolation*>(&e)) {
        j["error"] = "domain";
    } else {
        j["error"] = "internal";
    }
    return j;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SingularityError*>(&e) || dynamic_cast<const IntegrationFailure*>(&e) ||
        dynamic_cast<const StepRejected*>(&e) || dynamic_cast<const ProjectionSingularity*>(&e))
        return kExitSingularity;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const std::filesystem::filesystem_error*>(&e))
        return kExitIo;
    return kExitValidation;
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_for_writing(path);
    out << j.dump(2) << "\n";
    finish(out, path);
}

}  // namespace cnb::io
