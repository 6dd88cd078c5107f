#include "curvednbody/errors.hpp"

#include <cmath>
#include <sstream>

namespace cnb {

namespace {

std::string describe_singularity(SingularityKind kind, std::optional<std::size_t> i,
                                 std::optional<std::size_t> j, double bracket, double time) {
    std::ostringstream out;
    out << (kind == SingularityKind::Collision ? "collision" : "antipodal") << " singularity";
    if (i && j) out << " between bodies " << *i << " and " << *j;
    if (!std::isnan(time)) out << " at t=" << time;
    out << " (denominator bracket " << bracket << ")";
    return out.str();
}

std::string join_fields(const std::vector<std::string>& fields, const std::string& message) {
    std::string out = message;
    if (!fields.empty()) {
        out += " [";
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k) out += ", ";
            out += fields[k];
        }
        out += "]";
    }
    return out;
}

}  // namespace

SingularityError::SingularityError(SingularityKind kind, std::optional<std::size_t> i,
                                   std::optional<std::size_t> j, double bracket, double time)
    : Error(describe_singularity(kind, i, j, bracket, time)),
      kind_(kind), i_(i), j_(j), bracket_(bracket), time_(time) {}

SingularityError SingularityError::at_time(double t) const {
    return SingularityError(kind_, i_, j_, bracket_, t);
}

SingularityError SingularityError::with_pair(std::size_t i, std::size_t j) const {
    return SingularityError(kind_, i, j, bracket_, time_);
}

ValidationError::ValidationError(std::vector<std::string> fields, const std::string& message)
    : Error(join_fields(fields, message)), fields_(std::move(fields)), reason_(message) {}

StepRejected::StepRejected(double drift, double limit, double time)
    : Error([&] {
          std::ostringstream out;
          out << "step rejected at t=" << time << ": constraint drift " << drift
              << " exceeds " << limit << "; try a smaller step";
          return out.str();
      }()),
      drift_(drift), time_(time) {}

NotRigidRotation::NotRigidRotation(double reconstruction_error, double limit)
    : Error([&] {
          std::ostringstream out;
          out << "trajectory is not a rigid rotation: reconstruction error " << reconstruction_error
              << " exceeds " << limit;
          return out.str();
      }()),
      error_(reconstruction_error) {}

IoError::IoError(std::string path, const std::string& message, std::optional<std::size_t> line)
    : Error([&] {
          std::ostringstream out;
          out << path;
          if (line) out << ":" << *line;
          out << ": " << message;
          return out.str();
      }()),
      path_(std::move(path)), line_(line) {}

}  // namespace cnb
