#include "kmsd/report.hpp"

#include <cmath>
#include <stdexcept>

namespace kmsd {

std::string to_string(Status s)
{
    switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::NotApplicable: return "not_applicable";
    case Status::Skipped: return "skipped";
    }
    return "unknown";
}

double Report::residual(const std::string& name) const
{
    for (const auto& [key, value] : residuals) {
        if (key == name) return value;
    }
    throw std::out_of_range("report " + check_id + " has no residual named " + name);
}

namespace {

// JSON has no representation for non-finite numbers.
nlohmann::ordered_json number(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::ordered_json to_json(const Report& r, bool include_wall_time)
{
    nlohmann::ordered_json j;
    j["check"] = r.check_id;
    j["anchor"] = r.anchor;
    j["parameters"] = r.parameters;
    nlohmann::ordered_json res = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.residuals) res[key] = number(value);
    j["residuals"] = res;
    j["tolerance"] = number(r.tolerance);
    j["status"] = to_string(r.status);
    j["pass"] = r.passed();
    if (!r.boundary_indices.empty()) j["boundary_indices"] = r.boundary_indices;
    if (!r.note.empty()) j["note"] = r.note;
    if (r.expected_failure) j["expected_failure"] = true;
    if (include_wall_time) j["wall_seconds"] = r.wall_seconds;
    return j;
}

}  // namespace kmsd
