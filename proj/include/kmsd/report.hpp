#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace kmsd {

enum class Status { Pass, Fail, NotApplicable, Skipped };

std::string to_string(Status s);

/// Machine-readable outcome of one verification.
///
/// `anchor` names the mathematical statement being certified; every anchor a
/// check can emit is listed by `kmsd list-checks` and in the README.
struct Report {
    std::string check_id;
    std::string anchor;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, double>> residuals;
    double tolerance = 0.0;
    Status status = Status::NotApplicable;
    std::vector<int> boundary_indices;
    std::string note;
    bool expected_failure = false;
    double wall_seconds = 0.0;

    bool passed() const { return status == Status::Pass; }

    Report& add_residual(std::string name, double value) {
        residuals.emplace_back(std::move(name), value);
        return *this;
    }
    /// First residual with this name; throws std::out_of_range if absent.
    double residual(const std::string& name) const;
};

nlohmann::ordered_json to_json(const Report& r, bool include_wall_time = true);

/// Pass iff `ok`, otherwise Fail.
inline Status verdict(bool ok) { return ok ? Status::Pass : Status::Fail; }

}  // namespace kmsd
