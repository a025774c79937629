#ifndef PESVLAB_ORACLES_REPORT_HPP
#define PESVLAB_ORACLES_REPORT_HPP

#include <string>

#include <json.hpp>

namespace pesvlab::oracles {

/// Outcome of one verification run. Soft checks are reported but never fail a suite.
struct OracleReport {
    std::string name;
    nlohmann::json inputs = nlohmann::json::object();
    nlohmann::json outputs = nlohmann::json::object();
    nlohmann::json tolerances = nlohmann::json::object();
    bool pass{false};
    bool soft{false};
};

[[nodiscard]] inline nlohmann::json to_json(const OracleReport& r)
{
    return {{"name", r.name},         {"inputs", r.inputs}, {"outputs", r.outputs},
            {"tolerances", r.tolerances}, {"pass", r.pass},     {"soft", r.soft}};
}

} // namespace pesvlab::oracles

#endif // PESVLAB_ORACLES_REPORT_HPP
