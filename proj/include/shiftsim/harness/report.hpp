#ifndef SHIFTSIM_HARNESS_REPORT_HPP
#define SHIFTSIM_HARNESS_REPORT_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

namespace shiftsim {

inline constexpr const char* kToolkitVersion = "shiftsim 0.1.0";

// One theorem/consistency check: the tested statement, its margin, verdict.
struct CheckResult {
    std::string name;
    std::string statement;
    double margin = 0.0;  // positive = satisfied with room
    bool pass = false;
};

nlohmann::ordered_json to_json(const CheckResult& c);

// Reports are byte-reproducible functions of (config, toolkit version):
// no timestamps or host details go in; timing is the caller's business
// (the CLI prints it to stderr).
void write_report(const nlohmann::ordered_json& report,
                  const std::filesystem::path& path);

nlohmann::ordered_json read_report(const std::filesystem::path& path);

// Human rendering of a report, stable key order.
std::string render_report_text(const nlohmann::ordered_json& report);

}  // namespace shiftsim

#endif
