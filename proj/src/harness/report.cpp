#include "shiftsim/harness/report.hpp"

#include <fstream>
#include <sstream>

namespace shiftsim {

nlohmann::ordered_json to_json(const CheckResult& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["statement"] = c.statement;
    j["margin"] = c.margin;
    j["pass"] = c.pass;
    return j;
}

void write_report(const nlohmann::ordered_json& report,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report " + path.string());
    out << report.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::ordered_json read_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report " + path.string());
    return nlohmann::ordered_json::parse(in);
}

namespace {

void render_value(std::ostringstream& os, const nlohmann::ordered_json& v,
                  const std::string& indent) {
    if (v.is_object()) {
        os << '\n';
        for (const auto& [key, val] : v.items()) {
            os << indent << key << ": ";
            render_value(os, val, indent + "  ");
        }
    } else if (v.is_array()) {
        if (v.empty()) {
            os << "[]\n";
            return;
        }
        os << '\n';
        for (const auto& e : v) {
            os << indent << "- ";
            if (e.is_object() || e.is_array()) {
                render_value(os, e, indent + "  ");
            } else {
                os << e.dump() << '\n';
            }
        }
    } else {
        os << v.dump() << '\n';
    }
}

}  // namespace

std::string render_report_text(const nlohmann::ordered_json& report) {
    std::ostringstream os;
    render_value(os, report, "");
    return os.str();
}

}  // namespace shiftsim
