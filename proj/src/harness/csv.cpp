#include "shiftsim/harness/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace shiftsim {

std::string format_cell(const Cell& cell) {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double v) const {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return buf;
        }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    };
    return std::visit(Visitor{}, cell);
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != header.size())
        throw std::invalid_argument("Table: row width does not match header");
    rows.push_back(std::move(row));
}

void emit_csv(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("emit_csv: cannot open " + path.string() + ": " +
                                 std::strerror(errno));
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_cell(row[i]);
        }
        out << '\n';
    }
    out.flush();
    if (!out)
        throw std::runtime_error("emit_csv: write failed for " + path.string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    try {
        std::size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

struct FilterClause {
    std::string key;
    std::string value;
};

std::vector<FilterClause> parse_filter(const std::string& expr) {
    std::vector<FilterClause> clauses;
    if (trim(expr).empty()) return clauses;
    std::size_t start = 0;
    while (start <= expr.size()) {
        std::size_t sep = expr.find("&&", start);
        const std::string part =
            trim(expr.substr(start, sep == std::string::npos ? expr.size() - start
                                                             : sep - start));
        if (!part.empty()) {
            const std::size_t eq = part.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("filter expression clause missing '=': " +
                                            part);
            clauses.push_back(
                FilterClause{trim(part.substr(0, eq)), trim(part.substr(eq + 1))});
        }
        if (sep == std::string::npos) break;
        start = sep + 2;
    }
    return clauses;
}

bool matches(const AccuracyRecord& rec, const std::vector<FilterClause>& clauses) {
    for (const auto& c : clauses) {
        std::string actual;
        if (c.key == "model_id")
            actual = rec.model_id;
        else if (c.key == "ref_dataset")
            actual = rec.ref_dataset;
        else if (c.key == "shift_name")
            actual = rec.shift_name;
        else {
            auto it = rec.metadata.find(c.key);
            if (it == rec.metadata.end()) return false;
            actual = it->second;
        }
        if (actual != c.value) return false;
    }
    return true;
}

}  // namespace

IngestResult ingest_accuracies(const std::filesystem::path& path,
                               const std::string& filter_expr) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("ingest_accuracies: cannot open " + path.string() +
                                 ": " + std::strerror(errno));
    const std::vector<FilterClause> clauses = parse_filter(filter_expr);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("ingest_accuracies: empty file " + path.string());
    const std::vector<std::string> header = split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;

    static const char* kRequired[] = {"model_id",   "ref_dataset", "ref_accuracy",
                                      "shift_name", "shift_accuracy", "m_ref",
                                      "m_shift"};
    for (const char* name : kRequired)
        if (!col.count(name))
            throw std::runtime_error("ingest_accuracies: missing required column '" +
                                     std::string(name) + "' in " + path.string());

    std::vector<std::string> meta_cols;
    for (const auto& [name, idx] : col)
        if (name.rfind("meta_", 0) == 0) meta_cols.push_back(name);

    IngestResult result;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        auto reject = [&](const std::string& why) {
            result.errors.push_back(RowDiagnostic{lineno, why});
        };
        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, got " +
                   std::to_string(fields.size()));
            continue;
        }
        AccuracyRecord rec;
        rec.model_id = trim(fields[col["model_id"]]);
        rec.ref_dataset = trim(fields[col["ref_dataset"]]);
        rec.shift_name = trim(fields[col["shift_name"]]);
        double ref_acc = 0, shift_acc = 0;
        if (!parse_double(trim(fields[col["ref_accuracy"]]), ref_acc)) {
            reject("ref_accuracy is not numeric: '" + trim(fields[col["ref_accuracy"]]) +
                   "'");
            continue;
        }
        if (!parse_double(trim(fields[col["shift_accuracy"]]), shift_acc)) {
            reject("shift_accuracy is not numeric: '" +
                   trim(fields[col["shift_accuracy"]]) + "'");
            continue;
        }
        if (!(ref_acc >= 0.0 && ref_acc <= 1.0)) {
            reject("ref_accuracy outside [0,1]: " + trim(fields[col["ref_accuracy"]]));
            continue;
        }
        if (!(shift_acc >= 0.0 && shift_acc <= 1.0)) {
            reject("shift_accuracy outside [0,1]: " +
                   trim(fields[col["shift_accuracy"]]));
            continue;
        }
        if (!parse_u64(trim(fields[col["m_ref"]]), rec.m_ref) || rec.m_ref == 0) {
            reject("m_ref is not a positive integer: '" + trim(fields[col["m_ref"]]) +
                   "'");
            continue;
        }
        if (!parse_u64(trim(fields[col["m_shift"]]), rec.m_shift) || rec.m_shift == 0) {
            reject("m_shift is not a positive integer: '" +
                   trim(fields[col["m_shift"]]) + "'");
            continue;
        }
        rec.ref_accuracy = Probability{ref_acc};
        rec.shift_accuracy = Probability{shift_acc};
        for (const auto& name : meta_cols)
            rec.metadata[name] = trim(fields[col[name]]);
        if (matches(rec, clauses)) result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace shiftsim
