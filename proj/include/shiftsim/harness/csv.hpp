#ifndef SHIFTSIM_HARNESS_CSV_HPP
#define SHIFTSIM_HARNESS_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "shiftsim/trend.hpp"

namespace shiftsim {

using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

// Floats render with 9 significant digits, '.' separator, no grouping.
std::string format_cell(const Cell& cell);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

// Writes header + rows in order; byte-deterministic for a given table.
void emit_csv(const Table& table, const std::filesystem::path& path);

struct RowDiagnostic {
    std::size_t line = 0;  // 1-based physical line in the file
    std::string message;
};

struct IngestResult {
    std::vector<AccuracyRecord> records;  // input order preserved
    std::vector<RowDiagnostic> errors;    // malformed rows, one entry each
};

// Reads the accuracy-table schema:
//   model_id, ref_dataset, ref_accuracy, shift_name, shift_accuracy,
//   m_ref, m_shift [, meta_* ...]
// filter_expr is a conjunction of key=value equality tests separated by
// "&&" (keys: the named columns or meta_* names); empty keeps everything.
IngestResult ingest_accuracies(const std::filesystem::path& path,
                               const std::string& filter_expr);

}  // namespace shiftsim

#endif
