#pragma once

// EstimateReport serialization: one JSON document per report, a roll-up CSV across reports and
// plot-ready CSV tables. Non-finite numbers are written as the strings "inf", "-inf" and "nan".

#include <istream>
#include <ostream>
#include <span>

#include "hmlab/verify.hpp"

namespace hmlab {

void write_report_json(std::ostream& os, const EstimateReport& report);
// Reads a report back; `pass` is recomputed from the quantities, not trusted from the file.
EstimateReport read_report_json(std::istream& is);

// One row per quantity: id, scenario, quantity, observed values, budget, trend and pass flags.
void write_rollup_csv(std::ostream& os, std::span<const EstimateReport> reports);
void write_table_csv(std::ostream& os, const Table& table);

// Quotes a CSV cell when it contains a comma, quote or newline.
std::string csv_cell(const std::string& s);

}  // namespace hmlab
