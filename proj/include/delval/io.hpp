#pragma once

#include <string>
#include <vector>

#include "delval/derdava.hpp"
#include "delval/experiments.hpp"

#include "json.hpp"

namespace delval {

// Shortest decimal representation that round-trips the double. Every file
// this library writes goes through here so reruns are byte-identical.
std::string format_double(double x);

std::string valuation_to_csv(const ValuationResult& result);

// Diagnostics only; wall time stays out of files so reruns compare equal.
nlohmann::json valuation_to_json(const ValuationResult& result);

std::string rows_to_csv(const std::vector<ReportRow>& rows);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace delval
