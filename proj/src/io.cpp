#include "delval/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace delval {

std::string format_double(double x) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
    return std::string(buffer, result.ptr);
}

std::string valuation_to_csv(const ValuationResult& result) {
    std::string out = "source_id,score,stderr\n";
    for (int i = 0; i < result.num_sources(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(result.scores[static_cast<std::size_t>(i)]);
        out += ',';
        out += format_double(result.std_errors[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    return out;
}

nlohmann::json valuation_to_json(const ValuationResult& result) {
    nlohmann::json diagnostics{
        {"samples_used", result.samples_used},
        {"std_errors", result.std_errors},
        {"converged", result.converged},
        {"starved_sources", result.starved_sources},
    };
    if (result.method == Method::Mcmc012) {
        diagnostics["gelman_rubin"] = result.gelman_rubin_statistic;
        diagnostics["max_importance_coefficient"] = result.max_importance_coefficient;
    }
    return nlohmann::json{{"scores", result.scores},
                          {"method", method_name(result.method)},
                          {"diagnostics", diagnostics}};
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = "experiment,key,metric,value,stderr\n";
    for (const auto& row : rows) {
        out += row.experiment;
        out += ',';
        out += row.key;
        out += ',';
        out += row.metric;
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.std_error);
        out += '\n';
    }
    return out;
}

nlohmann::json rows_to_json(const std::vector<ReportRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        out.push_back({{"experiment", row.experiment},
                       {"key", row.key},
                       {"metric", row.metric},
                       {"value", row.value},
                       {"stderr", row.std_error}});
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace delval
