#pragma once

/**
 * @file
 * @brief JSON metric file, the exchange format with the offline synthesis step:
 *
 *   {"n": 3, "var_index": 0, "lambda": 0.5,
 *    "W": [[[row-major n x n]], ...], "rho": [...], "bounds": [alpha_low, alpha_high]}
 *
 * W and rho coefficients are listed in ascending powers of x[var_index].
 */

#include <filesystem>
#include <stdexcept>
#include <string>

#include "metric.hpp"

namespace ccm {

/// Malformed metric file; what() names the offending field.
class MetricFormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

Metric parse_metric(const std::string & json_text);
Metric load_metric(const std::filesystem::path & path);

std::string metric_to_json(const Metric & metric);
void save_metric(const Metric & metric, const std::filesystem::path & path);

}  // namespace ccm
