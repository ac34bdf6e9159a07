#include "ccm/metric_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ccm {

namespace {

using json = nlohmann::json;

const json & require(const json & j, const char * field)
{
  if (!j.contains(field)) { throw MetricFormatError(std::string("metric file: missing field '") + field + "'"); }
  return j.at(field);
}

double as_number(const json & j, const std::string & field)
{
  if (!j.is_number()) { throw MetricFormatError("metric file: field '" + field + "' must be a number"); }
  return j.get<double>();
}

int as_int(const json & j, const std::string & field)
{
  if (!j.is_number_integer()) { throw MetricFormatError("metric file: field '" + field + "' must be an integer"); }
  return j.get<int>();
}

}  // namespace

Metric parse_metric(const std::string & json_text)
{
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw MetricFormatError(std::string("metric file: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) { throw MetricFormatError("metric file: top level must be an object"); }

  const int n = as_int(require(j, "n"), "n");
  if (n < 1) { throw MetricFormatError("metric file: field 'n' must be positive"); }
  const int var_index = as_int(require(j, "var_index"), "var_index");
  const double lambda = as_number(require(j, "lambda"), "lambda");

  const json & jW = require(j, "W");
  if (!jW.is_array() || jW.empty()) { throw MetricFormatError("metric file: field 'W' must be a non-empty array"); }
  std::vector<Eigen::MatrixXd> W;
  for (std::size_t p = 0; p < jW.size(); ++p) {
    const std::string field = "W[" + std::to_string(p) + "]";
    const json & m = jW[p];
    if (!m.is_array() || static_cast<int>(m.size()) != n) {
      throw MetricFormatError("metric file: field '" + field + "' must have n rows");
    }
    Eigen::MatrixXd Wp(n, n);
    for (int r = 0; r < n; ++r) {
      const json & row = m[r];
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        throw MetricFormatError("metric file: field '" + field + "[" + std::to_string(r) + "]' must have n entries");
      }
      for (int c = 0; c < n; ++c) {
        Wp(r, c) = as_number(row[c], field + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    }
    W.push_back(std::move(Wp));
  }

  const json & jrho = require(j, "rho");
  if (!jrho.is_array()) { throw MetricFormatError("metric file: field 'rho' must be an array"); }
  std::vector<double> rho;
  for (std::size_t p = 0; p < jrho.size(); ++p) { rho.push_back(as_number(jrho[p], "rho[" + std::to_string(p) + "]")); }

  const json & jb = require(j, "bounds");
  if (!jb.is_array() || jb.size() != 2) { throw MetricFormatError("metric file: field 'bounds' must be [low, high]"); }
  const std::pair<double, double> bounds{as_number(jb[0], "bounds[0]"), as_number(jb[1], "bounds[1]")};

  try {
    return Metric(n, var_index, lambda, std::move(W), std::move(rho), bounds);
  } catch (const std::invalid_argument & e) {
    throw MetricFormatError(std::string("metric file: ") + e.what());
  }
}

Metric load_metric(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) { throw MetricFormatError("metric file: cannot open '" + path.string() + "'"); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_metric(ss.str());
}

std::string metric_to_json(const Metric & metric)
{
  json j;
  j["n"] = metric.n();
  j["var_index"] = metric.var_index();
  j["lambda"] = metric.lambda();
  json W = json::array();
  for (const auto & Wp : metric.W_coeffs()) {
    json m = json::array();
    for (Eigen::Index r = 0; r < Wp.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < Wp.cols(); ++c) { row.push_back(Wp(r, c)); }
      m.push_back(std::move(row));
    }
    W.push_back(std::move(m));
  }
  j["W"] = std::move(W);
  j["rho"] = metric.rho_coeffs();
  j["bounds"] = {metric.bounds().first, metric.bounds().second};
  return j.dump(2);
}

void save_metric(const Metric & metric, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) { throw std::runtime_error("cannot write metric file '" + path.string() + "'"); }
  out << metric_to_json(metric) << '\n';
}

}  // namespace ccm
