#ifndef PMCV_REPORT_HPP
#define PMCV_REPORT_HPP

#include "pmcv/analysis.hpp"
#include "pmcv/catalog.hpp"
#include "pmcv/linalg.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace pmcv {

/// Serializes with a fixed key order and every number printed as %.17g; non-finite numbers become null.
std::string dump_deterministic(const nlohmann::ordered_json& j, int indent = 2);

nlohmann::ordered_json to_json(const ShapeSpectrum& s);
nlohmann::ordered_json to_json(const TwoCurvatureValues& v);
nlohmann::ordered_json to_json(const TheoremStatus& t);
nlohmann::ordered_json to_json(const GridSpec& g);
nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Full verification report: {instance, grid, extrinsic_summary, spectrum, pmcv, theorems, checks}.
nlohmann::ordered_json report_to_json(const PMCVReport& report, const InstanceDescriptor& descriptor,
                                      const CatalogInstance& instance, const GridSpec& grid);

/// One row per grid point: u_1..u_n, H, c_0..c_n (char poly, highest degree first).
void write_grid_csv(std::ostream& out, const PMCVReport& report);

}  // namespace pmcv

#endif  // PMCV_REPORT_HPP
