#pragma once

// JSON and CSV serialization of analyses, solutions and property reports.
// Every JSON document carries "schema": 1.

#include <string>

#include <json.hpp>

#include "singbvp/solver.hpp"

namespace singbvp {

inline constexpr int kReportSchema = 1;

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json config_json(const SolverConfig& cfg);
nlohmann::json analysis_json(const Analysis& an);
nlohmann::json solvability_json(const SolvabilityReport& r);
nlohmann::json solution_json(const BvpSolution& sol, bool include_grid);
nlohmann::json green_json(const GreenReport& r);
nlohmann::json adjoint_json(const AdjointReport& r);

/// Header x,y1,...,yn; 17 significant digits.
std::string solution_csv(const std::vector<double>& x, const std::vector<Vector>& y);

}  // namespace singbvp
