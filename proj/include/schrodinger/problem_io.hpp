#pragma once

// Reading and writing problems.
//
// JSON: {"x_space": {"points": [[...], ...], "weights": [...]}, "y_space": {...},
//        "mu": [...], "nu": [...], "kernel": {"kind": "dense" | "radial" | "gaussian", ...}}
//
// CSV bundle (a directory): x/points.csv, x/weights.csv, x/marginal.csv, the
// same under y/, and kernel.csv (dense entries, one row per x) or
// kernel.json (the kernel object of the JSON format) for the other kinds.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "schrodinger/gaussian.hpp"
#include "schrodinger/problem.hpp"

namespace schrodinger {

enum class ProblemFormat { json, csv_bundle };

/// Directories are CSV bundles, everything else is JSON.
ProblemFormat detect_format(const std::filesystem::path& path);

/// Throws ParseError (with line) for malformed files and SchemaError (with
/// the offending field) for missing or invalid data. The result passes
/// check_schema.
DiscreteProblem load_problem(const std::filesystem::path& path, ProblemFormat format);
DiscreteProblem load_problem(const std::filesystem::path& path);

void save_problem(const DiscreteProblem& problem, const std::filesystem::path& path,
                  ProblemFormat format);

nlohmann::json problem_to_json(const DiscreteProblem& problem);
DiscreteProblem problem_from_json(const nlohmann::json& j);

nlohmann::json kernel_to_json(const Kernel& kernel);
Kernel kernel_from_json(const nlohmann::json& j);

/// {"a": ..., "b": ..., "c": ...}; each entry is a square matrix or, as a
/// shorthand, a scalar (dim 1) or a flat list (diagonal).
nlohmann::json gaussian_to_json(const gaussian::GaussianProblem& gp);
gaussian::GaussianProblem gaussian_from_json(const nlohmann::json& j);

/// Parses JSON text, mapping syntax errors to ParseError with a line number.
nlohmann::json parse_json(std::string_view text, const std::string& source);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace schrodinger
