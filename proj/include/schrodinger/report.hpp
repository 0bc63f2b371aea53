#pragma once

// JSON and CSV renderings of solver and checker output. Reports contain no
// timestamps, so identical runs produce identical bytes.

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "schrodinger/criteria.hpp"
#include "schrodinger/extnum.hpp"
#include "schrodinger/fortet.hpp"
#include "schrodinger/problem.hpp"

namespace schrodinger {

inline constexpr const char* kTraceHeader = "n,min_u,max_u,residual,min_phi,normalization";

/// A number, or the string "inf".
nlohmann::json ext_json(ExtReal v);
nlohmann::json ext_json(double v);

nlohmann::json to_json(const FixedPointResult& r, bool with_trace);

/// Potentials and coupling expanded to the original grid, with zeros at
/// points that carried no mass.
nlohmann::json to_json(const SchrodingerSolution& s, const ReducedProblem& problem);

nlohmann::json to_json(const SumVerdict& v);
nlohmann::json to_json(const CriteriaReport& r);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

/// One line per criterion, for terminals.
std::string criteria_table(const CriteriaReport& r);

}  // namespace schrodinger
