#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "enrichfp/enrichment.hpp"
#include "enrichfp/iteration.hpp"
#include "enrichfp/spaces.hpp"

namespace enrichfp {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const StopRule& stop);
nlohmann::json to_json(const EnrichmentReport& report);
nlohmann::json to_json(const SolveResult& result);

/// CSV with header `iter,residual,ratio`; iter counts steps from 1 and the
/// ratio cell is empty where undefined.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

/// One row per stored iterate: `iter,x0,x1,...`, starting at iter 0.
void write_iterates_csv(std::ostream& out, const IterationTrace& trace);

}  // namespace enrichfp
