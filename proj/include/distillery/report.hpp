#pragma once

#include <string>
#include <vector>

#include "distillery/distill.hpp"

namespace distillery {

// Fixed serialization: 12 significant digits, shortest round-trippable form
// %.*g produces; identical inputs give byte-identical text.
std::string format_number(double v);

// Header `p,n,v_ed,v_nd,p_succ,delta`, rows in ascending p.
std::string sweep_to_csv(const std::vector<SweepRecord>& rows);
std::string sweep_to_json(const std::vector<SweepRecord>& rows);

// Self-contained 800x600 line chart, one polyline per series, p ticks at 0.05.
std::string sweep_to_svg(const std::vector<SweepRecord>& rows,
                         const std::string& title);

std::string crossover_to_json(const CrossoverReport& report);

}  // namespace distillery
