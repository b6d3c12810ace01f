#ifndef EHCAP_CLI_HPP
#define EHCAP_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

#include "ehcap/harvest.hpp"
#include "ehcap/sim.hpp"

namespace ehcap::cli {

// exit codes: 0 ok, 2 invalid spec, 3 solver failure, 4 infeasible energy
inline constexpr int kOk = 0;
inline constexpr int kInvalidSpec = 2;
inline constexpr int kSolverFailure = 3;
inline constexpr int kInfeasible = 4;

// "constant:0.5" | "discrete:v1,v2,...[@p1,p2,...]" | "chisq:scale" |
// "periodic:<phase>|<phase>|..."
HarvestModel parse_harvest(const std::string& spec);

// trace export, schema: k,e,y,t,x,w,slept,truncated
void write_trace_csv(std::ostream& out, const SimTrace& trace);

// run the toolkit with argv-style arguments (no program name)
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ehcap::cli

#endif
