#ifndef QWELL_SWEEPS_HPP
#define QWELL_SWEEPS_HPP

#include "qwell/classify.hpp"
#include "qwell/config.hpp"

#include <string>
#include <vector>

// Parameter sweeps driven by bisection; each probe is an independent
// minimization from a fixed initial condition. Rows run on a worker pool and
// merge deterministically by index.

namespace qwell {

struct ProbeRecord {
    double param = 0.0;           // probed lambda_bar_sq or Wz
    SolutionClass cls = SolutionClass::Unknown;
    bool converged = false;
    double energy = 0.0;
    double lambda1 = 0.0;         // escaped probes only
};

struct BifurcationRow {
    double W = 0.0;
    bool found = false;
    double lambda_star = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool no_transition = false;   // not the cross class even at lambda_lo
    bool no_upper_bracket = false;
    std::vector<ProbeRecord> probes;
};

struct EscapedRow {
    double eps = 0.0;
    bool found = false;
    double wz_crit = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;
    bool branch_absent = false;   // escaped state not found at wz_lo
    bool stable_to_top = false;
    std::vector<ProbeRecord> probes;
};

std::vector<BifurcationRow> sweep_bifurcation(const RunConfig& cfg);
std::vector<EscapedRow> sweep_escaped(const RunConfig& cfg);

void write_bifurcation_csv(const std::vector<BifurcationRow>& rows, const std::string& path,
                           std::uint64_t config_hash);
void write_escaped_csv(const std::vector<EscapedRow>& rows, const std::string& path,
                       std::uint64_t config_hash);

}

#endif
