#pragma once

#include "output.hpp"

namespace jmeas::cli {

void cmd_rates(const RunConfig& config);
void cmd_me(const RunConfig& config);
void cmd_trajectory(const RunConfig& config);
void cmd_ensemble(const RunConfig& config);
void cmd_threshold(const RunConfig& config);
void cmd_oracle_check(const RunConfig& config);

/// Rates of information gain normalized by sum_ij [Gamma_ij(0) + Gamma_ij(pi/2)].
struct NormalizedRates {
    double g01_0, g10_0, g11_0, g01_pi2, g10_pi2, g11_pi2;
    double dephasing_ee_gg;  // Gamma_d^{ee,gg}
};
NormalizedRates normalized_rates(const SystemParams& params);

/// Parameters with chi_1 = chi_2 = chi, keeping Delta_j and the signs of g_j.
SystemParams with_chi(const SystemParams& params, double chi);

}  // namespace jmeas::cli
