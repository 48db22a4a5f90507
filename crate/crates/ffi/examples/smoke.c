#include <stdio.h>

#include "ipd.h"

int main(void) {
    IpdEnvironment *env = NULL;
    IpdRealization *run = NULL;
    IpdStatus st = ipd_environment_new_heterogeneous(0.5, 30, NULL, 42, &env);
    if (st != IPD_STATUS_OK) {
        fprintf(stderr, "%s\n", ipd_status_message(st));
        return 1;
    }
    st = ipd_run_realization(env, &run);
    if (st != IPD_STATUS_OK) {
        fprintf(stderr, "%s\n", ipd_status_message(st));
        ipd_environment_free(env);
        return 1;
    }
    double phi = 0.0;
    uint64_t played = 0, refused = 0;
    ipd_payoff_ratio_cooperators(run, &phi);
    ipd_realization_rounds(run, NULL, &played, &refused);
    printf("ipd %s: phi=%.4f played=%llu refused=%llu\n", ipd_version(), phi,
           (unsigned long long)played, (unsigned long long)refused);
    ipd_realization_free(run);
    ipd_environment_free(env);
    return 0;
}
