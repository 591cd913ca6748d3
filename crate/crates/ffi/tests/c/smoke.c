#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qframe.h"

static const char *CONFIG =
    "name = \"c_smoke\"\n"
    "kappa = 7.2e-3\n"
    "frame = \"q_frame\"\n"
    "n_max = 4\n"
    "[device]\nkind = \"tls\"\nomega_q = 0.75\ng = 0.03\n"
    "[drive]\namplitude = 1e-2\nomega_d = 1.0\n"
    "[integrator]\nt_end = 50.0\nsample_dt = 10.0\n";

int main(void) {
    QfScenario *s = NULL;
    if (qf_scenario_from_toml(CONFIG, &s) != QF_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", qf_last_error());
        return 1;
    }
    if (qf_scenario_set(s, "drive.amplitude", "-1") != QF_STATUS_CONFIG || strlen(qf_last_error()) == 0) {
        return 2;
    }
    QfTrajectory *t = NULL;
    if (qf_simulate(s, &t) != QF_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", qf_last_error());
        return 3;
    }
    size_t n = 0;
    qf_trajectory_len(t, &n);
    QfSample last;
    qf_trajectory_sample(t, n - 1, &last);
    if (n != 6 || fabs(last.t - 50.0) > 1e-12 || !(last.photon_number > 0.0) || !isnan(last.transmon_occupation)) {
        return 4;
    }
    if (qf_trajectory_sample(t, n, &last) != QF_STATUS_OUT_OF_RANGE) {
        return 5;
    }
    printf("%s %zu %.6e\n", qf_version(), n, last.photon_number);
    qf_trajectory_free(t);
    qf_scenario_free(s);
    return 0;
}
