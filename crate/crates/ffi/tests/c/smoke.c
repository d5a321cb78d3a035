#include <math.h>
#include <stdio.h>
#include "asdflow.h"

int main(void) {
    double mus[2];
    if (asd_cylinder_spectrum(2.0, 2, mus) != ASD_STATUS_OK) return 1;
    if (fabs(mus[0] + 0.75) > 1e-15 || fabs(mus[1] + 15.0) > 1e-15) return 2;

    AsdProfile *p = NULL;
    if (asd_unduloid_profile(0.3, 1, 64, &p) != ASD_STATUS_OK) return 3;
    AsdProfile *g = NULL;
    if (asd_g(p, &g) != ASD_STATUS_OK) return 4;
    double gv[64];
    if (asd_profile_values(g, gv, 64) != ASD_STATUS_OK) return 5;
    for (int j = 0; j < 64; j++) {
        if (fabs(gv[j]) > 1e-7) return 6;
    }
    asd_profile_free(g);
    asd_profile_free(p);

    if (asd_unduloid_profile(2.0, 1, 64, &p) != ASD_STATUS_CLASSIFICATION) return 7;
    printf("%s\n", asd_last_error_message());
    return 0;
}
