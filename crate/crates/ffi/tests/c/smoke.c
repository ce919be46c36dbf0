#include <math.h>
#include <stdio.h>
#include "meso_metrology.h"

#define CHECK(call)                                                           \
    do {                                                                      \
        MesoStatus s_ = (call);                                               \
        if (s_ != MESO_STATUS_OK) {                                           \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,                 \
                    meso_last_error_message());                               \
            return 1;                                                         \
        }                                                                     \
    } while (0)

int main(void) {
    MesoModel *model = NULL;
    MesoSetup *setup = NULL;
    MesoTransport t;
    MesoOptimum opt;

    CHECK(meso_model_parse("lorentzian:gamma=0.1,theta=1.1", &model));
    CHECK(meso_setup_new(0.1, 0.0, 1.0, MESO_CONVENTION_RIGHT_HOT, &setup));
    CHECK(meso_transport(model, setup, NULL, &t));
    CHECK(meso_optimize(model, setup, NULL, MESO_METHOD_EXACT, NAN, NAN, 0, &opt));
    printf("%.12e %.12e %.12e %.12e\n", t.current, t.noise, t.gamma, opt.gamma_max);

    if (meso_model_parse("lorentzian:gama=1", &model) != MESO_STATUS_PARSE) {
        return 2;
    }
    meso_model_free(model);
    meso_setup_free(setup);
    return 0;
}
