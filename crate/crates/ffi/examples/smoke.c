#include <stdio.h>
#include <hflc.h>

int main(int argc, char **argv) {
    if (argc != 2) { fprintf(stderr, "usage: %s model.json\n", argv[0]); return 1; }

    printf("library version %s\n", hflc_version());

    HflcModel *model = NULL;
    HflcStatus status = hflc_model_load(argv[1], &model);
    if (status != HFLC_STATUS_OK) {
        fprintf(stderr, "load failed (%d): %s\n", (int)status, hflc_last_error());
        return (int)status;
    }

    size_t n_inputs = 0;
    if (hflc_model_input_count(model, "HFLC1", &n_inputs) != HFLC_STATUS_OK) return 1;
    printf("HFLC1 takes %zu inputs\n", n_inputs);

    double x[3] = {0.05, 0.9, 0.1};
    double y = 0.0;
    status = hflc_model_eval(model, "HFLC1", 0, x, 3, &y);
    if (status != HFLC_STATUS_OK) {
        fprintf(stderr, "eval failed (%d): %s\n", (int)status, hflc_last_error());
        return (int)status;
    }
    printf("HFLC1(0.05, 0.9, 0.1) = %.12f\n", y);

    HflcChainState warm = {
        .left  = {.beta = 0.15, .gamma = 0.3, .ankle_x = 0.0, .ankle_y = 0.0},
        .right = {.beta = -0.15, .gamma = 0.3, .ankle_x = -0.3, .ankle_y = 0.0},
    };
    HflcChainResult result;
    status = hflc_model_run_chain(model, 0.0, 0.9, &warm, 0, 0.0, &result);
    if (status != HFLC_STATUS_OK) {
        fprintf(stderr, "chain failed (%d): %s\n", (int)status, hflc_last_error());
        return (int)status;
    }
    printf("chain: %zu sweeps, converged=%d, residual=%.3e\n",
           result.iterations, (int)result.converged, result.residual);

    /* deliberate misuse must come back as a status, not a crash */
    status = hflc_model_eval(model, "HFLC1", 0, x, 2, &y);
    printf("wrong arity -> status %d: %s\n", (int)status, hflc_last_error());

    hflc_model_free(model);
    puts("OK");
    return 0;
}
