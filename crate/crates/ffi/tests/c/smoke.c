#include <stdio.h>
#include <string.h>

#include "hamsys.h"

static int check(HamsysStatus s, const char *what) {
    if (s != HAMSYS_STATUS_OK) {
        fprintf(stderr, "%s: status %d: %s\n", what, (int)s, hamsys_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    HamsysProblem *p = NULL;
    size_t rank = 0, np = 0, nm = 0;
    int64_t dp = 0, dm = 0;
    bool definite = true;
    double y[8];

    if (check(hamsys_problem_from_example("mark-s1.11-1", &p), "load")) return 1;
    if (check(hamsys_rank(p, &rank, &definite), "rank")) return 1;
    if (rank != 1 || definite) {
        fprintf(stderr, "unexpected rank %zu definite %d\n", rank, (int)definite);
        return 1;
    }
    if (check(hamsys_fundamental_matrix(p, 0.0, 0.0, 0.0, y, 8), "propagate")) return 1;
    if (y[0] != 1.0 || y[6] != 1.0) return 1;
    hamsys_problem_free(p);

    if (check(hamsys_problem_from_example("ex3.1", &p), "load")) return 1;
    if (check(hamsys_deficiency(p, &np, &nm, &dp, &dm), "deficiency")) return 1;
    hamsys_problem_free(p);
    if (np != 1 || nm != 2) {
        fprintf(stderr, "unexpected indices (%zu, %zu)\n", np, nm);
        return 1;
    }

    if (hamsys_problem_from_json("{\"n\": 2,", &p) != HAMSYS_STATUS_PARSE) return 1;
    if (strlen(hamsys_last_error()) == 0) return 1;

    printf("hamsys %s: ok\n", hamsys_version());
    return 0;
}
