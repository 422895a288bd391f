#include <math.h>
#include <stdio.h>
#include <string.h>

#include "kframe.h"

int main(void) {
    double v = 0.4, g = 1.0 / sqrt(1.0 - v * v);
    double boost[16] = {g, -g * v, 0, 0, -g * v, g, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    KframeMatrixSet *set = kframe_matrix_set_new();
    if (kframe_matrix_set_push(set, boost) != KFRAME_STATUS_OK) return 1;
    KframeClassification c;
    if (kframe_classify(set, 1e-9, &c) != KFRAME_STATUS_OK) return 2;
    if (c.kind != KFRAME_CLASS_KIND_UNIQUE) return 3;
    printf("unique %.0f\n", c.k);
    kframe_matrix_set_free(set);

    KframeGroup *grp = NULL;
    size_t dim = 0;
    if (kframe_group_ok(0.0, true, &grp) != KFRAME_STATUS_OK) return 4;
    if (kframe_group_algebra_dimension(grp, &dim) != KFRAME_STATUS_OK) return 5;
    printf("galilei dim %zu\n", dim);
    kframe_group_free(grp);

    if (kframe_matrix_set_push(NULL, boost) == KFRAME_STATUS_NULL_POINTER && strlen(kframe_last_error_message()) > 0)
        printf("null pointer ok\n");
    return 0;
}
