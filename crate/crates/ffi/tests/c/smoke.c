#include <stdio.h>
#include <math.h>
#include "trace_forms.h"

int main(void) {
    TfField *f = NULL;
    if (tf_field_new(4, &f) != TF_ERR_VALIDATION || f != NULL) return 1;
    if (tf_last_error() == NULL) return 2;
    if (tf_field_new(1009, &f) != TF_OK) return 3;
    TfTraceTable *t = NULL;
    if (tf_kl_bulk(f, 2, &t) != TF_OK) return 4;
    size_t n = tf_trace_table_len(t);
    if (n != 1009) return 5;
    double buf[2 * 1009];
    if (tf_trace_table_values(t, buf, n) != TF_OK) return 6;
    double sum = 0.0;
    for (size_t a = 1; a < n; a++) sum += buf[2 * a];
    /* sum over a != 0 of Kl_2(a) is p^(-1/2) */
    if (fabs(sum - 1.0 / sqrt(1009.0)) > 1e-9) return 7;
    uint32_t a[3] = {1, 2, 3};
    uint64_t lo = 0, hi = 0;
    if (tf_mult_energy(101, a, 3, a, 3, &lo, &hi) != TF_OK || lo != 15 || hi != 0) return 8;
    tf_trace_table_free(t);
    tf_field_free(f);
    printf("ok\n");
    return 0;
}
