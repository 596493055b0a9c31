#include <stdio.h>
#include <string.h>

#include "misracheck.h"

static const char *SRC =
    "#include <stdint.h>\n"
    "uint32_t f(void) {\n"
    "    uint32_t i = 1;\n"
    "    i = i << 32;\n"
    "    return i;\n"
    "}\n";

int main(void) {
    MisraConfig *cfg = NULL;
    MisraResult *res = NULL;
    MisraFinding f;
    const char *report = NULL;

    if (misra_config_new(&cfg) != MISRA_STATUS_OK) return 10;
    if (misra_config_add_file(cfg, "a.c", SRC) != MISRA_STATUS_OK) return 11;
    if (misra_config_add_source(cfg, "a.c") != MISRA_STATUS_OK) return 12;
    if (misra_config_set_policy(cfg, "perhaps") != MISRA_STATUS_INVALID_ARGUMENT) return 13;
    if (strlen(misra_last_error()) == 0) return 14;
    if (misra_analyze(cfg, &res) != MISRA_STATUS_OK) return 15;
    if (misra_result_finding_count(res) != 1) return 16;
    if (misra_result_finding(res, 0, &f) != MISRA_STATUS_OK) return 17;
    if (strcmp(f.guideline, "R12.2") != 0 || f.line != 4 || f.column != 9) return 18;
    if (f.certainty != MISRA_CERTAINTY_DEFINITE) return 19;
    if (misra_result_finding(res, 1, &f) != MISRA_STATUS_OUT_OF_RANGE) return 20;
    if (misra_result_report(res, MISRA_REPORT_FORMAT_TEXT, &report) != MISRA_STATUS_OK) return 21;
    printf("%s", report);
    if (misra_result_exit_code(res) != 2) return 22;
    misra_result_free(res);
    misra_config_free(cfg);
    return 0;
}
