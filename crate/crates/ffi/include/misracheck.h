#ifndef MISRACHECK_H
#define MISRACHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MisraCertainty {
  MISRA_CERTAINTY_DEFINITE = 0,
  MISRA_CERTAINTY_CAUTION = 1,
} MisraCertainty;

typedef enum MisraReportFormat {
  MISRA_REPORT_FORMAT_TEXT = 0,
  MISRA_REPORT_FORMAT_STRUCTURED = 1,
} MisraReportFormat;

// Result codes. Zero is success.
typedef enum MisraStatus {
  MISRA_STATUS_OK = 0,
  MISRA_STATUS_NULL_ARGUMENT = 1,
  MISRA_STATUS_INVALID_UTF8 = 2,
  MISRA_STATUS_INVALID_ARGUMENT = 3,
  MISRA_STATUS_CONFIG = 4,
  MISRA_STATUS_IO = 5,
  MISRA_STATUS_COMPLIANCE = 6,
  MISRA_STATUS_OUT_OF_RANGE = 7,
  MISRA_STATUS_INTERNAL = 8,
} MisraStatus;

// Opaque run configuration.
typedef struct MisraConfig MisraConfig;

// Opaque analysis result.
typedef struct MisraResult MisraResult;

// One finding. The strings stay valid until the result is freed.
typedef struct MisraFinding {
  const char *guideline;
  const char *category;
  const char *path;
  uint32_t line;
  uint32_t column;
  enum MisraCertainty certainty;
  bool deviated;
  const char *message;
} MisraFinding;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an empty configuration with the default integer model, all
// rules, the caution policy and the text report format.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum MisraStatus misra_config_new(struct MisraConfig **out);

// # Safety
// `cfg` must be null or a handle from `misra_config_new` not yet freed.
void misra_config_free(struct MisraConfig *cfg);

// Adds a translation unit.
//
// # Safety
// `cfg` must be a live handle and `path` a NUL-terminated string.
enum MisraStatus misra_config_add_source(struct MisraConfig *cfg, const char *path);

// Registers file contents under a path. Registered files shadow the disk
// for sources, headers and record files.
//
// # Safety
// `cfg` must be a live handle; `path` and `contents` NUL-terminated strings.
enum MisraStatus misra_config_add_file(struct MisraConfig *cfg,
                                       const char *path,
                                       const char *contents);

// # Safety
// `cfg` must be a live handle and `dir` a NUL-terminated string.
enum MisraStatus misra_config_add_include(struct MisraConfig *cfg, const char *dir);

// Predefines a macro. `body` may be null for an object-like macro with
// the body `1`.
//
// # Safety
// `cfg` must be a live handle, `name` a NUL-terminated string and `body`
// null or a NUL-terminated string.
enum MisraStatus misra_config_add_define(struct MisraConfig *cfg,
                                         const char *name,
                                         const char *body);

// Sets the guideline selection: `all` or comma-separated ids.
//
// # Safety
// `cfg` must be a live handle and `rules` a NUL-terminated string.
enum MisraStatus misra_config_set_rules(struct MisraConfig *cfg, const char *rules);

// Sets the policy: `suppress`, `violation`, `mixed` or `caution`.
//
// # Safety
// `cfg` must be a live handle and `policy` a NUL-terminated string.
enum MisraStatus misra_config_set_policy(struct MisraConfig *cfg, const char *policy);

// Sets the mixed-policy choice for one guideline: `suppress` or `violation`.
//
// # Safety
// `cfg` must be a live handle; `guideline` and `choice` NUL-terminated strings.
enum MisraStatus misra_config_set_mixed(struct MisraConfig *cfg,
                                        const char *guideline,
                                        const char *choice);

// Sets one integer model field, e.g. `int_bits` to `16` or `char_signed`
// to `false`.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum MisraStatus misra_config_set_model(struct MisraConfig *cfg,
                                        const char *key,
                                        const char *value);

// Path of the recategorization plan; null clears it.
//
// # Safety
// `cfg` must be a live handle and `path` null or a NUL-terminated string.
enum MisraStatus misra_config_set_grp(struct MisraConfig *cfg, const char *path);

// Path of the deviation records; null clears it.
//
// # Safety
// `cfg` must be a live handle and `path` null or a NUL-terminated string.
enum MisraStatus misra_config_set_deviations(struct MisraConfig *cfg, const char *path);

// Path of the external findings file; null clears it.
//
// # Safety
// `cfg` must be a live handle and `path` null or a NUL-terminated string.
enum MisraStatus misra_config_set_external(struct MisraConfig *cfg, const char *path);

// # Safety
// `cfg` must be a live handle.
enum MisraStatus misra_config_set_system(struct MisraConfig *cfg, bool system);

// Pins the structured report timestamp; null uses the current time.
//
// # Safety
// `cfg` must be a live handle and `timestamp` null or a NUL-terminated string.
enum MisraStatus misra_config_set_timestamp(struct MisraConfig *cfg, const char *timestamp);

// Runs the analysis. Analysis errors in individual translation units do
// not fail the call; they are counted in the result and force exit code 3.
//
// # Safety
// `cfg` must be a live handle and `out` a valid pointer to writable storage.
enum MisraStatus misra_analyze(const struct MisraConfig *cfg, struct MisraResult **out);

// # Safety
// `res` must be null or a handle from `misra_analyze` not yet freed.
void misra_result_free(struct MisraResult *res);

// Exit code of the run: 0 compliant, 1 compliant with remarks,
// 2 non-compliant, 3 analysis error. Returns -1 for a null handle.
//
// # Safety
// `res` must be null or a live result handle.
int32_t misra_result_exit_code(const struct MisraResult *res);

// Number of reported findings; 0 for a null handle.
//
// # Safety
// `res` must be null or a live result handle.
size_t misra_result_finding_count(const struct MisraResult *res);

// Number of translation units that failed to analyze.
//
// # Safety
// `res` must be null or a live result handle.
size_t misra_result_error_count(const struct MisraResult *res);

// Reads finding `index` into `out`.
//
// # Safety
// `res` must be a live result handle and `out` a valid pointer.
enum MisraStatus misra_result_finding(const struct MisraResult *res,
                                      size_t index,
                                      struct MisraFinding *out);

// Renders the report. The string stays valid until the next call on the
// same result or until the result is freed.
//
// # Safety
// `res` must be a live result handle and `out` a valid pointer.
enum MisraStatus misra_result_report(struct MisraResult *res,
                                     enum MisraReportFormat format,
                                     const char **out);

// Message for the last failed call on this thread; empty if none. Valid
// until the next failing call on the same thread.
const char *misra_last_error(void);

// Version of the library as a static string.
const char *misra_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MISRACHECK_H */
