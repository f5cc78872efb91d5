#ifndef CLAQS_CLAQS_H
#define CLAQS_CLAQS_H

/* C interface to the CLAQS text classifier.
 *
 * A claqs_run holds one resolved configuration. Commands return a status code
 * and, on success or a failed check, a heap-allocated JSON report that the
 * caller releases with claqs_string_free. On any other failure the report
 * pointer is set to NULL and claqs_last_error() describes the problem.
 * claqs_last_error is per thread. Handles are not safe for concurrent use. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CLAQS_BUILDING)
#    define CLAQS_API __declspec(dllexport)
#  else
#    define CLAQS_API __declspec(dllimport)
#  endif
#else
#  define CLAQS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum claqs_status {
  CLAQS_OK = 0,
  CLAQS_ERR_INTERNAL = 1,
  CLAQS_ERR_CONFIG = 2,
  CLAQS_ERR_DATA = 3,       /* unreadable or malformed inputs, checkpoints */
  CLAQS_ERR_DIVERGENCE = 4, /* non-finite loss or collapsed state */
  CLAQS_ERR_BUDGET = 5,     /* configuration too large for the command */
  CLAQS_CHECK_FAILED = 6,   /* gradcheck or verify ran and reported FAIL */
  CLAQS_ERR_ARGUMENT = 7    /* NULL handle or out-pointer */
} claqs_status;

typedef struct claqs_run claqs_run;

/* Config from a JSON file or string. Omitted fields take documented defaults. */
CLAQS_API claqs_status claqs_run_open(const char* config_path, claqs_run** out);
CLAQS_API claqs_status claqs_run_from_json(const char* config_json, claqs_run** out);
CLAQS_API void claqs_run_close(claqs_run* run);

/* Overrides applied to the config document before resolution. */
CLAQS_API claqs_status claqs_run_set_seed(claqs_run* run, uint64_t seed);
CLAQS_API claqs_status claqs_run_set_output_dir(claqs_run* run, const char* dir);
CLAQS_API claqs_status claqs_run_set_workers(claqs_run* run, size_t workers);

CLAQS_API claqs_status claqs_run_resolved_config(const claqs_run* run, char** json_out);

CLAQS_API claqs_status claqs_train(claqs_run* run, char** report_out);
CLAQS_API claqs_status claqs_eval(claqs_run* run, const char* checkpoint_path, char** report_out);
CLAQS_API claqs_status claqs_gradcheck(claqs_run* run, char** report_out);
/* Test hook: scales the analytic gradient of `group` by 1.01 before comparing. */
CLAQS_API claqs_status claqs_gradcheck_corrupted(claqs_run* run, const char* group,
                                                 char** report_out);
CLAQS_API claqs_status claqs_verify(claqs_run* run, char** report_out);
CLAQS_API claqs_status claqs_params(claqs_run* run, char** report_out);
CLAQS_API claqs_status claqs_synth(claqs_run* run, char** report_out);

CLAQS_API const char* claqs_last_error(void);
CLAQS_API const char* claqs_status_name(claqs_status status);
CLAQS_API void claqs_string_free(char* s);
CLAQS_API const char* claqs_version(void);

#ifdef __cplusplus
}
#endif

#endif
