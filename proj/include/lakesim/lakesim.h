#ifndef LAKESIM_H
#define LAKESIM_H

/* C interface to the simulator. Every entry point returns a status code; the
 * message of the last failure on the calling thread is available from
 * lakesim_last_error(). Strings handed out by the library stay valid until the
 * owning handle is freed. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LAKESIM_API __declspec(dllexport)
#else
#define LAKESIM_API __attribute__((visibility("default")))
#endif

typedef enum lakesim_status {
  LAKESIM_OK = 0,
  LAKESIM_INVALID_ARGUMENT = 1,
  LAKESIM_GRID_MISMATCH = 2,
  LAKESIM_NON_FINITE = 3,
  LAKESIM_COMPATIBILITY = 4,
  LAKESIM_NOT_CONVERGED = 5,
  LAKESIM_CFL_VIOLATION = 6,
  LAKESIM_IO_ERROR = 7,
  LAKESIM_FORMAT_ERROR = 8,
  LAKESIM_CONFIG_ERROR = 9,
  LAKESIM_CHECK_FAILED = 10,
  LAKESIM_INTERNAL_ERROR = 11
} lakesim_status;

typedef struct lakesim_config lakesim_config;
typedef struct lakesim_report lakesim_report;

LAKESIM_API const char* lakesim_version(void);
LAKESIM_API const char* lakesim_status_name(lakesim_status status);
LAKESIM_API const char* lakesim_last_error(void);

/* Configuration: key = value text, '#' comments. */
LAKESIM_API lakesim_status lakesim_config_parse(const char* text, lakesim_config** out);
LAKESIM_API lakesim_status lakesim_config_load(const char* path, lakesim_config** out);
LAKESIM_API lakesim_status lakesim_config_set(lakesim_config* config, const char* key, const char* value);
/* Canonical text of every key; owned by the config handle. */
LAKESIM_API const char* lakesim_config_text(lakesim_config* config);
LAKESIM_API const char* lakesim_config_help(void);
LAKESIM_API void lakesim_config_free(lakesim_config* config);

/* Subcommands. On LAKESIM_OK the report is filled; lakesim_report_passed tells
 * whether the checks it carries passed. When the config names an output
 * directory the command also writes its files there. */
LAKESIM_API lakesim_status lakesim_run(const lakesim_config* config, lakesim_report** out);
LAKESIM_API lakesim_status lakesim_invariants(const lakesim_config* config, lakesim_report** out);
LAKESIM_API lakesim_status lakesim_cascade(const lakesim_config* config, lakesim_report** out);
/* Fourth moments of sup_t ||omega||_{b,k,2} per cascade level over `paths` seeds. */
LAKESIM_API lakesim_status lakesim_moments(const lakesim_config* config, lakesim_report** out);
LAKESIM_API lakesim_status lakesim_continuity(const lakesim_config* config, lakesim_report** out);
LAKESIM_API lakesim_status lakesim_validate_noise(const lakesim_config* config, lakesim_report** out);
LAKESIM_API lakesim_status lakesim_solve_stream(const lakesim_config* config, lakesim_report** out);

LAKESIM_API int lakesim_report_passed(const lakesim_report* report);
/* Main output: CSV for run, cascade and continuity, JSON otherwise. */
LAKESIM_API const char* lakesim_report_output(const lakesim_report* report);
/* One-line JSON summary (diagnostic constants, verdicts). */
LAKESIM_API const char* lakesim_report_summary(const lakesim_report* report);
LAKESIM_API void lakesim_report_free(lakesim_report* report);

/* Brownian tables. */
LAKESIM_API lakesim_status lakesim_brownian_write(uint64_t seed, size_t modes, double dt_fine, double horizon,
                                                  const char* path);
LAKESIM_API lakesim_status lakesim_brownian_files_equal(const char* path_a, const char* path_b, int* equal);

/* Snapshots: `count` fields of n*n row-major doubles. */
LAKESIM_API lakesim_status lakesim_snapshot_write(const char* path, size_t n, double t, size_t count,
                                                  const double* data);
LAKESIM_API lakesim_status lakesim_snapshot_info(const char* path, size_t* n, double* t, size_t* count);
LAKESIM_API lakesim_status lakesim_snapshot_read(const char* path, double* data, size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* LAKESIM_H */
