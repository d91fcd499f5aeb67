#ifndef LLMGP_H
#define LLMGP_H

/* C interface to the evolution engine. All functions return LLMGP_OK or an
 * error code; llmgp_last_error() describes the most recent failure on the
 * calling thread. Strings returned by accessors stay valid until the object
 * they came from is freed. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct llmgp_config llmgp_config;
typedef struct llmgp_result llmgp_result;

enum {
  LLMGP_OK = 0,
  LLMGP_ERR_INVALID_ARGUMENT = 1, /* null handle, bad index, unknown split */
  LLMGP_ERR_CONFIG = 2,           /* unknown key, unparsable value */
  LLMGP_ERR_IO = 3,               /* file cannot be read or written */
  LLMGP_ERR_RUN = 4               /* execution failed */
};

const char* llmgp_version(void);
/* Message for the last failing call on this thread; empty string if none. */
const char* llmgp_last_error(void);

llmgp_config* llmgp_config_new(void);
void llmgp_config_free(llmgp_config* config);
/* Keys match the key=value config file schema (see README). */
int llmgp_config_set(llmgp_config* config, const char* key, const char* value);
int llmgp_config_load_file(llmgp_config* config, const char* path);

/* Runs `runs` sequential runs under one money budget and returns a result
 * handle through out_result (caller frees with llmgp_result_free). */
int llmgp_run(const llmgp_config* config, llmgp_result** out_result);

int llmgp_result_run_count(const llmgp_result* result);
const char* llmgp_result_best_genotype(const llmgp_result* result, int run);
/* split is "train", "test" or "holdout". */
int llmgp_result_best_fitness(const llmgp_result* result, int run, const char* split,
                              double* out_fitness);
long llmgp_result_fe_events(const llmgp_result* result, int run);
double llmgp_result_cost_usd(const llmgp_result* result, int run);
const char* llmgp_result_stop_reason(const llmgp_result* result, int run);

/* Writes summary.csv, generations.csv, llm_calls.jsonl, errors.csv. */
int llmgp_result_write_reports(const llmgp_result* result, const char* out_dir);
/* Writes the full machine-readable results.json. */
int llmgp_result_save(const llmgp_result* result, const char* path);
void llmgp_result_free(llmgp_result* result);

/* Regenerates the report files from a saved results.json. */
int llmgp_report_from_file(const char* results_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* LLMGP_H */
