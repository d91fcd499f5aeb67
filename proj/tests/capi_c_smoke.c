/* Pure C consumer of the shared library: exercises the whole handle
 * lifecycle from a C compilation unit so C linkage stays honest. */
#include <llmgp.h>

#include <stdio.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                      \
  do {                                                                   \
    if (!(cond)) {                                                       \
      ++failures;                                                        \
      fprintf(stderr, "FAIL %s:%d: %s (last error: %s)\n", __FILE__,     \
              __LINE__, #cond, llmgp_last_error());                      \
    }                                                                    \
  } while (0)

int main(void) {
  CHECK(strcmp(llmgp_version(), "0.1.0") == 0);

  llmgp_config* config = llmgp_config_new();
  CHECK(config != NULL);
  CHECK(llmgp_config_set(config, "variant", "tutorial_gp") == LLMGP_OK);
  CHECK(llmgp_config_set(config, "seed", "7") == LLMGP_OK);
  CHECK(llmgp_config_set(config, "runs", "1") == LLMGP_OK);
  CHECK(llmgp_config_set(config, "population_size", "4") == LLMGP_OK);
  CHECK(llmgp_config_set(config, "generations", "2") == LLMGP_OK);
  CHECK(llmgp_config_set(config, "bogus_key", "1") == LLMGP_ERR_CONFIG);
  CHECK(llmgp_last_error()[0] != '\0');

  llmgp_result* result = NULL;
  CHECK(llmgp_run(config, &result) == LLMGP_OK);
  CHECK(result != NULL);
  if (result != NULL) {
    double train = -1.0;
    CHECK(llmgp_result_run_count(result) == 1);
    CHECK(llmgp_result_fe_events(result, 0) == 8);
    CHECK(llmgp_result_cost_usd(result, 0) == 0.0);
    CHECK(llmgp_result_best_genotype(result, 0) != NULL);
    CHECK(llmgp_result_best_fitness(result, 0, "train", &train) == LLMGP_OK);
    CHECK(train >= 0.0);
    CHECK(strcmp(llmgp_result_stop_reason(result, 0), "generations_done") == 0);
    CHECK(llmgp_result_best_fitness(result, 0, "nope", &train) ==
          LLMGP_ERR_INVALID_ARGUMENT);
  }
  llmgp_result_free(result);
  llmgp_config_free(config);

  if (failures == 0) printf("c smoke: ok\n");
  return failures == 0 ? 0 : 1;
}
