#ifndef VALEX_H
#define VALEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum ValexStatus {
  VALEX_STATUS_OK = 0,
  VALEX_STATUS_NULL_POINTER = 1,
  VALEX_STATUS_INVALID_UTF8 = 2,
  VALEX_STATUS_INVALID_ARGUMENT = 3,
  VALEX_STATUS_FORMAT = 4,
  VALEX_STATUS_DATA = 5,
  VALEX_STATUS_NUMERIC = 6,
  VALEX_STATUS_IO = 7,
  VALEX_STATUS_PANIC = 8,
} ValexStatus;

typedef enum ValexPolicy {
  VALEX_POLICY_EM_SHORT = 0,
  VALEX_POLICY_EM_MAX = 1,
  VALEX_POLICY_MIN_LENGTH = 2,
  VALEX_POLICY_BLIND = 3,
} ValexPolicy;

typedef enum ValexCounting {
  VALEX_COUNTING_HARD = 0,
  VALEX_COUNTING_SOFT = 1,
} ValexCounting;

typedef enum ValexPath {
  VALEX_PATH_TWO_STAGE = 0,
  VALEX_PATH_BHT = 1,
  VALEX_PATH_BOTH = 2,
} ValexPath;

typedef enum ValexMatrixMethod {
  VALEX_MATRIX_METHOD_A = 0,
  VALEX_MATRIX_METHOD_B = 1,
  VALEX_MATRIX_METHOD_C = 2,
} ValexMatrixMethod;

typedef enum ValexLevel {
  VALEX_LEVEL_FRAME = 0,
  VALEX_LEVEL_ARGUMENT = 1,
} ValexLevel;

/*
 A parse-forest bank.
 */
typedef struct ValexBank ValexBank;

/*
 A counted dictionary.
 */
typedef struct ValexLexicon ValexLexicon;

/*
 Learned filter parameters.
 */
typedef struct ValexParams ValexParams;

typedef struct ValexPipelineConfig {
  uint32_t em_iters;
  enum ValexPolicy policy;
  uint64_t seed;
  enum ValexCounting counting;
  enum ValexPath path;
  enum ValexMatrixMethod matrix_method;
  uint32_t arg_offset;
  double alpha;
  double min_verb_count;
} ValexPipelineConfig;

typedef struct ValexPrf {
  double recall;
  double precision;
  double f_score;
} ValexPrf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call into the library on this thread.
 */
const char *valex_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *valex_version(void);

void valex_string_free(char *s);

/*
 Parses a bank from its text form.
 */
enum ValexStatus valex_bank_parse(const char *text_ptr, struct ValexBank **out);

void valex_bank_free(struct ValexBank *bank);

/*
 Number of clauses, or 0 for a null handle.
 */
uintptr_t valex_bank_len(const struct ValexBank *bank);

/*
 Parses a dictionary from its TSV form.
 */
enum ValexStatus valex_lexicon_parse(const char *text_ptr, struct ValexLexicon **out);

void valex_lexicon_free(struct ValexLexicon *lexicon);

uintptr_t valex_lexicon_verb_count(const struct ValexLexicon *lexicon);

uintptr_t valex_lexicon_pair_count(const struct ValexLexicon *lexicon);

/*
 Writes the dictionary in TSV form to a new string.
 */
enum ValexStatus valex_lexicon_to_string(const struct ValexLexicon *lexicon, char **out);

/*
 Replaces every frame set by the reconstruction from its own matrix.
 */
enum ValexStatus valex_lexicon_reconstruct(const struct ValexLexicon *lexicon,
                                           struct ValexLexicon **out);

void valex_params_free(struct ValexParams *params);

/*
 Writes the parameters in their TSV file form to a new string.
 */
enum ValexStatus valex_params_to_string(const struct ValexParams *params, char **out);

/*
 The library defaults.
 */
struct ValexPipelineConfig valex_pipeline_config_default(void);

/*
 Runs the extraction pipeline. `params_out` may be null when the learned
 parameters are not wanted.
 */
enum ValexStatus valex_pipeline_run(const struct ValexBank *bank,
                                    const struct ValexLexicon *training,
                                    const struct ValexPipelineConfig *config,
                                    struct ValexLexicon **lexicon_out,
                                    struct ValexParams **params_out);

/*
 Recall, precision and F of `candidate` against `reference` over the
 `n_verbs` verbs in `verbs`.
 */
enum ValexStatus valex_eval(const struct ValexLexicon *candidate,
                            const struct ValexLexicon *reference,
                            enum ValexLevel level,
                            const char *const *verbs,
                            uintptr_t n_verbs,
                            struct ValexPrf *out);

/*
 Generates a gold dictionary and a bank with default generator settings
 apart from the seed and the number of verbs.
 */
enum ValexStatus valex_synth(uint64_t seed,
                             uintptr_t n_verbs,
                             struct ValexLexicon **gold_out,
                             struct ValexBank **bank_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VALEX_H */
