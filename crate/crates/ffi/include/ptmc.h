#ifndef PTMC_H
#define PTMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum PtmcStatus {
  /**
   * The call succeeded; documented out-parameters are valid.
   */
  PtmcStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  PtmcStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  PtmcStatus_InvalidUtf8 = 2,
  /**
   * The text is not a machine description.
   */
  PtmcStatus_ParseFailed = 3,
  /**
   * The machine parsed but breaks its kind's structural rules; the
   * report out-parameter lists every violation.
   */
  PtmcStatus_ValidationFailed = 4,
  /**
   * The pass exists but expects a different machine kind.
   */
  PtmcStatus_WrongKind = 5,
  /**
   * The pass name is not one of the documented passes.
   */
  PtmcStatus_UnknownPass = 6,
  /**
   * The machine is the right kind but fails a precondition of the
   * pass (for example, output-determinism for network compilation).
   */
  PtmcStatus_PreconditionFailed = 7,
  /**
   * The node budget was exhausted before the requested bound.
   */
  PtmcStatus_BudgetExceeded = 8,
  /**
   * The operation does not support this machine kind.
   */
  PtmcStatus_Unsupported = 9,
  /**
   * An internal invariant broke; the library caught the panic at the
   * boundary.
   */
  PtmcStatus_InternalPanic = 10,
} PtmcStatus;

/**
 * Outcome of an equivalence check.
 */
typedef enum PtmcVerdict {
  /**
   * No refuting evidence within the bounds.
   */
  PtmcVerdict_Equal = 0,
  /**
   * A provable difference was found.
   */
  PtmcVerdict_Mismatch = 1,
  /**
   * A walk ran out of budget before producing evidence either way.
   */
  PtmcVerdict_Inconclusive = 2,
} PtmcVerdict;

/**
 * Opaque machine handle: one parsed or compiled machine of any kind.
 */
typedef struct PtmcMachine PtmcMachine;

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *ptmc_version(void);

/**
 * The node budget the library uses when told to use the default.
 */
uint64_t ptmc_default_node_budget(void);

/**
 * Description of the calling thread's most recent failure, as a fresh
 * string (empty if the last call succeeded). Free with
 * `ptmc_string_free`.
 */
char *ptmc_last_error_message(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 */
void ptmc_string_free(char *s);

/**
 * Parses a machine description. On `Ok`, writes a caller-owned handle
 * to `out`.
 */
enum PtmcStatus ptmc_machine_parse(const char *text, struct PtmcMachine **out);

/**
 * Releases a machine handle. Null is a no-op; freeing twice is not.
 */
void ptmc_machine_free(struct PtmcMachine *m);

/**
 * Writes the machine's kind tag (`ptm`, `qptm`, `2pda`, `2pda-full`,
 * or `rnn`) as a fresh string.
 */
enum PtmcStatus ptmc_machine_kind(const struct PtmcMachine *m, char **out);

/**
 * Checks the machine against its kind's structural rules. Returns `Ok`
 * for a clean machine and `ValidationFailed` otherwise; in both cases
 * (when `out_report` is non-null) writes a report with one
 * `violation ...` or `advisory ...` line per finding, empty for a
 * machine with nothing to say.
 */
enum PtmcStatus ptmc_machine_validate(const struct PtmcMachine *m, char **out_report);

/**
 * Writes the machine back out in its textual format.
 */
enum PtmcStatus ptmc_machine_serialize(const struct PtmcMachine *m, char **out);

/**
 * Applies one named compilation pass, producing a new machine and
 * leaving the input untouched. Pass names are the same as on the
 * command line: `ptm-to-qptm`, `binarize`, `dyadicize`, `qptm-to-2pda`,
 * `2pda-to-qptm`, `reduce-full`, `2pda-to-rnn`.
 */
enum PtmcStatus ptmc_machine_apply_pass(const struct PtmcMachine *m,
                                        const char *pass,
                                        struct PtmcMachine **out);

/**
 * Evaluates the machine's output distribution over strings of up to
 * `max_len` symbols, giving runs `max_steps` raw steps and the
 * enumeration `budget` merged nodes (pass
 * `ptmc_default_node_budget()` when in doubt). Writes a report with
 * one `mass <string>:<fraction> exact|lower-bound` line per string
 * and a final `total <fraction>` line.
 */
enum PtmcStatus ptmc_semimeasure(const struct PtmcMachine *m,
                                 uint64_t max_len,
                                 uint64_t max_steps,
                                 uint64_t budget,
                                 char **out_report);

/**
 * Compares two machines' output distributions over strings of up to
 * `max_len` symbols within `max_steps` raw steps per side, writing the
 * verdict to `out_verdict`. `Equal` means no refuting evidence within
 * the bounds; `Inconclusive` means a side exhausted the `budget`.
 */
enum PtmcStatus ptmc_check_weak(const struct PtmcMachine *left,
                                const struct PtmcMachine *right,
                                uint64_t max_len,
                                uint64_t max_steps,
                                uint64_t budget,
                                enum PtmcVerdict *out_verdict);

#endif /* PTMC_H */
