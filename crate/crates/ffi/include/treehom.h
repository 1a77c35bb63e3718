#ifndef TREEHOM_H
#define TREEHOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ThStatus {
  TH_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  TH_STATUS_NULL_ARGUMENT = 1,
  /**
   * An input string was not valid UTF-8.
   */
  TH_STATUS_INVALID_UTF8 = 2,
  /**
   * Input text could not be parsed.
   */
  TH_STATUS_SYNTAX = 3,
  /**
   * Input parsed but is not acceptable (ranks, shape, homomorphism).
   */
  TH_STATUS_INVALID = 4,
  /**
   * The linearization guard was exceeded.
   */
  TH_STATUS_BLOWUP = 5,
  TH_STATUS_INTERNAL = 6,
  /**
   * The library panicked; the handle arguments should be considered lost.
   */
  TH_STATUS_PANIC = 7,
} ThStatus;

/**
 * A tree homomorphism.
 */
typedef struct ThHom ThHom;

/**
 * The image grammar and the verdict about it.
 */
typedef struct ThVerdict ThVerdict;

/**
 * A weighted tree grammar (WTA, WTG, WTGc or WTGh).
 */
typedef struct ThWtg ThWtg;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the last failed call on this thread, or NULL if the
 * last call succeeded. Valid until the next call on this thread.
 */
const char *th_last_error_message(void);

/**
 * The library version as a static string.
 */
const char *th_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void th_string_free(char *s);

/**
 * Parses a grammar in the `wtg { ... }` text format.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum ThStatus th_wtg_parse(const char *text, struct ThWtg **out);

/**
 * Releases a grammar. NULL is ignored.
 *
 * # Safety
 * `g` must come from this library and not have been freed.
 */
void th_wtg_free(struct ThWtg *g);

/**
 * Renders a grammar in the text format accepted by [`th_wtg_parse`].
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum ThStatus th_wtg_render(const struct ThWtg *g, char **out);

/**
 * The weight the grammar assigns to `tree`, as a decimal string.
 *
 * # Safety
 * `g` must be a live handle, `tree` NUL-terminated, `out` writable.
 */
enum ThStatus th_wtg_eval(const struct ThWtg *g, const char *tree, char **out);

/**
 * Parses a homomorphism in the `hom { ... }` text format.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum ThStatus th_hom_parse(const char *text, struct ThHom **out);

/**
 * Releases a homomorphism. NULL is ignored.
 *
 * # Safety
 * `h` must come from this library and not have been freed.
 */
void th_hom_free(struct ThHom *h);

/**
 * A WTGh for the image of the WTA `a` under `h`.
 *
 * # Safety
 * `a` and `h` must be live handles; `out` must be writable.
 */
enum ThStatus th_hom_image(const struct ThWtg *a, const struct ThHom *h, struct ThWtg **out);

/**
 * Decides whether the image of `a` under `h` is regular. With
 * `emit_grammar`, a regular verdict carries an equivalent WTG built
 * under the production cap `cap` (0 selects the default).
 *
 * # Safety
 * `a` and `h` must be live handles; `out` must be writable.
 */
enum ThStatus th_decide(const struct ThWtg *a,
                        const struct ThHom *h,
                        bool emit_grammar,
                        size_t cap,
                        struct ThVerdict **out);

/**
 * Releases a verdict. NULL is ignored.
 *
 * # Safety
 * `v` must come from this library and not have been freed.
 */
void th_verdict_free(struct ThVerdict *v);

/**
 * Whether the verdict says the image is regular. False for NULL.
 *
 * # Safety
 * `v` must be NULL or a live handle.
 */
bool th_verdict_is_regular(const struct ThVerdict *v);

/**
 * A copy of the image grammar the verdict is about.
 *
 * # Safety
 * `v` must be a live handle; `out` must be writable.
 */
enum ThStatus th_verdict_image(const struct ThVerdict *v, struct ThWtg **out);

/**
 * A copy of the equivalent WTG of a regular verdict. `*out` is set to
 * NULL when there is none (nonregular, or not requested).
 *
 * # Safety
 * `v` must be a live handle; `out` must be writable.
 */
enum ThStatus th_verdict_grammar(const struct ThVerdict *v, struct ThWtg **out);

/**
 * The verdict as a JSON object: `verdict`, plus `grammar` or `witness`
 * and `decomposition`.
 *
 * # Safety
 * `v` must be a live handle; `out` must be writable.
 */
enum ThStatus th_verdict_render(const struct ThVerdict *v, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TREEHOM_H */
