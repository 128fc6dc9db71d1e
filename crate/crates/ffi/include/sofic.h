#ifndef SOFIC_H
#define SOFIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
enum SoficStatus
#if __STDC_VERSION__ >= 202311L
  : int32_t
#endif // __STDC_VERSION__ >= 202311L
 {
  SOFIC_STATUS_OK = 0,
  SOFIC_STATUS_NULL_POINTER = 1,
  SOFIC_STATUS_INVALID_UTF8 = 2,
  SOFIC_STATUS_MALFORMED = 3,
  SOFIC_STATUS_MISMATCH = 4,
  SOFIC_STATUS_SIZE_LIMIT = 5,
  SOFIC_STATUS_NOT_AN_ELEMENT = 6,
  SOFIC_STATUS_INAPPLICABLE = 7,
  SOFIC_STATUS_IO = 8,
  SOFIC_STATUS_PANIC = 9,
};
#if __STDC_VERSION__ >= 202311L
typedef enum SoficStatus SoficStatus;
#else
typedef int32_t SoficStatus;
#endif // __STDC_VERSION__ >= 202311L

/**
 * A finite group with its multiplication table and conjugacy classes.
 */
typedef struct SoficGroup SoficGroup;

/**
 * A reduced word in a free group of fixed rank.
 */
typedef struct SoficWord SoficWord;

/**
 * Message for the most recent failure on this thread, or an empty string.
 * The pointer stays valid until the next call into the library.
 */
const char *sofic_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sofic_string_free(char *s);

/**
 * Loads a bundled group by label, e.g. "S5", "Q8", "Z4xZ2".
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
SoficStatus sofic_group_builtin(const char *name, struct SoficGroup **out);

/**
 * Parses a group in catalog text format (`perm` or `table`).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` writable.
 */
SoficStatus sofic_group_parse(const char *text, struct SoficGroup **out);

/**
 * Releases a group handle. Null is ignored.
 *
 * # Safety
 * `g` must come from this library and not have been freed.
 */
void sofic_group_free(struct SoficGroup *g);

/**
 * Writes the group order.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
SoficStatus sofic_group_order(const struct SoficGroup *g, uintptr_t *out);

/**
 * Writes the number of conjugacy classes.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
SoficStatus sofic_group_num_classes(const struct SoficGroup *g, uintptr_t *out);

/**
 * Writes the label of class `c` as a new string.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
SoficStatus sofic_group_class_label(const struct SoficGroup *g, uintptr_t c, char **out);

/**
 * Parses an element (cycle notation or table label) into its index.
 *
 * # Safety
 * `g` must be a live handle, `text` NUL-terminated and `out` writable.
 */
SoficStatus sofic_group_parse_element(const struct SoficGroup *g, const char *text, uintptr_t *out);

/**
 * Writes the label of element `x` as a new string.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
SoficStatus sofic_group_element_label(const struct SoficGroup *g, uintptr_t x, char **out);

/**
 * Writes the product `a * b` (apply `a`, then `b`).
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
SoficStatus sofic_group_mul(const struct SoficGroup *g, uintptr_t a, uintptr_t b, uintptr_t *out);

/**
 * Graph distance from the identity class to the class of `x` in the
 * conjugacy graph generated by the space-separated class labels.
 * `reachable` receives 0 when no path exists; the distance then falls
 * back to the largest finite one.
 *
 * # Safety
 * `g` must be a live handle, `classes` NUL-terminated, outputs writable.
 */
SoficStatus sofic_graph_distance(const struct SoficGroup *g,
                                 const char *classes,
                                 uintptr_t x,
                                 uint32_t *dist,
                                 int32_t *reachable);

/**
 * Normalized Hamming distance of two permutations of {0, .., n-1} given
 * as image arrays, as the reduced fraction `num / den`.
 *
 * # Safety
 * `a` and `b` must point to `n` values each; outputs writable.
 */
SoficStatus sofic_hamming_distance(const uint32_t *a,
                                   const uint32_t *b,
                                   uintptr_t n,
                                   int64_t *num,
                                   int64_t *den);

/**
 * Parses a word such as "x^-2(xy)^5" over `rank` generators.
 *
 * # Safety
 * `text` must be NUL-terminated and `out` writable.
 */
SoficStatus sofic_word_parse(const char *text, uintptr_t rank, struct SoficWord **out);

/**
 * Releases a word handle. Null is ignored.
 *
 * # Safety
 * `w` must come from this library and not have been freed.
 */
void sofic_word_free(struct SoficWord *w);

/**
 * Writes the reduced length.
 *
 * # Safety
 * `w` must be a live handle and `out` writable.
 */
SoficStatus sofic_word_length(const struct SoficWord *w, uintptr_t *out);

/**
 * Writes the reduced word as a new string.
 *
 * # Safety
 * `w` must be a live handle and `out` writable.
 */
SoficStatus sofic_word_to_string(const struct SoficWord *w, char **out);

/**
 * Evaluates `w` in `g` with generator `i` sent to `images[i]`.
 *
 * # Safety
 * `images` must point to `n_images` indices; handles live, `out` writable.
 */
SoficStatus sofic_word_evaluate(const struct SoficWord *w,
                                const struct SoficGroup *g,
                                const uintptr_t *images,
                                uintptr_t n_images,
                                uintptr_t *out);

/**
 * Replays a non-membership certificate. `valid` receives 1 when every
 * claim checks out and 0 when the certificate is refuted.
 *
 * # Safety
 * `text` must be NUL-terminated and `valid` writable.
 */
SoficStatus sofic_certificate_verify(const char *text, int32_t *valid);

#endif  /* SOFIC_H */
