#ifndef HSB_H
#define HSB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HsbStatus {
  HSB_STATUS_OK = 0,
  HSB_STATUS_NULL_POINTER = 1,
  HSB_STATUS_INVALID_ARGUMENT = 2,
  HSB_STATUS_TOO_LARGE = 3,
  HSB_STATUS_REGION_TOO_SMALL = 4,
  HSB_STATUS_PARSE_ERROR = 5,
  HSB_STATUS_PRECONDITION_FAILED = 6,
  HSB_STATUS_BUFFER_TOO_SMALL = 7,
  HSB_STATUS_PANIC = 8,
} HsbStatus;

// Opaque evaluated field.
typedef struct HsbField HsbField;

// Opaque sign assignment.
typedef struct HsbSigns HsbSigns;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *hsb_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void hsb_string_free(char *s);

// Every sign equal to `sign` (`+1` or `-1`).
//
// # Safety
// `out` must be valid for writes.
enum HsbStatus hsb_signs_constant(uint32_t n, size_t d, int8_t sign, struct HsbSigns **out);

// The `index`-th assignment (counting from 0) drawn from the seeded sampler.
//
// # Safety
// `out` must be valid for writes.
enum HsbStatus hsb_signs_random(uint32_t n,
                                size_t d,
                                uint64_t seed,
                                uint64_t index,
                                struct HsbSigns **out);

// Parses the text sign-file format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` valid for writes.
enum HsbStatus hsb_signs_parse(const char *text, struct HsbSigns **out);

// Serializes to the text sign-file format; free with [`hsb_string_free`].
//
// # Safety
// `signs` must be a live handle and `out` valid for writes.
enum HsbStatus hsb_signs_to_string(const struct HsbSigns *signs, char **out);

// Number of rectangles, or 0 for a null handle.
//
// # Safety
// `signs` must be null or a live handle.
size_t hsb_signs_len(const struct HsbSigns *signs);

// Sign of the rectangle with canonical id `id`.
//
// # Safety
// `signs` must be a live handle and `out` valid for writes.
enum HsbStatus hsb_signs_get(const struct HsbSigns *signs, uint64_t id, int8_t *out);

// Flips the sign of rectangle `id` in place.
//
// # Safety
// `signs` must be a live handle.
enum HsbStatus hsb_signs_negate(struct HsbSigns *signs, uint64_t id);

// 64-bit FNV-1a digest of the sign string, or 0 for a null handle.
//
// # Safety
// `signs` must be null or a live handle.
uint64_t hsb_signs_digest(const struct HsbSigns *signs);

// # Safety
// `signs` must be null or a handle not yet freed.
void hsb_signs_free(struct HsbSigns *signs);

// Evaluates the field on the full grid, by the layer sweep when `fast` is
// true and cell by cell otherwise.
//
// # Safety
// `signs` must be a live handle and `out` valid for writes.
enum HsbStatus hsb_field_eval(const struct HsbSigns *signs, bool fast, struct HsbField **out);

// Cells per axis, or 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
uint64_t hsb_field_side(const struct HsbField *field);

// Borrows the cell values (first coordinate slowest). The pointer stays
// valid until the field is freed.
//
// # Safety
// `field` must be a live handle; `values` and `len` valid for writes.
enum HsbStatus hsb_field_values(const struct HsbField *field, const int8_t **values, size_t *len);

// 64-bit FNV-1a digest of the cell bytes, or 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
uint64_t hsb_field_digest(const struct HsbField *field);

// # Safety
// `field` must be null or a handle not yet freed.
void hsb_field_free(struct HsbField *field);

// Level-set histogram of `field` on the region with the given per-axis
// levels and offsets (both null for the whole cube). Writes the nonzero
// `(value, count)` pairs in ascending value order. `len` receives the
// number of pairs; if it exceeds `capacity` nothing else is written and
// `BufferTooSmall` is returned.
//
// # Safety
// `levels`/`offsets` must be null or hold `d` entries; `values` and
// `counts` must hold `capacity` entries; `len` must be valid for writes.
enum HsbStatus hsb_histogram(const struct HsbField *field,
                             const uint32_t *levels,
                             const uint64_t *offsets,
                             int32_t *values,
                             uint64_t *counts,
                             size_t capacity,
                             size_t *len);

// Predicted cell count of value `n + 1 - 2k` on a region with levels
// `(a, b)` in the plane.
//
// # Safety
// `out` must be valid for writes.
enum HsbStatus hsb_binomial_expected(uint32_t n, uint32_t a, uint32_t b, uint32_t k, uint64_t *out);

// All-ones field value at finest cell `(i, j)`.
//
// # Safety
// `out` must be valid for writes.
enum HsbStatus hsb_allones_value(uint32_t n, uint64_t i, uint64_t j, int32_t *out);

// Checks the binomial law on every admissible region of the plane.
// `passed` is set to whether all regions agree and `total_q` to the number
// of regions checked.
//
// # Safety
// `signs` must be a live handle; `passed` and `total_q` valid for writes.
enum HsbStatus hsb_verify_theorem(const struct HsbSigns *signs, bool *passed, uint64_t *total_q);

// Normalizes every sign to `+1` for the planar region given by `levels` and
// `offsets` (two entries each, or both null for the whole square). Writes
// the all-ones assignment to `out_signs` and the rearrangement witness as
// JSON to `out_witness`.
//
// # Safety
// `signs` must be a live handle; `levels`/`offsets` null or two entries
// each; the output pointers valid for writes.
enum HsbStatus hsb_normalize(const struct HsbSigns *signs,
                             const uint32_t *levels,
                             const uint64_t *offsets,
                             struct HsbSigns **out_signs,
                             char **out_witness);

// Applies a witness to the field of `signs` and counts the cells of its
// region that differ from the all-ones field.
//
// # Safety
// `witness_json` must be a NUL-terminated string, `signs` a live handle and
// `mismatched` valid for writes.
enum HsbStatus hsb_replay(const char *witness_json,
                          const struct HsbSigns *signs,
                          uint64_t *mismatched);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSB_H */
