#ifndef NEDKIT_H
#define NEDKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NedCorpusFormat {
  NED_CORPUS_FORMAT_NATIVE = 0,
  NED_CORPUS_FORMAT_NIF = 1,
} NedCorpusFormat;

/**
 * Result code of every fallible call.
 */
typedef enum NedStatus {
  NED_STATUS_OK = 0,
  NED_STATUS_NULL_ARGUMENT = 1,
  NED_STATUS_INVALID_UTF8 = 2,
  NED_STATUS_NOT_FOUND = 3,
  NED_STATUS_IO = 4,
  NED_STATUS_PARSE = 5,
  NED_STATUS_CONFLICT = 6,
  NED_STATUS_REDIRECT = 7,
  NED_STATUS_CORRUPT = 8,
  NED_STATUS_VERSION_MISMATCH = 9,
  NED_STATUS_INPUT = 10,
  NED_STATUS_CONFIG = 11,
  NED_STATUS_INTERNAL = 12,
} NedStatus;

/**
 * Opaque knowledge snapshot.
 */
typedef struct NedSnapshot NedSnapshot;

/**
 * Options for [`ned_disambiguate`] and [`ned_evaluate`]. Start from
 * [`ned_link_options_default`].
 */
typedef struct NedLinkOptions {
  double nil_threshold;
  /**
   * Comma-separated subset of `infobox,textual,llc1,llc2`; NULL for all.
   */
  const char *modules;
  enum NedCorpusFormat format;
  bool verbose_ambiguity;
  /**
   * 0 or 1 links serially.
   */
  uint32_t workers;
} NedLinkOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, static storage.
 */
const char *ned_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on this thread.
 */
const char *ned_last_error_message(void);

struct NedLinkOptions ned_link_options_default(void);

/**
 * Parse the dump at `dump_path` and write a snapshot file to
 * `snapshot_path`.
 *
 * # Safety
 * Both paths must be NUL-terminated strings.
 */
enum NedStatus ned_build_snapshot(const char *dump_path,
                                  const char *snapshot_path,
                                  uint64_t build_timestamp);

/**
 * Load a snapshot file into a new handle stored in `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NedStatus ned_snapshot_load(const char *path, struct NedSnapshot **out);

/**
 * Build a snapshot in memory from dump text.
 *
 * # Safety
 * `dump_text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NedStatus ned_snapshot_from_dump(const char *dump_text, struct NedSnapshot **out);

/**
 * Release a snapshot handle. NULL is ignored.
 *
 * # Safety
 * `snapshot` must come from this library and not be used afterwards.
 */
void ned_snapshot_free(struct NedSnapshot *snapshot);

/**
 * Number of articles; 0 for NULL.
 *
 * # Safety
 * `snapshot` must be NULL or a live handle.
 */
size_t ned_snapshot_entity_count(const struct NedSnapshot *snapshot);

/**
 * Resolve a title or redirect to an entity id.
 *
 * # Safety
 * `snapshot` must be a live handle, `title` a NUL-terminated string and
 * `out_id` a valid pointer.
 */
enum NedStatus ned_snapshot_resolve_title(const struct NedSnapshot *snapshot,
                                          const char *title,
                                          uint32_t *out_id);

/**
 * Canonical title of an entity id, as a caller-owned string.
 *
 * # Safety
 * `snapshot` must be a live handle and `out` a valid pointer.
 */
enum NedStatus ned_snapshot_entity_title(const struct NedSnapshot *snapshot,
                                         uint32_t id,
                                         char **out);

/**
 * Link every mention of a corpus given as text. `*out` receives one JSON
 * annotation per line.
 *
 * # Safety
 * `snapshot` must be a live handle, `corpus` a NUL-terminated string,
 * `options` NULL or valid, and `out` a valid pointer.
 */
enum NedStatus ned_disambiguate(const struct NedSnapshot *snapshot,
                                const char *corpus,
                                const struct NedLinkOptions *options,
                                char **out);

/**
 * Link a gold-annotated corpus and return the evaluation report as JSON.
 *
 * # Safety
 * Same as [`ned_disambiguate`].
 */
enum NedStatus ned_evaluate(const struct NedSnapshot *snapshot,
                            const char *corpus,
                            const struct NedLinkOptions *options,
                            char **out);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ned_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEDKIT_H */
