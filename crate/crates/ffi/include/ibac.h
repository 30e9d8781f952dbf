#ifndef IBAC_H
#define IBAC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IbacStatus {
  IBAC_STATUS_OK = 0,
  IBAC_STATUS_NULL_POINTER = 1,
  IBAC_STATUS_INVALID_ARGUMENT = 2,
  IBAC_STATUS_CRYPTO = 3,
  IBAC_STATUS_ENCODING = 4,
  /**
   * The message was refused; the reason is in the last error.
   */
  IBAC_STATUS_DENIED = 5,
  IBAC_STATUS_SCENARIO = 6,
  IBAC_STATUS_INTERNAL = 7,
} IbacStatus;

typedef enum IbacModeCode {
  IBAC_MODE_CODE_OBFUSCATE_ONLY = 0,
  IBAC_MODE_CODE_FULL = 1,
  IBAC_MODE_CODE_AUTH_ONLY = 2,
} IbacModeCode;

typedef enum IbacSchemeCode {
  IBAC_SCHEME_CODE_ENC = 0,
  IBAC_SCHEME_CODE_HASH = 1,
} IbacSchemeCode;

/**
 * One cached content object with its nonce memory.
 */
typedef struct IbacCacheEntry IbacCacheEntry;

/**
 * A group member building interests.
 */
typedef struct IbacConsumer IbacConsumer;

/**
 * Keys of one access group.
 */
typedef struct IbacGroup IbacGroup;

typedef struct IbacProducer IbacProducer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. Valid until
 * the next call into the library from the same thread.
 */
const char *ibac_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ibac_version(void);

/**
 * # Safety
 * `p` and `len` must come from one library call that returned bytes.
 */
void ibac_bytes_free(uint8_t *p, size_t len);

/**
 * # Safety
 * `s` must be a string returned by this library, not yet freed.
 */
void ibac_string_free(char *s);

/**
 * `(1 − δ)/τ_process + δ/(τ_process + τ_verify)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum IbacStatus ibac_model_mu(double delta, double tau_process, double tau_verify, double *out);

/**
 * Generates group keys at security level `kappa` (128 or 256 bits).
 *
 * # Safety
 * `out` must be writable.
 */
enum IbacStatus ibac_group_generate(uint32_t kappa, uint64_t seed, struct IbacGroup **out);

/**
 * Copies the 32-byte group id into `out`.
 *
 * # Safety
 * `group` must be a live handle and `out` must hold 32 bytes.
 */
enum IbacStatus ibac_group_id(const struct IbacGroup *group, uint8_t *out);

/**
 * # Safety
 * `group` must be NULL or a handle not yet freed.
 */
void ibac_group_free(struct IbacGroup *group);

/**
 * A consumer of `group`'s content; the group handle may be freed after.
 *
 * # Safety
 * `group` must be a live handle and `out` writable.
 */
enum IbacStatus ibac_consumer_new(const struct IbacGroup *group,
                                  enum IbacModeCode mode,
                                  enum IbacSchemeCode scheme,
                                  uint64_t seed,
                                  struct IbacConsumer **out);

/**
 * # Safety
 * `consumer` must be NULL or a handle not yet freed.
 */
void ibac_consumer_free(struct IbacConsumer *consumer);

/**
 * Builds the encoded interest for `name` (a `/`-separated URI) whose first
 * `prefix_len` components are routable.
 *
 * # Safety
 * Handles and strings must be valid; `out` and `out_len` writable.
 */
enum IbacStatus ibac_consumer_interest(struct IbacConsumer *consumer,
                                       const char *name,
                                       size_t prefix_len,
                                       uint64_t now_ms,
                                       uint8_t **out,
                                       size_t *out_len);

/**
 * A producer answering for names under `prefix`.
 *
 * # Safety
 * `prefix` must be a valid string and `out` writable.
 */
enum IbacStatus ibac_producer_new(const char *prefix, uint64_t seed, struct IbacProducer **out);

/**
 * # Safety
 * `producer` must be NULL or a handle not yet freed.
 */
void ibac_producer_free(struct IbacProducer *producer);

/**
 * Registers the public parameters of `group`.
 *
 * # Safety
 * Both handles must be live.
 */
enum IbacStatus ibac_producer_register_group(struct IbacProducer *producer,
                                             const struct IbacGroup *group);

/**
 * Publishes `data` under `name` for one registered group.
 *
 * # Safety
 * Handles, strings and `data`/`data_len` must be valid.
 */
enum IbacStatus ibac_producer_publish(struct IbacProducer *producer,
                                      const char *name,
                                      size_t prefix_len,
                                      const uint8_t *data,
                                      size_t data_len,
                                      const struct IbacGroup *group,
                                      enum IbacModeCode mode,
                                      enum IbacSchemeCode scheme,
                                      uint64_t lifetime_ms);

/**
 * Answers an encoded interest with an encoded content object, or returns
 * [`IbacStatus::Denied`] with the drop reason as the last error.
 *
 * # Safety
 * `producer` must be live, `interest`/`len` readable, outputs writable.
 */
enum IbacStatus ibac_producer_respond(struct IbacProducer *producer,
                                      const uint8_t *interest,
                                      size_t len,
                                      uint64_t now_ms,
                                      uint8_t **out,
                                      size_t *out_len);

/**
 * Caches an encoded content object as a router would at `now_ms`. A zero
 * `window_ms` ties the nonce window to the content's remaining lifetime.
 *
 * # Safety
 * `content`/`len` must be readable and `out` writable.
 */
enum IbacStatus ibac_cache_entry_new(const uint8_t *content,
                                     size_t len,
                                     uint64_t now_ms,
                                     uint64_t window_ms,
                                     uint64_t skew_ms,
                                     struct IbacCacheEntry **out);

/**
 * # Safety
 * `entry` must be NULL or a handle not yet freed.
 */
void ibac_cache_entry_free(struct IbacCacheEntry *entry);

/**
 * Decides whether the cached content may answer an encoded interest,
 * remembering its nonce when it may.
 *
 * # Safety
 * `entry` must be live and `interest`/`len` readable.
 */
enum IbacStatus ibac_cache_entry_check(struct IbacCacheEntry *entry,
                                       const uint8_t *interest,
                                       size_t len,
                                       uint64_t now_ms);

/**
 * Runs a scenario file or bundled scenario. With `has_seed` the seed is
 * overridden; a non-NULL `out_dir` receives the output files. The summary
 * is returned as JSON through `summary_json` (free with
 * [`ibac_string_free`]); pass NULL to skip it.
 *
 * # Safety
 * Strings must be valid or NULL where allowed; `summary_json` writable
 * when non-NULL.
 */
enum IbacStatus ibac_run_scenario(const char *scenario,
                                  const char *out_dir,
                                  bool has_seed,
                                  uint64_t seed,
                                  char **summary_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IBAC_H */
