/* C interface to the nowcasting engine. All functions are synchronous; a
 * config handle is a flat key/value store consumed by the run functions.
 * Strings returned by nc_* calls stay valid until the next call on the same
 * thread. Not thread-safe per handle; distinct handles may be used from
 * distinct threads. */
#ifndef NOWCAST_NOWCAST_H
#define NOWCAST_NOWCAST_H

#ifdef __cplusplus
extern "C" {
#endif

/* Exit/status codes, shared with the command-line tool. */
#define NC_OK 0
#define NC_ERR_INPUT 2        /* bad file, config, or argument */
#define NC_WARN_CONVERGENCE 3 /* outputs written, but chains disagree */
#define NC_ERR_NUMERIC 4      /* divergent or non-finite computation */
#define NC_ERR_INTERNAL 5

typedef struct nc_config nc_config;

nc_config* nc_config_new(void);
void nc_config_free(nc_config* cfg);

/* Both return NC_OK or NC_ERR_INPUT. */
int nc_config_set(nc_config* cfg, const char* key, const char* value);
int nc_config_load_file(nc_config* cfg, const char* path);

/* NULL when the key is absent. */
const char* nc_config_get(nc_config* cfg, const char* key);

/* Each run reads the inputs named in the config, writes its outputs under
 * the config's output_dir, and returns one of the NC_ codes above. Progress
 * notes go to stderr. */
int nc_run_simulate(nc_config* cfg);
int nc_run_indicators(nc_config* cfg);
int nc_run_nowcast(nc_config* cfg);
int nc_run_evaluate(nc_config* cfg);

/* Message from the most recent failing call on this thread ("" if none). */
const char* nc_last_error(void);

const char* nc_version(void);

#ifdef __cplusplus
}
#endif

#endif /* NOWCAST_NOWCAST_H */
