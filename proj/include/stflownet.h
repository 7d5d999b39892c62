#ifndef STFLOWNET_H
#define STFLOWNET_H

/* C interface to the spiking optical-flow pipeline.
 *
 * All commands return 0 on success, 1 on usage/configuration errors and 2 on
 * data or format errors. stfn_last_error() describes the most recent failure
 * on the calling thread. String arguments marked optional accept NULL.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef struct stfn_config stfn_config;

stfn_config* stfn_config_new(void);
void stfn_config_free(stfn_config* cfg);

/* Set one key=value pair; keys as listed by stfn_config_keys(). */
int stfn_config_set(stfn_config* cfg, const char* key, const char* value);

/* Load a flat key=value config file. */
int stfn_config_load_file(stfn_config* cfg, const char* path);

/* Newline-separated "key=default  description" listing; caller must not
 * free. Stable for the lifetime of the library. */
const char* stfn_config_keys(void);

const char* stfn_last_error(void);

/* Generate a synthetic translating scene. format is "text" or "binary".
 * out_flo / out_mask are optional ground-truth outputs. */
int stfn_synth(const stfn_config* cfg, const char* out_events, const char* format,
               const char* out_flo, const char* out_mask);

/* Train the analog network. events_path optional: NULL trains on generated
 * synthetic data. out_loss_csv optional. */
int stfn_train(const stfn_config* cfg, const char* events_path, const char* out_ckpt,
               const char* out_loss_csv);

/* Threshold-transfer conversion of a trained analog checkpoint. */
int stfn_convert(const stfn_config* cfg, const char* ann_ckpt, const char* out_ckpt);

/* Conversion followed by surrogate-gradient retraining. */
int stfn_retrain(const stfn_config* cfg, const char* ann_ckpt, const char* events_path,
                 const char* out_ckpt, const char* out_loss_csv);

/* Surrogate-gradient training from random initialization. */
int stfn_stbp(const stfn_config* cfg, const char* events_path, const char* out_ckpt,
              const char* out_loss_csv);

/* Run a checkpoint on an event file; writes .flo and optionally a PPM. */
int stfn_infer(const stfn_config* cfg, const char* ckpt, const char* events_path,
               const char* out_flo, const char* out_ppm);

/* Metrics against ground truth (.flo + PGM mask, both optional for the
 * flow-free metrics). Writes a scenario,metric,value CSV. */
int stfn_eval(const stfn_config* cfg, const char* ckpt, const char* events_path,
              const char* gt_flo, const char* gt_mask, const char* out_csv);

/* Operation-count energy report for a spiking checkpoint (analog checkpoints
 * are converted first) on the given events. */
int stfn_energy(const stfn_config* cfg, const char* ckpt, const char* events_path,
                const char* out_csv);

/* tau0 x tau1 grid evaluation of conversions of an analog checkpoint. */
int stfn_sweep(const stfn_config* cfg, const char* ann_ckpt, const char* events_path,
               const char* gt_flo, const char* gt_mask, const char* out_csv);

/* Color-wheel rendering of a .flo file. */
int stfn_visualize(const stfn_config* cfg, const char* flo_path, const char* out_ppm);

#ifdef __cplusplus
}
#endif

#endif /* STFLOWNET_H */
