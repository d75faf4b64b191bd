#ifndef CAPLAB_H
#define CAPLAB_H
/* C interface to the capacity laboratory.
 *
 * Conventions:
 *   - every function returns a caplab_status; 0 is success
 *   - on failure, caplab_last_error() returns a thread-local message that
 *     stays valid until the next caplab call on the same thread
 *   - every char** output is a NUL-terminated string owned by the caller;
 *     release it with caplab_string_free
 *   - domains are opaque handles; release with caplab_domain_free
 *
 * Text formats (domain files, cube families, capacity records, experiment
 * configs and CSV) are documented in the repository README; all of them are
 * deterministic: the same inputs produce byte-identical outputs.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t caplab_status;

#define CAPLAB_OK 0
#define CAPLAB_EINVAL (-1)  /* bad argument or configuration */
#define CAPLAB_EPARSE (-2)  /* malformed input text */
#define CAPLAB_EGEOM (-3)   /* geometric precondition failed */
#define CAPLAB_ESOLVE (-4)  /* solver failure */
#define CAPLAB_EIO (-5)     /* file i/o failure */
#define CAPLAB_ENOMEM (-6)  /* allocation failure */
#define CAPLAB_EFAIL (-7)   /* run completed but a declared check failed */

const char* caplab_last_error(void);
void caplab_string_free(char* s);

typedef struct caplab_domain caplab_domain;

/* ---- domains ---------------------------------------------------------- */

caplab_status caplab_domain_parse(const char* text, caplab_domain** out);
caplab_status caplab_domain_emit(const caplab_domain* d, char** out_text);
void caplab_domain_free(caplab_domain* d);

/* rooms hanging off the top face of a unit cube; s is a dyadic rational
 * ("2", "1.5") with a*s integral; room j has edge 2^-(a*j) */
caplab_status caplab_domain_build_rooms(int n, const char* s, int a, int J,
                                        caplab_domain** out);
/* branching room-and-passage tree; thinned != 0 keeps ceil(2^(q*j)) legs */
caplab_status caplab_domain_build_tree(int n, int s, double q, int J,
                                       int thinned, caplab_domain** out);
/* carve every non-central Whitney cube (decomposed to max_gen; pass -1 for
 * the default depth) of `base` into room + s-passage */
caplab_status caplab_domain_build_replacement(const caplab_domain* base,
                                              const char* s, int max_gen,
                                              caplab_domain** out);

/* ---- whitney ------------------------------------------------------------ */

/* cube list text plus an independent verification report; an empty report
 * means every invariant holds */
caplab_status caplab_whitney(const caplab_domain* d, int max_gen,
                             char** out_cubes, char** out_report);

/* ---- content ------------------------------------------------------------ */

/* dyadic q-content of a tagged set / of a standalone cube-family text;
 * out_record is a small text record (value, ball-cover upper bound,
 * comparability constants) */
caplab_status caplab_content_tag(const caplab_domain* d, const char* tag,
                                 double q, double* value, char** out_record);
caplab_status caplab_content_family(const char* family_text, double q,
                                    double* value, char** out_record);

/* ---- capacity ----------------------------------------------------------- */

/* Discrete condenser p-capacity at mesh 2^-g between the tagged set e_tag
 * (u = 0) and the central Whitney cube (u = 1).
 * window_tag NULL: global solve. Otherwise the boxes of that tagged set
 * form a solve window whose rim is clamped to u = 1; the result is then a
 * certified upper bound for the global value.
 * field_path, when non-NULL, stores the potential (flat little-endian
 * doubles with a text header). out_record is a deterministic text record. */
caplab_status caplab_capacity(const caplab_domain* d, const char* e_tag,
                              const char* window_tag, int g, double p,
                              double delta, double tol,
                              const char* field_path, char** out_record);

/* ---- s-John ------------------------------------------------------------- */

/* estimated s-John constant of the domain at mesh 2^-g (deterministic
 * sample of locally-deep cells plus a stratified lattice sample) */
caplab_status caplab_sjohn(const caplab_domain* d, double s, int g,
                           long samples, char** out_record);
/* constant for one start point given as comma-separated real coordinates
 * ("0.75,0.9"); witness != 0 appends the witness cell path */
caplab_status caplab_sjohn_point(const caplab_domain* d, double s, int g,
                                 const char* point, int witness,
                                 char** out_record);

/* ---- experiments -------------------------------------------------------- */

/* Runs a line-based "key value" experiment config. Returns CAPLAB_OK when
 * all declared checks pass, CAPLAB_EFAIL when the run completed but a check
 * failed (out_summary explains), CAPLAB_EINVAL for configuration errors.
 * CSV/SVG files named by the config are written in both OK and EFAIL
 * outcomes. */
caplab_status caplab_experiment_run(const char* config_text,
                                    char** out_summary, char** out_csv);

/* deterministic SVG rendering of a 2-D domain; field_path (optional) adds a
 * grayscale potential heatmap */
caplab_status caplab_render_svg(const caplab_domain* d,
                                const char* field_path, char** out_svg);

#ifdef __cplusplus
}
#endif

#endif /* CAPLAB_H */
