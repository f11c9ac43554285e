#ifndef FLOWPOST_H
#define FLOWPOST_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every `fp_*` function.
typedef enum FpStatus {
  FP_STATUS_OK = 0,
  FP_STATUS_NULL_POINTER = 1,
  FP_STATUS_INVALID_UTF8 = 2,
  FP_STATUS_IO = 3,
  FP_STATUS_PARSE = 4,
  FP_STATUS_MESH = 5,
  FP_STATUS_UNKNOWN_FIELD = 6,
  FP_STATUS_UNKNOWN_BOUNDARY = 7,
  FP_STATUS_INVALID_ARGUMENT = 8,
  FP_STATUS_NO_INTERSECTION = 9,
  FP_STATUS_SPEC_INVALID = 10,
  FP_STATUS_BUFFER_TOO_SMALL = 11,
  FP_STATUS_STALE_HANDLE = 12,
  FP_STATUS_PANIC = 13,
} FpStatus;

// An opened dataset.
typedef struct FpCase FpCase;

// A figure under construction.
typedef struct FpFigure FpFigure;

// Field values sampled along a line.
typedef struct FpProfile FpProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes, including the terminating NUL, of the calling thread's
// last error message.
size_t fp_last_error_length(void);

// Copies the calling thread's last error message into `buf`. Returns the
// number of bytes written including the NUL, or 0 if `buf` is null or too
// small.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t fp_last_error_message(char *buf, size_t len);

// The library version as a static NUL-terminated string.
const char *fp_version(void);

// Opens a `.vtk` or `.vtu` dataset.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum FpStatus fp_case_open(const char *path, struct FpCase **out);

// Releases a case. Null is ignored.
//
// # Safety
// `case` must come from [`fp_case_open`] and not be used afterwards.
void fp_case_free(struct FpCase *case_);

// Number of cells of a case.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_case_n_cells(const struct FpCase *case_, size_t *out);

// Bounds as `xmin, xmax, ymin, ymax`.
//
// # Safety
// `out` must point to 4 writable doubles.
enum FpStatus fp_case_bounds(const struct FpCase *case_, double *out);

// Number of components (1, 3 or 9) of a named field.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_case_field_components(const struct FpCase *case_, const char *name, size_t *out);

// Copies a cell field into `buf`: all components interleaved when
// `component` is negative, otherwise the one component. `needed` (may be
// null) receives the number of doubles required.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum FpStatus fp_case_get_field(const struct FpCase *case_,
                                const char *name,
                                int32_t component,
                                double *buf,
                                size_t len,
                                size_t *needed);

// Samples a field along the segment from `(x1, y1)` to `(x2, y2)`.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_profile_along_line(const struct FpCase *case_,
                                    double x1,
                                    double y1,
                                    double x2,
                                    double y2,
                                    const char *field,
                                    struct FpProfile **out);

// Releases a profile. Null is ignored.
//
// # Safety
// `profile` must come from [`fp_profile_along_line`].
void fp_profile_free(struct FpProfile *profile);

// Number of samples and values per sample of a profile.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_profile_shape(const struct FpProfile *profile,
                               size_t *samples,
                               size_t *components);

// Copies the arc-length positions of the samples.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum FpStatus fp_profile_positions(const struct FpProfile *profile,
                                   double *buf,
                                   size_t len,
                                   size_t *needed);

// Copies the sampled values, components interleaved.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum FpStatus fp_profile_values(const struct FpProfile *profile,
                                double *buf,
                                size_t len,
                                size_t *needed);

// Creates an empty figure.
//
// # Safety
// `out` must be a valid pointer.
enum FpStatus fp_figure_new(struct FpFigure **out);

// Releases a figure. Null is ignored.
//
// # Safety
// `fig` must come from [`fp_figure_new`].
void fp_figure_free(struct FpFigure *fig);

// Sets axis labels and title; null arguments leave the current value.
//
// # Safety
// Pointers must be valid or null.
enum FpStatus fp_figure_set_labels(struct FpFigure *fig,
                                   const char *xlabel,
                                   const char *ylabel,
                                   const char *title);

// Draws every boundary loop, coordinates divided by the scales.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_plot_boundaries(struct FpFigure *fig,
                                 const struct FpCase *case_,
                                 double scale_x,
                                 double scale_y);

// Colours each cell by one component of a field. `colormap` may be null
// for the default; `colorbar_label` null means no colorbar, an empty
// string a colorbar without a label.
//
// # Safety
// Pointers must be valid or null where allowed.
enum FpStatus fp_plot_field(struct FpFigure *fig,
                            const struct FpCase *case_,
                            const char *field,
                            uint32_t component,
                            double scale_x,
                            double scale_y,
                            const char *colormap,
                            const char *colorbar_label);

// Draws vector arrows at cell centres, or on an `nx` x `ny` grid when both
// are non-zero.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_plot_vectors(struct FpFigure *fig,
                              const struct FpCase *case_,
                              const char *field,
                              double scale_x,
                              double scale_y,
                              size_t nx,
                              size_t ny,
                              bool normalize);

// Writes the figure as an SVG file.
//
// # Safety
// Pointers must be valid.
enum FpStatus fp_render_svg(const struct FpFigure *fig, const char *path);

// Renders the figure into `buf` as a NUL-terminated SVG document.
// `needed` (may be null) receives the size including the NUL.
//
// # Safety
// `buf` must point to `len` writable bytes.
enum FpStatus fp_render_svg_string(const struct FpFigure *fig,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

// Renders a JSON plot spec, like `flowpost plot`. `output` may be null to
// use the spec's own output path.
//
// # Safety
// Pointers must be valid or null where allowed.
enum FpStatus fp_plot_spec(const char *spec, const char *output);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWPOST_H */
