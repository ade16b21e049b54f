#ifndef FRACBERN_H
#define FRACBERN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; `FB_STATUS_OK` is zero.
typedef enum FbStatus {
  FB_STATUS_OK = 0,
  FB_STATUS_NULL_POINTER = 1,
  FB_STATUS_PARAMETER = 2,
  FB_STATUS_RANGE = 3,
  FB_STATUS_NUMERICAL = 4,
  FB_STATUS_CONVERGENCE = 5,
  FB_STATUS_PRECONDITION = 6,
  FB_STATUS_INFEASIBLE = 7,
  FB_STATUS_IO = 8,
  FB_STATUS_INTERNAL = 9,
  FB_STATUS_PANIC = 10,
} FbStatus;

// Positive cubature with certified exactness.
typedef struct FbCubature FbCubature;

// Zonal kernel Σ c_k E_k^{(α,β)}(t).
typedef struct FbKernel FbKernel;

// Normalized doubling weight.
typedef struct FbWeight FbWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fb_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length without the NUL.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t fb_last_error(char *buf, size_t len);

// Builds G_{n,r} = Σ η(k/n)(k(k+α+β+1))^{r/2} E_k^{(α,β)}.
//
// # Safety
// `out_kernel` must be a valid pointer; the handle written there is owned by the caller.
enum FbStatus fb_kernel_g_new(size_t n,
                              double r,
                              double alpha,
                              double beta,
                              struct FbKernel **out_kernel);

// Releases a kernel; NULL is ignored.
//
// # Safety
// `kernel` must be NULL or a handle from `fb_kernel_g_new` not yet freed.
void fb_kernel_free(struct FbKernel *kernel);

// Polynomial degree of the kernel.
//
// # Safety
// `kernel` must be a live handle and `out_degree` a valid pointer.
enum FbStatus fb_kernel_degree(const struct FbKernel *kernel, size_t *out_degree);

// Evaluates the kernel at t ∈ [−1, 1].
//
// # Safety
// `kernel` must be a live handle and `out_value` a valid pointer.
enum FbStatus fb_kernel_eval(const struct FbKernel *kernel, double t, double *out_value);

// ‖kernel‖_{p,α,β} with relative tolerance `tol` (≤ 0 selects the default).
//
// # Safety
// `kernel` must be a live handle and `out_value` a valid pointer.
enum FbStatus fb_kernel_norm(const struct FbKernel *kernel,
                             double p,
                             double tol,
                             double *out_value);

// Parses "unit" or "power:a1,a2,a3".
//
// # Safety
// `spec` must be a NUL-terminated string and `out_weight` a valid pointer.
enum FbStatus fb_weight_parse(const char *spec, struct FbWeight **out_weight);

// Releases a weight; NULL is ignored.
//
// # Safety
// `weight` must be NULL or a handle from `fb_weight_parse` not yet freed.
void fb_weight_free(struct FbWeight *weight);

// Normalized weight value at the unit vector (x, y, z).
//
// # Safety
// `weight` must be a live handle and `out_value` a valid pointer.
enum FbStatus fb_weight_eval(const struct FbWeight *weight,
                             double x,
                             double y,
                             double z,
                             double *out_value);

// Dyadic growth exponent s_w.
//
// # Safety
// `weight` must be a live handle and `out_value` a valid pointer.
enum FbStatus fb_weight_s_w(const struct FbWeight *weight, double *out_value);

// Positive cubature exact on Π_{4n} for the weight, nodes δ/n-separated.
//
// # Safety
// `weight` must be a live handle and `out_cubature` a valid pointer.
enum FbStatus fb_cubature_build(const struct FbWeight *weight,
                                size_t n,
                                double delta,
                                uint64_t seed,
                                struct FbCubature **out_cubature);

// Releases a cubature; NULL is ignored.
//
// # Safety
// `cubature` must be NULL or a handle from `fb_cubature_build` not yet freed.
void fb_cubature_free(struct FbCubature *cubature);

// Node count, exactness degree and certified moment residual.
//
// # Safety
// `cubature` must be a live handle; each out pointer may be NULL.
enum FbStatus fb_cubature_info(const struct FbCubature *cubature,
                               size_t *out_len,
                               size_t *out_degree,
                               double *out_residual);

// Copies nodes (x, y, z triples) and weights into caller buffers of `capacity`
// nodes; fails with a range status when the cubature is larger.
//
// # Safety
// `xyz` must hold 3·capacity doubles and `weights` capacity doubles.
enum FbStatus fb_cubature_nodes(const struct FbCubature *cubature,
                                double *xyz,
                                double *weights,
                                size_t capacity);

// Predicted exponent and log power of the sharp Bernstein constant.
// `mode` is "unweighted-thm1.1", "jacobi-thm2.3" or "doubling-thm4.1".
//
// # Safety
// `mode` must be a NUL-terminated string; out pointers must be valid.
enum FbStatus fb_predict_rate(const char *mode,
                              size_t d,
                              double alpha,
                              double s_w,
                              double p,
                              double r,
                              double *out_exponent,
                              double *out_log_power);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACBERN_H */
