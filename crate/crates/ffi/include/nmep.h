/* C interface to the nmep waveguide-QED delay-system library.
 *
 * Handles are opaque; create and release them with the paired _new/_free
 * calls. Every fallible function returns an NmepStatus and writes results
 * through out-pointers. The most recent failure message on the calling
 * thread is available from nmep_last_error_message() until the next failing
 * call on that thread. Handles are immutable after construction and may be
 * shared across threads.
 *
 * Maintained by hand; the Rust test `header_covers_every_export` keeps this
 * file in sync with the exported symbol list.
 */

#ifndef NMEP_H
#define NMEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum NmepStatus {
  NMEP_STATUS_OK = 0,
  NMEP_STATUS_INVALID_INPUT = 1,
  NMEP_STATUS_DOMAIN = 2,
  NMEP_STATUS_NO_CONVERGENCE = 3,
  NMEP_STATUS_INFEASIBLE = 4,
  /* Structured "no exceptional point" outcome (not an error). */
  NMEP_STATUS_NO_EP = 5,
  NMEP_STATUS_GRID_MISALIGNED = 6,
  NMEP_STATUS_SERIES_OVERFLOW = 7,
  NMEP_STATUS_INCOMPLETE_SPECTRUM = 8,
  NMEP_STATUS_CONTOUR_NEAR_ZERO = 9,
  NMEP_STATUS_MULTIPLE_POLE = 10,
  NMEP_STATUS_NO_PHYSICAL_COUPLINGS = 11,
  NMEP_STATUS_IO = 12,
  NMEP_STATUS_NULL_POINTER = 13,
  NMEP_STATUS_PANIC = 14,
} NmepStatus;

/* Opaque handles. */
typedef struct NmepDelaySystem NmepDelaySystem;
typedef struct NmepTimeSeries NmepTimeSeries;
typedef struct NmepPoleSet NmepPoleSet;
typedef struct NmepEpReport NmepEpReport;

/* One pole row: characteristic root, optional Lambert-branch label,
 * residue weight 1/D'(s) (zero when multiplicity > 1). */
typedef struct NmepPole {
  int32_t has_branch;
  int32_t branch;
  double s_re;
  double s_im;
  double residue_re;
  double residue_im;
  size_t multiplicity;
} NmepPole;

/* Diagnostics ----------------------------------------------------------- */

const char *nmep_last_error_message(void);
void nmep_string_free(char *s);

/* Special functions ------------------------------------------------------ */

/* Branch n of the Lambert W function at z = re + i*im. */
NmepStatus nmep_lambert_w(int32_t branch, double re, double im, double *out_re,
                          double *out_im);

/* Delay systems ----------------------------------------------------------
 * The canonical system is da/dt = sum_m c_m a(t - m*tau) Theta(t - m*tau);
 * coefficient index = delay multiplier. */

NmepStatus nmep_delay_system_new(double tau, const double *coeffs_re,
                                 const double *coeffs_im, size_t len,
                                 NmepDelaySystem **out);
NmepStatus nmep_delay_system_single(double gamma, double phi, double tau,
                                    NmepDelaySystem **out);
NmepStatus nmep_giant_atom_delay_system(const double *couplings, size_t n,
                                        double group_velocity, double tau,
                                        double phi, NmepDelaySystem **out);
NmepStatus nmep_collective_delay_system(double gamma, double beta,
                                        double phase, double tau,
                                        NmepDelaySystem **out);
void nmep_delay_system_free(NmepDelaySystem *sys);

/* D^(order)(s) of the characteristic function, order <= 6. */
NmepStatus nmep_char_function(const NmepDelaySystem *sys, double s_re,
                              double s_im, size_t order, double *out_re,
                              double *out_im);

/* Time domain ------------------------------------------------------------ */

/* Fourth-order method-of-steps integration from a(0) = a0 with zero
 * history; tau must be an integer number of steps dt. */
NmepStatus nmep_integrate(const NmepDelaySystem *sys, double a0_re,
                          double a0_im, double t_max, double dt,
                          NmepTimeSeries **out);

/* Exact series amplitude of the single-delay system at time t. */
NmepStatus nmep_series_amplitude(double gamma, double phi, double tau,
                                 double t, double *out_re, double *out_im);

/* Two-pole pseudomode solution x'' - (s1+s2) x' + s1 s2 x = 0 from
 * x(0) = a0 and x'(0) = slope0. */
NmepStatus nmep_pseudomode_two_pole(double s1_re, double s1_im, double s2_re,
                                    double s2_im, double a0_re, double a0_im,
                                    double slope0_re, double slope0_im,
                                    double t_max, double dt,
                                    NmepTimeSeries **out);

size_t nmep_time_series_len(const NmepTimeSeries *ts);
double nmep_time_series_dt(const NmepTimeSeries *ts);
NmepStatus nmep_time_series_sample(const NmepTimeSeries *ts, size_t index,
                                   double *out_t, double *out_re,
                                   double *out_im);
void nmep_time_series_free(NmepTimeSeries *ts);

/* Laplace-domain spectra -------------------------------------------------- */

/* Closed-form pole set over Lambert branches n_min..n_max inclusive;
 * single-delay systems only. */
NmepStatus nmep_poles_closed_form(const NmepDelaySystem *sys, int32_t n_min,
                                  int32_t n_max, NmepPoleSet **out);

/* Newton search over [re_min, re_max] x [im_min, im_max], certified by the
 * argument principle. */
NmepStatus nmep_poles_search(const NmepDelaySystem *sys, double re_min,
                             double re_max, double im_min, double im_max,
                             size_t max_poles, NmepPoleSet **out);

/* Zero count (with multiplicity) inside the rectangle. */
NmepStatus nmep_argument_principle_count(const NmepDelaySystem *sys,
                                         double re_min, double re_max,
                                         double im_min, double im_max,
                                         size_t *out_count);

size_t nmep_pole_set_len(const NmepPoleSet *ps);
NmepStatus nmep_pole_set_get(const NmepPoleSet *ps, size_t index,
                             NmepPole *out);
void nmep_pole_set_free(NmepPoleSet *ps);

/* Residue reconstruction sum_n exp(s_n t) / D'(s_n) at time t > 0 for unit
 * initial amplitude; rejects multiplicity-flagged poles. */
NmepStatus nmep_residue_sum(const NmepDelaySystem *sys, const NmepPoleSet *ps,
                            double t, double *out_re, double *out_im);

/* Exceptional points ------------------------------------------------------ */

/* Second-order point of the two-point atom; NMEP_STATUS_NO_EP off the
 * superradiant phase. */
NmepStatus nmep_find_ep2(double gamma, double phi, NmepEpReport **out);

/* Third-order point of the three-point atom with g1, g2 prescribed
 * (phi must be 0). */
NmepStatus nmep_find_ep3(double g1, double g2, double phi,
                         NmepEpReport **out);

/* Order-n design at rate s_ep < 0 and delay tau (phi must be 0);
 * NMEP_STATUS_INFEASIBLE below the delay bound. */
NmepStatus nmep_design_ep(size_t order, double s_ep, double tau, double phi,
                          NmepEpReport **out);

/* |D|, |D'|, ..., |D^(order-1)| at a candidate point; out_residuals must
 * hold `order` doubles. */
NmepStatus nmep_ep_residuals(const NmepDelaySystem *sys, double s_re,
                             double s_im, size_t order,
                             double *out_residuals);

size_t nmep_ep_report_order(const NmepEpReport *report);
double nmep_ep_report_tau(const NmepEpReport *report);
NmepStatus nmep_ep_report_s(const NmepEpReport *report, double *out_re,
                            double *out_im);
NmepStatus nmep_ep_report_parameter(const NmepEpReport *report,
                                    const char *name, double *out_value);
/* JSON rendering of a report; release with nmep_string_free. */
char *nmep_ep_report_to_json(const NmepEpReport *report);
void nmep_ep_report_free(NmepEpReport *report);

/* Recover real couplings g_1..g_n from quadratic delay-class weights
 * K_0..K_{n-1}; out_g must hold n doubles. */
NmepStatus nmep_hankel_invert(const double *k, size_t n, double *out_g);

/* Critical dimensionless separation eta_c = 2 W_0(1/(e beta)) of the
 * collectively emitting pair. */
NmepStatus nmep_collective_critical_distance(double beta, double *out_eta);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NMEP_H */
