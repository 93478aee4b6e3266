# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stage kernels.

OpenMP wrappers around the per-block C kernels in ``_blockops.h``. Same
signatures and formulas as ``_pykernels``. Each block writes only its own
cells (and its owned faces), and every reduction is returned per block,
so results do not depend on the thread count.
"""

from cython.parallel cimport parallel, prange
from libc.stdlib cimport free, malloc

import numpy as np

NAME = "cython"


cdef extern from "_blockops.h" nogil:
    int K2_TILES "SW_K2_TILES"
    int K4_TILES "SW_K4_TILES"
    int K5_TILES "SW_K5_TILES"
    int K7_TILES "SW_K7_TILES"
    double sw_cbrt(double x)
    void sw_hll(double HL, double eL, double uL, double vL, double HR, double eR, double uR,
                double vR, double g, double* fm, double* fnL, double* fnR, double* ft)
    void sw_forces_pred(long j0, long i0, long ny, long nx, long B, const double* H,
                        const double* HU, const double* HV, const double* b, double* ax,
                        double* ay, double* u0, double* v0, double* h43, double h, double g,
                        double eps, double nu, double two_omega, double cw, double wx,
                        double wy, double* scr)
    void sw_dt_reduce(long j0, long i0, long ny, long nx, long B, const double* H,
                      const double* u0, const double* v0, const double* ax, const double* ay,
                      const double* sig, const double* vsx, const double* vsy, double h,
                      double g, double eps, double K, double* smax, double* tsrc)
    void sw_predictor(long j0, long i0, long ny, long nx, long B, const double* H,
                      const double* u0, const double* v0, const double* h43, const double* ax,
                      const double* ay, const double* sig, const double* vsx,
                      const double* vsy, const double* gn2, double* hh, double* uh,
                      double* vh, double h, double eps, double tau, double* scr)
    void sw_forces_corr(long j0, long i0, long ny, long nx, long B, const double* hh,
                        const double* uh, const double* vh, double* ax, double* ay, double h,
                        double eps, double nu, double two_omega, double cw, double wx,
                        double wy, double* scr)
    void sw_corrector(long j0, long i0, long ny, long nx, long B, const double* H,
                      const double* HU, const double* HV, const double* hh, const double* uh,
                      const double* vh, const double* ax, const double* ay, const double* sig,
                      const double* vsx, const double* vsy, const double* gn2,
                      const double* h43, double* ht, double* hut, double* hvt, double h,
                      double eps, double tau, double* short_, double* drmax)
    long sw_flux(long j0, long i0, long ny, long nx, long B, const double* H,
                 const double* HU, const double* HV, const double* b, const double* hh,
                 const double* uh, const double* vh, double* fh, double* fu, double* fv,
                 double* qx, double* qy, const int* bcode, double h, double g, double eps,
                 double tau, double* scr)
    double sw_final(long j0, long i0, long ny, long nx, long B, int lag, double* H,
                    double* HU, double* HV, double* ht, double* hut, double* hvt, double* fh,
                    double* fu, double* fv, double* ax, double* ay, double* hh, double* uh,
                    double* vh, double dt_h, double eps)


def cbrt(const double[::1] x):
    """Cube root used by the kernels, elementwise; matches the numpy backend bit for bit."""
    out = np.empty(x.shape[0])
    cdef double[::1] o = out
    cdef long k
    for k in range(x.shape[0]):
        o[k] = sw_cbrt(x[k])
    return out


def face_flux(double HL, double eL, double uL, double vL, double HR, double eR, double uR,
              double vR, double g):
    cdef double fm, fnl, fnr, ft
    sw_hll(HL, eL, uL, vL, HR, eR, uR, vR, g, &fm, &fnl, &fnr, &ft)
    return fm, fnl, fnr, ft


cdef int _scratch_failed(int[::1] status):
    cdef long k
    for k in range(status.shape[0]):
        if status[k] != 0:
            return 1
    return 0


# -- K1 -------------------------------------------------------------------


def block_mask(const double[:, ::1] H, const int[:, ::1] index_q, double eps, long B,
               int[:, ::1] interior, int[:, ::1] halo):
    cdef long ny = H.shape[0], nx = H.shape[1]
    cdef long j, i, lx, ly, bj, bi, jj, ii
    cdef int f, e
    interior[:, :] = 0
    halo[:, :] = 0
    with nogil:
        for j in range(ny):
            bj = j // B
            ly = j - bj * B
            for i in range(nx):
                bi = i // B
                lx = i - bi * B
                if H[j, i] > eps or index_q[j, i] > 0:
                    interior[bj, bi] += 1
                e = 0
                if lx == 0:
                    ii = i - 1 if i > 0 else 0
                    if H[j, ii] > eps or index_q[j, ii] > 0:
                        e = 1
                if lx == B - 1 and e == 0:
                    ii = i + 1 if i < nx - 1 else nx - 1
                    if H[j, ii] > eps or index_q[j, ii] > 0:
                        e = 1
                if ly == 0 and e == 0:
                    jj = j - 1 if j > 0 else 0
                    if H[jj, i] > eps or index_q[jj, i] > 0:
                        e = 1
                if ly == B - 1 and e == 0:
                    jj = j + 1 if j < ny - 1 else ny - 1
                    if H[jj, i] > eps or index_q[jj, i] > 0:
                        e = 1
                halo[bj, bi] += e


# -- K2 -------------------------------------------------------------------


def forces_predictor(const int[:, ::1] blocks, long B, const double[:, ::1] H,
                     const double[:, ::1] HU, const double[:, ::1] HV, const double[:, ::1] b,
                     double[:, ::1] ax, double[:, ::1] ay, double[:, ::1] u0, double[:, ::1] v0,
                     double[:, ::1] h43, double h, double g, double eps,
                     double nu, double two_omega, double cw, double wx, double wy, int workers=1):
    cdef long nb = blocks.shape[0], ny = H.shape[0], nx = H.shape[1]
    cdef long k, n = K2_TILES * (B + 4) * (B + 4)
    cdef double* scr
    cdef int[::1] fail = np.zeros(max(workers, 1), dtype=np.int32)
    if nb == 0:
        return
    with nogil, parallel(num_threads=workers):
        scr = <double*> malloc(n * sizeof(double))
        if scr == NULL:
            fail[0] = 1
        else:
            for k in prange(nb, schedule="dynamic"):
                sw_forces_pred(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &H[0, 0],
                               &HU[0, 0], &HV[0, 0], &b[0, 0], &ax[0, 0], &ay[0, 0],
                               &u0[0, 0], &v0[0, 0], &h43[0, 0], h, g, eps, nu, two_omega, cw,
                               wx, wy, scr)
            free(scr)
    if _scratch_failed(fail):
        raise MemoryError("kernel scratch allocation failed")


# -- K3 -------------------------------------------------------------------


def dt_reduce(const int[:, ::1] blocks, long B, const double[:, ::1] H, const double[:, ::1] u0,
              const double[:, ::1] v0, const double[:, ::1] ax, const double[:, ::1] ay,
              const double[:, ::1] sig, const double[:, ::1] vsx, const double[:, ::1] vsy,
              double h, double g, double eps, double K, double[::1] smax, double[::1] tsrc,
              int workers=1):
    cdef long nb = blocks.shape[0], ny = H.shape[0], nx = H.shape[1]
    cdef long k
    if nb == 0:
        return
    for k in prange(nb, nogil=True, num_threads=workers, schedule="dynamic"):
        sw_dt_reduce(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &H[0, 0], &u0[0, 0],
                     &v0[0, 0], &ax[0, 0], &ay[0, 0], &sig[0, 0], &vsx[0, 0], &vsy[0, 0], h, g,
                     eps, K, &smax[k], &tsrc[k])


# -- K4 -------------------------------------------------------------------


def sph_predictor(const int[:, ::1] blocks, long B, const double[:, ::1] H,
                  const double[:, ::1] u0, const double[:, ::1] v0, const double[:, ::1] h43,
                  const double[:, ::1] ax,
                  const double[:, ::1] ay, const double[:, ::1] sig, const double[:, ::1] vsx,
                  const double[:, ::1] vsy, const double[:, ::1] gn2, double[:, ::1] hh,
                  double[:, ::1] uh, double[:, ::1] vh, double h, double eps, double tau,
                  int workers=1):
    cdef long nb = blocks.shape[0], ny = H.shape[0], nx = H.shape[1]
    cdef long k, n = K4_TILES * (B + 4) * (B + 4)
    cdef double* scr
    cdef int[::1] fail = np.zeros(max(workers, 1), dtype=np.int32)
    if nb == 0:
        return
    with nogil, parallel(num_threads=workers):
        scr = <double*> malloc(n * sizeof(double))
        if scr == NULL:
            fail[0] = 1
        else:
            for k in prange(nb, schedule="dynamic"):
                sw_predictor(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &H[0, 0], &u0[0, 0],
                             &v0[0, 0], &h43[0, 0], &ax[0, 0], &ay[0, 0], &sig[0, 0],
                             &vsx[0, 0], &vsy[0, 0], &gn2[0, 0], &hh[0, 0], &uh[0, 0],
                             &vh[0, 0], h, eps, tau, scr)
            free(scr)
    if _scratch_failed(fail):
        raise MemoryError("kernel scratch allocation failed")


# -- K5 -------------------------------------------------------------------


def forces_corrector(const int[:, ::1] blocks, long B, const double[:, ::1] hh,
                     const double[:, ::1] uh, const double[:, ::1] vh, double[:, ::1] ax,
                     double[:, ::1] ay, double h, double eps, double nu, double two_omega,
                     double cw, double wx, double wy, int workers=1):
    cdef long nb = blocks.shape[0], ny = hh.shape[0], nx = hh.shape[1]
    cdef long k, n = K5_TILES * (B + 4) * (B + 4)
    cdef double* scr
    cdef int[::1] fail = np.zeros(max(workers, 1), dtype=np.int32)
    if nb == 0:
        return
    with nogil, parallel(num_threads=workers):
        scr = <double*> malloc(n * sizeof(double))
        if scr == NULL:
            fail[0] = 1
        else:
            for k in prange(nb, schedule="dynamic"):
                sw_forces_corr(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &hh[0, 0],
                               &uh[0, 0], &vh[0, 0], &ax[0, 0], &ay[0, 0], h, eps, nu,
                               two_omega, cw, wx, wy, scr)
            free(scr)
    if _scratch_failed(fail):
        raise MemoryError("kernel scratch allocation failed")


# -- K6 -------------------------------------------------------------------


def sph_corrector(const int[:, ::1] blocks, long B, const double[:, ::1] H,
                  const double[:, ::1] HU, const double[:, ::1] HV, const double[:, ::1] hh,
                  const double[:, ::1] uh, const double[:, ::1] vh, const double[:, ::1] ax,
                  const double[:, ::1] ay, const double[:, ::1] sig, const double[:, ::1] vsx,
                  const double[:, ::1] vsy, const double[:, ::1] gn2, const double[:, ::1] h43,
                  double[:, ::1] ht, double[:, ::1] hut, double[:, ::1] hvt, double h, double eps,
                  double tau, double[::1] short, double[::1] drmax, int workers=1):
    cdef long nb = blocks.shape[0], ny = H.shape[0], nx = H.shape[1]
    cdef long k
    if nb == 0:
        return
    for k in prange(nb, nogil=True, num_threads=workers, schedule="dynamic"):
        sw_corrector(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &H[0, 0], &HU[0, 0],
                     &HV[0, 0], &hh[0, 0], &uh[0, 0], &vh[0, 0], &ax[0, 0], &ay[0, 0],
                     &sig[0, 0], &vsx[0, 0], &vsy[0, 0], &gn2[0, 0], &h43[0, 0], &ht[0, 0],
                     &hut[0, 0], &hvt[0, 0], h, eps, tau, &short[k], &drmax[k])


# -- K7 -------------------------------------------------------------------


def tvd_flux(const int[:, ::1] blocks, long B, const double[:, ::1] H, const double[:, ::1] HU,
             const double[:, ::1] HV, const double[:, ::1] b, const double[:, ::1] hh,
             const double[:, ::1] uh, const double[:, ::1] vh, double[:, ::1] fh,
             double[:, ::1] fu, double[:, ::1] fv, double[:, ::1] qx, double[:, ::1] qy,
             const int[::1] bc, double h, double g, double eps, double tau, int workers=1):
    cdef long nb = blocks.shape[0], ny = H.shape[0], nx = H.shape[1]
    cdef long k, r, n = K7_TILES * (B + 4) * (B + 4)
    cdef double* scr
    cdef long[::1] bad
    if nb == 0:
        return
    bad = np.full(nb, -1, dtype=np.int64)
    with nogil, parallel(num_threads=workers):
        scr = <double*> malloc(n * sizeof(double))
        if scr != NULL:
            for k in prange(nb, schedule="dynamic"):
                bad[k] = sw_flux(blocks[k, 0] * B, blocks[k, 1] * B, ny, nx, B, &H[0, 0],
                                 &HU[0, 0], &HV[0, 0], &b[0, 0], &hh[0, 0], &uh[0, 0],
                                 &vh[0, 0], &fh[0, 0], &fu[0, 0], &fv[0, 0], &qx[0, 0],
                                 &qy[0, 0], &bc[0], h, g, eps, tau, scr)
            free(scr)
        else:
            for k in prange(nb, schedule="static"):
                bad[k] = -2
    for k in range(nb):
        r = bad[k]
        if r == -2:
            raise MemoryError("flux stage scratch allocation failed")
        if r >= 0:
            raise FloatingPointError(f"non-finite flux at cell ({r % nx}, {r // nx})")


# -- K8 -------------------------------------------------------------------


def final_update(long B, const int[:, ::1] interior, const int[:, ::1] halo, double[:, ::1] H,
                 double[:, ::1] HU, double[:, ::1] HV, double[:, ::1] ht, double[:, ::1] hut,
                 double[:, ::1] hvt, double[:, ::1] fh, double[:, ::1] fu, double[:, ::1] fv,
                 double[:, ::1] ax, double[:, ::1] ay, double[:, ::1] hh, double[:, ::1] uh,
                 double[:, ::1] vh, double h, double eps, double tau, double[:, ::1] deficit,
                 int workers=1):
    cdef long ny = H.shape[0], nx = H.shape[1], nby = interior.shape[0], nbx = interior.shape[1]
    cdef long k, bj, bi
    cdef double dt_h = tau / h
    for k in prange(nby * nbx, nogil=True, num_threads=workers, schedule="dynamic"):
        bj = k // nbx
        bi = k - bj * nbx
        if interior[bj, bi] > 0 or halo[bj, bi] > 0:
            deficit[bj, bi] = sw_final(bj * B, bi * B, ny, nx, B, interior[bj, bi] > 0,
                                       &H[0, 0], &HU[0, 0], &HV[0, 0], &ht[0, 0], &hut[0, 0],
                                       &hvt[0, 0], &fh[0, 0], &fu[0, 0], &fv[0, 0], &ax[0, 0],
                                       &ay[0, 0], &hh[0, 0], &uh[0, 0], &vh[0, 0], dt_h, eps)
        else:
            deficit[bj, bi] = 0.0
