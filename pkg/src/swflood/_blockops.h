/* Per-block stage kernels.
 *
 * Every function handles one B x B block. Neighbour data comes from
 * zero-padded (B + 4)^2 tiles so the inner loops carry no bounds tests,
 * and wet/dry logic is written as selects, not branches. The loops are
 * plain maps over contiguous rows and vectorise; a dry cell costs the
 * same as a wet one.
 *
 * Operation order matches _pykernels.py term by term. Build without
 * FMA contraction and without fast-math.
 */
#ifndef SWFLOOD_BLOCKOPS_H
#define SWFLOOD_BLOCKOPS_H

#include <float.h>
#include <math.h>
#include <stdint.h>
#include <string.h>

#define SW_HALO 2
#define SW_CBRT_MAGIC 0x2A9F7893782DA1CELL

/* tile-sized scratch arrays per thread */
#define SW_K2_TILES 6
#define SW_K4_TILES 3
#define SW_K5_TILES 3
#define SW_K7_TILES 34

static inline long sw_min(long a, long b) { return a < b ? a : b; }
static inline double sw_dmax(double a, double b) { return a >= b ? a : b; }
static inline double sw_dmin(double a, double b) { return a <= b ? a : b; }

/* cube root of x >= 0: bit-level guess and four Newton steps, within 1 ulp */
static inline double sw_cbrt(double x)
{
    int64_t k;
    double y;
    memcpy(&k, &x, sizeof k);
    k = (int64_t)((double)k / 3.0) + SW_CBRT_MAGIC;
    memcpy(&y, &k, sizeof y);
    y = (y + y + x / (y * y)) / 3.0;
    y = (y + y + x / (y * y)) / 3.0;
    y = (y + y + x / (y * y)) / 3.0;
    y = (y + y + x / (y * y)) / 3.0;
    return x > 0.0 ? y : 0.0;
}

/* van Leer */
static inline double sw_limiter(double a, double b)
{
    double p = a * b;
    double r = (2.0 * p) / (a + b);
    return p > 0.0 ? r : 0.0;
}

static inline int sw_finite(double x) { return fabs(x) <= DBL_MAX; }

static void sw_gather(const double *restrict a, long ny, long nx, long j0, long i0, long T,
                      double *restrict t)
{
    long lo = i0 < SW_HALO ? SW_HALO - i0 : 0;
    long hi = sw_min(T, nx - i0 + SW_HALO);
    long r, jg;
    for (r = 0; r < T; r++) {
        double *row = t + r * T;
        jg = j0 - SW_HALO + r;
        if (jg < 0 || jg >= ny || hi <= lo) {
            memset(row, 0, T * sizeof(double));
            continue;
        }
        if (lo > 0)
            memset(row, 0, lo * sizeof(double));
        memcpy(row + lo, a + jg * nx + (i0 - SW_HALO + lo), (hi - lo) * sizeof(double));
        if (hi < T)
            memset(row + hi, 0, (T - hi) * sizeof(double));
    }
}

static inline void sw_velocity(long n, const double *restrict H, const double *restrict Q,
                               double eps, double *restrict u)
{
    long p;
    for (p = 0; p < n; p++) {
        double d = H[p];
        double r = Q[p] / d;
        u[p] = d > eps ? r : 0.0;
    }
}

/* HLL flux with hydrostatic reconstruction; normal velocity u */
static inline void sw_hll(double HL, double eL, double uL, double vL, double HR, double eR,
                          double uR, double vR, double g, double *fm_, double *fnL_,
                          double *fnR_, double *ft_)
{
    double bs = sw_dmax(eL - HL, eR - HR);
    double HLs = sw_dmax(0.0, eL - bs);
    double HRs = sw_dmax(0.0, eR - bs);
    double cL = sqrt(g * HLs), cR = sqrt(g * HRs);
    double sL = HLs <= 0.0 ? uR - 2.0 * cR : (HRs <= 0.0 ? uL - cL : sw_dmin(uL - cL, uR - cR));
    double sR = HLs <= 0.0 ? uR + cR : (HRs <= 0.0 ? uL + 2.0 * cL : sw_dmax(uL + cL, uR + cR));
    double qL = HLs * uL, qR = HRs * uR;
    double PL = 0.5 * g * HLs * HLs, PR = 0.5 * g * HRs * HRs;
    double FnL = qL * uL + PL, FnR = qR * uR + PR;
    double FtL = qL * vL, FtR = qR * vR;
    double dd = sR - sL;
    double d = dd > 0.0 ? dd : 1.0;
    double fm = qL + sL * ((qL - qR) + sR * (HRs - HLs)) / d;
    double fn = FnL + sL * ((FnL - FnR) + sR * (qR - qL)) / d;
    double ft = FtL + sL * ((FtL - FtR) + sR * (HRs * vR - HLs * vL)) / d;
    /* both sides dry; depths are non-negative */
    double Hmax = sw_dmax(HLs, HRs);
    fm = sL >= 0.0 ? qL : (sR <= 0.0 ? qR : fm);
    fn = sL >= 0.0 ? FnL : (sR <= 0.0 ? FnR : fn);
    ft = sL >= 0.0 ? FtL : (sR <= 0.0 ? FtR : ft);
    fm = Hmax <= 0.0 ? 0.0 : fm;
    fn = Hmax <= 0.0 ? 0.0 : fn;
    ft = Hmax <= 0.0 ? 0.0 : ft;
    *fm_ = fm;
    *fnL_ = fn - PL;
    *fnR_ = fn - PR;
    *ft_ = ft;
}

/* -- K2 ---------------------------------------------------------------- */

static void sw_forces_pred(long j0, long i0, long ny, long nx, long B,
                           const double *restrict H, const double *restrict HU,
                           const double *restrict HV, const double *restrict b,
                           double *restrict ax, double *restrict ay, double *restrict u0,
                           double *restrict v0, double *restrict h43, double h, double g,
                           double eps, double nu, double two_omega, double cw, double wx,
                           double wy, double *restrict scr)
{
    long T = B + 2 * SW_HALO, TT = T * T;
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c;
    double *tH = scr, *tU = scr + TT, *tV = scr + 2 * TT, *tb = scr + 3 * TT;
    double *tu = scr + 4 * TT, *tv = scr + 5 * TT;
    double h2 = 2.0 * h, hsq = h * h;
    sw_gather(H, ny, nx, j0, i0, T, tH);
    sw_gather(HU, ny, nx, j0, i0, T, tU);
    sw_gather(HV, ny, nx, j0, i0, T, tV);
    sw_gather(b, ny, nx, j0, i0, T, tb);
    sw_velocity(TT, tH, tU, eps, tu);
    sw_velocity(TT, tH, tV, eps, tv);
    for (r = 0; r < nj; r++) {
        long o = (r + SW_HALO) * T + SW_HALO, q = (j0 + r) * nx + i0;
        const double *Hc_ = tH + o, *bc_ = tb + o, *uc_ = tu + o, *vc_ = tv + o;
        double *axr = ax + q, *ayr = ay + q, *u0r = u0 + q, *v0r = v0 + q, *h43r = h43 + q;
#pragma omp simd
        for (c = 0; c < ni; c++) {
            double Hc = Hc_[c], uc = uc_[c], vc = vc_[c];
            double ec = Hc + bc_[c];
            double Hw = Hc_[c - 1], He = Hc_[c + 1], Hs = Hc_[c - T], Hn = Hc_[c + T];
            double ew = Hw + bc_[c - 1], ee = He + bc_[c + 1];
            double es = Hs + bc_[c - T], en = Hn + bc_[c + T];
            /* centred where both neighbours are wet, one-sided where one is */
            double gx = Hw > eps ? (He > eps ? (ee - ew) / h2 : (ec - ew) / h)
                                 : (He > eps ? (ee - ec) / h : 0.0);
            double gy = Hs > eps ? (Hn > eps ? (en - es) / h2 : (ec - es) / h)
                                 : (Hn > eps ? (en - ec) / h : 0.0);
            double uw = uc_[c - 1], ue = uc_[c + 1], us = uc_[c - T], un = uc_[c + T];
            double vw = vc_[c - 1], ve = vc_[c + 1], vs = vc_[c - T], vn = vc_[c + T];
            double w_ = Hw > eps ? uw : uc, e_ = He > eps ? ue : uc;
            double s_ = Hs > eps ? us : uc, n_ = Hn > eps ? un : uc;
            double lu = ((w_ + e_) + (s_ + n_) - 4.0 * uc) / hsq, lv, rx, ry, k, fx, fy;
            w_ = Hw > eps ? vw : vc;
            e_ = He > eps ? ve : vc;
            s_ = Hs > eps ? vs : vc;
            n_ = Hn > eps ? vn : vc;
            lv = ((w_ + e_) + (s_ + n_) - 4.0 * vc) / hsq;
            lu = nu != 0.0 ? lu : 0.0;
            lv = nu != 0.0 ? lv : 0.0;
            rx = wx - uc;
            ry = wy - vc;
            k = cw / Hc;
            k = (Hc > eps ? k : 0.0) * sqrt(rx * rx + ry * ry);
            fx = ((-g * gx + nu * lu) + two_omega * vc) + k * rx;
            fy = ((-g * gy + nu * lv) - two_omega * uc) + k * ry;
            axr[c] = Hc > eps ? fx : 0.0;
            ayr[c] = Hc > eps ? fy : 0.0;
            u0r[c] = Hc > eps ? uc : 0.0;
            v0r[c] = Hc > eps ? vc : 0.0;
            h43r[c] = Hc > eps ? Hc * sw_cbrt(Hc) : 0.0;
        }
    }
}

/* -- K3 ---------------------------------------------------------------- */

static void sw_dt_reduce(long j0, long i0, long ny, long nx, long B, const double *restrict H,
                         const double *restrict u0, const double *restrict v0,
                         const double *restrict ax, const double *restrict ay,
                         const double *restrict sig, const double *restrict vsx,
                         const double *restrict vsy, double h, double g, double eps, double K,
                         double *smax, double *tsrc)
{
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c;
    double kh = K * h, sm = 0.0, tm = INFINITY;
    for (r = 0; r < nj; r++) {
        long q = (j0 + r) * nx + i0;
        const double *Hr = H + q, *ur = u0 + q, *vr = v0 + q, *fxr = ax + q, *fyr = ay + q;
        const double *sr = sig + q, *vxr = vsx + q, *vyr = vsy + q;
#pragma omp simd reduction(max:sm) reduction(min:tm)
        for (c = 0; c < ni; c++) {
            double Hc = Hr[c], fx = fxr[c], fy = fyr[c], s = sr[c];
            int wet = Hc > eps;
            double u = wet ? ur[c] : 0.0, v = wet ? vr[c] : 0.0;
            double cc = sqrt(g * Hc);
            double us = sw_dmax(fabs(u), fabs(v)) + cc;
            double upx = fabs(u + copysign(sqrt(h * fabs(fx)), fx));
            double upy = fabs(v + copysign(sqrt(h * fabs(fy)), fy));
            double speed = wet ? sw_dmax(us, sw_dmax(upx, upy)) : 0.0;
            double vs = sw_dmax(fabs(vxr[c]), fabs(vyr[c]));
            double ts = (kh * kh) / (g * s);
            speed = s != 0.0 ? sw_dmax(speed, vs) : speed;
            ts = s > 0.0 ? sw_cbrt(ts) : INFINITY;
            sm = sm > speed ? sm : speed;
            tm = tm < ts ? tm : ts;
        }
    }
    *smax = sm;
    *tsrc = tm;
}

/* -- K4 ---------------------------------------------------------------- */

static void sw_predictor(long j0, long i0, long ny, long nx, long B, const double *restrict H,
                         const double *restrict u0, const double *restrict v0,
                         const double *restrict h43, const double *restrict ax,
                         const double *restrict ay, const double *restrict sig,
                         const double *restrict vsx, const double *restrict vsy,
                         const double *restrict gn2, double *restrict hh, double *restrict uh,
                         double *restrict vh, double h, double eps, double tau,
                         double *restrict scr)
{
    long T = B + 2 * SW_HALO, TT = T * T;
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c, p;
    double *tH = scr, *tu = scr + TT, *tv = scr + 2 * TT;
    double half = 0.5 * tau;
    sw_gather(H, ny, nx, j0, i0, T, tH);
    sw_gather(u0, ny, nx, j0, i0, T, tu);
    sw_gather(v0, ny, nx, j0, i0, T, tv);
    for (p = 0; p < TT; p++) {
        int w = tH[p] > eps;
        tu[p] = w ? tu[p] : 0.0;
        tv[p] = w ? tv[p] : 0.0;
    }
    for (r = 0; r < nj; r++) {
        long o = (r + SW_HALO) * T + SW_HALO, q = (j0 + r) * nx + i0;
        const double *Hc_ = tH + o, *uc_ = tu + o, *vc_ = tv + o;
        const double *sr = sig + q, *axr = ax + q, *ayr = ay + q, *vxr = vsx + q;
        const double *vyr = vsy + q, *gr = gn2 + q, *h43r = h43 + q;
        double *hhr = hh + q, *uhr = uh + q, *vhr = vh + q;
#pragma omp simd
        for (c = 0; c < ni; c++) {
            double Hc = Hc_[c], uc = uc_[c], vc = vc_[c], s = sr[c];
            int wet = Hc > eps;
            int lx = wet & (Hc_[c - 1] > eps) & (Hc_[c + 1] > eps);
            int ly = wet & (Hc_[c - T] > eps) & (Hc_[c + T] > eps);
            double sxu = sw_limiter(uc - uc_[c - 1], uc_[c + 1] - uc);
            double syv = sw_limiter(vc - vc_[c - T], vc_[c + T] - vc);
            double hm, div, mu, mv, un, vn, spd, r43, f;
            int ok;
            sxu = lx ? sxu : 0.0;
            syv = ly ? syv : 0.0;
            hm = Hc + half * s;
            div = (sxu + syv) / h;
            hhr[c] = sw_dmax(hm - half * Hc * div, 0.0);
            mu = Hc * (uc + half * axr[c]) + half * s * vxr[c];
            mv = Hc * (vc + half * ayr[c]) + half * s * vyr[c];
            ok = hm > eps;
            un = mu / hm;
            vn = mv / hm;
            un = ok ? un : 0.0;
            vn = ok ? vn : 0.0;
            spd = sqrt(un * un + vn * vn);
            r43 = s == 0.0 ? h43r[c] : hm * sw_cbrt(hm);
            f = (half * gr[c]) / r43;
            f = 1.0 + (ok ? f : 0.0) * spd;
            uhr[c] = un / f;
            vhr[c] = vn / f;
        }
    }
}

/* -- K5 ---------------------------------------------------------------- */

static void sw_forces_corr(long j0, long i0, long ny, long nx, long B,
                           const double *restrict hh, const double *restrict uh,
                           const double *restrict vh, double *restrict ax, double *restrict ay,
                           double h, double eps, double nu, double two_omega, double cw,
                           double wx, double wy, double *restrict scr)
{
    long T = B + 2 * SW_HALO, TT = T * T;
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c;
    double *th = scr, *tu = scr + TT, *tv = scr + 2 * TT;
    double hsq = h * h;
    if (nu == 0.0) {
        for (r = 0; r < nj; r++) {
            long q = (j0 + r) * nx + i0;
            const double *hr = hh + q, *ur = uh + q, *vr = vh + q;
            double *axr = ax + q, *ayr = ay + q;
            for (c = 0; c < ni; c++) {
                double hc = hr[c], uc = ur[c], vc = vr[c];
                double rx = wx - uc, ry = wy - vc, k = cw / hc;
                k = (hc > eps ? k : 0.0) * sqrt(rx * rx + ry * ry);
                axr[c] = hc > eps ? (nu * 0.0 + two_omega * vc) + k * rx : 0.0;
                ayr[c] = hc > eps ? (nu * 0.0 - two_omega * uc) + k * ry : 0.0;
            }
        }
        return;
    }
    sw_gather(hh, ny, nx, j0, i0, T, th);
    sw_gather(uh, ny, nx, j0, i0, T, tu);
    sw_gather(vh, ny, nx, j0, i0, T, tv);
    for (r = 0; r < nj; r++) {
        long o = (r + SW_HALO) * T + SW_HALO, q = (j0 + r) * nx + i0;
        const double *hc_ = th + o, *uc_ = tu + o, *vc_ = tv + o;
        double *axr = ax + q, *ayr = ay + q;
#pragma omp simd
        for (c = 0; c < ni; c++) {
            double hc = hc_[c], uc = uc_[c], vc = vc_[c];
            double hw_ = hc_[c - 1], he_ = hc_[c + 1], hs_ = hc_[c - T], hn_ = hc_[c + T];
            double uw = uc_[c - 1], ue = uc_[c + 1], us = uc_[c - T], un = uc_[c + T];
            double vw = vc_[c - 1], ve = vc_[c + 1], vs = vc_[c - T], vn = vc_[c + T];
            double w_ = hw_ > eps ? uw : uc, e_ = he_ > eps ? ue : uc;
            double s_ = hs_ > eps ? us : uc, n_ = hn_ > eps ? un : uc;
            double lu = ((w_ + e_) + (s_ + n_) - 4.0 * uc) / hsq, lv, rx, ry, k;
            w_ = hw_ > eps ? vw : vc;
            e_ = he_ > eps ? ve : vc;
            s_ = hs_ > eps ? vs : vc;
            n_ = hn_ > eps ? vn : vc;
            lv = ((w_ + e_) + (s_ + n_) - 4.0 * vc) / hsq;
            rx = wx - uc;
            ry = wy - vc;
            k = cw / hc;
            k = (hc > eps ? k : 0.0) * sqrt(rx * rx + ry * ry);
            axr[c] = hc > eps ? (nu * lu + two_omega * vc) + k * rx : 0.0;
            ayr[c] = hc > eps ? (nu * lv - two_omega * uc) + k * ry : 0.0;
        }
    }
}

/* -- K6 ---------------------------------------------------------------- */

static void sw_corrector(long j0, long i0, long ny, long nx, long B, const double *restrict H,
                         const double *restrict HU, const double *restrict HV,
                         const double *restrict hh, const double *restrict uh,
                         const double *restrict vh, const double *restrict ax,
                         const double *restrict ay, const double *restrict sig,
                         const double *restrict vsx, const double *restrict vsy,
                         const double *restrict gn2, const double *restrict h43,
                         double *restrict ht, double *restrict hut, double *restrict hvt,
                         double h, double eps, double tau, double *short_, double *drmax)
{
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c;
    double sh = 0.0, dr = 0.0;
    for (r = 0; r < nj; r++) {
        long q = (j0 + r) * nx + i0;
        const double *Hr = H + q, *HUr = HU + q, *HVr = HV + q, *hr = hh + q, *ur = uh + q;
        const double *vr = vh + q, *fxr = ax + q, *fyr = ay + q, *sr = sig + q;
        const double *vxr = vsx + q, *vyr = vsy + q, *gr = gn2 + q, *h43r = h43 + q;
        double *htr = ht + q, *hutr = hut + q, *hvtr = hvt + q;
#pragma omp simd reduction(+:sh) reduction(max:dr)
        for (c = 0; c < ni; c++) {
            double hc = hr[c], s = sr[c];
            double mu = HUr[c] + tau * (hc * fxr[c]) + tau * s * vxr[c];
            double mv = HVr[c] + tau * (hc * fyr[c]) + tau * s * vyr[c];
            double htn = Hr[c] + tau * s;
            int neg = htn < 0.0, ok;
            double spd, r43, f, d;
            sh += neg ? -htn : 0.0;
            htn = neg ? 0.0 : htn;
            ok = htn > eps;
            spd = sqrt(mu * mu + mv * mv) / htn;
            spd = ok ? spd : 0.0;
            r43 = s == 0.0 ? h43r[c] : htn * sw_cbrt(htn);
            f = (tau * gr[c]) / r43;
            f = 1.0 + (ok ? f : 0.0) * spd;
            d = tau * sw_dmax(fabs(ur[c]), fabs(vr[c])) / h;
            dr = dr > d ? dr : d;
            htr[c] = htn;
            hutr[c] = ok ? mu / f : 0.0;
            hvtr[c] = ok ? mv / f : 0.0;
        }
    }
    *short_ = sh;
    *drmax = dr;
}

/* -- K7 ---------------------------------------------------------------- */

/* face-state slots: side (e, w, n, s) x value (H, eta, u, v) */
enum { SW_E = 0, SW_W = 4, SW_N = 8, SW_S = 12 };

static inline void sw_face(double hc, double ec, double bc, double uc, double vc, int hw,
                           double sgn, double xi, double sE, double s0, double s1, double s2,
                           double t0, double t1, double t2, double shift, double *Hf,
                           double *ef, double *uf, double *vf)
{
    double Hr = (hc + s0 * xi) - t0;
    int up = hw & (Hr > 0.0);
    double bg = bc + sgn * (sE - s0);
    *Hf = up ? Hr : 0.0;
    *ef = up ? ec + (sgn * sE - shift) : bg;
    *uf = hw ? (uc + s1 * xi) - t1 : 0.0;
    *vf = hw ? (vc + s2 * xi) - t2 : 0.0;
}

/* Returns -1, or the flat index of the first cell with a non-finite flux. */
static long sw_flux(long j0, long i0, long ny, long nx, long B, const double *restrict H,
                    const double *restrict HU, const double *restrict HV,
                    const double *restrict b, const double *restrict hh,
                    const double *restrict uh, const double *restrict vh,
                    double *restrict fh, double *restrict fu, double *restrict fv,
                    double *restrict qx, double *restrict qy, const int *bcode, double h,
                    double g, double eps, double tau, double *restrict scr)
{
    long T = B + 2 * SW_HALO, TT = T * T;
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c, m, n;
    double *tH = scr, *tU = scr + TT, *tV = scr + 2 * TT, *tb = scr + 3 * TT;
    double *thh = scr + 4 * TT, *tuh = scr + 5 * TT, *tvh = scr + 6 * TT;
    double *tu = scr + 7 * TT, *tv = scr + 8 * TT, *te = scr + 9 * TT;
    double *F = scr + 10 * TT;            /* 16 face-state arrays */
    double *X = scr + 26 * TT;            /* x faces: mass, normal L, normal R, tangential */
    double *Y = scr + 30 * TT;            /* y faces */
    double half = 0.5 * tau;
    int bad = 0;

    sw_gather(H, ny, nx, j0, i0, T, tH);
    sw_gather(HU, ny, nx, j0, i0, T, tU);
    sw_gather(HV, ny, nx, j0, i0, T, tV);
    sw_gather(b, ny, nx, j0, i0, T, tb);
    sw_gather(hh, ny, nx, j0, i0, T, thh);
    sw_gather(uh, ny, nx, j0, i0, T, tuh);
    sw_gather(vh, ny, nx, j0, i0, T, tvh);
    sw_velocity(TT, tH, tU, eps, tu);
    sw_velocity(TT, tH, tV, eps, tv);
    for (m = 0; m < TT; m++)
        te[m] = tH[m] + tb[m];

    /* reconstruction on the block grown by one ring */
    for (r = 1; r < T - 1; r++) {
        long o = r * T;
        const double *Hc_ = tH + o, *ec_ = te + o, *uc_ = tu + o, *vc_ = tv + o;
        const double *hc_ = thh + o, *uhc = tuh + o, *vhc = tvh + o, *bc_ = tb + o;
        double *Fo = F + o;
#pragma omp simd
        for (c = 1; c < T - 1; c++) {
            double Hc = Hc_[c];
            int wet0 = Hc > eps;
            int lx = wet0 & (Hc_[c - 1] > eps) & (Hc_[c + 1] > eps);
            int ly = wet0 & (Hc_[c - T] > eps) & (Hc_[c + T] > eps);
            double sxH = sw_limiter(Hc - Hc_[c - 1], Hc_[c + 1] - Hc);
            double sxE = sw_limiter(ec_[c] - ec_[c - 1], ec_[c + 1] - ec_[c]);
            double sxU = sw_limiter(uc_[c] - uc_[c - 1], uc_[c + 1] - uc_[c]);
            double sxV = sw_limiter(vc_[c] - vc_[c - 1], vc_[c + 1] - vc_[c]);
            double syH = sw_limiter(Hc - Hc_[c - T], Hc_[c + T] - Hc);
            double syE = sw_limiter(ec_[c] - ec_[c - T], ec_[c + T] - ec_[c]);
            double syU = sw_limiter(uc_[c] - uc_[c - T], uc_[c + T] - uc_[c]);
            double syV = sw_limiter(vc_[c] - vc_[c - T], vc_[c + T] - vc_[c]);
            double hc = hc_[c], uc = uhc[c], vc = vhc[c], bc = bc_[c];
            int hw = hc > eps;
            double dx = half * uc / h, dy = half * vc / h;
            double ec = hc + bc, shift;
            double tH_, tU_, tV_, rH_, rU_, rV_;
            sxH = lx ? sxH : 0.0;
            sxE = lx ? sxE : 0.0;
            sxU = lx ? sxU : 0.0;
            sxV = lx ? sxV : 0.0;
            syH = ly ? syH : 0.0;
            syE = ly ? syE : 0.0;
            syU = ly ? syU : 0.0;
            syV = ly ? syV : 0.0;
            shift = sxH * dx + syH * dy;
            tH_ = syH * dy;
            tU_ = syU * dy;
            tV_ = syV * dy;
            rH_ = sxH * dx;
            rU_ = sxU * dx;
            rV_ = sxV * dx;
            sw_face(hc, ec, bc, uc, vc, hw, 0.5, 0.5 - dx, sxE, sxH, sxU, sxV, tH_, tU_, tV_,
                    shift, &Fo[(SW_E + 0) * TT + c], &Fo[(SW_E + 1) * TT + c],
                    &Fo[(SW_E + 2) * TT + c], &Fo[(SW_E + 3) * TT + c]);
            sw_face(hc, ec, bc, uc, vc, hw, -0.5, -0.5 - dx, sxE, sxH, sxU, sxV, tH_, tU_,
                    tV_, shift, &Fo[(SW_W + 0) * TT + c], &Fo[(SW_W + 1) * TT + c],
                    &Fo[(SW_W + 2) * TT + c], &Fo[(SW_W + 3) * TT + c]);
            sw_face(hc, ec, bc, uc, vc, hw, 0.5, 0.5 - dy, syE, syH, syU, syV, rH_, rU_, rV_,
                    shift, &Fo[(SW_N + 0) * TT + c], &Fo[(SW_N + 1) * TT + c],
                    &Fo[(SW_N + 2) * TT + c], &Fo[(SW_N + 3) * TT + c]);
            sw_face(hc, ec, bc, uc, vc, hw, -0.5, -0.5 - dy, syE, syH, syU, syV, rH_, rU_,
                    rV_, shift, &Fo[(SW_S + 0) * TT + c], &Fo[(SW_S + 1) * TT + c],
                    &Fo[(SW_S + 2) * TT + c], &Fo[(SW_S + 3) * TT + c]);
        }
    }

    /* domain edges: the outside face state mirrors the inside one */
    if (i0 == 0) {
        for (r = SW_HALO; r < SW_HALO + nj; r++) {
            long p = r * T + SW_HALO;
            for (m = 0; m < 4; m++)
                F[(SW_E + m) * TT + p - 1] = F[(SW_W + m) * TT + p];
            if (bcode[0] == 0)
                F[(SW_E + 2) * TT + p - 1] = -F[(SW_W + 2) * TT + p];
        }
    }
    if (i0 + ni == nx) {
        for (r = SW_HALO; r < SW_HALO + nj; r++) {
            long p = r * T + SW_HALO + ni;
            for (m = 0; m < 4; m++)
                F[(SW_W + m) * TT + p] = F[(SW_E + m) * TT + p - 1];
            if (bcode[1] == 0)
                F[(SW_W + 2) * TT + p] = -F[(SW_E + 2) * TT + p - 1];
        }
    }
    if (j0 == 0) {
        for (c = SW_HALO; c < SW_HALO + ni; c++) {
            long p = SW_HALO * T + c;
            for (m = 0; m < 4; m++)
                F[(SW_N + m) * TT + p - T] = F[(SW_S + m) * TT + p];
            if (bcode[2] == 0)
                F[(SW_N + 3) * TT + p - T] = -F[(SW_S + 3) * TT + p];
        }
    }
    if (j0 + nj == ny) {
        for (c = SW_HALO; c < SW_HALO + ni; c++) {
            long p = (SW_HALO + nj) * T + c;
            for (m = 0; m < 4; m++)
                F[(SW_S + m) * TT + p] = F[(SW_N + m) * TT + p - T];
            if (bcode[3] == 0)
                F[(SW_S + 3) * TT + p] = -F[(SW_N + 3) * TT + p - T];
        }
    }

    /* x faces: face p is the west face of cell p */
    for (r = SW_HALO; r < SW_HALO + nj; r++) {
        long o = r * T;
        const double *LH = F + SW_E * TT + o - 1, *Le = LH + TT, *Lu = LH + 2 * TT;
        const double *Lv = LH + 3 * TT;
        const double *RH = F + SW_W * TT + o, *Re = RH + TT, *Ru = RH + 2 * TT;
        const double *Rv = RH + 3 * TT;
        double *xm = X + o, *xl = X + TT + o, *xr = X + 2 * TT + o, *xt = X + 3 * TT + o;
#pragma omp simd
        for (c = SW_HALO; c < SW_HALO + ni + 1; c++)
            sw_hll(LH[c], Le[c], Lu[c], Lv[c], RH[c], Re[c], Ru[c], Rv[c], g, &xm[c], &xl[c],
                   &xr[c], &xt[c]);
    }
    /* y faces: face p is the south face of cell p; normal velocity v */
    for (r = SW_HALO; r < SW_HALO + nj + 1; r++) {
        long o = r * T;
        const double *LH = F + SW_N * TT + o - T, *Le = LH + TT, *Lu = LH + 2 * TT;
        const double *Lv = LH + 3 * TT;
        const double *RH = F + SW_S * TT + o, *Re = RH + TT, *Ru = RH + 2 * TT;
        const double *Rv = RH + 3 * TT;
        double *ym = Y + o, *yl = Y + TT + o, *yr = Y + 2 * TT + o, *yt = Y + 3 * TT + o;
#pragma omp simd
        for (c = SW_HALO; c < SW_HALO + ni; c++)
            sw_hll(LH[c], Le[c], Lv[c], Lu[c], RH[c], Re[c], Rv[c], Ru[c], g, &ym[c], &yl[c],
                   &yr[c], &yt[c]);
    }

    for (r = 0; r < nj; r++) {
        long o = (r + SW_HALO) * T + SW_HALO, q = (j0 + r) * nx + i0;
        const double *xm = X + o, *xl = X + TT + o, *xr = X + 2 * TT + o, *xt = X + 3 * TT + o;
        const double *ym = Y + o, *yl = Y + TT + o, *yr = Y + 2 * TT + o, *yt = Y + 3 * TT + o;
        const double *HE = F + SW_E * TT + o, *eE = HE + TT, *HW = F + SW_W * TT + o;
        const double *eW = HW + TT, *HN = F + SW_N * TT + o, *eN = HN + TT;
        const double *HS = F + SW_S * TT + o, *eS = HS + TT;
        double *fhr = fh + q, *fur = fu + q, *fvr = fv + q;
#pragma omp simd reduction(|:bad)
        for (c = 0; c < ni; c++) {
            double scx = -0.5 * g * (HW[c] + HE[c]) * (eE[c] - eW[c]);
            double scy = -0.5 * g * (HS[c] + HN[c]) * (eN[c] - eS[c]);
            double cfh = (xm[c] - xm[c + 1]) + (ym[c] - ym[c + T]);
            double cfu = ((xr[c] - xl[c + 1]) + (yt[c] - yt[c + T])) + scx;
            double cfv = ((xt[c] - xt[c + 1]) + (yr[c] - yl[c + T])) + scy;
            bad |= !(sw_finite(cfh) & sw_finite(cfu) & sw_finite(cfv));
            fhr[c] = cfh;
            fur[c] = cfu;
            fvr[c] = cfv;
        }
    }

    /* owned faces: west and south of every cell, plus the east and north domain edges */
    n = ni + (i0 + ni == nx);
    for (r = 0; r < nj; r++)
        memcpy(qx + (j0 + r) * (nx + 1) + i0, X + (r + SW_HALO) * T + SW_HALO,
               n * sizeof(double));
    n = nj + (j0 + nj == ny);
    for (r = 0; r < n; r++)
        memcpy(qy + (j0 + r) * nx + i0, Y + (r + SW_HALO) * T + SW_HALO, ni * sizeof(double));

    if (bad) {
        for (r = 0; r < nj; r++)
            for (c = 0; c < ni; c++) {
                long q = (j0 + r) * nx + i0 + c;
                if (!(sw_finite(fh[q]) && sw_finite(fu[q]) && sw_finite(fv[q])))
                    return q;
            }
    }
    return -1;
}

/* -- K8 ---------------------------------------------------------------- */

static double sw_final(long j0, long i0, long ny, long nx, long B, int lag,
                       double *H, double *HU, double *HV, double *ht, double *hut, double *hvt,
                       double *restrict fh, double *restrict fu, double *restrict fv,
                       double *restrict ax, double *restrict ay, double *restrict hh,
                       double *restrict uh, double *restrict vh, double dt_h, double eps)
{
    long nj = sw_min(B, ny - j0), ni = sw_min(B, nx - i0), r, c;
    size_t row = ni * sizeof(double);
    double d = 0.0;
    for (r = 0; r < nj; r++) {
        long q = (j0 + r) * nx + i0;
        double *Hr = H + q, *HUr = HU + q, *HVr = HV + q;
        const double *bh = (lag ? ht : H) + q, *bu = (lag ? hut : HU) + q;
        const double *bv = (lag ? hvt : HV) + q;
        const double *fhr = fh + q, *fur = fu + q, *fvr = fv + q;
#pragma omp simd reduction(+:d)
        for (c = 0; c < ni; c++) {
            double hn = bh[c] + dt_h * fhr[c];
            double un = bu[c] + dt_h * fur[c], vn = bv[c] + dt_h * fvr[c];
            int neg = hn < 0.0, wet;
            d += neg ? -hn : 0.0;
            hn = neg ? 0.0 : hn;
            wet = hn > eps;
            Hr[c] = hn;
            HUr[c] = wet ? un : 0.0;
            HVr[c] = wet ? vn : 0.0;
        }
        memset(ht + q, 0, row);
        memset(hut + q, 0, row);
        memset(hvt + q, 0, row);
        memset(fh + q, 0, row);
        memset(fu + q, 0, row);
        memset(fv + q, 0, row);
        memset(ax + q, 0, row);
        memset(ay + q, 0, row);
        memset(hh + q, 0, row);
        memset(uh + q, 0, row);
        memset(vh + q, 0, row);
    }
    return d;
}

#endif
