"""Pure numpy implementation of the stage kernels.

Each kernel receives the list of blocks it must process as an ``(nb, 2)``
int array of ``(block_row, block_col)``. The blocks are gathered into a
stack of ``(B + 4) x (B + 4)`` tiles (two-cell halo), evaluated with
vectorised numpy, and the ``B x B`` centres are scattered back. Cells
outside the domain are padded with zeros and are therefore dry.

Every formula mirrors ``_kernels.pyx`` operation by operation.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"
HALO = 2


class _Tiles:
    def __init__(self, blocks, B, shape):
        self.blocks = np.asarray(blocks, dtype=np.int64).reshape(-1, 2)
        self.B = B
        self.ny, self.nx = shape
        self.nby = -(-self.ny // B)
        self.nbx = -(-self.nx // B)
        T = B + 2 * HALO
        off = np.arange(T)
        self.rows = self.blocks[:, 0, None] * B + off  # padded coordinates
        self.cols = self.blocks[:, 1, None] * B + off
        # global cell coordinates of every tile row/column
        self.gy = self.rows - HALO
        self.gx = self.cols - HALO

    def __len__(self):
        return len(self.blocks)

    def gather(self, a):
        p = np.zeros((self.nby * self.B + 2 * HALO, self.nbx * self.B + 2 * HALO), dtype=a.dtype)
        p[HALO:HALO + self.ny, HALO:HALO + self.nx] = a
        return p[self.rows[:, :, None], self.cols[:, None, :]]

    def scatter(self, a, centre):
        B = self.B
        full = np.zeros((self.nby * B, self.nbx * B), dtype=a.dtype)
        full[:self.ny, :self.nx] = a
        full.reshape(self.nby, B, self.nbx, B)[self.blocks[:, 0], :, self.blocks[:, 1], :] = centre
        a[...] = full[:self.ny, :self.nx]


def _v(a, B, dy=0, dx=0, e=0):
    """View of the tile region grown by ``e`` cells and shifted by ``(dy, dx)``."""
    lo = HALO - e
    hi = HALO + B + e
    return a[:, lo + dy:hi + dy, lo + dx:hi + dx]


def _limiter(a, b):
    # van Leer
    p = a * b
    return _div(2.0 * p, a + b, p > 0)


_CBRT_MAGIC = np.int64(0x2A9F7893782DA1CE)


def cbrt(x):
    """Cube root of non-negative values: bit-level guess, four Newton steps.

    Within one ulp of the correctly rounded root, and reproducible in C
    with the same operations, so both backends agree exactly.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    k = (x.view(np.int64).astype(np.float64) / 3.0).astype(np.int64) + _CBRT_MAGIC
    y = k.view(np.float64)
    with np.errstate(all="ignore"):
        for _ in range(4):
            y = (y + y + x / (y * y)) / 3.0
    return np.where(x > 0.0, y, 0.0)


def _div(num, den, mask):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=mask)
    return out


def _vel(HU, H, eps):
    return _div(HU, H, H > eps)


# -- K1 -------------------------------------------------------------------


def block_mask(H, index_q, eps, B, interior, halo):
    ny, nx = H.shape
    nby, nbx = interior.shape
    flag = (H > eps) | (index_q > 0)
    pad = np.zeros((nby * B, nbx * B), dtype=np.int32)
    pad[:ny, :nx] = flag
    interior[...] = pad.reshape(nby, B, nbx, B).sum(axis=(1, 3))

    xi = np.arange(nx)
    yi = np.arange(ny)
    west = flag[:, np.maximum(xi - 1, 0)]
    east = flag[:, np.minimum(xi + 1, nx - 1)]
    south = flag[np.maximum(yi - 1, 0), :]
    north = flag[np.minimum(yi + 1, ny - 1), :]
    lx = (xi % B)[None, :]
    ly = (yi % B)[:, None]
    edge = ((lx == 0) & west) | ((lx == B - 1) & east) | ((ly == 0) & south) | ((ly == B - 1) & north)
    pad[...] = 0
    pad[:ny, :nx] = edge
    halo[...] = pad.reshape(nby, B, nbx, B).sum(axis=(1, 3))


# -- K2 -------------------------------------------------------------------


def forces_predictor(blocks, B, H, HU, HV, b, ax, ay, u0, v0, h43, h, g, eps, nu, two_omega, cw,
                     wx, wy, workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, H.shape)
    tH, tb = T.gather(H), T.gather(b)
    tu, tv = _vel(T.gather(HU), tH, eps), _vel(T.gather(HV), tH, eps)
    teta = tH + tb

    def v(a, dy=0, dx=0):
        return _v(a, B, dy, dx)

    Hc, uc, vc, ec = v(tH), v(tu), v(tv), v(teta)
    wet = Hc > eps
    wl, wr = v(tH, 0, -1) > eps, v(tH, 0, 1) > eps
    ws, wn = v(tH, -1, 0) > eps, v(tH, 1, 0) > eps

    def grad(lo_ok, hi_ok, lo, hi):
        out = np.where(lo_ok & hi_ok, (hi - lo) / (2.0 * h), 0.0)
        out = np.where(hi_ok & ~lo_ok, (hi - ec) / h, out)
        return np.where(lo_ok & ~hi_ok, (ec - lo) / h, out)

    gx = grad(wl, wr, v(teta, 0, -1), v(teta, 0, 1))
    gy = grad(ws, wn, v(teta, -1, 0), v(teta, 1, 0))

    def lap(t, c):
        w_ = np.where(wl, v(t, 0, -1), c)
        e_ = np.where(wr, v(t, 0, 1), c)
        s_ = np.where(ws, v(t, -1, 0), c)
        n_ = np.where(wn, v(t, 1, 0), c)
        return ((w_ + e_) + (s_ + n_) - 4.0 * c) / (h * h)

    lu = lap(tu, uc) if nu != 0.0 else 0.0
    lv = lap(tv, vc) if nu != 0.0 else 0.0
    rx = wx - uc
    ry = wy - vc
    k = _div(cw, Hc, wet) * np.sqrt(rx * rx + ry * ry)
    fx = ((-g * gx + nu * lu) + two_omega * vc) + k * rx
    fy = ((-g * gy + nu * lv) - two_omega * uc) + k * ry
    T.scatter(ax, np.where(wet, fx, 0.0))
    T.scatter(ay, np.where(wet, fy, 0.0))
    T.scatter(u0, np.where(wet, uc, 0.0))
    T.scatter(v0, np.where(wet, vc, 0.0))
    T.scatter(h43, np.where(wet, Hc * cbrt(Hc), 0.0))


# -- K3 -------------------------------------------------------------------


def dt_reduce(blocks, B, H, u0, v0, ax, ay, sig, vsx, vsy, h, g, eps, K, smax, tsrc, workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, H.shape)
    Hc = _v(T.gather(H), B)
    wet = Hc > eps
    u = np.where(wet, _v(T.gather(u0), B), 0.0)
    v = np.where(wet, _v(T.gather(v0), B), 0.0)
    fx, fy = _v(T.gather(ax), B), _v(T.gather(ay), B)
    c = np.sqrt(g * Hc)
    us = np.maximum(np.abs(u), np.abs(v)) + c
    upx = np.abs(u + np.copysign(np.sqrt(h * np.abs(fx)), fx))
    upy = np.abs(v + np.copysign(np.sqrt(h * np.abs(fy)), fy))
    speed = np.where(wet, np.maximum(us, np.maximum(upx, upy)), 0.0)
    s = _v(T.gather(sig), B)
    vs = np.maximum(np.abs(_v(T.gather(vsx), B)), np.abs(_v(T.gather(vsy), B)))
    speed = np.where(s != 0.0, np.maximum(speed, vs), speed)
    kh = K * h
    ts = np.where(s > 0.0, cbrt(_div(kh * kh, g * s, s > 0.0)), np.inf)
    smax[:] = speed.reshape(len(T), -1).max(axis=1)
    tsrc[:] = ts.reshape(len(T), -1).min(axis=1)


# -- K4 -------------------------------------------------------------------


def sph_predictor(blocks, B, H, u0, v0, h43, ax, ay, sig, vsx, vsy, gn2, hh, uh, vh, h, eps, tau,
                  workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, H.shape)
    tH = T.gather(H)
    tw = tH > eps
    tu, tv = np.where(tw, T.gather(u0), 0.0), np.where(tw, T.gather(v0), 0.0)

    def v(a, dy=0, dx=0):
        return _v(a, B, dy, dx)

    Hc, uc, vc = v(tH), v(tu), v(tv)
    wet = Hc > eps
    lx = wet & (v(tH, 0, -1) > eps) & (v(tH, 0, 1) > eps)
    ly = wet & (v(tH, -1, 0) > eps) & (v(tH, 1, 0) > eps)
    sxu = np.where(lx, _limiter(uc - v(tu, 0, -1), v(tu, 0, 1) - uc), 0.0)
    syv = np.where(ly, _limiter(vc - v(tv, -1, 0), v(tv, 1, 0) - vc), 0.0)

    half = 0.5 * tau
    s = v(T.gather(sig))
    hm = Hc + half * s
    div = (sxu + syv) / h
    hhn = np.maximum(hm - half * Hc * div, 0.0)
    mu = Hc * (uc + half * v(T.gather(ax))) + half * s * v(T.gather(vsx))
    mv = Hc * (vc + half * v(T.gather(ay))) + half * s * v(T.gather(vsy))
    ok = hm > eps
    un = _div(mu, hm, ok)
    vn = _div(mv, hm, ok)
    spd = np.sqrt(un * un + vn * vn)
    r43 = np.where(s == 0.0, v(T.gather(h43)), hm * cbrt(hm))
    f = 1.0 + _div(half * v(T.gather(gn2)), r43, ok) * spd
    T.scatter(hh, hhn)
    T.scatter(uh, un / f)
    T.scatter(vh, vn / f)


# -- K5 -------------------------------------------------------------------


def forces_corrector(blocks, B, hh, uh, vh, ax, ay, h, eps, nu, two_omega, cw, wx, wy, workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, hh.shape)
    thh, tuh, tvh = T.gather(hh), T.gather(uh), T.gather(vh)

    def v(a, dy=0, dx=0):
        return _v(a, B, dy, dx)

    hc, uc, vc = v(thh), v(tuh), v(tvh)
    hw = hc > eps
    wl, wr = v(thh, 0, -1) > eps, v(thh, 0, 1) > eps
    ws, wn = v(thh, -1, 0) > eps, v(thh, 1, 0) > eps

    def lap(t, c):
        w_ = np.where(wl, v(t, 0, -1), c)
        e_ = np.where(wr, v(t, 0, 1), c)
        s_ = np.where(ws, v(t, -1, 0), c)
        n_ = np.where(wn, v(t, 1, 0), c)
        return ((w_ + e_) + (s_ + n_) - 4.0 * c) / (h * h)

    lu = lap(tuh, uc) if nu != 0.0 else 0.0
    lv = lap(tvh, vc) if nu != 0.0 else 0.0
    rx = wx - uc
    ry = wy - vc
    k = _div(cw, hc, hw) * np.sqrt(rx * rx + ry * ry)
    T.scatter(ax, np.where(hw, (nu * lu + two_omega * vc) + k * rx, 0.0))
    T.scatter(ay, np.where(hw, (nu * lv - two_omega * uc) + k * ry, 0.0))


# -- K6 -------------------------------------------------------------------


def sph_corrector(blocks, B, H, HU, HV, hh, uh, vh, ax, ay, sig, vsx, vsy, gn2, h43, ht, hut, hvt,
                  h, eps, tau, short, drmax, workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, H.shape)

    def v(a, dy=0, dx=0):
        return _v(a, B, dy, dx)

    hc, uc, vc = v(T.gather(hh)), v(T.gather(uh)), v(T.gather(vh))
    fx, fy = v(T.gather(ax)), v(T.gather(ay))
    s = v(T.gather(sig))
    Hc = v(T.gather(H))
    mu = v(T.gather(HU)) + tau * (hc * fx) + tau * s * v(T.gather(vsx))
    mv = v(T.gather(HV)) + tau * (hc * fy) + tau * s * v(T.gather(vsy))
    htn = Hc + tau * s
    neg = htn < 0.0
    short[:] = np.where(neg, -htn, 0.0).reshape(len(T), -1).sum(axis=1)
    htn = np.where(neg, 0.0, htn)
    ok = htn > eps
    spd = _div(np.sqrt(mu * mu + mv * mv), htn, ok)
    r43 = np.where(s == 0.0, v(T.gather(h43)), htn * cbrt(htn))
    f = 1.0 + _div(tau * v(T.gather(gn2)), r43, ok) * spd
    drmax[:] = (tau * np.maximum(np.abs(uc), np.abs(vc)) / h).reshape(len(T), -1).max(axis=1)
    T.scatter(ht, htn)
    T.scatter(hut, np.where(ok, mu / f, 0.0))
    T.scatter(hvt, np.where(ok, mv / f, 0.0))


# -- K7 -------------------------------------------------------------------


def face_flux(HL, eL, uL, vL, HR, eR, uR, vR, g):
    """HLL flux with hydrostatic reconstruction across one face (normal velocity ``u``).

    Face states are given as depth and surface level; the bed on each side
    is ``eta - H``. Returns the mass flux, the normal momentum flux minus
    the hydrostatic pressure of the left and of the right face state, and
    the tangential momentum flux. Written so that equal states at rest give
    exactly zero.
    """
    bs = np.maximum(eL - HL, eR - HR)
    HLs = np.maximum(0.0, eL - bs)
    HRs = np.maximum(0.0, eR - bs)
    dryL = HLs <= 0.0
    dryR = HRs <= 0.0
    cL = np.sqrt(g * HLs)
    cR = np.sqrt(g * HRs)
    sL = np.where(dryL, uR - 2.0 * cR, np.where(dryR, uL - cL, np.minimum(uL - cL, uR - cR)))
    sR = np.where(dryL, uR + cR, np.where(dryR, uL + 2.0 * cL, np.maximum(uL + cL, uR + cR)))
    qL = HLs * uL
    qR = HRs * uR
    PL = 0.5 * g * HLs * HLs
    PR = 0.5 * g * HRs * HRs
    FnL = qL * uL + PL
    FnR = qR * uR + PR
    FtL = qL * vL
    FtR = qR * vR
    d = np.where(sR - sL > 0.0, sR - sL, 1.0)
    fm = qL + sL * ((qL - qR) + sR * (HRs - HLs)) / d
    fn = FnL + sL * ((FnL - FnR) + sR * (qR - qL)) / d
    ft = FtL + sL * ((FtL - FtR) + sR * (HRs * vR - HLs * vL)) / d
    upl = sL >= 0.0
    upr = sR <= 0.0
    fm = np.where(upl, qL, np.where(upr, qR, fm))
    fn = np.where(upl, FnL, np.where(upr, FnR, fn))
    ft = np.where(upl, FtL, np.where(upr, FtR, ft))
    both = dryL & dryR
    fm = np.where(both, 0.0, fm)
    fn = np.where(both, 0.0, fn)
    ft = np.where(both, 0.0, ft)
    return fm, fn - PL, fn - PR, ft


def _reconstruct(T, B, H, HU, HV, b, hh, uh, vh, h, eps, tau):
    """Face states of every cell in the block grown by one ring.

    Returns a dict side -> (H, eta, u, v) for sides 'e', 'w', 'n', 's'.
    Slopes come from the state at ``t_n``; the face values sit at the
    half-step particle position.
    """
    tH, tb = T.gather(H), T.gather(b)
    tu, tv = _vel(T.gather(HU), tH, eps), _vel(T.gather(HV), tH, eps)
    teta = tH + tb

    def v(a, dy=0, dx=0):
        return _v(a, B, dy, dx, e=1)

    Hc = v(tH)
    wet0 = Hc > eps
    lx = wet0 & (v(tH, 0, -1) > eps) & (v(tH, 0, 1) > eps)
    ly = wet0 & (v(tH, -1, 0) > eps) & (v(tH, 1, 0) > eps)

    def sx(t):
        c = v(t)
        return np.where(lx, _limiter(c - v(t, 0, -1), v(t, 0, 1) - c), 0.0)

    def sy(t):
        c = v(t)
        return np.where(ly, _limiter(c - v(t, -1, 0), v(t, 1, 0) - c), 0.0)

    sxH, sxE, sxU, sxV = sx(tH), sx(teta), sx(tu), sx(tv)
    syH, syE, syU, syV = sy(tH), sy(teta), sy(tu), sy(tv)
    hc, uc, vc, bc = v(T.gather(hh)), v(T.gather(uh)), v(T.gather(vh)), v(tb)
    hw = hc > eps
    dx = 0.5 * tau * uc / h
    dy = 0.5 * tau * vc / h
    ec = hc + bc
    shift = sxH * dx + syH * dy
    tH_, tU_, tV_ = syH * dy, syU * dy, syV * dy
    rH_, rU_, rV_ = sxH * dx, sxU * dx, sxV * dx

    out = {}
    for side, sgn, xi, sE, sl, tr in (
        ("e", 0.5, 0.5 - dx, sxE, (sxH, sxU, sxV), (tH_, tU_, tV_)),
        ("w", -0.5, -0.5 - dx, sxE, (sxH, sxU, sxV), (tH_, tU_, tV_)),
        ("n", 0.5, 0.5 - dy, syE, (syH, syU, syV), (rH_, rU_, rV_)),
        ("s", -0.5, -0.5 - dy, syE, (syH, syU, syV), (rH_, rU_, rV_)),
    ):
        Hr = (hc + sl[0] * xi) - tr[0]
        up = hw & (Hr > 0.0)
        bg = bc + sgn * (sE - sl[0])
        out[side] = (
            np.where(up, Hr, 0.0),
            np.where(up, ec + (sgn * sE - shift), bg),
            np.where(hw, (uc + sl[1] * xi) - tr[1], 0.0),
            np.where(hw, (vc + sl[2] * xi) - tr[2], 0.0),
        )
    return out


def _bc_state(state, code, normal):
    Hs, bs, us, vs = state
    if normal == "x":
        us = np.where(code == 0, -us, us)
    else:
        vs = np.where(code == 0, -vs, vs)
    return Hs, bs, us, vs


def tvd_flux(blocks, B, H, HU, HV, b, hh, uh, vh, fh, fu, fv, qx, qy, bc, h, g, eps, tau, workers=1):
    if len(blocks) == 0:
        return
    T = _Tiles(blocks, B, H.shape)
    ny, nx = H.shape
    fs = _reconstruct(T, B, H, HU, HV, b, hh, uh, vh, h, eps, tau)
    inner = slice(1, B + 1)

    # x faces: (nb, B, B+1), face k sits between ring-grown columns k and k+1
    L = [a[:, inner, :-1] for a in fs["e"]]
    R = [a[:, inner, 1:] for a in fs["w"]]
    fgx = T.gx[:, HALO:HALO + B + 1][:, None, :]  # global x of the cell right of the face
    at_w = np.broadcast_to(fgx == 0, L[0].shape)
    at_e = np.broadcast_to(fgx == nx, L[0].shape)
    Lb = _bc_state(R, bc[0], "x")
    Rb = _bc_state(L, bc[1], "x")
    L = [np.where(at_w, lb, l_) for lb, l_ in zip(Lb, L)]
    R = [np.where(at_e, rb, r_) for rb, r_ in zip(Rb, R)]
    xm, xnL, xnR, xt = face_flux(*L, *R, g)

    # y faces: (nb, B+1, B); normal velocity is v
    Ls = [a[:, :-1, inner] for a in fs["n"]]
    Rs = [a[:, 1:, inner] for a in fs["s"]]
    fgy = T.gy[:, HALO:HALO + B + 1][:, :, None]
    at_s = np.broadcast_to(fgy == 0, Ls[0].shape)
    at_n = np.broadcast_to(fgy == ny, Ls[0].shape)
    Lb = _bc_state(Rs, bc[2], "y")
    Rb = _bc_state(Ls, bc[3], "y")
    Ls = [np.where(at_s, lb, l_) for lb, l_ in zip(Lb, Ls)]
    Rs = [np.where(at_n, rb, r_) for rb, r_ in zip(Rb, Rs)]
    ym, ynL, ynR, yt = face_flux(Ls[0], Ls[1], Ls[3], Ls[2], Rs[0], Rs[1], Rs[3], Rs[2], g)

    # pressure and bed slope inside the cell, from its own face states
    HfE, eE = fs["e"][0][:, inner, inner], fs["e"][1][:, inner, inner]
    HfW, eW = fs["w"][0][:, inner, inner], fs["w"][1][:, inner, inner]
    HfN, eN = fs["n"][0][:, inner, inner], fs["n"][1][:, inner, inner]
    HfS, eS = fs["s"][0][:, inner, inner], fs["s"][1][:, inner, inner]
    scx = -0.5 * g * (HfW + HfE) * (eE - eW)
    scy = -0.5 * g * (HfS + HfN) * (eN - eS)

    cfh = (xm[:, :, :-1] - xm[:, :, 1:]) + (ym[:, :-1, :] - ym[:, 1:, :])
    cfu = ((xnR[:, :, :-1] - xnL[:, :, 1:]) + (yt[:, :-1, :] - yt[:, 1:, :])) + scx
    cfv = ((xt[:, :, :-1] - xt[:, :, 1:]) + (ynR[:, :-1, :] - ynL[:, 1:, :])) + scy
    if not (np.all(np.isfinite(cfh)) and np.all(np.isfinite(cfu)) and np.all(np.isfinite(cfv))):
        bad = np.argwhere(~np.isfinite(cfh + cfu + cfv))[0]
        k, r, c = bad
        raise FloatingPointError(
            f"non-finite flux at cell ({T.gx[k, HALO + c]}, {T.gy[k, HALO + r]})")
    T.scatter(fh, cfh)
    T.scatter(fu, cfu)
    T.scatter(fv, cfv)

    # owned faces: west face of every cell, south face of every cell, plus the domain edges
    nbx, nby = T.nbx, T.nby
    bj, bi = T.blocks[:, 0], T.blocks[:, 1]
    px = np.zeros((nby * B, nbx * B + 1))
    px[:ny, :nx + 1] = qx
    px[:, :-1].reshape(nby, B, nbx, B)[bj, :, bi, :] = xm[:, :, :-1]
    last = bi == nbx - 1
    if np.any(last):
        rows = bj[last, None] * B + np.arange(B)
        px[rows, nx] = xm[last][:, :, nx - (nbx - 1) * B]
    qx[...] = px[:ny, :nx + 1]

    py = np.zeros((nby * B + 1, nbx * B))
    py[:ny + 1, :nx] = qy
    py[:-1, :].reshape(nby, B, nbx, B)[bj, :, bi, :] = ym[:, :-1, :]
    top = bj == nby - 1
    if np.any(top):
        cols = bi[top, None] * B + np.arange(B)
        py[ny, cols] = ym[top][:, ny - (nby - 1) * B, :]
    qy[...] = py[:ny + 1, :nx]


# -- K8 -------------------------------------------------------------------


def final_update(B, interior, halo, H, HU, HV, ht, hut, hvt, fh, fu, fv, ax, ay, hh, uh, vh,
                 h, eps, tau, deficit, workers=1):
    ny, nx = H.shape
    nby, nbx = interior.shape

    def cells(flag):
        return np.repeat(np.repeat(flag, B, axis=0), B, axis=1)[:ny, :nx]

    lag = cells(interior > 0)
    proc = lag | cells(halo > 0)
    dt_h = tau / h
    bh = np.where(lag, ht, H)
    bu = np.where(lag, hut, HU)
    bv = np.where(lag, hvt, HV)
    hn = bh + dt_h * fh
    neg = proc & (hn < 0.0)
    d = np.zeros((nby * B, nbx * B))
    d[:ny, :nx] = np.where(neg, -hn, 0.0)
    deficit[...] = d.reshape(nby, B, nbx, B).sum(axis=(1, 3))
    hn = np.where(neg, 0.0, hn)
    wet = hn > eps
    un = np.where(wet, bu + dt_h * fu, 0.0)
    vn = np.where(wet, bv + dt_h * fv, 0.0)
    H[...] = np.where(proc, hn, H)
    HU[...] = np.where(proc, un, HU)
    HV[...] = np.where(proc, vn, HV)
    for a in (ht, hut, hvt, fh, fu, fv, ax, ay, hh, uh, vh):
        a[proc] = 0.0
