"""Analytic and exact reference solutions.

Nothing here imports the solver; these functions exist to check it.
"""

from __future__ import annotations

import math

import numpy as np


class OracleError(RuntimeError):
    pass


def ritter_solution(h_l: float, g: float, x, t: float):
    """Dam break onto a dry flat frictionless bed, dam at ``x = 0`` released at ``t = 0``.

    Returns ``(H, U)`` arrays shaped like ``x``.
    """
    if not h_l > 0:
        raise ValueError("upstream depth must be positive")
    if not t > 0:
        raise ValueError("time must be positive")
    x = np.asarray(x, dtype=float)
    c0 = math.sqrt(g * h_l)
    xi = x / t
    fan = (xi >= -c0) & (xi <= 2.0 * c0)
    H = np.where(xi < -c0, h_l, 0.0)
    U = np.zeros_like(xi)
    H = np.where(fan, (2.0 * c0 - xi) ** 2 / (9.0 * g), H)
    U = np.where(fan, 2.0 / 3.0 * (xi + c0), U)
    return H, U


def _wave(h, hk, g):
    """Velocity change across a shock or rarefaction from depth hk to h, and its derivative."""
    if h > hk:
        f = (h - hk) * math.sqrt(0.5 * g * (h + hk) / (h * hk))
    else:
        f = 2.0 * (math.sqrt(g * h) - math.sqrt(g * hk))
    return f


def exact_riemann_state(HL, UL, HR, UR, g, s=0.0, tol=1e-12, max_iter=200):
    """Exact shallow-water Riemann solution sampled at ``x/t = s``.

    Returns ``(H, U)``. The star depth is found by bisection. Dry sides
    are handled with the closed-form dry-front rarefactions.
    """
    if HL < 0 or HR < 0:
        raise ValueError("depths must be non-negative")
    if HL == 0 and HR == 0:
        return 0.0, 0.0
    cL = math.sqrt(g * HL)
    cR = math.sqrt(g * HR)
    if HR == 0:
        return _dry_right(HL, UL, cL, g, s)
    if HL == 0:
        H, U = _dry_right(HR, -UR, cR, g, -s)
        return H, -U
    if UR - UL >= 2.0 * (cL + cR):
        # vacuum opens between the two rarefactions
        if s <= UL + 2.0 * cL:
            return _dry_right(HL, UL, cL, g, s)
        H, U = _dry_right(HR, -UR, cR, g, -s)
        return H, -U

    def f(h):
        return _wave(h, HL, g) + _wave(h, HR, g) + (UR - UL)

    lo, hi = 0.0, max(HL, HR)
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise OracleError("star depth bracket not found")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    else:
        raise OracleError(f"star depth bisection did not converge in {max_iter} iterations")
    hs = 0.5 * (lo + hi)
    us = 0.5 * (UL + UR) + 0.5 * (_wave(hs, HR, g) - _wave(hs, HL, g))
    cs = math.sqrt(g * hs)

    if s <= us:
        # left of the contact
        if hs > HL:
            sh = UL - cL * math.sqrt(0.5 * hs * (hs + HL)) / HL
            return (HL, UL) if s < sh else (hs, us)
        if s < UL - cL:
            return HL, UL
        if s > us - cs:
            return hs, us
        U = (UL + 2.0 * cL + 2.0 * s) / 3.0
        c = (UL + 2.0 * cL - s) / 3.0
        return c * c / g, U
    if hs > HR:
        sh = UR + cR * math.sqrt(0.5 * hs * (hs + HR)) / HR
        return (HR, UR) if s > sh else (hs, us)
    if s > UR + cR:
        return HR, UR
    if s < us + cs:
        return hs, us
    U = (UR - 2.0 * cR + 2.0 * s) / 3.0
    c = (-UR + 2.0 * cR + s) / 3.0
    return c * c / g, U


def _dry_right(HL, UL, cL, g, s):
    if s <= UL - cL:
        return HL, UL
    if s >= UL + 2.0 * cL:
        return 0.0, 0.0
    U = (UL + 2.0 * cL + 2.0 * s) / 3.0
    c = (UL + 2.0 * cL - s) / 3.0
    return c * c / g, U


def exact_riemann_flux(left, right, g, tol=1e-12, max_iter=200):
    """Physical flux ``(H u, H u^2 + g H^2 / 2)`` of the exact solution at the face.

    ``left`` and ``right`` are ``(H, U)`` pairs.
    """
    H, U = exact_riemann_state(left[0], left[1], right[0], right[1], g, 0.0, tol, max_iter)
    return H * U, H * U * U + 0.5 * g * H * H
