"""Hot inner kernels, compiled with numba when available.

Set ``TFCH_NUMBA=0`` to force the pure-numpy path. ``TFCH_NUMBA=1`` makes a
missing numba an import error instead of a silent fallback. Both paths stay
importable as ``numpy_impl`` / ``numba_impl`` so they can be cross-checked
and benchmarked against each other.
"""
from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

_flag = os.environ.get("TFCH_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    if _flag in ("1", "true", "yes", "on"):
        raise

HAVE_NUMBA = numba is not None


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def _np_powdiff1(c, h, q):
    """``(c + h)**q - c**q`` without cancellation, ``c >= 0``, ``h > 0``."""
    c = np.asarray(c, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    out = np.empty(np.broadcast(c, h).shape)
    c, h = np.broadcast_arrays(c, h)
    pos = c > 0
    cp, hp = c[pos], h[pos]
    out[pos] = cp ** q * np.expm1(q * np.log1p(hp / cp))
    out[~pos] = h[~pos] ** q
    return out


def _np_powdiff2(b, tk, tn, p):
    """``(b+tk+tn)**p - (b+tk)**p - (b+tn)**p + b**p`` for ``b >= 0``.

    For ``b > 0`` the mixed difference is rewritten as
    ``b**p * [(1+y)**p E(-w) + E(x) E(y/(1+x))]`` with ``x = tk/b``,
    ``y = tn/b``, ``w = xy/((1+x)(1+y))`` and ``E(z) = (1+z)**p - 1``
    evaluated through expm1/log1p.
    """
    b, tk, tn = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (b, tk, tn)))
    out = np.empty(b.shape)
    pos = b > 0
    bp, x, y = b[pos], tk[pos] / b[pos], tn[pos] / b[pos]
    w = x * y / ((1.0 + x) * (1.0 + y))
    t1 = (1.0 + y) ** p * np.expm1(p * np.log1p(-w))
    t2 = np.expm1(p * np.log1p(x)) * np.expm1(p * np.log1p(y / (1.0 + x)))
    out[pos] = bp ** p * (t1 + t2)
    zk, zn = tk[~pos], tn[~pos]
    out[~pos] = zk ** p * np.expm1(p * np.log1p(zn / zk)) - zn ** p
    return out


def _np_l1_coeffs(times, n, alpha, gamma_2ma):
    t = times[: n + 1]
    tau = np.diff(t)
    c = t[n] - t[1:]
    return _np_powdiff1(c, tau, 1.0 - alpha) / (gamma_2ma * tau)


def _np_l1plus_coeffs(times, n, alpha, gamma_3ma):
    t = times[: n + 1]
    tau = np.diff(t)
    tau_n = tau[-1]
    out = np.empty(n)
    if n > 1:
        b = t[n - 1] - t[1:n]
        out[:-1] = _np_powdiff2(b, tau[:-1], tau_n, 2.0 - alpha) / (gamma_3ma * tau[:-1] * tau_n)
    out[-1] = tau_n ** (-alpha) / gamma_3ma
    return out


def _np_history_sum(coeffs, hist, m, out):
    if m == 0:
        out[:] = 0.0
    else:
        np.dot(coeffs[:m], hist[:m], out=out)
    return out


def _np_cubic_terms(v, p):
    """Convex-split cubic ``(p+v)(v^2+p^2)/4`` and its derivative in ``v``."""
    v2 = v * v
    p2 = p * p
    value = 0.25 * (p + v) * (v2 + p2)
    deriv = 0.25 * (3.0 * v2 + 2.0 * p * v + p2)
    return value, deriv


numpy_impl = SimpleNamespace(
    name="numpy",
    powdiff1=_np_powdiff1,
    powdiff2=_np_powdiff2,
    l1_coeffs=_np_l1_coeffs,
    l1plus_coeffs=_np_l1plus_coeffs,
    history_sum=_np_history_sum,
    cubic_terms=_np_cubic_terms,
)


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

def _scalar_powdiff1(c, h, q):
    if c > 0.0:
        return c ** q * math.expm1(q * math.log1p(h / c))
    return h ** q


def _scalar_powdiff2(b, tk, tn, p):
    if b > 0.0:
        x = tk / b
        y = tn / b
        w = x * y / ((1.0 + x) * (1.0 + y))
        t1 = (1.0 + y) ** p * math.expm1(p * math.log1p(-w))
        t2 = math.expm1(p * math.log1p(x)) * math.expm1(p * math.log1p(y / (1.0 + x)))
        return b ** p * (t1 + t2)
    return tk ** p * math.expm1(p * math.log1p(tn / tk)) - tn ** p


def _build_numba():
    njit = numba.njit(cache=True, nogil=True)
    s1 = njit(_scalar_powdiff1)
    s2 = njit(_scalar_powdiff2)

    @njit
    def powdiff1(c, h, q):
        out = np.empty(c.size)
        for i in range(c.size):
            out[i] = s1(c[i], h[i], q)
        return out

    @njit
    def powdiff2(b, tk, tn, p):
        out = np.empty(b.size)
        for i in range(b.size):
            out[i] = s2(b[i], tk[i], tn[i], p)
        return out

    @njit
    def l1_coeffs(times, n, alpha, gamma_2ma):
        out = np.empty(n)
        q = 1.0 - alpha
        for k in range(1, n + 1):
            tau_k = times[k] - times[k - 1]
            out[k - 1] = s1(times[n] - times[k], tau_k, q) / (gamma_2ma * tau_k)
        return out

    @njit
    def l1plus_coeffs(times, n, alpha, gamma_3ma):
        out = np.empty(n)
        p = 2.0 - alpha
        tau_n = times[n] - times[n - 1]
        for k in range(1, n):
            tau_k = times[k] - times[k - 1]
            out[k - 1] = s2(times[n - 1] - times[k], tau_k, tau_n, p) / (gamma_3ma * tau_k * tau_n)
        out[n - 1] = tau_n ** (-alpha) / gamma_3ma
        return out

    @njit
    def _cubic_flat(v, p, value, deriv):
        for i in range(v.size):
            vi = v[i]
            pi = p[i]
            v2 = vi * vi
            p2 = pi * pi
            value[i] = 0.25 * (pi + vi) * (v2 + p2)
            deriv[i] = 0.25 * (3.0 * v2 + 2.0 * pi * vi + p2)

    def cubic_terms(v, p):
        value = np.empty_like(v)
        deriv = np.empty_like(v)
        _cubic_flat(v.reshape(-1), np.ascontiguousarray(p).reshape(-1),
                    value.reshape(-1), deriv.reshape(-1))
        return value, deriv

    def powdiff1_wrap(c, h, q):
        c, h = np.broadcast_arrays(np.asarray(c, dtype=np.float64), np.asarray(h, dtype=np.float64))
        shape = c.shape
        return powdiff1(np.ascontiguousarray(c).ravel(), np.ascontiguousarray(h).ravel(), q).reshape(shape)

    def powdiff2_wrap(b, tk, tn, p):
        b, tk, tn = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (b, tk, tn)))
        shape = b.shape
        return powdiff2(np.ascontiguousarray(b).ravel(), np.ascontiguousarray(tk).ravel(),
                        np.ascontiguousarray(tn).ravel(), p).reshape(shape)

    return SimpleNamespace(
        name="numba",
        powdiff1=powdiff1_wrap,
        powdiff2=powdiff2_wrap,
        l1_coeffs=l1_coeffs,
        l1plus_coeffs=l1plus_coeffs,
        # a BLAS matrix-vector product beats any compiled loop here
        history_sum=_np_history_sum,
        cubic_terms=cubic_terms,
    )


numba_impl = _build_numba() if HAVE_NUMBA else None

USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "no", "off")
impl = numba_impl if USE_NUMBA else numpy_impl
BACKEND = impl.name
