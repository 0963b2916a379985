"""Batched adaptive Dormand-Prince RK45 with checkpoint landing.

The spectral ODEs are integrated for many spectral parameters at once:
the state has shape (batch, n) and a single step size is controlled by
the worst batch member.  Steps optionally clip onto a sorted list of
checkpoints (quadrature nodes, output grids) where the state is recorded,
and all accepted steps can be kept for quintic-Hermite dense output.
"""

import numpy as np

from .errors import StepFailure

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

_MAX_STEPS = 2_000_000


class DenseSegments:
    """Accepted RK45 steps with endpoint (y, y') data for quintic Hermite."""

    __slots__ = ("xa", "xb", "ya", "fa", "yb", "fb", "ascending")

    def __init__(self, xa, xb, ya, fa, yb, fb):
        self.xa = np.asarray(xa)
        self.xb = np.asarray(xb)
        self.ya = np.asarray(ya)
        self.fa = np.asarray(fa)
        self.yb = np.asarray(yb)
        self.fb = np.asarray(fb)
        self.ascending = bool(self.xb[-1] > self.xa[0]) if len(self.xa) else True

    def x_range(self):
        lo = min(self.xa[0], self.xb[-1])
        hi = max(self.xa[0], self.xb[-1])
        return lo, hi

    def __call__(self, x):
        """Evaluate (u, u') at points x; components are first state entries.

        Only meaningful for second-order problems written as y = (u, u'):
        the quintic Hermite uses (u, u', u'') at both segment ends and its
        derivative reproduces u' to the same order.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.ascending:
            idx = np.searchsorted(self.xb, x, side="left")
        else:
            idx = np.searchsorted(-self.xb, -x, side="left")
        idx = np.clip(idx, 0, len(self.xa) - 1)
        xa = self.xa[idx]
        h = self.xb[idx] - xa
        th = (x - xa) / h
        u_a, du_a = self.ya[idx, 0], self.ya[idx, 1]
        d2u_a = self.fa[idx, 1]
        u_b, du_b = self.yb[idx, 0], self.yb[idx, 1]
        d2u_b = self.fb[idx, 1]

        t2 = th * th
        t3 = t2 * th
        t4 = t3 * th
        t5 = t4 * th
        h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5
        h01 = th - 6 * t3 + 8 * t4 - 3 * t5
        h02 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
        h10 = 10 * t3 - 15 * t4 + 6 * t5
        h11 = -4 * t3 + 7 * t4 - 3 * t5
        h12 = 0.5 * (t3 - 2 * t4 + t5)
        u = (
            h00 * u_a + h01 * h * du_a + h02 * h * h * d2u_a
            + h10 * u_b + h11 * h * du_b + h12 * h * h * d2u_b
        )
        d00 = -30 * t2 + 60 * t3 - 30 * t4
        d01 = 1 - 18 * t2 + 32 * t3 - 15 * t4
        d02 = 0.5 * (2 * th - 9 * t2 + 12 * t3 - 5 * t4)
        d10 = 30 * t2 - 60 * t3 + 30 * t4
        d11 = -12 * t2 + 28 * t3 - 15 * t4
        d12 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4)
        du = (
            d00 * u_a / h + d01 * du_a + d02 * h * d2u_a
            + d10 * u_b / h + d11 * du_b + d12 * h * d2u_b
        )
        return u, du


def solve(f, x0, x_end, y0, rtol=1e-10, atol=1e-12, checkpoints=None,
          dense=False, h0=None, max_steps=_MAX_STEPS):
    """Integrate y' = f(x, y) from x0 to x_end.

    Parameters
    ----------
    f : callable(x, y) -> array like y, vectorized over the batch axis.
    y0 : array (batch, n) or (n,).
    checkpoints : optional sorted array of x values (monotone toward x_end);
        the integrator lands on each exactly and records the state there.
    dense : keep all accepted steps for later Hermite evaluation.

    Returns
    -------
    y_end, checkpoint_values (or None), DenseSegments (or None)
    """
    y = np.atleast_2d(np.asarray(y0, dtype=complex))
    direction = 1.0 if x_end >= x0 else -1.0
    span = abs(x_end - x0)
    if span == 0.0:
        cp = None
        if checkpoints is not None:
            cp = np.repeat(y[None, :, :], len(checkpoints), axis=0)
        return y, cp, None

    cps = None
    cp_vals = None
    next_cp = 0
    if checkpoints is not None:
        cps = np.asarray(checkpoints, dtype=float)
        cp_vals = np.empty((len(cps),) + y.shape, dtype=complex)

    if h0 is None:
        h0 = span / 100.0
    h = direction * min(abs(h0), span)

    x = x0
    k1 = f(x, y)
    seg_xa, seg_xb, seg_ya, seg_fa, seg_yb, seg_fb = [], [], [], [], [], []
    hmin = 1e-14 * max(1.0, abs(x0), abs(x_end))
    n_steps = 0
    while direction * (x_end - x) > 0:
        n_steps += 1
        if n_steps > max_steps:
            raise StepFailure(f"step budget exceeded ({max_steps})")
        if abs(h) < hmin:
            raise StepFailure(f"step size underflow at x={x}")
        # clip onto the next checkpoint / the endpoint
        x_stop = x_end
        if cps is not None and next_cp < len(cps):
            x_stop = cps[next_cp]
        if direction * (x + h - x_stop) > 0:
            h = x_stop - x

        ks = [k1]
        for i in range(1, 7):
            xi = x + _C[i] * h
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(f(xi, yi))
        y5 = yi  # stage 7 state equals the 5th-order solution (FSAL)
        err = h * sum(e * k for e, k in zip(_E, ks))
        # member-wise sup scale: components of one batch member share a
        # scale so zero crossings of oscillatory components stay benign
        mag = np.maximum(np.abs(y), np.abs(y5)).max(axis=-1, keepdims=True)
        scale = atol + rtol * mag
        emax = np.max(np.abs(err) / scale)

        if emax <= 1.0:
            if dense:
                seg_xa.append(x)
                seg_xb.append(x + h)
                seg_ya.append(y[0].copy())
                seg_fa.append(ks[0][0].copy())
                seg_yb.append(y5[0].copy())
                seg_fb.append(ks[6][0].copy())
            x = x + h
            y = y5
            k1 = ks[6]
            if cps is not None:
                while next_cp < len(cps) and direction * (cps[next_cp] - x) <= 1e-15 * max(1.0, abs(x)):
                    cp_vals[next_cp] = y
                    next_cp += 1
            fac = 2.0 if emax == 0.0 else min(2.0, max(0.25, 0.9 * emax ** -0.2))
        else:
            fac = max(0.1, 0.9 * emax ** -0.2)
        h = h * fac

    segments = None
    if dense:
        segments = DenseSegments(
            np.array(seg_xa), np.array(seg_xb),
            np.array(seg_ya), np.array(seg_fa),
            np.array(seg_yb), np.array(seg_fb),
        )
    return y, cp_vals, segments
