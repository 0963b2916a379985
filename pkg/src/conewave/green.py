"""Green function, resolvent application, and Laplace-contour semigroup.

The resolvent of the linearized operator reduces to the two-point
boundary problem on (0,1) built from the origin-regular solution u0 and
the analytic-at-one solution u1, normalized so that

    W(u1, u0)(rho) rho^{d-1} (1 - rho^2)^{1/2 + lam} = 2i.

Then
    G(rho, s, lam) = s^{d-1} (1-s^2)^{lam - 1/2} / (2i)
                     * (u0(rho) u1(s) for rho <= s, else u1(rho) u0(s))
and
    [R(lam) f]_1(rho) = u0(rho) int_rho^1 K u1 + u1(rho) int_0^rho K u0,
    K(s) = F_lam(s) s^{d-1} (1-s^2)^{lam - 1/2} / (2i),
    F_lam(s) = s f1'(s) + (lam + d/2) f1(s) + f2(s),
with the second output component u2 = lam u + rho u' + (d-2)/2 u - f1.

Quadrature uses Gauss-Legendre panels refined geometrically (ratio 1/2)
toward both endpoints; the integrand carries the algebraic factor
(1-s)^{lam-1/2}, so the refinement depth (default 24 levels) sets the
endpoint truncation level ~ depth^{Re lam + 1/2}.  Output points are
inserted as panel boundaries, making the split integrals exact partial
sums over panels.

The semigroup is evaluated by truncated Laplace inversion

    [S(tau)(I-P) f]_1 = (1/2 pi) int_{-Omega}^{Omega}
                        e^{(eps + i w) tau} [R(eps + i w) f]_1 dw,

using the conjugate symmetry of the integrand for real data.
"""

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _rk45
from .collocation import even_cheb_coeffs, even_cheb_eval
from .errors import (DomainError, NearEigenvalueError, QuadratureError,
                     TruncationWarning)
from .model import varphi
from .radialode import (ONE_START, ORIGIN_START, SpectralODE, _batch_rhs,
                        integrate, seed_one, seed_origin)
from .specfun import (bessel_j, bessel_j_deriv, bessel_y, bessel_y_deriv)

GEO_DEPTH = 24
GL_NODES = 12
EIGEN_GUARD = 1e-6


@dataclass
class SourceTerm:
    """Inhomogeneity (f1, f2) with derivative access for f1."""

    f1: callable
    f1p: callable
    f2: callable

    @classmethod
    def from_callables(cls, f1, f1p, f2):
        return cls(f1=f1, f1p=f1p, f2=f2)

    @classmethod
    def from_grid(cls, disc, pair):
        """Interpolate a grid pair through its even-Chebyshev series."""
        u1, u2 = np.asarray(pair[0]), np.asarray(pair[1])
        c1 = even_cheb_coeffs(disc, u1)
        c2 = even_cheb_coeffs(disc, u2)
        return cls(
            f1=lambda s: even_cheb_eval(c1, s)[0],
            f1p=lambda s: even_cheb_eval(c1, s)[1],
            f2=lambda s: even_cheb_eval(c2, s)[0],
        )

    def F_lambda(self, s, lam, d):
        s = np.asarray(s, dtype=float)
        return s * self.f1p(s) + (complex(lam) + d / 2.0) * self.f1(s) + self.f2(s)


# ---------------------------------------------------------------------------
# quadrature layout
# ---------------------------------------------------------------------------


def _panel_layout(rho_out, depth: int = GEO_DEPTH, n_gl: int = GL_NODES):
    """(breakpoints, nodes, weights) of the composite rule on (0, 1).

    Breakpoints are the geometric ladders toward 0 and 1 merged with the
    positive output points; each panel carries an n_gl Gauss-Legendre rule.
    """
    left = 0.5 * 2.0 ** -np.arange(depth + 1, dtype=float)
    right = 1.0 - left
    pts = set(left) | set(right) | {0.0, 1.0}
    pts |= {float(r) for r in np.asarray(rho_out).ravel() if 0.0 < r < 1.0}
    bps = np.array(sorted(pts))
    gx, gw = np.polynomial.legendre.leggauss(n_gl)
    a, b = bps[:-1], bps[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return bps, nodes, weights


# ---------------------------------------------------------------------------
# fundamental-solution values on node sets (batched over lam)
# ---------------------------------------------------------------------------


def _solution_values(d, lam_arr, variant, pts, endpoint, rtol):
    """(u, u') of the origin/one-seeded solutions at sorted pts, per lam.

    Points inside the seed gap are evaluated from the Frobenius series,
    the rest by checkpoint integration.  Returns arrays (n_lam, n_pts).
    """
    lam_arr = np.asarray(lam_arr, dtype=complex)
    pts = np.asarray(pts, dtype=float)
    n_lam, n_pts = len(lam_arr), len(pts)
    u = np.empty((n_lam, n_pts), dtype=complex)
    up = np.empty((n_lam, n_pts), dtype=complex)

    seeds = []
    for lam in lam_arr:
        ode = SpectralODE(d, complex(lam), variant)
        if endpoint == "origin":
            seeds.append(seed_origin(ode))
        else:
            seeds.append(seed_one(ode, "analytic"))
    if endpoint == "origin":
        start = ORIGIN_START
        gap = pts <= start
        cps = pts[~gap]
    else:
        start = ONE_START
        gap = pts >= start
        cps = pts[~gap][::-1]  # descending toward 0
    for i, seed in enumerate(seeds):
        if np.any(gap):
            u[i, gap], up[i, gap] = seed.eval(pts[gap])
    if len(cps):
        y0 = np.array([s.eval(start) for s in seeds], dtype=complex)
        f = _batch_rhs(d, lam_arr, variant)
        amax = float(np.max(np.abs(1j * (0.5 - lam_arr))))
        h0 = 0.5 / (20.0 + amax)
        _, cp_vals, _ = _rk45.solve(
            f, start, float(cps[-1]), y0, rtol=rtol, atol=1e-300,
            checkpoints=cps, h0=h0,
        )
        if not np.all(np.isfinite(cp_vals)):
            raise QuadratureError("fundamental solution overflowed on nodes")
        if endpoint == "origin":
            u[:, ~gap] = cp_vals[:, :, 0].T
            up[:, ~gap] = cp_vals[:, :, 1].T
        else:
            u[:, ~gap] = cp_vals[::-1, :, 0].T
            up[:, ~gap] = cp_vals[::-1, :, 1].T
    return u, up


def _normalize_kernel(d, lam_arr, u0, u0p, u1, u1p, pts):
    """Rescale u0 so W(u1,u0) rho^{d-1}(1-rho^2)^{1/2+lam} = 2i; return scale.

    Raises NearEigenvalueError when the normalized Wronskian is below
    EIGEN_GUARD relative to the solution magnitudes at the matching point.
    """
    lam_arr = np.asarray(lam_arr, dtype=complex)
    j = int(np.argmin(np.abs(pts - 0.5)))
    rho = pts[j]
    w = u1[:, j] * u0p[:, j] - u1p[:, j] * u0[:, j]
    fac = rho ** (d - 1.0) * np.exp((0.5 + lam_arr) * math.log(1.0 - rho * rho))
    kappa = w * fac
    scale = ((np.abs(u1[:, j]) + np.abs(u1p[:, j]))
             * (np.abs(u0[:, j]) + np.abs(u0p[:, j])) * np.abs(fac))
    bad = np.abs(kappa) <= EIGEN_GUARD * scale
    if np.any(bad):
        raise NearEigenvalueError(
            f"lam={lam_arr[bad][:3]} too close to an eigenvalue"
        )
    return (2.0j / kappa)[:, None]


# ---------------------------------------------------------------------------
# GreenKernel (single spectral point, dense in rho)
# ---------------------------------------------------------------------------


@dataclass
class GreenKernel:
    """Green function data at one lam: normalized u0, u1 with derivatives."""

    d: int
    lam: complex
    variant: str
    u0: object  # callable rho -> (u, u'), origin-regular, normalized
    u1: object  # callable rho -> (u, u'), analytic at 1
    normalization: complex

    def weight(self, s):
        s = np.asarray(s, dtype=float)
        lam = self.lam
        return s ** (self.d - 1.0) * np.exp(
            (lam - 0.5) * np.log(1.0 - s * s)) / 2.0j


def build_kernel(d: int, lam, variant: str, tol: float = 1e-10) -> GreenKernel:
    """Construct the kernel on [ORIGIN_START, ONE_START] with dense output."""
    lam = complex(lam)
    ode = SpectralODE(d, lam, variant)
    sol0 = integrate(seed_origin(ode), ONE_START, tol=tol)
    sol1 = integrate(seed_one(ode, "analytic"), ORIGIN_START, tol=tol)
    rho = 0.5
    u0, u0p = sol0(rho)
    u1, u1p = sol1(rho)
    w = complex(u1 * u0p - u1p * u0)
    fac = rho ** (d - 1.0) * cmath.exp((0.5 + lam) * math.log(1.0 - rho * rho))
    kappa = w * fac
    scale = ((abs(u1) + abs(u1p)) * (abs(u0) + abs(u0p)) * abs(fac))
    if abs(kappa) <= EIGEN_GUARD * scale:
        raise NearEigenvalueError(f"lam={lam} too close to an eigenvalue")
    c = 2.0j / kappa

    def u0_scaled(r, _sol0=sol0, _c=c):
        u, up = _sol0(r)
        return _c * u, _c * up

    return GreenKernel(d=d, lam=lam, variant=variant, u0=u0_scaled,
                       u1=sol1, normalization=c)


def green_eval(kernel: GreenKernel, rho, s) -> complex:
    """G(rho, s, lam); continuous across rho = s."""
    rho, s = float(rho), float(s)
    lo, hi = min(rho, s), max(rho, s)
    u0, _ = kernel.u0(lo)
    u1, _ = kernel.u1(hi)
    return complex(kernel.weight(s) * u0 * u1)


def green_eval_drho(kernel: GreenKernel, rho, s) -> complex:
    """d/drho G(rho, s, lam) away from the diagonal."""
    rho, s = float(rho), float(s)
    if rho <= s:
        _, du0 = kernel.u0(rho)
        u1, _ = kernel.u1(s)
        return complex(kernel.weight(s) * du0 * u1)
    u0, _ = kernel.u0(s)
    _, du1 = kernel.u1(rho)
    return complex(kernel.weight(s) * u0 * du1)


# ---------------------------------------------------------------------------
# resolvent application
# ---------------------------------------------------------------------------


@dataclass
class ResolventSolution:
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u1_deriv: np.ndarray

    def pair(self):
        return self.u1, self.u2


def _resolvent_batch(d, lam_arr, variant, src: SourceTerm, rho_out,
                     rtol=1e-8, depth=GEO_DEPTH):
    """[R(lam) f] on rho_out for each lam; arrays (n_lam, n_out).

    Endpoints are allowed: at rho=0 only the regular branch contributes,
    at rho=1 the trace is u1(1) int_0^1 K u0 and the derivative trace
    picks up the finite limit of u0' int_rho^1 K u1 through the singular
    Frobenius coefficient of u0 at rho=1.
    """
    lam_arr = np.asarray(lam_arr, dtype=complex)
    rho_out = np.asarray(rho_out, dtype=float)
    if np.any(rho_out < 0.0) or np.any(rho_out > 1.0):
        raise DomainError("output points must lie in [0, 1]")
    interior = (rho_out > 0.0) & (rho_out < 1.0)
    at_one = rho_out == 1.0
    bps, nodes, wts = _panel_layout(rho_out[interior], depth=depth)

    pos = interior
    eval_pts = np.unique(np.concatenate(
        [nodes, rho_out[pos], [ONE_START]]))
    u0, u0p = _solution_values(d, lam_arr, variant, eval_pts, "origin", rtol)
    u1, u1p = _solution_values(d, lam_arr, variant, eval_pts, "one", rtol)
    scale0 = _normalize_kernel(d, lam_arr, u0, u0p, u1, u1p, eval_pts)
    u0 = u0 * scale0
    u0p = u0p * scale0

    node_ix = np.searchsorted(eval_pts, nodes)
    out_ix = np.searchsorted(eval_pts, rho_out)

    flam = src.F_lambda(nodes, 0.0, d)[None, :] + lam_arr[:, None] * src.f1(nodes)[None, :]
    kfac = nodes ** (d - 1.0) * np.exp(
        (lam_arr[:, None] - 0.5) * np.log(1.0 - nodes * nodes)[None, :]) / 2.0j
    kern = wts[None, :] * kfac * flam

    contrib0 = kern * u0[:, node_ix]   # integrand of I0 = int_0^rho K u0
    contrib1 = kern * u1[:, node_ix]   # integrand of I1 = int_rho^1 K u1
    n_panels = len(bps) - 1
    p0 = contrib0.reshape(len(lam_arr), n_panels, GL_NODES).sum(axis=2)
    p1 = contrib1.reshape(len(lam_arr), n_panels, GL_NODES).sum(axis=2)
    cums0 = np.concatenate(
        [np.zeros((len(lam_arr), 1), dtype=complex), np.cumsum(p0, axis=1)], axis=1)
    cums1 = np.concatenate(
        [np.zeros((len(lam_arr), 1), dtype=complex), np.cumsum(p1, axis=1)], axis=1)
    tot1 = cums1[:, -1][:, None]

    bp_of_out = np.searchsorted(bps, rho_out)
    i0 = cums0[:, bp_of_out]           # int_0^rho K u0
    i1 = tot1 - cums1[:, bp_of_out]    # int_rho^1 K u1

    uo = np.zeros((len(lam_arr), len(rho_out)), dtype=complex)
    uop = np.zeros_like(uo)
    uo[:, pos] = u0[:, out_ix[pos]] * i1[:, pos] + u1[:, out_ix[pos]] * i0[:, pos]
    uop[:, pos] = u0p[:, out_ix[pos]] * i1[:, pos] + u1p[:, out_ix[pos]] * i0[:, pos]
    for jj in np.where(rho_out == 0.0)[0]:
        # at rho = 0: I0 = 0 and u1 I0 -> 0, so only the regular branch
        # acts; u0(0) is the leading seed coefficient, u0'(0) = 0
        u0_at0 = np.array(
            [seed_origin(SpectralODE(d, complex(l), variant)).coefficients[0]
             for l in lam_arr])
        uo[:, jj] = u0_at0 * scale0[:, 0] * cums1[:, -1]
        uop[:, jj] = 0.0
    if np.any(at_one):
        i0_full = cums0[:, -1]
        star_ix = int(np.searchsorted(eval_pts, ONE_START))
        u1_at1 = np.empty(len(lam_arr), dtype=complex)
        u1p_at1 = np.empty(len(lam_arr), dtype=complex)
        lim_coef = np.empty(len(lam_arr), dtype=complex)
        for i, lam in enumerate(lam_arr):
            lam = complex(lam)
            ode = SpectralODE(d, lam, variant)
            sa = seed_one(ode, "analytic")
            u1_at1[i] = sa.coefficients[0]
            u1p_at1[i] = -sa.coefficients[1]
            ss = seed_one(ode, "singular")
            ua, upa = sa.eval(np.asarray(ONE_START))
            us, ups = ss.eval(np.asarray(ONE_START))
            det = ua * ups - upa * us
            b_coef = (ua * u0p[i, star_ix] - upa * u0[i, star_ix]) / det
            f_at1 = complex(src.F_lambda(np.asarray(1.0), lam, d))
            lim_coef[i] = (-b_coef * (0.5 - lam) * f_at1 * u1_at1[i]
                           * 2.0 ** (lam - 0.5) / (2.0j * (lam + 0.5)))
        for jj in np.where(at_one)[0]:
            uo[:, jj] = u1_at1 * i0_full
            uop[:, jj] = u1p_at1 * i0_full + lim_coef
    if not np.all(np.isfinite(uo)):
        raise QuadratureError("endpoint integral did not converge")
    u2 = (lam_arr[:, None] + (d - 2.0) / 2.0) * uo + rho_out[None, :] * uop \
        - src.f1(rho_out)[None, :]
    return uo, u2, uop


def resolvent_apply(kernel: GreenKernel, src: SourceTerm, rho_out,
                    rtol: float = 1e-9) -> ResolventSolution:
    """Solve (lam - L) u = f through the Green function on rho_out."""
    rho_out = np.asarray(rho_out, dtype=float)
    u1, u2, u1p = _resolvent_batch(
        kernel.d, [kernel.lam], kernel.variant, src, rho_out, rtol=rtol)
    return ResolventSolution(rho=rho_out, u1=u1[0], u2=u2[0], u1_deriv=u1p[0])


def residual_checks(kernel: GreenKernel, src: SourceTerm, rho_test,
                    h: float = 2e-4, rtol: float = 1e-10) -> dict:
    """Independent verification that (lam - L) R(lam) f = f at rho_test.

    Derivatives that the construction does not supply (u1'', u2') are
    formed by 4th-order central differences of the returned u1', u2 on
    local stencils, so the check does not reuse the Green-function
    algebra.  Returns the relative sup of the reduced-ODE residual and of
    the full round trip (second component).
    """
    d, lam = kernel.d, kernel.lam
    rho_test = np.asarray(rho_test, dtype=float)
    if np.any(rho_test - 2 * h <= 0.0) or np.any(rho_test + 2 * h >= 1.0):
        raise DomainError("test points must keep the FD stencil inside (0,1)")
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    pts = np.unique((rho_test[:, None] + offsets[None, :]).ravel())
    sol = resolvent_apply(kernel, src, pts, rtol=rtol)
    ix = np.searchsorted(pts, rho_test[:, None] + offsets[None, :])
    w_fd = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    u1 = sol.u1[ix[:, 2]]
    u1p = sol.u1_deriv[ix[:, 2]]
    u2 = sol.u2[ix[:, 2]]
    u1pp = (sol.u1_deriv[ix] * w_fd[None, :]).sum(axis=1)
    u2p = (sol.u2[ix] * w_fd[None, :]).sum(axis=1)

    r = rho_test
    c0 = (complex(lam) * (complex(lam) + d - 1.0)
          - (d if kernel.variant == "perturbed" else -d * (d - 2.0) / 4.0))
    flam = src.F_lambda(r, lam, d)
    ode_res = ((1.0 - r**2) * u1pp
               + ((d - 1.0) / r - (2.0 * complex(lam) + d) * r) * u1p
               - c0 * u1 + flam)
    fscale = float(np.max(np.abs(flam))) + 1e-300
    beta = (2.0 * d + d * d) / 4.0 if kernel.variant == "perturbed" else 0.0
    f1_back = complex(lam) * u1 + r * u1p + (d - 2.0) / 2.0 * u1 - u2
    f2_back = (complex(lam) * u2 - u1pp - (d - 1.0) / r * u1p
               + r * u2p + d / 2.0 * u2 - beta * u1)
    f1_true = src.f1(r)
    f2_true = src.f2(r)
    fnorm = max(float(np.max(np.abs(f1_true))), float(np.max(np.abs(f2_true))))
    rt = max(float(np.max(np.abs(f1_back - f1_true))),
             float(np.max(np.abs(f2_back - f2_true)))) / (fnorm + 1e-300)
    return {
        "ode_residual": float(np.max(np.abs(ode_res))) / fscale,
        "round_trip": rt,
    }


# ---------------------------------------------------------------------------
# kernel decay and Laplace inversion
# ---------------------------------------------------------------------------


def kernel_decay_scan(d: int, rho: float, s: float, omega_list,
                      eps: float = 0.1) -> dict:
    """|G - G_f|(rho, s, eps + i w) over omega_list with a log-log slope fit."""
    if not (0.05 <= rho < 1.0 and 0.05 <= s < 1.0):
        raise DomainError("evaluation points should lie inside (0, 1)")
    omegas = np.asarray(sorted(omega_list), dtype=float)
    diffs = []
    for w in omegas:
        lam = eps + 1j * w
        kp = build_kernel(d, lam, "perturbed")
        kf = build_kernel(d, lam, "free")
        diffs.append(abs(green_eval(kp, rho, s) - green_eval(kf, rho, s)))
    diffs = np.array(diffs)
    pos = omegas > 0
    slope = float(np.polyfit(np.log(omegas[pos]), np.log(diffs[pos]), 1)[0]) \
        if np.sum(pos) >= 2 else math.nan
    return {
        "d": d, "rho": rho, "s": s, "eps": eps,
        "omegas": omegas.tolist(), "differences": diffs.tolist(),
        "slope": slope,
        "monotone": bool(np.all(np.diff(diffs[pos]) < 0.0)),
    }


def semigroup_laplace(d: int, tau: float, src: SourceTerm, rho_out,
                      eps: float = 0.1, omega_max: float = 200.0,
                      domega: float = 0.05, rtol: float = 2e-7,
                      batch: int = 500) -> np.ndarray:
    """[S(tau)(I-P) f]_1 on rho_out by truncated Laplace inversion.

    The large-|lam| asymptote R(lam) f ~ f / lam is inverted analytically
    (its Bromwich integral is f for tau >= 0), so the contour quadrature
    only sees the O(lam^{-2}) remainder:

        out = f1 + (1/2 pi) int_{-Omega}^{Omega} e^{(eps+i w) tau}
              ([R f]_1 - f1 / (eps + i w)) dw.

    src must already have the gauge-mode projection removed.  Real data
    makes the integrand conjugate-symmetric, so only w >= 0 is computed.
    Emits TruncationWarning with the relative last-octave tail estimate.
    """
    if not (0.0 < eps < 0.5):
        raise DomainError("contour shift must lie in (0, 1/2)")
    if omega_max > 400.0:
        raise DomainError("omega_max must be <= 400")
    rho_out = np.asarray(rho_out, dtype=float)
    f1_out = np.asarray(src.f1(rho_out), dtype=float)
    n_w = int(round(omega_max / domega))
    omegas = np.arange(n_w + 1) * domega
    total = f1_out.copy()
    tail = np.zeros(len(rho_out))
    for start in range(0, n_w + 1, batch):
        ws = omegas[start:start + batch]
        lam = eps + 1j * ws
        u1, _, _ = _resolvent_batch(d, lam, "perturbed", src, rho_out, rtol=rtol)
        u1 = u1 - f1_out[None, :] / lam[:, None]
        phases = np.exp((eps + 1j * ws) * tau)
        coef = np.full(len(ws), domega)
        if start == 0:
            coef[0] *= 0.5
        if start + len(ws) == n_w + 1:
            coef[-1] *= 0.5
        contrib = (coef[:, None] * np.real(phases[:, None] * u1)).sum(axis=0)
        total += contrib / math.pi
        in_tail = ws >= omega_max / 2.0
        if np.any(in_tail):
            tail += (coef[in_tail, None]
                     * np.real(phases[in_tail, None] * u1[in_tail])).sum(axis=0) / math.pi
    denom = float(np.linalg.norm(total)) + 1e-300
    tail_rel = float(np.linalg.norm(tail)) / denom
    if tail_rel > 0.01:
        warnings.warn(
            f"last contour octave carries {tail_rel:.2%} of the inversion",
            TruncationWarning,
        )
    return total


# ---------------------------------------------------------------------------
# perturbed Bessel model near the origin
# ---------------------------------------------------------------------------


def _b_solution(d, lam, rho, kind: str):
    """b_1/b_2 = sqrt((1-rho^2) phi) J/Y_{(d-2)/2}(a phi) and derivatives."""
    rho = np.asarray(rho, dtype=float)
    nu = (d - 2.0) / 2.0
    a = 1j * (0.5 - complex(lam))
    phi = varphi(rho)
    om = 1.0 - rho * rho
    g = om * phi
    gp = -2.0 * rho * phi + 1.0
    gpp = -2.0 * phi - 2.0 * rho / om
    m = np.sqrt(g)
    mp = gp / (2.0 * m)
    mpp = gpp / (2.0 * m) - gp * gp / (4.0 * g * m)
    z = a * phi
    phip = 1.0 / om
    phipp = 2.0 * rho / om**2
    if kind == "J":
        f = np.array([bessel_j(nu, zz) for zz in np.atleast_1d(z)])
        fp = np.array([bessel_j_deriv(nu, zz) for zz in np.atleast_1d(z)])
    else:
        f = np.array([bessel_y(nu, zz) for zz in np.atleast_1d(z)])
        fp = np.array([bessel_y_deriv(nu, zz) for zz in np.atleast_1d(z)])
    z1 = np.atleast_1d(z)
    fpp = -fp / z1 - (1.0 - nu * nu / z1**2) * f
    b = m * f
    bp = mp * f + m * fp * a * phip
    bpp = (mpp * f + 2.0 * mp * fp * a * phip
           + m * (fpp * (a * phip) ** 2 + fp * a * phipp))
    return b, bp, bpp


def perturbed_bessel_check(d: int, lam, rho_grid) -> dict:
    """Residual of b1 in the Liouville-Green model equation, the rho -> 0
    convergence rate of the transformed origin-regular solution toward b1,
    and the cross Wronskian W(b1, b2) = 2/pi."""
    lam = complex(lam)
    rho_grid = np.asarray(rho_grid, dtype=float)
    b1, b1p, b1pp = _b_solution(d, lam, rho_grid, "J")
    om = 1.0 - rho_grid**2
    phi = varphi(rho_grid)
    # v'' = [phi'^2 ((1/2-lam)^2 - (4d-d^2-3)/(4 phi^2)) - Q_phi] v with
    # Q_phi = 1/(1-rho^2)^2 (the Liouville-Green correction enters with a
    # minus sign, as direct substitution into the no-first-order form shows)
    pot = ((1.0 - 4.0 * lam + 4.0 * lam * lam) / (4.0 * om**2)
           - (4.0 * d - d * d - 3.0) / (4.0 * phi**2 * om**2)
           - 1.0 / om**2)
    resid = b1pp - pot * b1
    res_rel = float(np.max(np.abs(resid) / (np.abs(b1pp) + np.abs(pot * b1))))

    b2, b2p, _ = _b_solution(d, lam, rho_grid, "Y")
    wr = b1 * b2p - b1p * b2
    wr_err = float(np.max(np.abs(wr - 2.0 / math.pi) * math.pi / 2.0))

    # transformed origin-regular solution against b1
    ode = SpectralODE(d, lam, "perturbed")
    seed = seed_origin(ode)
    sol = integrate(seed, float(np.max(rho_grid)) + 0.05, tol=1e-11)
    u0 = np.empty(len(rho_grid), dtype=complex)
    small = rho_grid <= ORIGIN_START
    if np.any(small):
        u0[small] = seed.eval(rho_grid[small])[0]
    u0[~small] = sol(rho_grid[~small])[0]
    v = rho_grid ** ((d - 1.0) / 2.0) * np.exp(
        (0.25 + lam / 2.0) * np.log(om)) * u0
    ratio = v / b1
    rho_ref = 1e-3
    u0r = seed.eval(np.asarray(rho_ref))[0]
    vref = rho_ref ** ((d - 1.0) / 2.0) * cmath.exp(
        (0.25 + lam / 2.0) * math.log(1.0 - rho_ref**2)) * complex(u0r)
    b1r = _b_solution(d, lam, np.asarray([rho_ref]), "J")[0][0]
    c_inf = complex(vref / b1r)
    dev = np.abs(ratio - c_inf)
    fit_mask = (rho_grid >= 0.02) & (rho_grid <= 0.3) & (dev > 0)
    if np.sum(fit_mask) >= 2:
        slope = float(np.polyfit(np.log(rho_grid[fit_mask]),
                                 np.log(dev[fit_mask]), 1)[0])
    else:
        slope = math.nan
    return {
        "d": d, "lam": lam,
        "model_residual": res_rel,
        "wronskian_error": wr_err,
        "ratio_constant": c_inf,
        "rate_slope": slope,
    }
