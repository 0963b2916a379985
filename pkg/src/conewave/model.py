"""Blowup family, similarity coordinates, nonlinearity, Strichartz pairs.

The focusing energy-critical radial wave equation
(d_t^2 - d_r^2 - (d-1)/r d_r) u = u |u|^{4/(d-2)} has the space-independent
blowup family u^T(t) = c_d (T-t)^{(2-d)/2}.  Similarity coordinates

    rho = r / (T - t),    tau = -log(T - t) + log T

map the backward lightcone Gamma_T onto the cylinder [0, inf) x [0, 1],
and psi(tau, rho) = (T e^{-tau})^{(d-2)/2} u(T - T e^{-tau}, T e^{-tau} rho)
turns u^T into the constant c_d.
"""

import math

import numpy as np

from .errors import DomainError

NONLINEAR_D_MAX = 6  # power nonlinearity handled via Lp-Lq bounds only below 7


def check_dimension(d: int, nonlinear: bool = False) -> int:
    if int(d) != d or d < 3:
        raise DomainError(f"dimension must be an integer >= 3, got {d}")
    if nonlinear and d > NONLINEAR_D_MAX:
        raise DomainError(f"nonlinear features require 3 <= d <= 6, got {d}")
    return int(d)


def c_d(d: int) -> float:
    """Blowup amplitude (d(d-2)/4)^{(d-2)/4}."""
    check_dimension(d)
    return (d * (d - 2) / 4.0) ** ((d - 2) / 4.0)


def ode_blowup(d: int, T: float, t, r=None) -> float:
    """u^T(t) = c_d (T-t)^{(2-d)/2}; independent of r."""
    check_dimension(d)
    t = np.asarray(t, dtype=float)
    if np.any(t >= T):
        raise DomainError("blowup profile defined for t < T only")
    return c_d(d) * (T - t) ** ((2.0 - d) / 2.0)


def sphere_area(d: int) -> float:
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)."""
    check_dimension(d)
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# similarity coordinates
# ---------------------------------------------------------------------------


def to_similarity(T: float, t, r):
    """(t, r) in the backward lightcone -> (tau, rho)."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t < 0) or np.any(t >= T) or np.any(r < 0) or np.any(r > T - t):
        raise DomainError("point outside the backward lightcone Gamma_T")
    tau = -np.log(T - t) + math.log(T)
    rho = r / (T - t)
    return tau, rho


def from_similarity(T: float, tau, rho):
    """(tau, rho) on the cylinder -> (t, r)."""
    tau = np.asarray(tau, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(tau < 0) or np.any(rho < 0) or np.any(rho > 1):
        raise DomainError("similarity point outside [0,inf) x [0,1]")
    t = T - T * np.exp(-tau)
    r = T * np.exp(-tau) * rho
    return t, r


def psi_from_u(d: int, T: float, u, tau, rho):
    """psi(tau, rho) = (T e^{-tau})^{(d-2)/2} u(T - T e^{-tau}, T e^{-tau} rho)."""
    check_dimension(d)
    tau = np.asarray(tau, dtype=float)
    t, r = from_similarity(T, tau, rho)
    return (T * np.exp(-tau)) ** ((d - 2) / 2.0) * u(t, r)


def psi_pair_from_u(d: int, T: float, u, u_t, tau, rho):
    """Both similarity components from (u, d_t u).

    psi_1 = (T e^{-tau})^{(d-2)/2} u(t, r) and the chain rule collapses
    psi_2 = d_tau psi + rho d_rho psi + (d-2)/2 psi to
    psi_2 = (T e^{-tau})^{d/2} d_t u(t, r).
    """
    check_dimension(d)
    tau = np.asarray(tau, dtype=float)
    t, r = from_similarity(T, tau, rho)
    mu = T * np.exp(-tau)
    return mu ** ((d - 2) / 2.0) * u(t, r), mu ** (d / 2.0) * u_t(t, r)


# ---------------------------------------------------------------------------
# nonlinearity around the blowup profile
# ---------------------------------------------------------------------------


def nonlinearity(d: int, x):
    """N(x) = |c_d + x|^{4/(d-2)} (c_d + x) - c_d^{(d+2)/(d-2)} - (2d+d^2)/4 x."""
    check_dimension(d, nonlinear=True)
    x = np.asarray(x, dtype=float)
    c = c_d(d)
    p = 4.0 / (d - 2)
    return (
        np.abs(c + x) ** p * (c + x)
        - c ** ((d + 2.0) / (d - 2.0))
        - (2.0 * d + d * d) / 4.0 * x
    )


def nonlinearity_pair(d: int, pair):
    """Vector form (0, N(u_1)) acting on a stacked pair (u_1, u_2)."""
    u1, u2 = pair
    return np.zeros_like(np.asarray(u1, dtype=float)), nonlinearity(d, u1)


# ---------------------------------------------------------------------------
# Strichartz admissibility
# ---------------------------------------------------------------------------


def q_bounds(d: int):
    """Admissible q interval [2d/(d-2), 2d/(d-3)] (upper bound inf for d=3)."""
    check_dimension(d)
    hi = math.inf if d == 3 else 2.0 * d / (d - 3.0)
    return 2.0 * d / (d - 2.0), hi


def admissible(d: int, p: float, q: float, tol: float = 1e-12) -> bool:
    """True iff 1/p + d/q = d/2 - 1 with p in [2, inf], q in the allowed range."""
    check_dimension(d)
    if p < 2.0:
        return False
    qlo, qhi = q_bounds(d)
    if q < qlo - tol or q > qhi + tol:
        return False
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    return abs(inv_p + d / q - (d / 2.0 - 1.0)) <= tol


def strichartz_x_pairs(d: int):
    """The two exponent pairs of the Strichartz space norm."""
    check_dimension(d, nonlinear=True)
    return (
        (2.0, 2.0 * d / (d - 3.0) if d > 3 else math.inf),
        ((d + 2.0) / (d - 2.0), (2.0 * d + 4.0) / (d - 2.0)),
    )


# ---------------------------------------------------------------------------
# Liouville-Green machinery shared with the ODE analysis
# ---------------------------------------------------------------------------


def varphi(rho):
    """Diffeomorphism phi(rho) = log((1+rho)/(1-rho)) / 2 of (0,1) onto (0,inf)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho >= 1):
        raise DomainError("varphi defined on [0, 1)")
    return 0.5 * (np.log1p(rho) - np.log1p(-rho))


def varphi_inverse(x):
    return np.tanh(np.asarray(x, dtype=float))


def liouville_green_potential(rho):
    """Q_phi(rho) = 1/(1-rho^2)^2 (closed form)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho >= 1):
        raise DomainError("potential defined on [0, 1)")
    return (1.0 - rho**2) ** -2.0


def liouville_green_potential_from_derivatives(rho):
    """Q_phi from its defining combination -3/4 (phi''/phi')^2 + 1/2 phi'''/phi'."""
    rho = np.asarray(rho, dtype=float)
    om = 1.0 - rho**2
    phi1 = 1.0 / om
    phi2 = 2.0 * rho / om**2
    phi3 = 2.0 / om**2 + 8.0 * rho**2 / om**3
    return -0.75 * (phi2 / phi1) ** 2 + 0.5 * (phi3 / phi1)
