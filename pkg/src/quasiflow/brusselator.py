"""Two-component reaction-diffusion hulls: activator-depleted substrate kinetics.

Fields are stored in absolute (not deviation) variables so positivity is
meaningful.  The exponential stepper puts diffusion, the same-component
linear kinetics, and the lower-triangular cross coupling B*u into the exact
exponential; the quadratic-cubic term u^2 v and the constant feed A stay in
the explicit part handled by phi functions.  The homogeneous steady state is
then a fixed point of the discrete step to round-off, not just to O(dt^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from . import diagnostics
from .etd import expm_lower_tri, phi1_lower_tri, phi2_lower_tri
from .hull import ActiveModeSet, HullField

GOLDEN_RATIO = (np.sqrt(5.0) - 1.0) / 2.0


class NonFiniteState(FloatingPointError):
    """A coefficient left the representable range."""


class NoBracket(RuntimeError):
    """No finite-wavelength minimum of the dispersion determinant."""


@dataclass(frozen=True)
class BrusselatorParams:
    A: float
    B: float
    d1: float
    d2: float

    def __post_init__(self):
        if min(self.A, self.B, self.d1, self.d2) <= 0:
            raise ValueError("all four parameters must be positive")

    @property
    def eta(self) -> float:
        return float(np.sqrt(self.d1 / self.d2))


def steady_state(params: BrusselatorParams) -> tuple[float, float]:
    """The homogeneous fixed point of the kinetics."""
    return params.A, params.B / params.A


def dispersion_matrix(params: BrusselatorParams, ksq: float) -> np.ndarray:
    """Linearization at the steady state, per squared wavenumber."""
    if ksq < 0:
        raise ValueError("squared wavenumber must be nonnegative")
    A, B = params.A, params.B
    return np.array([
        [-params.d1 * ksq + B - 1.0, A * A],
        [-B, -params.d2 * ksq - A * A],
    ])


def _det_dispersion(params: BrusselatorParams, ksq) -> np.ndarray:
    A, B = params.A, params.B
    d1, d2 = params.d1, params.d2
    ksq = np.asarray(ksq, dtype=float)
    return d1 * d2 * ksq ** 2 + (d1 * A * A - d2 * (B - 1.0)) * ksq + A * A


def _interior_min_ksq(params: BrusselatorParams) -> tuple[float, float]:
    """Locate min_k det by golden-section plus exact parabolic refinement.

    The determinant is quadratic in the squared wavenumber, so after the
    golden-section narrows the bracket, one three-point parabola fit lands
    on the vertex to round-off.
    """
    hi = 1.0
    for _ in range(200):
        if _det_dispersion(params, hi) > _det_dispersion(params, 0.5 * hi):
            break
        hi *= 2.0
    else:
        raise NoBracket("determinant keeps decreasing; no interior minimum")
    lo = 0.0
    a, b = lo, hi
    c = b - GOLDEN_RATIO * (b - a)
    d = a + GOLDEN_RATIO * (b - a)
    fc, fd = _det_dispersion(params, c), _det_dispersion(params, d)
    while b - a > 1e-6 * (1.0 + b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_RATIO * (b - a)
            fc = _det_dispersion(params, c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_RATIO * (b - a)
            fd = _det_dispersion(params, d)
    mid = 0.5 * (a + b)
    s = 1e-3 * (1.0 + abs(mid))
    f0 = _det_dispersion(params, mid)
    fp = _det_dispersion(params, mid + s)
    fm = _det_dispersion(params, max(mid - s, 0.0))
    denom = fp - 2.0 * f0 + fm
    vertex = mid if denom <= 0 else mid - 0.5 * s * (fp - fm) / denom
    vertex = max(float(vertex), 0.0)
    return vertex, float(_det_dispersion(params, vertex))


@dataclass(frozen=True)
class TuringReport:
    eta: float
    B_c: float
    k_c: float
    critical_eigenvector: tuple[float, float]
    turing_first: bool
    B_c_scan: float
    k_c_scan: float
    note: str

    def lines(self) -> list[str]:
        ev = self.critical_eigenvector
        return [
            f"eta = {self.eta:.17g}",
            f"B_c = {self.B_c:.17g}",
            f"k_c = {self.k_c:.17g}",
            f"eigenvector = {ev[0]:.17g} {ev[1]:.17g}",
            f"turing_first = {'true' if self.turing_first else 'false'}",
        ]


def turing_analysis(A: float, d1: float, d2: float) -> TuringReport:
    """Find the finite-wavelength onset of the homogeneous state.

    The scan minimizes the dispersion determinant over squared wavenumber
    inside a root solve on the feed parameter; the closed forms
    B_c = (1 + A*eta)^2 and k_c^2 = A/sqrt(d1 d2) are cross-checked against
    it to 1e-8 relative and returned.
    """
    if min(A, d1, d2) <= 0:
        raise ValueError("parameters must be positive")
    eta = float(np.sqrt(d1 / d2))
    B_closed = (1.0 + A * eta) ** 2
    ksq_closed = A / np.sqrt(d1 * d2)

    def min_det(B: float) -> float:
        return _interior_min_ksq(BrusselatorParams(A, B, d1, d2))[1]

    B_hi = 2.0
    for _ in range(200):
        if min_det(B_hi) < 0:
            break
        B_hi *= 2.0
    else:
        raise NoBracket("dispersion determinant never turns negative")
    B_scan = float(brentq(min_det, 1.0 + 1e-12, B_hi, xtol=1e-13, rtol=1e-15))
    ksq_scan, _ = _interior_min_ksq(BrusselatorParams(A, B_scan, d1, d2))
    k_scan = float(np.sqrt(ksq_scan))

    rel_B = abs(B_scan - B_closed) / B_closed
    rel_k = abs(k_scan - np.sqrt(ksq_closed)) / np.sqrt(ksq_closed)
    if max(rel_B, rel_k) > 1e-8:
        warnings.warn(
            f"scan and closed forms disagree (relative {max(rel_B, rel_k):.2e})",
            stacklevel=2,
        )

    crit = dispersion_matrix(BrusselatorParams(A, B_scan, d1, d2), ksq_scan)
    _, _, vt = np.linalg.svd(crit)
    vec = vt[-1]
    if vec[np.argmax(np.abs(vec))] > 0:
        vec = -vec
    if vec[0] > 0:
        vec = -vec

    return TuringReport(
        eta=eta,
        B_c=B_closed,
        k_c=float(np.sqrt(ksq_closed)),
        critical_eigenvector=(float(vec[0]), float(vec[1])),
        turing_first=bool(B_closed < 1.0 + A * A),
        B_c_scan=B_scan,
        k_c_scan=k_scan,
        note=(
            "scan minimizes the dispersion determinant directly; the simplified "
            "k_c = sqrt(A/eta) form matches it only when the second diffusivity "
            "is 1, and onset precedes the homogeneous oscillation only when "
            "turing_first holds"
        ),
    )


@dataclass(frozen=True)
class BrussStepper:
    dt: float = 0.01
    dealias: int = 2

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.dealias < 2:
            raise ValueError("pad factor below 2 cannot clear cubic aliasing")


class _BrussTables:
    def __init__(self, active: ActiveModeSet, params: BrusselatorParams, dt: float):
        self.dt = dt
        ksq = active.ksq
        x = dt * (-params.d1 * ksq - (params.B + 1.0))
        w = np.full_like(ksq, dt * params.B)
        y = dt * (-params.d2 * ksq)
        self.E = expm_lower_tri(x, w, y)
        p = phi1_lower_tri(x, w, y)
        q = phi2_lower_tri(x, w, y)
        self.P1 = tuple(dt * np.asarray(c) for c in p)
        self.P2 = tuple(dt * np.asarray(c) for c in q)


@dataclass
class BrusselatorState:
    u_field: HullField
    v_field: HullField
    t: float
    params: BrusselatorParams
    stepper: BrussStepper
    step_index: int = 0
    _tables: _BrussTables | None = None

    def __post_init__(self):
        if self.v_field.active is not self.u_field.active:
            raise ValueError("components must share one active mode set")

    def tables(self) -> _BrussTables:
        if self._tables is None or self._tables.dt != self.stepper.dt:
            self._tables = _BrussTables(self.u_field.active, self.params, self.stepper.dt)
        return self._tables

    def rhs_pair(self) -> tuple[HullField, HullField]:
        return bruss_rhs(self)


def _quadratic_cubic(active: ActiveModeSet, a: np.ndarray, b: np.ndarray,
                     pad: int = 2) -> np.ndarray:
    """Coefficients of u^2 v, both products on the padded grid."""
    uv = active.grid_values(a, pad_factor=pad)
    vv = active.grid_values(b, pad_factor=pad)
    return active.coefficients_from_grid(uv * uv * vv)


def bruss_rhs(state: BrusselatorState) -> tuple[HullField, HullField]:
    """Time derivative of both components in absolute variables."""
    act = state.u_field.active
    p = state.params
    a = state.u_field.coeffs
    b = state.v_field.coeffs
    t = _quadratic_cubic(act, a, b, state.stepper.dealias)
    zero_mode = act.position(np.zeros(act.rank, dtype=int))
    du = -p.d1 * act.ksq * a - (p.B + 1.0) * a + t
    du[zero_mode] += p.A
    dv = -p.d2 * act.ksq * b + p.B * a - t
    return HullField(act, du), HullField(act, dv)


def _nonlinear_pair(active, params, a, b, zero_mode, pad=2):
    t = _quadratic_cubic(active, a, b, pad)
    nu = t.copy()
    nu[zero_mode] += params.A
    return nu, -t


def bruss_step(state: BrusselatorState, dt: float | None = None) -> BrusselatorState:
    """One exponential step with a phi2 corrector (second order)."""
    if dt is not None and dt != state.stepper.dt:
        state = replace(state, stepper=replace(state.stepper, dt=dt), _tables=None)
    tab = state.tables()
    act = state.u_field.active
    zero_mode = act.position(np.zeros(act.rank, dtype=int))
    a, b = state.u_field.coeffs, state.v_field.coeffs

    E11, E21, E22 = tab.E
    P111, P121, P122 = tab.P1
    P211, P221, P222 = tab.P2

    pad = state.stepper.dealias

    # overflow surfaces as the explicit NonFiniteState below, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        nu, nv = _nonlinear_pair(act, state.params, a, b, zero_mode, pad)
        pu = E11 * a + P111 * nu
        pv = E21 * a + E22 * b + P121 * nu + P122 * nv
        mu, mv = _nonlinear_pair(act, state.params, pu, pv, zero_mode, pad)
        out_u = pu + P211 * (mu - nu)
        out_v = pv + P221 * (mu - nu) + P222 * (mv - nv)

        out_u = 0.5 * (out_u + np.conj(out_u[act.neg_perm]))
        out_v = 0.5 * (out_v + np.conj(out_v[act.neg_perm]))
    if not (np.all(np.isfinite(out_u.view(float))) and np.all(np.isfinite(out_v.view(float)))):
        raise NonFiniteState(f"non-finite coefficient after step at t = {state.t:.6g}")
    return replace(
        state,
        u_field=HullField(act, out_u, state.u_field.symmetric),
        v_field=HullField(act, out_v, state.v_field.symmetric),
        t=state.t + tab.dt,
        step_index=state.step_index + 1,
    )


def bruss_integrate(
    state: BrusselatorState,
    T: float,
    hooks=(),
    diag_every: int = 10,
    s: float = 3.0,
    grid_axis_points: int | None = None,
) -> tuple[BrusselatorState, diagnostics.Trajectory]:
    """March to time T recording two-component diagnostics."""
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    dt = state.stepper.dt
    n_steps = int(np.floor(T / dt + 1e-9))
    remainder = T - n_steps * dt
    traj = diagnostics.Trajectory([], dt=dt, lam=None, s=s, equation="brusselator")

    def grab(st):
        rec = diagnostics.record(st, s=s, grid_axis_points=grid_axis_points)
        traj.records.append(rec)
        for hook in hooks:
            hook(st, rec)

    grab(state)
    for i in range(1, n_steps + 1):
        state = bruss_step(state)
        if i % diag_every == 0 and i != n_steps:
            grab(state)
    if remainder > 1e-12 * max(1.0, T):
        state = bruss_step(state, dt=remainder)
        state = replace(state, stepper=replace(state.stepper, dt=dt), _tables=None)
    if n_steps > 0 or remainder > 0:
        grab(state)
    return state, traj


def steady_ic(active: ActiveModeSet, params: BrusselatorParams) -> tuple[HullField, HullField]:
    """Both components constant at the homogeneous steady state."""
    ubar, vbar = steady_state(params)
    u = HullField.zeros(active)
    v = HullField.zeros(active)
    zero = np.zeros(active.rank, dtype=int)
    u.set_coefficient(zero, ubar)
    v.set_coefficient(zero, vbar)
    u.symmetric = v.symmetric = True
    return u, v


def steady_plus_critical_ic(
    active: ActiveModeSet,
    params: BrusselatorParams,
    eigenvector: tuple[float, float],
    amplitude: float = 1e-6,
) -> tuple[HullField, HullField]:
    """Steady state plus a symmetric critical-orbit mode along the eigenvector.

    The perturbation lives on the orbit of the first generator; scale the
    module so that orbit sits at the critical wavenumber.
    """
    u, v = steady_ic(active, params)
    e0 = np.zeros(active.rank, dtype=int)
    e0[0] = 1
    orbit = active.orbit_positions(e0)
    u.coeffs[orbit] += amplitude * eigenvector[0]
    v.coeffs[orbit] += amplitude * eigenvector[1]
    return u, v


def positivity_check(state: BrusselatorState, grid_resolution: int | None = None) -> tuple[float, float]:
    """(min u, min v) over the torus sample grid."""
    return (
        state.u_field.torus_minmax(grid_resolution)[0],
        state.v_field.torus_minmax(grid_resolution)[0],
    )


def make_bruss_state(
    u: HullField,
    v: HullField,
    params: BrusselatorParams,
    dt: float = 0.01,
    t: float = 0.0,
    dealias: int = 2,
) -> BrusselatorState:
    return BrusselatorState(u, v, t, params, BrussStepper(dt, dealias))
