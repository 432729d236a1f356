"""Fourth-order pattern-forming dynamics on the hull torus.

The evolution dU/dt = -(lap+1)^2 U + lam*U - U^3 diagonalizes over modes:
the linear symbol is lam - (|k(m)|^2 - 1)^2, stiff because of the quartic
growth in |k|, so the steppers treat it exactly through exponentials and
phi functions and integrate only the cubic term approximately (order 2 or 4
Runge-Kutta exponential time differencing).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics
from .etd import SERIES_THRESHOLD, phi1, phi2, phi3
from .hull import ActiveModeSet, HullField, TooLarge, convolve_direct
from .symmetry import FrequencyModule, mode_wavevector

SCHEMES = ("etdrk2", "etdrk4")
DIRECT_PAIR_LIMIT = 10_000


class NonFiniteState(FloatingPointError):
    """A coefficient left the representable range (truncated-system blow-up)."""


@dataclass(frozen=True)
class SHParams:
    lam: float

    def __post_init__(self):
        if self.lam > 1.0:
            warnings.warn(
                "bifurcation parameter above 1 leaves the regime where the "
                "pattern amplitude estimates apply",
                stacklevel=2,
            )


@dataclass(frozen=True)
class StepperConfig:
    scheme: str = "etdrk2"
    dt: float = 0.01
    phi_series_threshold: float = SERIES_THRESHOLD
    dealias: int = 2

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if self.dealias < 2:
            raise ValueError("pad factor below 2 cannot clear cubic aliasing")


def linear_symbol(module: FrequencyModule, m, lam: float) -> float:
    """Growth rate of one mode: lam - (|k(m)|^2 - 1)^2."""
    k = mode_wavevector(module, np.asarray(m))
    return float(lam - (k @ k - 1.0) ** 2)


def sigma_array(active: ActiveModeSet, lam: float) -> np.ndarray:
    return lam - (active.ksq - 1.0) ** 2


def rhs(field: HullField, lam: float) -> HullField:
    """sigma * a - (u^3 coefficients), the full discretized flow."""
    sig = sigma_array(field.active, lam)
    return HullField(field.active, sig * field.coeffs - field.cubic().coeffs)


def cubic_direct(field: HullField) -> HullField:
    """Brute-force triple convolution of the coefficients, as an oracle.

    Each retained output mode sums over |active|^2 index pairs; refuses via
    TooLarge beyond 10^4 pairs per mode to keep the oracle honest about its
    cost.
    """
    n = len(field.active)
    if n * n > DIRECT_PAIR_LIMIT:
        raise TooLarge(
            f"{n * n} index pairs per output mode exceeds the "
            f"{DIRECT_PAIR_LIMIT} oracle budget"
        )
    conv = convolve_direct(field, field, field)
    out = HullField.zeros(field.active)
    for i, m in enumerate(field.active.indices):
        out.coeffs[i] = conv.get(tuple(m), 0.0)
    return out


class _EtdTables:
    """Per-run stepper coefficients for a fixed (sigma, dt, scheme)."""

    def __init__(self, sigma: np.ndarray, config: StepperConfig):
        self.dt = config.dt
        self.scheme = config.scheme
        h = config.dt
        thr = config.phi_series_threshold
        z = h * sigma
        self.E = np.exp(z)
        if config.scheme == "etdrk2":
            self.hp1 = h * phi1(z, thr)
            self.hp2 = h * phi2(z, thr)
        else:
            z2 = 0.5 * z
            self.E2 = np.exp(z2)
            self.hq = 0.5 * h * phi1(z2, thr)
            p1, p2, p3 = phi1(z, thr), phi2(z, thr), phi3(z, thr)
            self.f1 = h * (p1 - 3.0 * p2 + 4.0 * p3)
            self.f2 = h * (2.0 * p2 - 4.0 * p3)
            self.f3 = h * (4.0 * p3 - p2)


@dataclass
class SolverState:
    field: HullField
    t: float
    params: SHParams
    stepper: StepperConfig
    step_index: int = 0
    _tables: _EtdTables | None = None

    def rhs_field(self) -> HullField:
        return rhs(self.field, self.params.lam)

    def tables(self) -> _EtdTables:
        if self._tables is None or self._tables.dt != self.stepper.dt \
                or self._tables.scheme != self.stepper.scheme:
            self._tables = _EtdTables(
                sigma_array(self.field.active, self.params.lam), self.stepper
            )
        return self._tables


def _nonlinear(coeffs: np.ndarray, active: ActiveModeSet, pad: int = 2) -> np.ndarray:
    vals = active.grid_values(coeffs, pad_factor=pad)
    return -active.coefficients_from_grid(vals ** 3)


def _hermitian_clean(coeffs: np.ndarray, active: ActiveModeSet) -> np.ndarray:
    return 0.5 * (coeffs + np.conj(coeffs[active.neg_perm]))


def step(state: SolverState, dt: float | None = None) -> SolverState:
    """One exponential time differencing step.

    The linear factor is exact; Hermitian symmetry is reprojected after the
    update so round-off cannot accumulate a complex-valued drift.
    """
    if dt is not None and dt != state.stepper.dt:
        state = replace(state, stepper=replace(state.stepper, dt=dt), _tables=None)
    tab = state.tables()
    act = state.field.active
    a = state.field.coeffs

    pad = state.stepper.dealias

    # overflow surfaces as the explicit NonFiniteState below, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        if tab.scheme == "etdrk2":
            Na = _nonlinear(a, act, pad)
            pred = tab.E * a + tab.hp1 * Na
            out = pred + tab.hp2 * (_nonlinear(pred, act, pad) - Na)
        else:
            Na = _nonlinear(a, act, pad)
            an = tab.E2 * a + tab.hq * Na
            Nb = _nonlinear(an, act, pad)
            bn = tab.E2 * a + tab.hq * Nb
            Nc = _nonlinear(bn, act, pad)
            cn = tab.E2 * an + tab.hq * (2.0 * Nc - Na)
            Nd = _nonlinear(cn, act, pad)
            out = tab.E * a + tab.f1 * Na + tab.f2 * (Nb + Nc) + tab.f3 * Nd

        out = _hermitian_clean(out, act)
    if not np.all(np.isfinite(out.view(float))):
        raise NonFiniteState(
            f"non-finite coefficient after step at t = {state.t:.6g}"
        )
    return replace(
        state,
        field=HullField(act, out, state.field.symmetric),
        t=state.t + tab.dt,
        step_index=state.step_index + 1,
    )


def integrate(
    state: SolverState,
    T: float,
    hooks=(),
    diag_every: int = 10,
    s: float = 3.0,
    grid_axis_points: int | None = None,
) -> tuple[SolverState, diagnostics.Trajectory]:
    """March to time T, recording diagnostics every diag_every steps.

    The first and final states are always recorded.  Hooks are called with
    (state, record) at each recording.  A final fractional step lands
    exactly on T when T is not a multiple of dt.
    """
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    dt = state.stepper.dt
    n_steps = int(np.floor(T / dt + 1e-9))
    remainder = T - n_steps * dt
    traj = diagnostics.Trajectory([], dt=dt, lam=state.params.lam, s=s, equation="sh")

    def grab(st):
        rec = diagnostics.record(st, s=s, grid_axis_points=grid_axis_points)
        traj.records.append(rec)
        for hook in hooks:
            hook(st, rec)

    grab(state)
    for i in range(1, n_steps + 1):
        try:
            state = step(state)
        except NonFiniteState as exc:
            raise NonFiniteState(f"{exc} (blow-up after {i - 1} full steps)") from None
        if i % diag_every == 0 and i != n_steps:
            grab(state)
    if remainder > 1e-12 * max(1.0, T):
        state = step(state, dt=remainder)
        state = replace(state, stepper=replace(state.stepper, dt=dt), _tables=None)
    if n_steps > 0 or remainder > 0:
        grab(state)
    return state, traj


def quasicrystal_ic(
    active: ActiveModeSet,
    lam: float,
    relative_amplitude: float = 0.5,
    perturbation: float = 0.0,
    seed: int = 0,
) -> HullField:
    """Symmetric pattern seeded on the generating wavevector orbit.

    Uniform real amplitude over the orbit of the first generator, scaled so
    the l2 norm is relative_amplitude * sqrt(lam) (inside the invariant
    ball).  A positive perturbation adds bounded seeded noise to every
    active mode, then resymmetrizes and rescales, so that all modes carry
    nonzero amplitude.
    """
    if not 0 < relative_amplitude <= 1:
        raise ValueError("relative amplitude must lie in (0, 1]")
    if perturbation < 0:
        raise ValueError("perturbation must be nonnegative")
    if lam <= 0:
        raise ValueError("pattern amplitude scale needs a positive parameter")
    target = relative_amplitude * np.sqrt(lam)
    field = HullField.zeros(active)
    e0 = np.zeros(active.rank, dtype=int)
    e0[0] = 1
    orbit = active.orbit_positions(e0)
    field.coeffs[orbit] = target / np.sqrt(len(orbit))
    field.symmetric = True
    if perturbation > 0:
        q = perturbation * np.sqrt(lam) / np.sqrt(2.0)
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-q, q, len(active)) + 1j * rng.uniform(-q, q, len(active))
        field = HullField(active, field.coeffs + noise).hermitianized().symmetrize()
        field = (target / field.l2_norm()) * field
        field.symmetric = True
    return field


def random_ic(active: ActiveModeSet, amplitude: float, seed: int = 0) -> HullField:
    """Hermitian Gaussian noise across all active modes, rescaled to amplitude."""
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=len(active)) + 1j * rng.normal(size=len(active))
    field = HullField(active, raw).hermitianized()
    norm = field.l2_norm()
    if norm == 0 or amplitude == 0:
        return HullField.zeros(active)
    return (amplitude / norm) * field


def make_state(
    field: HullField,
    lam: float,
    scheme: str = "etdrk2",
    dt: float = 0.01,
    t: float = 0.0,
    dealias: int = 2,
) -> SolverState:
    return SolverState(
        field, t, SHParams(lam), StepperConfig(scheme, dt, dealias=dealias)
    )


def branch_growth(
    active: ActiveModeSet,
    lam: float,
    delta: float,
    T: float,
    dt: float = 0.01,
    fit_window: float = 5.0,
    diag_every: int = 10,
) -> tuple[diagnostics.Trajectory, float]:
    """Integrate from a small symmetric seed and fit the early growth rate.

    The seed has l2 norm delta on the critical orbit; for small delta the
    early dynamics are linear with per-mode rate lam, so the fitted slope of
    log l2 over the fit window estimates lam.  Returns (trajectory, rate);
    the rate is nan for the identically zero seed.
    """
    if delta > 1e-4:
        raise ValueError("seed amplitude too large for the linear-growth fit")
    field = HullField.zeros(active)
    e0 = np.zeros(active.rank, dtype=int)
    e0[0] = 1
    orbit = active.orbit_positions(e0)
    if delta > 0:
        field.coeffs[orbit] = delta / np.sqrt(len(orbit))
    field.symmetric = True
    state = make_state(field, lam, dt=dt)
    _, traj = integrate(state, T, diag_every=diag_every)
    t = traj.times
    l2 = traj.column("l2")
    window = (t <= min(fit_window, t[-1]) + 1e-12) & (l2 > 0)
    if np.count_nonzero(window) < 2:
        return traj, float("nan")
    slope = np.polyfit(t[window], np.log(l2[window]), 1)[0]
    return traj, float(slope)
