"""Trajectory records and the inequality checks run over them.

A DiagnosticsRecord is a pure snapshot of one solver state; a Trajectory is
the ordered list of records plus the run constants the checks need (dt,
bifurcation parameter, Sobolev index).  Check functions never mutate their
inputs and carry their tolerances in the returned CheckReport, whose rule is
always: passed iff worst_slack <= tolerance.

Discrete-time slack allowances come from the stepper's local error order:
monotonicity of the descent functional is allowed 10*dt^3 per step, its
derivative identity C*dt with C calibrated from the trajectory itself, and
the mass inequality 10*dt^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hull import HullField
from .symmetry import FrequencyModule

DECAY_TOL = 1e-9
L1_CONTROL_TOL = 1e-12


class NeverEnters(ValueError):
    """Trajectory ended before reaching the absorbing ball."""


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    step: int
    l2: float
    l1: float
    hs: float
    energy: float
    rhs_l2: float
    grad_hull_sq: float
    sym_drift: float
    min_u: float
    max_u: float
    min_v: float | None = None
    max_v: float | None = None

    def __post_init__(self):
        vals = [self.t, self.l2, self.l1, self.hs, self.energy, self.rhs_l2,
                self.grad_hull_sq, self.sym_drift, self.min_u, self.max_u]
        if self.min_v is not None:
            vals += [self.min_v, self.max_v]
        if not np.all(np.isfinite(vals)):
            raise ValueError("diagnostics entries must be finite")
        if self.l2 > self.l1 + 1e-12:
            raise ValueError("l2 exceeded l1; coefficients are inconsistent")

    @property
    def two_component(self) -> bool:
        return self.min_v is not None


@dataclass
class Trajectory:
    records: list
    dt: float
    lam: float | None = None
    s: float = 3.0
    equation: str = "sh"

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")


def _monitor_axis_points(rank: int) -> int:
    # In-loop extrema are monitors, recorded possibly every step; a coarse
    # sample keeps the cost linear in the mode count.  Checks that need the
    # full-resolution sup norm call torus_minmax on the final state directly.
    return 64 if rank <= 2 else 8


def record(state, s: float = 3.0, grid_axis_points: int | None = None) -> DiagnosticsRecord:
    """Snapshot a solver state.  Pure; safe to call repeatedly.

    Works for one-component states (attributes field / rhs_field()) and
    two-component states (u_field, v_field / rhs_pair()); the energy column
    is the gradient-flow functional for the former and zero for the latter,
    which has no comparable descent functional.
    """
    step = getattr(state, "step_index", 0)
    if hasattr(state, "u_field"):
        u, v = state.u_field, state.v_field
        if grid_axis_points is None:
            grid_axis_points = _monitor_axis_points(u.active.rank)
        du, dv = state.rhs_pair()
        min_u, max_u = u.torus_minmax(grid_axis_points)
        min_v, max_v = v.torus_minmax(grid_axis_points)
        return DiagnosticsRecord(
            t=float(state.t),
            step=step,
            l2=float(np.hypot(u.l2_norm(), v.l2_norm())),
            l1=u.l1_norm() + v.l1_norm(),
            hs=float(np.hypot(u.hs_norm(s), v.hs_norm(s))),
            energy=0.0,
            rhs_l2=float(np.hypot(du.l2_norm(), dv.l2_norm())),
            grad_hull_sq=u.grad_sq() + v.grad_sq(),
            sym_drift=max(u.symmetry_drift(), v.symmetry_drift()),
            min_u=min_u, max_u=max_u, min_v=min_v, max_v=max_v,
        )
    u = state.field
    lam = state.params.lam
    du = state.rhs_field()
    if grid_axis_points is None:
        grid_axis_points = _monitor_axis_points(u.active.rank)
    min_u, max_u = u.torus_minmax(grid_axis_points)
    return DiagnosticsRecord(
        t=float(state.t),
        step=step,
        l2=u.l2_norm(),
        l1=u.l1_norm(),
        hs=u.hs_norm(s),
        energy=u.energy(lam),
        rhs_l2=du.l2_norm(),
        grad_hull_sq=u.grad_sq(),
        sym_drift=u.symmetry_drift(),
        min_u=min_u, max_u=max_u,
    )


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    worst_slack: float
    worst_t: float
    tolerance: float

    def __post_init__(self):
        if self.passed != (self.worst_slack <= self.tolerance):
            raise ValueError("passed flag must equal worst_slack <= tolerance")

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.name}: worst slack {self.worst_slack:.3e} "
            f"(tolerance {self.tolerance:.3e}) at t = {self.worst_t:.4g}"
        )


def _report(name, slacks, times, tolerance) -> CheckReport:
    slacks = np.asarray(slacks, dtype=float)
    if len(slacks) == 0:
        return CheckReport(name, True, -np.inf, 0.0, tolerance)
    i = int(np.argmax(slacks))
    worst = float(slacks[i])
    return CheckReport(name, bool(worst <= tolerance), worst, float(times[i]), tolerance)


def check_decay_negative_lambda(traj: Trajectory, lam: float) -> CheckReport:
    """l2(t) <= e^{lam t} l2(0), the linear decay rate with the cubic helping."""
    if lam >= 0:
        raise ValueError("decay check needs a negative bifurcation parameter")
    t = traj.times
    l2 = traj.column("l2")
    slack = l2 - np.exp(lam * t) * l2[0]
    return _report("exponential-decay", slack, t, DECAY_TOL)


def check_decay_zero_lambda(traj: Trajectory) -> CheckReport:
    """At the bifurcation point: l2(t)^2 <= N0/(1 + N0 t) (comparison bound)."""
    t = traj.times
    n = traj.column("l2") ** 2
    slack = n - n[0] / (1.0 + n[0] * t)
    return _report("polynomial-decay", slack, t, DECAY_TOL)


def check_absorbing_ball(traj: Trajectory, lam: float, eps: float = 0.1) -> CheckReport:
    """Trajectories enter the ball of radius (1+eps)*sqrt(lam) and stay.

    Starting inside the unit-radius ball sqrt(lam) additionally verifies
    forward invariance of that smaller ball.
    """
    if lam <= 0:
        raise ValueError("absorbing ball needs a positive bifurcation parameter")
    t = traj.times
    l2 = traj.column("l2")
    root = np.sqrt(lam)
    radius = (1.0 + eps) * root
    slacks = []
    times = []
    if l2[0] <= root:
        slacks.append(l2 - root)
        times.append(t)
        name = "ball-invariance"
    else:
        inside = np.nonzero(l2 <= radius)[0]
        if len(inside) == 0:
            raise NeverEnters(
                f"never reached radius {radius:.4g}; final l2 = {l2[-1]:.4g}"
            )
        k = inside[0]
        slacks.append(l2[k:] - radius)
        times.append(t[k:])
        name = "ball-entry"
    return _report(name, np.concatenate(slacks), np.concatenate(times), DECAY_TOL)


def check_lyapunov(traj: Trajectory) -> tuple[CheckReport, CheckReport]:
    """Descent of the gradient-flow functional, and its derivative identity.

    Returns (monotonicity, identity).  Monotonicity allows 10*dt^3 of local
    error per step; the identity compares the finite-difference slope of the
    functional with the negative squared flow speed at interval midpoints,
    within C*dt for C = 10*max rhs_l2^2.
    """
    t = traj.times
    P = traj.column("energy")
    steps = traj.column("step")
    rhs2 = traj.column("rhs_l2") ** 2
    dP = np.diff(P)
    nsteps = np.maximum(np.diff(steps), 1.0)
    mono_slack = dP / nsteps
    mono = _report("lyapunov-monotonicity", mono_slack, t[1:], 10.0 * traj.dt ** 3)

    dt_rec = np.diff(t)
    mid_rhs2 = 0.5 * (rhs2[:-1] + rhs2[1:])
    ident_slack = np.abs(dP / dt_rec + mid_rhs2)
    C = 10.0 * float(np.max(rhs2)) if len(rhs2) else 0.0
    ident = _report("lyapunov-identity", ident_slack, 0.5 * (t[:-1] + t[1:]), C * traj.dt)
    return mono, ident


def check_energy_inequality(traj: Trajectory, lam: float) -> CheckReport:
    """Finite-difference d(l2^2)/dt <= N(lam - N) + 10*dt^2."""
    t = traj.times
    n = traj.column("l2") ** 2
    dn = np.diff(n) / np.diff(t)
    bound = n[:-1] * (lam - n[:-1])
    slack = dn - bound - 10.0 * traj.dt ** 2
    return _report("mass-inequality", slack, t[1:], DECAY_TOL)


def check_h1_growth(traj: Trajectory, lam: float) -> CheckReport:
    """Squared hull gradient grows no faster than e^{2 lam t}."""
    t = traj.times
    g = traj.column("grad_hull_sq")
    slack = g - np.exp(2.0 * lam * t) * g[0]
    return _report("gradient-growth", slack, t, DECAY_TOL)


def check_l1_control(traj: Trajectory, constant: float) -> CheckReport:
    """l1 <= C * hs at every sample, C from the active set and Sobolev index."""
    slack = traj.column("l1") - constant * traj.column("hs")
    return _report("l1-sobolev-control", slack, traj.times, L1_CONTROL_TOL)


def check_symmetry_preservation(traj: Trajectory, tolerance: float = 1e-10) -> CheckReport:
    """Symmetry drift stays at round-off along the whole trajectory."""
    return _report("symmetry-preservation", traj.column("sym_drift"), traj.times, tolerance)


def check_separation(traj: Trajectory, threshold: float) -> CheckReport:
    """Half-range of the pattern stays above a calibrated floor."""
    sep = 0.5 * (traj.column("max_u") - traj.column("min_u"))
    slack = threshold - sep
    return _report("separation-from-constants", slack, traj.times, 0.0)


@dataclass(frozen=True)
class ClassificationReport:
    """Quasicrystal conditions: finite spectrum mass, dense-rank support,
    covering of the small wavevector ball."""

    l1_mass: float
    condition_i: bool
    condition_ii: bool
    support_integer_rank: int
    support_real_rank: int
    condition_iii: bool
    best_eps: float
    caveat: str

    def is_quasicrystal(self) -> bool:
        return self.condition_i and self.condition_ii and self.condition_iii


def classify_quasicrystal(field: HullField, eps_grid, M: float, r: float) -> ClassificationReport:
    """Evaluate the three defining conditions on a truncated field.

    Condition (i), summable amplitudes, always holds on a truncation and is
    reported with that caveat.  Condition (ii) asks that the subgroup
    generated by the eps-support is not uniformly discrete: true when the
    integer rank of the support indices exceeds the dimension of their
    wavevector span.  Condition (iii) runs the covering check over the eps
    grid and reports the largest eps that passes.
    """
    from .hull import condition_iii_check

    eps_grid = sorted(float(e) for e in eps_grid)
    mass = field.l1_norm()

    smallest = eps_grid[0] if eps_grid else 0.0
    support = field.support_set(smallest)
    if len(support) == 0:
        int_rank = real_rank = 0
        cond_ii = False
    else:
        int_rank = int(np.linalg.matrix_rank(support.astype(float), tol=1e-9))
        kvecs = support @ field.active.module.generators
        real_rank = int(np.linalg.matrix_rank(kvecs, tol=1e-9))
        cond_ii = int_rank > real_rank

    best = 0.0
    cond_iii = False
    for eps in reversed(eps_grid):
        ok, _ = condition_iii_check(field, M, r, eps)
        if ok:
            best = eps
            cond_iii = True
            break

    return ClassificationReport(
        l1_mass=mass,
        condition_i=bool(np.isfinite(mass)),
        condition_ii=bool(cond_ii),
        support_integer_rank=int_rank,
        support_real_rank=real_rank,
        condition_iii=cond_iii,
        best_eps=best,
        caveat=(
            "truncated spectrum: summability is automatic and the covering "
            "check enumerates bounded-coefficient module points only"
        ),
    )
