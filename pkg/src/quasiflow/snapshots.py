"""Snapshot, CSV, and raster persistence.

A snapshot is a text manifest followed by a raw binary payload:

    quasiflow-snapshot 1
    <key = value lines: the resolved run configuration>
    generator <i> = <17-significant-digit components>
    active_count = <number of modes>
    t = <time>
    step_index = <count>
    ---
    <little-endian float64 pairs, real then imaginary, one pair per active
     mode in lexicographic index order; two such blocks for two components>

Coefficients survive the round trip bit-exactly because they never pass
through decimal.  The module is rebuilt from the symmetry descriptor and
seed wavevector, then cross-checked against the stored generator decimals.
"""

from __future__ import annotations

import io
import os

import numpy as np

from . import brusselator as br
from . import config as cfgmod
from . import sh
from .diagnostics import Trajectory
from .hull import ActiveModeSet, HullField, render_image
from .symmetry import build_holohedry, generate_frequency_module

FORMAT_NAME = "quasiflow-snapshot"
FORMAT_VERSION = 1
_SEPARATOR = b"---\n"


class FormatVersionMismatch(ValueError):
    """Snapshot written by an incompatible format revision."""


class CorruptPayload(ValueError):
    """Payload length or manifest consistency check failed."""


def _manifest_text(state, cfg: cfgmod.RunConfig) -> str:
    active = _active_of(state)
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}"]
    lines.extend(f"{k} = {v}" for k, v in cfgmod.config_key_values(cfg))
    for i, row in enumerate(active.module.generators):
        lines.append(
            f"generator {i} = " + " ".join(f"{x:.17g}" for x in row)
        )
    lines.append(f"active_count = {len(active)}")
    lines.append(f"t = {state.t:.17g}")
    lines.append(f"step_index = {state.step_index}")
    return "\n".join(lines) + "\n"


def _active_of(state) -> ActiveModeSet:
    if hasattr(state, "u_field"):
        return state.u_field.active
    return state.field.active


def _payload_blocks(state):
    if hasattr(state, "u_field"):
        return (state.u_field.coeffs, state.v_field.coeffs)
    return (state.field.coeffs,)


def write_snapshot(state, path, cfg: cfgmod.RunConfig | None = None) -> None:
    """Persist a solver state; ``cfg`` defaults to one synthesized from it."""
    if cfg is None:
        cfg = config_from_state(state)
    blob = io.BytesIO()
    blob.write(_manifest_text(state, cfg).encode("ascii"))
    blob.write(_SEPARATOR)
    for coeffs in _payload_blocks(state):
        pairs = np.empty((len(coeffs), 2), dtype="<f8")
        pairs[:, 0] = coeffs.real
        pairs[:, 1] = coeffs.imag
        blob.write(pairs.tobytes())
    data = blob.getvalue()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def config_from_state(state) -> cfgmod.RunConfig:
    """Minimal reconstruction config for states not born from a file."""
    active = _active_of(state)
    module = active.module
    base = dict(
        symmetry=module.holohedry.name,
        T=0.0,
        k0=tuple(float(x) for x in module.k0),
        N=active.N,
        K_max=active.K_max,
        dt=state.stepper.dt,
        dealias=state.stepper.dealias,
    )
    if hasattr(state, "u_field"):
        p = state.params
        return cfgmod.RunConfig(
            equation="brusselator", A=p.A, B=p.B, d1=p.d1, d2=p.d2,
            ic="steady-plus-critical", **base,
        ).validate()
    return cfgmod.RunConfig(
        equation="sh", lam=state.params.lam,
        scheme=state.stepper.scheme, **base,
    ).validate()


def _parse_manifest(text: str):
    lines = text.splitlines()
    if not lines:
        raise CorruptPayload("empty manifest")
    head = lines[0].split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise FormatVersionMismatch(f"not a {FORMAT_NAME} file")
    if not head[1].isdigit() or int(head[1]) != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"format version {head[1]}, this build reads {FORMAT_VERSION}"
        )
    config_lines = []
    generators = {}
    meta = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key.startswith("generator "):
            generators[int(key.split()[1])] = np.array(
                [float(x) for x in raw.split()]
            )
        elif key in ("active_count", "t", "step_index"):
            meta[key] = raw
        else:
            config_lines.append(line)
    cfg = cfgmod.parse_config("\n".join(config_lines))
    gen = np.array([generators[i] for i in sorted(generators)])
    return cfg, gen, int(meta["active_count"]), float(meta["t"]), int(meta["step_index"])


def read_snapshot(path):
    """Rebuild the solver state; raises on version or consistency mismatch."""
    with open(path, "rb") as fh:
        data = fh.read()
    sep = data.find(_SEPARATOR)
    if sep < 0:
        raise CorruptPayload("missing manifest/payload separator")
    cfg, gen, count, t, step_index = _parse_manifest(
        data[:sep].decode("ascii")
    )
    payload = data[sep + len(_SEPARATOR):]

    module = generate_frequency_module(
        build_holohedry(cfg.symmetry),
        None if cfg.k0 is None else np.array(cfg.k0, dtype=float),
    )
    if gen.shape != module.generators.shape or not np.allclose(
        gen, module.generators, atol=1e-12, rtol=0.0
    ):
        raise CorruptPayload(
            "stored generators disagree with the rebuilt frequency module"
        )
    active = ActiveModeSet(module, cfg.N, cfg.K_max)
    if len(active) != count:
        raise CorruptPayload(
            f"manifest says {count} active modes, reconstruction has {len(active)}"
        )
    components = 2 if cfg.equation == "brusselator" else 1
    expected = 16 * count * components
    if len(payload) != expected:
        raise CorruptPayload(
            f"payload is {len(payload)} bytes, expected {expected}"
        )
    fields = []
    for c in range(components):
        pairs = np.frombuffer(
            payload[c * 16 * count:(c + 1) * 16 * count], dtype="<f8"
        ).reshape(count, 2)
        fields.append(HullField(active, pairs[:, 0] + 1j * pairs[:, 1]))

    if cfg.equation == "brusselator":
        params = br.BrusselatorParams(A=cfg.A, B=cfg.B, d1=cfg.d1, d2=cfg.d2)
        state = br.BrusselatorState(
            fields[0], fields[1], t, params,
            br.BrussStepper(cfg.dt, dealias=cfg.dealias),
            step_index=step_index,
        )
    else:
        state = sh.SolverState(
            fields[0], t, sh.SHParams(cfg.lam),
            sh.StepperConfig(scheme=cfg.scheme, dt=cfg.dt, dealias=cfg.dealias),
            step_index=step_index,
        )
    return state, cfg


CSV_COLUMNS_ONE = ("t", "l2", "l1", "hs", "energy", "rhs_l2",
                   "grad_hull_sq", "sym_drift", "min_u", "max_u")
CSV_COLUMNS_TWO = CSV_COLUMNS_ONE + ("min_v", "max_v")


def write_diagnostics_csv(traj: Trajectory, path) -> None:
    """One row per record, 17 significant digits throughout."""
    two = bool(traj.records) and traj.records[0].two_component
    columns = CSV_COLUMNS_TWO if two else CSV_COLUMNS_ONE
    rows = [",".join(columns)]
    for rec in traj.records:
        rows.append(",".join(f"{getattr(rec, c):.17g}" for c in columns))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def read_diagnostics_csv(path) -> dict:
    """Columns back as float arrays, keyed by header name."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        body = fh.read()
    if not body.strip():
        return {name: np.empty(0) for name in header}
    table = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    return {name: table[:, i] for i, name in enumerate(header)}


def export_raster(field: HullField, window, resolution, path) -> None:
    """Binary PGM (P5, maxval 255) of a planar field over a square window."""
    pixels = render_image(field, window, resolution)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())
