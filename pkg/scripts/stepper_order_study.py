#!/usr/bin/env python3
"""dt-halving error table for the two exponential integrators.

Errors are final-state coefficient distances against a same-scheme dt/64
reference at T = 1 on a twelvefold pattern run.
"""

import argparse
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from quasiflow import sh
from quasiflow.hull import ActiveModeSet
from quasiflow.symmetry import build_holohedry, generate_frequency_module


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.3)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--N", type=int, default=1)
    ap.add_argument("--dts", type=float, nargs="+",
                    default=[0.1, 0.05, 0.025])
    args = ap.parse_args()

    module = generate_frequency_module(build_holohedry("dihedral:12"))
    active = ActiveModeSet(module, args.N)
    ic = sh.quasicrystal_ic(active, args.lam, 0.5, 1e-3, seed=2)

    def final_coeffs(scheme, dt):
        st = sh.make_state(ic.copy(), args.lam, scheme=scheme, dt=dt)
        fin, _ = sh.integrate(st, args.T, diag_every=10 ** 9)
        return fin.field.coeffs

    for scheme in ("etdrk2", "etdrk4"):
        ref = final_coeffs(scheme, min(args.dts) / 64)
        errs = [float(np.linalg.norm(final_coeffs(scheme, dt) - ref))
                for dt in args.dts]
        print(f"{scheme}:")
        prev = None
        for dt, err in zip(args.dts, errs):
            order = "" if prev is None else f"  order {np.log2(prev / err):.4f}"
            print(f"  dt = {dt:<8g} err = {err:.6e}{order}")
            prev = err


if __name__ == "__main__":
    main()
