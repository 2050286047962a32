"""Monte Carlo of the Kitaev-derived loop weights on the super-honeycomb lattice.

Two scans are run:

* wavefunction deformation, Q(t_ext) for several sizes and the crossing
  of consecutive sizes;
* purity, Q(p) for several sizes, checked for a size ordering that never
  changes sign (no crossing).

Writes results/kitaev_wavefunction.csv, results/kitaev_purity.csv and a
summary results/kitaev_mc.json.
"""
from __future__ import annotations

import argparse
import json
import logging
import time
from pathlib import Path

import numpy as np

from loopmodels import kitaev
from loopmodels.lattice import build_lattice
from loopmodels.mc import McConfig, curve_crossing, run_metropolis, seeds_for

log = logging.getLogger("kitaev_mc")


def scan(sizes, values, variant, eq, meas, seed, kappa):
    rows = []
    seeds = iter(seeds_for(seed, len(sizes) * len(values)))
    for L in sizes:
        sup = build_lattice("super-honeycomb-embedding", L, L)
        H = kitaev.build_hamiltonian(L, L, kappa=kappa, lattice=sup.embedding.honeycomb)
        model = kitaev.kitaev_weight_model(kitaev.ground_covariance(H), sup, variant)
        for v in values:
            t_ext = v if variant == "wavefunction" else kitaev.t_ext_from_p(v)
            sd = next(seeds)
            t0 = time.time()
            r = run_metropolis(McConfig(sup.descriptor, model, t_ext=t_ext, eq_sweeps=eq,
                                        measure_sweeps=meas, seed=sd))
            log.info("%s L=%d value=%.3f Q=%.4f +- %.4f (%.0fs)", variant, L, v, r.binder_Q,
                     r.q_err, time.time() - t0)
            rows.append({"variant": variant, "size": L, "value": float(v), "t_ext": t_ext,
                         "seed": sd, **{k: r.row()[k] for k in
                                        ("mean_length", "var_length_normalized", "binder_Q",
                                         "q_err", "acceptance_rate")}})
    return rows


def curves(rows, L):
    r = sorted((x for x in rows if x["size"] == L), key=lambda x: x["value"])
    return (np.array([x["value"] for x in r]), np.array([x["binder_Q"] for x in r]),
            np.array([x["q_err"] for x in r]))


def write_csv(path, rows):
    keys = list(rows[0])
    with open(path, "w") as fh:
        fh.write("#schema=1\n" + ",".join(keys) + "\n")
        for r in rows:
            fh.write(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in keys)
                     + "\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 12])
    ap.add_argument("--t-grid", type=float, nargs=3, default=[0.70, 1.00, 0.025],
                    metavar=("LO", "HI", "STEP"))
    ap.add_argument("--p-grid", type=float, nargs="+",
                    default=[0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5])
    ap.add_argument("--eq", type=int, default=5000)
    ap.add_argument("--measure", type=int, default=3000)
    ap.add_argument("--purity-eq", type=int, default=3000)
    ap.add_argument("--kappa", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="results")
    ap.add_argument("--skip-purity", action="store_true")
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    lo, hi, step = a.t_grid
    grid = np.round(np.arange(lo, hi + step / 2, step), 6)
    sizes = sorted(a.sizes)

    wf = scan(sizes, grid, "wavefunction", a.eq, a.measure, a.seed, a.kappa)
    write_csv(out / "kitaev_wavefunction.csv", wf)
    crossings = []
    for s1, s2 in zip(sizes, sizes[1:]):
        x, qa, ea = curves(wf, s1)
        _, qb, eb = curves(wf, s2)
        crossings.append({"sizes": [s1, s2], "linear": curve_crossing(x, qa, qb, ea, eb),
                          "fit": curve_crossing(x, qa, qb, ea, eb, method="fit")})
    summary = {"sizes": sizes, "kappa": a.kappa, "eq_sweeps": a.eq, "measure_sweeps": a.measure,
               "wavefunction_crossings": crossings,
               "wavefunction_crossing": float(np.median([c["linear"] for c in crossings]))}

    if not a.skip_purity:
        pu = scan(sizes, a.p_grid, "purity", a.purity_eq, a.measure, a.seed + 1, a.kappa)
        write_csv(out / "kitaev_purity.csv", pu)
        diffs = []
        for s1, s2 in zip(sizes, sizes[1:]):
            _, qa, ea = curves(pu, s1)
            _, qb, eb = curves(pu, s2)
            d = qb - qa
            tol = 3 * np.hypot(ea, eb)
            # sizes keep their order wherever the difference is resolved
            resolved = np.abs(d) > tol
            signs = set(np.sign(d[resolved]).astype(int).tolist())
            diffs.append({"sizes": [s1, s2], "diff": d.tolist(), "tol": tol.tolist(),
                          "monotone": len(signs) <= 1})
        summary["purity_p_grid"] = list(a.p_grid)
        summary["purity_pairs"] = diffs
        summary["purity_monotone"] = all(d["monotone"] for d in diffs)

    (out / "kitaev_mc.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
