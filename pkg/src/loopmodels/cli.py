"""Batch front-end: one JSON experiment file in, CSV/JSON results and a manifest out."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

log = logging.getLogger("loopmodels")

COMMANDS = ("oracle-check", "mc-scan", "kitaev-extract", "kitaev-mc", "qd-overlap", "spectrum",
            "fidelity-check", "weight-table")
SCHEMA = "#schema=1"
EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 2, 3

MC_COLUMNS = ["lattice", "N", "t", "size_x", "size_y", "seed", "mean_length", "var_length_norm",
              "binder_Q", "q_err", "acceptance"]


@dataclass
class ExperimentSpec:
    command: str
    params: dict = field(default_factory=dict)
    out: str = "results"
    seed: int = 0
    seed_policy: str = "per-task"  # or "fixed"
    workers: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        d = json.loads(text)
        unknown = set(d) - {"command", "params", "out", "seed", "seed_policy", "workers"}
        if unknown:
            raise ValueError(f"unknown spec fields {sorted(unknown)}")
        return cls(**d)


# ---------------------------------------------------------------------------
# validation


def _in(x, lo, hi):
    return isinstance(x, (int, float)) and lo <= x <= hi


def validate(spec: ExperimentSpec) -> list:
    """All diagnostics at once; an empty list means the spec can run."""
    diag = []
    if spec.command not in COMMANDS:
        return [f"unknown command {spec.command!r}; expected one of {', '.join(COMMANDS)}"]
    if spec.seed_policy not in ("fixed", "per-task"):
        diag.append("seed_policy must be 'fixed' or 'per-task'")
    if not isinstance(spec.workers, int) or spec.workers < 1:
        diag.append("workers must be a positive integer")
    P = spec.params
    for key in ("p", "p_list", "p_grid"):
        for p in np.atleast_1d(P.get(key, [])):
            if not _in(float(p), 0, 0.5):
                diag.append(f"{key}: p = {p} outside [0, 1/2]")
    for key in ("t", "t_grid", "t_ext", "t_ext_grid"):
        for t in np.atleast_1d(P.get(key, [])):
            if not _in(float(t), 0, 1):
                diag.append(f"{key}: t = {t} outside [0, 1]")
    kind = P.get("lattice", "honeycomb")
    sizes = [tuple(s) for s in P.get("sizes", [])]
    if spec.command in ("kitaev-mc", "kitaev-extract", "weight-table"):
        kind = "super-honeycomb-embedding"
        if spec.command == "kitaev-extract":
            sizes = [(P.get("lx", 24), ly) for ly in P.get("ly_list", [2, 4, 6, 8, 10, 12])]
        elif spec.command == "weight-table":
            sizes = [(P.get("lx", 12), P.get("ly", 6))]
    for lx, ly in sizes:
        if kind == "super-honeycomb-embedding" and (lx % 6 or ly % 2):
            diag.append(f"super-honeycomb size {lx}x{ly}: lx must be a multiple of 6 and ly even")
        if spec.command == "kitaev-mc" and lx * ly > 288:
            diag.append(f"fermionic Monte Carlo size {lx}x{ly} exceeds the cap lx*ly <= 288")
        if min(lx, ly) < 1:
            diag.append(f"size {lx}x{ly} must be positive")
    if spec.command == "mc-scan":
        if kind not in ("honeycomb", "square", "triangular"):
            diag.append(f"mc-scan lattice {kind!r} not supported")
        if not P.get("t_grid") or not sizes:
            diag.append("mc-scan needs a nonempty t_grid and sizes")
        N = P.get("N", 1)
        if not _in(N, 1e-12, 2) and P.get("variant", "topological") == "topological":
            diag.append("N must lie in (0, 2] for the loop-model scan")
    if spec.command == "kitaev-mc":
        if P.get("variant", "wavefunction") not in ("wavefunction", "purity"):
            diag.append("kitaev-mc variant must be 'wavefunction' or 'purity'")
        if not sizes:
            diag.append("kitaev-mc needs sizes")
    if spec.command == "qd-overlap":
        nx, ny = P.get("nx", 4), P.get("ny", 4)
        if nx < 2 or ny < 2 or (nx - 1) * (ny - 1) > 16:
            diag.append("qd-overlap patch must satisfy 2 <= nx, ny and (nx-1)(ny-1) <= 16")
    if spec.command == "spectrum":
        if P.get("kind", "toric") not in ("toric", "eta"):
            diag.append("spectrum kind must be 'toric' or 'eta'")
        lx, ly = P.get("lx", 2), P.get("ly", 2)
        if P.get("kind", "toric") == "toric" and 2 * lx * ly > 12:
            diag.append(f"toric spectrum {lx}x{ly} exceeds 12 qubits")
    return diag


# ---------------------------------------------------------------------------
# tasks: each returns a list of result rows (dicts)


def _task_seeds(spec, n):
    if spec.seed_policy == "fixed":
        return [spec.seed] * n
    from .mc import seeds_for
    return seeds_for(spec.seed, n)


def _expand(spec: ExperimentSpec) -> list:
    P, c = spec.params, spec.command
    if c == "oracle-check":
        tasks = []
        for m in P.get("mappings", ["ising-dual", "rbim", "face-cubic", "mixed-cubic"]):
            if m == "ising-dual":
                tasks += [{"mapping": m, "lx": l, "ly": l, "beta": b} for l in (2, 3)
                          for b in P.get("betas", [0.0, 0.3, 0.8])]
            elif m == "rbim":
                tasks += [{"mapping": m, "lx": 2, "ly": 2, "p": p, "anyons": [], "chain": []}
                          for p in P.get("p_list", [0.0, 0.1, 0.3])]
                tasks += [{"mapping": m, "lx": 3, "ly": 3, "p": p, "anyons": [0, 1], "chain": [0]}
                          for p in P.get("p_list", [0.0, 0.1, 0.3])]
            elif m == "face-cubic":
                tasks += [{"mapping": m, "lx": 2 if N == 3 else 3, "ly": 2 if N == 3 else 3,
                           "t": P.get("t", 0.2), "N": N} for N in (1, 2, 3)]
            elif m == "mixed-cubic":
                tasks += [{"mapping": m, "lx": l, "ly": l, "t": P.get("t", 0.3), "N": N}
                          for N in (1, 2) for l in (2, 3)]
    elif c == "mc-scan":
        tasks = [{"t": float(t), "size": list(s)} for s in P["sizes"] for t in P["t_grid"]]
    elif c == "kitaev-mc":
        key = "p_grid" if P.get("variant") == "purity" and "p_grid" in P else "t_ext_grid"
        tasks = [{key[:-5]: float(v), "size": list(s)} for s in P["sizes"] for v in P[key]]
    elif c == "spectrum" and P.get("kind", "toric") == "toric":
        tasks = [{"p": float(p)} for p in P.get("p_list", [0.0, 0.1, 0.25, 0.5])]
    else:
        tasks = [{}]
    seeds = _task_seeds(spec, len(tasks))
    for t, s in zip(tasks, seeds):
        t["seed"] = s
    return tasks


def _run_task(command: str, P: dict, task: dict) -> list:
    from .lattice import build_lattice
    if command == "oracle-check":
        from . import oracle
        m = task["mapping"]
        kind = "square" if m in ("rbim", "face-cubic") else "honeycomb"
        lat = build_lattice(kind, task["lx"], task["ly"])
        if m == "ising-dual":
            r = oracle.ising_dual_check(lat, task["beta"])
        elif m == "rbim":
            r = oracle.rbim_check(lat, task["anyons"], task["chain"], task["p"])
        elif m == "face-cubic":
            r = oracle.face_cubic_check(lat, task["t"], task["N"])
        else:
            r = oracle.mixed_cubic_check(lat, task["t"], task["N"])
        return [asdict(r)]
    if command == "mc-scan":
        from .mc import McConfig, run_metropolis
        from .weights import WeightModel
        kind = P.get("lattice", "honeycomb")
        variant = P.get("variant", "topological")
        model = WeightModel(variant, t=task["t"], N=P.get("N", 1.0), p=P.get("p", 0.0))
        lx, ly = task["size"]
        cfg = McConfig({"kind": kind, "lx": lx, "ly": ly}, model,
                       eq_sweeps=P.get("eq_sweeps", 3000 if variant == "purity" else 5000),
                       measure_sweeps=P.get("measure_sweeps", 3000), seed=task["seed"])
        r = run_metropolis(cfg)
        return [{"lattice": kind, "N": model.N, "t": task["t"], "size_x": lx, "size_y": ly,
                 "seed": task["seed"], "mean_length": r.mean_length,
                 "var_length_norm": r.var_length_normalized, "binder_Q": r.binder_Q,
                 "q_err": r.q_err, "acceptance": r.acceptance_rate}]
    if command == "kitaev-extract":
        from .kitaev import extract_loop_weight
        w = extract_loop_weight(P.get("lx", 24), tuple(P.get("ly_list", (2, 4, 6, 8, 10, 12))),
                                P.get("kappa", 0.2), P.get("J", 1.0))
        return [{"kappa": w.kappa, "lx": w.lx, "N_est": w.N_mean, "N_est_per_ly": list(w.N_est),
                 "t_int_est": w.t_int, "t_int_winding": w.t_int_winding,
                 "fit_residual": w.fit_residual, "flagged": w.flagged}]
    if command == "kitaev-mc":
        from .kitaev import build_hamiltonian, ground_covariance, kitaev_weight_model, t_ext_from_p
        from .mc import McConfig, run_metropolis
        lx, ly = task["size"]
        sup = build_lattice("super-honeycomb-embedding", lx, ly)
        H = build_hamiltonian(lx, ly, P.get("J", 1.0), P.get("kappa", 0.2),
                              lattice=sup.embedding.honeycomb)
        variant = P.get("variant", "wavefunction")
        t_ext = t_ext_from_p(task["p"]) if "p" in task else task["t_ext"]
        model = kitaev_weight_model(ground_covariance(H), sup, variant)
        cfg = McConfig(sup.descriptor, model, t_ext=t_ext,
                       eq_sweeps=P.get("eq_sweeps", 3000 if variant == "purity" else 5000),
                       measure_sweeps=P.get("measure_sweeps", 3000), seed=task["seed"])
        r = run_metropolis(cfg)
        return [{"lattice": "super-honeycomb-embedding", "variant": variant, "kappa": P.get("kappa", 0.2),
                 "p": task.get("p", ""), "t_ext": t_ext, "size_x": lx, "size_y": ly,
                 "seed": task["seed"], "mean_length": r.mean_length,
                 "var_length_norm": r.var_length_normalized, "binder_Q": r.binder_Q,
                 "q_err": r.q_err, "acceptance": r.acceptance_rate}]
    if command == "qd-overlap":
        from .groups import build_group
        from .quantum_double import build_patch, closed_loops, overlap_bruteforce, overlap_closed_form
        G = build_group(P.get("group", "S3"))
        g = P.get("g", "(12)")
        patch = build_patch(P.get("nx", 4), P.get("ny", 4))
        rows = []
        for L in closed_loops(patch, P.get("limit")):
            cf, bf = overlap_closed_form(L, G, g), overlap_bruteforce(L, G, g)
            rows.append({"group": G.name, "g": str(g), "length": L.length, "closed_form": str(cf),
                         "bruteforce": str(bf), "equal": cf == bf})
        return rows
    if command == "spectrum":
        from . import oracle
        if P.get("kind", "toric") == "toric":
            lat = build_lattice("square", P.get("lx", 2), P.get("ly", 2))
            r = oracle.toric_code_spectrum(lat, task["p"])
            return [{"p": task["p"], "entropy": r.entropy, "max_deviation": r.max_deviation,
                     "eigenvalues": [[list(a), v] for a, v in r.eigenvalues]}]
        lat = build_lattice(P.get("lattice", "honeycomb"), P.get("lx", 2), P.get("ly", 2))
        r = oracle.eta_spectrum_maximal(lat, P.get("t_a", 0.5), P.get("d_a", 1.0))
        return [{"entropy": r.entropy, "max": r.eigenvalues[0][1],
                 "eigenvalues": r.eigenvalues[:P.get("top", 32)]}]
    if command == "fidelity-check":
        from .oracle import data_processing_check, fidelity_projector_formula
        from .oracle.fidelity import fidelity_direct, dephase
        rng = np.random.default_rng(task["seed"])
        rows = []
        for k in range(P.get("n_instances", 50)):
            n = P.get("n_qubits", 3)
            psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
            phi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
            ops = random_commuting_paulis(n, P.get("n_sites", 2), rng)
            fp = fidelity_projector_formula(psi, phi, ops, check_dpi=False)
            pn, fn = psi / np.linalg.norm(psi), phi / np.linalg.norm(phi)
            fd = fidelity_direct(dephase(np.outer(pn, pn.conj()), ops, 0.5),
                                 dephase(np.outer(fn, fn.conj()), ops, 0.5))
            rows.append({"instance": k, "formula": fp, "sqrt_direct": math.sqrt(fd),
                         "abs_diff": abs(fp - math.sqrt(fd)),
                         "dpi_holds": data_processing_check(psi, phi, ops)})
        return rows
    if command == "weight-table":
        from .kitaev import build_hamiltonian, ground_covariance, membrane_data, membrane_weight
        from .lattice import LoopConfig, cyclomatic_number
        lx, ly = P.get("lx", 12), P.get("ly", 6)
        sup = build_lattice("super-honeycomb-embedding", lx, ly)
        H = build_hamiltonian(lx, ly, P.get("J", 1.0), P.get("kappa", 0.2), lattice=sup.embedding.honeycomb)
        C = ground_covariance(H)
        md = membrane_data(sup)
        rows = []
        for f in range(min(sup.n_faces, P.get("max_faces", 8))):
            L = LoopConfig(sup, sup.face_masks[f])
            w = membrane_weight(C, L, md, u=H.u)
            rows.append({"loop": f"face:{f}", "edges": " ".join(map(str, L.edges.tolist())),
                         "length": L.length, "C": cyclomatic_number(L), "value": w.value,
                         "sign": w.sign_sigma})
        return rows
    raise ValueError(f"unknown command {command}")


def random_commuting_paulis(n: int, k: int, rng) -> list:
    """k independent commuting Pauli strings built from Z-type and X-type checks."""
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    out = []
    while len(out) < k:
        zs = rng.integers(0, 2, size=n)
        if not zs.any():
            continue
        m = np.eye(1)
        for b in zs:
            m = np.kron(m, Z if b else np.eye(2))
        if any(np.allclose(m, o) for o in out):
            continue
        out.append(m)
    return out


def _worker(args):
    command, P, task = args
    t0 = time.time()
    try:
        return {"ok": True, "rows": _run_task(command, P, task), "wall": time.time() - t0}
    except Exception as exc:  # recorded per task in the manifest
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}", "trace": traceback.format_exc(),
                "wall": time.time() - t0}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _write_csv(path: Path, rows: list, columns: list | None = None):
    cols = columns or sorted({k for r in rows for k in r}, key=lambda k: list(rows[0]).index(k)
                             if k in rows[0] else 1_000)
    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    path.write_text(buf.getvalue())


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.ndarray, tuple, frozenset, set)):
        return list(o)
    return str(o)


def run(spec: ExperimentSpec) -> int:
    diag = validate(spec)
    if diag:
        for d in diag:
            log.error("invalid spec: %s", d)
        return EXIT_INVALID
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = _expand(spec)
    args = [(spec.command, spec.params, t) for t in tasks]
    t0 = time.time()
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(spec.workers) as ex:
            results = list(ex.map(_worker, args))
    else:
        results = [_worker(a) for a in args]
    rows, records, failed = [], [], 0
    for task, res in zip(tasks, results):
        rec = {"task": task, "seed": task["seed"], "wall_time": res["wall"], "ok": res["ok"]}
        if res["ok"]:
            rows += res["rows"]
        else:
            failed += 1
            rec["error"] = res["error"]
            log.error("task %s failed: %s", task, res["error"])
        records.append(rec)
    if spec.command in ("mc-scan",):
        _write_csv(out / "results.csv", rows, MC_COLUMNS)
        _write_scan_summary(out, spec, rows)
    elif spec.command in ("kitaev-mc", "qd-overlap", "weight-table", "fidelity-check"):
        if rows:
            _write_csv(out / "results.csv", rows)
    else:
        (out / "results.json").write_text(json.dumps(rows, indent=2, default=_json_default))
    manifest = {"spec": json.loads(spec.to_json()), "version": _version(), "tasks": records,
                "n_failed": failed, "wall_time_total": time.time() - t0}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default))
    return EXIT_PARTIAL if failed else EXIT_OK


def _write_scan_summary(out: Path, spec: ExperimentSpec, rows: list):
    from .mc import curve_crossing
    sizes = sorted({(r["size_x"], r["size_y"]) for r in rows}, key=lambda s: s[0] * s[1])
    curves = {}
    for s in sizes:
        rs = sorted((r for r in rows if (r["size_x"], r["size_y"]) == s), key=lambda r: r["t"])
        curves[s] = (np.array([r["t"] for r in rs]), np.array([r["binder_Q"] for r in rs]),
                     np.array([r["q_err"] for r in rs]))
    cross = []
    for a, b in zip(sizes, sizes[1:]):
        x, qa, ea = curves[a]
        _, qb, eb = curves[b]
        if len(x) == len(curves[b][0]):
            c = curve_crossing(x, qa, qb, ea, eb, spec.params.get("crossing", "linear"))
            cross.append({"sizes": [a, b], "crossing": c if math.isfinite(c) else None})
    (out / "crossings.json").write_text(json.dumps(cross, indent=2, default=_json_default))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="loopmodels", description=__doc__)
    ap.add_argument("--spec", required=True, help="experiment JSON file")
    ap.add_argument("--workers", type=int, help="override worker count")
    ap.add_argument("--seed", type=int, help="override base seed")
    ap.add_argument("--out", help="override output directory")
    ap.add_argument("--validate-only", action="store_true", help="check the spec and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = ExperimentSpec.from_json(Path(a.spec).read_text())
    except (OSError, ValueError, TypeError) as exc:
        print(f"cannot read spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if a.workers is not None:
        spec.workers = a.workers
    if a.seed is not None:
        spec.seed = a.seed
    if a.out is not None:
        spec.out = a.out
    if a.validate_only:
        diag = validate(spec)
        for d in diag:
            print(d, file=sys.stderr)
        return EXIT_INVALID if diag else EXIT_OK
    return run(spec)
