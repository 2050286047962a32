"""Loop weight N and tension t_int of the Kitaev honeycomb ground state at a given kappa.

Writes results/kitaev_extract.json.
"""
from __future__ import annotations

import argparse
import logging
from dataclasses import asdict
from pathlib import Path

from loopmodels.kitaev import extract_loop_weight

from script_io import write_json


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, default=0.2)
    ap.add_argument("--lx", type=int, default=24)
    ap.add_argument("--ly", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12])
    ap.add_argument("--out", default="results")
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    w = extract_loop_weight(a.lx, tuple(a.ly), a.kappa)
    d = asdict(w)
    d["N_mean"] = w.N_mean
    Path(a.out).mkdir(parents=True, exist_ok=True)
    write_json(Path(a.out) / "kitaev_extract.json", d)
    print(d)


if __name__ == "__main__":
    main()
