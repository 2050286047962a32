"""Small output helpers shared by the experiment scripts."""
from __future__ import annotations

import json
import math


def write_csv(path, rows):
    keys = list(rows[0])
    with open(path, "w") as fh:
        fh.write("#schema=1\n" + ",".join(keys) + "\n")
        for r in rows:
            fh.write(",".join(repr(r[k]) if isinstance(r[k], float) else str(r[k]) for k in keys)
                     + "\n")


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2)
