"""Fine sweep of Q(eps) to locate the sign change of the quasimonotonicity integral.

Writes a CSV (epsilon, Q, error_estimate) to stdout and the bracketing interval to stderr.
"""

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from detlab import quasimono as QM
from detlab import scalarlaws as L


@dataclass(frozen=True)
class SweepConfig:
    n: int = 2
    a: float = 0.5
    eps_min: float = 0.005
    eps_max: float = 0.2
    points: int = 40
    law: str = "identity"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in SweepConfig.__dataclass_fields__.items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(default.default), default=default.default)
    cfg = SweepConfig(**vars(ap.parse_args()))
    law = L.law_from_descriptor({"name": cfg.law})
    eps = np.geomspace(cfg.eps_max, cfg.eps_min, cfg.points)
    res = QM.qm_sweep(law, cfg.a, [float(e) for e in eps], n=cfg.n)
    print("epsilon,Q,error_estimate")
    for e, q, err in res.csv_rows():
        print(f"{e!r},{q!r},{err!r}")
    qs = [row.Q for row in res.rows]
    for (e0, q0), (e1, q1) in zip(zip(eps, qs), zip(eps[1:], qs[1:])):
        if q0 >= 0 > q1:
            print(f"sign change between eps={e1:.5f} and eps={e0:.5f}", file=sys.stderr)
            break
    else:
        print("no sign change in range", file=sys.stderr)


if __name__ == "__main__":
    main()
