"""Quantitative STREL monitoring on a four-stop line.

Four locations sit 2 km apart on a line.  Each carries a bike count B over four
hourly samples.  The monitor returns a robustness value per location: its sign
says whether the formula holds, its size how far the data are from flipping it.

Run:  python demos/monitoring.py
"""

import numpy as np

from strel_miner.monitor import Monitor
from strel_miner.parser import parse
from strel_miner.spatial import Location, SpatialModel
from strel_miner.traces import SpatioTemporalTrace

FORMULAS = [
    "B > 2",
    "F[0,2] B > 2",
    "somewhere[0,2000] B > 2",
    "G[0,3] somewhere[0,2000] B > 2",
    "G[0,3] everywhere[0,4000] B > 0",
]


def main():
    locs = [Location(f"s{k}", 45.0, 9.0 + 0.026 * k) for k in range(4)]
    model = SpatialModel.from_undirected(locs, [(k, k + 1, 2000.0) for k in range(3)])
    bikes = np.array([[0, 1, 4, 6],
                      [5, 3, 1, 0],
                      [1, 0, 0, 2],
                      [8, 7, 7, 9]], dtype=float)
    trace = SpatioTemporalTrace(tuple(model.ids), ("B",), np.arange(4.0), bikes[:, :, None],
                                time_unit="h")
    mon = Monitor(model, trace)

    print(f"{'formula':36s}" + "".join(f"{i:>7s}" for i in model.ids))
    for text in FORMULAS:
        rho = mon.evaluate(parse(text))[:, 0]
        print(f"{text:36s}" + "".join(f"{r:7.1f}" for r in rho))


if __name__ == "__main__":
    main()
