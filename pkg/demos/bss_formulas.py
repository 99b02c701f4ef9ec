"""From a (tau, d) scatter to cluster formulas for a bike-sharing template.

Each point is a station's tightest valuation of

    G[0,3]((F[0,tau] Bikes >= 1 & F[0,tau] Slots >= 1) |
           (somewhere[0,d] Bikes >= 1 & somewhere[0,d] Slots >= 1))

i.e. for the next three hours a bike and a free slot can be found either by
waiting at most tau minutes or by walking at most d metres.  The three labels
come from clustering.  A decision tree separates them and each leaf box becomes
a conjunction of instances of the template.

Run:  python demos/bss_formulas.py
"""

import numpy as np

from strel_miner.boxtree import cluster_formulas, fit_tree, formula_length
from strel_miner.pstrel import PstrelTemplate

TEMPLATE = ("G[0,3]((F[0,$tau] Bikes >= 1 & F[0,$tau] Slots >= 1) | "
            "(somewhere[0,$d] Bikes >= 1 & somewhere[0,$d] Slots >= 1))")

# columns: tau (minutes), d (metres)
POINTS = np.array([[5, 300], [10, 900], [17.08, 500], [17.10, 400], [30, 600],
                   [50, 1000.97], [50, 1000.99], [50, 2000], [40, 1500]])
LABELS = [1, 1, 1, 2, 2, 2, 3, 3, 3]
NAMES = {1: "green", 2: "orange", 3: "red"}


def main():
    template = PstrelTemplate.from_formula(TEMPLATE, order=["d", "tau"],
                                           bounds={"tau": (0, 50), "d": (0, 2100)})
    tree = fit_tree(POINTS, LABELS)
    print(f"tree: depth {tree.depth}, {tree.n_leaves} leaves\n")

    for label, cf in cluster_formulas(tree, template).items():
        print(f"{NAMES[label]} ({cf.n_boxes} box, length {formula_length(cf, template)})")
        print(f"  {cf.param_text}")
        print(f"  {cf.dsl_text}\n")


if __name__ == "__main__":
    main()
