"""Composite Gauss-Legendre rules on a uniform panel split."""

from __future__ import annotations

import numpy as np


def composite_gauss(a: float, b: float, nodes: int = 8, panels: int = 64):
    """Nodes and weights integrating smooth functions over [a, b].

    The interval is cut into `panels` equal pieces, each carrying a
    `nodes`-point Gauss-Legendre rule.  Returns (x, w) as flat arrays.
    """
    if not b > a:
        raise ValueError("need b > a")
    if nodes < 1 or panels < 1:
        raise ValueError("nodes and panels must be >= 1")
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    w = (half[:, None] * wi[None, :]).ravel()
    return x, w
