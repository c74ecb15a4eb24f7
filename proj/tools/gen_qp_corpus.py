#!/usr/bin/env python3
# Copyright 2026 The ficteleop Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the 2-DoF box-constrained QP corpus with brute-force grid answers.

Each row: h11 h12 h22 g1 g2 lo1 hi1 lo2 hi2 x1 x2, for
min 0.5 x'Hx + g'x over lo <= x <= hi. The answer comes from a full grid
at 1e-2 followed by a 1e-4 grid around the coarse winner.
"""

import argparse

import numpy as np


def cost(h, g, x1, x2):
    return 0.5 * (h[0, 0] * x1 * x1 + 2 * h[0, 1] * x1 * x2 + h[1, 1] * x2 * x2) + g[0] * x1 + g[1] * x2


def grid_solve(h, g, lo, hi):
    best = None
    for step, center, half in ((1e-2, None, None), (1e-4, None, 0.03)):
        if best is None:
            a = np.arange(lo[0], hi[0] + step / 2, step)
            b = np.arange(lo[1], hi[1] + step / 2, step)
        else:
            a = np.arange(max(lo[0], best[0] - half), min(hi[0], best[0] + half) + step / 2, step)
            b = np.arange(max(lo[1], best[1] - half), min(hi[1], best[1] + half) + step / 2, step)
            a = np.clip(a, lo[0], hi[0])
            b = np.clip(b, lo[1], hi[1])
        x1, x2 = np.meshgrid(a, b, indexing="ij")
        c = cost(h, g, x1, x2)
        i = np.unravel_index(np.argmin(c), c.shape)
        best = (x1[i], x2[i])
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/qp_box_corpus.csv")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20261018)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    rows = []
    while len(rows) < args.count:
        a = rng.normal(size=(2, 2))
        h = a @ a.T + 0.5 * np.eye(2)
        g = rng.normal(scale=2.0, size=2)
        lo = rng.uniform(-1.0, 0.0, size=2)
        hi = lo + rng.uniform(0.2, 1.5, size=2)
        x = grid_solve(h, g, lo, hi)
        rows.append([h[0, 0], h[0, 1], h[1, 1], g[0], g[1], lo[0], hi[0], lo[1], hi[1], x[0], x[1]])
    with open(args.out, "w") as f:
        f.write("h11,h12,h22,g1,g2,lo1,hi1,lo2,hi2,x1,x2\n")
        for r in rows:
            f.write(",".join(repr(float(v)) for v in r) + "\n")


if __name__ == "__main__":
    main()
