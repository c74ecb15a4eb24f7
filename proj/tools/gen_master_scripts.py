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
"""Writes the scripted operator trajectories in scenarios/scripts/.

Device poses are displacements from the device home. Rotation stays at
identity in every preset; velocities are finite differences at 100 Hz.
"""

import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "scripts"
RATE = 100.0
HEADER = "t,mode,qw,qx,qy,qz,x,y,z,wx,wy,wz,vx,vy,vz,k_h\n"


def min_jerk(tau):
    tau = min(max(tau, 0.0), 1.0)
    return tau ** 3 * (10 - 15 * tau + 6 * tau * tau)


class Path:
    """Piecewise minimum-jerk moves between waypoints."""

    def __init__(self):
        self.moves = []  # (t0, t1, p0, p1)
        self.end = [0.0, 0.0, 0.0]

    def move(self, t0, t1, target):
        self.moves.append((t0, t1, list(self.end), list(target)))
        self.end = list(target)
        return self

    def __call__(self, t):
        p = [0.0, 0.0, 0.0]
        for t0, t1, a, b in self.moves:
            if t < t0:
                break
            s = min_jerk((t - t0) / (t1 - t0))
            p = [a[i] + s * (b[i] - a[i]) for i in range(3)]
        return p


def g(v):
    return f"{v + 0.0:.10g}"


def write(name, duration, position, k_h, mode=lambda t: "position"):
    n = int(round(duration * RATE))
    rows = [HEADER]
    for i in range(n + 1):
        t = i / RATE
        p = position(t)
        q = position(t + 1.0 / RATE)
        v = [(q[k] - p[k]) * RATE for k in range(3)]
        rows.append(",".join([g(t), mode(t), "1", "0", "0", "0", *map(g, p), "0", "0", "0",
                              *map(g, v), g(k_h(t) if callable(k_h) else k_h)]) + "\n")
    (OUT / f"{name}.csv").write_text("".join(rows))


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    # 5 cm step along x held for the whole run.
    (OUT / "step.csv").write_text(HEADER + "0,position,1,0,0,0,0.05,0,0,0,0,0,0,0,0,0\n")

    # Scalpel: lower the blade 8 mm into the tissue, cut 12 cm along y, lift.
    write("scalpel", 10.0,
          Path().move(0.5, 2.5, [0, 0, -0.012]).move(3.0, 8.0, [0, 0.12, -0.012])
                .move(8.5, 9.5, [0, 0.12, 0.02]),
          0.6)

    # Rehab: the operator rests while the partner leads, then pulls the
    # limb 20 cm sideways against the partner and returns.
    write("rehab", 20.0,
          Path().move(12.5, 13.5, [0, 0.2, 0]).move(16.0, 17.0, [0, 0, 0]),
          0.3)

    # Ultrasound: descend onto the phantom, sweep back and forth, retract.
    def sweep(t):
        z = -0.04 * min_jerk(t / 3.0) + 0.04 * min_jerk((t - 27.0) / 2.5)
        x = 0.0
        if 3.0 <= t <= 27.0:
            x = 0.08 * math.sin(2 * math.pi * (t - 3.0) / 12.0)
        return [x, 0.0, z]

    write("ultrasound", 30.0, sweep, 0.5)

    # Bimanual transport of the held chip: lift, carry, set down.
    write("bimanual", 12.0,
          Path().move(1.0, 4.0, [0, 0, 0.08]).move(4.0, 8.0, [0.12, 0, 0.08])
                .move(8.0, 11.0, [0.12, 0, 0.0]),
          0.2)


if __name__ == "__main__":
    main()
