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
"""Writes scenarios/arms/{planar3,arm7}.cfg.

The tool frame of each arm is chosen so that it is aligned with the world at
the home configuration, which keeps the scenario poses easy to read.
"""

import math
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "arms"


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def rot_axis(axis, a):
    k = np.asarray(axis, float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(a) * kx + (1 - math.cos(a)) * kx @ kx


def quat(r):
    w = math.sqrt(max(0.0, 1 + r[0, 0] + r[1, 1] + r[2, 2])) / 2
    if w > 1e-6:
        x = (r[2, 1] - r[1, 2]) / (4 * w)
        y = (r[0, 2] - r[2, 0]) / (4 * w)
        z = (r[1, 0] - r[0, 1]) / (4 * w)
    else:
        x = math.sqrt(max(0.0, 1 + r[0, 0] - r[1, 1] - r[2, 2])) / 2
        y = (r[0, 1] + r[1, 0]) / (4 * x)
        z = (r[0, 2] + r[2, 0]) / (4 * x)
        w = (r[2, 1] - r[1, 2]) / (4 * x)
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q) * (1 if q[0] >= 0 else -1)


def fmt(v):
    return "[" + ", ".join(f"{(0.0 if abs(x) < 1e-12 else float(x)) + 0.0:.12g}" for x in v) + "]"


def chain_rotation(joints, q):
    r = np.eye(3)
    for j, qi in zip(joints, q):
        r = r @ j["rot"] @ rot_axis(j["axis"], qi)
    return r


def write(name, joints, home, tool_t, doc):
    r_tool = chain_rotation(joints, home).T
    lines = [f"# {doc}", "schema_version: 1", f"name: {name}", "gravity: [0, 0, -9.81]",
             f"home: {fmt(home)}",
             f"tool: {{translation: {fmt(tool_t)}, quaternion: {fmt(quat(r_tool))}}}",
             "joints:"]
    for j in joints:
        off = f"{{translation: {fmt(j['t'])}"
        if not np.allclose(j["rot"], np.eye(3)):
            off += f", quaternion: {fmt(quat(j['rot']))}"
        off += "}"
        lines += [f"  - axis: {fmt(j['axis'])}",
                  f"    offset: {off}",
                  f"    mass: {j['mass']}",
                  f"    com: {fmt(j['com'])}",
                  f"    inertia: {fmt(j['inertia'])}",
                  *([f"    armature: {j['armature']}"] if j.get("armature") else []),
                  f"    q_min: {j['q_min']:.6g}",
                  f"    q_max: {j['q_max']:.6g}",
                  f"    dq_max: {j['dq_max']}",
                  f"    tau_max: {j['tau_max']}"]
    (OUT / f"{name}.cfg").write_text("\n".join(lines) + "\n")


def planar3():
    # Vertical x-z plane, joint axes along +y, shoulder 0.5 m above the floor.
    lengths = [0.4, 0.35, 0.25]
    masses = [2.0, 1.5, 1.0]
    offsets = [np.array([0, 0, 0.5]), np.array([lengths[0], 0, 0]), np.array([lengths[1], 0, 0])]
    joints = []
    for i in range(3):
        l, m = lengths[i], masses[i]
        rod = m * l * l / 12
        joints.append(dict(axis=[0, 1, 0], rot=np.eye(3), t=offsets[i], mass=m,
                           com=[l / 2, 0, 0], inertia=[0.001, rod, rod],
                           q_min=-2.8, q_max=2.8, dq_max=2.0, tau_max=60.0))
    home = [-0.6, 1.2, 0.6]
    write("planar3", joints, home, [lengths[2], 0, 0],
          "Planar 3-DoF arm in the vertical x-z plane (links 0.4/0.35/0.25 m).")


def arm7():
    # Modified DH rows (a_{i-1}, d_i, alpha_{i-1}) of a 7-DoF collaborative arm.
    mdh = [(0, 0.333, 0), (0, 0, -math.pi / 2), (0, 0.316, math.pi / 2),
           (0.0825, 0, math.pi / 2), (-0.0825, 0.384, -math.pi / 2), (0, 0, math.pi / 2),
           (0.088, 0, math.pi / 2)]
    masses = [4.97, 0.65, 3.23, 3.59, 1.23, 1.67, 0.74]
    inertias = [[0.70, 0.70, 0.01], [0.008, 0.03, 0.03], [0.04, 0.03, 0.01],
                [0.03, 0.03, 0.01], [0.04, 0.03, 0.01], [0.002, 0.004, 0.005],
                [0.01, 0.01, 0.001]]
    coms = [[0.0035, 0.0003, -0.0708], [-0.0032, -0.0289, 0.0007], [0.0276, 0.0393, -0.0665],
            [-0.0531, 0.1047, 0.0274], [-0.0120, 0.0411, -0.0384], [0.0601, -0.0141, -0.0104],
            [0.0105, -0.0043, 0.0617]]
    q_lim = [(-2.8973, 2.8973), (-1.7628, 1.7628), (-2.8973, 2.8973), (-3.0718, -0.0698),
             (-2.8973, 2.8973), (-0.0175, 3.7525), (-2.8973, 2.8973)]
    dq = [2.175, 2.175, 2.175, 2.175, 2.61, 2.61, 2.61]
    tau = [87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0]
    # Reflected rotor inertia of the geared drives.
    armature = [0.3, 0.3, 0.3, 0.3, 0.1, 0.1, 0.1]
    joints = []
    for i, (a, d, alpha) in enumerate(mdh):
        t = np.array([a, -math.sin(alpha) * d, math.cos(alpha) * d])
        joints.append(dict(axis=[0, 0, 1], rot=rot_x(alpha), t=t, mass=masses[i], com=coms[i],
                           inertia=inertias[i], q_min=q_lim[i][0], q_max=q_lim[i][1],
                           dq_max=dq[i], tau_max=tau[i], armature=armature[i]))
    home = [0.0, -math.pi / 4, 0.0, -3 * math.pi / 4, 0.0, math.pi / 2, math.pi / 4]
    write("arm7", joints, home, [0, 0, 0.2104],
          "7-DoF arm with anthropomorphic proportions (collaborative-arm geometry).")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    planar3()
    arm7()
