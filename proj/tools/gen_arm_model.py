#!/usr/bin/env python3
# Copyright 2026 The catchsim Authors
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

"""Writes data/models/panda_like.json.

Link inertias are uniform solid cylinders about the link z axis. The
reference tool pose at q = 0 is computed here with plain 4x4 products so
the C++ forward kinematics has an independent fixture.
"""

import json
import math
import sys

import numpy as np

# a, alpha, d (modified DH)
DH = [
    (0.0, 0.0, 0.333),
    (0.0, -math.pi / 2, 0.0),
    (0.0, math.pi / 2, 0.316),
    (0.0825, math.pi / 2, 0.0),
    (-0.0825, -math.pi / 2, 0.384),
    (0.0, math.pi / 2, 0.0),
    (0.088, math.pi / 2, 0.0),
]
MASS = [4.970684, 0.646926, 3.228604, 3.587895, 1.225946, 1.666555, 0.735522]
COM = [
    (0.003875, 0.002081, -0.04762),
    (-0.003141, -0.02872, 0.003495),
    (0.027518, 0.039252, -0.066502),
    (-0.05317, 0.104419, 0.027454),
    (-0.011953, 0.041065, -0.038437),
    (0.060149, -0.014117, -0.010517),
    (0.010517, -0.004252, 0.061597),
]
CYL_LEN = [0.333, 0.20, 0.316, 0.20, 0.384, 0.15, 0.10]
CYL_RADIUS = 0.06
Q_MIN = [-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973]
Q_MAX = [2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973]
DQ_MAX = [2.175, 2.175, 2.175, 2.175, 2.61, 2.61, 2.61]
DDQ_MAX = [15.0, 7.5, 10.0, 12.5, 15.0, 20.0, 20.0]
TAU_LIM = [87.0, 87.0, 87.0, 87.0, 12.0, 12.0, 12.0]

FLANGE_D = 0.107
TOOL_OFFSET = 0.10
TOOL_MASS = 0.47
TOOL_RADIUS = 0.10


def cylinder(m, length, r):
    ixx = m * (3 * r * r + length * length) / 12.0
    return [[ixx, 0.0, 0.0], [0.0, ixx, 0.0], [0.0, 0.0, 0.5 * m * r * r]]


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    t = np.eye(4)
    t[1:3, 1:3] = [[c, -s], [s, c]]
    return t


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    t = np.eye(4)
    t[0:2, 0:2] = [[c, -s], [s, c]]
    return t


def trans(x, y, z):
    t = np.eye(4)
    t[0:3, 3] = [x, y, z]
    return t


def quat_wxyz(r):
    # Shepperd's method.
    tr = np.trace(r)
    if tr > 0:
        s = 2.0 * math.sqrt(tr + 1.0)
        q = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s,
             (r[1, 0] - r[0, 1]) / s]
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * math.sqrt(1.0 + r[i, i] - r[j, j] - r[k, k])
        v = [0.0, 0.0, 0.0]
        v[i] = 0.25 * s
        v[j] = (r[j, i] + r[i, j]) / s
        v[k] = (r[k, i] + r[i, k]) / s
        q = [(r[k, j] - r[j, k]) / s] + v
    q = np.array(q)
    if q[0] < 0:
        q = -q
    return list(q / np.linalg.norm(q))


def main(path):
    tool = trans(0, 0, FLANGE_D + TOOL_OFFSET) @ rot_z(-math.pi / 4) @ rot_x(math.pi)
    t = np.eye(4)
    for a, alpha, d in DH:
        t = t @ rot_x(alpha) @ trans(a, 0, 0) @ rot_z(0.0) @ trans(0, 0, d)
    t = t @ tool

    links = []
    for i, (a, alpha, d) in enumerate(DH):
        links.append({
            "a": a, "alpha": alpha, "d": d, "theta_offset": 0.0,
            "mass": MASS[i], "com": list(COM[i]),
            "inertia": cylinder(MASS[i], CYL_LEN[i], CYL_RADIUS),
            "q_min": Q_MIN[i], "q_max": Q_MAX[i], "dq_max": DQ_MAX[i],
            "ddq_max": DDQ_MAX[i], "tau_lim": TAU_LIM[i],
        })
    ixx = TOOL_MASS * TOOL_RADIUS ** 2 / 4.0
    model = {
        "format_version": 1,
        "name": "panda_like",
        "gravity": [0.0, 0.0, -9.81],
        "links": links,
        "tool": {
            "translation": list(tool[0:3, 3]),
            "quaternion_wxyz": quat_wxyz(tool[0:3, 0:3]),
            "mass": TOOL_MASS,
            "com": [0.0, 0.0, FLANGE_D + 0.6 * TOOL_OFFSET],
            "inertia": [[ixx, 0, 0], [0, ixx, 0], [0, 0, 2 * ixx]],
        },
        "reference": {
            "zero_q_tool_position": list(t[0:3, 3]),
            "zero_q_tool_quaternion_wxyz": quat_wxyz(t[0:3, 0:3]),
        },
    }
    with open(path, "w") as f:
        json.dump(model, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/models/panda_like.json")
