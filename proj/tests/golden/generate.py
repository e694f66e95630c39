#!/usr/bin/env python3
"""Regenerates the checked-in golden files from scratch.

Encodes every container independently of the C++ implementation so the
byte-exact round-trip tests cross-check the writers against the formats,
not against themselves. All floating-point payloads are dyadic rationals,
so their shortest decimal forms are exact.
"""

import struct
from pathlib import Path

HERE = Path(__file__).resolve().parent


def u32(v: int) -> bytes:
    return struct.pack("<I", v)


def f64(v: float) -> bytes:
    return struct.pack("<d", v)


def write(name: str, payload: bytes) -> None:
    (HERE / name).write_bytes(payload)
    print(f"{name}: {len(payload)} bytes")


# P6, 2x2, interleaved RGB rows
write(
    "golden.ppm",
    b"P6\n2 2\n255\n"
    + bytes([10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120]),
)

# P5, 3 wide x 2 high
write("golden.pgm", b"P5\n3 2\n255\n" + bytes([0, 128, 255, 7, 200, 31]))

# FPYR: two levels on a 2x2 grid, channel-major f64 payloads
fpyr = b"FPYR"
fpyr += u32(0) + u32(1) + u32(2) + u32(2)
fpyr += b"".join(f64(v) for v in [0.5, -1.25, 3.0, 0.0625])
fpyr += u32(1) + u32(2) + u32(2) + u32(2)
fpyr += b"".join(f64(v) for v in [1.0, 2.0, 3.0, 4.0, -0.5, 0.25, 8.0, 16.0])
write("golden.fpyr", fpyr)

# TMAT: N=2, level=1, row-major rows [0.25 0.75], [0.5 0.5]
tmat = b"TMAT" + u32(2) + u32(1)
tmat += b"".join(f64(v) for v in [0.25, 0.75, 0.5, 0.5])
write("golden.tmat", tmat)

# parameter text file: two stages, one class head
params = "".join(
    [
        "mu_logit[0]=0.25\n",
        "mu_logit[1]=-1.5\n",
        "beta_logit[0]=3\n",
        "beta_logit[1]=-50\n",
        "head_w[0]=0.5\n",
        "head_w[1]=-0.25\n",
        "head_w[2]=0\n",
        "head_w[3]=1\n",
        "head_w[4]=2\n",
        "head_w[5]=-3\n",
        "head_w[6]=0.125\n",
        "head_w[7]=4\n",
        "head_w[8]=-8\n",
        "head_b=0.0625\n",
    ]
)
write("golden.params.txt", params.encode())

# seed text file in canonical writer form
write("golden.seeds", b"0,0,0,1\n2,3,1,0.5\n7,5,2,2.25\n")
