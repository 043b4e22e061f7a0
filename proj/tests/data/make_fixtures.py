#!/usr/bin/env python3
"""Regenerates the checked-in fixtures. Output is deterministic.

small.det / small.dsft / small_results.txt: hand-sized format fixtures.
walk.det / walk.dsft / walk_gt.txt: three pedestrians over 20 frames with
128-dim descriptors, used by the CLI tests. walk_track.golden is produced by
`cmot track` on these inputs and reviewed by hand; it is not written here.
"""
import math
import pathlib
import struct

HERE = pathlib.Path(__file__).resolve().parent


def dsft(rows):
    dim = len(rows[0]) if rows else 0
    out = b"DSFT" + struct.pack("<III", 1, len(rows), dim)
    for r in rows:
        out += struct.pack("<%df" % dim, *r)
    return out


def fixed2(v):
    s = "%.2f" % v
    return "0.00" if s == "-0.00" else s


def small():
    lines = [
        "1,-1,10.00,20.00,30.00,60.00,0.9,-1,-1,-1",
        "1,-1,200.50,40.25,35.00,80.00,0.75,-1,-1,-1",
        "2,-1,12.00,21.00,30.00,60.00,0.2,-1,-1,-1",
        "2,-1,203.00,41.00,35.00,80.00,0.95,-1,-1,-1",
        "4,-1,0.00,0.00,1.50,2.25,0.3,-1,-1,-1",
        "4,-1,-3.25,7.00,10.00,10.00,1,-1,-1,-1",
    ]
    (HERE / "small.det").write_text("\n".join(lines) + "\n")
    rows = [[1.0 if k == j % 4 else 0.25 * j for k in range(4)] for j in range(len(lines))]
    (HERE / "small.dsft").write_bytes(dsft(rows))
    (HERE / "small_short.dsft").write_bytes(dsft(rows[:5]))
    res = [
        "1,1,10.00,20.00,30.00,60.00,1,-1,-1,-1",
        "1,2,200.50,40.25,35.00,80.00,1,-1,-1,-1",
        "3,1,12.34,21.00,30.00,60.00,1,-1,-1,-1",
        "3,7,1.50,2.00,10.00,20.00,1,-1,-1,-1",
    ]
    (HERE / "small_results.txt").write_text("\n".join(res) + "\n")


def walk():
    dim, frames = 128, 20
    targets = [
        (1, 100.0, 200.0, 4.0, 0.0),
        (2, 600.0, 210.0, -3.0, 0.5),
        (3, 300.0, 500.0, 1.0, -2.0),
    ]
    det_lines, feats, gt_lines = [], [], []
    for f in range(1, frames + 1):
        for tid, x0, y0, vx, vy in targets:
            x, y = x0 + vx * f, y0 + vy * f
            gt_lines.append("%d,%d,%s,%s,50.00,120.00,1,1,1" % (f, tid, fixed2(x), fixed2(y)))
            if tid == 3 and 9 <= f <= 11:
                continue  # short miss
            jx = 0.5 * math.sin(0.7 * f + tid)
            jy = 0.5 * math.cos(0.3 * f + tid)
            det_lines.append("%d,-1,%s,%s,50.00,120.00,0.9,-1,-1,-1" % (f, fixed2(x + jx), fixed2(y + jy)))
            v = [0.0] * dim
            v[tid] = 1.0
            v[(tid * 7 + f) % dim] += 0.05
            feats.append(v)
        # Low-confidence clutter, dropped at the default threshold.
        det_lines.append("%d,-1,900.00,50.00,40.00,90.00,0.1,-1,-1,-1" % f)
        v = [0.0] * dim
        v[100] = 1.0
        feats.append(v)
    # A non-pedestrian annotation that is ignored by evaluation.
    gt_lines.append("5,99,900.00,50.00,40.00,90.00,0,7,1")
    (HERE / "walk.det").write_text("\n".join(det_lines) + "\n")
    (HERE / "walk.dsft").write_bytes(dsft(feats))
    (HERE / "walk_gt.txt").write_text("\n".join(gt_lines) + "\n")


if __name__ == "__main__":
    small()
    walk()
