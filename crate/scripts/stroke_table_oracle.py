"""Independent reference for the confidence-by-stroke-count table.

Re-implements template recognition with numpy: normalize to the unit box,
resample each stroke so consecutive points are 0.02 apart (chord distance),
take 64 points uniformly by arc length across strokes, score templates by
symmetric Chamfer distance, softmax(-d / 0.05) over per-category minima.

    python3 scripts/stroke_table_oracle.py crates/core/data fixtures/strokes30.ndjson
"""
import json
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

CATEGORIES = [
    "camera", "cloud", "envelope", "house", "jail_window", "square", "star",
    "avatar", "back", "cancel", "checkbox", "drop_down", "forward", "left_arrow",
    "menu", "play", "plus", "search", "setting", "share", "slider", "squiggle", "switch",
]
SPACING = 0.02
CLOUD = 64
TAU = 0.05


def read(path):
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            r = json.loads(line)
            strokes = [np.array(list(zip(xs, ys)), dtype=float) for xs, ys in r["drawing"]]
            out.append((r.get("word"), strokes))
    return out


def normalize(strokes):
    pts = np.vstack(strokes)
    lo = pts.min(axis=0)
    ext = (pts.max(axis=0) - lo).max()
    k = 1.0 / ext if ext > 0 else 1.0
    return [(s - lo) * k for s in strokes]


def resample_stroke(p):
    out = [p[0]]
    anchor = p[0]
    start = p[0]
    i = 0
    while i + 1 < len(p):
        end = p[i + 1]
        if np.sum((end - anchor) ** 2) < SPACING ** 2:
            i += 1
            start = end
            continue
        # Solve |start + t (end - start) - anchor| = SPACING for t in [0, 1].
        d = end - start
        r = start - anchor
        a, b, c = d @ d, 2 * (r @ d), r @ r - SPACING ** 2
        t = min(1.0, max(0.0, (-b + np.sqrt(max(b * b - 4 * a * c, 0.0))) / (2 * a)))
        nxt = start + t * d
        out.append(nxt)
        anchor = start = nxt
    if len(out) > 1 and np.linalg.norm(out[-1] - p[-1]) <= 1e-9:
        out[-1] = p[-1]
    else:
        out.append(p[-1])
    return np.array(out)


def cloud(strokes):
    strokes = [resample_stroke(s) for s in normalize(strokes)]
    segs = [(s[j], s[j + 1]) for s in strokes for j in range(len(s) - 1)]
    segs = [(a, b) for a, b in segs if np.linalg.norm(b - a) > 0]
    if not segs:
        return np.repeat(strokes[0][:1], CLOUD, axis=0)
    # Polyline of the concatenated segments, pen-up jumps excluded.
    lengths = np.array([np.linalg.norm(b - a) for a, b in segs])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    targets = np.linspace(0.0, cum[-1], CLOUD)
    out = []
    for t in targets:
        k = min(np.searchsorted(cum, t, side="left") - 1, len(segs) - 1)
        k = max(k, 0)
        a, b = segs[k]
        f = min(1.0, max(0.0, (t - cum[k]) / lengths[k]))
        out.append(a + f * (b - a))
    return np.array(out)


def chamfer(a, b):
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def main(data_dir, fixture):
    data_dir = Path(data_dir)
    records = read(data_dir / "templates.ndjson")
    ranges = json.loads((data_dir / "templates.manifest.json").read_text())["ranges"]
    templates = defaultdict(list)
    for name, (s, e) in ranges.items():
        for _, strokes in records[s:e]:
            templates[name].append(cloud(strokes))
    cells = defaultdict(list)
    for label, strokes in read(fixture):
        c = cloud(strokes)
        dist = np.array([min(chamfer(c, t) for t in templates[n]) for n in CATEGORIES])
        logits = -dist / TAU
        p = np.exp(logits - logits.max())
        p /= p.sum()
        bucket = min(len(strokes), 9)
        cells[(label, bucket)].append(p[CATEGORIES.index(label)])
    print("category\tstrokes\tcount\tmean_confidence")
    for name in CATEGORIES:
        for b in range(1, 10):
            vals = cells.get((name, b))
            if vals:
                label = "9+" if b == 9 else str(b)
                print(f"{name}\t{label}\t{len(vals)}\t{float(np.mean(vals))!r}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
