"""Render placeholder screen images for a hierarchy corpus directory.

Writes <id>.thumb.png (180x320) and <id>.full.png (720x1280) next to each
<id>.json, drawing every visible labeled node as a coloured box.

    python3 scripts/render_screens.py fixtures/sample_corpus
"""
import json
import sys
import zlib
from pathlib import Path

from PIL import Image, ImageDraw

SIZES = {"thumb": (180, 320), "full": (720, 1280)}


def colour(label):
    h = zlib.crc32(label.encode())
    return (64 + h % 160, 64 + (h >> 8) % 160, 64 + (h >> 16) % 160)


def nodes(node, visible=True):
    visible = visible and node.get("visible", node.get("visible-to-user", True))
    label = node.get("iconClass") and "icon:" + node["iconClass"] or node.get("componentLabel")
    if label and "bounds" in node:
        yield label, node["bounds"], visible
    for child in node.get("children") or []:
        yield from nodes(child, visible)


def render(path):
    doc = json.loads(path.read_text())
    w, h = doc.get("width", 1440), doc.get("height", 2560)
    root = doc.get("root") or doc["activity"]["root"]
    stem = path.stem
    for name, (iw, ih) in SIZES.items():
        img = Image.new("RGB", (iw, ih), (245, 245, 245))
        draw = ImageDraw.Draw(img)
        sx, sy = iw / w, ih / h
        for label, (x1, y1, x2, y2), visible in nodes(root):
            if not visible:
                continue
            draw.rectangle(
                [x1 * sx, y1 * sy, max(x1 * sx, x2 * sx - 1), max(y1 * sy, y2 * sy - 1)],
                outline=colour(label),
                width=max(1, iw // 180),
            )
        img.save(path.parent / f"{stem}.{name}.png", optimize=True)


if __name__ == "__main__":
    for p in sorted(Path(sys.argv[1]).glob("*.json")):
        render(p)
