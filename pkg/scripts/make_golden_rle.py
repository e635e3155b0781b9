#!/usr/bin/env python3
"""Regenerate the cross-language RLE golden fixtures.

Writes 100 (counts, pixels) pairs encoded with the primary codec; the
browser client's decoder must reproduce the pixels exactly. Pixels are
stored row-major as 0/1 strings to keep the file reviewable.
"""

import json
from pathlib import Path

import numpy as np

from fgdata.rle import rle_encode

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures" / "rle_golden.json"


def main():
    rng = np.random.default_rng(1234)
    cases = []
    # adversarial shapes first, then random fills of varied density
    fixed = [
        np.zeros((3, 3), np.uint8),
        np.ones((3, 3), np.uint8),
        np.eye(6, dtype=np.uint8),
        np.pad(np.ones((1, 1), np.uint8), 3),
        np.tile([[0, 1]], (5, 4)).astype(np.uint8),
        np.tile([[1], [0]], (4, 5)).astype(np.uint8),
    ]
    for m in fixed:
        cases.append(m)
    while len(cases) < 100:
        h = int(rng.integers(1, 20))
        w = int(rng.integers(1, 20))
        cases.append((rng.random((h, w)) < rng.random()).astype(np.uint8))

    payload = []
    for m in cases:
        payload.append(
            {
                "height": int(m.shape[0]),
                "width": int(m.shape[1]),
                "counts": rle_encode(m),
                "rows": ["".join(str(v) for v in row) for row in m.tolist()],
            }
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload, indent=0) + "\n")
    print(f"wrote {len(payload)} golden pairs -> {OUT}")


if __name__ == "__main__":
    main()
