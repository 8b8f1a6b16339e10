#!/usr/bin/env python3
"""Writes data/boards/default.json: the default 88-segment board.

Seven full-width horizontal lines joined by staggered vertical connectors,
plus five lookup-table enemies circling rectangular loops of track. Run from
the repository root; the output is committed, so this only needs rerunning
when the layout changes.
"""
import json
import sys

SIZE = 37
SPACING = 6
LINES = list(range(0, SIZE, SPACING))  # y = 0, 6, ..., 36

A = [0, 4, 12, 20, 28, 36]
A_TOP = [0, 4, 12, 28, 36]
B = [0, 8, 16, 24, 32, 36]
GAP_COLUMNS = [A_TOP, B, A, B, A, B]


def tiles():
    grid = [["."] * SIZE for _ in range(SIZE)]
    for y in LINES:
        for x in range(SIZE):
            grid[y][x] = "#"
    for gap, cols in enumerate(GAP_COLUMNS):
        top, bottom = LINES[gap], LINES[gap + 1]
        for x in cols:
            for y in range(top, bottom + 1):
                grid[y][x] = "#"
    return ["".join(r) for r in grid]


def rect_loop(x0, y0, x1, y1, start, clockwise=True):
    path = []
    for x in range(x0, x1):
        path.append((x, y0))
    for y in range(y0, y1):
        path.append((x1, y))
    for x in range(x1, x0, -1):
        path.append((x, y1))
    for y in range(y1, y0, -1):
        path.append((x0, y))
    if not clockwise:
        path = [path[0]] + path[:0:-1]
    i = path.index(start)
    path = path[i:] + path[:i]
    return [list(p) for p in path]


def main():
    # Enemies patrol the upper four horizontal lines; the player starts in
    # the quiet lower half and has to cross into their territory to finish.
    tables = {
        "e0_upper_half": rect_loop(0, 0, 36, 18, (18, 0)),
        "e1_top_band": rect_loop(0, 0, 36, 12, (4, 0), clockwise=False),
        "e2_mid_band": rect_loop(0, 6, 36, 18, (36, 6)),
        "e3_top_row": rect_loop(0, 0, 36, 6, (36, 6), clockwise=False),
        "e4_mid_row": rect_loop(0, 12, 36, 18, (0, 18)),
    }
    doc = {
        "format": "intervenidar-board",
        "version": 1,
        "name": "default",
        "expected_segments": 88,
        "tiles": tiles(),
        "player": {"start": [18, 36], "heading": "left"},
        "enemies": [{"protocol": "lookup", "table": name} for name in sorted(tables)],
        "lookup_tables": tables,
    }
    out = sys.argv[1] if len(sys.argv) > 1 else "data/boards/default.json"
    with open(out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
