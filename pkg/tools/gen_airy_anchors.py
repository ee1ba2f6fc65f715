"""Regenerate src/anharmonic/_airy_anchors.py from mpmath.

Run from the repository root:

    python tools/gen_airy_anchors.py > src/anharmonic/_airy_anchors.py
"""
import mpmath

mpmath.mp.dps = 40

LO, HI, STEP = -10.0, 10.0, 0.25


def main():
    n = int(round((HI - LO) / STEP)) + 1
    print('"""Ai and Ai\' at equispaced anchors, correctly rounded to double.')
    print()
    print("Generated by tools/gen_airy_anchors.py; do not edit by hand.")
    print('"""')
    print()
    print(f"ANCHOR_LO = {LO!r}")
    print(f"ANCHOR_STEP = {STEP!r}")
    print(f"ANCHOR_COUNT = {n}")
    print()
    print("# (Ai(x_k), Ai'(x_k)) for x_k = ANCHOR_LO + k * ANCHOR_STEP")
    print("ANCHORS = (")
    for k in range(n):
        x = mpmath.mpf(LO) + k * mpmath.mpf(STEP)
        ai = float(mpmath.airyai(x))
        aip = float(mpmath.airyai(x, derivative=1))
        print(f"    ({ai!r}, {aip!r}),")
    print(")")


if __name__ == "__main__":
    main()
