"""Write the Lebedev sphere rules used by the quadrature grids as text files.

Development helper: needs scipy, which the package itself does not import.
Usage: python3 scripts/make_lebedev.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import lebedev_rule

# point count -> exactness degree for the grids in the quadrature table
DEGREES = {194: 23, 266: 27, 350: 31, 590: 41, 974: 53, 1454: 65, 2030: 77,
           2702: 89, 3470: 101, 4334: 113, 5294: 125, 5810: 131}


def main(outdir):
    outdir.mkdir(parents=True, exist_ok=True)
    for count, degree in DEGREES.items():
        pts, w = lebedev_rule(degree)
        assert pts.shape[1] == count, (degree, pts.shape)
        assert abs(w.sum() - 4 * np.pi) < 1e-12
        lines = [f"# Lebedev rule, {count} points, exact through degree {degree}",
                 f"# degree {degree}", "# x y z w (weights sum to 4 pi)"]
        lines += [f"{x!r} {y!r} {z!r} {wi!r}" for (x, y, z), wi in zip(pts.T.tolist(), w.tolist())]
        (outdir / f"lebedev_{count:04d}.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    here = Path(__file__).resolve().parent.parent
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else here / "src" / "fsperturb" / "data")
