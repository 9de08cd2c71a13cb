"""Build the pgeom extension and exercise its Python API.

    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build() -> pathlib.Path:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pg-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libpgeom.so"
    out = pathlib.Path(tempfile.mkdtemp()) / "pgeom.so"
    shutil.copy(lib, out)
    return out.parent


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main() -> None:
    sys.path.insert(0, str(build()))
    import pgeom

    so3 = pgeom.PoissonStructure(3, {(1, 2): "x3", (1, 3): "-x2", (2, 3): "x1"})
    pts = [[0.1 * i, -0.2 * i, 0.3] for i in range(5)]
    assert so3.jacobiator_residual(pts) < 1e-12
    assert so3.bracket("x1", "x2") == "x3", so3.bracket("x1", "x2")

    canon = pgeom.Connection.canonical(so3)
    assert canon.curvature_residual(so3, pts) < 1e-12

    traj = pgeom.geodesic(so3, canon, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    x = traj["x"][-1]
    close(x[1], math.sin(1.0), 1e-10)
    close(x[2], math.cos(1.0), 1e-10)

    aff1 = pgeom.PoissonStructure.lie_poisson(2, {(1, 2, 1): 1.0})
    _, det = pgeom.holonomy(aff1, pgeom.Connection.canonical(aff1), ["0", "0"], ["0", "1"])
    close(det, math.e, 1e-8)

    m1 = pgeom.lie_poisson_mk(2, {(1, 2, 1): 1.0}, 1)
    close(m1.get((2,), 0.0), -1.0 / (2.0 * math.pi), 1e-12)

    sec = pgeom.secondary_class(so3, canon, pgeom.Connection.flat(3), 2, [0.2, 0.1, -0.3])
    closed = pgeom.lie_poisson_mk(3, {(1, 2, 3): 1.0, (1, 3, 2): -1.0, (2, 3, 1): 1.0}, 2)
    for key, v in closed.items():
        close(sec.get(key, 0.0), v / 6.0, 1e-8)

    quad = pgeom.PoissonStructure(2, {(1, 2): "x1*x2"})
    gap = pgeom.modular_comparison(quad, {(1, 1): "1", (2, 2): "1 + x1^2"}, [[0.3, -0.2], [0.7, 0.5]])
    assert gap < 1e-8, gap

    manifest = ROOT / "crates" / "cli" / "fixtures" / "so3.toml"
    report = json.loads(pgeom.check_manifest(str(manifest)))
    assert report["pass"], report

    print("pgeom smoke test passed")


if __name__ == "__main__":
    main()
