#!/usr/bin/env python3
"""Smoke test for the collapse_py extension module.

Build the library first (either profile works):

    cargo build -p collapse-py

The script finds the compiled cdylib under target/, copies it into a
temporary directory under the importable name, and runs quick end-to-end
assertions against independently known values.
"""

import cmath
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path


def locate_library(root: Path) -> Path:
    candidates = [
        root / "target" / profile / "libcollapse_py.so"
        for profile in ("debug", "release")
    ]
    found = [p for p in candidates if p.exists()]
    if not found:
        sys.exit("libcollapse_py.so not found; run `cargo build -p collapse-py` first")
    return max(found, key=lambda p: p.stat().st_mtime)


def import_module(lib: Path):
    tmp = tempfile.mkdtemp(prefix="collapse-py-")
    shutil.copy2(lib, Path(tmp) / "collapse_py.so")
    sys.path.insert(0, tmp)
    import collapse_py

    return collapse_py


def approx(a, b, rel=1e-12):
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) <= rel * scale


def main():
    root = Path(__file__).resolve().parents[1]
    cp = import_module(locate_library(root))

    # Term algebra: at the center the Gaussian factor is 1, so the value is
    # amplitude times the modulation phase e^{i mu . c}.
    term = cp.GaussianTerm(1 + 0j, [1.0, -1.0], [0.5, -0.5], 8.0)
    assert term.dim == 2 and term.width == 8.0
    v = term.value_at([1.0, -1.0])
    assert approx(abs(v), 1.0) and approx(cmath.phase(v), 1.0), v

    # Evolution at t = 0 is the identity.
    sig = [(1, 1), (1, -1)]
    for point in ([0.3, 0.4], [-1.2, 0.9]):
        assert approx(term.evolve_at(sig, 0.0, point), term.value_at(point))

    # Identical-term inner product on two axes is exactly pi times width.
    ip = cp.inner_product(term, term)
    assert approx(ip.real, math.pi * 8.0) and abs(ip.imag) < 1e-14, ip

    # Family construction, count envelope, and Plancherel agreement.
    packet = cp.build_family("lambda-p", 1, 64.0)
    assert 1 <= packet.term_count <= 8, packet.term_count
    assert packet.ambient_dim == 2
    assert packet.signature == [(1, 1), (1, 1)]
    assert approx(packet.l2_norm(), packet.hs_norm(0), rel=1e-9)
    assert len(packet.terms()) == packet.term_count
    assert cp.tube_constant(1) == 8.0

    # The focused diagonal keeps a fixed fraction of the term count.
    d = packet.diagonal(63.5, [0.0])
    assert abs(d) >= 0.25 * packet.term_count, abs(d)

    # Mixed norm over the focusing window converges under refinement.
    mn = packet.mixed_norm(2.0, 2.0, (56.0, 64.0), 0.01)
    assert mn["converged"] and mn["value"] > 0.0, mn
    assert approx(mn["value"], mn["refined"])

    # Hand-assembled adjoint pair keeps a real diagonal under mixed signs.
    a = cp.GaussianTerm(0.7 + 0.2j, [0.3, -0.1], [1.0, 0.5], 3.0)
    b = cp.GaussianTerm(0.7 - 0.2j, [-0.1, 0.3], [-0.5, -1.0], 3.0)
    hermitian = cp.WavepacketSum([(1, 1), (1, -1)], [a, b])
    val = hermitian.diagonal(0.7, [0.4])
    assert abs(val.imag) <= 1e-10 * abs(val), val

    # Scan end-to-end: sub-critical time exponent shows growth.
    report = json.loads(cp.run_scan("lambda-p", 1, [64.0, 128.0, 256.0], 1.0, 2.0))
    assert report["verdict"] == "blow-up-consistent", report["verdict"]
    assert report["all-converged"] is True
    assert abs(report["fitted"]["slope"] - 0.25) < 0.08
    assert approx(report["predicted-slope"], 0.25)
    assert len(report["records"]) == 3

    # Slope fitting is exact on synthetic power laws.
    rs = [16.0, 32.0, 64.0]
    slope, intercept, stderr, points = cp.fit_log_slope(rs, [2.0 * r**0.75 for r in rs])
    assert abs(slope - 0.75) < 1e-10 and stderr < 1e-10 and points == 3

    # Predicted slopes match the known table.
    assert approx(cp.predicted_slope("lambda-q", 1, 2, 2.0, 1.0), 0.75)
    assert approx(cp.predicted_slope("lambda-q", 1, 2, 2.0, 2.0), -0.25)
    assert approx(cp.predicted_slope("lambda-p", 1, None, 1.0, 2.0), 0.25)

    # Validation errors surface as ValueError naming the field.
    try:
        cp.build_family("lambda-p", 1, 2.0)
    except ValueError as exc:
        assert "R" in str(exc), exc
    else:
        raise AssertionError("R = 2 must be rejected")
    try:
        cp.build_family("nonsense", 1, 64.0)
    except ValueError as exc:
        assert "unknown family" in str(exc), exc
    else:
        raise AssertionError("bad family name must be rejected")

    print("smoke test: all assertions passed")


if __name__ == "__main__":
    main()
