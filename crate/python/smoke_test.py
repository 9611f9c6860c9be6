"""Smoke test for the Python bindings: exact pairings, a Dixmier ladder and
one invariant report."""

import json

import magnetic_ncg_py as m


def main():
    assert abs(m.gap_label("pi:0") - 1.0) < 1e-9
    assert abs(m.chern_number("pi-sum:0..2") - 3.0) < 1e-8
    assert abs(m.chern_number([(1, 1, 1.0, 0.0)], lb=1.7) - 1.0) < 1e-8

    p = "pi:0"
    v = m.psi(p, p, p)
    assert abs(v - (-1j)) < 1e-12, v

    try:
        m.chern_number([(0, 0, 0.5, 0.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("non-projection accepted")

    ladder, value, stderr = m.dixmier_ladder("d4")
    assert len(ladder) == 5 and abs(value.real - 2.0) < 0.04, (value, stderr)

    report = json.loads(m.invariant("nc-integral", "pi:1", {"mmax": 1024, "ladder": [1000, 10000, 100000]}))
    assert report["pass"] and len(report["checks"]) == 1, report
    print("smoke test passed")


if __name__ == "__main__":
    main()
