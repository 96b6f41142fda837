#!/usr/bin/env python3
"""Command-line checks: exit codes, table layout, determinism, cross-command agreement."""
import cmath
import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path


def run(cli, *args, code=0):
    p = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    if p.returncode != code:
        sys.exit(f"endspec {' '.join(map(str, args))}: exit {p.returncode}, expected {code}\n{p.stdout}\n{p.stderr}")
    return p.stdout


def table(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def provenance(path):
    out = {}
    for l in Path(path).read_text().splitlines():
        if l.startswith("# ") and ":" in l:
            k, v = l[2:].split(":", 1)
            out[k.strip()] = v.strip()
    return out


def bad_config(cli, configs, work):
    cases = {
        "unknown": {"model": {"cross_section": {"kind": "point"}}, "numerics": {"nn": 4},
                    "task": {"command": "spectrum"}},
        "type": {"numerics": {"n": "many"}, "task": {"command": "spectrum"}},
        "range": {"numerics": {"n": -3}, "task": {"command": "spectrum"}},
        "mismatch": {"task": {"command": "lap"}},
    }
    for name, cfg in cases.items():
        path = work / f"{name}.json"
        path.write_text(json.dumps(cfg))
        run(cli, "spectrum", "--config", path, "--out", work / name, code=2)
    path = work / "broken.json"
    path.write_text("{\"model\": ")
    run(cli, "spectrum", "--config", path, "--out", work / "broken", code=2)


def free_resonances(cli, configs, work):
    run(cli, "resonances", "--config", configs / "free.json", "--out", work)
    text = (work / "resonances.csv").read_text().splitlines()
    body = [l for l in text if not l.startswith("#")]
    assert body == ["re,im,residual,theta_spread,mode,method,kind,multiplicity,error_estimate,ambiguous"], body
    prov = provenance(work / "resonances.csv")
    for key in ("config_fnv1a", "grid", "tolerances"):
        assert key in prov, f"provenance lacks {key}: {prov}"


def deterministic(cli, configs, work):
    run(cli, "resonances", "--config", configs / "barrier.json", "--out", work / "a", "--threads", 1)
    run(cli, "resonances", "--config", configs / "barrier.json", "--out", work / "b", "--threads", 2)
    a = (work / "a" / "resonances.csv").read_bytes()
    b = (work / "b" / "resonances.csv").read_bytes()
    assert a == b, "resonances.csv differs between runs"
    assert len(table(work / "a" / "resonances.csv")) >= 1, "barrier model produced no resonances"


def oracle_vs_spectrum(cli, configs, work):
    run(cli, "spectrum", "--config", configs / "well.json", "--out", work / "grid")
    run(cli, "oracle", "well", "-V0", 5, "-a", 1, "--out", work / "oracle")
    grid = [float(r["value"]) for r in table(work / "grid" / "spectrum.csv")]
    orc = [float(r["re"]) for r in table(work / "oracle" / "oracle.csv") if r["kind"] == "bound"]
    assert len(grid) == len(orc) >= 1, (grid, orc)
    for g, o in zip(grid, orc):
        assert abs(g - o) <= 1e-4, (g, o)


def rays_direction(cli, configs, work):
    run(cli, "essential-spectrum", "--config", configs / "circle_rays.json", "--out", work)
    rows = table(work / "rays.csv")
    assert len(rows) >= 3, rows
    expected = cmath.phase((1 + complex(0.4, 0.3)) ** -2)
    origins = set()
    for r in rows:
        assert abs(float(r["direction_arg"]) - expected) <= 1e-12, (r, expected)
        origins.add(float(r["origin_re"]))
    assert origins >= {0.0, 1.0, 4.0, 9.0}, origins


CHECKS = {f.__name__: f for f in (bad_config, free_resonances, deterministic, oracle_vs_spectrum, rays_direction)}

if __name__ == "__main__":
    cli, configs, work, name = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3]), sys.argv[4]
    work = work / name
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    CHECKS[name](cli, configs, work)
    print(f"{name}: ok")
