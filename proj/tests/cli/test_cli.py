"""End-to-end checks of the htb command line: exit codes, outputs, determinism.

usage: test_cli.py HTB_BINARY FIXTURE_DIR
"""

import csv
import io
import json
import math
import os
import shutil
import subprocess
import sys
import tempfile

HTB = sys.argv[1]
FIX = sys.argv[2]
failures = []


def check(cond, what):
    if not cond:
        failures.append(what)
        print("FAIL:", what)


def htb(*args, env=None):
    e = dict(os.environ)
    e.pop("HTB_THREADS", None)
    if env:
        e.update(env)
    return subprocess.run([HTB, *args], capture_output=True, text=True, env=e)


def fixture(name):
    return os.path.join(FIX, name)


def read(path):
    with open(path, "rb") as f:
        return f.read()


work = tempfile.mkdtemp(prefix="htb_cli_")
try:
    # run: minimal config
    out = os.path.join(work, "min.csv")
    r = htb("run", "--config", fixture("minimal.json"), "--out", out, "--quiet")
    check(r.returncode == 0, f"minimal run exits 0 (got {r.returncode}: {r.stderr})")
    rows = list(csv.reader(io.StringIO(read(out).decode())))
    check(rows[0] == ["run_id", "policy", "regime", "epsilon", "sigma", "T_checkpoint", "mean_regret", "stderr",
                      "violations_total"], "csv header")
    check([row[5] for row in rows[1:]] == ["500", "1000", "2000"], "one row per checkpoint")
    summary = json.loads(read(os.path.join(work, "min.summary.json")))
    check(summary["violations_total"] == 0 and summary["ok"], "summary reports zero violations")
    check(summary["config"]["name"] == "minimal", "summary echoes the config")
    check(len(summary["per_seed"]) == 4, "per-seed rows")

    # byte-identical reruns, also with a capped thread count
    out2 = os.path.join(work, "min2.csv")
    htb("run", "--config", fixture("minimal.json"), "--out", out2, "--quiet", env={"HTB_THREADS": "1"})
    check(read(out) == read(out2), "csv identical across reruns")
    check(read(os.path.join(work, "min.summary.json")) == read(os.path.join(work, "min2.summary.json")),
          "summary identical across reruns")

    # seed override changes the numbers
    out3 = os.path.join(work, "min3.csv")
    htb("run", "--config", fixture("minimal.json"), "--out", out3, "--seed", "99", "--quiet")
    check(read(out) != read(out3), "--seed overrides the base seed")

    # configuration errors
    r = htb("run", "--config", fixture("bad_epsilon.json"), "--out", os.path.join(work, "bad.csv"))
    check(r.returncode == 2, f"epsilon 2.5 exits 2 (got {r.returncode})")
    check("(1, 2]" in r.stderr and "heavy_tail.epsilon" in r.stderr, "epsilon message names the range and field")
    r = htb("run", "--config", os.path.join(work, "missing.json"))
    check(r.returncode == 2, "missing config exits 2")
    r = htb("run", "--config", fixture("minimal.json"), "--bogus")
    check(r.returncode == 2, "unknown flag exits 2")
    r = htb("run", "--config", fixture("minimal.json"), env={"HTB_THREADS": "many"})
    check(r.returncode == 2, "malformed HTB_THREADS exits 2")
    broken = os.path.join(work, "broken.json")
    with open(broken, "w") as f:
        f.write('{\n  "schema_version": 1,\n  "name": "x",,\n}\n')
    r = htb("run", "--config", broken)
    check(r.returncode == 2 and "broken.json:3:" in r.stderr, f"syntax error names the line ({r.stderr.strip()})")
    r = htb()
    check(r.returncode == 2, "no subcommand exits 2")

    # doctored policy parameter: violations counted, exit 1
    out = os.path.join(work, "doc.csv")
    r = htb("run", "--config", fixture("doctored_clip.json"), "--out", out, "--quiet")
    check(r.returncode == 1, f"doctored run exits 1 (got {r.returncode})")
    summary = json.loads(read(os.path.join(work, "doc.summary.json")))
    check(summary["violations"]["bonus_within_threshold"] > 0, "doctored violations in JSON")
    check(summary["violations_total"] == summary["violations"]["hard_total"] > 0, "violation total")

    # linear config with a relative feature CSV
    r = htb("run", "--config", fixture("linear.json"), "--out", os.path.join(work, "lin.csv"), "--quiet")
    check(r.returncode == 0, f"linear alg3 run exits 0 ({r.stderr})")

    # sweep
    sw = os.path.join(work, "sweep.csv")
    r = htb("sweep", "--config", fixture("minimal.json"), "--horizons", "250,500,1000", "--out", sw, "--quiet")
    check(r.returncode == 0, f"sweep exits 0 ({r.stderr})")
    rows = list(csv.DictReader(io.StringIO(read(sw).decode())))
    check(sorted({row["T"] for row in rows}, key=int) == ["250", "500", "1000"], "three row groups")
    for row in rows:
        cp, m = float(row["T_checkpoint"]), float(row["mean_regret"])
        check(math.isclose(float(row["ratio_T_pow_inv_eps"]), m / cp ** (1 / 1.5), rel_tol=1e-14), "power ratio")
        check(math.isclose(float(row["ratio_log_T"]), m / math.log(cp), rel_tol=1e-14), "log ratio")
    sw2 = os.path.join(work, "sweep2.csv")
    htb("sweep", "--config", fixture("minimal.json"), "--horizons", "250,500,1000", "--out", sw2, "--quiet")
    check(read(sw) == read(sw2), "sweep identical across reruns")
    # each horizon group equals a run at that horizon with the same seeds
    cfg = json.loads(read(fixture("minimal.json")))
    cfg["horizon"], cfg["checkpoints"] = 500, [500]
    one = os.path.join(work, "h500.json")
    with open(one, "w") as f:
        json.dump(cfg, f)
    htb("run", "--config", one, "--out", os.path.join(work, "h500.csv"), "--quiet")
    single = list(csv.DictReader(io.StringIO(read(os.path.join(work, "h500.csv")).decode())))
    grp = [row for row in rows if row["T"] == "500" and row["T_checkpoint"] == "500"]
    check(grp and grp[0]["mean_regret"] == single[0]["mean_regret"], "sweep row equals the single-horizon run")
    r = htb("sweep", "--config", fixture("minimal.json"), "--horizons", "250,500", "--quiet")
    check(r.returncode == 2, "sweep with two horizons exits 2")

    # check-design
    r = htb("check-design", "--features", fixture("arms.csv"), "--header")
    check(r.returncode == 0, f"check-design exits 0 ({r.stderr})")
    d = json.loads(r.stdout)
    check(d["g_optimal"]["certified"] and d["centered"]["certified"], "design certificates hold")
    check(d["g_optimal"]["max_leverage"] <= 2 * (1 + 1e-3), "G-optimal max leverage <= d(1+tol)")
    check(abs(sum(d["g_optimal"]["distribution"]) - 1) < 1e-12, "design is a distribution")
    r = htb("check-design", "--features", fixture("collinear.csv"))
    check(r.returncode == 2, "rank-deficient feature file exits 2")
    r = htb("check-design", "--features", fixture("affine_line.csv"))
    d = json.loads(r.stdout) if r.stdout else {}
    check(r.returncode == 1 and d["g_optimal"]["certified"] and "error" in d["centered"],
          "affinely degenerate features fail the centered design with exit 1")
    r = htb("check-design")
    check(r.returncode == 2, "check-design without input exits 2")

    # validate-moments
    r = htb("validate-moments", "--config", fixture("minimal.json"), "--samples", "20000")
    check(r.returncode == 0, f"default Pareto environment certified ({r.stderr})")
    v = json.loads(r.stdout)
    check(all(a["certificate"] <= 1.0 for a in v["arms"]), "certificates <= sigma")
    r = htb("validate-moments", "--config", fixture("doctored_scale_10x.json"), "--samples", "20000")
    check(r.returncode == 1, f"10x scale exits 1 (got {r.returncode})")
    check(not all(a["certified"] for a in json.loads(r.stdout)["arms"]), "10x scale flagged")
    r = htb("validate-moments", "--config", fixture("zero_noise.json"), "--samples", "100")
    v = json.loads(r.stdout)
    check(r.returncode == 0, "zero-noise environment certified")
    check(v["arms"][0]["certificate"] == 0.25 ** 1.5 and v["arms"][1]["certificate"] == 0.5 ** 1.5,
          "zero noise: certificate = |mean|^eps")
    r = htb("run", "--config", fixture("doctored_scale_10x.json"), "--quiet")
    check(r.returncode == 1, "run refuses an uncertified environment with exit 1")

    # trace and replay
    tr = os.path.join(work, "t.jsonl")
    r = htb("trace", "--config", fixture("linear.json"), "--rounds", "25", "--out", tr)
    check(r.returncode == 0, f"trace exits 0 ({r.stderr})")
    lines = read(tr).decode().splitlines()
    check(len(lines) == 26 and json.loads(lines[0])["type"] == "header", "header plus one line per round")
    r = htb("trace", "--replay", tr)
    check(r.returncode == 0, f"replay is identical ({r.stderr})")
    tampered = os.path.join(work, "tampered.jsonl")
    with open(tampered, "w") as f:
        f.write("\n".join(lines[:5] + [lines[5].replace('"t":5', '"t":5 ')] + lines[6:]) + "\n")
    r = htb("trace", "--replay", tampered)
    check(r.returncode == 1 and ":6:" in r.stderr, "tampered replay names the differing line")
    moved = os.path.join(work, "sub")
    os.makedirs(moved)
    shutil.copy(tr, moved)
    r = htb("trace", "--replay", os.path.join(moved, "t.jsonl"))
    check(r.returncode == 0, "replay is independent of the trace location")
finally:
    shutil.rmtree(work, ignore_errors=True)

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
