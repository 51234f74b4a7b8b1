#!/usr/bin/env python3
"""End-to-end checks of the phi_sentinel command line.

Usage: cli_contract.py <phi_sentinel binary> <report.schema.json>
"""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BINARY = sys.argv[1]
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
failures = []


def run(*args, expect=0):
    proc = subprocess.run([BINARY, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != expect:
        failures.append(f"{' '.join(map(str, args))}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc


def check(condition, message):
    if not condition:
        failures.append(message)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    corpus = tmp / "corpus"
    run("gen", "--output", corpus, "--datasets", 3, "--columns", 150, "--rows", 300,
        "--phi-fraction", 0.2, "--seed", 5)
    manifest = json.loads((corpus / "manifest.json").read_text())
    first = manifest["datasets"][0]
    data, labels = corpus / first["file"], corpus / first["labels"]
    check(data.exists() and labels.exists(), "gen did not write dataset and sidecar")

    model, log, matrix = tmp / "model.json", tmp / "loss.csv", tmp / "matrix.csv"
    run("train", "--corpus", corpus, "--output", model, "--log", log, "--matrix", matrix, "--k", 200)
    losses = [float(r["loss"]) for r in csv.DictReader(log.open())]
    check(len(losses) > 1 and all(b <= a + 1e-12 for a, b in zip(losses, losses[1:])),
          "training loss log is not non-increasing")

    # Happy-path scan, with and without the metrics block, validated against the schema.
    for extra in ([], ["--labels", labels]):
        report = tmp / "report.json"
        run("scan", "--input", data, "--model", model, "--output", report, "--k", 200, "--top", 3, *extra)
        doc = json.loads(report.read_text())
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as e:
            failures.append(f"report fails schema ({'with' if extra else 'without'} metrics): {e.message}")
        check(("metrics" in doc) == bool(extra), "metrics block presence does not follow --labels")
        for c in doc["columns"]:
            check(c["prob_final"] >= max(c["prob_regex"], c["prob_ml_calibrated"]), f"dominance: {c['column_name']}")

    # Thread count does not change the report.
    one, many = tmp / "one.json", tmp / "many.json"
    run("scan", "--input", data, "--model", model, "--output", one, "--threads", 1, "--top", 2)
    run("scan", "--input", data, "--model", model, "--output", many, "--threads", 4, "--top", 2)
    check(one.read_bytes() == many.read_bytes(), "scan output differs between 1 and 4 threads")

    # Exit-code contract.
    flagged = json.loads(one.read_text())
    check(any(c["predicted"] for c in flagged["columns"]), "no column flagged in the contract dataset")
    run("scan", "--input", data, "--model", model, "--output", tmp / "r2.json", "--fail-on-phi", expect=2)
    usage = run("scan", "--input", data, "--model", model, "--output", tmp / "r3.json", "--bogus", expect=64)
    check("Usage" in usage.stderr + usage.stdout or "--" in usage.stderr, "unknown flag prints no usage text")
    run("scan", "--input", tmp / "missing.csv", "--model", model, "--output", tmp / "r4.json", expect=66)
    run("scan", "--input", data, "--model", tmp / "missing.json", "--output", tmp / "r5.json", expect=66)
    run("evaluate", "--corpus", tmp / "nowhere", expect=66)
    bad_model = tmp / "bad_model.json"
    bad_model.write_text("{\"not\": \"a model\"}")
    run("scan", "--input", data, "--model", bad_model, "--output", tmp / "r6.json", expect=70)

    # evaluate twice with the same seed gives identical tables and JSON.
    outputs = []
    for i in range(2):
        js, txt = tmp / f"eval{i}.json", tmp / f"eval{i}.txt"
        proc = run("evaluate", "--corpus", corpus, "--folds", 5, "--seed", 42, "--k", 200,
                   "--output", js, "--output-text", txt)
        outputs.append((js.read_bytes(), txt.read_bytes(), proc.stdout))
    check(outputs[0] == outputs[1], "evaluate is not deterministic across runs")
    check(b"Ensemble" in outputs[0][1], "evaluate table lacks the Ensemble row")

    # Config file supplies defaults; command-line flags win.
    config = tmp / "config.json"
    config.write_text(json.dumps({"k": 200, "threshold": 0.9}))
    cfg_report = tmp / "cfg.json"
    run("--config", config, "scan", "--input", data, "--model", model, "--output", cfg_report, "--threshold", 0.7)
    meta = json.loads(cfg_report.read_text())["meta"]
    check(meta["k"] == 200 and meta["threshold"] == 0.7, f"config precedence wrong: {meta}")

    # Per-column explanation: contributions plus phi0 reproduce the margin.
    exp_json, exp_csv = tmp / "explain.json", tmp / "explain.csv"
    column = flagged["columns"][0]["column_name"]
    run("explain", "--input", data, "--model", model, "--column", column, "--background", matrix,
        "--output", exp_json, "--csv", exp_csv, "--k", 200)
    explanation = json.loads(exp_json.read_text())
    total = explanation["phi0"] + sum(c["value"] for c in explanation["contributions"])
    check(abs(total - explanation["margin"]) < 1e-6, "explain contributions do not sum to the margin")
    with exp_csv.open() as f:
        check(next(csv.reader(f)) == ["column", "slot", "value"], "explain CSV header")

    # Corpus-wide importance.
    imp_json = tmp / "importance.json"
    run("explain", "--corpus", corpus, "--folds", 3, "--output", imp_json, "--csv", tmp / "imp.csv", "--k", 200)
    importance = json.loads(imp_json.read_text())["importance"]
    values = [e["importance"] for e in importance]
    check(values == sorted(values, reverse=True) and abs(values[0] - 1.0) < 1e-12, "importance ranking")

    # The library dump is valid JSON with the built-in entries.
    lib = json.loads(run("library").stdout)
    check(len(lib["entries"]) >= 19, "library dump lacks entries")

if failures:
    print("\n".join(f"FAIL: {f}" for f in failures))
    sys.exit(1)
print("all CLI contract checks passed")
