#!/usr/bin/env python3
"""Validates CLI and HTTP outputs against the JSON schemas in schemas/."""

import argparse
import json
import socket
import subprocess
import sys
import tempfile
import time
import urllib.request
from pathlib import Path

import jsonschema


def run(cli, *args, stdin=None):
    out = subprocess.run([cli, *args], input=stdin, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def http(port, method, path, body=None, content_type="application/json"):
    data = None if body is None else (body if isinstance(body, str) else json.dumps(body)).encode()
    req = urllib.request.Request(f"http://127.0.0.1:{port}{path}", data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", content_type)
    with urllib.request.urlopen(req, timeout=60) as r:
        return json.loads(r.read())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True, type=Path)
    args = ap.parse_args()

    schemas = {p.name.split(".")[0]: json.loads(p.read_text()) for p in args.schemas.glob("*.schema.json")}
    for s in schemas.values():
        jsonschema.Draft202012Validator.check_schema(s)
    failures = 0

    def check(name, doc, label):
        nonlocal failures
        errors = list(jsonschema.Draft202012Validator(schemas[name]).iter_errors(doc))
        print(("ok    " if not errors else "FAIL  ") + f"{label} against {name}.schema.json")
        for e in errors[:5]:
            print(f"        {list(e.path)}: {e.message}")
        failures += bool(errors)

    cli = args.cli
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        check("design", run(cli, "design", "--pt", "0.45", "--pc", "0.30", "--curve"), "cli design")
        check("design", run(cli, "design", "--pt", "0.45", "--pc", "0.30", "--n-max", "200", "--reps", "200",
                            "--seed", "1"), "cli design with power")
        check("calibration", run(cli, "calibrate", "--rule", "gs", "--reps", "2000", "--seed", "1"), "cli calibrate gs")
        check("calibration", run(cli, "calibrate", "--rule", "bayes", "--reps", "2000", "--seed", "1"),
              "cli calibrate bayes")
        check("calibration", run(cli, "calibrate", "--rule", "gs", "--schedule", "continuous", "--reps", "2000",
                                 "--seed", "1"), "cli calibrate gs, continuous (infinite c)")
        check("simulation", run(cli, "simulate", "--seed", "3", "--reps", "300", "--calibration-reps", "300"),
              "cli simulate")
        check("platform", run(cli, "platform"), "cli platform")

        session = tmp / "s.json"
        subprocess.run([cli, "init", "--session", str(session), "--pt", "0.45", "--pc", "0.30"], check=True,
                       capture_output=True)
        batch = "pair_index,x_treatment,x_control\n" + "".join(f"{i},{i % 2},{(i // 3) % 2}\n" for i in range(1, 41))
        subprocess.run([cli, "monitor", "--session", str(session), "--batch", "-"], input=batch, text=True,
                       check=True, capture_output=True)
        doc = json.loads(session.read_text())
        check("session", doc, "cli session file")

        bad = json.loads(json.dumps(doc))
        bad["ledger"][0] = [2, 0]
        if list(jsonschema.Draft202012Validator(schemas["session"]).iter_errors(bad)):
            print("ok    malformed ledger is rejected by session.schema.json")
        else:
            print("FAIL  malformed ledger passed session.schema.json")
            failures += 1

        port = free_port()
        server = subprocess.Popen([cli, "serve", "--addr", f"127.0.0.1:{port}"], stdout=subprocess.DEVNULL,
                                  stderr=subprocess.DEVNULL)
        try:
            for _ in range(100):
                try:
                    socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
                    break
                except OSError:
                    time.sleep(0.1)
            check("design", http(port, "POST", "/design", {"p_treatment": 0.45, "p_control": 0.30}), "http /design")
            http(port, "POST", "/sessions", {"id": "v1", "design": {"p_treatment": 0.45, "p_control": 0.30}})
            http(port, "POST", "/sessions/v1/batch", batch, "text/csv")
            exported = http(port, "GET", "/sessions/v1/export")
            check("session", exported, "http /sessions/{id}/export")
            if exported["summary"] == doc["summary"] and exported["ledger"] == doc["ledger"]:
                print("ok    http export matches the cli session file")
            else:
                print("FAIL  http export differs from the cli session file")
                failures += 1
            check("simulation", http(port, "POST", "/compare", {"reps": 300, "calibration_reps": 300, "seed": 3}),
                  "http /compare")
        finally:
            server.terminate()
            server.wait(timeout=10)

    print(f"{failures} schema failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
