"""Atomic, byte-stable emission of curves, branches and reports."""

import csv
import io
import json
import os
import tempfile

import numpy as np

from .errors import OutputError

CURVE_COLUMNS = ("gamma", "re_lambda", "im_lambda", "ell", "delta", "frame")
BRANCH_COLUMNS = ("re_lambda", "im_lambda", "re_nu_left", "im_nu_left", "re_nu_right",
                  "im_nu_right", "tau", "case_tag")
PROFILE_COLUMNS = ("x", "u", "v")


def fmt(x):
    """Float with 17 significant digits (round-trips any double)."""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def write_atomic(path, text):
    """Write ``text`` to a temp file in the target directory and rename it."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def curve_csv(curve):
    rows = [[fmt(g), fmt(lam.real), fmt(lam.imag), str(curve.ell), fmt(curve.delta), curve.frame]
            for g, lam in zip(curve.gamma, curve.lam)]
    return _csv_text(CURVE_COLUMNS, rows)


def branch_csv(branch):
    rows = [[fmt(p.lam.real), fmt(p.lam.imag), fmt(p.nu_left.real), fmt(p.nu_left.imag),
             fmt(p.nu_right.real), fmt(p.nu_right.imag), fmt(p.tau), branch.case_tag]
            for p in branch.points]
    return _csv_text(BRANCH_COLUMNS, rows)


def profile_csv(profile):
    rows = [[fmt(x), fmt(u), fmt(v)] for x, u, v in zip(profile.x, profile.u, profile.v)]
    return _csv_text(PROFILE_COLUMNS, rows)


def json_text(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


class Emitter:
    """Collects artifacts for one run and writes the manifest last."""

    def __init__(self, output_dir, config_hash):
        self.output_dir = output_dir
        self.config_hash = config_hash
        self.artifacts = []

    def _put(self, name, text, kind):
        write_atomic(os.path.join(self.output_dir, name), text)
        self.artifacts.append({"file": name, "kind": kind})
        return name

    def curve(self, name, curve):
        return self._put(name, curve_csv(curve), "curve")

    def branch(self, name, branch):
        return self._put(name, branch_csv(branch), "branch")

    def profile(self, name, profile):
        return self._put(name, profile_csv(profile), "profile")

    def report(self, name, report):
        return self._put(name, json_text(report), "report")

    def manifest(self, subcommand):
        body = {"subcommand": subcommand, "config_hash": self.config_hash,
                "artifacts": sorted(self.artifacts, key=lambda a: a["file"])}
        write_atomic(os.path.join(self.output_dir, "manifest.json"), json_text(body))
        return body


def read_curve_csv(path):
    """Load a curve CSV back into ``(gamma, lam, ell, delta, frame)`` columns."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    gamma = np.array([float(r["gamma"]) for r in rows])
    lam = np.array([complex(float(r["re_lambda"]), float(r["im_lambda"])) for r in rows])
    return gamma, lam, [int(r["ell"]) for r in rows], [float(r["delta"]) for r in rows], \
        [r["frame"] for r in rows]
