"""File formats shared by the CLI and the plotting front end.

Graph file: header line "n=<count>", then one "i j" pair per line, 0-indexed.
Labels file: one integer label per line.
Trajectory CSV: header "iteration,log_posterior,loss,accepted"; loss is empty
when no reference labels were supplied; accepted is 0/1.
Manifest: JSON object carrying schema_version, the resolved configuration,
seeds, and per-chain results.

Floats are written with repr (shortest round-trip form), so re-running a
seeded command reproduces byte-identical CSVs.
"""

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .sampler import Trajectory
from .sbm import Adjacency

SCHEMA_VERSION = "1"
TRAJECTORY_HEADER = "iteration,log_posterior,loss,accepted"


def write_graph(path, adjacency):
    lo, hi = adjacency.edge_arrays
    lines = [f"n={adjacency.n}"]
    lines.extend(f"{int(a)} {int(b)}" for a, b in zip(lo, hi))
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path):
    text = Path(path).read_text().strip().splitlines()
    if not text or not text[0].startswith("n="):
        raise ConfigError(f"{path}: expected a 'n=<count>' header line")
    n = int(text[0][2:])
    pairs = [line.split() for line in text[1:] if line.strip()]
    if pairs:
        arr = np.asarray(pairs, dtype=np.int64)
        return Adjacency(n, arr[:, 0], arr[:, 1])
    return Adjacency(n, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))


def write_labels(path, labels):
    Path(path).write_text(
        "\n".join(str(int(v)) for v in np.asarray(labels)) + "\n")


def read_labels(path):
    values = [int(line) for line in Path(path).read_text().split()]
    return np.asarray(values, dtype=np.int64)


def _format_float(value):
    return repr(float(value))


def write_trajectory(path, trajectory):
    rows = [TRAJECTORY_HEADER]
    for it, post, loss, acc in zip(trajectory.iterations,
                                   trajectory.log_posterior,
                                   trajectory.loss, trajectory.accepted):
        loss_field = "" if math.isnan(loss) else _format_float(loss)
        rows.append(f"{int(it)},{_format_float(post)},{loss_field},"
                    f"{1 if acc else 0}")
    Path(path).write_text("\n".join(rows) + "\n")


def read_trajectory(path):
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != TRAJECTORY_HEADER:
        raise ConfigError(f"{path}: unexpected trajectory header")
    iters, posts, losses, accepted = [], [], [], []
    for line in lines[1:]:
        it, post, loss, acc = line.split(",")
        iters.append(int(it))
        posts.append(float(post))
        losses.append(math.nan if loss == "" else float(loss))
        accepted.append(acc == "1")
    return Trajectory(iterations=np.asarray(iters, dtype=np.int64),
                      log_posterior=np.asarray(posts),
                      loss=np.asarray(losses),
                      accepted=np.asarray(accepted, dtype=bool),
                      thin=int(iters[1] - iters[0]) if len(iters) > 1 else 1)


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_manifest(path, payload):
    payload = dict(payload)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2,
                                     sort_keys=True) + "\n")


def read_manifest(path):
    payload = json.loads(Path(path).read_text())
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"{path}: manifest schema_version "
            f"{payload.get('schema_version')!r} != {SCHEMA_VERSION!r}")
    return payload
