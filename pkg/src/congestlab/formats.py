"""Instance documents (JSON, TNTP) and sweep CSV output."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import re
from pathlib import Path as FsPath
from typing import IO, Any, Sequence

from .costs import BPR, Affine, Constant, CostSpec, Polynomial, RecursivePiecewise
from .network import Arc, Instance, Network, ODPair, validate_instance

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
VEHICLE_SPACE_M = 7.5


class InstanceParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class InstanceValidationError(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def cost_to_dict(spec: CostSpec) -> dict[str, Any]:
    if isinstance(spec, BPR):
        return {"family": "bpr", "t0": spec.t0, "capacity": spec.capacity, "alpha": spec.alpha, "beta": spec.beta}
    if isinstance(spec, Polynomial):
        return {"family": "polynomial", "terms": [list(t) for t in spec.coefficients]}
    if isinstance(spec, Affine):
        return {"family": "affine", "slope": spec.slope, "intercept": spec.intercept}
    if isinstance(spec, Constant):
        return {"family": "constant", "value": spec.level}
    if isinstance(spec, RecursivePiecewise):
        return {"family": "piecewise", "breakpoints": list(spec.breakpoints), "max_index": spec.max_index}
    raise TypeError(f"cannot serialize {type(spec).__name__}")


def cost_from_dict(d: dict[str, Any]) -> CostSpec:
    family = d.get("family")
    if family == "bpr":
        return BPR(float(d["t0"]), float(d["capacity"]), float(d.get("alpha", 0.15)), float(d.get("beta", 4.0)))
    if family == "polynomial":
        return Polynomial(tuple((float(c), float(p)) for c, p in d["terms"]))
    if family == "affine":
        return Affine(float(d["slope"]), float(d.get("intercept", 0.0)))
    if family == "constant":
        return Constant(float(d["value"]))
    if family == "piecewise":
        return RecursivePiecewise(tuple(float(b) for b in d["breakpoints"]), int(d.get("max_index", 64)))
    raise ValueError(f"unknown cost family {family!r}")


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    net = instance.network
    names = net.node_names
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": list(names),
        "arcs": [
            {"tail": names[a.tail], "head": names[a.head], "cost": cost_to_dict(a.cost)} for a in net.arcs
        ],
        "od_pairs": [
            {"origin": names[od.origin], "destination": names[od.destination], "demand": od.demand}
            for od in instance.od_pairs
        ],
    }


def serialize_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def _node_ref(index: dict[str, int], name: Any) -> int:
    # unknown names become out-of-range ids so validation reports them as dangling
    return index.get(str(name), -1)


def instance_from_dict(doc: dict[str, Any]) -> Instance:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    names = [str(n) for n in doc["nodes"]]
    if len(set(names)) != len(names):
        raise ValueError("duplicate node names")
    index = {n: i for i, n in enumerate(names)}
    arcs = []
    for i, a in enumerate(doc["arcs"]):
        try:
            cost = cost_from_dict(a["cost"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"arc {i}: bad cost spec ({exc})") from exc
        arcs.append(Arc(i, _node_ref(index, a["tail"]), _node_ref(index, a["head"]), cost))
    ods = tuple(
        ODPair(_node_ref(index, od["origin"]), _node_ref(index, od["destination"]), float(od["demand"]))
        for od in doc["od_pairs"]
    )
    return Instance(Network(len(names), tuple(arcs), tuple(names), bool(doc.get("allow_self_loops", False))), ods)


def parse_instance(
    text: str | bytes, format: str = "json", trips_text: str | bytes | None = None, validate: bool = True
) -> Instance:
    """Parse an instance document.

    ``format="tntp"`` reads a TNTP network file from ``text`` and the demand
    table from ``trips_text``. With ``validate`` set, any violation raises
    :class:`InstanceValidationError` listing all of them.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if format == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceParseError(exc.msg, exc.lineno, exc.colno) from exc
        try:
            instance = instance_from_dict(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceParseError(f"malformed instance document: {exc}") from exc
    elif format == "tntp":
        if trips_text is None:
            raise ValueError("TNTP needs a trips file")
        if isinstance(trips_text, bytes):
            trips_text = trips_text.decode("utf-8")
        instance = _parse_tntp(text, trips_text)
    else:
        raise ValueError(f"unknown format {format!r}")
    if validate:
        problems = validate_instance(instance)
        if problems:
            raise InstanceValidationError(problems)
    return instance


def _metadata(lines: list[str]) -> tuple[dict[str, str], int]:
    meta = {}
    for i, line in enumerate(lines):
        m = re.match(r"\s*<([^>]+)>\s*(.*)$", line)
        if not m:
            continue
        key = m.group(1).strip().upper()
        if key == "END OF METADATA":
            return meta, i + 1
        meta[key] = m.group(2).strip()
    return meta, 0


def _parse_tntp(net_text: str, trips_text: str) -> Instance:
    lines = net_text.splitlines()
    meta, start = _metadata(lines)
    rows = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        body = line.split("~", 1)[0].strip().rstrip(";").strip()
        if not body:
            continue
        fields = body.split()
        if len(fields) < 7:
            raise InstanceParseError(f"expected at least 7 columns, got {len(fields)}", lineno, 1)
        try:
            init, term = int(fields[0]), int(fields[1])
            capacity, _length, fft, b, power = (float(v) for v in fields[2:7])
        except ValueError as exc:
            col = line.find(fields[0]) + 1
            raise InstanceParseError(f"non-numeric link field ({exc})", lineno, col) from exc
        try:
            cost = BPR(fft, capacity, b, power)
        except ValueError as exc:
            raise InstanceParseError(str(exc), lineno, 1) from exc
        rows.append((init, term, cost))
    if "NUMBER OF LINKS" in meta and int(meta["NUMBER OF LINKS"]) != len(rows):
        log.warning("TNTP header declares %s links, found %d", meta["NUMBER OF LINKS"], len(rows))

    labels = sorted({r[0] for r in rows} | {r[1] for r in rows})
    declared_nodes = int(meta.get("NUMBER OF NODES", 0) or 0)
    if declared_nodes > (labels[-1] if labels else 0):
        labels = sorted(set(labels) | set(range(1, declared_nodes + 1)))

    demand_rows = []
    tlines = trips_text.splitlines()
    tmeta, tstart = _metadata(tlines)
    origin = None
    for lineno, line in enumerate(tlines[tstart:], start=tstart + 1):
        body = line.split("~", 1)[0].strip()
        if not body:
            continue
        m = re.match(r"Origin\s+(\d+)", body, re.IGNORECASE)
        if m:
            origin = int(m.group(1))
            continue
        if origin is None:
            raise InstanceParseError("demand entry before any 'Origin' line", lineno, 1)
        for entry in body.split(";"):
            entry = entry.strip()
            if not entry:
                continue
            try:
                dest, value = (p.strip() for p in entry.split(":"))
                demand_rows.append((origin, int(dest), float(value)))
            except ValueError as exc:
                raise InstanceParseError(f"bad demand entry {entry!r}", lineno, line.find(entry) + 1) from exc
    labels = sorted(set(labels) | {o for o, _, _ in demand_rows} | {d for _, d, _ in demand_rows})
    index = {lab: i for i, lab in enumerate(labels)}

    total = math.fsum(v for _, _, v in demand_rows)
    if "TOTAL OD FLOW" in tmeta:
        declared = float(tmeta["TOTAL OD FLOW"])
        if not math.isclose(declared, total, rel_tol=1e-6, abs_tol=1e-9):
            log.warning("TNTP trips declare total flow %g but entries sum to %g; declared total ignored", declared, total)
    net = Network.build(len(labels), [(index[i], index[j], c) for i, j, c in rows], tuple(str(lab) for lab in labels))
    ods = tuple(
        ODPair(index[o], index[d], v) for o, d, v in demand_rows if o != d and v > 0
    )
    return Instance(net, ods)


def load_instance(path: str | os.PathLike, validate: bool = True) -> Instance:
    """Read ``*.json``, or a TNTP ``*_net.tntp`` whose trips file sits next to it."""
    p = FsPath(path)
    if p.suffix.lower() == ".tntp":
        trips = p.with_name(p.name.replace("_net", "_trips"))
        if trips == p or not trips.exists():
            raise FileNotFoundError(f"no trips file next to {p} (expected {trips.name})")
        return parse_instance(p.read_text(), "tntp", trips.read_text(), validate=validate)
    return parse_instance(p.read_bytes(), "json", validate=validate)


def derive_capacity(length_m: float, lanes: int) -> float:
    """Vehicles that fit on a street: ``length * lanes / 7.5``."""
    if not (length_m > 0 and lanes >= 1):
        raise ValueError("street length must be positive and lanes at least 1")
    return length_m * lanes / VEHICLE_SPACE_M


def derive_free_flow_time(length_m: float, max_speed: float) -> float:
    """Free-flow travel time ``length / maximum allowed speed``."""
    if not (length_m > 0 and max_speed > 0):
        raise ValueError("street length and speed must be positive")
    return length_m / max_speed


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def sweep_csv(rows: Sequence[Any]) -> str:
    from .scaling import CSV_FIELDS

    if not rows:
        raise ValueError("no sweep rows to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([format_float(getattr(r, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def write_sweep_csv(rows: Sequence[Any], destination: str | os.PathLike | IO[str]) -> int:
    """Write the sweep table; returns the number of bytes written."""
    text = sweep_csv(rows)
    data = text.encode("utf-8")
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return len(data)
