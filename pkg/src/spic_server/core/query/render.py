import math
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

from .engine import QueryResult
from ...errors import QueryError


def result_document(result: QueryResult) -> Dict[str, Any]:
    """Machine form of a result; floats are left to json for round-trip precision."""
    members, start = [], 0
    for m in result.members:
        members.append({"id": m.id, "dim": m.dim, "offset": start})
        start += m.dim
    return {
        "members": members,
        "mean": [float(x) for x in result.mean],
        "cov": [[float(x) for x in row] for row in result.cov],
        "links": [
            {"id": ext.id, "K": [[float(x) for x in row] for row in ext.link]}
            for ext in result.links
        ],
        "diagnostics": result.diagnostics.as_dict(),
    }


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> List[str]:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return lines


def _labels(result: QueryResult) -> List[str]:
    labels = []
    for m in result.members:
        labels.extend([m.id] if m.dim == 1 else [f"{m.id}[{i}]" for i in range(m.dim)])
    return labels


def render_human(result: QueryResult) -> str:
    labels = _labels(result)
    lines = ["mean"]
    lines += _table(["var", "value"], [[lab, _fmt(v)] for lab, v in zip(labels, result.mean)])
    lines += ["", "covariance"]
    lines += _table([""] + labels, [[lab] + [_fmt(v) for v in row] for lab, row in zip(labels, result.cov)])
    for ext in result.links:
        lines += ["", f"link {ext.id}"]
        cols = [ext.id] if ext.dim == 1 else [f"{ext.id}[{i}]" for i in range(ext.dim)]
        lines += _table([""] + cols, [[lab] + [_fmt(v) for v in row] for lab, row in zip(labels, ext.link)])
    lines += ["", "diagnostics"]
    diag = result.diagnostics.as_dict()
    by_node = diag.pop("requests_by_node")
    lines += _table(["counter", "value"], [[k, str(v)] for k, v in diag.items()])
    if by_node:
        lines += _table(["node", "requests"], [[k, str(v)] for k, v in by_node.items()])
    return "\n".join(lines)


def parse_id_list(text: str) -> List[str]:
    """``a1,c2`` -> ['a1', 'c2']; blanks are skipped."""
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def parse_evidence_text(text: str) -> Dict[str, np.ndarray]:
    """``a2=2.0;b1=0.5,1.5`` -> {'a2': [2.0], 'b1': [0.5, 1.5]}."""
    evidence: Dict[str, np.ndarray] = {}
    if not text:
        return evidence
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        node_id, sep, raw = item.partition("=")
        node_id = node_id.strip()
        if not sep or not node_id or not raw.strip():
            raise QueryError(f"cannot parse evidence item {item!r}, expected id=v1,v2")
        try:
            values = [float(v) for v in raw.split(",")]
        except ValueError as e:
            raise QueryError(f"evidence for {node_id!r} is not a list of numbers: {raw!r}") from e
        if not all(math.isfinite(v) for v in values):
            raise QueryError(f"evidence for {node_id!r} has non-finite values: {raw!r}")
        if node_id in evidence:
            raise QueryError(f"evidence for {node_id!r} given twice")
        evidence[node_id] = np.array(values)
    return evidence


def evidence_from_mapping(raw: Mapping[str, Any]) -> Dict[str, np.ndarray]:
    """Evidence given as JSON: scalars or lists of numbers."""
    evidence = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in raw.items()}
    for node_id, value in evidence.items():
        if not np.all(np.isfinite(value)):
            raise QueryError(f"evidence for {node_id!r} has non-finite values")
    return evidence


__all__ = [
    "result_document",
    "render_human",
    "parse_id_list",
    "parse_evidence_text",
    "evidence_from_mapping",
]
