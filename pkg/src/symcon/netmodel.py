"""Controlled networks ``xdot = A x + B u`` and their on-disk formats.

Network file format (UTF-8 text, ``#`` lines are comments)::

    N M
    <N rows of A, N reals each>
    <N rows of B, M values in {0, 1} each>

With ``M = 0`` the rows of ``B`` are empty and may be omitted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import AsymmetryError, DimensionError, NonBinaryInputError, ParseError

__all__ = [
    "ControlledNetwork",
    "Trajectory",
    "parse_network",
    "format_network",
    "load_network",
    "write_trajectory",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ControlledNetwork:
    """Symmetric adjacency ``A`` (N x N) and binary input pattern ``B`` (N x M).

    Construction validates the invariants; arrays are stored read-only.
    """

    adjacency: np.ndarray
    input_pattern: np.ndarray
    node_labels: Optional[tuple] = None

    def __post_init__(self):
        A = _frozen(self.adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionError(f"adjacency must be a nonempty square matrix, got shape {A.shape}")
        n = A.shape[0]
        B = np.asarray(self.input_pattern, dtype=float)
        if B.size == 0:
            B = np.zeros((n, 0))
        elif B.ndim == 1:
            B = B.reshape(n, -1) if B.shape[0] == n else B
        if B.ndim != 2 or B.shape[0] != n:
            raise DimensionError(f"input pattern must have {n} rows, got shape {B.shape}")
        if not np.all(np.isfinite(A)):
            raise ParseError("adjacency contains non-finite entries")
        # exact comparison: authored files, not measured data
        if not np.array_equal(A, A.T):
            i, j = np.argwhere(A != A.T)[0]
            raise AsymmetryError(
                f"A[{i + 1}][{j + 1}] = {A[i, j]!r} but A[{j + 1}][{i + 1}] = {A[j, i]!r}"
            )
        bad = ~np.isin(B, (0.0, 1.0))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise NonBinaryInputError(f"B[{i + 1}][{j + 1}] = {B[i, j]!r} is not 0 or 1")
        labels = self.node_labels
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != n:
                raise DimensionError(f"expected {n} node labels, got {len(labels)}")
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "input_pattern", _frozen(B))
        object.__setattr__(self, "node_labels", labels)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.input_pattern.shape[1]

    def relabeled(self, perm: Sequence[int]) -> "ControlledNetwork":
        """Network with node ``perm[i]`` of ``self`` renamed to node ``i``."""
        p = np.asarray(perm)
        labels = None if self.node_labels is None else [self.node_labels[k] for k in p]
        return ControlledNetwork(self.adjacency[np.ix_(p, p)], self.input_pattern[p], labels)

    def __eq__(self, other):
        if not isinstance(other, ControlledNetwork):
            return NotImplemented
        return (
            np.array_equal(self.adjacency, other.adjacency)
            and self.input_pattern.shape == other.input_pattern.shape
            and np.array_equal(self.input_pattern, other.input_pattern)
            and self.node_labels == other.node_labels
        )

    __hash__ = None


def _data_lines(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        s = raw.strip()
        if s.startswith("#"):
            continue
        out.append(s)
    # trailing blank lines carry no data
    while out and not out[-1]:
        out.pop()
    return out


def _row(line: str, width: int, what: str, lineno: int) -> list[float]:
    toks = line.split()
    if len(toks) != width:
        raise ParseError(f"{what} row {lineno}: expected {width} values, got {len(toks)}")
    try:
        return [float(t) for t in toks]
    except ValueError as exc:
        raise ParseError(f"{what} row {lineno}: {exc}") from None


def parse_network(text: str) -> ControlledNetwork:
    """Parse the network text format into a validated :class:`ControlledNetwork`.

    Raises
    ------
    ParseError
        Malformed header, wrong row widths, wrong number of rows.
    AsymmetryError
        ``A`` differs from its transpose in any entry (exact comparison).
    NonBinaryInputError
        An entry of ``B`` is neither 0 nor 1.
    """
    lines = _data_lines(text)
    # blank separators are allowed everywhere except as empty B rows with M = 0
    nonblank = [s for s in lines if s]
    if not nonblank:
        raise ParseError("empty network file")
    head = nonblank[0].split()
    if len(head) != 2:
        raise ParseError(f"header must be 'N M', got {nonblank[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"header must hold two integers, got {nonblank[0]!r}") from None
    if n < 1 or m < 0:
        raise ParseError(f"need N >= 1 and M >= 0, got N={n}, M={m}")
    body = nonblank[1:]
    expected = n if m == 0 else 2 * n
    if len(body) != expected:
        raise ParseError(f"expected {expected} data rows after the header, got {len(body)}")
    A = np.array([_row(body[i], n, "A", i + 1) for i in range(n)])
    if m == 0:
        B = np.zeros((n, 0))
    else:
        B = np.array([_row(body[n + i], m, "B", i + 1) for i in range(n)])
    return ControlledNetwork(A, B)


def _fmt(v: float) -> str:
    # shortest repr that round-trips exactly
    return repr(float(v)) if not float(v).is_integer() else str(int(v))


def format_network(net: ControlledNetwork, comment: str | None = None) -> str:
    """Serialize a network; ``parse_network(format_network(net)) == net``."""
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    buf.write(f"{net.n_nodes} {net.n_inputs}\n")
    for row in net.adjacency:
        buf.write(" ".join(_fmt(v) for v in row) + "\n")
    if net.n_inputs:
        for row in net.input_pattern:
            buf.write(" ".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def load_network(path) -> ControlledNetwork:
    return parse_network(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled closed-loop run.

    ``states`` is (T, N), ``consensus_inputs`` (T, M) and
    ``stabilizing_inputs`` (T, W); ``times`` is strictly increasing.
    """

    times: np.ndarray
    states: np.ndarray
    consensus_inputs: np.ndarray = field(default=None)
    stabilizing_inputs: np.ndarray = field(default=None)

    def __post_init__(self):
        t = _frozen(self.times).reshape(-1)
        T = t.shape[0]
        if np.any(np.diff(t) <= 0):
            raise DimensionError("trajectory times must be strictly increasing")

        def as_2d(name, arr):
            if arr is None:
                return np.zeros((T, 0))
            arr = np.asarray(arr, dtype=float)
            if arr.ndim == 1 and T:
                arr = arr.reshape(T, -1) if arr.size % T == 0 else arr
            if arr.ndim != 2 or arr.shape[0] != T:
                raise DimensionError(f"{name} must have {T} rows, got shape {arr.shape}")
            return arr

        X = as_2d("states", self.states)
        U = as_2d("consensus_inputs", self.consensus_inputs)
        Wv = as_2d("stabilizing_inputs", self.stabilizing_inputs)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", _frozen(X))
        object.__setattr__(self, "consensus_inputs", _frozen(U))
        object.__setattr__(self, "stabilizing_inputs", _frozen(Wv))

    def __len__(self):
        return self.times.shape[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _csv(header: list[str], rows: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(format(float(v), ".15g") for v in r) + "\n")
    return buf.getvalue()


def write_trajectory(traj: Trajectory, partition) -> tuple[str, str]:
    """Render a trajectory as CSV text.

    Returns ``(states_csv, cluster_means_csv)``.  The first has columns
    ``t, x_1..x_N, u_1..u_M, w_1..w_W``; the second ``t`` followed by the
    mean state of every cluster of ``partition``.
    """
    n = traj.states.shape[1]
    m = traj.consensus_inputs.shape[1]
    w = traj.stabilizing_inputs.shape[1]
    header = (
        ["t"]
        + [f"x_{i + 1}" for i in range(n)]
        + [f"u_{i + 1}" for i in range(m)]
        + [f"w_{i + 1}" for i in range(w)]
    )
    rows = np.column_stack(
        [traj.times, traj.states, traj.consensus_inputs, traj.stabilizing_inputs]
    ) if len(traj) else np.zeros((0, len(header)))
    clusters = partition.clusters
    means = np.column_stack(
        [traj.times] + [traj.states[:, list(c)].mean(axis=1) for c in clusters]
    ) if len(traj) else np.zeros((0, len(clusters) + 1))
    mean_header = ["t"] + [f"cluster_{j + 1}" for j in range(len(clusters))]
    return _csv(header, rows), _csv(mean_header, means)
