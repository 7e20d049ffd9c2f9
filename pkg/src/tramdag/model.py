"""Model assembly, likelihood, training, persistence.

A :class:`TramDag` holds one transformation per node: an intercept
(Bernstein curve for continuous nodes, cut-points for discrete ones)
plus additive shift terms contributed by parents, all on the latent
logistic scale.  Fitting maximizes the exact likelihood jointly over
every node with minibatch Adam on a single differentiation tape; the
per-node terms share no parameters, so the joint fit factorizes.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import diff
from .diff import AdamState, Tape, Var, adam_step
from .errors import (
    ChecksumError,
    ColumnMismatchError,
    FormatVersionError,
    LevelOutOfRangeError,
    MissingValueError,
    NonFiniteLikelihoodError,
    NotAComplexShiftError,
    UnknownNodeError,
)
from .graph import DagSpec, EffectKind, NodeKind, parse_dag_spec, serialize_dag_spec
from .streams import substream
from .transform import (
    ComplexIntercept,
    ComplexShift,
    LatentLogistic,
    LinearShift,
    MlpWeights,
    Scaler,
    SimpleIntercept,
    bernstein_basis,
    bernstein_slope_basis,
    discrete_log_probs,
    mlp_apply,
    softplus_inverse,
    transform_inverse,
    transform_slope,
    transform_value,
)

__all__ = [
    "Dataset",
    "TrainConfig",
    "FitHistory",
    "TramNode",
    "TramDag",
    "initialize_model",
    "fit",
    "nll_row",
    "nll_dataset",
    "save_model",
    "load_model",
    "extract_coefficients",
    "extract_shift_curve",
    "MODEL_FORMAT_VERSION",
]

MODEL_FORMAT_VERSION = 1
SLOPE_FLOOR = 1e-12
_SHUFFLE_TAG = 0x5F5
_INIT_TAG = 0x171


# -- data -----------------------------------------------------------------


@dataclass
class Dataset:
    """Named columns over a float64 matrix; ordinal levels stored as floats."""

    names: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ColumnMismatchError(
                f"{len(self.names)} names for value shape {self.values.shape}"
            )

    def __len__(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise ColumnMismatchError(f"no column {name!r}") from None

    @classmethod
    def read_csv(cls, path) -> "Dataset":
        names: list[str] | None = None
        rows: list[list[float]] = []
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                if names is None:
                    names = [p.strip() for p in parts]
                    continue
                try:
                    rows.append([float(p) for p in parts])
                except ValueError:
                    raise MissingValueError(f"unparseable row: {line!r}") from None
        if names is None:
            raise MissingValueError(f"{path}: no header row")
        values = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
        return cls(names=names, values=values)

    def write_csv(self, path, discrete: Iterable[bool] | None = None,
                  comments: Iterable[str] = ()) -> None:
        disc = list(discrete) if discrete is not None else [False] * len(self.names)
        with open(path, "w", encoding="utf-8") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            fh.write(",".join(self.names) + "\n")
            for row in self.values:
                cells = [
                    str(int(v)) if d else repr(float(v))
                    for v, d in zip(row, disc)
                ]
                fh.write(",".join(cells) + "\n")


def validate_dataset(spec: DagSpec, data: Dataset) -> np.ndarray:
    """Column-match the dataset to the spec; returns values in spec order."""
    if set(data.names) != set(spec.names):
        raise ColumnMismatchError(
            f"dataset columns {data.names} do not match spec nodes {list(spec.names)}"
        )
    order = [data.names.index(name) for name in spec.names]
    values = data.values[:, order]
    if not np.all(np.isfinite(values)):
        raise MissingValueError("dataset contains non-finite cells")
    for j, decl in enumerate(spec.nodes):
        if decl.is_discrete:
            col = values[:, j]
            if np.any(col != np.rint(col)):
                raise LevelOutOfRangeError(f"{decl.name}: non-integer level")
            if np.any((col < 1) | (col > decl.n_levels)):
                raise LevelOutOfRangeError(
                    f"{decl.name}: levels outside 1..{decl.n_levels}"
                )
    return values


# -- model objects ----------------------------------------------------------


@dataclass
class TramNode:
    name: str
    kind: NodeKind
    levels: int | None
    order: int
    scaler: Scaler | None
    intercept: SimpleIntercept | ComplexIntercept
    shifts: list[LinearShift | ComplexShift] = field(default_factory=list)

    @property
    def is_discrete(self) -> bool:
        return self.kind is not NodeKind.CONTINUOUS


@dataclass
class TramDag:
    spec: DagSpec
    nodes: list[TramNode]
    training_meta: dict = field(default_factory=dict)

    def node_index(self, name: str) -> int:
        for j, node in enumerate(self.nodes):
            if node.name == name:
                return j
        raise UnknownNodeError(f"node {name!r} is not in the model")

    # matrix arguments below are (n, d) in spec column order

    def shift_sum(self, j: int, matrix: np.ndarray) -> np.ndarray:
        total = np.zeros(matrix.shape[0])
        for s in self.nodes[j].shifts:
            total = total + s.value(matrix[:, s.parent_index])
        return total

    def theta(self, j: int, matrix: np.ndarray) -> np.ndarray:
        node = self.nodes[j]
        if isinstance(node.intercept, SimpleIntercept):
            return node.intercept.theta()
        cols = matrix[:, list(node.intercept.parent_indices)]
        return node.intercept.theta(cols)

    def latent_value(self, j: int, matrix: np.ndarray) -> np.ndarray:
        """h(x_j | parents) per row; continuous nodes only."""
        node = self.nodes[j]
        return transform_value(
            self.theta(j, matrix), node.scaler, matrix[:, j], self.shift_sum(j, matrix)
        )

    def invert_latent(self, j: int, u: np.ndarray, matrix: np.ndarray) -> np.ndarray:
        """x_j with h(x_j | parents) = u per row; continuous nodes only."""
        node = self.nodes[j]
        return transform_inverse(
            self.theta(j, matrix), node.scaler, u, self.shift_sum(j, matrix)
        )

    def discrete_parts(self, j: int, matrix: np.ndarray):
        """(cuts, shift) for a discrete node; cuts (K-1,) or per-row."""
        return self.theta(j, matrix), self.shift_sum(j, matrix)


# -- initialization ----------------------------------------------------------


def _affine_ramp(col: np.ndarray, scaler: Scaler, order: int) -> np.ndarray:
    """Raw intercept values whose curve is the quantile-matched affine start."""
    z05, z95 = scaler.standardize(np.quantile(col, [0.05, 0.95]))
    span = float(z95 - z05)
    hi, lo = 2.944438979166441, -2.944438979166441  # logit(0.95), logit(0.05)
    if span <= 1e-9:
        intercept_at_0, slope = -2.0, 4.0
    else:
        slope = (hi - lo) / span
        intercept_at_0 = lo - slope * float(z05)
    raw = np.empty(order + 1)
    raw[0] = intercept_at_0
    raw[1:] = softplus_inverse(slope / order)
    return raw


def _cut_ramp(col: np.ndarray, levels: int) -> np.ndarray:
    """Raw cut-points at the empirical cumulative logits of the levels."""
    n = len(col)
    cum = np.array([np.mean(col <= k) for k in range(1, levels)])
    cum = np.clip(cum, 1.0 / (2 * n), 1.0 - 1.0 / (2 * n))
    cuts = np.log(cum) - np.log1p(-cum)
    cuts = np.maximum.accumulate(cuts)
    gaps = np.maximum(np.diff(cuts), 1e-3)
    raw = np.empty(levels - 1)
    raw[0] = cuts[0]
    for i, g in enumerate(gaps):
        raw[i + 1] = softplus_inverse(g)
    return raw


def initialize_model(spec: DagSpec, data: Dataset, seed: int = 0) -> TramDag:
    """Scalers from the data, affine-start intercepts, zero shifts."""
    values = validate_dataset(spec, data)
    nodes: list[TramNode] = []
    for j, decl in enumerate(spec.nodes):
        col = values[:, j]
        parents = spec.parents_of(j)
        scaler = None
        if decl.kind is NodeKind.CONTINUOUS:
            scaler = Scaler.from_data(col)
            ramp = _affine_ramp(col, scaler, decl.bernstein_order)
            out_dim = decl.bernstein_order + 1
        else:
            ramp = _cut_ramp(col, decl.n_levels)
            out_dim = decl.n_levels - 1

        ci_parents = [i for i, kind in parents if kind is EffectKind.COMPLEX_INTERCEPT]
        shifts: list[LinearShift | ComplexShift] = []
        if ci_parents:
            rng = substream(seed, _INIT_TAG, j)
            intercept: SimpleIntercept | ComplexIntercept = ComplexIntercept(
                mlp=MlpWeights.initialized(
                    rng, len(ci_parents), out_dim, out_bias=ramp
                ),
                parent_indices=tuple(ci_parents),
            )
        else:
            intercept = SimpleIntercept(raw=ramp)
            for pos, (i, kind) in enumerate(parents):
                if kind is EffectKind.LINEAR_SHIFT:
                    shifts.append(LinearShift(parent_index=i, beta=0.0))
                else:
                    rng = substream(seed, _INIT_TAG, j, pos + 1)
                    shifts.append(
                        ComplexShift(
                            parent_index=i,
                            mlp=MlpWeights.initialized(rng, 1, 1),
                        )
                    )
        nodes.append(
            TramNode(
                name=decl.name,
                kind=decl.kind,
                levels=decl.levels,
                order=decl.bernstein_order,
                scaler=scaler,
                intercept=intercept,
                shifts=shifts,
            )
        )
    return TramDag(spec=spec, nodes=nodes)


# -- likelihood, numpy path ---------------------------------------------------


def node_nll(model: TramDag, j: int, matrix: np.ndarray) -> np.ndarray:
    """Per-row negative log-likelihood contribution of one node."""
    node = model.nodes[j]
    if node.is_discrete:
        cuts, shift = model.discrete_parts(j, matrix)
        logp = discrete_log_probs(cuts, shift)
        levels = matrix[:, j].astype(np.int64) - 1
        return -logp[np.arange(matrix.shape[0]), levels]
    u = model.latent_value(j, matrix)
    slope = transform_slope(model.theta(j, matrix), node.scaler, matrix[:, j])
    slope = np.maximum(slope, SLOPE_FLOOR)
    return (
        -LatentLogistic.log_density(u)
        - np.log(slope)
        - node.scaler.log_jacobian
    )


def nll_dataset(model: TramDag, data: Dataset) -> tuple[np.ndarray, float]:
    """Per-node mean NLL and the total mean over a dataset."""
    values = validate_dataset(model.spec, data)
    per_node = np.array(
        [node_nll(model, j, values).mean() for j in range(len(model.nodes))]
    )
    total = float(per_node.sum())
    if not np.isfinite(total):
        raise NonFiniteLikelihoodError("non-finite likelihood on this dataset")
    return per_node, total


def nll_row(model: TramDag, row: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-node and total NLL of one observation vector in spec order."""
    matrix = np.asarray(row, dtype=np.float64).reshape(1, -1)
    per_node = np.array(
        [float(node_nll(model, j, matrix)[0]) for j in range(len(model.nodes))]
    )
    total = float(per_node.sum())
    if not np.isfinite(total):
        raise NonFiniteLikelihoodError(f"non-finite likelihood at row {row!r}")
    return per_node, total


# -- training ------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.001
    batch_size: int = 256
    seed: int = 0
    log_every: int = 0  # epochs between progress lines; 0 keeps quiet


@dataclass
class FitHistory:
    """Per-epoch mean training NLL and linear-coefficient trajectories."""

    nll: list[float] = field(default_factory=list)
    coefficients: dict[str, list[float]] = field(default_factory=dict)
    slope_clamps: int = 0
    wall_seconds: float = 0.0


class _Layout:
    """Flat parameter vector layout mirrored by tape leaves."""

    def __init__(self, model: TramDag):
        self.blocks: list[tuple] = []  # (kind, node_idx, shift_pos, part, shape, offset)
        self.ls_offset: dict[tuple[str, str], int] = {}
        offset = 0
        for j, node in enumerate(model.nodes):
            if isinstance(node.intercept, SimpleIntercept):
                offset = self._add("si", j, -1, 0, node.intercept.raw.shape, offset)
                for pos, s in enumerate(node.shifts):
                    if isinstance(s, LinearShift):
                        parent = model.nodes[s.parent_index].name
                        self.ls_offset[(parent, node.name)] = offset
                        offset = self._add("ls", j, pos, 0, (1,), offset)
                    else:
                        for part, arr in enumerate(s.mlp.arrays()):
                            offset = self._add("cs", j, pos, part, arr.shape, offset)
            else:
                for part, arr in enumerate(node.intercept.mlp.arrays()):
                    offset = self._add("ci", j, -1, part, arr.shape, offset)
        self.size = offset

    def _add(self, kind, j, pos, part, shape, offset) -> int:
        self.blocks.append((kind, j, pos, part, shape, offset))
        return offset + int(np.prod(shape))

    def pack(self, model: TramDag) -> np.ndarray:
        vec = np.empty(self.size)
        for kind, j, pos, part, shape, off in self.blocks:
            size = int(np.prod(shape))
            if kind == "si":
                vec[off : off + size] = model.nodes[j].intercept.raw
            elif kind == "ls":
                vec[off] = model.nodes[j].shifts[pos].beta
            elif kind == "cs":
                vec[off : off + size] = model.nodes[j].shifts[pos].mlp.arrays()[part].ravel()
            else:
                vec[off : off + size] = model.nodes[j].intercept.mlp.arrays()[part].ravel()
        return vec

    def unpack(self, model: TramDag, vec: np.ndarray) -> None:
        for kind, j, pos, part, shape, off in self.blocks:
            size = int(np.prod(shape))
            chunk = vec[off : off + size].reshape(shape)
            if kind == "si":
                model.nodes[j].intercept.raw = chunk.copy()
            elif kind == "ls":
                model.nodes[j].shifts[pos].beta = float(chunk[0])
            elif kind == "cs":
                model.nodes[j].shifts[pos].mlp.arrays()[part][...] = chunk
            else:
                model.nodes[j].intercept.mlp.arrays()[part][...] = chunk


class _MlpVars:
    """Tape handles to one network's weights, sliced from the leaf run."""

    def __init__(self, tape: Tape, leaf0: int, offset: int, n_in: int, n_out: int,
                 hidden: int):
        def grid(base, rows, cols):
            return [
                [Var(tape, base + r * cols + c) for c in range(cols)]
                for r in range(rows)
            ]

        def row(base, size):
            return [Var(tape, base + i) for i in range(size)]

        o = offset
        self.w1 = grid(leaf0 + o, hidden, n_in); o += hidden * n_in
        self.b1 = row(leaf0 + o, hidden); o += hidden
        self.w2 = grid(leaf0 + o, hidden, hidden); o += hidden * hidden
        self.b2 = row(leaf0 + o, hidden); o += hidden
        self.w3 = grid(leaf0 + o, n_out, hidden); o += n_out * hidden
        self.b3 = row(leaf0 + o, n_out); o += n_out
        self.end = o

    def forward(self, inputs: list[Var]) -> list[Var]:
        h1 = []
        for r in range(len(self.b1)):
            acc = self.b1[r]
            for c, x in enumerate(inputs):
                acc = acc + self.w1[r][c] * x
            h1.append(diff.tanh(acc))
        h2 = []
        for r in range(len(self.b2)):
            acc = self.b2[r]
            for c, h in enumerate(h1):
                acc = acc + self.w2[r][c] * h
            h2.append(diff.tanh(acc))
        out = []
        for r in range(len(self.b3)):
            acc = self.b3[r]
            for c, h in enumerate(h2):
                acc = acc + self.w3[r][c] * h
            out.append(acc)
        return out


def _monotone_vars(raw: list[Var]) -> tuple[list[Var], list[Var]]:
    gaps = [diff.softplus(r) for r in raw[1:]]
    theta = [raw[0]]
    for g in gaps:
        theta.append(theta[-1] + g)
    return theta, gaps


@dataclass
class _NodePlan:
    node: TramNode
    decl_index: int
    const_nll: float  # scaler jacobian term, excluded from the graph
    z: np.ndarray | None = None
    basis: np.ndarray | None = None
    slope_basis: np.ndarray | None = None
    onehot: np.ndarray | None = None


def _prepare_plans(model: TramDag, values: np.ndarray) -> list[_NodePlan]:
    plans = []
    for j, node in enumerate(model.nodes):
        if node.is_discrete:
            levels = node.levels if node.levels else 2
            onehot = np.equal(
                values[:, j : j + 1], np.arange(1, levels + 1)[None, :]
            ).astype(np.float64)
            plans.append(_NodePlan(node, j, 0.0, onehot=onehot))
        else:
            z = node.scaler.standardize(values[:, j])
            plans.append(
                _NodePlan(
                    node,
                    j,
                    -node.scaler.log_jacobian,
                    z=z,
                    basis=bernstein_basis(z, node.order),
                    slope_basis=bernstein_slope_basis(z, node.order),
                )
            )
    return plans


def _batch_nll_graph(
    tape: Tape,
    model: TramDag,
    layout: _Layout,
    vector: np.ndarray,
    plans: list[_NodePlan],
    values: np.ndarray,
    idx: np.ndarray,
) -> tuple[Var, int, int]:
    """Record the joint NLL of one minibatch; returns (nll_vec, leaf0, clamps)."""
    leaf0 = len(tape)
    for v in vector:
        tape.leaf(v)

    offsets: dict[tuple, int] = {}
    for kind, j, pos, part, shape, off in layout.blocks:
        offsets[(kind, j, pos, part)] = off

    clamps = 0
    total: Var | None = None
    for plan in plans:
        j = plan.decl_index
        node = plan.node

        # intercept parameters, shared or per-row
        if isinstance(node.intercept, SimpleIntercept):
            off = offsets[("si", j, -1, 0)]
            raw = [Var(tape, leaf0 + off + k) for k in range(len(node.intercept.raw))]
        else:
            mlp = _MlpVars(
                tape,
                leaf0,
                offsets[("ci", j, -1, 0)],
                n_in=len(node.intercept.parent_indices),
                n_out=node.intercept.mlp.b3.shape[0],
                hidden=node.intercept.mlp.b1.shape[0],
            )
            inputs = [
                tape.const(np.ascontiguousarray(values[idx, p]))
                for p in node.intercept.parent_indices
            ]
            raw = mlp.forward(inputs)
        theta, gaps = _monotone_vars(raw)

        # shift terms
        shift: Var | None = None
        for pos, s in enumerate(node.shifts):
            col = tape.const(np.ascontiguousarray(values[idx, s.parent_index]))
            if isinstance(s, LinearShift):
                beta = Var(tape, leaf0 + offsets[("ls", j, pos, 0)])
                term = beta * col
            else:
                mlp = _MlpVars(tape, leaf0, offsets[("cs", j, pos, 0)], 1, 1,
                               s.mlp.b1.shape[0])
                term = mlp.forward([col])[0]
            shift = term if shift is None else shift + term

        if node.is_discrete:
            nll = _discrete_nll_vars(tape, theta, gaps, shift, plan.onehot[idx])
        else:
            nll, clamped = _continuous_nll_vars(
                tape, theta, gaps, shift, plan.basis[idx], plan.slope_basis[idx]
            )
            clamps += clamped
        total = nll if total is None else total + nll
    return total, leaf0, clamps


def _continuous_nll_vars(tape, theta, gaps, shift, basis, slope_basis):
    h = theta[0] * tape.const(np.ascontiguousarray(basis[:, 0]))
    for k in range(1, len(theta)):
        h = h + theta[k] * tape.const(np.ascontiguousarray(basis[:, k]))
    if shift is not None:
        h = h + shift
    slope = gaps[0] * tape.const(np.ascontiguousarray(slope_basis[:, 0]))
    for k in range(1, len(gaps)):
        slope = slope + gaps[k] * tape.const(np.ascontiguousarray(slope_basis[:, k]))
    clamped = 0
    if np.min(slope.value) < SLOPE_FLOOR:
        slope = slope + SLOPE_FLOOR
        clamped = 1
    nll = diff.softplus(h) + diff.softplus(-h) - diff.log(slope)
    return nll, clamped


def _discrete_nll_vars(tape, theta, gaps, shift, onehot):
    k = len(theta) + 1
    if shift is not None:
        cuts = [t + shift for t in theta]
    else:
        cuts = theta
    logp = [diff.log_sigmoid(cuts[0])]
    for m in range(1, k - 1):
        # log(sigma(a) - sigma(b)) = logsig(a) + logsig(-b) + log(1 - exp(-(a-b)))
        gap_term = diff.log(diff.exp(gaps[m - 1]) - 1.0) - gaps[m - 1]
        logp.append(diff.log_sigmoid(cuts[m]) + diff.log_sigmoid(-cuts[m - 1]) + gap_term)
    logp.append(diff.log_sigmoid(-cuts[-1]))
    acc = logp[0] * tape.const(np.ascontiguousarray(onehot[:, 0]))
    for m in range(1, k):
        acc = acc + logp[m] * tape.const(np.ascontiguousarray(onehot[:, m]))
    return -acc


def fit(
    spec: DagSpec, data: Dataset, config: TrainConfig = TrainConfig()
) -> tuple[TramDag, FitHistory]:
    """Maximum-likelihood fit of every node's transformation jointly."""
    started = time.perf_counter()
    model = initialize_model(spec, data, config.seed)
    values = validate_dataset(spec, data)
    plans = _prepare_plans(model, values)
    layout = _Layout(model)
    vector = layout.pack(model)
    state = AdamState.fresh(len(vector), config.learning_rate)
    shuffle = substream(config.seed, _SHUFFLE_TAG)
    history = FitHistory(coefficients={f"{p}->{c}": [] for p, c in layout.ls_offset})
    n = values.shape[0]
    const_nll = sum(p.const_nll for p in plans)

    for epoch in range(config.epochs):
        perm = shuffle.permutation(n)
        running = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            tape = Tape()
            nll_vec, leaf0, clamps = _batch_nll_graph(
                tape, model, layout, vector, plans, values, idx
            )
            history.slope_clamps += clamps
            batch_sum = float(np.sum(nll_vec.value))
            if not np.isfinite(batch_sum):
                raise NonFiniteLikelihoodError(
                    f"non-finite likelihood in epoch {epoch}, batch at row {start}"
                )
            running += batch_sum
            tape.backward(nll_vec.index, seed=np.full(len(idx), 1.0 / len(idx)))
            grads = np.array([tape.adjoint(leaf0 + i) for i in range(len(vector))])
            vector, state = adam_step(vector, grads, state)
        history.nll.append(running / n + const_nll)
        for (p, c), off in layout.ls_offset.items():
            history.coefficients[f"{p}->{c}"].append(float(vector[off]))
        if config.log_every and (epoch + 1) % config.log_every == 0:
            print(f"epoch {epoch + 1:4d}  nll {history.nll[-1]:.6f}")

    layout.unpack(model, vector)
    _absorb_centering(model, values)
    history.wall_seconds = time.perf_counter() - started
    model.training_meta = {
        "n_rows": int(n),
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "seed": config.seed,
        "final_nll": history.nll[-1] if history.nll else None,
        "slope_clamps": history.slope_clamps,
    }
    return model, history


def _absorb_centering(model: TramDag, values: np.ndarray) -> None:
    """Center complex shifts on the training sample, moving means into the intercept."""
    for node in model.nodes:
        for s in node.shifts:
            if isinstance(s, ComplexShift):
                col = values[:, s.parent_index]
                mean = float(np.mean(mlp_apply(s.mlp, col[:, None])[:, 0]))
                s.center += mean
                node.intercept.raw[0] += mean


# -- interpretation -----------------------------------------------------------


def extract_coefficients(model: TramDag) -> dict[tuple[str, str], float]:
    """All linear-shift coefficients keyed by (parent, child)."""
    out: dict[tuple[str, str], float] = {}
    for node in model.nodes:
        for s in node.shifts:
            if isinstance(s, LinearShift):
                out[(model.nodes[s.parent_index].name, node.name)] = s.beta
    return out


def extract_shift_curve(
    model: TramDag, parent: str, child: str, grid: np.ndarray
) -> np.ndarray:
    """Centered complex-shift values over a grid of parent values."""
    i = model.node_index(parent)
    j = model.node_index(child)
    for s in model.nodes[j].shifts:
        if isinstance(s, ComplexShift) and s.parent_index == i:
            return s.value(np.asarray(grid, dtype=np.float64))
    raise NotAComplexShiftError(f"{parent} -> {child} carries no complex shift")


# -- persistence ----------------------------------------------------------------


def _mlp_to_doc(mlp: MlpWeights) -> dict:
    return {
        "w1": mlp.w1.tolist(),
        "b1": mlp.b1.tolist(),
        "w2": mlp.w2.tolist(),
        "b2": mlp.b2.tolist(),
        "w3": mlp.w3.tolist(),
        "b3": mlp.b3.tolist(),
    }


def _mlp_from_doc(doc: dict) -> MlpWeights:
    return MlpWeights(**{k: np.array(v, dtype=np.float64) for k, v in doc.items()})


def _node_to_doc(node: TramNode) -> dict:
    doc: dict = {
        "name": node.name,
        "kind": node.kind.value,
        "levels": node.levels,
        "order": node.order,
        "scaler": [node.scaler.low, node.scaler.high] if node.scaler else None,
    }
    if isinstance(node.intercept, SimpleIntercept):
        doc["intercept"] = {"type": "si", "raw": node.intercept.raw.tolist()}
    else:
        doc["intercept"] = {
            "type": "ci",
            "parents": list(node.intercept.parent_indices),
            "mlp": _mlp_to_doc(node.intercept.mlp),
        }
    doc["shifts"] = [
        {"type": "ls", "parent": s.parent_index, "beta": s.beta}
        if isinstance(s, LinearShift)
        else {
            "type": "cs",
            "parent": s.parent_index,
            "center": s.center,
            "mlp": _mlp_to_doc(s.mlp),
        }
        for s in node.shifts
    ]
    return doc


def _node_from_doc(doc: dict) -> TramNode:
    idoc = doc["intercept"]
    if idoc["type"] == "si":
        intercept: SimpleIntercept | ComplexIntercept = SimpleIntercept(
            raw=np.array(idoc["raw"], dtype=np.float64)
        )
    else:
        intercept = ComplexIntercept(
            mlp=_mlp_from_doc(idoc["mlp"]), parent_indices=tuple(idoc["parents"])
        )
    shifts: list[LinearShift | ComplexShift] = []
    for sdoc in doc["shifts"]:
        if sdoc["type"] == "ls":
            shifts.append(LinearShift(parent_index=sdoc["parent"], beta=sdoc["beta"]))
        else:
            shifts.append(
                ComplexShift(
                    parent_index=sdoc["parent"],
                    mlp=_mlp_from_doc(sdoc["mlp"]),
                    center=sdoc["center"],
                )
            )
    scaler = Scaler(*doc["scaler"]) if doc["scaler"] else None
    return TramNode(
        name=doc["name"],
        kind=NodeKind(doc["kind"]),
        levels=doc["levels"],
        order=doc["order"],
        scaler=scaler,
        intercept=intercept,
        shifts=shifts,
    )


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_model(model: TramDag, path) -> None:
    document = {
        "format_version": MODEL_FORMAT_VERSION,
        "spec": serialize_dag_spec(model.spec),
        "nodes": [_node_to_doc(n) for n in model.nodes],
        "training_meta": model.training_meta,
    }
    payload = _canonical(document)
    checksum = zlib.crc32(payload.encode("utf-8"))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_canonical({"crc32": checksum, "document": document}))
        fh.write("\n")


def load_model(path) -> TramDag:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        outer = json.loads(text)
        checksum = outer["crc32"]
        document = outer["document"]
    except (json.JSONDecodeError, KeyError, TypeError):
        raise ChecksumError(f"{path}: truncated or corrupt model file") from None
    if zlib.crc32(_canonical(document).encode("utf-8")) != checksum:
        raise ChecksumError(f"{path}: checksum mismatch")
    version = document.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise FormatVersionError(
            f"{path}: format_version {version}, expected {MODEL_FORMAT_VERSION}"
        )
    spec = parse_dag_spec(document["spec"])
    nodes = [_node_from_doc(d) for d in document["nodes"]]
    return TramDag(spec=spec, nodes=nodes, training_meta=document["training_meta"])
