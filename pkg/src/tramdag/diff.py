"""Reverse-mode differentiation over scalar operations, plus Adam.

A :class:`Tape` records elementary operations eagerly and replays them
backwards for gradients.  Node values are float64 scalars or 1-d arrays
carrying one value per data row; an array-valued node applies the same
scalar operation to every row independently, so one recording serves a
whole minibatch.  Parameters enter as 0-d leaves and receive row-summed
adjoints.

The op set is deliberately small: add, sub, mul, div, neg, exp, log,
tanh, sigmoid, softplus, log_sigmoid, pow_int.  log and div raise
:class:`DomainError` instead of producing non-finite values silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, LengthMismatchError

__all__ = [
    "Tape",
    "Var",
    "AdamState",
    "adam_step",
    "finite_diff_check",
    "OPCODES",
    "exp",
    "log",
    "tanh",
    "sigmoid",
    "softplus",
    "log_sigmoid",
    "pow_int",
]

OPCODES = (
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "exp",
    "log",
    "tanh",
    "sigmoid",
    "softplus",
    "log_sigmoid",
    "pow_int",
)

(_ADD, _SUB, _MUL, _DIV, _NEG, _EXP, _LOG, _TANH, _SIG, _SP, _LSIG, _POW) = range(12)
_CODE_OF = {name: code for code, name in enumerate(OPCODES)}
_LEAF = -1

_UNARY = {_NEG, _EXP, _LOG, _TANH, _SIG, _SP, _LSIG, _POW}


def _np_sigmoid(x):
    e = np.exp(-np.abs(x))
    return np.where(np.asarray(x) >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _np_softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _np_log_sigmoid(x):
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


class Tape:
    """Eager record of scalar operations with reverse-mode replay."""

    __slots__ = ("_op", "_a", "_b", "_aux", "_val", "_needs", "_scalar", "_adj")

    def __init__(self) -> None:
        self._op: list[int] = []
        self._a: list[int] = []
        self._b: list[int] = []
        self._aux: list[int] = []
        self._val: list = []
        self._needs: list[bool] = []   # does any parameter feed this node
        self._scalar: list[bool] = []  # 0-d value (row-shared) vs per-row array
        self._adj: list | None = None

    def __len__(self) -> int:
        return len(self._op)

    # -- construction -------------------------------------------------

    def leaf(self, value, *, constant: bool = False) -> int:
        """Enter a value as a leaf; constants never accumulate adjoints."""
        value = _coerce(value)
        self._op.append(_LEAF)
        self._a.append(-1)
        self._b.append(-1)
        self._aux.append(0)
        self._val.append(value)
        self._needs.append(not constant)
        self._scalar.append(not (isinstance(value, np.ndarray) and value.ndim > 0))
        return len(self._op) - 1

    def var(self, value) -> "Var":
        return Var(self, self.leaf(value))

    def const(self, value) -> "Var":
        return Var(self, self.leaf(value, constant=True))

    def record(self, op: str, *inputs: int, exponent: int | None = None) -> int:
        """Record one operation over existing node indices; returns the new index."""
        try:
            code = _CODE_OF[op]
        except KeyError:
            raise ValueError(f"unknown opcode {op!r}") from None
        n = len(self._op)
        for i in inputs:
            if not 0 <= i < n:
                raise IndexError(f"input index {i} not on tape")
        if code == _POW:
            if exponent is None or exponent != int(exponent):
                raise ValueError("pow_int requires an integer exponent")
            if len(inputs) != 1:
                raise ValueError("pow_int takes one input")
            return self._push(code, inputs[0], -1, int(exponent))
        if exponent is not None:
            raise ValueError("exponent only applies to pow_int")
        if code in _UNARY:
            if len(inputs) != 1:
                raise ValueError(f"{op} takes one input")
            return self._push(code, inputs[0], -1, 0)
        if len(inputs) != 2:
            raise ValueError(f"{op} takes two inputs")
        return self._push(code, inputs[0], inputs[1], 0)

    def _push(self, code: int, ia: int, ib: int, aux: int) -> int:
        val = self._val
        va = val[ia]
        if code == _MUL:
            out = va * val[ib]
        elif code == _ADD:
            out = va + val[ib]
        elif code == _SUB:
            out = va - val[ib]
        elif code == _SP:
            out = _np_softplus(va)
        elif code == _LSIG:
            out = _np_log_sigmoid(va)
        elif code == _SIG:
            out = _np_sigmoid(va)
        elif code == _TANH:
            out = np.tanh(va)
        elif code == _NEG:
            out = -va
        elif code == _EXP:
            out = np.exp(va)
        elif code == _LOG:
            if np.any(np.asarray(va) <= 0.0):
                raise DomainError("log of a non-positive value")
            out = np.log(va)
        elif code == _DIV:
            vb = val[ib]
            if np.any(np.asarray(vb) == 0.0):
                raise DomainError("division by zero")
            out = va / vb
        elif code == _POW:
            if aux < 0 and np.any(np.asarray(va) == 0.0):
                raise DomainError("zero base with negative exponent")
            out = va ** aux
        else:  # pragma: no cover
            raise AssertionError(code)
        self._op.append(code)
        self._a.append(ia)
        self._b.append(ib)
        self._aux.append(aux)
        val.append(out)
        needs = self._needs
        if ib >= 0:
            self._needs.append(needs[ia] or needs[ib])
        else:
            self._needs.append(needs[ia])
        self._scalar.append(not (isinstance(out, np.ndarray) and out.ndim > 0))
        return len(self._op) - 1

    # -- access ---------------------------------------------------------

    def value(self, index: int):
        return self._val[index]

    def adjoint(self, index: int):
        """Adjoint after backward(); nodes unreachable from the output get 0."""
        if self._adj is None:
            raise RuntimeError("backward() has not run on this tape")
        a = self._adj[index]
        return 0.0 if a is None else a

    # -- reverse sweep ----------------------------------------------------

    def backward(self, output: int | "Var", seed=1.0) -> None:
        """Fill adjoints of everything `output` depends on.

        `seed` is the adjoint of the output itself; a per-row array seed
        differentiates a weighted row sum of an array-valued output.
        """
        if isinstance(output, Var):
            output = output.index
        op, a_of, b_of, aux_of = self._op, self._a, self._b, self._aux
        val, needs, scalar = self._val, self._needs, self._scalar
        adj: list = [None] * len(op)
        adj[output] = _coerce(seed)
        for k in range(output, -1, -1):
            g = adj[k]
            if g is None:
                continue
            code = op[k]
            if code == _LEAF:
                continue
            ia = a_of[k]
            if code == _MUL:
                ib = b_of[k]
                if needs[ia]:
                    _acc(adj, ia, g * val[ib], scalar)
                if needs[ib]:
                    _acc(adj, ib, g * val[ia], scalar)
            elif code == _ADD:
                ib = b_of[k]
                if needs[ia]:
                    _acc(adj, ia, g, scalar)
                if needs[ib]:
                    _acc(adj, ib, g, scalar)
            elif code == _SUB:
                ib = b_of[k]
                if needs[ia]:
                    _acc(adj, ia, g, scalar)
                if needs[ib]:
                    _acc(adj, ib, -g, scalar)
            elif code == _SP:
                if needs[ia]:
                    _acc(adj, ia, g * _np_sigmoid(val[ia]), scalar)
            elif code == _LSIG:
                if needs[ia]:
                    _acc(adj, ia, g * _np_sigmoid(-val[ia]), scalar)
            elif code == _SIG:
                if needs[ia]:
                    y = val[k]
                    _acc(adj, ia, g * (y * (1.0 - y)), scalar)
            elif code == _TANH:
                if needs[ia]:
                    y = val[k]
                    _acc(adj, ia, g * (1.0 - y * y), scalar)
            elif code == _NEG:
                if needs[ia]:
                    _acc(adj, ia, -g, scalar)
            elif code == _EXP:
                if needs[ia]:
                    _acc(adj, ia, g * val[k], scalar)
            elif code == _LOG:
                if needs[ia]:
                    _acc(adj, ia, g / val[ia], scalar)
            elif code == _DIV:
                ib = b_of[k]
                vb = val[ib]
                if needs[ia]:
                    _acc(adj, ia, g / vb, scalar)
                if needs[ib]:
                    _acc(adj, ib, -g * val[k] / vb, scalar)
            elif code == _POW:
                if needs[ia]:
                    p = aux_of[k]
                    _acc(adj, ia, g * p * val[ia] ** (p - 1), scalar)
        self._adj = adj


def _acc(adj: list, i: int, g, scalar: list) -> None:
    if scalar[i] and isinstance(g, np.ndarray) and g.ndim > 0:
        g = g.sum()
    cur = adj[i]
    adj[i] = g if cur is None else cur + g


def _coerce(value):
    if isinstance(value, np.ndarray):
        return value if value.dtype == np.float64 else value.astype(np.float64)
    return float(value)


class Var:
    """Handle to a tape node with operator sugar."""

    __slots__ = ("tape", "index")
    __array_ufunc__ = None  # keep numpy from broadcasting over Var

    def __init__(self, tape: Tape, index: int):
        self.tape = tape
        self.index = index

    @property
    def value(self):
        return self.tape.value(self.index)

    @property
    def grad(self):
        return self.tape.adjoint(self.index)

    def _lift(self, other) -> int:
        if isinstance(other, Var):
            if other.tape is not self.tape:
                raise ValueError("operands live on different tapes")
            return other.index
        return self.tape.leaf(other, constant=True)

    def _new(self, code: int, ia: int, ib: int, aux: int = 0) -> "Var":
        return Var(self.tape, self.tape._push(code, ia, ib, aux))

    def __add__(self, other):
        return self._new(_ADD, self.index, self._lift(other))

    def __radd__(self, other):
        return self._new(_ADD, self._lift(other), self.index)

    def __sub__(self, other):
        return self._new(_SUB, self.index, self._lift(other))

    def __rsub__(self, other):
        return self._new(_SUB, self._lift(other), self.index)

    def __mul__(self, other):
        return self._new(_MUL, self.index, self._lift(other))

    def __rmul__(self, other):
        return self._new(_MUL, self._lift(other), self.index)

    def __truediv__(self, other):
        return self._new(_DIV, self.index, self._lift(other))

    def __rtruediv__(self, other):
        return self._new(_DIV, self._lift(other), self.index)

    def __neg__(self):
        return self._new(_NEG, self.index, -1)

    def __pow__(self, exponent):
        if exponent != int(exponent):
            raise ValueError("only integer powers are recorded")
        return self._new(_POW, self.index, -1, int(exponent))

    def backward(self, seed=1.0) -> None:
        self.tape.backward(self.index, seed)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Var(#{self.index}, value={self.value!r})"


def _dispatch(name: str, np_fn: Callable):
    code = _CODE_OF[name]

    def fn(x):
        if isinstance(x, Var):
            return x._new(code, x.index, -1)
        return np_fn(x)

    fn.__name__ = name
    return fn


exp = _dispatch("exp", np.exp)
tanh = _dispatch("tanh", np.tanh)
sigmoid = _dispatch("sigmoid", _np_sigmoid)
softplus = _dispatch("softplus", _np_softplus)
log_sigmoid = _dispatch("log_sigmoid", _np_log_sigmoid)


def log(x):
    if isinstance(x, Var):
        return x._new(_LOG, x.index, -1)
    if np.any(np.asarray(x) <= 0.0):
        raise DomainError("log of a non-positive value")
    return np.log(x)


def pow_int(x, exponent: int):
    if isinstance(x, Var):
        return x ** exponent
    if exponent != int(exponent):
        raise ValueError("only integer powers are recorded")
    return x ** int(exponent)


# -- Adam -------------------------------------------------------------------


@dataclass
class AdamState:
    """Moment estimates and hyperparameters for one parameter vector."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float

    @classmethod
    def fresh(
        cls,
        size: int,
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        return cls(
            first_moment=np.zeros(size),
            second_moment=np.zeros(size),
            step_count=0,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(
    params: np.ndarray, grads: np.ndarray, state: AdamState
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns the new vector and state."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.first_moment.shape:
        raise LengthMismatchError(
            f"params {params.shape}, grads {grads.shape}, "
            f"state {state.first_moment.shape}"
        )
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    m = b1 * state.first_moment + (1.0 - b1) * grads
    v = b2 * state.second_moment + (1.0 - b2) * grads * grads
    m_hat = m / (1.0 - b1 ** t)
    v_hat = v / (1.0 - b2 ** t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(
        first_moment=m,
        second_moment=v,
        step_count=t,
        learning_rate=state.learning_rate,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
    )
    return new_params, new_state


# -- gradient oracle ---------------------------------------------------------


def finite_diff_check(f: Callable, x: Sequence[float], eps: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    `f` must accept a sequence of Var (tape pass) or of plain floats
    (difference pass) and return the scalar it computes from them.
    """
    x = [float(v) for v in x]
    tape = Tape()
    vs = [tape.var(v) for v in x]
    out = f(vs)
    if not isinstance(out, Var):
        raise TypeError("f must return a Var when given Var inputs")
    tape.backward(out.index)
    grads = [tape.adjoint(v.index) for v in vs]

    worst = 0.0
    for i in range(len(x)):
        hi = list(x)
        lo = list(x)
        hi[i] += eps
        lo[i] -= eps
        fd = (float(f(hi)) - float(f(lo))) / (2.0 * eps)
        g = float(grads[i])
        denom = max(abs(g), abs(fd))
        if denom == 0.0:
            continue
        worst = max(worst, abs(g - fd) / denom)
    return worst
