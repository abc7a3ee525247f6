"""Problem data for the backward linear-quadratic control family.

The controlled state equation is the backward SDE

    dY = [A Y + B u + C Z + b] dt + Z dW,    Y(T) = xi,

with quadratic running cost weights (Q, N, R) and linear weights
(q, nvec, r).  This module holds the coefficient container, the
supported terminal-condition classes, and the standing-hypothesis
checks: positivity of the weights and a two-sided stabilizability
certificate for the system [A, 0; (B C), (0 I)].
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .linalg import (
    asymmetry,
    min_eig_sym,
    numerical_rank,
    solve_msd_lyapunov,
    spectral_abscissa,
    symmetrize,
)

SYMMETRY_TOL = 1e-12
RANK_REL_TOL = 1e-9

DETERMINISTIC = "deterministic"
AFFINE = "affine"
MARKOVIAN = "markovian"


def _as_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(value, dtype=float))
    if m.shape != (rows, cols):
        raise ValidationError(
            f"{name} must have shape {(rows, cols)}, got {m.shape}", field=name
        )
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries", field=name)
    return m


def _as_vector(value, size: int, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(value, dtype=float)).reshape(-1)
    if v.shape != (size,):
        raise ValidationError(f"{name} must have length {size}, got {v.shape}", field=name)
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains non-finite entries", field=name)
    return v


def _symmetrized(m: np.ndarray, name: str) -> np.ndarray:
    gap = asymmetry(m)
    if gap > SYMMETRY_TOL:
        warnings.warn(
            f"{name} deviates from symmetry by {gap:.3e}; symmetrizing on ingest",
            stacklevel=3,
        )
    return symmetrize(m)


@dataclass(frozen=True)
class ProblemData:
    """Constant coefficients and weights of one problem instance.

    Weights Q, N, R are symmetrized on construction; an asymmetry beyond
    1e-12 triggers a warning rather than an error.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    b: np.ndarray
    Q: np.ndarray
    N: np.ndarray
    R: np.ndarray
    q: np.ndarray
    nvec: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"A must be square, got shape {A.shape}", field="A")
        n = A.shape[0]
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if B.shape[0] != n:
            raise ValidationError(
                f"B must have {n} rows to match A, got shape {B.shape}", field="B"
            )
        m = B.shape[1]
        object.__setattr__(self, "A", _as_matrix(A, n, n, "A"))
        object.__setattr__(self, "B", _as_matrix(B, n, m, "B"))
        object.__setattr__(self, "C", _as_matrix(self.C, n, n, "C"))
        object.__setattr__(self, "b", _as_vector(self.b, n, "b"))
        object.__setattr__(self, "Q", _symmetrized(_as_matrix(self.Q, n, n, "Q"), "Q"))
        object.__setattr__(self, "N", _symmetrized(_as_matrix(self.N, n, n, "N"), "N"))
        object.__setattr__(self, "R", _symmetrized(_as_matrix(self.R, m, m, "R"), "R"))
        object.__setattr__(self, "q", _as_vector(self.q, n, "q"))
        object.__setattr__(self, "nvec", _as_vector(self.nvec, n, "nvec"))
        object.__setattr__(self, "r", _as_vector(self.r, m, "r"))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


def scalar_problem(A=-1.0, B=1.0, C=0.0, b=0.0, Q=1.0, N=1.0, R=1.0,
                   q=0.0, nvec=0.0, r=0.0) -> ProblemData:
    """Convenience constructor for one-dimensional problems."""
    return ProblemData(
        A=[[A]], B=[[B]], C=[[C]], b=[b],
        Q=[[Q]], N=[[N]], R=[[R]], q=[q], nvec=[nvec], r=[r],
    )


@dataclass(frozen=True)
class TerminalCondition:
    """Terminal state xi for the backward equation.

    kind "deterministic": xi = xi0.
    kind "affine":        xi = xi0 + xi1 * W_T (unbounded; accepted with a
                          warning flag since it sits outside the bounded
                          terminal-state hypothesis).
    kind "markovian":     xi = g(W_T) with g tabulated on a strictly
                          increasing, bounded w-grid.
    """

    kind: str
    xi0: np.ndarray
    xi1: np.ndarray | None = None
    g_w: np.ndarray | None = None
    g_values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (DETERMINISTIC, AFFINE, MARKOVIAN):
            raise ValidationError(f"unknown terminal kind {self.kind!r}", field="terminal.kind")
        xi0 = np.atleast_1d(np.asarray(self.xi0, dtype=float)).reshape(-1)
        object.__setattr__(self, "xi0", xi0)
        n = xi0.size
        if self.kind == AFFINE:
            if self.xi1 is None:
                raise ValidationError("affine terminal requires xi1", field="terminal.xi1")
            object.__setattr__(self, "xi1", _as_vector(self.xi1, n, "terminal.xi1"))
        else:
            xi1 = np.zeros(n) if self.xi1 is None else _as_vector(self.xi1, n, "terminal.xi1")
            if self.kind == DETERMINISTIC and np.any(xi1 != 0.0):
                raise ValidationError(
                    "deterministic terminal must have xi1 = 0", field="terminal.xi1"
                )
            object.__setattr__(self, "xi1", xi1)
        if self.kind == MARKOVIAN:
            if self.g_w is None or self.g_values is None:
                raise ValidationError(
                    "markovian terminal requires a g table", field="terminal.g_grid"
                )
            g_w = np.asarray(self.g_w, dtype=float).reshape(-1)
            g_values = np.atleast_2d(np.asarray(self.g_values, dtype=float))
            if g_values.shape != (g_w.size, n):
                raise ValidationError(
                    f"g table must have shape {(g_w.size, n)}, got {g_values.shape}",
                    field="terminal.g_grid",
                )
            if g_w.size < 2 or np.any(np.diff(g_w) <= 0):
                raise ValidationError(
                    "g grid must be strictly increasing", field="terminal.g_grid"
                )
            if not np.all(np.isfinite(g_values)):
                raise ValidationError(
                    "g table must be finite (bounded map)", field="terminal.g_grid"
                )
            object.__setattr__(self, "g_w", g_w)
            object.__setattr__(self, "g_values", g_values)
        elif self.g_w is not None or self.g_values is not None:
            raise ValidationError(
                f"{self.kind} terminal must not carry a g table", field="terminal.g_grid"
            )

    @property
    def n(self) -> int:
        return self.xi0.size

    def g(self, w: np.ndarray) -> np.ndarray:
        """Evaluate the tabulated terminal map at points w (flat clamp outside)."""
        if self.kind != MARKOVIAN:
            raise ValidationError("g is only defined for markovian terminals")
        w = np.asarray(w, dtype=float)
        out = np.empty(w.shape + (self.n,))
        for i in range(self.n):
            out[..., i] = np.interp(w, self.g_w, self.g_values[:, i])
        return out

    def warnings(self) -> list[str]:
        if self.kind == AFFINE and np.any(self.xi1 != 0.0):
            return ["terminal state is affine in W_T and therefore unbounded: "
                    "outside the bounded-terminal hypothesis"]
        return []


def deterministic_terminal(xi0) -> TerminalCondition:
    return TerminalCondition(kind=DETERMINISTIC, xi0=np.atleast_1d(np.asarray(xi0, float)))


def affine_terminal(xi0, xi1) -> TerminalCondition:
    return TerminalCondition(
        kind=AFFINE,
        xi0=np.atleast_1d(np.asarray(xi0, float)),
        xi1=np.atleast_1d(np.asarray(xi1, float)),
    )


def markovian_terminal(g_w, g_values) -> TerminalCondition:
    g_values = np.atleast_2d(np.asarray(g_values, dtype=float))
    if g_values.shape[0] == 1 and np.asarray(g_w).size != 1:
        g_values = g_values.T
    return TerminalCondition(
        kind=MARKOVIAN,
        xi0=np.zeros(g_values.shape[1]),
        g_w=np.asarray(g_w, float),
        g_values=g_values,
    )


@dataclass(frozen=True)
class StabilityQuery:
    """Coefficients of the homogeneous linear SDE dX = Acal X dt + Ccal X dW.

    The optional (Bcal, Dcal) pair describes the controlled variant; the
    Lyapunov certificate below only inspects the uncontrolled part.
    """

    Acal: np.ndarray
    Ccal: np.ndarray
    Bcal: np.ndarray | None = None
    Dcal: np.ndarray | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.Acal, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValidationError(f"Acal must be square, got {a.shape}", field="Acal")
        n = a.shape[0]
        object.__setattr__(self, "Acal", a)
        object.__setattr__(self, "Ccal", _as_matrix(self.Ccal, n, n, "Ccal"))
        if (self.Bcal is None) != (self.Dcal is None):
            raise ValidationError("Bcal and Dcal must be given together", field="Bcal")
        if self.Bcal is not None:
            bcal = np.atleast_2d(np.asarray(self.Bcal, dtype=float))
            if bcal.shape[0] != n:
                raise ValidationError(
                    f"Bcal must have {n} rows, got {bcal.shape}", field="Bcal"
                )
            k = bcal.shape[1]
            object.__setattr__(self, "Bcal", bcal)
            object.__setattr__(self, "Dcal", _as_matrix(self.Dcal, n, k, "Dcal"))


def hautus_test(A, B, C, rel_tol: float = RANK_REL_TOL) -> bool:
    """Full-rank test of (A - lambda*I, B, C) at every unstable eigenvalue.

    Returns True iff for each eigenvalue lambda of A with Re lambda >= 0
    the stacked n x (n+m+n) matrix has numerical rank n (singular values
    above rel_tol times the largest).  Vacuously true for Hurwitz A.
    This is a necessary condition for stabilizability of the pair.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if A.shape != (n, n):
        raise ValidationError(f"A must be square, got {A.shape}", field="A")
    if B.shape[0] != n:
        raise ValidationError(f"B must have {n} rows, got {B.shape}", field="B")
    if C.shape != (n, n):
        raise ValidationError(f"C must be {n}x{n}, got {C.shape}", field="C")
    for lam in np.linalg.eigvals(A):
        if lam.real < 0.0:
            continue
        stacked = np.hstack([A - lam * np.eye(n), B.astype(complex), C.astype(complex)])
        if numerical_rank(stacked, rel_tol) < n:
            return False
    return True


def lyapunov_certificate(sq: StabilityQuery) -> np.ndarray | None:
    """Positive definite P with P*Acal + Acal.T*P + Ccal.T*P*Ccal = -I, if any.

    Existence of such a P certifies mean-square exponential stability of
    the homogeneous system.  Returns None when the linear solve fails or
    the solution is not positive definite.
    """
    n = sq.Acal.shape[0]
    try:
        p = solve_msd_lyapunov(sq.Acal, sq.Ccal, -np.eye(n))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(p)) or min_eig_sym(p) <= 0.0:
        return None
    return p


@dataclass
class HypothesisReport:
    """Outcome of the standing-hypothesis checks for one problem."""

    h2: bool
    h1_necessary: bool
    h1_sufficient: bool
    weight_min_eigs: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)

    @property
    def h1_verified(self) -> bool:
        return self.h1_sufficient

    def to_dict(self) -> dict:
        return {
            "h2": self.h2,
            "h1_necessary": self.h1_necessary,
            "h1_sufficient": self.h1_sufficient,
            "h1_verified": self.h1_verified,
            "weight_min_eigs": {k: float(v) for k, v in self.weight_min_eigs.items()},
            "messages": list(self.messages),
        }


def validate_hypotheses(p: ProblemData) -> HypothesisReport:
    """Check weight positivity and both stabilizability flags.

    The positivity flag is exact up to eigensolves.  Stabilizability of
    [A, 0; (B C), (0 I)] has no finite decision procedure here, so two
    flags are reported: the Hautus rank condition (necessary) and success
    of the steady Riccati solve plus its closed-loop certificate
    (sufficient).  "Verified" means the sufficient flag.
    """
    from . import riccati  # local import to avoid a module cycle

    eigs = {
        "Q": min_eig_sym(p.Q),
        "N": min_eig_sym(p.N),
        "R": min_eig_sym(p.R),
    }
    h2 = all(v > 0.0 for v in eigs.values())
    h1_necessary = hautus_test(p.A, p.B, p.C)

    h1_sufficient = False
    messages: list[str] = []
    if not h2:
        messages.append("weight matrices are not all positive definite")
    else:
        try:
            pair = riccati.solve_are(p)
        except Exception as exc:  # noqa: BLE001 - failure means "not certified"
            messages.append(f"steady solve failed: {exc}")
        else:
            lam_max = riccati.stability_certificate(p, pair)
            if lam_max <= -1e-10:
                h1_sufficient = True
            else:
                messages.append(
                    f"closed-loop certificate not strictly negative (lam_max={lam_max:.3e})"
                )
    if h1_sufficient and not h1_necessary:
        messages.append("rank test and certificate disagree; inspect conditioning")
    return HypothesisReport(
        h2=h2,
        h1_necessary=h1_necessary,
        h1_sufficient=h1_sufficient,
        weight_min_eigs=eigs,
        messages=messages,
    )


def is_hurwitz(A: np.ndarray, tol: float = 0.0) -> bool:
    return spectral_abscissa(np.atleast_2d(np.asarray(A, float))) < -tol


# ---------------------------------------------------------------------------
# JSON ingest
# ---------------------------------------------------------------------------

def problem_from_dict(data: dict) -> tuple[ProblemData, TerminalCondition]:
    """Build (ProblemData, TerminalCondition) from the documented JSON layout.

    Matrices are row-major nested lists.  A missing "terminal" entry
    defaults to the deterministic zero terminal state.
    """
    required = ["A", "B", "C", "b", "Q", "N", "R", "q", "nvec", "r"]
    for key in required:
        if key not in data:
            raise ValidationError(f"problem file is missing {key!r}", field=key)
    p = ProblemData(
        A=data["A"], B=data["B"], C=data["C"], b=data["b"],
        Q=data["Q"], N=data["N"], R=data["R"],
        q=data["q"], nvec=data["nvec"], r=data["r"],
    )
    if "n" in data and int(data["n"]) != p.n:
        raise ValidationError(f"declared n={data['n']} but A is {p.n}x{p.n}", field="n")
    if "m" in data and int(data["m"]) != p.m:
        raise ValidationError(f"declared m={data['m']} but B has {p.m} columns", field="m")

    term = data.get("terminal")
    if term is None:
        return p, deterministic_terminal(np.zeros(p.n))
    kind = term.get("kind", DETERMINISTIC)
    if kind == DETERMINISTIC:
        xi = deterministic_terminal(_as_vector(term.get("xi0", np.zeros(p.n)), p.n, "terminal.xi0"))
    elif kind == AFFINE:
        xi = affine_terminal(
            _as_vector(term.get("xi0", np.zeros(p.n)), p.n, "terminal.xi0"),
            _as_vector(term.get("xi1", np.zeros(p.n)), p.n, "terminal.xi1"),
        )
    elif kind == MARKOVIAN:
        grid = term.get("g_grid")
        if not isinstance(grid, dict) or "w" not in grid or "values" not in grid:
            raise ValidationError(
                "markovian terminal needs g_grid = {w: [...], values: [[...]]}",
                field="terminal.g_grid",
            )
        xi = markovian_terminal(grid["w"], grid["values"])
    else:
        raise ValidationError(f"unknown terminal kind {kind!r}", field="terminal.kind")
    if xi.n != p.n:
        raise ValidationError(
            f"terminal dimension {xi.n} does not match state dimension {p.n}",
            field="terminal",
        )
    return p, xi


def load_problem(path: str | Path) -> tuple[ProblemData, TerminalCondition]:
    """Read a problem JSON file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("problem file must contain a JSON object")
    return problem_from_dict(data)
