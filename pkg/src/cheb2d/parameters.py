"""Parameter ledgers for the Chebyshev deformation families.

A ledger is the table ``s[i, j]`` that fixes a bivariate orthonormal family
level by level. Three closed-form families are supported: the product
Chebyshev family, the one-parameter ``s11`` deformation and the
two-parameter ``(s11, s10)`` deformation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

FAMILY_TAGS = ("chebyshev", "one_param", "two_param")


class InvalidFamily(ValueError):
    pass


@dataclass(frozen=True)
class DeformationFamily:
    tag: str
    s11: float = 0.0
    s10: float | None = None

    @classmethod
    def chebyshev(cls) -> "DeformationFamily":
        return cls("chebyshev")

    @classmethod
    def one_param(cls, s11: float) -> "DeformationFamily":
        return cls("one_param", float(s11))

    @classmethod
    def two_param(cls, s11: float, s10: float) -> "DeformationFamily":
        return cls("two_param", float(s11), float(s10))

    @classmethod
    def from_name(cls, name: str, s11: float | None = None, s10: float | None = None):
        """Build from CLI-style names (``one-param`` and ``one_param`` both work)."""
        tag = name.replace("-", "_")
        if tag == "chebyshev":
            return cls.chebyshev()
        if tag == "one_param":
            if s11 is None:
                raise InvalidFamily("one_param needs s11")
            return cls.one_param(s11)
        if tag == "two_param":
            if s11 is None or s10 is None:
                raise InvalidFamily("two_param needs s11 and s10")
            return cls.two_param(s11, s10)
        raise InvalidFamily(f"unknown family {name!r}")

    def violations(self) -> list[str]:
        out = []
        if self.tag not in FAMILY_TAGS:
            return [f"unknown family tag {self.tag!r}"]
        if self.tag == "chebyshev":
            if self.s11 != 0.0:
                out.append("chebyshev family has s11 = 0")
            return out
        if not 0.0 < abs(self.s11) < 1.0:
            out.append(f"0 < |s11| < 1 violated (s11 = {self.s11})")
        if self.tag == "two_param":
            if self.s10 is None or not abs(self.s10) > 0.5:
                out.append(f"|s10| > 1/2 violated (s10 = {self.s10})")
        elif self.s10 is not None:
            out.append("s10 is only defined for two_param")
        return out

    def check(self) -> "DeformationFamily":
        bad = self.violations()
        if bad:
            raise InvalidFamily("; ".join(bad))
        return self

    @property
    def rho(self) -> float:
        """``sqrt(1 - s11**2)``, the recurring corner factor."""
        return math.sqrt(1.0 - self.s11 * self.s11)


@dataclass
class ParameterLedger:
    """Dense table ``values[(i, j)]`` for ``0 <= i <= 2*nmax``, ``0 <= j <= 2*mmax``."""

    nmax: int
    mmax: int
    values: dict = field(default_factory=dict)
    family: DeformationFamily | None = None

    def __getitem__(self, ij):
        return self.values[ij]

    def __setitem__(self, ij, v):
        self.values[ij] = float(v)

    def to_json(self) -> str:
        fam = self.family
        doc = {
            "family": fam.tag if fam else None,
            "s11": fam.s11 if fam else None,
            "s10": fam.s10 if fam else None,
            "values": [[i, j, v] for (i, j), v in sorted(self.values.items())],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ParameterLedger":
        doc = json.loads(text)
        values = {(int(i), int(j)): float(v) for i, j, v in doc["values"]}
        imax = max(i for i, _ in values)
        jmax = max(j for _, j in values)
        fam = None
        if doc.get("family"):
            fam = DeformationFamily(doc["family"], doc.get("s11") or 0.0, doc.get("s10"))
        return cls(imax // 2, jmax // 2, values, fam)


def _level_value(family: DeformationFamily, i: int, j: int) -> float:
    if i == 0 and j == 0:
        return 1.0
    if j == 0 or i == 0:
        k = i or j
        return 0.0 if k % 2 else 0.5
    if i % 2 and j % 2:
        return 0.0 if family.tag == "chebyshev" else family.s11
    if i % 2 or j % 2:
        return 0.0
    return 0.5


def ledger_for_family(
    family: DeformationFamily, nmax: int, mmax: int, strict: bool = True
) -> ParameterLedger:
    """Full ``s[i, j]`` table of a family.

    With ``strict=False`` the family invariants are not enforced, which lets
    :func:`validate_ledger` report on out-of-range parameters.
    """
    if strict:
        family.check()
    values = {}
    for i in range(2 * nmax + 1):
        for j in range(2 * mmax + 1):
            values[(i, j)] = _level_value(family, i, j)
    if family.tag == "two_param":
        if nmax >= 1:
            values[(1, 0)] = family.s10
            values[(2, 0)] = 0.5
        if mmax >= 1:
            values[(0, 1)] = family.s10 * family.s11
            values[(0, 2)] = 0.5
    return ParameterLedger(nmax, mmax, values, family)


def validate_ledger(ledger: ParameterLedger) -> list[str]:
    """Positivity diagnostics: ``s[2i, 2j] > 0`` and ``||K_ij|| < 1``.

    ``K_ij`` carries the ledger entry ``s[2i-1, 2j-1]`` in its bottom-right
    corner and zeros elsewhere (the structure of every shipped family); its
    norm is the largest singular value.
    """
    out = []
    for (i, j), v in sorted(ledger.values.items()):
        if i % 2 == 0 and j % 2 == 0 and not v > 0:
            out.append(f"s[{i},{j}] = {v!r}: s_(2i,2j) > 0 violated")
    for i in range(1, ledger.nmax + 1):
        for j in range(1, ledger.mmax + 1):
            corner = ledger.values.get((2 * i - 1, 2 * j - 1))
            if corner is None:
                continue
            k = np.zeros((j, i))
            k[-1, -1] = corner
            norm = np.linalg.norm(k, 2)
            if not norm < 1.0:
                out.append(f"K[{i},{j}]: ||K_(i,j)|| < 1 violated (norm {norm!r})")
    return out


@dataclass(frozen=True)
class LexStep:
    K: np.ndarray
    J1: np.ndarray
    J2: np.ndarray


def lex_step_coefficients(family: DeformationFamily, n: int, m: int) -> LexStep:
    """Closed-form ``K`` (m x n), ``J1`` (m x (m+1)) and ``J2`` (m x n) at level (n, m)."""
    if n < 1 or m < 1:
        raise ValueError("lex step coefficients need n, m >= 1")
    s11 = 0.0 if family.tag == "chebyshev" else family.s11
    k = np.zeros((m, n))
    k[-1, -1] = s11
    j1 = np.zeros((m, m + 1))
    for r in range(m):
        if r >= 1:
            j1[r, r - 1] = 0.5
        j1[r, r + 1] = 0.5
    if m >= 2:
        j1[m - 1, m - 2] = 0.5 * math.sqrt(1.0 - s11 * s11)
    return LexStep(k, j1, np.zeros((m, n)))


def line_recurrence(ledger: ParameterLedger, axis: str, count: int) -> tuple[np.ndarray, np.ndarray]:
    """One-variable Jacobi coefficients ``(a_1..a_count, b_0..b_{count-1})`` along an edge.

    Along ``axis='y'`` (the line n = 0): ``b_j = s[0, 2j+1]`` and
    ``a_{j+1} = s[0, 2j+2]``; ``axis='x'`` is the transposed rule.
    """
    get = (lambda k: ledger.values[(0, k)]) if axis == "y" else (lambda k: ledger.values[(k, 0)])
    a = np.array([get(2 * j + 2) for j in range(count)])
    b = np.array([get(2 * j + 1) for j in range(count)])
    return a, b
