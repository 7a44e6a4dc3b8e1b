"""Closed-form spectral and linear-stability analysis of torus plane waves.

Everything here is per-Fourier-mode arithmetic: the Hessian eigenvalues of a
constant two-component wave, the coercivity threshold on the first mode, and
the eigenvalues of the time linearization (exact when k = 0 or when
alpha zeta1^2 = gamma zeta2^2; otherwise quartic roots are reported without
a stability verdict).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

__all__ = [
    "ModeTable",
    "c_plusminus",
    "hessian_mode_eigs",
    "coercivity_condition",
    "linearization_eigs",
    "mode_table",
]


def _zeta_pair(zeta) -> tuple:
    z1, z2 = float(zeta[0]), float(zeta[1])
    if z1 == 0.0 or z2 == 0.0:
        raise ValueError("plane-wave amplitudes must be nonzero")
    return z1, z2


def c_plusminus(params, zeta) -> tuple:
    """The two constants governing the n = 0 Hessian block."""
    z1, z2 = _zeta_pair(zeta)
    trace = params.alpha * z1**2 + params.gamma * z2**2
    disc = trace**2 - 4.0 * z1**2 * z2**2 * (params.alpha * params.gamma - params.delta**2)
    # disc = (alpha z1^2 - gamma z2^2)^2 + 4 z1^2 z2^2 delta^2 >= 0 always.
    root = np.sqrt(max(disc, 0.0))
    return (-trace + root, -trace - root)


def _n_L(n: int, length: float) -> float:
    return 2.0 * np.pi * n / length


def hessian_mode_eigs(n: int, params, zeta, length: float) -> np.ndarray:
    """The four Hessian eigenvalues at Fourier mode n."""
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    cp, cm = c_plusminus(params, zeta)
    b, k = params.beta, params.k
    nl2 = _n_L(n, length) ** 2
    out = []
    for c in (cp, cm):
        root = np.sqrt(c**2 + 16.0 * b**2 * k**2 * nl2)
        out.append(b * nl2 + 0.5 * (c + root))
        out.append(b * nl2 + 0.5 * (c - root))
    return np.array(out)   # order: lam+_{+,n}, lam+_{-,n}, lam-_{+,n}, lam-_{-,n}


def coercivity_condition(params, zeta, length: float) -> tuple:
    """First-mode positivity margin beta (2 pi/L)^2 + C_- - 4 beta k^2."""
    if abs(params.alpha * params.gamma - params.delta**2) < 1e-14:
        raise ValueError("condition undefined when alpha*gamma = delta^2")
    _, cm = c_plusminus(params, zeta)
    margin = params.beta * (2.0 * np.pi / length) ** 2 + cm - 4.0 * params.beta * params.k**2
    return margin > 0.0, float(margin)


def _quartic_coeffs(n: int, params, zeta, length: float) -> np.ndarray:
    z1, z2 = _zeta_pair(zeta)
    b, k = params.beta, params.k
    nl = _n_L(n, length)
    bn = b * nl**2
    tr = params.alpha * z1**2 + params.gamma * z2**2
    det = params.alpha * params.gamma - params.delta**2
    c4 = 1.0
    c3 = 0.0
    c2 = -2.0 * bn * (-bn + tr - 4.0 * b * k**2)
    c1 = 8.0j * bn * b * k * nl * (params.alpha * z1**2 - params.gamma * z2**2)
    c0 = (
        bn**3 * (bn - 2.0 * tr)
        + 4.0 * bn**2 * z1**2 * z2**2 * det
        + 8.0 * bn * (b * k * nl) ** 2 * (-bn + tr + 2.0 * b * k**2)
    )
    return np.array([c4, c3, c2, c1, c0], dtype=complex)


def linearization_eigs(n: int, params, zeta, length: float) -> Union[tuple, np.ndarray]:
    """Eigenvalue data of the time linearization at mode n.

    Returns the pair (lambda^2_+, lambda^2_-) when the closed form applies
    (k = 0, or alpha zeta1^2 = gamma zeta2^2); otherwise the four complex
    roots of the characteristic quartic.
    """
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    z1, z2 = _zeta_pair(zeta)
    b, k = params.beta, params.k
    nl2 = _n_L(n, length) ** 2
    tr = params.alpha * z1**2 + params.gamma * z2**2
    diff = params.alpha * z1**2 - params.gamma * z2**2
    if k == 0.0:
        root = np.sqrt(diff**2 + 4.0 * z1**2 * z2**2 * params.delta**2)
        return (b * nl2 * (-b * nl2 + tr + root), b * nl2 * (-b * nl2 + tr - root))
    if abs(diff) <= 1e-12 * max(abs(tr), 1.0):
        inside = 4.0 * z1**2 * z2**2 * params.delta**2 + 16.0 * b * k**2 * (b * nl2 - tr)
        root = np.emath.sqrt(inside)
        base = -b * nl2 + tr - 4.0 * b * k**2
        return (
            complex(b * nl2 * (base + root)),
            complex(b * nl2 * (base - root)),
        )
    return np.roots(_quartic_coeffs(n, params, zeta, length))


@dataclass(frozen=True)
class ModeTable:
    rows: List[dict]
    c_plus: float
    c_minus: float
    coercive: bool
    coercivity_margin: float
    n_neg_total: int
    linearly_stable: Union[bool, str]
    max_growth_rate: float

    def to_json(self) -> str:
        doc = {
            "c_plus": self.c_plus,
            "c_minus": self.c_minus,
            "coercive": self.coercive,
            "coercivity_margin": self.coercivity_margin,
            "n_neg_total": self.n_neg_total,
            "linearly_stable": self.linearly_stable,
            "max_growth_rate": self.max_growth_rate,
            "rows": self.rows,
        }
        return json.dumps(doc, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = [
            "n", "lam_plus_plus", "lam_plus_minus", "lam_minus_plus",
            "lam_minus_minus", "lin_sq_plus", "lin_sq_minus",
        ]
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        for row in self.rows:
            writer.writerow({f: row.get(f, "") for f in fields})
        return buf.getvalue()


def mode_table(params, zeta, length: float, n_max: int = 8,
               zero_tol: Optional[float] = None) -> ModeTable:
    """Tabulate per-mode spectra and render the stability verdicts."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    cp, cm = c_plusminus(params, zeta)
    coercive_flag, margin = coercivity_condition(params, zeta, length)
    z1, z2 = _zeta_pair(zeta)
    closed_lin = params.k == 0.0 or abs(
        params.alpha * z1**2 - params.gamma * z2**2
    ) <= 1e-12 * max(abs(params.alpha * z1**2), 1.0)

    rows = []
    n_neg = 0
    extra_zeros = 0
    max_growth = 0.0
    lin_ok = True
    for n in range(n_max + 1):
        eigs = hessian_mode_eigs(n, params, zeta, length)
        scale = max(abs(cp), abs(cm), params.beta * _n_L(max(n, 1), length) ** 2)
        tol = zero_tol if zero_tol is not None else 1e-12 * scale
        mult = 1 if n == 0 else 2   # modes +-n both contribute for n >= 1
        n_neg += mult * int(np.sum(eigs < -tol))
        zeros_here = int(np.sum(np.abs(eigs) <= tol))
        if n == 0:
            zeros_here -= 2          # the two exact phase-kernel directions
        extra_zeros += mult * max(zeros_here, 0)
        row = {
            "n": n,
            "lam_plus_plus": eigs[0],
            "lam_plus_minus": eigs[1],
            "lam_minus_plus": eigs[2],
            "lam_minus_minus": eigs[3],
        }
        lin = linearization_eigs(n, params, zeta, length)
        if closed_lin:
            lsq_p, lsq_m = lin
            row["lin_sq_plus"] = float(np.real(lsq_p))
            row["lin_sq_minus"] = float(np.real(lsq_m))
            lin_tol = 1e-12 * max(params.beta * _n_L(max(n, 1), length) ** 2, 1.0)
            for lsq in (np.real(lsq_p), np.real(lsq_m)):
                if lsq > lin_tol:
                    lin_ok = False
                    max_growth = max(max_growth, float(np.sqrt(lsq)))
        else:
            growth = float(np.max(np.real(lin)))
            row["quartic_roots_re"] = np.real(lin).tolist()
            row["quartic_roots_im"] = np.imag(lin).tolist()
            max_growth = max(max_growth, max(growth, 0.0))
        rows.append(row)

    # Coercive iff the negative count matches the slope index with no stray
    # kernel directions beyond the two phases.
    from .slope import signature_of

    det = params.alpha * params.gamma - params.delta**2
    d2w = (length / (2.0 * det)) * np.array(
        [[params.gamma, -params.delta], [-params.delta, params.alpha]]
    )
    p_w = signature_of(d2w)[0]
    coercive = coercive_flag and n_neg == p_w and extra_zeros == 0
    if closed_lin:
        linearly_stable: Union[bool, str] = lin_ok
    else:
        linearly_stable = "numerical only"
    return ModeTable(
        rows=rows,
        c_plus=float(cp),
        c_minus=float(cm),
        coercive=bool(coercive),
        coercivity_margin=margin,
        n_neg_total=int(n_neg),
        linearly_stable=linearly_stable,
        max_growth_rate=float(max_growth),
    )
