"""Relative-equilibrium profiles and continuable families.

Solitons on the truncated line (explicit for the cubic case, Newton-solved
for general exponents), symmetric coupled solitons, torus plane waves, and
xi-parametrized families that re-solve on demand for finite-difference
derivatives of the conserved quantities.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .core import (
    Coupled,
    Field,
    Grid,
    SingleNLS,
    boundary_decay_check,
    invariants_of,
)
from .spectral import (
    even_expansion,
    even_indices,
    fold_operator,
    second_derivative_matrix,
)

__all__ = [
    "Profile",
    "Family",
    "SolverError",
    "soliton_explicit",
    "soliton_solve",
    "coupled_soliton",
    "plane_wave",
    "boost",
    "make_family",
    "continue_family",
]


class SolverError(RuntimeError):
    """Newton or continuation failure."""


@dataclass(frozen=True)
class Profile:
    """A relative-equilibrium candidate with its group parameters xi."""

    field: Field
    xi: np.ndarray
    model: object            # SingleNLS or Coupled
    zeta: Optional[tuple] = None   # amplitudes for coupled/torus profiles

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def is_torus(self) -> bool:
        return self.grid.kind == "periodic"

    @property
    def c(self) -> float:
        """Boost velocity (last xi component on line grids)."""
        return 0.0 if self.is_torus else float(self.xi[-1])

    @property
    def omega(self):
        """Frequency parameter(s) recovered from xi."""
        if self.is_torus:
            return None
        shift = self.c**2 / 4.0
        if self.model.model == "single_nls":
            return float(self.xi[0] + shift)
        return (float(self.xi[0] + shift), float(self.xi[1] + shift))

    def invariants(self) -> dict:
        return invariants_of(self.field, self.model)

    def to_dict(self) -> dict:
        model = self.model
        if model.model == "single_nls":
            mdl = {"type": "single_nls", "p": model.p, "d": model.d}
        else:
            mdl = {
                "type": "coupled",
                "alpha": model.alpha,
                "gamma": model.gamma,
                "delta": model.delta,
                "beta": model.beta,
                "k": model.k,
            }
        vals = []
        for comp in self.field.values:
            interleaved = np.empty(2 * comp.size)
            interleaved[0::2] = comp.real
            interleaved[1::2] = comp.imag
            vals.append(interleaved.tolist())
        return {
            "model": mdl,
            "xi": self.xi.tolist(),
            "grid": {"kind": self.grid.kind, "extent": self.grid.extent, "n": self.grid.n},
            "values": vals,
        }

    @staticmethod
    def from_dict(doc: dict) -> "Profile":
        from .core import make_grid

        g = make_grid(doc["grid"]["kind"], doc["grid"]["extent"], doc["grid"]["n"])
        mdl = doc["model"]
        if mdl["type"] == "single_nls":
            model = SingleNLS(p=mdl["p"], d=mdl.get("d", 1))
        else:
            model = Coupled(
                alpha=mdl["alpha"],
                gamma=mdl["gamma"],
                delta=mdl["delta"],
                beta=mdl.get("beta", 1.0),
                k=mdl.get("k", 0.0),
            )
        comps = []
        for interleaved in doc["values"]:
            arr = np.asarray(interleaved)
            comps.append(arr[0::2] + 1j * arr[1::2])
        return Profile(Field(np.array(comps), g), np.asarray(doc["xi"]), model)


def closed_soliton(omega: float, p: float, x: np.ndarray) -> np.ndarray:
    """d = 1 closed-form positive bound state for general exponent p."""
    amp = ((p + 1.0) * abs(omega) / 2.0) ** (1.0 / (p - 1.0))
    width = (p - 1.0) * np.sqrt(abs(omega)) / 2.0
    return amp * np.cosh(width * x) ** (-2.0 / (p - 1.0))


def soliton_explicit(omega: float, grid: Grid) -> Profile:
    """Cubic (p = 3) soliton sqrt(-2 omega) sech(sqrt(-omega) x)."""
    if omega >= 0:
        raise ValueError("omega must be negative")
    if grid.kind != "line":
        raise ValueError("solitons live on a line grid")
    u = np.sqrt(-2.0 * omega) / np.cosh(np.sqrt(-omega) * grid.nodes)
    f = Field(u[None, :].astype(complex), grid)
    boundary_decay_check(f)
    return Profile(f, np.array([omega, 0.0]), SingleNLS(p=3.0))


def _newton_even_scalar(u0: np.ndarray, omega: float, p: float, grid: Grid,
                        tol: float, max_iter: int) -> np.ndarray:
    """Newton iteration for D2 u + u^p + omega u = 0 on the even subspace."""
    d2 = second_derivative_matrix(grid)
    n = grid.n
    s = even_expansion(n)
    idx = even_indices(n)
    u = 0.5 * (u0 + u0[(n - np.arange(n)) % n])   # symmetrize the seed
    for _ in range(max_iter):
        res = d2 @ u + np.abs(u) ** (p - 1.0) * u + omega * u
        if np.max(np.abs(res)) < tol:
            return u
        jac = d2 + np.diag(p * np.abs(u) ** (p - 1.0) + omega)
        try:
            du_half = np.linalg.solve(fold_operator(jac), -res[idx])
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Newton system") from exc
        u = u + s @ du_half
    raise SolverError(f"Newton did not converge in {max_iter} iterations")


def soliton_solve(omega: float, p: float, grid: Grid,
                  tol: float = 1e-11, max_iter: int = 50) -> Profile:
    """Positive even bound state of Delta u + |u|^(p-1) u = -omega u."""
    if omega >= 0:
        raise ValueError("omega must be negative")
    if p <= 1:
        raise ValueError("p must exceed 1")
    if grid.kind != "line":
        raise ValueError("solitons live on a line grid")
    u = _newton_even_scalar(closed_soliton(omega, p, grid.nodes), omega, p,
                            grid, tol, max_iter)
    if np.min(u) < -1e-8 * np.max(np.abs(u)):
        raise SolverError("converged to a sign-changing profile")
    f = Field(u[None, :].astype(complex), grid)
    boundary_decay_check(f)
    return Profile(f, np.array([omega, 0.0]), SingleNLS(p=p, d=1))


def coupled_amplitudes(params: Coupled) -> tuple:
    """Solve alpha z1 + delta z2 = 1, delta z1 + gamma z2 = 1 for z_i = zeta_i^2."""
    det = params.alpha * params.gamma - params.delta**2
    if abs(det) < 1e-14:
        raise ValueError("degenerate couplings: alpha*gamma equals delta^2")
    z1 = (params.gamma - params.delta) / det
    z2 = (params.alpha - params.delta) / det
    if z1 <= 0 or z2 <= 0:
        raise ValueError(
            "inadmissible couplings: delta must lie outside [min(alpha,gamma), max(alpha,gamma)]"
        )
    return np.sqrt(z1), np.sqrt(z2)


def coupled_soliton(omega_star: float, params: Coupled, grid: Grid) -> Profile:
    """Symmetric two-component soliton zeta * u_omega with cubic scalar factor."""
    if omega_star >= 0:
        raise ValueError("omega_star must be negative")
    if grid.kind != "line":
        raise ValueError("coupled solitons live on a line grid")
    z1, z2 = coupled_amplitudes(params)
    scalar = soliton_explicit(omega_star, grid).field.values[0]
    vals = np.array([z1 * scalar, z2 * scalar])
    f = Field(vals, grid)
    boundary_decay_check(f)
    return Profile(f, np.array([omega_star, omega_star, 0.0]), params, zeta=(z1, z2))


def plane_wave(zeta1: float, zeta2: float, params: Coupled, grid: Grid) -> Profile:
    """Constant two-component plane wave with xi from the dispersion relation."""
    if zeta1 == 0 or zeta2 == 0:
        raise ValueError("plane-wave amplitudes must be nonzero")
    if grid.kind != "periodic":
        raise ValueError("plane waves live on a periodic grid")
    params.validate_torus_offset(grid)
    bk2 = params.beta * params.k**2
    xi1 = bk2 - (params.alpha * zeta1**2 + params.delta * zeta2**2)
    xi2 = bk2 - (params.delta * zeta1**2 + params.gamma * zeta2**2)
    ones = np.ones(grid.n, dtype=complex)
    f = Field(np.array([zeta1 * ones, zeta2 * ones]), grid)
    return Profile(f, np.array([xi1, xi2]), params, zeta=(zeta1, zeta2))


def boost(prof: Profile, c: float) -> Profile:
    """Multiply by exp(i c x / 2) and shift the group parameters accordingly."""
    if prof.is_torus:
        if c == 0.0:
            return prof
        raise ValueError("boost is incompatible with the fixed-offset torus model")
    if c == 0.0:
        return prof
    phase = np.exp(0.5j * c * prof.grid.nodes)
    vals = prof.field.values * phase
    c_tot = prof.c + c
    om = prof.omega
    if prof.model.model == "single_nls":
        xi = np.array([om - c_tot**2 / 4.0, c_tot])
    else:
        xi = np.array([om[0] - c_tot**2 / 4.0, om[1] - c_tot**2 / 4.0, c_tot])
    return Profile(Field(vals, prof.grid), xi, prof.model, zeta=prof.zeta)


# ---------------------------------------------------------------------------
# Families

@dataclass
class Family:
    """A re-solvable map xi -> Profile with memoized solves."""

    center_xi: np.ndarray
    solver: Callable[[np.ndarray], Profile]
    fd_step: float
    model: object
    _memo: dict = dc_field(default_factory=dict, repr=False)
    _lock: threading.Lock = dc_field(default_factory=threading.Lock, repr=False)

    def profile(self, xi) -> Profile:
        key = tuple(np.round(np.asarray(xi, dtype=float), 12))
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return hit
        prof = self.solver(np.asarray(xi, dtype=float))
        with self._lock:
            self._memo[key] = prof
        return prof

    def fhat(self, xi) -> np.ndarray:
        return self.profile(xi).invariants()["F"]


def default_fd_step(xi) -> float:
    return 1e-4 * (1.0 + float(np.linalg.norm(xi)))


def _single_family_solver(p: float, grid: Grid) -> Callable:
    def solve(xi: np.ndarray) -> Profile:
        omega = xi[0] + np.sum(xi[1:] ** 2) / 4.0
        if omega >= 0:
            raise SolverError("xi outside the soliton region (omega >= 0)")
        prof = soliton_solve(omega, p, grid)
        return boost(prof, float(xi[1]))

    return solve


def _coupled_newton(phi0: np.ndarray, om1: float, om2: float, params: Coupled,
                    grid: Grid, tol: float = 1e-11, max_iter: int = 60) -> np.ndarray:
    """Newton solve of the real even coupled stationary system."""
    d2 = second_derivative_matrix(grid)
    n = grid.n
    s = even_expansion(n)
    idx = even_indices(n)
    a, g, dlt = params.alpha, params.gamma, params.delta
    phi = phi0.copy()
    mirror = (n - np.arange(n)) % n
    phi = 0.5 * (phi + phi[:, mirror])
    for _ in range(max_iter):
        p1, p2 = phi
        r1 = d2 @ p1 + om1 * p1 + (a * p1**2 + dlt * p2**2) * p1
        r2 = d2 @ p2 + om2 * p2 + (dlt * p1**2 + g * p2**2) * p2
        res = np.concatenate([r1[idx], r2[idx]])
        if np.max(np.abs(res)) < tol:
            return phi
        j11 = d2 + np.diag(om1 + 3.0 * a * p1**2 + dlt * p2**2)
        j22 = d2 + np.diag(om2 + 3.0 * g * p2**2 + dlt * p1**2)
        j12 = np.diag(2.0 * dlt * p1 * p2)
        top = np.hstack([fold_operator(j11), fold_operator(j12)])
        bot = np.hstack([fold_operator(j12), fold_operator(j22)])
        try:
            step = np.linalg.solve(np.vstack([top, bot]), -res)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular coupled Newton system") from exc
        half = len(idx)
        phi = phi + np.array([s @ step[:half], s @ step[half:]])
    raise SolverError(f"coupled Newton did not converge in {max_iter} iterations")


def _coupled_family_solver(params: Coupled, grid: Grid, omega_star: float) -> Callable:
    base = coupled_soliton(omega_star, params, grid)
    base_phi = np.real(base.field.values)

    def solve(xi: np.ndarray) -> Profile:
        shift = xi[2] ** 2 / 4.0
        om1, om2 = xi[0] + shift, xi[1] + shift
        if om1 >= 0 or om2 >= 0:
            raise SolverError("xi outside the coupled soliton region")
        phi = _continue_coupled(base_phi, (omega_star, omega_star), (om1, om2),
                                params, grid)
        f = Field(phi.astype(complex), grid)
        boundary_decay_check(f)
        prof = Profile(f, np.array([om1, om2, 0.0]), params)
        return boost(prof, float(xi[2]))

    return solve


def _continue_coupled(phi0, om_from, om_to, params, grid, max_halvings: int = 6):
    """Damped straight-line continuation in (omega1, omega2)."""
    start = np.asarray(om_from, dtype=float)
    target = np.asarray(om_to, dtype=float)
    phi = phi0.copy()
    t, step = 0.0, 1.0
    halvings = 0
    while t < 1.0 - 1e-12:
        t_next = min(1.0, t + step)
        om = start + t_next * (target - start)
        try:
            phi_next = _coupled_newton(phi, om[0], om[1], params, grid)
        except SolverError:
            halvings += 1
            if halvings > max_halvings:
                raise SolverError("coupled continuation failed after step halving")
            step *= 0.5
            continue
        phi, t = phi_next, t_next
    return phi


def _torus_family_solver(params: Coupled, grid: Grid) -> Callable:
    def solve(xi: np.ndarray) -> Profile:
        bk2 = params.beta * params.k**2
        mat = np.array([[params.alpha, params.delta], [params.delta, params.gamma]])
        try:
            z = np.linalg.solve(mat, np.array([bk2 - xi[0], bk2 - xi[1]]))
        except np.linalg.LinAlgError as exc:
            raise SolverError("dispersion relation not invertible") from exc
        if z[0] <= 0 or z[1] <= 0:
            raise SolverError("xi outside the plane-wave region")
        return plane_wave(np.sqrt(z[0]), np.sqrt(z[1]), params, grid)

    return solve


def make_family(prof: Profile, fd_step: Optional[float] = None) -> Family:
    """Build the re-solvable family through an existing equilibrium."""
    step = fd_step if fd_step is not None else default_fd_step(prof.xi)
    if prof.model.model == "single_nls":
        solver = _single_family_solver(prof.model.p, prof.grid)
    elif prof.is_torus:
        solver = _torus_family_solver(prof.model, prof.grid)
    else:
        om = prof.omega
        omega_star = 0.5 * (om[0] + om[1])
        solver = _coupled_family_solver(prof.model, prof.grid, omega_star)
    fam = Family(np.array(prof.xi), solver, step, prof.model)
    fam._memo[tuple(np.round(prof.xi, 12))] = prof
    return fam


def continue_family(prof: Profile, target_xi, steps: int = 10) -> Family:
    """Continue an equilibrium to target_xi and return the family there.

    The continuation path is a straight line in xi walked in `steps`
    increments; each increment is a projected Newton solve seeded from the
    previous iterate, with step halving on failure.
    """
    target = np.asarray(target_xi, dtype=float)
    if target.shape != prof.xi.shape:
        raise ValueError("target xi has the wrong dimension")
    fam = make_family(prof)
    if np.allclose(target, prof.xi):
        return fam
    path = np.linspace(0.0, 1.0, steps + 1)[1:]
    last = prof
    for t in path:
        xi = prof.xi + t * (target - prof.xi)
        last = fam.profile(xi)
    out = Family(target, fam.solver, fam.fd_step, fam.model,
                 _memo=fam._memo, _lock=fam._lock)
    out._memo[tuple(np.round(target, 12))] = last
    return out
