"""Independent references and convergence studies for solver validation.

The simply-supported square reference is a classical double sine
series evaluated to convergence; the clamped-square coefficient is
produced by this package's own overkill solve plus Richardson
extrapolation and stored as a golden file with provenance (it is never
asserted as truth without the regeneration path); the cantilever strip
is compared against beam theory, exact in the zero-Poisson limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import numpy as np

from .assembly import DofMap, assemble_line_load
from .errors import ConfigError
from .mesh import TriMesh6, build_crossed_patch_mesh, mesh_structure, refine_uniform
from .model import Material, StructureModel
from .solver import Solution, solve_structure
from .structures import rectangle_plate, square_plate

__all__ = [
    "navier_deflection",
    "clamped_square_reference",
    "compute_clamped_square_alpha",
    "cantilever_strip_reference",
    "BenchmarkResult",
    "convergence_study",
    "BENCHMARKS",
]


def navier_deflection(a: float, q: float, d_stiffness: float, terms: int = 99) -> float:
    """Center deflection of a simply supported square plate, side ``a``,
    uniform pressure ``q``, bending stiffness ``d_stiffness``.

    Double sine series over odd indices; ``terms`` odd terms are summed
    in each direction (99 gives ~1e-9 relative truncation error).
    """
    if terms < 25:
        raise ValueError("use at least 25 odd terms per direction")
    total = 0.0
    for m in range(1, 2 * terms, 2):
        sm = math.sin(0.5 * math.pi * m)
        for n in range(1, 2 * terms, 2):
            sn = math.sin(0.5 * math.pi * n)
            total += sm * sn / (m * n * (m * m + n * n) ** 2)
    return 16.0 * q * a**4 / (d_stiffness * math.pi**6) * total


# Material normalizations with unit bending stiffness (t = 1):
# D = E t^3 / (12 (1 - nu^2)) = 1  =>  E = 12 (1 - nu^2).
def _unit_stiffness_material(nu: float = 0.3) -> Material:
    return Material(youngs_modulus=12.0 * (1.0 - nu * nu), poisson_ratio=nu, thickness=1.0)


_ALPHA_FILE = "clamped_square_alpha.txt"


def _load_golden_alpha() -> float:
    text = resources.files("platefem").joinpath("data", _ALPHA_FILE).read_text()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            return float(line)
    raise ConfigError(f"golden file {_ALPHA_FILE} contains no value")


def clamped_square_reference(
    a: float, q: float, d_stiffness: float, alpha: Optional[float] = None
) -> float:
    """Center deflection alpha q a^4 / D of a clamped square plate.

    ``alpha`` defaults to the golden coefficient produced by
    :func:`compute_clamped_square_alpha` (Richardson-extrapolated
    overkill solve of this very discretization).
    """
    if alpha is None:
        alpha = _load_golden_alpha()
    return alpha * q * a**4 / d_stiffness


def compute_clamped_square_alpha(base_subdivisions: int = 8, levels: int = 3) -> float:
    """Regenerate the clamped-square coefficient from nested solves.

    Runs the unit-stiffness clamped plate on ``levels`` nested meshes
    (crossed family) and Richardson-extrapolates the center deflection.
    The overkill solves bypass the usual residual gate: a 1e-9 algebraic
    residual is irrelevant at the extrapolation's accuracy level.
    """
    import scipy.sparse.linalg as spla

    from .assembly import apply_constraints, build_system

    values = []
    model = square_plate(
        1.0, _unit_stiffness_material(), tags=("clamped",) * 4, load=(0.0, 0.0, 1.0)
    )
    mesh = build_crossed_patch_mesh(model.patches[0], base_subdivisions)
    for _ in range(levels):
        dm = DofMap.from_mesh(mesh)
        system = build_system(mesh, model.material, model.loads, model.penalty_beta0, dm)
        red = apply_constraints(system, dm)
        a = red.matrix.tocsc()
        lu = spla.splu(
            a, diag_pivot_thresh=0.0, permc_spec="MMD_AT_PLUS_A",
            options={"SymmetricMode": True},
        )
        x = lu.solve(red.rhs)
        for _ in range(4):
            x = x + lu.solve(red.rhs - a @ x)
        u = red.expand(x).reshape(-1, 3)
        center = int(np.argmin(np.linalg.norm(mesh.nodes - np.array([0.5, 0.5, 0.0]), axis=1)))
        values.append(float(u[center, 2]))
        mesh = refine_uniform(mesh)
    w = values
    if len(w) < 3:
        raise ValueError("need at least 3 levels for Richardson extrapolation")
    d1, d2 = w[-2] - w[-3], w[-1] - w[-2]
    rate = d1 / d2 if d2 != 0.0 else float("inf")
    if rate <= 1.0:
        return w[-1]
    return w[-1] + d2 / (rate - 1.0)


def cantilever_strip_reference(
    f_total: float, length: float, youngs_modulus: float, thickness: float, width: float
) -> float:
    """Beam-theory tip deflection F L^3 / (3 (E t^3 / 12) width), nu = 0."""
    d_bar = youngs_modulus * thickness**3 / 12.0
    return f_total * length**3 / (3.0 * d_bar * width)


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkResult:
    name: str
    quantity: str
    h_values: list
    values: list
    reference: float
    errors: list  # relative
    observed_order: float
    warning: Optional[str] = None

    def to_table(self, provenance: str = "") -> str:
        lines = [f"# platefem convergence study: {self.name} ({self.quantity})"]
        if provenance:
            lines.append(f"# {provenance}")
        lines.append(f"# reference value: {self.reference:.12e}")
        lines.append("# h value error order")
        prev = None
        for h, v, e in zip(self.h_values, self.values, self.errors):
            if prev is None or e == 0.0 or prev[1] == 0.0:
                order = "-"
            else:
                order = f"{math.log(prev[1] / e) / math.log(prev[0] / h):.3f}"
            lines.append(f"{h:.10e} {v:.12e} {e:.6e} {order}")
            prev = (h, e)
        lines.append(f"# observed order (least squares): {self.observed_order:.4f}")
        if self.warning:
            lines.append(f"# warning: {self.warning}")
        return "\n".join(lines) + "\n"


def _fit_order(hs, errors) -> tuple[float, Optional[str]]:
    hs = np.asarray(hs, float)
    errors = np.asarray(errors, float)
    warning = None
    if np.any(errors <= 1e-11):
        return float("nan"), "errors at round-off; order undefined"
    if np.any(np.diff(errors) > 0):
        warning = "non-monotone error sequence"
    slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    return float(slope), warning


def _center_deflection(sol: Solution) -> float:
    node = sol.node_nearest(np.array([0.5, 0.5, 0.0]))
    return float(sol.displacements[node, 2])


def _run_ss_square(meshes: int, base: int):
    model = square_plate(
        1.0,
        _unit_stiffness_material(),
        tags=("simply_supported",) * 4,
        load=(0.0, 0.0, 1.0),
    )
    reference = navier_deflection(1.0, 1.0, 1.0)
    return _deflection_study(model, meshes, base, reference, _center_deflection)


def _run_clamped_square(meshes: int, base: int):
    # gentler penalty than the package default: the clamped Nitsche terms
    # dominate the coarse-mesh error and 10 over-stiffens the rotation
    model = square_plate(
        1.0,
        _unit_stiffness_material(),
        tags=("clamped",) * 4,
        load=(0.0, 0.0, 1.0),
        beta0=4.0,
    )
    reference = clamped_square_reference(1.0, 1.0, 1.0)
    return _deflection_study(model, meshes, base, reference, _center_deflection)


def _deflection_study(model, meshes, base, reference, extract) -> tuple:
    mesh = build_crossed_patch_mesh(model.patches[0], base)
    hs, values = [], []
    for _ in range(meshes):
        sol = solve_structure(model, mesh)
        hs.append(mesh.mesh_size_h)
        values.append(extract(sol))
        mesh = refine_uniform(mesh)
    errors = [abs(v - reference) / abs(reference) for v in values]
    return hs, values, errors, reference


# Width 0.5 keeps the structured cells at a 2:1 aspect from the coarsest
# mesh on; the beam reference is width-independent once normalized.
_CANTILEVER = {"length": 1.0, "width": 0.5, "f_total": 1.0}
# Subdivision bases are chosen so every study mesh meets the solver's
# algebraic-residual contract in double precision (the relative residual
# floor grows like h^-4).



def _run_cantilever(meshes: int, base: int):
    length, width = _CANTILEVER["length"], _CANTILEVER["width"]
    f_total = _CANTILEVER["f_total"]
    mat = Material(youngs_modulus=12.0, poisson_ratio=0.0, thickness=1.0)
    model = rectangle_plate(
        length, width, mat, tags=("free", "free", "free", "clamped")
    )
    reference = cantilever_strip_reference(f_total, length, mat.youngs_modulus, mat.thickness, width)
    density = np.array([0.0, 0.0, f_total / (width * mat.thickness)])
    tol = 1e-9

    mesh = mesh_structure(model, base)
    hs, values = [], []
    for _ in range(meshes):
        dm = DofMap.from_mesh(mesh)
        tip_load = assemble_line_load(
            mesh, lambda x: abs(x[0] - length) < tol, density, dm
        )
        sol = solve_structure(model, mesh, dofmap=dm, extra_rhs=tip_load)
        hs.append(mesh.mesh_size_h)
        tip = sol.node_nearest(np.array([length, 0.5 * width, 0.0]))
        values.append(float(sol.displacements[tip, 2]))
        mesh = refine_uniform(mesh)
    errors = [abs(v - reference) / abs(reference) for v in values]
    return hs, values, errors, reference


def _run_membrane_patch(meshes: int, base: int):
    """Linear in-plane field reproduced to round-off on every mesh."""
    mat = _unit_stiffness_material()
    model = square_plate(1.0, mat, tags=("clamped",) * 4)

    def exact(x):
        return np.array([x[0], 0.0, 0.0])

    mesh = mesh_structure(model, base)
    hs, values = [], []
    for _ in range(meshes):
        dm = DofMap.from_mesh(mesh, prescribe=exact)
        sol = solve_structure(model, mesh, dofmap=dm)
        target = np.array([exact(x) for x in mesh.nodes])
        dev = np.abs(sol.displacements - target).max()
        hs.append(mesh.mesh_size_h)
        values.append(float(dev))
        mesh = refine_uniform(mesh)
    # the "value" is already the absolute deviation; field scale is 1
    errors = list(values)
    return hs, values, errors, 0.0


BENCHMARKS: dict[str, Callable] = {
    "ss_square": _run_ss_square,
    "clamped_square": _run_clamped_square,
    "cantilever_strip": _run_cantilever,
    "membrane_patch": _run_membrane_patch,
}

_DEFAULT_BASE = {
    "ss_square": 2,
    "clamped_square": 2,
    "cantilever_strip": 1,
    "membrane_patch": 2,
}


def convergence_study(
    benchmark: str, meshes: int = 4, base_subdivisions: Optional[int] = None
) -> BenchmarkResult:
    """Run ``meshes`` nested uniform refinements of a named benchmark."""
    if benchmark not in BENCHMARKS:
        raise ConfigError(
            f"unknown benchmark {benchmark!r}; options: {', '.join(sorted(BENCHMARKS))}"
        )
    if meshes < 3:
        raise ValueError("a convergence study needs at least 3 meshes")
    base = base_subdivisions or _DEFAULT_BASE[benchmark]
    hs, values, errors, reference = BENCHMARKS[benchmark](meshes, base)
    order, warning = _fit_order(hs, errors)
    quantity = {
        "ss_square": "center deflection",
        "clamped_square": "center deflection",
        "cantilever_strip": "tip deflection",
        "membrane_patch": "max nodal deviation",
    }[benchmark]
    return BenchmarkResult(
        name=benchmark,
        quantity=quantity,
        h_values=hs,
        values=values,
        reference=reference,
        errors=errors,
        observed_order=order,
        warning=warning,
    )
