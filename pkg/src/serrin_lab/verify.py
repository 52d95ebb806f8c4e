"""End-to-end experiments: forward check, contrapositive check, symmetry sweep.

Reports are plain dictionaries ready for ``json.dump``; they contain no
timestamps or timings so that a rerun with the same configuration yields the
same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from serrin_lab._validation import check_real
from serrin_lab.exceptions import (
    ConvergenceError,
    FluxExtractionError,
    ValidationError,
)
from serrin_lab.geometry import (
    Circle,
    Ellipse,
    Polygon,
    is_centered_disk,
    symmetry_planes,
)
from serrin_lab.nonlinearity import Nonlinearity
from serrin_lab.radial import RadialSolution
from serrin_lab.solver import (
    boundary_flux,
    constancy_defect,
    make_problem,
    relative_error_vs,
    solve,
)

SCHEMA = "serrin-lab/report/v1"
FORWARD_TOL = 0.05
SEPARATION = 3.0

CONSISTENT = "ConsistentWithTheorem"
INCONSISTENT = "Inconsistent"
INCONCLUSIVE = "Inconclusive"


def _num(x):
    """JSON-safe float: non-finite values become ``None``."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class Rung:
    h: float
    defect: float | None = None
    mean_flux: float | None = None
    l_inf_error_vs_oracle: float | None = None
    iterations: int | None = None
    converged: bool = False
    residual_norm: float | None = None
    range_ok: bool | None = None
    error: str | None = None
    baseline: "Rung | None" = None

    def to_dict(self):
        out = {
            "h": _num(self.h),
            "defect": _num(self.defect),
            "mean_flux": _num(self.mean_flux),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_norm": _num(self.residual_norm),
            "max_principle": self.range_ok,
        }
        if self.l_inf_error_vs_oracle is not None:
            out["l_inf_error_vs_oracle"] = _num(self.l_inf_error_vs_oracle)
        if self.error is not None:
            out["error"] = self.error
        if self.baseline is not None:
            out["baseline"] = self.baseline.to_dict()
        return out

    @property
    def ok(self):
        return self.error is None and self.converged and self.defect is not None


@dataclass
class ExperimentReport:
    experiment: str
    scenario: str
    parameters: dict
    resolution_ladder: list = field(default_factory=list)
    geometry_summary: dict | None = None
    verdict: str = INCONCLUSIVE
    reason: str = ""

    @property
    def nonconverged(self):
        rungs = list(self.resolution_ladder)
        rungs += [r.baseline for r in self.resolution_ladder if r.baseline is not None]
        return any(not r.converged or r.error is not None for r in rungs)

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "scenario": self.scenario,
            "parameters": self.parameters,
            "resolution_ladder": [r.to_dict() for r in self.resolution_ladder],
            "geometry_summary": self.geometry_summary,
            "verdict": self.verdict,
            "reason": self.reason,
        }


def _scenario(domain):
    if is_centered_disk(domain):
        return "CenteredBall"
    if isinstance(domain, Circle):
        return "OffCenterBall"
    if isinstance(domain, Ellipse):
        return "Ellipse"
    if isinstance(domain, Polygon):
        return "Polygon"
    return type(domain).__name__


def _run_rung(problem, h, profile=None, solver_options=None):
    rung = Rung(h=h)
    try:
        fld = solve(problem, h, **(solver_options or {}))
    except ConvergenceError as exc:
        rung.error = f"linear solve failed: {exc}"
        return rung
    rung.iterations = fld.iterations
    rung.converged = fld.converged
    rung.residual_norm = fld.residual_norm
    rung.range_ok = fld.range_check()
    try:
        cd = constancy_defect(boundary_flux(fld))
    except FluxExtractionError as exc:
        rung.error = str(exc)
        return rung
    rung.mean_flux = cd.mean_flux
    rung.defect = cd.defect if cd.defined else None
    if profile is not None:
        rung.l_inf_error_vs_oracle = relative_error_vs(fld, profile)
    return rung


def _ladder(h_ladder):
    if not h_ladder:
        raise ValidationError("h_ladder must contain at least one step size")
    hs = [check_real(h, "h", gt=0.0) for h in h_ladder]
    # coarse to fine
    return sorted(set(hs), reverse=True)


def summarize_sweep(entries):
    sym = [k for k, e in enumerate(entries) if e.is_symmetric]
    return {
        "n_directions": len(entries),
        "all_symmetric": len(sym) == len(entries),
        "symmetric_indices": sym,
        "symmetric_directions": [[_num(entries[k].xi.x), _num(entries[k].xi.y)] for k in sym],
        "max_sum": _num(max(e.sum for e in entries)) if entries else None,
        "entries": [
            {
                "xi": [_num(e.xi.x), _num(e.xi.y)],
                "t_plus": _num(e.t_plus),
                "t_minus": _num(e.t_minus),
                "sum": _num(e.sum),
                "symmetric": e.is_symmetric,
                "via": e.via,
                "case": e.reflection.case,
            }
            for e in entries
        ],
    }


def run_symmetry_sweep(domain, n_directions=64, workers=1):
    """Moving-plane sweep summary; a circle is symmetric in every direction."""
    return summarize_sweep(symmetry_planes(domain, n_directions, workers=workers))


def run_forward(
    R,
    c,
    nl,
    h_ladder,
    delta=None,
    forward_tol=FORWARD_TOL,
    n_directions=32,
    solver_options=None,
    workers=1,
):
    """Centred ball with oracle inner data: errors must fall and the flux be constant."""
    R = check_real(R, "R", gt=0.0)
    c = check_real(c, "c", gt=0.0)
    if not isinstance(nl, Nonlinearity):
        raise ValidationError("nl must be a Nonlinearity")
    hs = _ladder(h_ladder)
    domain = Circle((0.0, 0.0), R)
    problem = make_problem(domain, nl, delta=delta, c=c)
    oracle = RadialSolution(nl, 2, R, c)
    report = ExperimentReport(
        experiment="forward",
        scenario="CenteredBall",
        parameters={
            "R": R,
            "c": c,
            "nl": nl.to_config(),
            "h_ladder": hs,
            "delta": problem.delta,
            "inner_value": problem.inner_value,
            "epsilon": problem.nl_reg.epsilon,
            "forward_tol": forward_tol,
        },
    )
    report.resolution_ladder = [_run_rung(problem, h, oracle, solver_options) for h in hs]
    if n_directions:
        report.geometry_summary = run_symmetry_sweep(domain, n_directions, workers)

    rungs = report.resolution_ladder
    if report.nonconverged or not all(r.ok for r in rungs):
        report.verdict, report.reason = INCONCLUSIVE, "a solve did not converge"
    elif len(rungs) < 2:
        report.verdict, report.reason = INCONCLUSIVE, "a single resolution shows no trend"
    else:
        errors = [r.l_inf_error_vs_oracle for r in rungs]
        defects = [r.defect for r in rungs]
        decreasing = all(b < a for a, b in zip(errors, errors[1:]))
        monotone_tail = defects[-1] <= defects[-2]
        if decreasing and monotone_tail and defects[-1] <= forward_tol:
            report.verdict, report.reason = CONSISTENT, "errors decrease and the flux is constant"
        elif defects[-1] > forward_tol and defects[-2] > forward_tol and not monotone_tail:
            report.verdict, report.reason = (
                INCONSISTENT,
                "flux defect exceeds the tolerance and grows at the finest resolutions",
            )
        else:
            report.verdict, report.reason = INCONCLUSIVE, "refinement trend is not clean"
    return report


def run_contrapositive(
    domain,
    nl,
    h_ladder,
    c=1.0,
    delta=None,
    separation=SEPARATION,
    n_directions=32,
    solver_options=None,
    workers=1,
):
    """Non-ball domain against a matched centred-ball baseline at every ``h``."""
    if is_centered_disk(domain):
        raise ValidationError("run_contrapositive needs a domain that is not a circle centred at O")
    if not isinstance(nl, Nonlinearity):
        raise ValidationError("nl must be a Nonlinearity")
    hs = _ladder(h_ladder)
    separation = check_real(separation, "separation", gt=1.0)
    R = domain.distance_to_origin_boundary()
    problem = make_problem(domain, nl, delta=delta, c=c)
    baseline = make_problem(Circle((0.0, 0.0), R), nl, delta=problem.delta, c=c)
    report = ExperimentReport(
        experiment="contrapositive",
        scenario=_scenario(domain),
        parameters={
            "domain": domain.to_config(),
            "nl": nl.to_config(),
            "c": float(c),
            "h_ladder": hs,
            "delta": problem.delta,
            "inner_value": problem.inner_value,
            "epsilon": problem.nl_reg.epsilon,
            "baseline_radius": R,
            "separation": separation,
        },
    )
    for h in hs:
        rung = _run_rung(problem, h, None, solver_options)
        rung.baseline = _run_rung(baseline, h, None, solver_options)
        report.resolution_ladder.append(rung)
    if n_directions:
        report.geometry_summary = run_symmetry_sweep(domain, n_directions, workers)

    rungs = report.resolution_ladder
    if report.nonconverged or not all(r.ok and r.baseline.ok for r in rungs):
        report.verdict, report.reason = INCONCLUSIVE, "a solve did not converge"
        return report

    def separated(r):
        return r.defect >= separation * r.baseline.defect

    if separated(rungs[-1]):
        report.verdict, report.reason = (
            CONSISTENT,
            f"defect exceeds {separation:g}x the centred-ball baseline",
        )
    elif len(rungs) >= 2 and not separated(rungs[-2]):
        report.verdict, report.reason = (
            INCONSISTENT,
            "defect matches the centred ball at the two finest resolutions",
        )
    else:
        report.verdict, report.reason = INCONCLUSIVE, "separation not established"
    return report
