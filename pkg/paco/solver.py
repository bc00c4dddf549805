"""ADMM and linearized ADMM for patch consensus problems.

Both solvers work in scaled-dual form. The caller supplies the proximal step
of the cost and the projection onto C ∩ Ω (usually built from
patch_grid.project_consensus_omega), so any per-patch restoration method can
be plugged in as the proximal step.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import ConstraintError, SolverAbort
from .transforms import Dictionary, dict_adjoint, dict_apply

logger = logging.getLogger(__name__)

ProxFn = Callable[[np.ndarray, float], np.ndarray]
ProjectFn = Callable[[np.ndarray], np.ndarray]
CostFn = Callable[[np.ndarray], float]
MonitorFn = Callable[["AdmmState"], Optional[Dict[str, float]]]

TRACE_FIELDS = ("iter", "lambda", "cost", "constraint_violation", "cost_change", "arg_change")
METRIC_FIELDS = ("rmse", "mad", "bias", "psnr", "ssim")
LADMM_MU_FRACTION = 0.99


@dataclass(frozen=True)
class StopCriteria:
    max_iter: int = 256
    tol: float = 1e-8

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConstraintError(f"max_iter must be positive, got {self.max_iter}", module="solver")
        if not self.tol > 0:
            raise ConstraintError(f"tol must be positive, got {self.tol}", module="solver")


@dataclass
class PenaltySchedule:
    """λ starts at κα and is multiplied by ``shrink`` whenever the cost goes up."""
    kappa: float = 10.0
    shrink: float = 0.5
    adaptive: bool = True
    lam: Optional[float] = None
    last_cost: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConstraintError(f"kappa must be positive, got {self.kappa}", module="solver")
        if not 0 < self.shrink < 1:
            raise ConstraintError(f"shrink must lie in (0, 1), got {self.shrink}", module="solver")

    def start(self, peak: float) -> float:
        self.lam = self.kappa * peak
        self.last_cost = None
        return self.lam


def penalty_update(schedule: PenaltySchedule, current_cost: float) -> float:
    if schedule.lam is None:
        raise ConstraintError("penalty schedule used before start()", module="solver")
    if schedule.adaptive and schedule.last_cost is not None and current_cost > schedule.last_cost:
        schedule.lam *= schedule.shrink
        logger.debug(f"Cost went up ({schedule.last_cost:.6g} -> {current_cost:.6g}), lambda now {schedule.lam:.6g}")
    schedule.last_cost = current_cost
    return schedule.lam


@dataclass
class TraceRecord:
    iter: int
    lam: float
    cost: float
    constraint_violation: float
    cost_change: float
    arg_change: float
    metrics: Dict[str, float] = field(default_factory=dict)

    def values(self) -> tuple:
        return (self.iter, self.lam, self.cost, self.constraint_violation, self.cost_change, self.arg_change)


def _format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


@dataclass
class SolverTrace:
    """Per-iteration diagnostics.

    ``count`` is the number of patch columns the residuals run over and
    ``m`` their length; together with the peak they give the 1/(n·m·α)
    scaling of the convergence plots and the per-element residual scale
    used by the stopping rule.
    """
    count: int
    m: int
    peak: float
    records: List[TraceRecord] = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    @property
    def scale(self) -> float:
        return 1.0 / (max(self.count, 1) * self.m * self.peak)

    @property
    def residual_scale(self) -> float:
        return 1.0 / (math.sqrt(max(self.count, 1) * self.m) * self.peak)

    def append(self, record: TraceRecord):
        self.records.append(record)

    def metric_fields(self) -> List[str]:
        present = set()
        for record in self.records:
            present.update(record.metrics)
        return [name for name in METRIC_FIELDS if name in present]

    def rows(self, scaled: bool = False) -> List[tuple]:
        factor = self.scale if scaled else 1.0
        extra = self.metric_fields()
        rows = []
        for r in self.records:
            row = (r.iter, r.lam, r.cost * factor, r.constraint_violation * factor,
                   r.cost_change * factor, r.arg_change * factor)
            rows.append(row + tuple(r.metrics.get(name) for name in extra))
        return rows

    def to_csv(self, fh=None, scaled: bool = False) -> str:
        buffer = fh if fh is not None else io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRACE_FIELDS + tuple(self.metric_fields()))
        for row in self.rows(scaled):
            writer.writerow([_format_number(v) for v in row])
        return buffer.getvalue() if fh is None else ""

    def write_csv(self, path, scaled: bool = False):
        with open(path, "w", newline="") as fh:
            self.to_csv(fh, scaled)

    @classmethod
    def merge(cls, traces: Sequence["SolverTrace"]) -> "SolverTrace":
        """Average several traces (one per colour channel) iteration by iteration."""
        if len(traces) == 1:
            return traces[0]
        merged = cls(traces[0].count, traces[0].m, traces[0].peak,
                     converged=all(t.converged for t in traces))
        for k in range(max(len(t) for t in traces)):
            rows = [t.records[k] for t in traces if k < len(t)]
            values = np.mean([r.values()[1:] for r in rows], axis=0)
            names = set().union(*(r.metrics for r in rows))
            metrics = {
                name: float(np.mean([r.metrics[name] for r in rows if name in r.metrics])) for name in names
            }
            merged.append(TraceRecord(k + 1, *(float(v) for v in values), metrics=metrics))
        return merged


def check_stop(trace: SolverTrace, stop: StopCriteria) -> bool:
    record = trace.last
    if record.iter >= stop.max_iter:
        return True
    scale = trace.residual_scale
    return record.arg_change * scale < stop.tol and record.constraint_violation * scale < stop.tol


@dataclass
class AdmmState:
    Y: np.ndarray
    Z: np.ndarray
    U: np.ndarray
    lam: float
    iter: int = 0


def _check_finite(t: int, *arrays):
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise SolverAbort(f"non-finite values in iterate {t}")


def _zero_cost(_):
    return 0.0


class AdmmSolver:
    """Steps Y ← prox_λf(Z − U); Z ← Π(Y + U); U ← U + Y − Z.

    Returns Z, which is always feasible.
    """

    def __init__(self, prox_f: ProxFn, project: ProjectFn, schedule: PenaltySchedule, stop: StopCriteria,
                 peak: float = 1.0, cost: Optional[CostFn] = None, monitor: Optional[MonitorFn] = None):
        self.prox_f = prox_f
        self.project = project
        self.schedule = schedule
        self.stop = stop
        self.peak = peak
        self.cost = cost or _zero_cost
        self.monitor = monitor

    def solve(self, init: np.ndarray):
        init = np.asarray(init, dtype=np.float64)
        lam = self.schedule.lam if self.schedule.lam is not None else self.schedule.start(self.peak)
        Z = self.project(init)
        state = AdmmState(Y=Z.copy(), Z=Z, U=np.zeros_like(Z), lam=lam)
        trace = SolverTrace(count=Z.shape[1], m=Z.shape[0], peak=self.peak)
        previous_cost = self.cost(state.Y)
        logger.info(f"ADMM start: {Z.shape[0]}x{Z.shape[1]} patches, lambda {lam:.6g}, max_iter {self.stop.max_iter}")

        while True:
            t = state.iter + 1
            Y = self.prox_f(state.Z - state.U, state.lam)
            Z = self.project(Y + state.U)
            U = state.U + Y - Z
            _check_finite(t, Y, Z, U)

            current_cost = float(self.cost(Y))
            record = TraceRecord(
                iter=t,
                lam=state.lam,
                cost=current_cost,
                constraint_violation=float(np.linalg.norm(Y - Z)),
                cost_change=current_cost - previous_cost,
                arg_change=float(np.linalg.norm(Y - state.Y)),
            )
            state = AdmmState(Y=Y, Z=Z, U=U, lam=state.lam, iter=t)
            if self.monitor is not None:
                record.metrics = self.monitor(state) or {}
            trace.append(record)
            logger.debug(f"ADMM iter {t}: lambda {record.lam:.6g} cost {record.cost:.6g} "
                         f"violation {record.constraint_violation:.3e} change {record.arg_change:.3e}")
            if check_stop(trace, self.stop):
                break
            previous_cost = current_cost
            state.lam = penalty_update(self.schedule, current_cost)

        _finish(trace, self.stop, "ADMM")
        self.state = state
        return state.Z, trace


class LadmmSolver:
    """Linearized ADMM for the synthesis constraint Z = DA.

    A ← prox_μf[A − (μ/λ)Dᵀ(DA − Z + U)]; Z ← Π(DA + U); U ← U + DA − Z.
    The ratio μ/λ is kept when the schedule shrinks λ, so μ ≤ λ/‖D‖² holds
    at every iteration.
    """

    def __init__(self, prox_f: ProxFn, project: ProjectFn, dictionary: Dictionary, schedule: PenaltySchedule,
                 stop: StopCriteria, mu: Optional[float] = None, peak: float = 1.0,
                 cost: Optional[CostFn] = None, monitor: Optional[MonitorFn] = None):
        self.prox_f = prox_f
        self.project = project
        self.dictionary = dictionary
        self.schedule = schedule
        self.stop = stop
        self.peak = peak
        self.cost = cost or _zero_cost
        self.monitor = monitor
        lam = schedule.lam if schedule.lam is not None else schedule.start(peak)
        bound = lam / dictionary.norm_bound ** 2
        if mu is None:
            mu = LADMM_MU_FRACTION * bound
        if not 0 < mu <= bound:
            raise ConstraintError(f"mu must satisfy 0 < mu <= lambda/||D||^2 = {bound:.6g}, got {mu}",
                                  module="solver")
        self.ratio = mu / lam

    def solve(self, init: np.ndarray):
        A = np.asarray(init, dtype=np.float64)
        lam = self.schedule.lam
        DA = dict_apply(self.dictionary, A)
        Z = self.project(DA)
        U = np.zeros_like(Z)
        trace = SolverTrace(count=Z.shape[1], m=Z.shape[0], peak=self.peak)
        previous_cost = self.cost(A)
        logger.info(f"LADMM start: {self.dictionary.m}x{self.dictionary.p} dictionary, {Z.shape[1]} patches, "
                    f"lambda {lam:.6g}, mu {self.ratio * lam:.6g}")

        t = 0
        while True:
            t += 1
            mu = self.ratio * lam
            gradient = dict_adjoint(self.dictionary, DA - Z + U)
            A_next = self.prox_f(A - self.ratio * gradient, mu)
            DA = dict_apply(self.dictionary, A_next)
            Z = self.project(DA + U)
            U = U + DA - Z
            _check_finite(t, A_next, Z, U)

            current_cost = float(self.cost(A_next))
            record = TraceRecord(
                iter=t,
                lam=lam,
                cost=current_cost,
                constraint_violation=float(np.linalg.norm(DA - Z)),
                cost_change=current_cost - previous_cost,
                arg_change=float(np.linalg.norm(A_next - A)),
            )
            A = A_next
            self.state = AdmmState(Y=A, Z=Z, U=U, lam=lam, iter=t)
            if self.monitor is not None:
                record.metrics = self.monitor(self.state) or {}
            trace.append(record)
            if check_stop(trace, self.stop):
                break
            previous_cost = current_cost
            lam = penalty_update(self.schedule, current_cost)

        _finish(trace, self.stop, "LADMM")
        self.coefficients = A
        return Z, trace


def _finish(trace: SolverTrace, stop: StopCriteria, name: str):
    last = trace.last
    trace.converged = last.iter < stop.max_iter or (
        last.arg_change * trace.residual_scale < stop.tol
        and last.constraint_violation * trace.residual_scale < stop.tol
    )
    if trace.converged:
        logger.info(f"{name} converged after {last.iter} iterations (cost {last.cost:.6g})")
    else:
        logger.warning(f"{name} stopped at max_iter={stop.max_iter} without reaching tol={stop.tol:g}")


def admm_solve(prox_f: ProxFn, project: ProjectFn, init: np.ndarray, schedule: PenaltySchedule,
               stop: StopCriteria, peak: float = 1.0, cost: Optional[CostFn] = None,
               monitor: Optional[MonitorFn] = None):
    return AdmmSolver(prox_f, project, schedule, stop, peak=peak, cost=cost, monitor=monitor).solve(init)


def ladmm_solve(prox_f: ProxFn, project: ProjectFn, dictionary: Dictionary, init: np.ndarray,
                schedule: PenaltySchedule, stop: StopCriteria, mu: Optional[float] = None, peak: float = 1.0,
                cost: Optional[CostFn] = None, monitor: Optional[MonitorFn] = None):
    solver = LadmmSolver(prox_f, project, dictionary, schedule, stop, mu=mu, peak=peak, cost=cost, monitor=monitor)
    return solver.solve(init)


def dykstra_project(proj_1: ProjectFn, proj_2: ProjectFn, Y: np.ndarray, max_iter: int = 500,
                    tol: float = 1e-12, full_output: bool = False):
    """Projection onto the intersection of two closed convex sets.

    Stops when an iteration moves the iterate by less than ``tol`` relative
    to its norm; if ``max_iter`` is reached first a warning is logged and the
    last iterate is returned. With ``full_output`` the pair
    ``(x, converged)`` is returned instead.
    """
    x = np.asarray(Y, dtype=np.float64)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    change = np.inf
    for k in range(1, max_iter + 1):
        y = proj_1(x + p)
        p = x + p - y
        x_next = proj_2(y + q)
        q = y + q - x_next
        change = float(np.linalg.norm(x_next - x))
        x = x_next
        if change <= tol * max(1.0, float(np.linalg.norm(x))):
            logger.debug(f"Dykstra converged in {k} iterations")
            return (x, True) if full_output else x
    logger.warning(f"Dykstra projection did not converge in {max_iter} iterations (last change {change:.3e})")
    return (x, False) if full_output else x
