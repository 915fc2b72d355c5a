"""End-to-end Monte Carlo scenarios: sample, reduce to radii, bin, extract curves.

Samples are produced in fixed-size blocks; block ``b`` draws from stream
``b`` of the scenario seed and is processed by worker ``b % workers``.
The set of samples, and therefore every count in the merged histogram,
depends only on ``(seed, sample_count)``. Per-block correlation
accumulators are merged in block order, so floating-point outputs are
bit-identical for any worker count as well.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .exceptions import InsufficientData, NoCrossing
from .histogram import (
    CorrelationAccumulator,
    CurveEstimate,
    JointRadialHistogram,
    antidiagonal_curve,
    column_curve,
    diagonal_curve,
    estimate_crossover,
    estimate_crossover_fit,
    marginal_exponent,
    merge,
)
from .measures import MeasureSpec, Sampler
from .qstate import ppt_mask
from .radii import subsystem_radii

BLOCK_SIZE = 50_000


@dataclass(frozen=True)
class ScenarioDef:
    family: str
    N: int
    K: int
    split: tuple[int, int]
    # power of r in the radial volume element of the reduced Bloch vectors
    jacobian_power: int | None
    offset: float = 1.0


SCENARIOS: dict[str, ScenarioDef] = {
    "x-hs": ScenarioDef("XFlat", 4, 4, (2, 2), 0),
    "x-k5": ScenarioDef("XInduced", 4, 5, (2, 2), 0),
    "qubit-k3": ScenarioDef("GinibreInduced", 4, 3, (2, 2), 2),
    "qubit-k4": ScenarioDef("GinibreInduced", 4, 4, (2, 2), 2),
    "qubit-k5": ScenarioDef("GinibreInduced", 4, 5, (2, 2), 2),
    "rebit": ScenarioDef("RealHS", 4, 4, (2, 2), 1),
    "bures": ScenarioDef("Bures", 4, 4, (2, 2), 2),
    "qutrit-hs": ScenarioDef("GinibreInduced", 9, 9, (3, 3), None, 0.435),
    "qutrit-k24": ScenarioDef("GinibreInduced", 9, 24, (3, 3), None, 0.265),
    "qubitqutrit-hs": ScenarioDef("GinibreInduced", 6, 6, (2, 3), None),
}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    sample_count: int
    seed: int = 0
    workers: int = 1
    nbins: int = 100
    offset: float | None = None
    radius_scale: float = 1.0

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {sorted(SCENARIOS)}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def definition(self) -> ScenarioDef:
        return SCENARIOS[self.name]

    @property
    def antidiagonal_offset(self) -> float:
        return self.offset if self.offset is not None else self.definition.offset

    def measure(self, stream: int = 0) -> MeasureSpec:
        d = self.definition
        return MeasureSpec(d.family, d.N, d.K, d.split, self.seed, stream)


@dataclass
class BlockResult:
    block: int
    histogram: JointRadialHistogram
    corr_all: CorrelationAccumulator
    corr_sep: CorrelationAccumulator
    proposed: int


def _chunk(N: int) -> int:
    return {4: 50_000, 6: 20_000}.get(N, 10_000)


def run_block(spec: ScenarioSpec, block: int) -> BlockResult:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, spec.sample_count - start)
    sampler = Sampler(spec.measure(stream=block))
    h = JointRadialHistogram(spec.nbins, spec.radius_scale)
    ca, cs = CorrelationAccumulator(), CorrelationAccumulator()
    d = spec.definition
    done = 0
    while done < n:
        m = min(_chunk(d.N), n - done)
        if sampler.spec.is_xstate:
            xb = sampler.xstates(m)
            rA, rB = xb.radii()
            sep = xb.separable()
        else:
            arr = sampler.matrices(m)
            rA, rB = subsystem_radii(arr, d.split)
            sep = ppt_mask(arr, d.split)
        h.accumulate_many(rA, rB, sep)
        ca.update(rA, rB)
        cs.update(rA[sep], rB[sep])
        done += m
    return BlockResult(block, h, ca, cs, sampler.proposed)


def _run_worker(spec: ScenarioSpec, worker: int) -> list[BlockResult]:
    nblocks = math.ceil(spec.sample_count / BLOCK_SIZE)
    return [run_block(spec, b) for b in range(worker, nblocks, spec.workers)]


@dataclass
class ScenarioReport:
    spec: ScenarioSpec
    histogram: JointRadialHistogram
    curves: dict[str, CurveEstimate]
    crossover: float | None
    crossover_note: str
    crossover_fit: float | None
    fraction: float
    ci_halfwidth: float
    correlation_all: float | None
    correlation_separable: float | None
    marginal_exponent: float | None
    acceptance_rate: float
    runtime_seconds: float
    version: str = __version__
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.histogram.n_total

    def summary(self) -> dict:
        return {
            "scenario": self.spec.name,
            "spec": asdict(self.spec),
            "measure": asdict(self.spec.definition),
            "samples": self.n,
            "separable": self.histogram.n_separable,
            "fraction": self.fraction,
            "ci_halfwidth_3sigma": self.ci_halfwidth,
            "crossover": self.crossover,
            "crossover_note": self.crossover_note,
            "crossover_fit": self.crossover_fit,
            "correlation_all": self.correlation_all,
            "correlation_separable": self.correlation_separable,
            "marginal_exponent": self.marginal_exponent,
            "acceptance_rate": self.acceptance_rate,
            "runtime_seconds": self.runtime_seconds,
            "stream_partition": f"block b of {BLOCK_SIZE} samples uses stream b, worker b % {self.spec.workers}",
            "code_version": self.version,
            **self.extra,
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.histogram.to_csv(out)
        for name, c in self.curves.items():
            c.to_csv(out / f"curve_{name}.csv")
        s = self.summary()
        runtime = {"runtime_seconds": s.pop("runtime_seconds"), "code_version": self.version}
        # wall-clock time lives in its own file so report.json stays a pure function of the config
        (out / "report.json").write_text(json.dumps(s, indent=2, sort_keys=True) + "\n")
        (out / "runtime.json").write_text(json.dumps(runtime, indent=2, sort_keys=True) + "\n")
        return out


def scenario_curves(spec: ScenarioSpec, h: JointRadialHistogram) -> dict[str, CurveEstimate]:
    """Diagonal, antidiagonal and ``rB = 1/2`` column curves.

    For the qubit-qutrit scenario the antidiagonal is ``p(1 - RB, RB)``
    indexed by the qutrit radius, and its reversal ``p(rA, 1 - rA)`` is
    added as ``antidiagonal_reversal``.
    """
    if spec.name == "qubitqutrit-hs":
        return {
            "diagonal": diagonal_curve(h),
            "antidiagonal": antidiagonal_curve(h, spec.antidiagonal_offset, axis="B"),
            "antidiagonal_reversal": antidiagonal_curve(h, spec.antidiagonal_offset, axis="A"),
            "column_half": column_curve(h, h.nbins // 2),
        }
    return {
        "diagonal": diagonal_curve(h),
        "antidiagonal": antidiagonal_curve(h, spec.antidiagonal_offset),
        "column_half": column_curve(h, h.nbins // 2),
    }


def summarize(spec: ScenarioSpec, h: JointRadialHistogram, ca=None, cs=None,
              proposed=None, runtime=0.0) -> ScenarioReport:
    """Build a report from a merged histogram (and optional accumulators)."""
    curves = scenario_curves(spec, h)
    n = h.n_total
    p = h.n_separable / n if n else float("nan")
    try:
        cross, note = estimate_crossover(curves["diagonal"], curves["antidiagonal"]), "crossing"
    except NoCrossing as exc:
        cross, note = None, f"NoCrossing: {exc}"
    try:
        cross_fit = estimate_crossover_fit(curves["diagonal"], curves["antidiagonal"])
    except (NoCrossing, InsufficientData):
        cross_fit = None

    def corr(acc):
        try:
            return acc.correlation if acc is not None else None
        except InsufficientData:
            return None

    jac = spec.definition.jacobian_power
    try:
        expo = marginal_exponent(h, jacobian_power=jac) if jac is not None else None
    except InsufficientData:
        expo = None
    return ScenarioReport(
        spec, h, curves, cross, note, cross_fit, p,
        3 * math.sqrt(p * (1 - p) / n) if n else float("nan"),
        corr(ca), corr(cs), expo,
        n / proposed if proposed else 1.0, runtime,
    )


def run(spec: ScenarioSpec) -> ScenarioReport:
    t0 = time.perf_counter()
    if spec.workers == 1:
        results = _run_worker(spec, 0)
    else:
        with ProcessPoolExecutor(spec.workers) as pool:
            futures = [pool.submit(_run_worker, spec, w) for w in range(spec.workers)]
            results = [r for f in futures for r in f.result()]
    results.sort(key=lambda r: r.block)
    h = JointRadialHistogram(spec.nbins, spec.radius_scale)
    ca, cs = CorrelationAccumulator(), CorrelationAccumulator()
    proposed = 0
    for r in results:
        h = merge(h, r.histogram)
        ca.merge(r.corr_all)
        cs.merge(r.corr_sep)
        proposed += r.proposed
    return summarize(spec, h, ca, cs, proposed, time.perf_counter() - t0)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


# -- verification suite ---------------------------------------------------


@dataclass
class CheckItem:
    label: str
    computed: float | None
    target: float | str | None
    tolerance: float | str | None
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VerificationReport:
    name: str
    items: list[CheckItem]
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.items) and all(i.passed for i in self.items)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "items": [i.to_dict() for i in self.items]}

    def line(self) -> str:
        parts = []
        for i in self.items:
            c = "None" if i.computed is None else f"{i.computed:.10g}"
            parts.append(f"{i.label}={c} (target {i.target}, tol {i.tolerance})")
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: " + "; ".join(parts)


def _near(label, computed, target, tol) -> CheckItem:
    ok = computed is not None and abs(float(computed) - float(target)) <= tol
    return CheckItem(label, None if computed is None else float(computed), float(target), tol, ok)


# Sample counts used by the Monte Carlo checks
FULL_COUNTS = {
    "x-hs": 10**7, "x-k5": 10**7, "qubit-k3": 10**7, "qubit-k4": 10**7, "qubit-k5": 10**7,
    "rebit": 10**7, "bures": 10**7, "qutrit-hs": 10**7, "qutrit-k24": 10**6, "qubitqutrit-hs": 10**7,
}
SMOKE_COUNT = 10**6


class RunCache:
    """Memoizes scenario runs so several checks can share one sample set."""

    def __init__(self, seed: int = 0, workers: int = 1, counts: dict | None = None):
        self.seed, self.workers = seed, workers
        self.counts = dict(FULL_COUNTS if counts is None else counts)
        self._runs: dict[tuple, ScenarioReport] = {}

    def get(self, name: str, n: int | None = None) -> ScenarioReport:
        n = self.counts[name] if n is None else n
        key = (name, n)
        if key not in self._runs:
            self._runs[key] = run(ScenarioSpec(name, n, self.seed, self.workers))
        return self._runs[key]


def _exact_checks():
    from fractions import Fraction

    from . import closedform as cf
    from . import fits

    half = Fraction(1, 2)

    def corners():
        vals = [("x_prob(1/2,1/2)", cf.x_prob(half, half), Fraction(139, 384)),
                ("x_prob(0,0)", cf.x_prob(0, 0), Fraction(3, 8)),
                ("x_prob(1,1)", cf.x_prob(1, 1), Fraction(0)),
                ("x_prob(0,1)", cf.x_prob(0, 1), half)]
        return [CheckItem(lbl, float(v), str(t), "exact", v == t) for lbl, v, t in vals]

    def roots():
        return [
            _near("quintic", cf.poly_root(cf.XK4_QUINTIC, Fraction(3, 10), half), 0.40182804, 1e-7),
            _near("octic", cf.poly_root(cf.XK5_OCTIC, Fraction(3, 10), Fraction(4, 10)), 0.3385355079, 1e-7),
            _near("quartic", cf.poly_root(cf.K3_QUARTIC, Fraction(4, 10), half), 0.487543066126, 1e-7),
        ]

    def x_crossover():
        return [_near("quintic", cf.poly_root(cf.XK4_QUINTIC, Fraction(3, 10), half), 0.40182804, 1e-7)]

    def extrema():
        arg, val = cf.curve_extremum(cf.X_DIAG, 0, 1, "max")
        garg, gap = cf.curve_extremum(cf.X_DIAG - cf.X_ANTIDIAG, Fraction("0.40182804"), half, "max")
        return [_near("diag_argmax", arg, 0.2722700792, 1e-8), _near("diag_max", val, 0.393558399, 1e-8),
                _near("gap_argmax", garg, 0.4564893379, 1e-8), _near("gap_max", gap, 0.0056796160, 1e-8)]

    def intersections():
        lo, hi = 0, Fraction(49, 100)
        return [_near("half_vs_diag", cf.intersect_curves(cf.X_HALF, cf.X_DIAG, lo, hi)[-1], 0.364314, 1e-5),
                _near("half_vs_anti", cf.intersect_curves(cf.X_HALF, cf.X_ANTIDIAG, lo, hi)[-1], 0.428908, 1e-5)]

    def integral():
        return [_near("integral_x_prob", cf.integrate_surface(cf.X_PROB, 1e-9), 0.381678, 1e-4)]

    def correlation():
        return [_near(f"pearson_{f}", cf.x_correlation(f).value, t, 1e-5)
                for f, t in (("all", 0.702341), ("separable", 0.68326))]

    def marginal_identity():
        rs = [Fraction(k, 10) for k in range(1, 10)]
        return [_near(f"marginal({float(r):.1f})", cf.marginal_integral(cf.x_total, r),
                      cf.x_total_marginal(r), 1e-9) for r in rs]

    def fit_consistency():
        items = []
        grid = [Fraction(k, 20) for k in range(1, 20)]
        items.append(CheckItem(
            "k3_diag=k3_sep/k3_total on diagonal",
            max(abs(float(fits.k3_diag(r) - fits.K3_SEP_DIAG(r) / fits.K3_TOTAL.diagonal(r))) for r in grid),
            0.0, 1e-9,
            all(abs(float(fits.k3_diag(r) - fits.K3_SEP_DIAG(r) / fits.K3_TOTAL.diagonal(r))) <= 1e-9 for r in grid)))
        for name, curve, sep, tot in (("k4", fits.k4_diag, fits.K4_SEP_DIAG, fits.K4_TOTAL_DIAG),
                                      ("k5", fits.k5_diag, fits.K5_SEP_DIAG, fits.K5_TOTAL_DIAG)):
            err = max(abs(float(curve(r) - sep(r) / tot(r))) for r in grid)
            items.append(CheckItem(f"{name}_diag=sep/total", err, 0.0, 1e-9, err <= 1e-9))
        p0, p1 = fits.K3_ANTIDIAG.pieces[0][2], fits.K3_ANTIDIAG.pieces[1][2]
        jump = abs(float(p0(half) - p1(half)))
        items.append(CheckItem("k3_antidiag continuity at 1/2", jump, 0.0, 1e-9, jump <= 1e-9))
        return items

    return {
        "x-prob-corners": corners,
        "crossover-roots": roots,
        "x-crossover": x_crossover,
        "x-diag-extrema": extrema,
        "x-half-intersections": intersections,
        "x-integral": integral,
        "x-correlation": correlation,
        "x-marginal": marginal_identity,
        "fit-consistency": fit_consistency,
    }


FRACTION_TARGETS = {
    "x-hs": 2 / 5, "qubit-k4": 8 / 33, "qubit-k3": 1 / 14, "qubit-k5": 61 / 143, "rebit": 29 / 64,
}
CROSSOVER_TARGETS = {"x-hs": 0.402, "x-k5": 0.339, "qubit-k4": 0.454, "qubit-k5": 0.424, "rebit": 0.472}
EXPONENT_TARGETS = {"x-hs": 3.0, "x-k5": 5.0, "qubit-k3": 4.0, "qubit-k4": 6.0, "qubit-k5": 8.0, "rebit": 3.5}


def _fraction_item(rep: ScenarioReport, target: float) -> CheckItem:
    tol = 3 * math.sqrt(target * (1 - target) / rep.n)
    return _near(f"{rep.spec.name}_fraction", rep.fraction, target, tol)


def _mc_checks(cache: RunCache):
    from . import closedform as cf
    from .fits import chi_squared

    def fractions():
        return [_fraction_item(cache.get(n), t) for n, t in FRACTION_TARGETS.items()]

    def smoke():
        return [_fraction_item(cache.get(n, SMOKE_COUNT), FRACTION_TARGETS[n]) for n in ("x-hs", "qubit-k4")]

    def x_curves():
        rep = cache.get("x-hs")
        items = []
        for key, curve in (("diagonal", cf.X_DIAG), ("antidiagonal", cf.X_ANTIDIAG)):
            fr = chi_squared(curve, rep.curves[key], min_count=200)
            items.append(CheckItem(f"{key}_reduced_chi2", fr.reduced, "[0.5, 2]", "range",
                                   0.5 <= fr.reduced <= 2.0))
        return items

    def crossovers():
        items = []
        est = {}
        for name in ("x-hs", "x-k5", "qubit-k3", "qubit-k4", "qubit-k5", "rebit"):
            est[name] = cache.get(name).crossover
            if name in CROSSOVER_TARGETS:
                items.append(_near(f"{name}_crossover", est[name], CROSSOVER_TARGETS[name], 0.02))
        ok = None not in est.values() and (
            est["x-k5"] < est["x-hs"] and est["qubit-k5"] < est["qubit-k4"] < est["qubit-k3"])
        items.append(CheckItem("ordering K=5<K=4<K=3", None, "r(x-k5)<r(x-hs); r(k5)<r(k4)<r(k3)", "order", ok))
        return items

    def bures():
        rep = cache.get("bures")
        h = rep.histogram
        tot, sep = h.total.sum(axis=1), h.separable.sum(axis=1)
        use = tot > 0
        rho = float(stats.spearmanr(h.midpoints[use], sep[use] / tot[use]).statistic)
        return [
            CheckItem("no_crossover_below_half", rep.crossover, "NoCrossing", "none", rep.crossover is None),
            CheckItem("spearman_p_vs_rA", rho, "< -0.9", "bound", rho < -0.9),
        ]

    def exponents():
        return [_near(f"{n}_exponent", cache.get(n).marginal_exponent, t, 0.1) for n, t in EXPONENT_TARGETS.items()]

    def qutrit():
        k24 = cache.get("qutrit-k24")
        hs = cache.get("qutrit-hs")
        qq = cache.get("qubitqutrit-hs")
        diag, anti = qq.curves["diagonal"], qq.curves["antidiagonal"]
        x = diag.abscissae
        use = diag.defined & anti.defined & ((x < 0.3) | (x > 0.5))
        dom = float(np.mean(anti.probabilities[use] > diag.probabilities[use])) if use.any() else None
        wanted = {"diagonal", "antidiagonal", "antidiagonal_reversal"}
        have = len(wanted & set(qq.curves))
        return [
            _near("qutrit-k24_fraction", k24.fraction, 0.71179, 0.005),
            _near("qutrit-hs_fraction", hs.fraction, 1.0218e-4, 0.3 * 1.0218e-4),
            CheckItem("qubitqutrit_curves", float(have), 3.0, "exact", have == 3),
            CheckItem("qubitqutrit_anti_dominates", dom, ">= 0.8", "bound", dom is not None and dom >= 0.8),
        ]

    return {
        "mc-smoke": smoke,
        "fractions": fractions,
        "x-hs-curves": x_curves,
        "crossovers": crossovers,
        "bures": bures,
        "marginal-exponents": exponents,
        "qutrit": qutrit,
    }


EXACT_CHECKS = tuple(_exact_checks())
MC_CHECKS = ("mc-smoke", "fractions", "x-hs-curves", "crossovers", "bures", "marginal-exponents", "qutrit")
FAST_TARGETS = EXACT_CHECKS + ("mc-smoke",)
FULL_TARGETS = tuple(c for c in EXACT_CHECKS if c != "x-crossover") + MC_CHECKS[1:]

# acceptance criterion number -> checks that make it up
CRITERIA = {
    1: ("x-prob-corners",), 2: ("crossover-roots",), 3: ("x-diag-extrema",),
    4: ("x-half-intersections",), 5: ("x-integral", "x-correlation"), 6: ("x-marginal",),
    7: ("fit-consistency",), 8: ("fractions",), 9: ("x-hs-curves",), 10: ("crossovers",),
    11: ("bures",), 12: ("marginal-exponents",), 13: ("qutrit",),
}


def verify(targets, seed: int = 0, workers: int = 1, cache: RunCache | None = None) -> list[VerificationReport]:
    """Run named checks and report measured values against their targets.

    Failures, including exceptions raised inside a check, become report
    entries rather than propagating.
    """
    cache = cache or RunCache(seed, workers)
    table = {**_exact_checks(), **_mc_checks(cache)}
    out = []
    for name in targets:
        if name not in table:
            out.append(VerificationReport(name, [], f"unknown check {name!r}"))
            continue
        try:
            out.append(VerificationReport(name, table[name]()))
        except Exception as exc:  # a crashing check is a failed check
            out.append(VerificationReport(name, [], f"{type(exc).__name__}: {exc}"))
    return out
