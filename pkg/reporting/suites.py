"""Verification checks and the named suites that group them."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, null_space

from cocycles.coboundary_solver import (
    additive_delta_polynomial,
    coboundary_solve_pi0,
    delta0,
    graded_blocks_from_values,
    graded_coboundary_solve,
)
from cocycles.cochain_calculus import (
    PIPELINE_FD_STEP,
    delta_mult,
    identity_axiom_check,
    symmetry_and_vanest0,
    transport,
    unit_propagation_check,
)
from cocycles.models import Cochain1, Cochain2, EnhancementFactor
from densities.density_algebra import (
    HALF,
    compose_enhanced_linear,
    eval_density,
    liouville_half_density,
    quotient_density,
)
from densities.models import (
    AlphaDensity,
    LinearCanonicalRelation,
    ShortExactPresentation,
    standard_symplectic,
)
from jets.polynomials import Polynomial
from liecase.action_groupoid import target
from liecase.duflo import F_CHOICES, duflo_identity_residual, star_associativity_residual
from liecase.models import ActionGroupoidElement
from liecase.split_form import (
    broken_enhancement,
    direct_associativity_residual,
    split_associativity_residual,
    unit_enhancement,
)
from numerics.errors import SgaLabError, UnknownSuiteError
from poisson.config import resolve_structure
from poisson.models import LieAlgebraData, StructureConfig
from reporting.models import CheckReport, RunConfig, SampleRecord
from spray.flow import DEFAULT_FLOW_ORDER, realization_residual
from spray.generating_function import (
    backend_for,
    build_generating_function,
    coefficient_table,
    taylor_S_family,
)
from spray.groupoid_ops import (
    a0_residual,
    arrow_with_source,
    associativity_residual,
    convolution_identity_residual,
    gamma_amplitude,
    gamma_S,
    sga_residual,
    target_of,
)
from spray.models import ComposablePairChart, GeneratingFunction, GroupoidPoint

logger = logging.getLogger(__name__)

DENSITY_TOL = 1e-9
REALIZATION_TOL = 1e-6
SGA_TOL = 1e-8
SERIES_MATCH_TOL = 1e-10
DELTA_GAMMA_TOL = 1e-6
IDENTITY_TOL = 1e-9
UNIT_TOL = 1e-8
TRANSPORT_TOL = 1e-6
SKEW_TOL = 1e-8
SPLIT_TOL = 1e-7
DUFLO_TOL = 1e-6
STAR_TOL = 1e-10
COBOUNDARY_TOL = 1e-10
# Fitted blocks of a vanishing ln gamma_S carry value noise over radius^degree
HEISENBERG_TOL = 1e-8
TAYLOR_TOL = 1e-10
MULTIPLY_TOL = 1e-8
# Associativity of multiply on a series S is limited by its truncation
SERIES_MULTIPLY_TOL = 1e-6
AMPLITUDE_TOL = 1e-6
CONVOLUTION_TOL = 1e-8
# Smallest residual a negative control must show
BROKEN_MIN = 1e-3
# Shape of the Gutt control covector pairs
CONTROL_SPREAD = 0.1
CONTROL_WIDTH = 1.15
CONTROL_P_MAX = 0.24
KILLING_MIN = 1e-12
# Smallest fraction of the action radius along a split control axis
CONTROL_SCALE = 0.8

DENSITY_SAMPLES = 200
STAR_SAMPLES = 100
SOLVER_SAMPLES = 10
GROUPOID_SAMPLES = 5
REALIZATION_RADIUS = 0.1
TRIPLE_RADIUS = 0.1
DUFLO_RADIUS = 0.2
ACTION_RADIUS = 0.3
# Largest |ad| a star-product sample may reach, below the matrix-function guard
STAR_AD_NORM = 0.75
DUFLO_ORDER = 10
TAYLOR_ORDER = 3
GRADED_DEGREE = 6
HEISENBERG_DEGREE = 4
HEISENBERG_RADIUS = 0.1
PI0_DEGREE = 6

REALIZATION_STRUCTURES = ("zero", "constant", "so3", "sl2", "h3", "aff1", "quadratic")
SGA_STRUCTURES = ("zero", "constant", "constant4", "so3", "sl2", "h3", "aff1")
COCYCLE_STRUCTURES = ("constant", "so3", "sl2", "h3", "aff1")
DUFLO_ALGEBRAS = ("so3", "sl2", "h3", "aff1")
SPLIT_ALGEBRAS = ("so3", "h3", "aff1")
TAYLOR_STRUCTURES = ("constant", "so3")

Sample = Dict[str, Any]
Evaluation = Tuple[float, Dict[str, Any]]


def _jsonable(sample: Sample) -> Dict[str, Any]:
    """Recorded inputs; keys starting with '_' carry payload only."""
    out = {}
    for key, value in sample.items():
        if key.startswith("_"):
            continue
        if isinstance(value, np.ndarray):
            out[key] = [float(v) for v in value.ravel()]
        else:
            out[key] = value
    return out


def run_samples(
    report: CheckReport,
    samples: Sequence[Sample],
    evaluate: Callable[[Sample], Evaluation],
    threads: int = 1
) -> CheckReport:
    """
    Evaluate samples into report records.

    Failing samples are logged and recorded with their error; records
    are sorted by sample index whatever the completion order.
    """
    start = time.time()

    def one(item: Tuple[int, Sample]) -> SampleRecord:
        index, sample = item
        try:
            residual, details = evaluate(sample)
        except SgaLabError as e:
            logger.warning(
                f"{report.check} sample {index} on '{report.structure}' failed: {e}",
                extra={'check': report.check, 'structure': report.structure,
                       'error_type': type(e).__name__}
            )
            return SampleRecord(index, _jsonable(sample), float("inf"), False, error=str(e))
        residual = float(residual)
        passed = residual > report.tolerance if report.expect_failure else residual <= report.tolerance
        return SampleRecord(index, _jsonable(sample), residual, passed, details)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        records = list(pool.map(one, enumerate(samples)))
    report.records = sorted(records, key=lambda r: r.index)
    report.wall_time = time.time() - start
    logger.info(
        f"{report.check} on '{report.structure}': {len(records)} samples, "
        f"max residual {report.max_residual:.3e}, {'pass' if report.passed else 'FAIL'}"
    )
    return report


def _tol(config: RunConfig, default: float) -> float:
    return default if config.tol is None else config.tol


def _structures(config: RunConfig, defaults: Sequence[str]) -> List[StructureConfig]:
    if config.has_structure:
        return [resolve_structure(config.pi_spec, config.lie_spec)]
    return [resolve_structure(pi_spec=name) for name in defaults]


def _algebras(config: RunConfig, defaults: Sequence[str]) -> List[StructureConfig]:
    if config.has_structure:
        structure = resolve_structure(config.pi_spec, config.lie_spec)
        return [structure] if structure.lie is not None else []
    return [resolve_structure(lie_spec=name) for name in defaults]


def _covectors(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    """Vectors uniform in direction with norms uniform in [0, radius]."""
    directions = rng.normal(size=(count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * rng.uniform(0.0, radius, size=(count, 1))


def _points(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(count, n))


def generating_function_for(structure: StructureConfig, order: Optional[int]) -> GeneratingFunction:
    pi = structure.poisson
    backend = "closed_linear" if structure.lie is not None and pi.degree == 1 else backend_for(pi)
    return build_generating_function(
        pi, backend, order, lie=structure.lie, perturbation=structure.perturbation
    )


def gamma_cochain(S: GeneratingFunction, structure: StructureConfig, order: int) -> Cochain2:
    """gamma_S as a multiplicative J-chart cochain."""
    def evaluate(p1, p2, x):
        return gamma_S(S, structure.poisson, ComposablePairChart(p1, p2, x), order)
    return Cochain2(evaluate, name="gamma_S")


def _triple_samples(config: RunConfig, n: int, radius: float = TRIPLE_RADIUS) -> List[Sample]:
    rng = np.random.default_rng(config.seed)
    p1, p2, p3 = (_covectors(rng, config.samples, n, radius) for _ in range(3))
    xs = _points(rng, config.samples, n)
    return [{"p1": p1[i], "p2": p2[i], "p3": p3[i], "x": xs[i]} for i in range(config.samples)]


def _arrow_samples(config: RunConfig, n: int, radius: float = TRIPLE_RADIUS) -> List[Sample]:
    rng = np.random.default_rng(config.seed)
    ps = _covectors(rng, config.samples, n, radius)
    xs = _points(rng, config.samples, n)
    return [{"x": xs[i], "p": ps[i]} for i in range(config.samples)]


# Densities

def _random_symplectic(rng: np.random.Generator, n: int) -> np.ndarray:
    """exp(J H) for a small random symmetric H."""
    h = rng.normal(scale=0.5, size=(2 * n, 2 * n))
    return expm(standard_symplectic(n) @ (h + h.T) / 2)


def _density_scaling(rng: np.random.Generator, index: int) -> Sample:
    dim = 2 + index % 3
    order = (Fraction(1, 2), Fraction(1), Fraction(1, 3))[index % 3]
    return {
        "dim": dim, "order": str(order),
        "_ref": rng.normal(size=(dim, dim)) + 3 * np.eye(dim),
        "_value": float(rng.uniform(0.5, 2.0)),
        "_basis": rng.normal(size=(dim, dim)),
        "_change": rng.normal(size=(dim, dim)),
    }


def _evaluate_scaling(sample: Sample) -> Evaluation:
    order = Fraction(sample["order"])
    density = AlphaDensity(order, sample["dim"], sample["_value"], sample["_ref"])
    lhs = eval_density(density, sample["_basis"] @ sample["_change"])
    rhs = eval_density(density, sample["_basis"]) * abs(np.linalg.det(sample["_change"])) ** float(order)
    return abs(lhs - rhs) / abs(rhs), {}


def _evaluate_liouville(sample: Sample) -> Evaluation:
    n = sample["n"]
    value = eval_density(liouville_half_density(standard_symplectic(n)), sample["_basis"])
    return abs(value - 1.0), {}


def _evaluate_quotient(sample: Sample) -> Evaluation:
    v1 = sample["_v1"]
    projection = null_space(v1.T).T
    complement = sample["_complement"]
    shifted = complement + v1 @ sample["_shift"]
    sigma = AlphaDensity(HALF, 4, sample["_value"], sample["_ref"])
    sigma1 = AlphaDensity.on_identity(HALF, 2, sample["_value1"])
    first = quotient_density(sigma, sigma1, ShortExactPresentation(4, v1, complement, projection))
    second = quotient_density(sigma, sigma1, ShortExactPresentation(4, v1, shifted, projection))
    a, b = eval_density(first, np.eye(2)), eval_density(second, np.eye(2))
    return abs(a - b) / abs(a), {}


def _evaluate_composition(sample: Sample) -> Evaluation:
    n = sample["n"]
    omega = standard_symplectic(n)
    relations = [LinearCanonicalRelation.graph(t, omega) for t in sample["_maps"]]
    densities = [AlphaDensity.on_identity(HALF, 2 * n, v) for v in sample["_values"]]
    left = compose_enhanced_linear(
        *compose_enhanced_linear(relations[0], densities[0], relations[1], densities[1]),
        relations[2], densities[2],
    )
    right = compose_enhanced_linear(
        relations[0], densities[0],
        *compose_enhanced_linear(relations[1], densities[1], relations[2], densities[2]),
    )
    change = right[0].coordinates(left[0].basis_L)
    a = eval_density(left[1], np.eye(2 * n))
    b = eval_density(right[1], change)
    return abs(a - b) / abs(a), {}


def density_reports(config: RunConfig) -> List[CheckReport]:
    """Scaling law, Liouville normalization, quotient independence and composition."""
    rng = np.random.default_rng(config.seed)
    tol = _tol(config, DENSITY_TOL)
    count = DENSITY_SAMPLES

    scaling = [_density_scaling(rng, i) for i in range(count)]
    liouville = []
    for i in range(count):
        n = 1 + i % 3
        liouville.append({"n": n, "_basis": _random_symplectic(rng, n)})
    quotient = [{
        "_v1": rng.normal(size=(4, 2)), "_complement": rng.normal(size=(4, 2)),
        "_shift": rng.normal(size=(2, 2)), "_ref": np.eye(4) + 0.1 * rng.normal(size=(4, 4)),
        "_value": float(rng.uniform(0.5, 2.0)), "_value1": float(rng.uniform(0.5, 2.0)),
    } for _ in range(count)]
    composition = []
    for i in range(count):
        n = 1 + i % 2
        composition.append({
            "n": n,
            "_maps": [_random_symplectic(rng, n) for _ in range(3)],
            "_values": [float(v) for v in rng.uniform(0.5, 2.0, size=3)],
        })

    return [
        run_samples(CheckReport("density_scaling", "linear", "alpha-density scaling law", tol),
                    scaling, _evaluate_scaling, config.threads),
        run_samples(CheckReport("liouville_normalization", "linear",
                                "Liouville half-density is 1 on symplectic bases", tol),
                    liouville, _evaluate_liouville, config.threads),
        run_samples(CheckReport("quotient_complement", "linear",
                                "quotient density is independent of the complement", tol),
                    quotient, _evaluate_quotient, config.threads),
        run_samples(CheckReport("composition_associativity", "linear",
                                "enhanced linear composition is associative", tol),
                    composition, _evaluate_composition, config.threads),
    ]


# Realization and generating functions

def realization_report(structure: StructureConfig, config: RunConfig) -> CheckReport:
    order = config.order or DEFAULT_FLOW_ORDER
    pi = structure.poisson
    report = CheckReport("realization", structure.name,
                         "s and t form a symplectic realization of pi",
                         _tol(config, REALIZATION_TOL), order)
    samples = _arrow_samples(config, pi.dim, REALIZATION_RADIUS)
    return run_samples(
        report, samples,
        lambda s: (realization_residual(pi, s["x"], s["p"], order), {}),
        config.threads,
    )


def sga_report(structure: StructureConfig, config: RunConfig) -> CheckReport:
    S = generating_function_for(structure, config.order)
    report = CheckReport("sga", structure.name, "associativity equation of S",
                         _tol(config, SGA_TOL), S.order)
    samples = _triple_samples(config, S.dim)
    return run_samples(
        report, samples,
        lambda s: (sga_residual(S, s["p1"], s["p2"], s["p3"], s["x"]), {}),
        config.threads,
    )


def _convolution_densities():
    def f1(x):
        return float(1.0 + x @ x)

    def f2(x):
        return float(1.0 + 0.5 * x[0] + 0.1 * x[-1] ** 2)
    return f1, f2


def groupoid_reports(structure: StructureConfig, config: RunConfig) -> List[CheckReport]:
    """Associativity of multiply, the amplitude equation for gamma_S and bisection convolution."""
    flow_order = config.order or DEFAULT_FLOW_ORDER
    S = generating_function_for(structure, config.order)
    pi = structure.poisson
    a0 = gamma_amplitude(S, pi, flow_order)
    f1, f2 = _convolution_densities()
    samples = _triple_samples(config, S.dim)[:GROUPOID_SAMPLES]
    name = structure.name
    multiply_tol = SERIES_MULTIPLY_TOL if S.backend == "series" else MULTIPLY_TOL

    def multiply_gap(s: Sample) -> Evaluation:
        g3 = GroupoidPoint(s["x"], s["p3"])
        g2 = arrow_with_source(S, target_of(S, g3), s["p2"])
        g1 = arrow_with_source(S, target_of(S, g2), s["p1"])
        return associativity_residual(S, g1, g2, g3), {}

    return [
        run_samples(CheckReport("multiply_associativity", name, "multiplication is associative",
                                _tol(config, multiply_tol), S.order),
                    samples, multiply_gap, config.threads),
        run_samples(CheckReport("amplitude", name, "gamma_S solves the amplitude equation",
                                _tol(config, AMPLITUDE_TOL), flow_order),
                    samples,
                    lambda s: (a0_residual(S, a0, s["p1"], s["p2"], s["p3"], s["x"]), {}),
                    config.threads),
        run_samples(CheckReport("convolution", name,
                                "source pullbacks convolve through gamma_S",
                                _tol(config, CONVOLUTION_TOL), flow_order),
                    samples,
                    lambda s: (convolution_identity_residual(
                        S, pi, s["p1"], s["p2"], f1, f2, s["x"], flow_order), {}),
                    config.threads),
    ]


def series_match_report(config: RunConfig) -> CheckReport:
    """Series solve on a constant structure against the closed form, coefficient-wise."""
    structure = resolve_structure(pi_spec="constant")
    pi = structure.poisson
    report = CheckReport("series_match", structure.name, "series S equals the closed form",
                         _tol(config, SERIES_MATCH_TOL), None)

    def evaluate(sample: Sample) -> Evaluation:
        series = build_generating_function(pi, "series")
        closed = build_generating_function(pi, "closed_constant")
        report.order = series.order
        return (series.polynomial - closed.polynomial).max_abs_coefficient(), {}

    return run_samples(report, [{"backend": "series"}], evaluate)


def _expected_taylor_blocks(structure: StructureConfig) -> Tuple[Polynomial, Polynomial]:
    """x . (p1 + p2) and 1/2 pi^{ij}(x) p1_i p2_j over (p1, p2, x)."""
    pi = structure.poisson
    n = pi.dim
    var = [Polynomial.variable(3 * n, v) for v in range(3 * n)]
    first = Polynomial(3 * n, {})
    second = Polynomial(3 * n, {})
    for i in range(n):
        first = first + var[2 * n + i] * (var[i] + var[n + i])
        for j in range(n):
            coefficient = pi.polynomials[i][j]
            if coefficient.terms:
                lifted = coefficient.substitute(var[2 * n:])
                second = second + 0.5 * lifted * var[i] * var[n + j]
    return first, second


def taylor_report(structure: StructureConfig, config: RunConfig) -> CheckReport:
    order = config.order or TAYLOR_ORDER
    report = CheckReport("taylor_family", structure.name,
                         "low-degree blocks of the series S", _tol(config, TAYLOR_TOL), order)

    def evaluate(sample: Sample) -> Evaluation:
        family = taylor_S_family(structure.poisson, order)
        first, second = _expected_taylor_blocks(structure)
        gaps = {
            "degree_1": (family[1] - first).max_abs_coefficient(),
            "degree_2": (family[2] - second).max_abs_coefficient(),
        }
        return max(gaps.values()), gaps

    return run_samples(report, [{"max_order": order}], evaluate)


def expand_s_table(structure: StructureConfig, order: int) -> List[dict]:
    """Graded coefficient records of the series S."""
    return coefficient_table(taylor_S_family(structure.poisson, order), structure.poisson.dim)


# Cocycles

def _transport_kappa(n: int) -> Cochain1:
    """A normalized nonvanishing 1-cochain, kappa(x, 0) = 1."""
    def kappa(x, p):
        return float(np.exp(0.5 * p[0] * (1.0 + x[-1]) + 0.2 * p[-1] ** 2))
    return Cochain1(kappa, name="kappa")


def cocycle_reports(structure: StructureConfig, config: RunConfig) -> List[CheckReport]:
    """gamma_S against the cocycle, unit, identity, symmetry and transport checks."""
    flow_order = config.order or DEFAULT_FLOW_ORDER
    S = generating_function_for(structure, config.order)
    n = S.dim
    gamma = gamma_cochain(S, structure, flow_order)
    name = structure.name
    triples = _triple_samples(config, n)
    arrows = _arrow_samples(config, n)

    def delta_of(f: Cochain2) -> Callable[[Sample], Evaluation]:
        def evaluate(s: Sample) -> Evaluation:
            value = delta_mult(f, S, s["p1"], s["p2"], s["p3"], s["x"])
            return abs(value - 1.0), {}
        return evaluate

    def unit(s: Sample) -> Evaluation:
        check = unit_propagation_check(gamma, S, [GroupoidPoint(s["x"], s["p"])], np.inf)
        return check.max_residual, {}

    canonical = EnhancementFactor(Cochain2.constant(1.0, name="one"))

    def identity(s: Sample) -> Evaluation:
        check = identity_axiom_check(canonical, S, structure.poisson,
                                     [GroupoidPoint(s["x"], s["p"])], flow_order, np.inf)
        return check.max_residual, {}

    def symmetry(s: Sample) -> Evaluation:
        result = symmetry_and_vanest0(gamma.log(), [s["x"]], step=PIPELINE_FD_STEP)
        return result.max_skew, {}

    transported = transport(gamma, _transport_kappa(n), S)
    points = [{"x": a["x"]} for a in arrows]

    return [
        run_samples(CheckReport("delta_gamma", name, "gamma_S is a multiplicative 2-cocycle",
                                _tol(config, DELTA_GAMMA_TOL), flow_order),
                    triples, delta_of(gamma), config.threads),
        run_samples(CheckReport("unit_propagation", name,
                                "gamma_S is constant on unit pairs and obeys the inverse relation",
                                _tol(config, UNIT_TOL), flow_order),
                    arrows, unit, config.threads),
        run_samples(CheckReport("identity_axiom", name,
                                "canonical enhancement satisfies the identity axiom",
                                _tol(config, IDENTITY_TOL), flow_order),
                    arrows, identity, config.threads),
        run_samples(CheckReport("symmetry", name, "ln gamma_S satisfies the symmetry condition",
                                _tol(config, SKEW_TOL), flow_order),
                    points, symmetry, config.threads),
        run_samples(CheckReport("transport", name, "equivalent factors stay cocycles",
                                _tol(config, TRANSPORT_TOL), flow_order),
                    triples, delta_of(transported), config.threads),
    ]


def identity_axiom_report(structure: StructureConfig, config: RunConfig) -> CheckReport:
    flow_order = config.order or DEFAULT_FLOW_ORDER
    S = generating_function_for(structure, config.order)
    canonical = EnhancementFactor(Cochain2.constant(1.0, name="one"))

    def evaluate(s: Sample) -> Evaluation:
        check = identity_axiom_check(canonical, S, structure.poisson,
                                     [GroupoidPoint(s["x"], s["p"])], flow_order, np.inf)
        return check.max_residual, check.violations[0] if check.violations else {}

    return run_samples(
        CheckReport("identity_axiom", structure.name,
                    "canonical enhancement satisfies the identity axiom",
                    _tol(config, IDENTITY_TOL), flow_order),
        _arrow_samples(config, S.dim), evaluate, config.threads,
    )


def vanest_classifier_report(config: RunConfig) -> CheckReport:
    """The symmetry test accepts p1 . p2 and rejects x_1 (p1 wedge p2)."""
    n = 2
    var = [Polynomial.variable(3 * n, v) for v in range(3 * n)]
    symmetric = var[0] * var[2] + var[1] * var[3]
    skew = var[4] * (var[0] * var[3] - var[1] * var[2])
    cases = [
        {"case": "symmetric", "expected": True, "_h": symmetric},
        {"case": "skew", "expected": False, "_h": skew},
    ]
    xs = list(_points(np.random.default_rng(config.seed), 4, n))

    def evaluate(s: Sample) -> Evaluation:
        result = symmetry_and_vanest0(Cochain2.from_polynomial(s["_h"]), xs)
        return float(result.passed != s["expected"]), {"max_skew": result.max_skew}

    return run_samples(CheckReport("vanest_classifier", "zero",
                                   "skew mixed Hessian separates the test cochains", 0.0),
                       cases, evaluate)


# Lie algebra case

def duflo_reports(structure: StructureConfig, config: RunConfig) -> List[CheckReport]:
    """gamma_S against the F_K cocycle, and F_G as a negative control."""
    lie = structure.lie
    order = config.order or DUFLO_ORDER
    rng = np.random.default_rng(config.seed)
    p1, p2 = (_covectors(rng, config.samples, lie.dim, DUFLO_RADIUS) for _ in range(2))
    xs = _points(rng, config.samples, lie.dim)
    samples = [{"p1": p1[i], "p2": p2[i], "x": xs[i]} for i in range(config.samples)]

    def evaluate(choice: str) -> Callable[[Sample], Evaluation]:
        def run(s: Sample) -> Evaluation:
            record = duflo_identity_residual(lie, s["p1"], s["p2"], s["x"], order, choice)
            return record["residual"], {k: v for k, v in record.items() if k != "residual"}
        return run

    reports = [run_samples(
        CheckReport("duflo", lie.name, "gamma_S equals the F_K cocycle",
                    _tol(config, DUFLO_TOL), order),
        samples, evaluate("kontsevich"), config.threads,
    )]
    control = _gutt_control(lie, rng, xs)
    if control:
        reports.append(run_samples(
            CheckReport("duflo_gutt_control", lie.name, "F_G does not reproduce gamma_S",
                        BROKEN_MIN, order, expect_failure=True),
            control, evaluate("gutt"), config.threads,
        ))
    return reports


def killing_form(lie: LieAlgebraData) -> np.ndarray:
    """Matrix of B(u, v) = tr(ad_u ad_v) in the basis of the algebra."""
    ads = [lie.ad(e) for e in np.eye(lie.dim)]
    return np.array([[np.trace(a @ b) for b in ads] for a in ads])


def _gutt_control(lie: LieAlgebraData, rng: np.random.Generator, xs: np.ndarray) -> List[Sample]:
    """
    Nearly parallel covector pairs along the dominant Killing direction.

    For p1 = r1 d and p2 = r2 d, ln of the F_K ratio is about
    r1 r2 B(d, d) / 24 while F_G is identically 1, so norms from
    sqrt(48 BROKEN_MIN / |B(d, d)|) upward put every sample at about
    twice BROKEN_MIN or more. Algebras with a vanishing Killing form get
    no control.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(killing_form(lie))
    top = int(np.argmax(np.abs(eigenvalues)))
    curvature = abs(float(eigenvalues[top]))
    if curvature < KILLING_MIN:
        return []
    low = float(np.sqrt(48 * BROKEN_MIN / curvature))
    high = min(CONTROL_WIDTH * low, CONTROL_P_MAX)
    if low >= high:
        logger.warning(f"no gutt control for {lie.name}: norm {low:.3f} leaves the local domain")
        return []
    samples = []
    for x in xs:
        d = eigenvectors[:, top] + CONTROL_SPREAD * rng.normal(size=lie.dim)
        d *= rng.choice([-1.0, 1.0]) / np.linalg.norm(d)
        r1, r2 = rng.uniform(low, high, size=2)
        samples.append({"p1": r1 * d, "p2": r2 * d, "x": x})
    return samples


def _guarded_radius(lie: LieAlgebraData, radius: float, factors: int) -> float:
    """Shrink radius so that |ad| of a product of `factors` covectors stays below STAR_AD_NORM."""
    bound = float(np.linalg.norm(lie.c.reshape(lie.dim, -1), 2))
    if bound == 0.0:
        return radius
    return min(radius, STAR_AD_NORM / (factors * bound))


def star_reports(structure: StructureConfig, config: RunConfig) -> List[CheckReport]:
    lie = structure.lie
    rng = np.random.default_rng(config.seed)
    count = STAR_SAMPLES
    radius = _guarded_radius(lie, DUFLO_RADIUS, 3)
    p1, p2, p3 = (_covectors(rng, count, lie.dim, radius) for _ in range(3))
    samples = [{"p1": p1[i], "p2": p2[i], "p3": p3[i]} for i in range(count)]
    reports = []
    for choice in F_CHOICES:
        reports.append(run_samples(
            CheckReport(f"star_{choice}", lie.name, "plane-wave star is associative",
                        _tol(config, STAR_TOL), None),
            samples,
            lambda s, c=choice: (star_associativity_residual(lie, c, s["p1"], s["p2"], s["p3"]), {}),
            config.threads,
        ))
    return reports


def _action_triples(config: RunConfig, structure: StructureConfig) -> List[Sample]:
    """Composable triples (a1, a2, a3, x3) of the action groupoid."""
    lie = structure.lie
    rng = np.random.default_rng(config.seed)
    radius = min(ACTION_RADIUS, config.a_max)
    a1, a2, a3 = (_covectors(rng, config.samples, lie.dim, radius) for _ in range(3))
    xs = _points(rng, config.samples, lie.dim)
    return [{"a1": a1[i], "a2": a2[i], "a3": a3[i], "x": xs[i]} for i in range(config.samples)]


def action_triple(structure: StructureConfig, sample: Sample) -> Tuple[ActionGroupoidElement, ...]:
    lie = structure.lie
    g3 = ActionGroupoidElement(sample["a3"], sample["x"])
    g2 = ActionGroupoidElement(sample["a2"], target(lie, g3))
    g1 = ActionGroupoidElement(sample["a1"], target(lie, g2))
    return g1, g2, g3


def split_reports(structure: StructureConfig, config: RunConfig) -> List[CheckReport]:
    """Split-form and direct associativity for sigma^c, plus a broken factor."""
    name = structure.name
    samples = _action_triples(config, structure)
    tol = _tol(config, SPLIT_TOL)
    # the broken factor reads a1[0], a2[0] and a3[1]; its defect is about a1[0] a2[0] a3[1]
    radius = min(ACTION_RADIUS, config.a_max)
    axis = np.eye(structure.lie.dim)
    scales = np.random.default_rng(config.seed + 1).uniform(CONTROL_SCALE, 1.0, size=(len(samples), 3))
    control = [{"a1": radius * k[0] * axis[0], "a2": radius * k[1] * axis[0],
                "a3": radius * k[2] * axis[1], "x": s["x"]}
               for s, k in zip(samples, scales)]

    def residual(method, f) -> Callable[[Sample], Evaluation]:
        return lambda s: (method(structure.lie, action_triple(structure, s), f), {})

    return [
        run_samples(CheckReport("split_assoc", name, "split-form associativity of sigma^c", tol),
                    samples, residual(split_associativity_residual, unit_enhancement),
                    config.threads),
        run_samples(CheckReport("direct_assoc", name, "direct associativity of sigma^c", tol),
                    samples, residual(direct_associativity_residual, unit_enhancement),
                    config.threads),
        run_samples(CheckReport("split_assoc_broken", name,
                                "a non-cocycle factor breaks associativity",
                                BROKEN_MIN, expect_failure=True),
                    control, residual(split_associativity_residual, broken_enhancement),
                    config.threads),
    ]


# Coboundary solvers

def _random_primitive(rng: np.random.Generator, n: int, min_degree: int, max_degree: int,
                      x_degree: int, terms: int) -> Polynomial:
    """Random polynomial over (p, x) with p-degrees in [min_degree, max_degree]."""
    coefficients = {}
    while len(coefficients) < terms:
        k = int(rng.integers(min_degree, max_degree + 1))
        p_part = np.bincount(rng.integers(0, n, size=k), minlength=n)
        x_part = np.bincount(rng.integers(0, n, size=int(rng.integers(0, x_degree + 1))),
                             minlength=n)
        key = tuple(int(e) for e in np.concatenate([p_part, x_part]))
        coefficients[key] = float(rng.normal())
    return Polynomial(2 * n, coefficients)


def solver_reports(config: RunConfig) -> List[CheckReport]:
    """Round trips of both coboundary solvers, the skew certificate and the Heisenberg case."""
    rng = np.random.default_rng(config.seed)
    tol = _tol(config, COBOUNDARY_TOL)
    n = 2
    pi0_samples = [
        {"degree": PI0_DEGREE, "_h1": _random_primitive(rng, n, 2, PI0_DEGREE, 2, 8)}
        for _ in range(SOLVER_SAMPLES)
    ]

    def pi0(s: Sample) -> Evaluation:
        h = delta0(s["_h1"], n)
        result = coboundary_solve_pi0(h, n, s["degree"])
        if not result.success:
            return float("inf"), {"degree": result.degree}
        return (delta0(result.primitive, n) - h).max_abs_coefficient(), {}

    so3 = resolve_structure(lie_spec="so3")
    S = generating_function_for(so3, None)
    graded_samples = [
        {"degree": GRADED_DEGREE, "_h1": _random_primitive(rng, 3, 2, GRADED_DEGREE, 1, 4)}
        for _ in range(SOLVER_SAMPLES)
    ]
    weights = [1] * 6 + [0] * 3

    def graded(s: Sample) -> Evaluation:
        degree = s["degree"]
        h = additive_delta_polynomial(
            s["_h1"], S.polynomial.truncated(weights, degree + 1), 3, degree
        )
        blocks = {k: h.homogeneous(weights, k) for k in range(2, degree + 1)}
        result = graded_coboundary_solve(blocks, S, degree)
        return result.residual, {}

    var = [Polynomial.variable(3 * n, v) for v in range(3 * n)]
    skew = var[4] * (var[0] * var[3] - var[1] * var[2])

    def certificate(s: Sample) -> Evaluation:
        result = coboundary_solve_pi0(skew, n, 2)
        detected = not result.success and result.degree == 2
        return float(not detected), {"residual": result.residual}

    heisenberg = resolve_structure(lie_spec="h3")
    S_h3 = generating_function_for(heisenberg, None)
    log_gamma = gamma_cochain(S_h3, heisenberg, DEFAULT_FLOW_ORDER).log()

    def heisenberg_case(s: Sample) -> Evaluation:
        blocks = graded_blocks_from_values(log_gamma, 3, s["degree"], radius=HEISENBERG_RADIUS,
                                           seed=config.seed)
        fitted = max(block.max_abs_coefficient() for block in blocks.values())
        # coefficients below the tolerance are value noise
        cleaned = {k: Polynomial(block.num_vars, {e: v for e, v in block.terms.items()
                                                  if abs(v) > HEISENBERG_TOL})
                   for k, block in blocks.items()}
        result = graded_coboundary_solve(cleaned, S_h3, s["degree"])
        return max(fitted, result.primitive.max_abs_coefficient()), {"residual": result.residual}

    return [
        run_samples(CheckReport("coboundary_pi0", "zero", "delta0 primitive round trip", tol),
                    pi0_samples, pi0, config.threads),
        run_samples(CheckReport("coboundary_graded", "so3", "graded primitive round trip", tol),
                    graded_samples, graded, config.threads),
        run_samples(CheckReport("coboundary_certificate", "zero",
                                "skew cochains have no primitive", 0.0),
                    [{"case": "skew"}], certificate),
        run_samples(CheckReport("coboundary_heisenberg", "h3",
                                "ln gamma_S of h3 has the zero primitive", _tol(config, HEISENBERG_TOL)),
                    [{"degree": HEISENBERG_DEGREE}], heisenberg_case),
    ]


# Suites

def _each(structures: Sequence[StructureConfig], build) -> List[CheckReport]:
    reports = []
    for structure in structures:
        built = build(structure)
        reports.extend(built if isinstance(built, list) else [built])
    return reports


def suite_densities(config: RunConfig) -> List[CheckReport]:
    return density_reports(config)


def suite_realization(config: RunConfig) -> List[CheckReport]:
    return _each(_structures(config, REALIZATION_STRUCTURES),
                 lambda s: realization_report(s, config))


def suite_sga(config: RunConfig) -> List[CheckReport]:
    reports = _each(_structures(config, SGA_STRUCTURES),
                    lambda s: [sga_report(s, config), *groupoid_reports(s, config)])
    if not config.has_structure:
        reports.append(series_match_report(config))
        reports.extend(_each(_structures(config, TAYLOR_STRUCTURES),
                             lambda s: taylor_report(s, config)))
    return reports


def suite_cocycle(config: RunConfig) -> List[CheckReport]:
    reports = _each(_structures(config, COCYCLE_STRUCTURES), lambda s: cocycle_reports(s, config))
    reports.append(vanest_classifier_report(config))
    return reports


def suite_split(config: RunConfig) -> List[CheckReport]:
    return _each(_algebras(config, SPLIT_ALGEBRAS), lambda s: split_reports(s, config))


def suite_duflo(config: RunConfig) -> List[CheckReport]:
    return _each(_algebras(config, DUFLO_ALGEBRAS), lambda s: duflo_reports(s, config))


def suite_star(config: RunConfig) -> List[CheckReport]:
    return _each(_algebras(config, DUFLO_ALGEBRAS), lambda s: star_reports(s, config))


def suite_solver(config: RunConfig) -> List[CheckReport]:
    return solver_reports(config)


SUITES: Dict[str, Callable[[RunConfig], List[CheckReport]]] = {
    "densities": suite_densities,
    "realization": suite_realization,
    "sga": suite_sga,
    "cocycle": suite_cocycle,
    "split": suite_split,
    "duflo": suite_duflo,
    "star": suite_star,
    "solver": suite_solver,
}


def run_suite(name: str, config: RunConfig) -> List[CheckReport]:
    """
    Run a named suite.

    Args:
        name: all or one of the SUITES keys
        config: Run configuration

    Returns:
        Reports in suite order

    Raises:
        UnknownSuiteError: If the name is not a suite
    """
    if name == "all":
        reports = []
        for suite in SUITES.values():
            reports.extend(suite(config))
        return reports
    if name not in SUITES:
        raise UnknownSuiteError(f"unknown suite '{name}', expected all or one of {sorted(SUITES)}")
    return SUITES[name](config)
