"""
Command line for the pseudo-Riemannian harmonicity lab
Runs the catalog battery, solves the Clifford cubic, checks charts, builds B-scrolls
and lists the Lorentz-3 solutions
"""
import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from bscroll import (KSpecError, bscroll_checks, integrate, make_system,
                     surface_samples)
from catalog import (TRACELESS_A2, TRIHARMONIC_A2, CatalogSurface, ConstraintViolation,
                     dual, oracle_sweep, table_entry)
from chart_spec import ChartSpecError, load_chart_spec
from config import lab_config
from harmonicity import (NOT_HARMONIC, PROPER, MINIMAL, HarmonicityInput, check_chart,
                         classify, clifford_residual, input_from_report,
                         lorentz3_solutions, p3_eval, p3_roots)
from immersion import chart_normal, shape_report
from reports import (REPORT_DOC, FORMATS, SURFACE_COLUMNS, TRAJECTORY_COLUMNS,
                     build_report, export_tables, surface_rows, trajectory_rows,
                     write_report)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

ORACLE_TOL = 1e-6
NUMERIC_TOL = 1e-6
DRIFT_LIMIT = 1e-8
NULL_CURVE_LIMIT = 1e-5
ODE_IDENTITY_LIMIT = 1e-5
TRACE_LIMIT = 1e-5

SCENARIO_COLUMNS = ['r', 'label', 'family', 'expected', 'closed_form_verdict', 'numeric_verdict',
                    'oracle_passed', 'max_f_error', 'max_trA2_error', 'max_spectrum_error', 'passed']
P3_COLUMNS = ['root', 'admissible', 'minimal', 'p3_residual', 'clifford_residual']
CHECK_COLUMNS = ['chart', 'points', 'f_spread', 'trA2_spread', 'cmc', 'verdict',
                 'max_scalar_residual', 'max_vector_residual', 'oracle_passed']
LORENTZ3_COLUMNS = ['case', 'description', 'ambient', 'verdict', 'residual_main', 'passed']
BSCROLL_COLUMNS = ['lambda', 'k_spec', 'r', 'verdict', 'gauss_curvature', 'max_pairing_drift',
                   'null_curve_residual', 'ode_identity_residual', 'numeric_trA2_error',
                   'isoparametric', 'needs_review', 'passed']


# ============================================
# Catalog scenarios
# ============================================

@dataclass(frozen=True)
class Scenario:
    """A catalog instance with the verdict it must produce at order r"""
    label: str
    family: str
    params: Dict[str, float]
    expected: str
    dual: bool = False

    def build(self) -> CatalogSurface:
        surface = table_entry(self.family, self.params)
        return dual(surface) if self.dual else surface


def catalog_scenarios(r: int) -> List[Scenario]:
    """Scenario table at order r"""
    scenarios = []
    for m, t in ((2, 1), (3, 1), (3, 2)):
        scenarios.append(Scenario(f"S^{m}_{t}({r})", 'sphere', {'m': m, 't': t, 'c': float(r)}, PROPER))
    for c in (1.5, 2.0, float(r + 1)):
        if c == r:
            continue
        scenarios.append(Scenario(f"S^2_1({c:g})", 'sphere', {'m': 2, 't': 1, 'c': c}, NOT_HARMONIC))
    scenarios.extend([
        Scenario("S^2_0(0.5)", 'low_index_sphere', {'m': 2, 't': 1, 'c': 0.5}, NOT_HARMONIC),
        Scenario("R^2_0", 'flat_slice', {'m': 2, 't': 1}, NOT_HARMONIC),
        Scenario("H^2_0(-1)", 'hyperbolic_slice', {'m': 2, 't': 1, 'c': -1.0}, NOT_HARMONIC),
        Scenario("S^1(2) x S^1_1(2)", 'sphere_product', {'m': 2, 't': 1, 'k': 1, 'l': 0, 'c': 2.0}, MINIMAL),
        Scenario("S^1(3) x S^1_1(1.5)", 'sphere_product', {'m': 2, 't': 1, 'k': 1, 'l': 0, 'c': 3.0},
                 NOT_HARMONIC),
        Scenario("S^1(0.5) x H^1(-1)", 'sphere_hyperbolic_product',
                 {'m': 2, 't': 1, 'k': 1, 'l': 0, 'c': 0.5}, NOT_HARMONIC),
        Scenario(f"dual S^2_2({r})", 'sphere', {'m': 2, 't': 2, 'c': float(r)}, PROPER, dual=True),
        Scenario("complex circle trA2 = 0", 'complex_circle_a2', {'a2': TRACELESS_A2},
                 PROPER if r >= 3 else NOT_HARMONIC),
        Scenario("complex circle trA2 = -1", 'complex_circle_a2', {'a2': TRIHARMONIC_A2},
                 PROPER if r == 3 else NOT_HARMONIC),
        Scenario(f"B-scroll lambda = sqrt({r - 1})", 'bscroll', {'lambda': math.sqrt(r - 1.0)}, PROPER),
    ])
    if r >= 5:
        for root in p3_roots(2, 1, r):
            if root.admissible and not root.minimal:
                params = {'m': 2, 't': 1, 'k': 1, 'l': 0, 'c': root.root}
                scenarios.append(Scenario(f"S^1({root.root:.6g}) x S^1_1", 'sphere_product', params, PROPER))
                scenarios.append(Scenario(f"dual S^1_1({root.root:.6g}) x S^1_1", 'sphere_product',
                                          {**params, 't': 2, 'l': 1}, PROPER, dual=True))
    return scenarios


def run_scenario(scenario: Scenario, r: int, tol: float) -> dict:
    """Oracle sweep, closed-form verdict and numeric verdict of one scenario"""
    surface = scenario.build()
    closed = surface.closed_form
    closed_input = HarmonicityInput(m=closed.m, c=closed.ambient_curvature, epsilon=closed.epsilon,
                                    alpha=closed.f, trA2=closed.trA2, r=r)
    closed_verdict = classify(closed_input, tol).verdict

    center = shape_report(surface.chart, surface.chart.center())
    numeric = classify(input_from_report(center, surface.chart.ambient.curvature, r), NUMERIC_TOL,
                       provenance='sampled')

    sweep = oracle_sweep(surface, count=25, tol=ORACLE_TOL)
    oracle_passed = all(item['passed'] for item in sweep)
    passed = oracle_passed and closed_verdict == scenario.expected and numeric.verdict == scenario.expected
    return {
        'r': r,
        'label': scenario.label,
        'family': surface.family,
        'params': surface.params,
        'expected': scenario.expected,
        'closed_form_verdict': closed_verdict,
        'numeric_verdict': numeric.verdict,
        'residual_main': numeric.residual_main,
        'oracle_passed': oracle_passed,
        'max_f_error': max(item['f_error'] for item in sweep),
        'max_trA2_error': max(item['trA2_error'] for item in sweep),
        'max_spectrum_error': max(item['spectrum_error'] for item in sweep),
        'passed': passed,
    }


# ============================================
# Commands
# ============================================

@dataclass
class CommandResult:
    """Report document plus tables for the delimited and workbook exports"""
    report: dict
    tables: Dict[str, tuple] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.report['passed'] else EXIT_FAILURE


def cmd_verify_catalog(r_list: Sequence[int], tol: Optional[float] = None,
                       workers: Optional[int] = None) -> CommandResult:
    """Run every catalog scenario for each r and compare with the expected verdicts"""
    tol = lab_config.tol if tol is None else tol
    workers = lab_config.workers if workers is None else workers
    jobs = [(scenario, r) for r in r_list for scenario in catalog_scenarios(r)]
    print(f"Verifying {len(jobs)} catalog scenarios for r in {list(r_list)}...")

    results = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_job = {
            executor.submit(run_scenario, scenario, r, tol): (scenario, r)
            for scenario, r in jobs
        }
        for future in as_completed(future_to_job):
            scenario, r = future_to_job[future]
            try:
                results.append(future.result())
            except Exception as e:
                logger.error(f"Scenario {scenario.label} (r={r}) failed: {e}")
                results.append({'r': r, 'label': scenario.label, 'family': scenario.family,
                                'expected': scenario.expected, 'error': str(e), 'passed': False})

    results.sort(key=lambda item: (item['r'], item['label']))
    for item in results:
        mark = '✓' if item['passed'] else '✗'
        got = item.get('numeric_verdict', item.get('error'))
        print(f"{mark} r={item['r']} {item['label']}: {got} (expected {item['expected']})")

    failures = sum(1 for item in results if not item['passed'])
    print(f"\n{len(results) - failures}/{len(results)} scenarios passed")
    report = build_report('verify-catalog', results, {'r': list(r_list), 'tol': tol}, failures == 0)
    return CommandResult(report, {'scenarios': (SCENARIO_COLUMNS, results)})


def cmd_p3(m: int, k: int, r: int, tol: Optional[float] = None) -> CommandResult:
    """Real roots of the Clifford cubic with admissibility and minimality flags"""
    tol = lab_config.tol if tol is None else tol
    rows = []
    for root in p3_roots(m, k, r, tol):
        row = root.to_dict()
        row['p3_residual'] = abs(p3_eval(root.root, m, k, r))
        row['clifford_residual'] = clifford_residual(m, k, root.root, r) if root.admissible else None
        rows.append(row)
        flags = ', '.join(name for name in ('admissible', 'minimal') if row[name]) or 'not admissible'
        print(f"  c = {root.root:.12g}  ({flags})")
    proper = [row['root'] for row in rows if row['admissible'] and not row['minimal']]
    print(f"✓ {len(rows)} real root(s); proper tori at c in {[round(c, 12) for c in proper]}")
    report = build_report('p3', rows, {'m': m, 'k': k, 'r': r, 'tol': tol}, True)
    return CommandResult(report, {'roots': (P3_COLUMNS, rows)})


def cmd_check(chart_path: str, r: int, grid: int, tol: Optional[float] = None) -> CommandResult:
    """Sample a chart document, classify it and, for catalog charts, compare with the closed form"""
    tol = NUMERIC_TOL if tol is None else tol
    spec = load_chart_spec(chart_path)
    chart = spec.chart
    points = chart.grid(grid)
    check = check_chart(chart, r, points, tol=tol, orientation=spec.orientation)
    result = check.to_dict()

    oracle_passed = None
    if spec.surface is not None:
        normal = chart_normal(chart, orientation=spec.orientation)
        comparisons = [spec.surface.compare(shape_report(chart, u, reference_normal=normal), ORACLE_TOL)
                       for u in points]
        oracle_passed = all(item['passed'] for item in comparisons)
        result['oracle'] = {
            'passed': oracle_passed,
            'max_f_error': max(item['f_error'] for item in comparisons),
            'max_trA2_error': max(item['trA2_error'] for item in comparisons),
        }
    passed = check.cmc and oracle_passed is not False

    verdict = check.report.verdict if check.report else 'not classified'
    print(f"{'✓' if passed else '✗'} {chart.name}: {verdict} "
          f"(f spread {check.f_spread:.2e}, trA2 spread {check.trA2_spread:.2e})")
    if check.field_residuals:
        print(f"  triharmonic residuals: scalar {result['max_scalar_residual']:.3e}, "
              f"vector {result['max_vector_residual']:.3e}")

    row = dict(result)
    row['verdict'] = verdict
    row['oracle_passed'] = oracle_passed
    report = build_report('check', result, {'chart': os.path.basename(chart_path), 'r': r, 'grid': grid,
                                            'tol': tol}, passed)
    return CommandResult(report, {'check': (CHECK_COLUMNS, [row])})


def cmd_bscroll(lam: float, k_spec: str, r: int, s_max: float, step: float,
                u_values: Sequence[float], both_directions: bool = False,
                tol: Optional[float] = None) -> CommandResult:
    """Integrate the Cartan frame, sample the B-scroll and check its invariants"""
    tol = NUMERIC_TOL if tol is None else tol
    system = make_system(lam, k_spec)
    traj = integrate(system, s_max, step, both_directions=both_directions)
    checks = bscroll_checks(traj, system, r, tol=tol)
    samples = surface_samples(traj, u_values)

    numeric_ok = (checks.max_pairing_drift <= DRIFT_LIMIT and checks.null_curve_residual <= NULL_CURVE_LIMIT
                  and checks.ode_identity_residual <= ODE_IDENTITY_LIMIT
                  and checks.numeric_trA2_error <= TRACE_LIMIT and not checks.needs_review)
    result = checks.to_dict()
    result['surface_samples'] = len(samples)
    result['max_membership_residual'] = max(sample.membership_residual for sample in samples)

    mark = '✓' if numeric_ok else '✗'
    print(f"{mark} B-scroll lambda={lam:g}, k={k_spec}: {checks.harmonicity.verdict} at r={r}, "
          f"K = {checks.gauss_curvature:.12g}")
    print(f"  pairing drift {checks.max_pairing_drift:.2e}, null curve {checks.null_curve_residual:.2e}, "
          f"frame identity {checks.ode_identity_residual:.2e}")
    if checks.isoparametric is None:
        print("  isoparametric: undetermined (k has suspected tangential zeros)")

    summary = dict(result, verdict=checks.harmonicity.verdict, passed=numeric_ok)
    arguments = {'lambda': lam, 'k_spec': k_spec, 'r': r, 's_max': s_max, 'step': step,
                 'u_values': list(u_values), 'both_directions': both_directions, 'tol': tol}
    report = build_report('bscroll', result, arguments, numeric_ok)
    tables = {
        'summary': (BSCROLL_COLUMNS, [summary]),
        'trajectory': (TRAJECTORY_COLUMNS, trajectory_rows(traj)),
        'surface': (SURFACE_COLUMNS, surface_rows(samples)),
    }
    return CommandResult(report, tables)


def cmd_lorentz3(r: int, tol: Optional[float] = None, workers: Optional[int] = None) -> CommandResult:
    """Instantiate and re-verify the r-harmonic surfaces of S^3_1 and H^3_1"""
    tol = NUMERIC_TOL if tol is None else tol
    workers = lab_config.workers if workers is None else workers
    solutions = lorentz3_solutions(r)

    rows = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_solution = {executor.submit(solution.verify, r, tol): solution for solution in solutions}
        for future in as_completed(future_to_solution):
            solution = future_to_solution[future]
            row = solution.to_dict()
            try:
                verdict = future.result()
                row.update(verdict=verdict.verdict, residual_main=verdict.residual_main,
                           passed=verdict.verdict == PROPER)
            except Exception as e:
                logger.error(f"Case ({solution.case}) failed to verify: {e}")
                row.update(verdict=None, residual_main=None, passed=False, error=str(e))
            rows.append(row)

    rows.sort(key=lambda row: (row['case'], row['description']))
    for row in rows:
        print(f"{'✓' if row['passed'] else '✗'} ({row['case']}) {row['description']} in {row['ambient']}: "
              f"{row['verdict']}")
    passed = all(row['passed'] for row in rows)
    report = build_report('lorentz3', rows, {'r': r, 'tol': tol}, passed)
    return CommandResult(report, {'solutions': (LORENTZ3_COLUMNS, rows)})


# ============================================
# Argument parsing
# ============================================

def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--tol', type=float, default=None, help="Verdict tolerance override")
    common.add_argument('--out', default=None,
                        help=f"Output path (bare file names go under {lab_config.output_dir}/)")
    common.add_argument('--format', choices=FORMATS, default=REPORT_DOC, help="Output format")

    parser = argparse.ArgumentParser(description="Pseudo-Riemannian r-harmonic hypersurface lab")
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser('verify-catalog', parents=[common], help="Run the catalog verification battery")
    verify.add_argument('--r', type=int, nargs='+', default=[2, 3, 4, 5], help="Orders to verify")

    p3 = commands.add_parser('p3', parents=[common], help="Roots of the Clifford cubic")
    p3.add_argument('--m', type=int, required=True)
    p3.add_argument('--k', type=int, required=True)
    p3.add_argument('--r', type=int, required=True)

    check = commands.add_parser('check', parents=[common], help="Check a chart document")
    check.add_argument('chart', help="Chart document (JSON)")
    check.add_argument('--r', type=int, default=3)
    check.add_argument('--grid', type=int, default=5, help="Grid points per coordinate")

    scroll = commands.add_parser('bscroll', parents=[common], help="Integrate and check a B-scroll")
    scroll.add_argument('--lambda', dest='lam', type=float, required=True)
    scroll.add_argument('--k-spec', default='const:1', help="k(s) as const:v, poly:a0,a1,... or sin:amp,freq,phase")
    scroll.add_argument('--r', type=int, default=3)
    scroll.add_argument('--s-max', type=float, default=5.0)
    scroll.add_argument('--step', type=float, default=1e-3)
    scroll.add_argument('--u-values', type=_float_list, default=[-0.5, 0.0, 0.5])
    scroll.add_argument('--both-directions', action='store_true')

    lorentz = commands.add_parser('lorentz3', parents=[common], help="Lorentz-3 solution list")
    lorentz.add_argument('--r', type=int, required=True)
    return parser


def resolve_output(path: str) -> str:
    if os.path.dirname(path):
        return path
    return os.path.join(lab_config.output_dir, path)


def dispatch(args: argparse.Namespace) -> CommandResult:
    if args.command == 'verify-catalog':
        return cmd_verify_catalog(args.r, args.tol)
    if args.command == 'p3':
        return cmd_p3(args.m, args.k, args.r, args.tol)
    if args.command == 'check':
        return cmd_check(args.chart, args.r, args.grid, args.tol)
    if args.command == 'bscroll':
        return cmd_bscroll(args.lam, args.k_spec, args.r, args.s_max, args.step, args.u_values,
                           args.both_directions, args.tol)
    return cmd_lorentz3(args.r, args.tol)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code"""
    logging.basicConfig(level=getattr(logging, lab_config.log_level.upper(), logging.INFO),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    args = build_parser().parse_args(argv)

    try:
        result = dispatch(args)
    except (ChartSpecError, KSpecError, ConstraintViolation, ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"✗ Error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.exception(f"{args.command} failed")
        print(f"✗ Error: {e}")
        return EXIT_FAILURE

    if args.out:
        out = resolve_output(args.out)
        if args.format == REPORT_DOC:
            write_report(result.report, out)
            print(f"✓ Report written to {out}")
        else:
            for path in export_tables(result.tables, out, args.format):
                print(f"✓ Table written to {path}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
