"""
Experiment runner: one validated ExperimentConfig in, one report out.

Every experiment kind maps to a handler that builds the law and sets from
the configuration, calls the verification functions and collects their
verdicts. Exact finite-chain residuals are reported as verdicts too, so a
report always has the same shape.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from closed_form.densities import (
    DensityOnGroup,
    first_moment_check,
    lambda_entr_density,
    lambda_exit_density,
    pi_density,
    pi_minus_density,
    pi_plus_density,
)
from config import CYCLE_MAX_STEPS, DUMP_LIMIT, MAX_STEPS, MOMENT_REL_TOL
from evals.crossings import TREND_HORIZONS, clt_levelcrossings, clt_trend, lln_overshoots, perkins_sum
from evals.hopf import hopf_ratio_test
from evals.invariance import ChainKind, invariance_propagation
from evals.occupation import OccupationVariant, StartKind, occupation_identity, upcrossing_expectation
from evals.summary import TestVerdict, relative_error
from finite_chains.kernels import FiniteChain
from finite_chains.suite import check_chain, run_finite_suite, torus_box, torus_entrance_check
from finite_chains.verify import (
    IdentityReport,
    guarded,
    verify_bijection,
    verify_duality,
    verify_kac,
    verify_product_reduction,
)
from increments.laws import IncrementLaw, law_from_spec
from increments.rng import RngState
from walks.dump import entrances_frame, events_frame, path_frame
from walks.engine import crossings, entrance_exit_events, walk_stream
from walks.sets import SetSpec
from utils.errors import ConfigurationError
from utils.experiment_config import ExperimentConfig, ExperimentKind, GridConfig
from utils.reports import build_report

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = (0.5, 1.0, 2.0, 5.0)

# Experiment catalog: kind -> the claim it verifies
EXPERIMENT_CATALOG: Tuple[Tuple[ExperimentKind, str], ...] = (
    (ExperimentKind.INVARIANCE,
     "π+, π−, π, normalized λ_A^entr and the undershoot law are invariant for O, O↓, 𝒪, Y^{→A} and U"),
    (ExperimentKind.LLN, "(1/n) Σ_{k≤n} |𝒪_k| → σ²/(2E|X1|) from any start"),
    (ExperimentKind.CLT, "L_n/√n ⇒ law with CDF 2Φ(σy/(2E|X1|))−1"),
    (ExperimentKind.CLT_TREND, "KS distance of L_n/√n to its limit does not grow along n = 10^3, 10^4, 10^5"),
    (ExperimentKind.PERKINS, "n^{-1/2} Σ_{k≤L_n} |O_k| ⇒ σ|N(0,1)|"),
    (ExperimentKind.OCCUPATION, "E_{π+} Σ_{k<T} 1_B(S_k) = c1·λ(B), also via π− and 2·π"),
    (ExperimentKind.UPCROSSING, "E_{π±} L_T↑(a) = 1 for every level a; closed forms from 0"),
    (ExperimentKind.HOPF, "entrance counts in B1 and B2 have ratio λ_A^entr(B1)/λ_A^entr(B2)"),
    (ExperimentKind.FIRST_MOMENT, "∫|y| π(dy) = σ²/(2E|X1|) by moments, tail integrals and quadrature"),
    (ExperimentKind.FINITE_SUITE, "all exact finite-chain identities on seeded random irreducible chains"),
    (ExperimentKind.FINITE_CHAIN, "all exact finite-chain identities on one given chain"),
    (ExperimentKind.TORUS, "μ_A^entr(x) = P(X1 ∈ x − A^c)·μ(x) on the discrete torus"),
    (ExperimentKind.KAC, "occupation before return (or from entrance) lifts μ_A (or μ_A^entr) back to μ"),
    (ExperimentKind.DUALITY, "exit chain of Y from A^c = time reversal of the entrance chain of Ŷ into A^c"),
    (ExperimentKind.BIJECTION, "invariant measures of the induced chain lift to multiples of μ"),
    (ExperimentKind.PRODUCT_REDUCTION, "pairs (Y_k, Y_{k+1}) at crossings have invariant law μ(x)P(x,y)"),
)

DENSITIES: Dict[str, Callable] = {
    "pi_plus": lambda law, A: pi_plus_density(law),
    "pi_minus": lambda law, A: pi_minus_density(law),
    "pi": lambda law, A: pi_density(law),
    "entrance": lambda law, A: lambda_entr_density(law, A),
    "exit": lambda law, A: lambda_exit_density(law, A),
}


def list_experiments() -> List[Dict[str, str]]:
    """Every experiment kind with the claim it verifies, in catalog order."""
    return [{"experiment": kind.value, "claim": claim} for kind, claim in EXPERIMENT_CATALOG]


@dataclass
class RunOutcome:
    """Report plus the tables an experiment produced."""

    report: Dict
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.report["verdicts"])

    @property
    def failed(self) -> List[str]:
        return [v["name"] for v in self.report["verdicts"] if not v["passed"]]


def identity_verdicts(report: IdentityReport, seed: int, sample_size: int) -> List[TestVerdict]:
    """One verdict per residual of an exact identity report."""
    if report.error:
        return [TestVerdict(name=report.name, statistic="error", value=math.inf, threshold=0.0,
                            sample_size=sample_size, seed=seed, streams=0, details={"error": report.error})]
    if report.skipped:
        return [TestVerdict(name=report.name, statistic="skipped", value=0.0, threshold=0.0,
                            sample_size=sample_size, seed=seed, streams=0, asserted=False,
                            details={"skipped": report.skipped})]
    return [
        TestVerdict(name=f"{report.name}.{key}", statistic="residual", value=value,
                    threshold=report.tolerances[key], sample_size=sample_size, seed=seed, streams=0,
                    details=dict(report.info))
        for key, value in report.residuals.items()
    ]


def density_frame(density: DensityOnGroup, grid: GridConfig) -> pd.DataFrame:
    """(x, density) on a grid; lattice densities are evaluated at the lattice points of [start, stop]."""
    if grid.stop < grid.start:
        raise ConfigurationError("grid.stop must not be below grid.start", field="grid.stop")
    if density.is_lattice:
        h = density.lattice_span
        ks = np.arange(math.ceil(grid.start / h - 1e-9), math.floor(grid.stop / h + 1e-9) + 1)
        return density.to_frame(ks * h)
    return density.to_frame(np.linspace(grid.start, grid.stop, grid.num))


class ExperimentRunner:
    """
    Run one configured experiment.

    Example:
        runner = ExperimentRunner(load_config("experiments/clt_laplace.json"))
        outcome = runner.run()
        print(outcome.passed)
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.handlers: Dict[ExperimentKind, Callable[[], Tuple[List[TestVerdict], Dict, Dict]]] = {
            ExperimentKind.INVARIANCE: self._invariance,
            ExperimentKind.LLN: self._lln,
            ExperimentKind.CLT: self._clt,
            ExperimentKind.CLT_TREND: self._clt_trend,
            ExperimentKind.PERKINS: self._perkins,
            ExperimentKind.OCCUPATION: self._occupation,
            ExperimentKind.UPCROSSING: self._upcrossing,
            ExperimentKind.HOPF: self._hopf,
            ExperimentKind.FIRST_MOMENT: self._first_moment,
            ExperimentKind.FINITE_SUITE: self._finite_suite,
            ExperimentKind.FINITE_CHAIN: self._finite_chain,
            ExperimentKind.TORUS: self._torus,
            ExperimentKind.KAC: lambda: self._single_identity(verify_kac, with_mu=True),
            ExperimentKind.DUALITY: lambda: self._single_identity(verify_duality, with_mu=True),
            ExperimentKind.BIJECTION: lambda: self._single_identity(verify_bijection, with_mu=False),
            ExperimentKind.PRODUCT_REDUCTION: lambda: self._single_identity(verify_product_reduction, with_mu=True),
        }

    def run(self) -> RunOutcome:
        """
        Execute the experiment.

        Returns:
            RunOutcome with the report {experiment, seed, verdicts, runtime_ms, ...}
            and the CSV-ready frames (ECDF tables, suite table, dumps)

        Raises:
            ConfigurationError, CapabilityError, DomainError: before any sampling
        """
        cfg = self.config
        logger.info("running %s (seed %d, %d threads)", cfg.label, cfg.seed, cfg.threads)
        started = time.perf_counter()
        verdicts, frames, extra = self.handlers[cfg.experiment]()
        runtime_ms = (time.perf_counter() - started) * 1000.0

        for i, verdict in enumerate(verdicts):
            if verdict.statistic in cfg.thresholds:
                verdict.threshold = cfg.thresholds[verdict.statistic]
            if verdict.frame is not None:
                frames[f"ecdf_{i}"] = verdict.frame
        if cfg.output.dump:
            frames.update(self._dumps())

        report = build_report(cfg.experiment.value, cfg.seed, [v.to_dict() for v in verdicts], runtime_ms,
                              extra={"name": cfg.label, "threads": cfg.threads, **extra})
        outcome = RunOutcome(report, frames)
        logger.info("%s finished in %.1f ms: %d verdicts, %d failed",
                    cfg.label, runtime_ms, len(verdicts), len(outcome.failed))
        return outcome

    # ------------------------------------------------------------------ #
    # Inputs
    # ------------------------------------------------------------------ #
    def law(self) -> IncrementLaw:
        if self.config.law is None:
            raise ConfigurationError(f"{self.config.experiment.value} needs a law", field="law")
        return law_from_spec(self.config.law)

    def set_of(self, key: str, required: bool = True) -> Optional[SetSpec]:
        spec = getattr(self.config, key)
        if spec is None:
            if required:
                raise ConfigurationError(f"{self.config.experiment.value} needs a set", field=key)
            return None
        try:
            return SetSpec.from_spec(spec)
        except ConfigurationError as e:
            raise ConfigurationError(str(e), field=key) from e
        except KeyError as e:
            raise ConfigurationError(f"missing key {e.args[0]!r}", field=key) from e

    def chain(self) -> FiniteChain:
        cfg = self.config
        if cfg.chain_data is not None:
            chain = FiniteChain.from_dict(cfg.chain_data, name=cfg.label)
        elif cfg.chain_file is not None:
            try:
                chain = FiniteChain.load(cfg.chain_file)
            except OSError as e:
                raise ConfigurationError(f"cannot read {cfg.chain_file}: {e.strerror}", field="chain_file") from e
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"{cfg.chain_file} is not valid JSON: {e.msg} (line {e.lineno})",
                                         field="chain_file") from e
        else:
            raise ConfigurationError("a finite-chain experiment needs chain_file or chain_data", field="chain_file")
        if chain.A is None:
            raise ConfigurationError("the chain needs a subset A", field="chain.A")
        return chain

    def _common(self) -> Dict:
        return {"replicas": self.config.replicas, "threads": self.config.threads}

    # ------------------------------------------------------------------ #
    # Sampled experiments
    # ------------------------------------------------------------------ #
    def _invariance(self):
        cfg = self.config
        chain = ChainKind(cfg.chain or ChainKind.O.value)
        A = self.set_of("A", required=chain is ChainKind.ENTRANCE)
        verdicts = invariance_propagation(self.law(), chain, cfg.steps, cfg.N or 10**5, cfg.seed, A=A,
                                          max_steps=cfg.max_steps or CYCLE_MAX_STEPS, **self._common())
        return verdicts, {}, {}

    def _lln(self):
        cfg = self.config
        law = self.law()
        verdicts = [
            lln_overshoots(law, cfg.n_crossings or 10**5, cfg.seed + i, start,
                           max_steps=cfg.max_steps or MAX_STEPS, **self._common())
            for i, start in enumerate(cfg.starts)
        ]
        return verdicts, {}, {}

    def _clt(self):
        cfg = self.config
        law = self.law()
        verdicts = [
            clt_levelcrossings(law, cfg.n or 10**5, cfg.M or 2 * 10**4, cfg.seed + i, start, **self._common())
            for i, start in enumerate(cfg.starts)
        ]
        return verdicts, {}, {}

    def _clt_trend(self):
        cfg = self.config
        verdict = clt_trend(self.law(), cfg.horizons or TREND_HORIZONS, cfg.M or 2 * 10**4, cfg.seed,
                            **self._common())
        return [verdict], {}, {}

    def _perkins(self):
        cfg = self.config
        verdict = perkins_sum(self.law(), cfg.n or 10**5, cfg.M or 2 * 10**4, cfg.seed, **self._common())
        return [verdict], {}, {}

    def _occupation(self):
        cfg = self.config
        law, B = self.law(), self.set_of("B")
        try:
            variants = [OccupationVariant(v) for v in (cfg.variants or [OccupationVariant.PLUS.value])]
        except ValueError as e:
            raise ConfigurationError(str(e), field="variants") from e
        verdicts = [
            occupation_identity(law, B, cfg.N_cycles or 10**6, cfg.seed + i, variant,
                                max_steps=cfg.max_steps or CYCLE_MAX_STEPS, **self._common())
            for i, variant in enumerate(variants)
        ]
        return verdicts, {}, {}

    def _upcrossing(self):
        cfg = self.config
        law = self.law()
        try:
            start = StartKind(cfg.start or StartKind.PI_PLUS.value)
        except ValueError as e:
            raise ConfigurationError(str(e), field="start") from e
        verdicts = [
            upcrossing_expectation(law, a, start, cfg.N or 10**6, cfg.seed + i,
                                   max_steps=cfg.max_steps or CYCLE_MAX_STEPS, **self._common())
            for i, a in enumerate(cfg.levels or DEFAULT_LEVELS)
        ]
        return verdicts, {}, {}

    def _hopf(self):
        cfg = self.config
        law = self.law()
        start = cfg.starts[0] if law.dimension == 1 else None
        verdict = hopf_ratio_test(law, self.set_of("A"), self.set_of("B1"), self.set_of("B2"),
                                  cfg.n_events or 10**5, cfg.seed, start=start,
                                  max_steps=cfg.max_steps or MAX_STEPS, **self._common())
        return [verdict], {}, {}

    def _first_moment(self):
        law = self.law()
        routes = first_moment_check(law)
        target = routes["moment_formula"]
        verdicts = [
            TestVerdict(name=f"first_moment.{route}", statistic="relative_error",
                        value=relative_error(routes[route], target), threshold=MOMENT_REL_TOL,
                        sample_size=0, seed=self.config.seed, streams=0, target="σ²/(2E|X1|)",
                        details={"estimate": routes[route], "target_value": target})
            for route in ("integral_forms", "direct")
        ]
        return verdicts, {}, {"routes": routes}

    # ------------------------------------------------------------------ #
    # Exact finite chains
    # ------------------------------------------------------------------ #
    def _finite_suite(self):
        cfg = self.config
        suite = cfg.suite
        if suite.max_states < suite.min_states:
            raise ConfigurationError("max_states must not be below min_states", field="suite.max_states")
        result = run_finite_suite(suite.count, cfg.seed, cfg.threads, (suite.min_states, suite.max_states),
                                  suite.product_max)
        verdicts = [
            TestVerdict(name=key, statistic="max_residual", value=value,
                        threshold=result.tolerances.get(key, math.inf),
                        sample_size=suite.count, seed=cfg.seed, streams=suite.count)
            for key, value in result.maxima.items()
        ]
        verdicts.append(TestVerdict(name="chains_failed", statistic="count", value=len(result.failures),
                                    threshold=0.0, sample_size=suite.count, seed=cfg.seed,
                                    streams=suite.count, details={"failures": result.failures}))
        summary = result.to_dict()
        summary.pop("runtime_ms")
        return verdicts, {"suite": result.table}, {"suite": summary}

    def _finite_chain(self):
        chain = self.chain()
        verdicts = []
        for report in check_chain(chain, product_max=chain.n).values():
            verdicts.extend(identity_verdicts(report, self.config.seed, chain.n))
        return verdicts, {}, {"chain": {"name": chain.name, "states": chain.n, "size_A": int(chain.A.sum())}}

    def _single_identity(self, verifier: Callable, with_mu: bool):
        chain = self.chain()
        name = verifier.__name__.replace("verify_", "")
        if with_mu:
            report = guarded(name, verifier, chain.P, None, chain.A)
        else:
            report = guarded(name, verifier, chain.P, chain.A)
        return identity_verdicts(report, self.config.seed, chain.n), {}, {"chain": chain.name}

    def _torus(self):
        torus = self.config.torus
        if torus is None:
            raise ConfigurationError("the torus experiment needs a torus block", field="torus")
        if torus.A is not None:
            A = torus.A
        elif torus.box_lower is not None and torus.box_upper is not None:
            A = torus_box(torus.d, torus.m, torus.box_lower, torus.box_upper)
        else:
            raise ConfigurationError("give torus.A or torus.box_lower/box_upper", field="torus.A")
        report = torus_entrance_check(torus.d, torus.m, torus.pmf, A)
        return identity_verdicts(report, self.config.seed, torus.m ** torus.d), {}, {}

    # ------------------------------------------------------------------ #
    # Dumps
    # ------------------------------------------------------------------ #
    def _dumps(self) -> Dict[str, pd.DataFrame]:
        """
        First DUMP_LIMIT positions of replica 0's stream and the events along
        them, for experiments with a law.
        """
        cfg = self.config
        if cfg.law is None:
            return {}
        law = self.law()
        start = cfg.starts[0] if law.dimension == 1 else np.zeros(law.dimension)
        positions = walk_stream(law, start, RngState(cfg.seed, 0)).take(DUMP_LIMIT)
        frames = {"path": path_frame(positions)}
        steps = len(positions) - 1
        if cfg.experiment is ExperimentKind.HOPF:
            batch = entrance_exit_events(positions, self.set_of("A"), DUMP_LIMIT, steps)
            frames["entrances"] = entrances_frame(batch)
        elif law.dimension == 1:
            frames["events"] = events_frame(crossings(positions, DUMP_LIMIT, steps))
        return frames


def dump_density(config: ExperimentConfig) -> pd.DataFrame:
    """(x, density) table of the configured closed-form density on the configured grid."""
    if config.density is None:
        raise ConfigurationError("dump-density needs a density name", field="density")
    runner = ExperimentRunner(config)
    law = runner.law()
    A = runner.set_of("A", required=config.density in ("entrance", "exit"))
    grid = config.grid or GridConfig(start=-10.0, stop=10.0)
    return density_frame(DENSITIES[config.density](law, A), grid)


def output_paths(config: ExperimentConfig, frames: Dict[str, pd.DataFrame]) -> Dict[str, Path]:
    """CSV path of every frame under the configured output directory."""
    out = Path(config.output.dir)
    return {key: out / f"{config.label}_{key}.csv" for key in frames}


# Example usage
if __name__ == "__main__":
    from utils.experiment_config import parse_config

    for row in list_experiments():
        print(f"{row['experiment']:>18} ↦ {row['claim']}")

    config = parse_config({"experiment": "first_moment", "law": {"family": "laplace_unit"}})
    outcome = ExperimentRunner(config).run()
    print(f"\nfirst_moment passed: {outcome.passed}")
