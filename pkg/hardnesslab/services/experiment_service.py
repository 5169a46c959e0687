"""Runs one command end to end and assembles its report."""
import functools
import itertools
import logging
import subprocess
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy import stats

from hardnesslab.core.errors import ParameterError
from hardnesslab.core.rng import child_seed, point_rng, stream_id
from hardnesslab.core.stats import wilson
from hardnesslab.models.classifier import CnfFormula, Halfspace
from hardnesslab.models.label_cover import LabelCoverInstance, Labeling
from hardnesslab.repositories import ClassifierRepository, DatasetRepository, InstanceRepository, ReportRepository
from hardnesslab.schemas.params import GadgetParams
from hardnesslab.schemas.report import CheckResult, RunReport
from hardnesslab.schemas.run_config import RunConfig
from hardnesslab.services import anticonc, classify, critical_index, decode, gadget, labelcover, probe

logger = logging.getLogger("hardnesslab.experiments")

MARGINAL_Z_LIMIT = 5.0
SUITE_VECTORS = 200
SUITE_BLOCK_TRIALS = 20_000


@functools.lru_cache(maxsize=1)
def git_describe() -> str:
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty"], capture_output=True, text=True, timeout=10
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 and result.stdout.strip() else "unknown"


def _proportion_row(name: str, successes: int, n: int, bound: Optional[float] = None, passed=None, **details) -> CheckResult:
    estimate = wilson(successes, n)
    return CheckResult(
        name=name,
        estimate=estimate.estimate,
        ci95=estimate.ci95,
        bound=bound,
        passed=passed,
        trials=n,
        details=details,
    )


class ExperimentService:
    def __init__(
        self,
        instances: InstanceRepository,
        datasets: DatasetRepository,
        classifiers: ClassifierRepository,
        reports: ReportRepository,
    ):
        self.instances = instances
        self.datasets = datasets
        self.classifiers = classifiers
        self.reports = reports
        self._commands: Dict[str, Callable[[RunConfig], Tuple[List[CheckResult], Optional[GadgetParams]]]] = {
            "gen-instance": self.gen_instance,
            "derive-params": self.derive_params,
            "sample": self.sample,
            "verify-complete": self.verify_complete,
            "probe": self.probe,
            "critindex": self.critindex,
            "truncate": self.truncate,
            "anticonc": self.anticonc,
            "decode": self.decode,
            "lemma-suite": self.lemma_suite,
        }

    @property
    def commands(self) -> List[str]:
        return list(self._commands)

    # ── inputs ───────────────────────────────────────────────────────────────

    def resolve_params(self, config: RunConfig) -> GadgetParams:
        if config.params_path:
            return self.instances.load_params(config.params_path)
        spec = config.params
        params = gadget.derive_params(spec.zeta, spec.nu, spec.ell, spec.z)
        if spec.overrides:
            try:
                params = params.override(**spec.overrides)
            except ValidationError as exc:
                raise ParameterError(f"invalid parameter override: {exc.errors()[0]['msg']}") from exc
        return params

    def resolve_instance(self, config: RunConfig) -> Tuple[LabelCoverInstance, Optional[Labeling]]:
        if config.instance_path:
            instance = self.instances.load(config.instance_path)
            labeling = None
            if config.labeling_path:
                labeling = self.instances.load_labeling(config.labeling_path, instance)
            return instance, labeling
        spec = config.instance
        shape = (spec.num_vertices, spec.num_edges, spec.k, spec.M, spec.m, spec.d, config.seed)
        if spec.planted:
            return labelcover.build_planted_instance(*shape)
        return labelcover.build_random_instance(*shape), None

    def _sampling_inputs(self, config: RunConfig) -> Tuple[LabelCoverInstance, Optional[Labeling], GadgetParams]:
        instance, labeling = self.resolve_instance(config)
        params = self.resolve_params(config)
        if params.k != instance.k:
            raise ParameterError(f"params.k={params.k} does not match the instance's k={instance.k}")
        if config.edge >= len(instance.edges):
            raise ParameterError(f"edge {config.edge} does not exist; the instance has {len(instance.edges)}")
        return instance, labeling, params

    def _halfspaces(self, config: RunConfig) -> List[Halfspace]:
        if not config.coeffs_path:
            raise ParameterError(f"{config.command} needs --coeffs")
        return self.classifiers.load_bundle(config.coeffs_path)

    @staticmethod
    def _tau_K(config: RunConfig, params: GadgetParams) -> Tuple[float, int]:
        return (config.tau if config.tau is not None else params.tau, config.K if config.K is not None else params.K)

    def _sampler(self, config: RunConfig, instance: LabelCoverInstance, params: GadgetParams):
        if config.sampler == "basic":
            return gadget.BasicSampler(instance.M, instance.k)
        if config.sampler == "simplified":
            return gadget.SimplifiedSampler(instance.m, instance.d, params.k, params.Q)
        return gadget.GlobalSampler(instance, params)

    # ── commands ─────────────────────────────────────────────────────────────

    def gen_instance(self, config: RunConfig):
        instance, labeling = self.resolve_instance(config)
        results = [
            CheckResult(
                name="preimage_bound",
                estimate=instance.max_preimage_size(),
                bound=instance.d,
                passed=instance.max_preimage_size() <= instance.d,
            )
        ]
        pairs = list(itertools.combinations(range(instance.M), 2))
        rates = [
            labelcover.check_smoothness(instance, v, pairs).max_rate
            for v in range(instance.num_vertices)
            if instance.incident_edges(v)
        ]
        results.append(CheckResult(name="smoothness_max_rate", estimate=max(rates, default=0.0)))
        if labeling is not None:
            score = labelcover.evaluate_labeling(instance, labeling)
            results.append(
                CheckResult(name="planted_strong_frac", estimate=score.strong_frac, bound=1.0, passed=score.strong_frac == 1.0)
            )
        if config.out:
            if labeling is not None:
                self.instances.save_bundle(instance, labeling, config.out)
            else:
                self.instances.save(instance, config.out)
        return results, None

    def derive_params(self, config: RunConfig):
        params = self.resolve_params(config)
        if config.out:
            self.instances.save_params(params, config.out)
        row = CheckResult(
            name="params",
            estimate=params.zero_accept,
            bound=1.0,
            passed=params.marginals_matched or params.clamp_acceptance,
            details={"marginals_matched": params.marginals_matched},
        )
        return [row], params

    def sample(self, config: RunConfig):
        instance, _, params = self._sampling_inputs(config)
        sampler = self._sampler(config, instance, params)
        points = gadget.draw_points(sampler, config.n, config.seed, config.workers)
        if config.out:
            self.datasets.write(points, config.out, config.with_transcript)
        ones = sum(p.a for p in points)
        results = [_proportion_row("sample_label_one", ones, len(points), sampler=config.sampler)]
        return results, params

    def verify_complete(self, config: RunConfig):
        instance, labeling, params = self._sampling_inputs(config)
        if labeling is None:
            raise ParameterError("verify-complete needs a planted labeling (--labeling or a planted instance)")
        points = gadget.draw_points(gadget.GlobalSampler(instance, params), config.n, config.seed, config.workers, "verify")
        c1, c2 = classify.build_completeness_cnf(instance, labeling, params)
        both = CnfFormula((c1, c2))
        first = CnfFormula((c1,))
        correct = sum(both.evaluate(p) == p.a for p in points)
        correct_c1 = sum(first.evaluate(p) == p.a for p in points)
        c1_floor = 1.0 - params.zeta - 0.01
        results = [
            _proportion_row("completeness", correct, len(points), 1.0, correct == len(points)),
            _proportion_row("c1_accuracy", correct_c1, len(points), c1_floor, correct_c1 / len(points) >= c1_floor),
        ]
        if params.marginals_matched:
            marginals = gadget.marginals_of(points, gadget.edge_coordinates(instance, params))
            worst = max((abs(m.z) for m in marginals), default=0.0)
            results.append(
                CheckResult(
                    name="marginal_matching",
                    estimate=worst,
                    bound=MARGINAL_Z_LIMIT,
                    passed=worst <= MARGINAL_Z_LIMIT,
                    trials=len(points),
                    details={"coordinates": len(marginals)},
                )
            )
        else:
            results.append(
                CheckResult(name="marginal_matching", details={"skipped": "acceptance probability clamped"})
            )
        return results, params

    def probe(self, config: RunConfig):
        instance, _, params = self._sampling_inputs(config)
        sampler = self._sampler(config, instance, params)
        train_points = gadget.draw_points(sampler, config.train, config.seed, config.workers, "probe.train")
        test_points = gadget.draw_points(sampler, config.test, config.seed, config.workers, "probe.test")
        dataset = probe.Dataset.from_points(train_points)
        shuffles = point_rng(config.seed, 0, stream_id("probe.shuffle"))
        halfspaces = [
            probe.train_halfspace(dataset, config.method, config.epochs, child_seed(shuffles)) for _ in range(config.ell)
        ]
        combiner = probe.fit_combiner(halfspaces, dataset)
        if config.out:
            self.classifiers.save(combiner, config.out)
        test_correct = sum(combiner.evaluate(p) == p.a for p in test_points)
        results = [
            CheckResult(name="train_accuracy", estimate=probe.dataset_accuracy(combiner, train_points), trials=len(train_points)),
            _proportion_row("test_accuracy", test_correct, len(test_points), method=config.method, ell=config.ell),
        ]
        if config.sampler == "basic":
            attack = classify.moment_attack_halfspace(instance.M)
            hits = sum(attack.evaluate(p) == p.a for p in test_points)
            results.append(_proportion_row("moment_attack_accuracy", hits, len(test_points)))
        return results, params

    def critindex(self, config: RunConfig):
        instance, _, params = self._sampling_inputs(config)
        tau, K = self._tau_K(config, params)
        halfspaces = self._halfspaces(config)
        edge = instance.edges[config.edge]
        results = []
        for s, h in enumerate(halfspaces):
            for v in edge.vertices:
                for side in ("X", "Y"):
                    c = critical_index.block_vector(h, side, v, instance.M)
                    report = critical_index.critical_index(c, tau, K)
                    decay = critical_index.check_crit_decay(c, tau)
                    results.append(
                        CheckResult(
                            name=f"critical_index[s={s},v={v},{side}]",
                            estimate=report.i_tau,
                            passed=decay.passed,
                            details={**report.to_dict(), "decay_witness": decay.witness},
                        )
                    )
        sets = critical_index.edge_label_sets(instance, config.edge, halfspaces, tau, K)
        nice = critical_index.niceness_check(instance, config.edge, sets)
        results.append(CheckResult(name="niceness", passed=nice.nice, details={"witness": nice.witness}))
        if nice.nice:
            conditions = critical_index.structural_conditions(instance, config.edge, halfspaces, tau, K)
            results.append(
                CheckResult(
                    name="structural_conditions",
                    details={
                        "condition_I": len(conditions.condition_I),
                        "condition_II": len(conditions.condition_II),
                        "first_I": conditions.first_I,
                        "first_II": conditions.first_II,
                    },
                )
            )
        return results, params

    def truncate(self, config: RunConfig):
        instance, _, params = self._sampling_inputs(config)
        tau, K = self._tau_K(config, params)
        halfspaces = self._halfspaces(config)
        edge = instance.edges[config.edge]
        truncated = [critical_index.truncate(h, edge, tau, K, config.vertex) for h in halfspaces]
        if config.out:
            self.classifiers.save_bundle(truncated, config.out)
        results = []
        for s, h in enumerate(halfspaces):
            result = critical_index.truncation_disagreement_mc(
                instance, config.edge, h, params, config.trials, config.seed, tau, K, config.vertex, config.workers
            )
            results.append(result.model_copy(update={"name": f"truncation_disagreement[s={s}]"}))
        return results, params

    def anticonc(self, config: RunConfig):
        wanted = {"lo", "block-lo", "berry-esseen", "noisy-mass", "variance", "deviation"}
        checks = wanted if config.check == "all" else {config.check}
        results: List[CheckResult] = []
        if "lo" in checks:
            results.extend(self._lo_rows(config))
        if "block-lo" in checks:
            results.append(
                anticonc.block_lo_scaling((16, 64, 256), 4, config.trials, config.seed, config.workers)
            )
        if "berry-esseen" in checks:
            results.extend(self._berry_esseen_rows())
        coefficient_checks = checks & {"noisy-mass", "variance", "deviation"}
        params = None
        if coefficient_checks and (config.coeffs_path or config.check != "all"):
            instance, _, params = self._sampling_inputs(config)
            tau, K = self._tau_K(config, params)
            params = params.override(tau=tau, K=K) if (tau, K) != (params.tau, params.K) else params
            h = self._halfspaces(config)[0]
            if "noisy-mass" in coefficient_checks:
                blockvecs = anticonc.own_side_blockvecs(instance, config.edge, h)
                results.append(
                    anticonc.noisy_mass_concentration(
                        instance, config.edge, params, blockvecs, config.trials, config.seed, config.workers, split=True
                    )
                )
            if "variance" in coefficient_checks:
                results.append(
                    anticonc.variance_diff_mc(instance, config.edge, params, h, config.trials, config.seed, config.workers)
                )
            if "deviation" in coefficient_checks:
                results.append(
                    anticonc.pointwise_deviation_mc(
                        instance, config.edge, params, h, config.trials, config.seed, config.workers
                    )
                )
        elif coefficient_checks:
            logger.info("no --coeffs given; skipping %s", ", ".join(sorted(coefficient_checks)))
        return results, params

    @staticmethod
    def _lo_rows(config: RunConfig) -> List[CheckResult]:
        exact = anticonc.lo_exact(np.ones(20), -10.0, 1.0)
        oracle = float(sum(stats.binom.pmf(s, 20, 0.5) for s in (9, 10, 11)))
        return [
            CheckResult(
                name="lo_exact_binomial",
                estimate=exact,
                bound=oracle,
                passed=abs(exact - oracle) <= 1e-12,
            ),
            anticonc.lo_scaling_check((16, 64, 256, 1024), min(config.trials, 20_000), config.seed),
        ]

    @staticmethod
    def _berry_esseen_rows() -> List[CheckResult]:
        rows = [anticonc.berry_esseen_gap([(-1.0, 0.5), (1.0, 0.5)], n) for n in (4, 16, 64)]
        gaps = [r.estimate for r in rows]
        rows.append(
            CheckResult(
                name="berry_esseen_monotone",
                passed=all(a >= b - 1e-12 for a, b in zip(gaps, gaps[1:])),
                details={"gaps": gaps},
            )
        )
        return rows

    def decode(self, config: RunConfig):
        instance, _ = self.resolve_instance(config)
        params = self.resolve_params(config)
        tau, K = self._tau_K(config, params)
        halfspaces = self._halfspaces(config)
        result = decode.decode_and_score(
            instance, halfspaces, tau, K, config.repeats, config.seed, nu=params.nu, workers=config.workers
        )
        return [result], params

    def lemma_suite(self, config: RunConfig):
        planted = config.model_copy(
            update={
                "instance_path": None,
                "labeling_path": None,
                "instance": config.instance.model_copy(update={"planted": True}),
            }
        )
        results, params = self.verify_complete(planted)
        seed, n = config.seed, config.n

        attack = probe.accuracy(classify.moment_attack_halfspace(200), gadget.BasicSampler(200, 2), n, seed, config.workers)
        results.append(
            CheckResult(
                name="moment_attack", estimate=attack.estimate, ci95=attack.ci95, bound=0.999,
                passed=attack.estimate >= 0.999, trials=n,
            )
        )
        zeros = classify.pathological_zero_supports(10, 2)
        pair = probe.accuracy(classify.pathological_pair(10, 2), gadget.BasicSampler(10, 2), n, seed, config.workers)
        results.append(
            CheckResult(
                name="pathological_pair", estimate=pair.estimate, ci95=pair.ci95, bound=1.0,
                passed=zeros == 0 and pair.successes == pair.n, trials=n, details={"zero_supports": zeros},
            )
        )

        results.extend(self._lo_rows(config))
        results.append(anticonc.block_lo_scaling((16, 64, 256), 4, SUITE_BLOCK_TRIALS, seed, config.workers))
        results.extend(self._berry_esseen_rows())

        rng = point_rng(seed, 0, stream_id("suite.vectors"))
        vectors = [critical_index.random_block_vector(rng) for _ in range(SUITE_VECTORS)]
        decay_ok = sum(critical_index.check_crit_decay(c, params.tau).passed for c in vectors)
        fixed_ok = sum(critical_index.truncation_fixed_point(c, params.tau, params.K) for c in vectors)
        results.append(CheckResult(name="critical_decay", estimate=decay_ok / SUITE_VECTORS, passed=decay_ok == SUITE_VECTORS, trials=SUITE_VECTORS))
        results.append(CheckResult(name="truncation_fixed_point", estimate=fixed_ok / SUITE_VECTORS, passed=fixed_ok == SUITE_VECTORS, trials=SUITE_VECTORS))

        instance, labeling = self.resolve_instance(planted)
        dictator = classify.dictator_halfspace(labeling)
        decoded = decode.decode_and_score(instance, [dictator], params.tau, params.K, config.repeats, seed, params.nu, config.workers)
        best = decoded.details["best_weak_frac"]
        results.append(decoded.model_copy(update={"name": "decode_dictator", "passed": best >= 0.9}))
        return results, params

    # ── reports ──────────────────────────────────────────────────────────────

    def run(self, config: RunConfig) -> RunReport:
        handler = self._commands.get(config.command)
        if handler is None:
            raise ParameterError(f"unknown command {config.command!r}")
        logger.info("running %s with seed %d", config.command, config.seed)
        results, params = handler(config)
        verdicts = [r.passed for r in results if r.passed is not None]
        report = RunReport(
            command=config.command,
            git_describe=git_describe(),
            seed=config.seed,
            params=params.model_dump(mode="json") if params is not None else None,
            paper_faithful=params.paper_faithful if params is not None else False,
            config=config.model_dump(mode="json"),
            created_at=datetime.now(timezone.utc),
            passed=all(verdicts),
            results=results,
        )
        if config.report:
            self.reports.write(report, config.report, config.csv)
        elif config.csv:
            self.reports.write_csv(report, config.csv)
        logger.info("%s finished: %s", config.command, "pass" if report.passed else "FAIL")
        return report

    def replay(self, report_path: str) -> RunReport:
        """Re-run the configuration embedded in a report and compare every number."""
        original = self.reports.load(report_path)
        try:
            config = RunConfig.model_validate(original.config)
        except ValidationError as exc:
            raise ParameterError(f"{report_path}: embedded config is invalid") from exc
        rerun = self.run(config.model_copy(update={"report": None, "csv": None, "out": None}))
        matched = rerun.numbers() == original.numbers()
        mismatched = [
            a["name"] for a, b in zip(rerun.numbers(), original.numbers()) if a != b
        ]
        row = CheckResult(
            name="replay",
            passed=matched,
            details={"command": config.command, "rows": len(original.results), "mismatched": mismatched},
        )
        return RunReport(
            command="replay",
            git_describe=git_describe(),
            seed=config.seed,
            params=original.params,
            paper_faithful=original.paper_faithful,
            config={"report": str(report_path)},
            created_at=datetime.now(timezone.utc),
            passed=matched,
            results=[row],
        )
