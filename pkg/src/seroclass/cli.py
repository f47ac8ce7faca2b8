"""
Command-line entry point, installed as ``seroclass``.

Every subcommand resolves its configuration from built-in defaults, an
optional JSON file given with ``--config`` and the flags on the command line,
in increasing order of precedence. It then runs and writes a run manifest next
to its main output. ``seroclass replay --manifest PATH`` runs a recorded
command again and checks that it wrote the same bytes.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure.
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.random import default_rng

from seroclass import __version__
from seroclass.classification.contours import boundary_contour, contours_to_frame, decision_boundaries
from seroclass.classification.rules import ClassificationRule, PrevalenceInterval, Weights
from seroclass.classification.serialization import label_summary, labels_frame, save_rule
from seroclass.core.measurements import ColumnMapping, PreprocessConfig, PreprocessedSample, SampleLabel
from seroclass.core.params import DomainSpec, Family, QuadratureSpec
from seroclass.core.preconditions import AtLeastPoints, InsideDomain, NonEmpty, check_preconditions
from seroclass.estimation.prevalence import adaptive_classify
from seroclass.ingest.csv_reader import parse_csv, parse_log_csv
from seroclass.ingest.preprocess import points_for_fitting, preprocess
from seroclass.models.density import TruncatedDensity, normalize, truncation_mass
from seroclass.models.fitting import MIN_FIT_POINTS, FitOptions, fit_mle, initial_guess
from seroclass.models.serialization import load_density, save_density
from seroclass.utils.exceptions import (
    ConfigurationException,
    DataException,
    InvalidConfigException,
    InvalidPrevalenceException,
    NumericalException,
)
from seroclass.utils.manifest import RunManifest, default_manifest_path, digests, read_manifest, write_manifest
from seroclass.validation.experiments import (
    ExperimentConfig,
    default_q_grid,
    estimator_stats,
    mc_error_stats,
    sweep_loss_vs_q,
)
from seroclass.validation.reference import reference_densities
from seroclass.validation.synthetic import draw_labeled_sample

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

FLOAT_FORMAT = "%.17g"

_COMMON = {"seed": 0, "threads": 1, "nodes": 512, "scheme": "tensor_gauss_legendre", "domain_lo": 0.0, "domain_hi": 7.0}
_INGEST = {
    "input": None,
    "input_kind": "raw",
    "id_column": None,
    "rbd_column": "rbd",
    "s1_column": "s1",
    "ref_column": "ref",
    "label_column": "label",
    "days_column": None,
    "offset": 300.0,
    "rejection_floor": -300.0,
    "min_onset_days": 7,
    "normalize_reference": True,
    "rejections": None,
}
_MODELS = {"pos_model": None, "neg_model": None}
_WEIGHTS = {"w_fp": 1.0, "w_fn": 1.0}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "fit": {
        **_COMMON, **_INGEST,
        "family": None, "output": None, "report": None, "restarts": 5, "max_iter": 2000, "z_scale": 9.0,
    },
    "classify": {
        **_COMMON, **_INGEST, **_MODELS, **_WEIGHTS,
        "mode": "binary", "prevalence": None, "p_lo": None, "p_hi": None, "output": None, "rule": None,
    },
    "estimate": {
        **_COMMON, **_INGEST, **_MODELS, **_WEIGHTS,
        "p_init": 0.5, "tol": 1e-4, "max_iter": 20, "output": None, "labels": None,
    },
    "simulate": {
        **_COMMON, **_MODELS,
        "mode": "adaptive",
        "prevalences": [0.01, 0.1],
        "sizes": [100, 1000],
        "trials": 100,
        "stratified": True,
        "p_init": 0.5,
        "tol": 1e-4,
        "max_iter": 20,
        "rule_prevalence": 0.5,
        "output": None,
        "summary": None,
        "emit_csv": None,
        "emit_size": 1000,
        "emit_prevalence": 0.1,
    },
    "sweep": {
        **_COMMON, **_MODELS,
        "true_p": None, "q_points": 90, "q_lo": 0.01, "q_hi": 0.9, "output": None, "summary": None,
    },
    "contour": {
        **_COMMON, **_MODELS,
        "prevalences": [0.5, 0.1446, 0.1, 0.01, 0.001], "resolution": 256, "p_lo": None, "p_hi": None,
        "output": None,
    },
}

SIMULATION_MODES = ("known", "adaptive", "estimator")


@dataclass
class CommandRun:
    """Files a command read and wrote, in the order it touched them."""
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)

    def wrote(self, path: str) -> str:
        self.outputs.append(path)
        return path


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _require(config: Dict[str, Any], *keys: str) -> None:
    missing = [key for key in keys if config.get(key) is None]
    if missing:
        raise InvalidConfigException(f"Missing required setting(s): {', '.join(missing)}")


def _prepare(path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def _write_json(document: Dict[str, Any], path: str) -> None:
    with open(_prepare(path), "w") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_csv(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(_prepare(path), index=False, float_format=FLOAT_FORMAT)


def _sibling(output: str, suffix: str) -> str:
    return f"{os.path.splitext(output)[0]}{suffix}"


def _quadrature(config: Dict[str, Any]) -> QuadratureSpec:
    return QuadratureSpec(int(config["nodes"]), config["scheme"])


def _domain(config: Dict[str, Any]) -> DomainSpec:
    return DomainSpec(float(config["domain_lo"]), float(config["domain_hi"]))


def _weights(config: Dict[str, Any]) -> Weights:
    return Weights(float(config["w_fp"]), float(config["w_fn"]))


def _read_samples(config: Dict[str, Any], run: CommandRun) -> List[PreprocessedSample]:
    path, kind = config["input"], config["input_kind"]
    run.inputs.append(path)
    if kind == "log":
        return parse_log_csv(path, config["id_column"] or "sample_id", config["label_column"])
    if kind != "raw":
        raise InvalidConfigException(f"input_kind must be 'raw' or 'log', got '{kind}'")
    mapping = ColumnMapping(
        sample_id=config["id_column"] or "id",
        mfi_a=config["rbd_column"],
        mfi_b=config["s1_column"],
        reference=config["ref_column"],
        label=config["label_column"],
        days_since_onset=config["days_column"],
    )
    preprocess_config = PreprocessConfig(
        offset=float(config["offset"]),
        rejection_floor=float(config["rejection_floor"]),
        min_onset_days=config["min_onset_days"],
        normalize_reference=bool(config["normalize_reference"]),
    )
    samples, report = preprocess(parse_csv(path, mapping), preprocess_config)
    if config["rejections"]:
        report.to_csv(_prepare(run.wrote(config["rejections"])))
    return samples


def _sample_points(samples: Sequence[PreprocessedSample]) -> np.ndarray:
    return np.array([(s.point.lx, s.point.ly) for s in samples], dtype=float).reshape(-1, 2)


def _load_models(config: Dict[str, Any], run: CommandRun) -> Tuple[TruncatedDensity, TruncatedDensity]:
    _require(config, "pos_model", "neg_model")
    run.inputs.extend([config["pos_model"], config["neg_model"]])
    return load_density(config["pos_model"]), load_density(config["neg_model"])


def _models_or_reference(config: Dict[str, Any], run: CommandRun) -> Tuple[TruncatedDensity, TruncatedDensity]:
    if config["pos_model"] is None and config["neg_model"] is None:
        return reference_densities(_quadrature(config), _domain(config))
    return _load_models(config, run)


def cmd_fit(config: Dict[str, Any]) -> CommandRun:
    """Fits one density family to the samples carrying the matching label."""
    _require(config, "input", "family", "output")
    family = Family.parse(config["family"])
    if family is Family.GRIDDED:
        raise InvalidConfigException("Only the positive and negative families can be fitted")
    run = CommandRun()
    label = SampleLabel.POSITIVE if family is Family.POSITIVE else SampleLabel.NEGATIVE
    points = points_for_fitting(_read_samples(config, run), label)
    check_preconditions(points, [AtLeastPoints(MIN_FIT_POINTS, f"{label.value} samples to fit")])

    domain, quad = _domain(config), _quadrature(config)
    init = initial_guess(points, family, float(config["z_scale"]))
    opts = FitOptions(restarts=int(config["restarts"]), max_iter=int(config["max_iter"]), seed=int(config["seed"]))
    result = fit_mle(points, family, init, opts)
    density = normalize(family, result.params, domain, quad)

    save_density(density, _prepare(run.wrote(config["output"])))
    report = {
        "family": family.value,
        "fit": result.asdict(),
        "initial_params": init.asdict(),
        "norm_const": density.norm_const,
        "convergence_delta": density.convergence_delta,
        "truncation_mass": truncation_mass(family, result.params, domain, quad),
    }
    _write_json(report, run.wrote(config["report"] or _sibling(config["output"], ".report.json")))
    _logger.info("Fitted %s family: log-likelihood %.6f", family.value, result.log_likelihood)
    return run


def _rule_from_config(
    config: Dict[str, Any], pos: TruncatedDensity, neg: TruncatedDensity
) -> ClassificationRule:
    mode, weights = config["mode"], _weights(config)
    if mode == "binary":
        if config["prevalence"] is None:
            raise InvalidPrevalenceException("Binary classification needs --prevalence")
        return ClassificationRule.binary(pos, neg, float(config["prevalence"]), weights)
    if mode == "ternary":
        if config["p_lo"] is None or config["p_hi"] is None:
            raise InvalidPrevalenceException("Ternary classification needs --p-lo and --p-hi")
        interval = PrevalenceInterval(float(config["p_lo"]), float(config["p_hi"]))
        return ClassificationRule.ternary(pos, neg, interval, weights)
    raise InvalidConfigException(f"mode must be 'binary' or 'ternary', got '{mode}'")


def cmd_classify(config: Dict[str, Any]) -> CommandRun:
    _require(config, "input", "output")
    run = CommandRun()
    pos, neg = _load_models(config, run)
    rule = _rule_from_config(config, pos, neg)
    samples = _read_samples(config, run)
    points = _sample_points(samples)
    check_preconditions(points, [NonEmpty("samples"), InsideDomain(rule.domain)])

    codes = rule.label_codes(points)
    frame = labels_frame([s.sample_id for s in samples], codes, rule.scores(points))
    _write_csv(frame, run.wrote(config["output"]))
    if config["rule"]:
        rule_path = _prepare(config["rule"])
        base = os.path.dirname(rule_path) or "."
        pos_path = os.path.relpath(config["pos_model"], base)
        neg_path = os.path.relpath(config["neg_model"], base)
        save_rule(rule, run.wrote(rule_path), pos_path, neg_path)
    print(" ".join(f"{name}={count}" for name, count in label_summary(codes).items()))
    return run


def cmd_estimate(config: Dict[str, Any]) -> CommandRun:
    """Adaptive prevalence estimate, its iteration trace and the final labels."""
    _require(config, "input", "output")
    run = CommandRun()
    pos, neg = _load_models(config, run)
    samples = _read_samples(config, run)
    points = _sample_points(samples)
    result = adaptive_classify(
        points,
        pos,
        neg,
        p_init=float(config["p_init"]),
        tol=float(config["tol"]),
        max_iter=int(config["max_iter"]),
        quad=_quadrature(config),
        sample_ids=[s.sample_id for s in samples],
        weights=_weights(config),
    )
    _write_json(result.to_dict(), run.wrote(config["output"]))
    frame = labels_frame(
        [sid for sid, _ in result.labels], result.label_codes, result.final_rule.scores(points)
    )
    _write_csv(frame, run.wrote(config["labels"] or _sibling(config["output"], ".labels.csv")))
    print(f"p_hat={result.p_hat!r} iterations={len(result.estimates)} converged={result.converged}")
    return run


def _emit_labeled_csv(config: Dict[str, Any], pos: TruncatedDensity, neg: TruncatedDensity, path: str) -> None:
    rng = default_rng(int(config["seed"]))
    points, truth = draw_labeled_sample(
        pos, neg, float(config["emit_prevalence"]), int(config["emit_size"]), rng, bool(config["stratified"])
    )
    frame = pd.DataFrame({
        "sample_id": [f"s{i:07d}" for i in range(len(points))],
        "lx": points[:, 0],
        "ly": points[:, 1],
        "label": np.where(truth, SampleLabel.POSITIVE.value, SampleLabel.NEGATIVE.value),
    })
    _write_csv(frame, path)
    _logger.info("Wrote %d labeled synthetic sample(s) to %s", len(frame), path)


def cmd_simulate(config: Dict[str, Any]) -> CommandRun:
    """Monte Carlo error statistics over prevalences and sample sizes."""
    _require(config, "output")
    mode = config["mode"]
    if mode not in SIMULATION_MODES:
        raise InvalidConfigException(f"mode must be one of {SIMULATION_MODES}, got '{mode}'")
    run = CommandRun()
    pos, neg = _models_or_reference(config, run)
    experiment = ExperimentConfig(
        prevalence_grid=tuple(float(p) for p in config["prevalences"]),
        sample_sizes=tuple(int(s) for s in config["sizes"]),
        trials=int(config["trials"]),
        base_seed=int(config["seed"]),
        quad=_quadrature(config),
        densities=(pos, neg),
        stratified=bool(config["stratified"]),
        threads=int(config["threads"]),
        p_init=float(config["p_init"]),
        tol=float(config["tol"]),
        max_iter=int(config["max_iter"]),
    )
    if mode == "estimator":
        report = estimator_stats(experiment, float(config["rule_prevalence"]))
    else:
        report = mc_error_stats(experiment, known_prevalence=mode == "known")
    _write_csv(report.to_frame(), run.wrote(config["output"]))
    summary = {"mode": mode, "experiment": experiment.describe(), **report.to_dict()}
    _write_json(summary, run.wrote(config["summary"] or _sibling(config["output"], ".summary.json")))
    if config["emit_csv"]:
        _emit_labeled_csv(config, pos, neg, run.wrote(config["emit_csv"]))
    return run


def cmd_sweep(config: Dict[str, Any]) -> CommandRun:
    """Loss at a true prevalence of rules built for a grid of presumed prevalences."""
    _require(config, "true_p", "output")
    run = CommandRun()
    densities = _models_or_reference(config, run)
    true_p = float(config["true_p"])
    if not 0.0 <= true_p <= 1.0:
        raise InvalidPrevalenceException(f"true_p must lie in [0, 1], got {true_p}")
    q_grid = default_q_grid(int(config["q_points"]), float(config["q_lo"]), float(config["q_hi"]))
    report = sweep_loss_vs_q(true_p, q_grid, densities, _quadrature(config))
    _write_csv(report.to_frame(), run.wrote(config["output"]))
    _write_json(report.to_dict(), run.wrote(config["summary"] or _sibling(config["output"], ".summary.json")))
    print(f"argmin_q={report.argmin_q!r}")
    return run


def cmd_contour(config: Dict[str, Any]) -> CommandRun:
    """Decision boundaries as polylines, one family per prevalence."""
    _require(config, "output")
    run = CommandRun()
    pos, neg = _models_or_reference(config, run)
    resolution = int(config["resolution"])
    contours = decision_boundaries(pos, neg, [float(p) for p in config["prevalences"]], resolution)
    if config["p_lo"] is not None or config["p_hi"] is not None:
        _require(config, "p_lo", "p_hi")
        interval = PrevalenceInterval(float(config["p_lo"]), float(config["p_hi"]))
        contours.extend(boundary_contour(ClassificationRule.ternary(pos, neg, interval), resolution))
    _write_csv(contours_to_frame(contours), run.wrote(config["output"]))
    _logger.info("Wrote %d polyline(s) to %s", len(contours), config["output"])
    return run


COMMANDS: Dict[str, Callable[[Dict[str, Any]], CommandRun]] = {
    "fit": cmd_fit,
    "classify": cmd_classify,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "contour": cmd_contour,
}


def _check_keys(command: str, values: Dict[str, Any], source: str) -> None:
    unknown = sorted(set(values) - set(DEFAULTS[command]))
    if unknown:
        raise InvalidConfigException(f"Unknown setting(s) for '{command}' in {source}: {', '.join(unknown)}")


def read_config_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise InvalidConfigException(f"Config file '{path}' does not exist")
    with open(path) as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidConfigException(f"Config file '{path}' is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise InvalidConfigException(f"Config file '{path}' must hold a JSON object")
    return document


def resolve_config(command: str, flags: Dict[str, Any], config_path: Optional[str] = None) -> Dict[str, Any]:
    """Defaults, overridden by the config file, overridden by flags."""
    resolved = dict(DEFAULTS[command])
    if config_path:
        from_file = read_config_file(config_path)
        _check_keys(command, from_file, config_path)
        resolved.update(from_file)
    _check_keys(command, flags, "flags")
    resolved.update(flags)
    return resolved


def execute(
    command: str, flags: Dict[str, Any], config_path: Optional[str] = None, manifest_path: Optional[str] = None
) -> RunManifest:
    config = resolve_config(command, flags, config_path)
    _logger.debug("Resolved configuration for %s: %s", command, config)
    run = COMMANDS[command](config)
    manifest = RunManifest(
        command=command,
        config=config,
        seed=config.get("seed"),
        inputs=digests(run.inputs),
        outputs=digests(run.outputs),
        version=__version__,
    )
    write_manifest(manifest, _prepare(manifest_path or default_manifest_path(config["output"])))
    return manifest


def replay(manifest_path: str) -> RunManifest:
    """Runs a recorded command again and checks its outputs byte for byte."""
    manifest = read_manifest(manifest_path)
    if manifest.command not in COMMANDS:
        raise InvalidConfigException(f"Manifest '{manifest_path}' names unknown command '{manifest.command}'")
    _check_keys(manifest.command, manifest.config, manifest_path)
    if manifest.version != __version__:
        _logger.warning("Manifest was written by version %s, replaying with %s", manifest.version, __version__)
    manifest.verify_inputs()
    COMMANDS[manifest.command](dict(manifest.config))
    manifest.verify_outputs()
    _logger.info("Replay of %s reproduced %d output(s)", manifest.command, len(manifest.outputs))
    return manifest


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON file with settings; flags take precedence")
    parser.add_argument("--manifest", metavar="FILE", help="where to write the run manifest")
    parser.add_argument("--seed", type=int, help="root seed of all random streams")
    parser.add_argument("--threads", type=int, help="worker threads for Monte Carlo trials")
    parser.add_argument("--nodes", type=int, help="quadrature nodes per axis")
    parser.add_argument("--scheme", help="quadrature scheme")
    parser.add_argument("--domain-lo", dest="domain_lo", type=float, help="lower domain bound, both axes")
    parser.add_argument("--domain-hi", dest="domain_hi", type=float, help="upper domain bound, both axes")


def _add_ingest(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", metavar="CSV", help="measurement CSV")
    parser.add_argument("--input-kind", dest="input_kind", choices=["raw", "log"], help="raw values or log points")
    parser.add_argument("--id-column", dest="id_column")
    parser.add_argument("--rbd-column", dest="rbd_column")
    parser.add_argument("--s1-column", dest="s1_column")
    parser.add_argument("--ref-column", dest="ref_column")
    parser.add_argument("--label-column", dest="label_column")
    parser.add_argument("--days-column", dest="days_column", help="days since symptom onset")
    parser.add_argument("--offset", type=float)
    parser.add_argument("--rejection-floor", dest="rejection_floor", type=float)
    parser.add_argument("--min-onset-days", dest="min_onset_days", type=int)
    parser.add_argument(
        "--no-reference-normalization", dest="normalize_reference", action="store_false",
        help="do not divide by the reference signal",
    )
    parser.add_argument("--rejections", metavar="CSV", help="write rejected sample ids and reasons here")


def _add_models(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pos-model", dest="pos_model", metavar="JSON", help="positive density")
    parser.add_argument("--neg-model", dest="neg_model", metavar="JSON", help="negative density")


def _add_weights(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--w-fp", dest="w_fp", type=float, help="cost of a false positive")
    parser.add_argument("--w-fn", dest="w_fn", type=float, help="cost of a false negative")


def parse_args(args: Sequence[str]) -> argparse.Namespace:
    """Parse command line parameters

    Args:
      args ([str]): command line parameters as list of strings

    Returns:
      :obj:`argparse.Namespace`: command line parameters namespace
    """
    parser = argparse.ArgumentParser(description="Optimal classification and prevalence estimation for serology")
    parser.add_argument("--version", action="version", version=f"seroclass {__version__}")
    parser.add_argument(
        "-v", "--verbose", dest="loglevel", help="set loglevel to INFO", action="store_const", const=logging.INFO
    )
    parser.add_argument(
        "-vv",
        "--very-verbose",
        dest="loglevel",
        help="set loglevel to DEBUG",
        action="store_const",
        const=logging.DEBUG,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def subcommand(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        _add_common(sub)
        return sub

    fit = subcommand("fit", "fit a density family to labeled samples")
    _add_ingest(fit)
    fit.add_argument("--family", help="positive or negative")
    fit.add_argument("--output", metavar="JSON", help="model file")
    fit.add_argument("--report", metavar="JSON", help="fit report")
    fit.add_argument("--restarts", type=int)
    fit.add_argument("--max-iter", dest="max_iter", type=int)
    fit.add_argument("--z-scale", dest="z_scale", type=float, help="upper end of the positive family's support")

    classify = subcommand("classify", "label samples with a binary or ternary rule")
    _add_ingest(classify)
    _add_models(classify)
    _add_weights(classify)
    classify.add_argument("--mode", choices=["binary", "ternary"])
    classify.add_argument("--prevalence", type=float)
    classify.add_argument("--p-lo", dest="p_lo", type=float)
    classify.add_argument("--p-hi", dest="p_hi", type=float)
    classify.add_argument("--output", metavar="CSV", help="labels file")
    classify.add_argument("--rule", metavar="JSON", help="also write the rule document here")

    estimate = subcommand("estimate", "estimate the prevalence and classify adaptively")
    _add_ingest(estimate)
    _add_models(estimate)
    _add_weights(estimate)
    estimate.add_argument("--p-init", dest="p_init", type=float)
    estimate.add_argument("--tol", type=float)
    estimate.add_argument("--max-iter", dest="max_iter", type=int)
    estimate.add_argument("--output", metavar="JSON", help="estimate and iteration trace")
    estimate.add_argument("--labels", metavar="CSV", help="final labels")

    simulate = subcommand("simulate", "Monte Carlo error statistics on synthetic samples")
    _add_models(simulate)
    simulate.add_argument("--mode", choices=SIMULATION_MODES)
    simulate.add_argument("--prevalences", type=_float_list, help="comma-separated true prevalences")
    simulate.add_argument("--sizes", type=_int_list, help="comma-separated sample sizes")
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--binomial", dest="stratified", action="store_false", help="draw positive counts binomially")
    simulate.add_argument("--p-init", dest="p_init", type=float)
    simulate.add_argument("--tol", type=float)
    simulate.add_argument("--max-iter", dest="max_iter", type=int)
    simulate.add_argument("--rule-prevalence", dest="rule_prevalence", type=float)
    simulate.add_argument("--output", metavar="CSV", help="per-cell statistics")
    simulate.add_argument("--summary", metavar="JSON")
    simulate.add_argument("--emit-csv", dest="emit_csv", metavar="CSV", help="also write one labeled synthetic sample")
    simulate.add_argument("--emit-size", dest="emit_size", type=int)
    simulate.add_argument("--emit-prevalence", dest="emit_prevalence", type=float)

    sweep = subcommand("sweep", "loss against presumed prevalence")
    _add_models(sweep)
    sweep.add_argument("--true-p", dest="true_p", type=float)
    sweep.add_argument("--q-points", dest="q_points", type=int)
    sweep.add_argument("--q-lo", dest="q_lo", type=float)
    sweep.add_argument("--q-hi", dest="q_hi", type=float)
    sweep.add_argument("--output", metavar="CSV")
    sweep.add_argument("--summary", metavar="JSON")

    contour = subcommand("contour", "decision boundaries as polylines")
    _add_models(contour)
    contour.add_argument("--prevalences", type=_float_list, help="comma-separated prevalences")
    contour.add_argument("--resolution", type=int)
    contour.add_argument("--p-lo", dest="p_lo", type=float)
    contour.add_argument("--p-hi", dest="p_hi", type=float)
    contour.add_argument("--output", metavar="CSV")

    replay_parser = subparsers.add_parser("replay", help="re-run a recorded command and verify its outputs")
    replay_parser.add_argument("--manifest", metavar="FILE", required=True)
    return parser.parse_args(args)


def setup_logging(loglevel):
    """Setup basic logging

    Args:
      loglevel (int): minimum loglevel for emitting messages
    """
    logformat = "[%(asctime)s] %(levelname)s:%(name)s:%(message)s"
    logging.basicConfig(level=loglevel, stream=sys.stdout, format=logformat, datefmt="%Y-%m-%d %H:%M:%S")


def _flags(parsed: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(parsed).items() if k not in ("command", "config", "manifest", "loglevel")}


def main(args: Sequence[str]) -> int:
    """Main entry point allowing external calls

    Args:
      args ([str]): command line parameter list

    Returns:
      int: exit code
    """
    parsed = parse_args(args)
    setup_logging(parsed.loglevel)
    try:
        if parsed.command == "replay":
            replay(parsed.manifest)
        else:
            execute(parsed.command, _flags(parsed), getattr(parsed, "config", None), getattr(parsed, "manifest", None))
    except ConfigurationException as e:
        _logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except DataException as e:
        _logger.error("Data error: %s", e)
        return EXIT_DATA
    except NumericalException as e:
        _logger.error("Numerical failure: %s", e)
        for step, estimate in enumerate(getattr(e, "trace", [])):
            _logger.error("  iteration %d: %s", step, estimate.asdict())
        return EXIT_NUMERICAL
    return EXIT_OK


def run():
    """Entry point for console_scripts"""
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
