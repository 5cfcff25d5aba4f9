"""Command-line harness: configuration, orchestration and file outputs.

Subcommands
-----------
simulate   estimate a grouped count distribution, write CSV + JSON
compare    bin measured click patterns and chi-square them against theory
entangle   sweep the beam-splitter chain witness over mode counts
oracle     exact total-count distribution from the Gaussian moments (M <= 16)
selftest   quick deterministic invariant battery; nonzero exit on failure

Configuration is a JSON object (see ``RunConfig``); command-line flags
override individual fields.  Every output embeds the fully resolved
configuration and master seed, and identical configurations produce
byte-identical CSV files.  Exit codes: 0 success, 1 usage or configuration
error, 2 runtime or numerical error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .clicks import GroupPartition, GroupedDistribution, bin_experimental_patterns
from .network import (TransmissionMatrix, haar_unitary, read_transmission_file,
                      scale_transmission)
from .oracles import exact_total_count_distribution, output_gaussian_moments
from .phase_space import OrderingParam, SqueezerSpec, WIGNER
from .pipeline import stream_grouped, stream_witness
from .quadrature import build_entanglement_unitary, epr_chain_input_spec
from .validation import BinnedComparison, chi_square, z_scores

__all__ = ["RunConfig", "ConfigError", "run_simulate", "run_compare",
           "run_entangle", "run_oracle", "run_selftest", "main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_SELFTEST = 3


class ConfigError(ValueError):
    """Bad usage or configuration; maps to exit code 1."""


@dataclass
class RunConfig:
    """Resolved run description; mirrors the JSON schema field by field."""

    task: str = "simulate"
    mode_count: int = 1
    squeezing: float = 0.0
    squeezing_file: str | None = None
    squeezed_modes: int | None = None
    epsilon: float = 0.0
    sigma: float | None = None
    transmission: dict = field(default_factory=lambda: {"kind": "identity"})
    partition: list = field(default_factory=list)
    samples: int = 1_200_000
    subensembles: int = 1200
    seed: int = 1
    out: str = "out"
    patterns: str | None = None
    min_count: int = 10
    min_probability: float | None = None
    mode_counts: list | None = None
    input_amplitude: float = 1.0

    def __post_init__(self):
        if self.task not in ("simulate", "compare", "entangle", "oracle", "selftest"):
            raise ConfigError(f"unknown task {self.task!r}")
        if self.mode_count < 1:
            raise ConfigError("mode_count must be >= 1")
        if self.samples < 1 or self.subensembles < 1:
            raise ConfigError("samples and subensembles must be positive")
        if self.samples % self.subensembles != 0:
            raise ConfigError(
                f"samples ({self.samples}) must be divisible by "
                f"subensembles ({self.subensembles})")

    @property
    def subensemble_size(self) -> int:
        return self.samples // self.subensembles

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def emit(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from None
        return cls.from_dict(data)


def _resolve_squeezing(cfg: RunConfig) -> SqueezerSpec:
    if cfg.squeezing_file is not None:
        values = np.atleast_1d(np.loadtxt(cfg.squeezing_file, dtype=float))
        if values.size > cfg.mode_count:
            raise ConfigError(
                f"squeezing file has {values.size} entries for "
                f"{cfg.mode_count} modes")
        vec = np.zeros(cfg.mode_count)
        vec[:values.size] = values
        return SqueezerSpec(vec, cfg.epsilon)
    return SqueezerSpec.uniform(cfg.mode_count, cfg.squeezing,
                                cfg.squeezed_modes, cfg.epsilon)


def _resolve_transmission(source: dict, mode_count: int) -> TransmissionMatrix:
    if not isinstance(source, dict) or "kind" not in source:
        raise ConfigError("transmission must be an object with a 'kind' field")
    kind = source["kind"]
    if kind == "identity":
        return TransmissionMatrix.identity(mode_count)
    if kind == "random_unitary":
        return haar_unitary(mode_count, int(source.get("seed", 0)))
    if kind == "entanglement_chain":
        return build_entanglement_unitary(mode_count)
    if kind == "file":
        try:
            return read_transmission_file(source["path"])
        except (OSError, KeyError) as exc:
            raise ConfigError(f"cannot read transmission file: {exc}") from None
    if kind == "scaled":
        inner = _resolve_transmission(source.get("inner", {"kind": "identity"}),
                                      mode_count)
        return scale_transmission(inner, float(source.get("factor", 1.0)))
    raise ConfigError(f"unknown transmission kind {kind!r}")


def _resolve_partition(cfg: RunConfig, mode_count: int) -> GroupPartition:
    entries = cfg.partition or [mode_count]
    if all(isinstance(e, (int, float)) for e in entries):
        sizes = [int(e) for e in entries]
        if sum(sizes) > mode_count:
            raise ConfigError(
                f"partition sizes sum to {sum(sizes)} but only "
                f"{mode_count} modes exist")
        return GroupPartition.from_sizes(sizes)
    try:
        part = GroupPartition(entries)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if part.max_index() >= mode_count:
        raise ConfigError("partition index out of range")
    return part


def _format(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_distribution_csv(path: Path, dist: GroupedDistribution,
                            cfg: RunConfig) -> None:
    d = dist.partition.dimension
    header = [f"m_{j + 1}" for j in range(d)]
    header += ["probability", "std_error", "imag", "imag_std_error"]
    lines = [f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}",
             f"# seed: {cfg.seed}",
             ",".join(header)]
    imag = dist.imag_part if dist.imag_part is not None else np.zeros_like(dist.probabilities)
    imag_err = (dist.imag_std_errors if dist.imag_std_errors is not None
                else np.zeros_like(dist.probabilities))
    for idx in np.ndindex(dist.probabilities.shape):
        row = [str(i) for i in idx]
        row += [_format(dist.probabilities[idx]), _format(dist.std_errors[idx]),
                _format(imag[idx]), _format(imag_err[idx])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_run_json(path: Path, cfg: RunConfig, timings: dict,
                    extra: dict | None = None) -> None:
    payload = {"config": cfg.to_dict(), "seed": cfg.seed, "timings": timings}
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def run_simulate(cfg: RunConfig) -> GroupedDistribution:
    """Estimate the configured grouped distribution and write the outputs."""
    spec = _resolve_squeezing(cfg)
    T = _resolve_transmission(cfg.transmission, cfg.mode_count)
    partition = _resolve_partition(cfg, T.output_count)
    if cfg.sigma not in (None, 0.0):
        raise ConfigError("click statistics require sigma = 0")
    start = time.perf_counter()
    dist = stream_grouped(spec, T, partition, cfg.seed, cfg.subensembles,
                          cfg.subensemble_size)
    elapsed = time.perf_counter() - start
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_distribution_csv(outdir / "distribution.csv", dist, cfg)
    _write_run_json(outdir / "run.json", cfg, {"simulate_seconds": elapsed})
    return dist


def run_oracle(cfg: RunConfig) -> GroupedDistribution:
    """Exact total-count distribution over all output modes (M <= 16)."""
    spec = _resolve_squeezing(cfg)
    T = _resolve_transmission(cfg.transmission, cfg.mode_count)
    start = time.perf_counter()
    gm = output_gaussian_moments(spec, T)
    dist_values = exact_total_count_distribution(gm)
    elapsed = time.perf_counter() - start
    partition = GroupPartition.from_sizes([T.output_count])
    zeros = np.zeros_like(dist_values)
    dist = GroupedDistribution(
        probabilities=dist_values, std_errors=zeros, partition=partition,
        sample_count=0, imag_part=zeros.copy(), imag_std_errors=zeros.copy())
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_distribution_csv(outdir / "oracle.csv", dist, cfg)
    _write_run_json(outdir / "run.json", cfg, {"oracle_seconds": elapsed})
    return dist


def run_compare(cfg: RunConfig) -> tuple[BinnedComparison, float, int, float]:
    """Compare a click-pattern file against the configured theory."""
    if cfg.patterns is None:
        raise ConfigError("compare needs a click-pattern file (--patterns)")
    spec = _resolve_squeezing(cfg)
    T = _resolve_transmission(cfg.transmission, cfg.mode_count)
    partition = _resolve_partition(cfg, T.output_count)
    start = time.perf_counter()
    try:
        with open(cfg.patterns, "r", encoding="utf-8") as fh:
            experiment = bin_experimental_patterns(fh, partition,
                                                   mode_count=T.output_count)
    except OSError as exc:
        raise ConfigError(f"cannot read pattern file: {exc}") from None
    theory = stream_grouped(spec, T, partition, cfg.seed, cfg.subensembles,
                            cfg.subensemble_size)
    cmp = BinnedComparison.from_grouped(theory, experiment,
                                        min_count=cfg.min_count,
                                        min_probability=cfg.min_probability)
    chi2, k, ratio = chi_square(cmp)
    z = z_scores(cmp)
    elapsed = time.perf_counter() - start

    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    labels = cmp.bin_labels or [(i,) for i in range(cmp.theory.size)]
    report = {
        "bins": [list(b) for b in labels],
        "z": [None if not np.isfinite(v) else v for v in z],
        "chi2": chi2,
        "k": k,
        "ratio": ratio,
        "excluded_bins": cmp.excluded_bins(),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "timings": {"compare_seconds": elapsed},
    }
    (outdir / "comparison.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    header = [f"m_{j + 1}" for j in range(partition.dimension)]
    header += ["theory", "theory_err", "reference", "reference_err",
               "count", "z", "included"]
    lines = [f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}",
             f"# seed: {cfg.seed}", ",".join(header)]
    counts = cmp.counts if cmp.counts is not None else np.zeros(cmp.theory.size, int)
    for i, label in enumerate(labels):
        row = [str(v) for v in label]
        row += [_format(cmp.theory[i]), _format(cmp.theory_err[i]),
                _format(cmp.reference[i]), _format(cmp.reference_err[i]),
                str(int(counts[i])),
                _format(z[i]) if np.isfinite(z[i]) else "nan",
                "1" if cmp.included[i] else "0"]
        lines.append(",".join(row))
    (outdir / "comparison.csv").write_text("\n".join(lines) + "\n",
                                           encoding="utf-8")
    return cmp, chi2, k, ratio


def run_entangle(cfg: RunConfig) -> list:
    """Witness sweep over mode counts; writes witness.csv."""
    mode_counts = cfg.mode_counts or [cfg.mode_count]
    try:
        ordering = WIGNER if cfg.sigma is None else OrderingParam(cfg.sigma)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    reports = []
    start = time.perf_counter()
    for M in mode_counts:
        M = int(M)
        spec = epr_chain_input_spec(M, cfg.squeezing)
        chain = build_entanglement_unitary(M)
        t = float(cfg.input_amplitude)
        if t != 1.0:
            T = TransmissionMatrix(t * chain.matrix)
        else:
            T = chain
        reports.append(stream_witness(M, spec, T, cfg.seed, cfg.subensembles,
                                      cfg.subensemble_size, ordering))
    elapsed = time.perf_counter() - start
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    header = ["mode_count", "squeezing", "input_amplitude",
              "var_u", "var_u_err", "var_v", "var_v_err",
              "product", "product_err", "variance_sum", "variance_sum_err",
              "threshold_product", "threshold_sum", "pass_product", "pass_sum"]
    lines = [f"# config: {json.dumps(cfg.to_dict(), sort_keys=True)}",
             f"# seed: {cfg.seed}", ",".join(header)]
    for rep in reports:
        row = [str(rep.mode_count), _format(cfg.squeezing),
               _format(cfg.input_amplitude),
               _format(rep.var_u), _format(rep.var_u_err),
               _format(rep.var_v), _format(rep.var_v_err),
               _format(rep.product), _format(rep.product_err),
               _format(rep.variance_sum), _format(rep.variance_sum_err),
               _format(rep.threshold_product), _format(rep.threshold_sum),
               _format(rep.pass_product), _format(rep.pass_sum)]
        lines.append(",".join(row))
    (outdir / "witness.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_run_json(outdir / "run.json", cfg, {"entangle_seconds": elapsed},
                    extra={"reports": [asdict(r) for r in reports]})
    return reports


def run_selftest() -> tuple[bool, list[str]]:
    """Quick deterministic battery over the package invariants."""
    from . import selftest as _selftest
    return _selftest.run_all()


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map usage errors to exit code 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gbsim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="task")
    for name in ("simulate", "compare", "entangle", "oracle", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--subensembles", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--patterns", type=str, default=None)
        p.add_argument("--matrix", type=str, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--scale", type=float, default=None)
    return parser


def _config_from_args(args) -> RunConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        cfg = RunConfig.parse(text)
    else:
        cfg = RunConfig(task=args.task)
    data = cfg.to_dict()
    data["task"] = args.task
    for name in ("seed", "samples", "subensembles", "out", "patterns", "epsilon"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.matrix is not None:
        data["transmission"] = {"kind": "file", "path": args.matrix}
    if args.scale is not None:
        data["transmission"] = {"kind": "scaled", "factor": args.scale,
                                "inner": data["transmission"]}
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.task is None:
            raise ConfigError("a subcommand is required "
                              "(simulate | compare | entangle | oracle | selftest)")
        if args.task == "selftest":
            ok, lines = run_selftest()
            for line in lines:
                print(line)
            return EXIT_OK if ok else EXIT_SELFTEST
        cfg = _config_from_args(args)
        if cfg.task == "simulate":
            dist = run_simulate(cfg)
            print(f"wrote {Path(cfg.out) / 'distribution.csv'} "
                  f"(sum = {dist.total():.12f})")
        elif cfg.task == "oracle":
            run_oracle(cfg)
            print(f"wrote {Path(cfg.out) / 'oracle.csv'}")
        elif cfg.task == "compare":
            _, chi2, k, ratio = run_compare(cfg)
            print(f"chi2 = {chi2:.6g} over k = {k} bins, ratio = {ratio:.6g}")
        elif cfg.task == "entangle":
            reports = run_entangle(cfg)
            for rep in reports:
                print(f"M = {rep.mode_count}: product = {rep.product:.6g} "
                      f"(threshold {rep.threshold_product:.6g}), "
                      f"sum = {rep.variance_sum:.6g} "
                      f"(threshold {rep.threshold_sum:.6g})")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
