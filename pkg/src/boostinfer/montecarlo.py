"""Replication harness: bias and rejection probability for both designs.

Replication r draws its sample from ``stream(master_seed, r, experiment)``,
so the estimate vector depends only on the master seed and the config,
never on scheduling.  Aggregates are computed from the index-ordered
vectors, which makes the summary bit-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from .boosting import BoostingConfig, DegenerateDesignError
from .dgp import DgpConfigIV, DgpConfigTE, gen_iv, gen_te, stream
from .inference import WeakFirstStageError, double_selection, iv_estimate, reject_null

EXPERIMENTS = ("iv", "te")


@dataclass
class McConfig:
    experiment: str
    dgp: "DgpConfigIV | DgpConfigTE"
    boosting: BoostingConfig
    replications: int = 500
    master_seed: int = 0
    null_value: "float | None" = None
    level: float = 0.05

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError("experiment must be one of %r" % (EXPERIMENTS,))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 < self.level < 1:
            raise ValueError("level must be in (0, 1)")
        expected = DgpConfigIV if self.experiment == "iv" else DgpConfigTE
        if not isinstance(self.dgp, expected):
            raise ValueError(
                "experiment %r needs a %s" % (self.experiment, expected.__name__)
            )
        if self.null_value is None:
            self.null_value = self.truth

    @property
    def truth(self) -> float:
        """True value of the target coefficient under the DGP."""
        if self.experiment == "iv":
            return self.dgp.beta_true
        return self.dgp.alpha0


@dataclass
class McSummary:
    """Per-replication estimates plus the aggregates built from them.

    ``estimates``/``ses`` are length-R and carry NaN for failed
    replications; ``bias`` is signed (mean estimate minus truth) and
    ``mc_se_bias`` its Monte Carlo standard error (ddof-1 standard
    deviation over sqrt of the effective replication count).
    """

    estimates: np.ndarray
    ses: np.ndarray
    bias: float
    rp: float
    mc_se_bias: float
    failures: int

    @property
    def abs_bias(self) -> float:
        return abs(self.bias)

    @property
    def n_effective(self) -> int:
        return int(np.isfinite(self.estimates).sum())


def _run_replication(args):
    cfg, r = args
    rng = stream(cfg.master_seed, r, cfg.experiment)
    try:
        if cfg.experiment == "iv":
            sample = gen_iv(cfg.dgp, rng)
            est = iv_estimate(sample.y, sample.d, sample.Z, cfg.boosting)
            return est.beta_hat, est.se
        sample = gen_te(cfg.dgp, rng)
        est = double_selection(sample.y, sample.d, sample.X, cfg.boosting)
        return est.alpha_hat, est.se
    except (WeakFirstStageError, DegenerateDesignError):
        return np.nan, np.nan


def run_mc(cfg: McConfig, workers: int = 1) -> McSummary:
    """Run all replications and aggregate bias and rejection probability.

    Failed replications (weak first stage, degenerate selection) are
    recorded as NaN, excluded from the aggregates and counted; they are
    never retried.  Raises if every replication fails.
    """
    tasks = [(cfg, r) for r in range(1, cfg.replications + 1)]
    if workers <= 1:
        results = [_run_replication(t) for t in tasks]
    else:
        chunk = max(1, cfg.replications // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replication, tasks, chunksize=chunk))
    estimates = np.array([r[0] for r in results])
    ses = np.array([r[1] for r in results])
    valid = np.isfinite(estimates)
    failures = int((~valid).sum())
    if failures == cfg.replications:
        raise RuntimeError("all %d replications failed" % cfg.replications)
    rejects = [
        reject_null(e, s, cfg.null_value, cfg.level)
        for e, s in zip(estimates[valid], ses[valid])
    ]
    n_eff = int(valid.sum())
    bias = float(estimates[valid].mean() - cfg.truth)
    sd = float(estimates[valid].std(ddof=1)) if n_eff > 1 else float("nan")
    return McSummary(
        estimates=estimates,
        ses=ses,
        bias=bias,
        rp=float(np.mean(rejects)),
        mc_se_bias=sd / float(np.sqrt(n_eff)),
        failures=failures,
    )


@dataclass
class TableColumn:
    label: str
    bias: float
    rp: float
    reference: bool = False
    mc_se_bias: "float | None" = None
    failures: "int | None" = None


@dataclass
class ComparisonTable:
    """Two data rows (bias, RP) by one column per estimator or reference."""

    columns: list
    metadata: dict = field(default_factory=dict)

    @property
    def labels(self):
        return [c.label for c in self.columns]


def config_hash(cfg) -> str:
    """Stable hash of a (nested) config dataclass."""
    payload = asdict(cfg) if is_dataclass(cfg) else cfg
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def compare_table(summaries, reference_columns=(), metadata=None) -> ComparisonTable:
    """Assemble computed summaries plus static reference columns.

    ``summaries`` is a list of (label, McSummary); ``reference_columns``
    holds (label, bias, rp) triples that are flagged as reference values,
    not computed.
    """
    if not summaries and not reference_columns:
        raise ValueError("compare_table needs at least one column")
    columns = [
        TableColumn(label=label, bias=b, rp=rp, reference=True)
        for label, b, rp in reference_columns
    ]
    for label, s in summaries:
        columns.append(
            TableColumn(
                label=label,
                bias=s.bias,
                rp=s.rp,
                reference=False,
                mc_se_bias=s.mc_se_bias,
                failures=s.failures,
            )
        )
    return ComparisonTable(columns=columns, metadata=dict(metadata or {}))


def render_text(table: ComparisonTable, decimals: int = 3) -> str:
    """Aligned two-row table; floats use round-half-even formatting."""
    labels = [c.label + ("*" if c.reference else "") for c in table.columns]
    width = max([len(s) for s in labels + ["bias", "RP"]]) + 2
    fmt = "%%%d.%df" % (width, decimals)
    out = io.StringIO()
    out.write("%-6s" % "" + "".join("%*s" % (width, s) for s in labels) + "\n")
    out.write("%-6s" % "bias" + "".join(fmt % c.bias for c in table.columns) + "\n")
    out.write("%-6s" % "RP" + "".join(fmt % c.rp for c in table.columns) + "\n")
    if any(c.reference for c in table.columns):
        out.write("* reference values, not computed\n")
    return out.getvalue()


def render_csv(table: ComparisonTable) -> str:
    """CSV with rows bias and RP, a # metadata block, full-precision floats."""
    lines = ["# schema=mc-summary-v1"]
    for key in sorted(table.metadata):
        lines.append("# %s=%s" % (key, table.metadata[key]))
    refs = [c.label for c in table.columns if c.reference]
    lines.append("# reference_columns=%s" % ";".join(refs))
    lines.append("," + ",".join(c.label for c in table.columns))
    lines.append("bias," + ",".join(repr(float(c.bias)) for c in table.columns))
    lines.append("RP," + ",".join(repr(float(c.rp)) for c in table.columns))
    return "\n".join(lines) + "\n"


def render_json(table: ComparisonTable) -> str:
    payload = {
        "schema": "mc-summary-v1",
        "metadata": table.metadata,
        "columns": [
            {
                "label": c.label,
                "bias": c.bias,
                "rp": c.rp,
                "reference": c.reference,
                "mc_se_bias": c.mc_se_bias,
                "failures": c.failures,
            }
            for c in table.columns
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_json(text: str) -> ComparisonTable:
    payload = json.loads(text)
    columns = [
        TableColumn(
            label=c["label"],
            bias=c["bias"],
            rp=c["rp"],
            reference=c["reference"],
            mc_se_bias=c.get("mc_se_bias"),
            failures=c.get("failures"),
        )
        for c in payload["columns"]
    ]
    return ComparisonTable(columns=columns, metadata=payload.get("metadata", {}))
