"""
Case studies: configuration, end-to-end runs and reports.

Two built-in cases update the cantilever against five measured bending
frequencies: ``young5`` (five Young's moduli over blocks of ten elements)
and ``inertia_area4`` (second moment of area and cross-section area over
the two halves of the beam).
"""

from __future__ import annotations

import configparser
import json
import re
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .diagnostics import diagnostics
from .errors import ConfigError, InvalidInputError, SamplerError
from .fem_beam import BeamModel
from .posterior import KINDS, ModalData, ParameterEntry, ParameterSpace, PosteriorDensity
from .samplers import Chain, estimate, hmc_sample, mh_sample, slice_sample

SAMPLERS = ("mh", "slice", "hmc")
MEASURED_FREQUENCIES = (31.9, 197.9, 553.0, 1082.2, 1781.5)

# Cross-section area listed as the initial value of the second case in the
# published parameter table; inconsistent with the stated 60 x 10 mm section.
PUBLISHED_INITIAL_AREA = 8e-4


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler selection and tuning; widths and steps are in sigma units."""

    name: str = "mh"
    proposal_width: float = 0.1
    slice_width: float | None = None
    step_size: float = 0.05
    leapfrog_steps: int = 10
    fd_step: float = 1e-4
    burn_in: int | None = None
    hmc_boundary: str = "reflect"

    def __post_init__(self):
        if self.name not in SAMPLERS:
            raise InvalidInputError(f"sampler must be one of {SAMPLERS}, got {self.name!r}")
        if self.hmc_boundary not in ("reflect", "reject"):
            raise InvalidInputError(f"hmc_boundary must be reflect or reject, got {self.hmc_boundary!r}")


@dataclass(frozen=True)
class CaseStudy:
    name: str
    model: BeamModel
    space: ParameterSpace
    data: ModalData
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    n_samples: int = 1000
    seed: int = 0
    metric: str = "relative"
    prior_mean: str = "zero"
    out_dir: str | None = None

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidInputError(f"n_samples must be a positive integer, got {self.n_samples}")

    def posterior(self) -> PosteriorDensity:
        return PosteriorDensity(self.model, self.space, self.data, self.metric, self.prior_mean)

    def burn_in(self) -> int:
        if self.sampler.burn_in is not None:
            return self.sampler.burn_in
        return self.n_samples // 10


def builtin_case(name: str) -> CaseStudy:
    """Return one of the two published beam case studies."""
    model = BeamModel()
    data = ModalData(MEASURED_FREQUENCIES, n_positions=1, beta=1.0)
    if name == "young5":
        entries = [
            ParameterEntry(f"E{k + 1}", "youngs_modulus", (10 * k, 10 * k + 10), 2e11, 1.7e11, 2.5e11, 2.4e11)
            for k in range(5)
        ]
    elif name == "inertia_area4":
        area = model.nominal_area
        entries = [
            ParameterEntry("I1", "inertia", (0, 25), 5e-9, 3.5e-9, 7.5e-9, 5e-9),
            ParameterEntry("I2", "inertia", (25, 50), 5e-9, 3.5e-9, 7.5e-9, 5e-9),
            ParameterEntry("A1", "area", (0, 25), 5e-4, 4.5e-4, 9e-4, area),
            ParameterEntry("A2", "area", (25, 50), 5e-4, 4.5e-4, 9e-4, area),
        ]
    else:
        raise InvalidInputError(f"unknown case {name!r}; valid names: young5, inertia_area4")
    return CaseStudy(name=name, model=model, space=ParameterSpace(tuple(entries)), data=data)


# -- configuration files ---------------------------------------------------

_BEAM_KEYS = {
    "length": "length",
    "width": "width",
    "thickness": "thickness",
    "youngs_modulus": "youngs_modulus_nominal",
    "poisson_ratio": "poisson_ratio",
    "density": "density",
    "n_elements": "n_elements",
    "point_masses": "point_masses",
}
_PARAM_KEYS = ("names", "kinds", "elements", "sigma", "lower", "upper", "initial")
_DATA_KEYS = ("frequencies", "beta", "positions", "metric", "prior_mean")
_SAMPLER_KEYS = (
    "name", "samples", "seed", "burn_in", "proposal_width", "slice_width",
    "step_size", "leapfrog_steps", "fd_step", "hmc_boundary",
)
_CASE_KEYS = ("name", "base", "out")
_SECTIONS = {
    "case": _CASE_KEYS,
    "beam": tuple(_BEAM_KEYS),
    "parameters": _PARAM_KEYS,
    "data": _DATA_KEYS,
    "sampler": _SAMPLER_KEYS,
}


def _key_lines(text: str) -> dict:
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = lineno
    return lines


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def raw(self, section, key):
        return self.parser.get(section, key).strip()

    def error(self, section, key, message):
        return ConfigError(message, key=f"{section}.{key}", line=self.lines.get((section, key)))

    def number(self, section, key, kind=float):
        text = self.raw(section, key)
        try:
            value = kind(text) if kind is float else _parse_int(text)
        except ValueError:
            raise self.error(section, key, f"malformed number {text!r}") from None
        if kind is float and not np.isfinite(value):
            raise self.error(section, key, f"value must be finite, got {text!r}")
        return value

    def floats(self, section, key, size=None):
        parts = [p.strip() for p in self.raw(section, key).split(",") if p.strip()]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise self.error(section, key, f"malformed number list {self.raw(section, key)!r}") from None
        if size is not None and len(values) != size:
            raise self.error(section, key, f"expected {size} values, got {len(values)}")
        if not all(np.isfinite(values)):
            raise self.error(section, key, "values must be finite")
        return values

    def words(self, section, key, size=None):
        values = [p.strip() for p in self.raw(section, key).split(",") if p.strip()]
        if size is not None and len(values) != size:
            raise self.error(section, key, f"expected {size} values, got {len(values)}")
        return values


def _parse_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


def parse_config(path) -> CaseStudy:
    """Read an INI case description.

    Sections ``[case]``, ``[beam]``, ``[parameters]``, ``[data]`` and
    ``[sampler]``. With ``[case] base = <builtin name>`` every key is an
    override of that case; otherwise all beam, parameter and data keys are
    required. Vector values are comma separated; element ranges are
    half-open ``start:stop``; point masses are ``position:mass`` pairs (or
    ``none``). Errors name the offending key and line.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}", line=getattr(exc, "lineno", None)) from exc
    lines = _key_lines(text)
    r = _Reader(parser, lines)

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]", key=section)
        for key in parser.options(section):
            if key not in _SECTIONS[section]:
                raise r.error(section, key, "unknown key")

    base = None
    if r.has("case", "base"):
        try:
            base = builtin_case(r.raw("case", "base"))
        except InvalidInputError as exc:
            raise r.error("case", "base", str(exc)) from None

    name = r.raw("case", "name") if r.has("case", "name") else (base.name if base else path.stem)
    model = _read_beam(r, base.model if base else None)
    space = _read_parameters(r, base.space if base else None, model)
    data, metric, prior_mean = _read_data(r, base)
    sampler, n_samples, seed = _read_sampler(r, base)
    out_dir = r.raw("case", "out") if r.has("case", "out") else None
    try:
        cs = CaseStudy(name, model, space, data, sampler, n_samples, seed, metric, prior_mean, out_dir)
        cs.posterior()
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    return cs


def _read_beam(r: _Reader, base: BeamModel | None) -> BeamModel:
    values = asdict(base) if base else {}
    for key, attr in _BEAM_KEYS.items():
        if not r.has("beam", key):
            if base is None and key in ("length", "width", "thickness", "youngs_modulus", "density", "n_elements"):
                raise ConfigError("missing required key", key=f"beam.{key}")
            continue
        if key == "point_masses":
            text = r.raw("beam", key)
            pairs = []
            if text.lower() not in ("", "none"):
                for item in text.split(","):
                    try:
                        x, m = (float(v) for v in item.split(":"))
                    except ValueError:
                        raise r.error("beam", key, f"expected position:mass, got {item.strip()!r}") from None
                    pairs.append((x, m))
            values[attr] = tuple(pairs)
        elif key == "n_elements":
            values[attr] = r.number("beam", key, int)
        else:
            values[attr] = r.number("beam", key)
    values.setdefault("point_masses", ())
    try:
        return BeamModel(**values)
    except InvalidInputError as exc:
        raise ConfigError(str(exc), key="beam") from None


def _read_parameters(r: _Reader, base: ParameterSpace | None, model: BeamModel) -> ParameterSpace:
    s = "parameters"
    if base is not None and not r.has(s, "names"):
        q = len(base)
        cols = {
            "names": base.names,
            "kinds": [e.kind for e in base.entries],
            "elements": [e.elements for e in base.entries],
            "sigma": list(base.sigma),
            "lower": list(base.lower),
            "upper": list(base.upper),
            "initial": list(base.initial),
        }
    else:
        if not r.has(s, "names"):
            raise ConfigError("missing required key", key=f"{s}.names")
        q = len(r.words(s, "names"))
        cols = {}
        for key in _PARAM_KEYS[1:]:
            if not r.has(s, key):
                raise ConfigError("missing required key", key=f"{s}.{key}")
    for key in _PARAM_KEYS:
        if not r.has(s, key):
            continue
        if key in ("names", "kinds"):
            cols[key] = r.words(s, key, q)
        elif key == "elements":
            ranges = []
            for item in r.words(s, key, q):
                try:
                    start, stop = (_parse_int(v) for v in item.split(":"))
                except ValueError:
                    raise r.error(s, key, f"expected start:stop, got {item!r}") from None
                ranges.append((start, stop))
            cols[key] = ranges
        else:
            cols[key] = r.floats(s, key, q)

    for i, kind in enumerate(cols["kinds"]):
        if kind not in KINDS:
            raise r.error(s, "kinds", f"entry {i + 1}: kind must be one of {KINDS}, got {kind!r}")
    for i, (start, stop) in enumerate(cols["elements"]):
        if not 0 <= start < stop <= model.n_elements:
            raise r.error(s, "elements", f"entry {i + 1}: range {start}:{stop} not inside 0:{model.n_elements}")
    for i in range(q):
        if not cols["sigma"][i] > 0:
            raise r.error(s, "sigma", f"entry {i + 1}: sigma must be positive")
        if not cols["lower"][i] < cols["upper"][i]:
            key = "lower" if r.has(s, "lower") or not r.has(s, "upper") else "upper"
            raise r.error(s, key, f"entry {i + 1}: lower bound {cols['lower'][i]} must be below upper {cols['upper'][i]}")
        if not cols["lower"][i] <= cols["initial"][i] <= cols["upper"][i]:
            raise r.error(s, "initial", f"entry {i + 1}: initial value outside its bounds")
    entries = [
        ParameterEntry(
            cols["names"][i], cols["kinds"][i], tuple(cols["elements"][i]), cols["sigma"][i],
            cols["lower"][i], cols["upper"][i], cols["initial"][i],
        )
        for i in range(q)
    ]
    try:
        return ParameterSpace(tuple(entries))
    except InvalidInputError as exc:
        raise ConfigError(str(exc), key=s) from None


def _read_data(r: _Reader, base: CaseStudy | None):
    s = "data"
    if base is None and not r.has(s, "frequencies"):
        raise ConfigError("missing required key", key=f"{s}.frequencies")
    freqs = r.floats(s, "frequencies") if r.has(s, "frequencies") else list(base.data.frequencies)
    beta = base.data.beta if base else 1.0
    if r.has(s, "beta"):
        values = r.floats(s, "beta")
        if len(values) not in (1, len(freqs)):
            raise r.error(s, "beta", f"expected 1 or {len(freqs)} values, got {len(values)}")
        if any(v <= 0 for v in values):
            raise r.error(s, "beta", "entries must be positive")
        beta = values[0] if len(values) == 1 else tuple(values)
    positions = r.number(s, "positions", int) if r.has(s, "positions") else (base.data.n_positions if base else 1)
    metric = r.raw(s, "metric") if r.has(s, "metric") else (base.metric if base else "relative")
    prior_mean = r.raw(s, "prior_mean") if r.has(s, "prior_mean") else (base.prior_mean if base else "zero")
    if metric not in ("relative", "absolute"):
        raise r.error(s, "metric", f"must be relative or absolute, got {metric!r}")
    if prior_mean not in ("zero", "nominal"):
        raise r.error(s, "prior_mean", f"must be zero or nominal, got {prior_mean!r}")
    try:
        data = ModalData(tuple(freqs), positions, beta)
    except InvalidInputError as exc:
        raise ConfigError(str(exc), key=s) from None
    return data, metric, prior_mean


def _read_sampler(r: _Reader, base: CaseStudy | None):
    s = "sampler"
    cfg = asdict(base.sampler) if base else asdict(SamplerConfig())
    n_samples = base.n_samples if base else 1000
    seed = base.seed if base else 0
    if r.has(s, "name"):
        cfg["name"] = r.raw(s, "name")
        if cfg["name"] not in SAMPLERS:
            raise r.error(s, "name", f"must be one of {SAMPLERS}, got {cfg['name']!r}")
    if r.has(s, "samples"):
        n_samples = r.number(s, "samples", int)
        if n_samples < 1:
            raise r.error(s, "samples", "must be at least 1")
    if r.has(s, "seed"):
        seed = r.number(s, "seed", int)
    if r.has(s, "burn_in"):
        cfg["burn_in"] = r.number(s, "burn_in", int)
        if not 0 <= cfg["burn_in"] < n_samples:
            raise r.error(s, "burn_in", f"must be in [0, {n_samples})")
    for key in ("proposal_width", "slice_width", "step_size", "fd_step"):
        if r.has(s, key):
            cfg[key] = r.number(s, key)
            if cfg[key] <= 0:
                raise r.error(s, key, "must be positive")
    if r.has(s, "hmc_boundary"):
        cfg["hmc_boundary"] = r.raw(s, "hmc_boundary")
        if cfg["hmc_boundary"] not in ("reflect", "reject"):
            raise r.error(s, "hmc_boundary", f"must be reflect or reject, got {cfg['hmc_boundary']!r}")
    if r.has(s, "leapfrog_steps"):
        cfg["leapfrog_steps"] = r.number(s, "leapfrog_steps", int)
        if cfg["leapfrog_steps"] < 1:
            raise r.error(s, "leapfrog_steps", "must be at least 1")
    return SamplerConfig(**cfg), n_samples, seed


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


def write_config(cs: CaseStudy, path) -> None:
    """Write the fully resolved case; :func:`parse_config` reads it back unchanged."""
    m, sp, d, sc = cs.model, cs.space, cs.data, cs.sampler
    beta = d.beta if isinstance(d.beta, tuple) else (d.beta,)
    masses = ", ".join(f"{x!r}:{w!r}" for x, w in m.point_masses) or "none"
    out = [
        "[case]",
        f"name = {cs.name}",
        *([f"out = {cs.out_dir}"] if cs.out_dir is not None else []),
        "",
        "[beam]",
        f"length = {m.length!r}",
        f"width = {m.width!r}",
        f"thickness = {m.thickness!r}",
        f"youngs_modulus = {m.youngs_modulus_nominal!r}",
        f"poisson_ratio = {m.poisson_ratio!r}",
        f"density = {m.density!r}",
        f"n_elements = {m.n_elements}",
        f"point_masses = {masses}",
        "",
        "[parameters]",
        f"names = {', '.join(sp.names)}",
        f"kinds = {', '.join(e.kind for e in sp.entries)}",
        f"elements = {', '.join(f'{a}:{b}' for a, b in (e.elements for e in sp.entries))}",
        f"sigma = {_fmt(sp.sigma)}",
        f"lower = {_fmt(sp.lower)}",
        f"upper = {_fmt(sp.upper)}",
        f"initial = {_fmt(sp.initial)}",
        "",
        "[data]",
        f"frequencies = {_fmt(d.frequencies)}",
        f"beta = {_fmt(beta)}",
        f"positions = {d.n_positions}",
        f"metric = {cs.metric}",
        f"prior_mean = {cs.prior_mean}",
        "",
        "[sampler]",
        f"name = {sc.name}",
        f"samples = {cs.n_samples}",
        f"seed = {cs.seed}",
        *([f"burn_in = {sc.burn_in}"] if sc.burn_in is not None else []),
        f"proposal_width = {sc.proposal_width!r}",
        *([f"slice_width = {sc.slice_width!r}"] if sc.slice_width is not None else []),
        f"step_size = {sc.step_size!r}",
        f"leapfrog_steps = {sc.leapfrog_steps}",
        f"fd_step = {sc.fd_step!r}",
        f"hmc_boundary = {sc.hmc_boundary}",
    ]
    Path(path).write_text("\n".join(out) + "\n")


# -- runs and reports -------------------------------------------------------


@dataclass
class Report:
    """Outcome of one case-study run.

    Percentage errors are ``100 * |f - f_measured| / f_measured``. Fields
    describing the update are ``None`` when the sampler failed before
    producing any state; ``error`` then carries the failure message.
    """

    case: str
    sampler: str
    seed: int
    n_samples: int
    burn_in: int
    parameter_names: list
    initial: list
    posterior_mean: list | None
    posterior_std: list | None
    measured_frequencies: list
    initial_frequencies: list
    initial_errors_pct: list
    updated_frequencies: list | None
    updated_errors_pct: list | None
    acceptance_rate: float | None
    ess: list | None
    ess_degenerate: list | None
    n_target_evals: int
    n_retained: int
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    @property
    def mean_initial_error(self) -> float:
        return float(np.mean(self.initial_errors_pct))

    @property
    def mean_updated_error(self) -> float | None:
        if self.updated_errors_pct is None:
            return None
        return float(np.mean(self.updated_errors_pct))


@dataclass
class RunResult:
    report: Report
    chain: Chain | None
    wall_time: float
    files: dict = field(default_factory=dict)


def percent_error(updated, measured) -> np.ndarray:
    updated = np.asarray(updated, dtype=float)
    measured = np.asarray(measured, dtype=float)
    return 100.0 * np.abs(updated - measured) / measured


def _floats(values):
    return [float(v) for v in values]


def _run_sampler(cs: CaseStudy, pd: PosteriorDensity) -> Chain:
    sc = cs.sampler
    target = pd.as_target(h=sc.fd_step)
    theta0 = cs.space.initial
    if sc.name == "mh":
        return mh_sample(target, theta0, cs.n_samples, cs.seed, widths=sc.proposal_width)
    if sc.name == "slice":
        return slice_sample(target, theta0, cs.n_samples, cs.seed, widths=sc.slice_width)
    return hmc_sample(
        target, theta0, cs.n_samples, cs.seed,
        step_size=sc.step_size, n_steps=sc.leapfrog_steps, boundary=sc.hmc_boundary,
    )


def run_case(cs: CaseStudy, out_dir=None) -> RunResult:
    """Sample the case posterior and summarise it.

    The updated parameter vector is the post-burn-in chain mean; the updated
    frequencies are recomputed from the FE model at that vector. When
    ``out_dir`` (or ``cs.out_dir``) is given, writes ``chain.csv``,
    ``report.txt``, ``report.json``, ``config.ini`` and ``timing.json``.
    A sampler failure is recorded in the report and the partial chain kept.
    """
    pd = cs.posterior()
    initial = cs.space.initial
    measured = np.asarray(cs.data.frequencies)
    f_initial = pd.model_frequencies(initial)

    start = time.perf_counter()
    error = None
    try:
        chain = _run_sampler(cs, pd)
    except SamplerError as exc:
        chain = exc.partial_chain
        error = str(exc)
    wall_time = time.perf_counter() - start

    n_kept = len(chain) if chain is not None else 0
    burn_in = min(cs.burn_in(), max(n_kept - 1, 0))
    mean = std = f_updated = err_updated = None
    acc = ess = degenerate = None
    if n_kept:
        mean = estimate(chain, burn_in=burn_in)
        kept = chain.samples[burn_in:]
        std = kept.std(axis=0, ddof=1) if kept.shape[0] > 1 else np.zeros(kept.shape[1])
        f_updated = pd.model_frequencies(mean)
        err_updated = _floats(percent_error(f_updated, measured))
        f_updated = _floats(f_updated)
        acc = float(np.mean(chain.accepted))
        if n_kept >= 10:
            diag = diagnostics(chain)
            ess = _floats(diag.ess)
            degenerate = [bool(v) for v in diag.degenerate]
        mean, std = _floats(mean), _floats(std)

    report = Report(
        case=cs.name,
        sampler=cs.sampler.name,
        seed=cs.seed,
        n_samples=cs.n_samples,
        burn_in=burn_in,
        parameter_names=list(cs.space.names),
        initial=_floats(initial),
        posterior_mean=mean,
        posterior_std=std,
        measured_frequencies=_floats(measured),
        initial_frequencies=_floats(f_initial),
        initial_errors_pct=_floats(percent_error(f_initial, measured)),
        updated_frequencies=f_updated,
        updated_errors_pct=err_updated,
        acceptance_rate=acc,
        ess=ess,
        ess_degenerate=degenerate,
        n_target_evals=chain.n_target_evals if chain is not None else 0,
        n_retained=n_kept,
        error=error,
    )
    result = RunResult(report, chain, wall_time)

    out_dir = out_dir if out_dir is not None else cs.out_dir
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "chain": out / "chain.csv",
            "report_text": out / "report.txt",
            "report_json": out / "report.json",
            "config": out / "config.ini",
            "timing": out / "timing.json",
        }
        if chain is not None:
            chain.to_csv(files["chain"])
        emit_report(report, files["report_text"], "text")
        emit_report(report, files["report_json"], "json")
        write_config(replace(cs, out_dir=None), files["config"])
        files["timing"].write_text(json.dumps({"wall_time_s": wall_time}) + "\n")
        result.files = files
    return result


def format_report(report: Report) -> str:
    lines = [
        f"Case: {report.case}   Sampler: {report.sampler}   Seed: {report.seed}   "
        f"Samples: {report.n_samples}   Burn-in: {report.burn_in}",
        "",
    ]
    if report.error:
        lines += [f"ERROR: {report.error}", f"Retained states before failure: {report.n_retained}", ""]

    lines.append(f"{'Parameter':<10}{'Initial':>14}{'Posterior mean':>18}{'Posterior std':>16}")
    for i, name in enumerate(report.parameter_names):
        mean = f"{report.posterior_mean[i]:.4e}" if report.posterior_mean else "-"
        std = f"{report.posterior_std[i]:.4e}" if report.posterior_std else "-"
        lines.append(f"{name:<10}{report.initial[i]:>14.4e}{mean:>18}{std:>16}")
    lines.append("")

    lines.append(
        f"{'Mode':<6}{'Measured (Hz)':>15}{'Initial (Hz)':>14}{'Error (%)':>11}"
        f"{'Updated (Hz)':>14}{'Error (%)':>11}"
    )
    for i, f_meas in enumerate(report.measured_frequencies):
        upd = f"{report.updated_frequencies[i]:.1f}" if report.updated_frequencies else "-"
        upd_err = f"{report.updated_errors_pct[i]:.2f}" if report.updated_errors_pct else "-"
        lines.append(
            f"{i + 1:<6}{f_meas:>15.1f}{report.initial_frequencies[i]:>14.1f}"
            f"{report.initial_errors_pct[i]:>11.2f}{upd:>14}{upd_err:>11}"
        )
    upd_mean = f"{report.mean_updated_error:.2f}" if report.updated_errors_pct else "-"
    lines.append(f"{'Mean':<6}{'':>15}{'':>14}{report.mean_initial_error:>11.2f}{'':>14}{upd_mean:>11}")
    lines.append("")

    acc = f"{report.acceptance_rate:.3f}" if report.acceptance_rate is not None else "-"
    lines.append(f"Acceptance rate: {acc}")
    if report.ess is not None:
        ess = ", ".join(
            f"{n}={v:.1f}" + (" (degenerate)" if d else "")
            for n, v, d in zip(report.parameter_names, report.ess, report.ess_degenerate)
        )
        lines.append(f"Effective sample size: {ess}")
    lines.append(f"Target evaluations (FE solves): {report.n_target_evals}")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, path, format: str = "text") -> Path:
    """Write ``report`` as an aligned text table or as JSON."""
    path = Path(path)
    if format == "text":
        content = format_report(report)
    elif format == "json":
        content = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        raise InvalidInputError(f"format must be 'text' or 'json', got {format!r}")
    path.write_text(content)
    return path


def load_report(path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text()))


def format_comparison(reports: dict) -> str:
    """Side-by-side parameter and frequency tables for several samplers."""
    labels = list(reports)
    first = reports[labels[0]]
    lines = [f"Case: {first.case}   Seed: {first.seed}   Samples: {first.n_samples}", ""]

    head = f"{'Parameter':<10}{'Initial':>12}" + "".join(f"{lab:>14}" for lab in labels)
    lines.append(head)
    for i, name in enumerate(first.parameter_names):
        row = f"{name:<10}{first.initial[i]:>12.4e}"
        for lab in labels:
            pm = reports[lab].posterior_mean
            row += f"{pm[i]:>14.4e}" if pm else f"{'-':>14}"
        lines.append(row)
    lines.append("")

    head = f"{'Mode':<6}{'Measured':>10}{'Initial':>10}{'Err%':>7}"
    head += "".join(f"{lab:>10}{'Err%':>7}" for lab in labels)
    lines.append(head)
    for i, f_meas in enumerate(first.measured_frequencies):
        row = f"{i + 1:<6}{f_meas:>10.1f}{first.initial_frequencies[i]:>10.1f}{first.initial_errors_pct[i]:>7.2f}"
        for lab in labels:
            rep = reports[lab]
            if rep.updated_frequencies:
                row += f"{rep.updated_frequencies[i]:>10.1f}{rep.updated_errors_pct[i]:>7.2f}"
            else:
                row += f"{'-':>10}{'-':>7}"
        lines.append(row)
    row = f"{'Mean':<6}{'':>10}{'':>10}{first.mean_initial_error:>7.2f}"
    for lab in labels:
        m = reports[lab].mean_updated_error
        row += f"{'':>10}{m:>7.2f}" if m is not None else f"{'':>10}{'-':>7}"
    lines.append(row)
    lines.append("")
    for lab in labels:
        rep = reports[lab]
        acc = f"{rep.acceptance_rate:.3f}" if rep.acceptance_rate is not None else "-"
        lines.append(f"{lab}: acceptance {acc}, FE solves {rep.n_target_evals}" + (f", ERROR {rep.error}" if rep.error else ""))
    return "\n".join(lines) + "\n"


def compare(cs: CaseStudy, out_dir=None, samplers=SAMPLERS) -> dict:
    """Run every sampler on ``cs``; outputs go to ``out_dir/<sampler>/``."""
    results = {}
    for name in samplers:
        case = replace(cs, sampler=replace(cs.sampler, name=name))
        sub = Path(out_dir) / name if out_dir is not None else None
        results[name] = run_case(case, sub)
    if out_dir is not None:
        text = format_comparison({k: r.report for k, r in results.items()})
        (Path(out_dir) / "compare.txt").write_text(text)
    return results
