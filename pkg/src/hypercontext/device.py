"""Monte Carlo model of the coloured-decagon coin-toss box.

Geometry. The object is a regular 2n-gon; sector k carries (color, shade).
Lab slots are numbered like sectors. Every press starts from the reference
orientation (slot k shows sector k) and tosses the object about the axis
of the selected context: with probability 1/2 it stays, otherwise it is
flipped, and a flip about axis ``a`` makes slot k show sector (a - k) mod 2n.
A detector is a set of slots; to report measurement A_c it finds the one
slot in its set currently showing color c and reports dark -> top,
light -> bottom.

Modes. "contextual": one (axis, two-slot detector) per context, default_device
puts the detectors of C_{n-1} and C_0 on opposite sides for color 0.
"overlapped": every context shares one axis and one detector covering a
semicircle of n slots; the box is told which colors to report.

Randomness. Press j of a schedule draws from Philox seeded by
SeedSequence(seed, spawn_key=(j,)), so any press can be regenerated alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .behaviors import Behavior, check_nondisturbance, marginalize
from .polytope import NCDecision, cycle_inequality, decide_noncontextual
from .scenario import (
    BOT, SCHEMA_VERSION, TOP, Scenario, UnknownContext, UnknownMeasurement, build_n_cycle,
)

DARK, LIGHT = "dark", "light"
CONTEXTUAL, OVERLAPPED = "contextual", "overlapped"
RANDOM_UNIFORM, AGENT_CHOSEN = "random-uniform", "agent-chosen"
JOINT, SINGLE, SEQUENTIAL = "joint", "single", "sequential"
_OUTCOMES = (BOT, TOP)  # index 0 / 1 in the simulation arrays


class DeviceConfigError(ValueError):
    pass


class EmptySchedule(ValueError):
    pass


class MissingContextData(ValueError):
    pass


@dataclass(frozen=True)
class ContextGeometry:
    axis: int
    detector: tuple[int, ...]


@dataclass(frozen=True)
class DeviceConfig:
    n: int
    sectors: tuple[tuple[int, str], ...]
    contexts: tuple[ContextGeometry, ...]
    mode: str = CONTEXTUAL
    context_selection: str = RANDOM_UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "sectors", tuple((int(c), s) for c, s in self.sectors))
        object.__setattr__(self, "contexts", tuple(
            g if isinstance(g, ContextGeometry) else ContextGeometry(int(g[0]), tuple(g[1]))
            for g in self.contexts))
        problems = _config_problems(self)
        if problems:
            raise DeviceConfigError("; ".join(problems))

    @property
    def scenario(self) -> Scenario:
        return build_n_cycle(self.n)

    def shown_sector(self, context: int, flipped: bool, slot: int) -> int:
        m = 2 * self.n
        return (self.contexts[context].axis - slot) % m if flipped else slot % m

    def read(self, context: int, flipped: bool, color: int) -> str:
        """Outcome reported for ``color`` by the detector of ``context``."""
        hits = [self.shown_sector(context, flipped, s) for s in self.contexts[context].detector]
        hits = [k for k in hits if self.sectors[k][0] == color]
        if len(hits) != 1:
            raise DeviceConfigError(f"detector of context {context} sees color {color} {len(hits)} times")
        return TOP if self.sectors[hits[0]][1] == DARK else BOT

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "n": self.n,
            "sectors": [[c, s] for c, s in self.sectors],
            "contexts": [{"axis": g.axis, "detector": list(g.detector)} for g in self.contexts],
            "mode": self.mode,
            "context_selection": self.context_selection,
        }


def _config_problems(cfg: DeviceConfig) -> list[str]:
    n, m = cfg.n, 2 * cfg.n
    out = []
    if not isinstance(n, int) or n < 3:
        return [f"n must be an integer >= 3, got {n!r}"]
    if cfg.mode not in (CONTEXTUAL, OVERLAPPED):
        out.append(f"unknown mode {cfg.mode!r}")
    if cfg.context_selection not in (RANDOM_UNIFORM, AGENT_CHOSEN):
        out.append(f"unknown context selection policy {cfg.context_selection!r}")
    if len(cfg.sectors) != m:
        return out + [f"need {m} sectors, got {len(cfg.sectors)}"]
    for k, (color, shade) in enumerate(cfg.sectors):
        if shade not in (DARK, LIGHT) or not 0 <= color < n:
            out.append(f"sector {k} has bad descriptor {(color, shade)}")
    if out:
        return out
    for k in range(n):
        (c1, s1), (c2, s2) = cfg.sectors[k], cfg.sectors[k + n]
        if c1 != c2 or s1 == s2:
            out.append(f"sectors {k} and {k + n} must carry one color in opposite shades")
    for c in range(n):
        if sum(1 for col, _ in cfg.sectors if col == c) != 2:
            out.append(f"color {c} must appear on exactly two sectors")
    if len(cfg.contexts) != n:
        return out + [f"need geometry for {n} contexts, got {len(cfg.contexts)}"]
    if out:
        return out
    for i, g in enumerate(cfg.contexts):
        if any(not 0 <= s < m for s in g.detector) or len(set(g.detector)) != len(g.detector):
            out.append(f"context {i}: detector slots {g.detector} invalid")
            continue
        if cfg.mode == CONTEXTUAL and len(g.detector) != 2:
            out.append(f"context {i}: a contextual detector reads exactly two slots")
        for flipped in (False, True):
            colors = sorted(cfg.sectors[cfg.shown_sector(i, flipped, s)][0] for s in g.detector)
            needed = (i, (i + 1) % n)
            if any(colors.count(c) != 1 for c in needed):
                out.append(f"context {i}: detector shows colors {colors} "
                           f"({'flipped' if flipped else 'reference'}), needs {needed} once each")
    if cfg.mode == OVERLAPPED and len({g for g in cfg.contexts}) != 1:
        out.append("overlapped mode needs one shared axis and detector for every context")
    return out


def default_sectors(n: int = 5) -> tuple[tuple[int, str], ...]:
    return tuple((k % n, DARK if k % 2 == 0 else LIGHT) for k in range(2 * n))


def default_device(n: int = 5) -> DeviceConfig:
    """Contextual detectors on slots (i, i+1); axis 2i+n+1 swaps them with (i+n, i+n+1)."""
    if n % 2 == 0:
        raise DeviceConfigError("opposite shades on opposite sides need an odd number of colors")
    m = 2 * n
    contexts = tuple(ContextGeometry((2 * i + n + 1) % m, (i, (i + 1) % m)) for i in range(n))
    return DeviceConfig(n, default_sectors(n), contexts, CONTEXTUAL, RANDOM_UNIFORM)


def overlapped_device(window_start: int = 0, n: int = 5, axis: int | None = None) -> DeviceConfig:
    """All detectors merged into one reading slots window_start .. window_start+n-1.

    The default axis carries that semicircle onto the opposite one.
    """
    m = 2 * n
    if axis is None:
        axis = (2 * window_start - 1) % m
    geom = ContextGeometry(axis % m, tuple((window_start + j) % m for j in range(n)))
    return DeviceConfig(n, default_sectors(n), (geom,) * n, OVERLAPPED, RANDOM_UNIFORM)


_DEVICE_KEYS = {"version", "n", "sectors", "contexts", "mode", "context_selection"}


def device_from_json(doc: Mapping) -> DeviceConfig:
    if not isinstance(doc, Mapping):
        raise DeviceConfigError("device document must be an object")
    unknown = set(doc) - _DEVICE_KEYS
    if unknown:
        raise DeviceConfigError(f"unknown fields {sorted(unknown)}")
    if doc.get("version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise DeviceConfigError(f"unsupported version {doc.get('version')!r}")
    try:
        contexts = []
        for g in doc["contexts"]:
            if set(g) != {"axis", "detector"}:
                raise DeviceConfigError("context geometry needs exactly 'axis' and 'detector'")
            contexts.append(ContextGeometry(int(g["axis"]), tuple(int(s) for s in g["detector"])))
        return DeviceConfig(
            int(doc["n"]), tuple((int(c), s) for c, s in doc["sectors"]), tuple(contexts),
            doc.get("mode", CONTEXTUAL), doc.get("context_selection", RANDOM_UNIFORM))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DeviceConfigError):
            raise
        raise DeviceConfigError(f"malformed device document: {exc!r}") from None


@dataclass(frozen=True)
class DeviceState:
    """Resting configuration after a toss: the axis used and whether it flipped."""

    axis: int
    flipped: bool


# -- presses ---------------------------------------------------------------

@dataclass(frozen=True)
class Press:
    """One schedule entry: which buttons, how, and (agent-chosen policy) which context."""

    kind: str
    measurements: tuple[str, ...]
    context: int | None = None

    def __post_init__(self):
        if self.kind not in (JOINT, SINGLE, SEQUENTIAL):
            raise ValueError(f"unknown press kind {self.kind!r}")
        object.__setattr__(self, "measurements", tuple(self.measurements))


@dataclass(frozen=True)
class TrialRecord:
    pressed: tuple[str, ...]
    mode: str
    outcomes: tuple[str, ...]
    contexts: tuple[str, ...]
    rng_seed_path: str

    def to_json(self) -> dict:
        return {"mode": self.mode, "pressed": list(self.pressed), "outcomes": list(self.outcomes),
                "contexts": list(self.contexts), "rng": self.rng_seed_path}


def press_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _context_of_pair(device: DeviceConfig, a: str, b: str) -> int:
    s = device.scenario
    try:
        k = s.context_index((a, b))
    except UnknownContext:
        raise UnknownContext(f"{a} and {b} are not jointly measurable") from None
    if s.contexts[k] != (a, b):
        raise UnknownContext(f"press order must follow the cycle: {s.context_id(k)}")
    return k


def _color(device: DeviceConfig, measurement: str) -> int:
    idx = device.scenario.measurement_index
    if measurement not in idx:
        raise UnknownMeasurement(measurement)
    return idx[measurement]


def _reading_table(device: DeviceConfig, k: int, colors: Sequence[int]) -> np.ndarray:
    """table[flip, j] = outcome index reported for colors[j]."""
    return np.array([[_OUTCOMES.index(device.read(k, bool(f), c)) for c in colors] for f in (0, 1)])


def _single_batch(device, measurement, rng, trials, context=None):
    """(outcome indices, context indices) for ``trials`` single presses."""
    c = _color(device, measurement)
    n = device.n
    options = ((c - 1) % n, c)  # C_{c-1} and C_c both contain A_c
    if context is not None:
        k = device.scenario.context_index(context)
        if k not in options:
            raise UnknownContext(f"context {device.scenario.context_id(k)} does not contain {measurement}")
        chosen = np.full(trials, k)
        flips = rng.integers(0, 2, size=trials)
    elif device.context_selection == AGENT_CHOSEN:
        raise ValueError("agent-chosen policy: the press must name a context")
    else:
        chosen = np.where(rng.integers(0, 2, size=trials) == 0, options[0], options[1])
        flips = rng.integers(0, 2, size=trials)
    out = np.empty(trials, dtype=np.int8)
    for k in set(options):
        mask = chosen == k
        out[mask] = _reading_table(device, k, [c])[flips[mask], 0]
    return out, chosen


def simulate_press(device: DeviceConfig, press: Press, rng: np.random.Generator, trials: int):
    """Vectorised core. Returns (outcome index array (trials, k), context index array (trials, k'))."""
    if trials < 0:
        raise ValueError("trials must be non-negative")
    ms = press.measurements
    if press.kind == JOINT:
        if len(ms) != 2:
            raise UnknownContext(f"a joint press needs two consecutive buttons, got {ms}")
        k = _context_of_pair(device, *ms)
        flips = rng.integers(0, 2, size=trials)
        table = _reading_table(device, k, [_color(device, m) for m in ms])
        return table[flips], np.full((trials, 1), k)
    if press.kind == SINGLE:
        if len(ms) != 1:
            raise UnknownMeasurement(f"a single press names one button, got {ms}")
        out, chosen = _single_batch(device, ms[0], rng, trials, press.context)
        return out[:, None], chosen[:, None]
    if len(ms) != 2:
        raise UnknownMeasurement(f"a sequential press names two buttons, got {ms}")
    _context_of_pair(device, *ms)
    first, c1 = _single_batch(device, ms[0], rng, trials, press.context)
    second, c2 = _single_batch(device, ms[1], rng, trials, press.context)
    return np.stack([first, second], axis=1), np.stack([c1, c2], axis=1)


def _records(device, press, outcomes, chosen, path) -> Iterator[TrialRecord]:
    s = device.scenario
    ids = [s.context_id(k) for k in range(len(s.contexts))]
    for t in range(outcomes.shape[0]):
        yield TrialRecord(press.measurements, press.kind,
                          tuple(_OUTCOMES[v] for v in outcomes[t]),
                          tuple(ids[k] for k in chosen[t]), f"{path}#{t}")


def press_joint(device: DeviceConfig, context, rng: np.random.Generator) -> TrialRecord:
    s = device.scenario
    k = s.context_index(context)
    press = Press(JOINT, s.contexts[k])
    out, chosen = simulate_press(device, press, rng, 1)
    return next(_records(device, press, out, chosen, "adhoc"))


def press_single(device: DeviceConfig, measurement: str, rng: np.random.Generator,
                 context=None) -> TrialRecord:
    press = Press(SINGLE, (measurement,), context)
    out, chosen = simulate_press(device, press, rng, 1)
    return next(_records(device, press, out, chosen, "adhoc"))


def press_sequential(device: DeviceConfig, first: str, second: str, rng: np.random.Generator,
                     context=None) -> TrialRecord:
    press = Press(SEQUENTIAL, (first, second), context)
    out, chosen = simulate_press(device, press, rng, 1)
    return next(_records(device, press, out, chosen, "adhoc"))


# -- experiments -------------------------------------------------------------

@dataclass
class EmpiricalBehavior:
    """Outcome counts by press kind; joint counts feed behavior estimation."""

    scenario: Scenario
    joint: dict[int, dict[tuple[str, ...], int]] = field(default_factory=dict)
    single: dict[str, dict[str, int]] = field(default_factory=dict)
    sequential: dict[tuple[str, str], dict[tuple[str, ...], int]] = field(default_factory=dict)

    def trials(self, k: int) -> int:
        return sum(self.joint.get(k, {}).values())

    def frequencies(self, k: int) -> dict[tuple[str, ...], float]:
        total = self.trials(k)
        if not total:
            raise MissingContextData(f"context {self.scenario.context_id(k)} has no joint trials")
        return {o: c / total for o, c in self.joint[k].items()}

    def single_frequency(self, measurement: str, outcome: str = TOP) -> float:
        counts = self.single[measurement]
        return counts[outcome] / sum(counts.values())

    def sequential_frequencies(self, pair: tuple[str, str]) -> dict[tuple[str, ...], float]:
        counts = self.sequential[tuple(pair)]
        total = sum(counts.values())
        return {o: c / total for o, c in counts.items()}

    def to_behavior(self) -> Behavior:
        """Rationalise: p(s|C) = count / trials(C), exactly."""
        missing = [self.scenario.context_id(k) for k in range(len(self.scenario.contexts))
                   if not self.trials(k)]
        if missing:
            raise MissingContextData(f"no joint trials for contexts {missing}")
        return Behavior(self.scenario, tuple(
            {o: Fraction(c, self.trials(k)) for o, c in self.joint[k].items()}
            for k in range(len(self.scenario.contexts))))

    def to_json(self) -> dict:
        s = self.scenario
        doc = {"version": SCHEMA_VERSION, "scenario": s.to_json()}
        try:
            doc["tables"] = self.to_behavior().to_json()["tables"]
        except MissingContextData:
            pass
        doc["counts"] = {
            "joint": {s.context_id(k): {",".join(o): c for o, c in t.items()}
                      for k, t in sorted(self.joint.items())},
            "single": {m: dict(t) for m, t in self.single.items()},
            "sequential": {",".join(p): {",".join(o): c for o, c in t.items()}
                           for p, t in self.sequential.items()},
        }
        return doc


def _empty(scenario, width):
    import itertools
    return {o: 0 for o in itertools.product(scenario.outcomes, repeat=width)}


def _iter_schedule(device, schedule, seed, trials):
    if not schedule:
        raise EmptySchedule("the schedule names no presses")
    for j, press in enumerate(schedule):
        out, chosen = simulate_press(device, press, press_rng(seed, j), trials)
        yield j, press, out, chosen


def run_experiment(device: DeviceConfig, schedule: Sequence[Press], seed: int,
                   trials: int) -> EmpiricalBehavior:
    """Run ``trials`` trials of every press; deterministic in (device, schedule, seed, trials)."""
    s = device.scenario
    emp = EmpiricalBehavior(s)
    for _, press, out, _chosen in _iter_schedule(device, schedule, seed, trials):
        codes = out @ (2 ** np.arange(out.shape[1])[::-1]) if out.size else np.zeros(0, dtype=int)
        hist = np.bincount(codes.astype(np.int64), minlength=2 ** out.shape[1])
        width = out.shape[1]
        counts = {}
        for code, c in enumerate(hist):
            bits = [(code >> (width - 1 - i)) & 1 for i in range(width)]
            counts[tuple(_OUTCOMES[b] for b in bits)] = int(c)
        if press.kind == JOINT:
            k = s.context_index(press.measurements)
            acc = emp.joint.setdefault(k, _empty(s, 2))
        elif press.kind == SINGLE:
            acc = emp.single.setdefault(press.measurements[0], {o: 0 for o in s.outcomes})
            counts = {o[0]: c for o, c in counts.items()}
        else:
            acc = emp.sequential.setdefault(press.measurements, _empty(s, 2))
        for o, c in counts.items():
            acc[o] += c
    return emp


def trial_records(device: DeviceConfig, schedule: Sequence[Press], seed: int,
                  trials: int) -> Iterator[TrialRecord]:
    """The per-trial log matching ``run_experiment`` with the same arguments."""
    for j, press, out, chosen in _iter_schedule(device, schedule, seed, trials):
        yield from _records(device, press, out, chosen, f"{seed}/{j}")


def joint_schedule(device: DeviceConfig, repeats: int = 1) -> list[Press]:
    s = device.scenario
    return [Press(JOINT, ctx) for _ in range(repeats) for ctx in s.contexts]


def single_schedule(device: DeviceConfig) -> list[Press]:
    return [Press(SINGLE, (m,)) for m in device.scenario.measurements]


def sequential_schedule(device: DeviceConfig) -> list[Press]:
    return [Press(SEQUENTIAL, ctx) for ctx in device.scenario.contexts]


def induced_behavior(device: DeviceConfig) -> Behavior:
    """Exact limiting joint-press behavior: each context's two resting states at 1/2."""
    s = device.scenario
    half = Fraction(1, 2)
    tables = []
    for k, ctx in enumerate(s.contexts):
        colors = [s.measurement_index[m] for m in ctx]
        table = {}
        for flipped in (False, True):
            key = tuple(device.read(k, flipped, c) for c in colors)
            table[key] = table.get(key, Fraction(0)) + half
        tables.append(table)
    return Behavior(s, tuple(tables))


# -- analysis bridge -----------------------------------------------------------

@dataclass(frozen=True)
class CorrelationEstimate:
    value: Fraction
    estimate: float
    stderr: float
    ci: tuple[float, float]
    bound: Fraction
    violated: bool
    significant: bool
    boundary: bool


@dataclass(frozen=True)
class StatisticalNonDisturbance:
    consistent: bool
    exact: bool
    max_z: float
    flagged: tuple[tuple[str, str, str], ...]


@dataclass(frozen=True)
class CertificationReport:
    behavior: Behavior
    correlation: CorrelationEstimate | None
    nondisturbance: StatisticalNonDisturbance
    decision: NCDecision
    boundary_proximity: bool

    def to_json(self) -> dict:
        from ._rational import format_fraction
        doc = {"decision": self.decision.to_json(), "boundary_proximity": self.boundary_proximity,
               "nondisturbance": {"consistent": self.nondisturbance.consistent,
                                  "exact": self.nondisturbance.exact,
                                  "max_z": self.nondisturbance.max_z,
                                  "flagged": [list(f) for f in self.nondisturbance.flagged]}}
        c = self.correlation
        if c is not None:
            doc["correlation"] = {"value": format_fraction(c.value), "estimate": c.estimate,
                                  "stderr": c.stderr, "ci": list(c.ci), "bound": format_fraction(c.bound),
                                  "violated": c.violated, "significant": c.significant,
                                  "boundary": c.boundary}
        return doc


def _correlation_estimate(emp: EmpiricalBehavior, behavior: Behavior, z: float):
    n = len(emp.scenario.measurements)
    inequality = cycle_inequality(n)
    value = inequality.value(behavior)
    var = 0.0
    for k in range(len(emp.scenario.contexts)):
        e = float(sum(inequality.coefficients.get((k, o), 0) * p for o, p in behavior.tables[k].items()))
        var += max(0.0, 1.0 - e * e) / emp.trials(k)
    se = math.sqrt(var)
    est = float(value)
    lo, hi = est - z * se, est + z * se
    bound = inequality.bound
    return CorrelationEstimate(value, est, se, (lo, hi), bound, value < bound, hi < bound,
                               lo <= float(bound) <= hi)


def _statistical_nondisturbance(emp: EmpiricalBehavior, behavior: Behavior, sigmas: float):
    s = emp.scenario
    flagged, max_z = [], 0.0
    for i in range(len(s.contexts)):
        for j in range(i + 1, len(s.contexts)):
            common = set(s.contexts[i]) & set(s.contexts[j])
            if not common:
                continue
            a, b = marginalize(behavior, i, common), marginalize(behavior, j, common)
            na, nb = emp.trials(i), emp.trials(j)
            for key in a.table:
                pa, pb = float(a.table[key]), float(b.table[key])
                pooled = (pa * na + pb * nb) / (na + nb)
                sd = math.sqrt(pooled * (1 - pooled) * (1 / na + 1 / nb))
                if sd == 0:
                    zscore = 0.0 if pa == pb else math.inf
                else:
                    zscore = abs(pa - pb) / sd
                max_z = max(max_z, zscore)
                if zscore > sigmas:
                    flagged.append((s.context_id(i), s.context_id(j), ",".join(key)))
    exact = check_nondisturbance(behavior).nondisturbing
    return StatisticalNonDisturbance(not flagged, exact, max_z, tuple(flagged))


def estimate_and_certify(empirical: EmpiricalBehavior, z: float = 1.96,
                         nondisturbance_sigmas: float = 4.0) -> CertificationReport:
    """Rationalise the joint counts, then report the cycle correlation sum with a
    normal-approximation interval, a two-proportion non-disturbance test and the
    exact LP verdict on the rationalised behavior.

    ``boundary_proximity`` is raised when the interval touches the classical
    bound, or when the LP verdict rests only on sampling-level disturbance.
    """
    behavior = empirical.to_behavior()
    corr = None
    if len(empirical.scenario.measurements) >= 3 and empirical.scenario == build_n_cycle(
            len(empirical.scenario.measurements)):
        corr = _correlation_estimate(empirical, behavior, z)
    nd = _statistical_nondisturbance(empirical, behavior, nondisturbance_sigmas)
    decision = decide_noncontextual(behavior)
    boundary = bool(corr is not None and corr.boundary)
    if not decision.noncontextual and not nd.exact and nd.consistent and not (corr and corr.significant):
        boundary = True
    return CertificationReport(behavior, corr, nd, decision, boundary)
