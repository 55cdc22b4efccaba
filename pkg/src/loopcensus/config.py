"""Run configuration: one key = value file with sections per experiment.

A config file is INI-style text; every key has a default, unknown sections
or keys are rejected, and command-line flags override file values.  Empty
values mean "derive the default" (grid stop from the census radius, box
angles from the diameter threshold).  The resolved configuration carries a
sha256 fingerprint that output files embed for provenance.
"""

import configparser
import hashlib
import json
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from .boundary import standard_parameters
from .census import DEFAULT_BUDGET, DEFAULT_SLACK
from .groups import CosetScheme
from .statistics import SectorSpec

OUTPUT_DIR_ENV = "LOOPCENSUS_OUTPUT_DIR"

GRID_ROUND = 12  # decimals when snapping grid points onto step multiples


class ConfigError(Exception):
    """Bad configuration file or flag values (usage error, exit code 2)."""


# section -> key -> default (as written in a config file; "" = derived)
DEFAULTS = {
    "census": {
        "genus": "2",
        "t": "13.0",
        "slack": str(DEFAULT_SLACK),
        "budget": str(DEFAULT_BUDGET),
    },
    "grid": {
        "start": "1.0",
        "stop": "",
        "step": "0.25",
    },
    "sector": {
        "outgoing_base": "0.0",
        "outgoing_half": repr(math.pi / 2),
        "incoming_base": "0.0",
        "incoming_half": repr(math.pi),
    },
    "coset": {
        "kind": "mod",
        "modulus": "2",
        "rows": "",
        "moduli": "",
    },
    "box": {
        "epsilon": "0.1",
        "alpha": "",
        "theta": "",
        "theta_prime": "",
        "base_angle": "0.0",
        "base_angle_prime": "0.0",
    },
    "verify": {
        "t_values": "10 11 12",
        "rho_fraction": "0.5",
        "rho_prime_fraction": "0.5",
        "samples": "1000",
    },
    "fit": {
        "window_start": "9.0",
        "window_stop": "13.0",
        "bootstrap": "200",
    },
    "output": {
        "directory": ".",
        "seed": "0",
    },
}


def _to_int(section, key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got {text!r}") from None


def _to_float(section, key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key}: value must be finite")
    return value


def _to_optional_float(section, key, text):
    return None if text == "" else _to_float(section, key, text)


def _to_floats(section, key, text):
    return tuple(_to_float(section, key, part) for part in text.split())


def _to_int_rows(section, key, text):
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            rows.append(tuple(int(x) for x in chunk.split()))
        except ValueError:
            raise ConfigError(
                f"{section}.{key}: rows must be integers separated by spaces, ';' between rows"
            ) from None
    return tuple(rows)


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a batch run, resolved to typed values."""

    genus: int
    t: float
    slack: float
    budget: int
    grid_start: float
    grid_stop: float  # nan = use the census radius at hand
    grid_step: float
    outgoing_base: float
    outgoing_half: float
    incoming_base: float
    incoming_half: float
    coset_kind: str
    coset_modulus: int
    coset_rows: tuple
    coset_moduli: tuple
    epsilon: float
    alpha: float  # nan = derived
    theta: float  # nan = derived
    theta_prime: float  # nan = derived
    base_angle: float
    base_angle_prime: float
    verify_t_values: tuple
    rho_fraction: float
    rho_prime_fraction: float
    verify_samples: int
    fit_window: tuple
    fit_bootstrap: int
    output_directory: str
    seed: int

    def validate(self):
        """Construct every referenced domain object so invariants fire now."""
        if self.genus < 2:
            raise ConfigError("census.genus: compact hyperbolic surfaces need genus >= 2")
        if self.t < 0.0:
            raise ConfigError("census.t: radius must be nonnegative")
        if self.slack < 0.0:
            raise ConfigError("census.slack: slack must be nonnegative")
        if self.budget < 1:
            raise ConfigError("census.budget: budget must be positive")
        if self.grid_step <= 0.0:
            raise ConfigError("grid.step: step must be positive")
        if not math.isnan(self.grid_stop) and self.grid_stop < self.grid_start:
            raise ConfigError("grid.stop: stop must not precede start")
        try:
            self.outgoing_sector()
            self.incoming_sector()
        except ValueError as exc:
            raise ConfigError(f"sector: {exc}") from None
        try:
            self.coset_scheme()
        except ValueError as exc:
            raise ConfigError(f"coset: {exc}") from None
        try:
            self.box_parameters()
        except ValueError as exc:
            raise ConfigError(f"box: {exc}") from None
        if not 0.0 < self.rho_fraction < 1.0 or not 0.0 < self.rho_prime_fraction < 1.0:
            raise ConfigError("verify.rho_fraction: fractions must lie in (0, 1)")
        if not self.verify_t_values:
            raise ConfigError("verify.t_values: need at least one time")
        if any(b <= a for a, b in zip(self.verify_t_values, self.verify_t_values[1:])):
            raise ConfigError("verify.t_values: times must be strictly increasing")
        if self.verify_samples < 1:
            raise ConfigError("verify.samples: need at least one sample")
        if not self.fit_window[0] < self.fit_window[1]:
            raise ConfigError("fit.window_stop: window must have positive length")
        if self.fit_bootstrap < 1:
            raise ConfigError("fit.bootstrap: need at least one resample")
        if self.seed < 0:
            raise ConfigError("output.seed: seed must be nonnegative")
        return self

    def time_grid(self, stop=None):
        """Grid start..stop by step; stop falls back to grid_stop, then t."""
        hi = stop
        if hi is None:
            hi = None if math.isnan(self.grid_stop) else self.grid_stop
        if hi is None:
            hi = self.t
        n = int(math.floor((hi - self.grid_start) / self.grid_step + 1e-9)) + 1
        if n < 1:
            raise ConfigError("grid: empty grid (stop precedes start)")
        return np.round(self.grid_start + self.grid_step * np.arange(n), GRID_ROUND)

    def outgoing_sector(self):
        return SectorSpec(self.outgoing_base, self.outgoing_half)

    def incoming_sector(self):
        return SectorSpec(self.incoming_base, self.incoming_half)

    def coset_scheme(self):
        if self.coset_kind == "mod":
            return CosetScheme.homology_mod(self.coset_modulus, self.genus)
        if self.coset_kind == "trivial":
            return CosetScheme.trivial(self.genus)
        if self.coset_kind == "rows":
            if not self.coset_rows:
                raise ValueError("kind=rows needs coset.rows and coset.moduli")
            return CosetScheme.from_rows(self.coset_rows, self.coset_moduli, self.genus)
        raise ValueError(f"unknown coset kind {self.coset_kind!r}")

    def box_parameters(self):
        return standard_parameters(
            epsilon=self.epsilon,
            alpha=None if math.isnan(self.alpha) else self.alpha,
            theta=None if math.isnan(self.theta) else self.theta,
            theta_prime=None if math.isnan(self.theta_prime) else self.theta_prime,
            base_angle=self.base_angle,
            base_angle_prime=self.base_angle_prime,
        )

    def resolved_output_directory(self):
        return os.environ.get(OUTPUT_DIR_ENV) or self.output_directory

    def as_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
                if value and isinstance(value[0], tuple):
                    value = [list(v) for v in value]
            out[f.name] = value
        return out

    def fingerprint(self):
        """sha256 over the experiment parameters.

        The output directory is excluded: where results land does not
        change what they are.
        """
        payload = self.as_dict()
        payload.pop("output_directory")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _reject_unknown(parser):
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key {section}.{key}")


def load_config(path=None, overrides=None):
    """Resolve defaults <- file <- overrides into a validated RunConfig.

    overrides maps (section, key) to replacement strings, exactly as a file
    would spell them; None values are ignored so flag plumbing stays simple.
    """
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file: {exc}") from None
        _reject_unknown(parser)
        for section in parser.sections():
            for key, text in parser[section].items():
                values[section][key] = text.strip()
    for (section, key), text in (overrides or {}).items():
        if text is None:
            continue
        if section not in DEFAULTS or key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        values[section][key] = str(text)

    alpha = _to_optional_float("box", "alpha", values["box"]["alpha"])
    theta = _to_optional_float("box", "theta", values["box"]["theta"])
    theta_prime = _to_optional_float("box", "theta_prime", values["box"]["theta_prime"])
    stop = _to_optional_float("grid", "stop", values["grid"]["stop"])
    config = RunConfig(
        genus=_to_int("census", "genus", values["census"]["genus"]),
        t=_to_float("census", "t", values["census"]["t"]),
        slack=_to_float("census", "slack", values["census"]["slack"]),
        budget=_to_int("census", "budget", values["census"]["budget"]),
        grid_start=_to_float("grid", "start", values["grid"]["start"]),
        grid_stop=math.nan if stop is None else stop,
        grid_step=_to_float("grid", "step", values["grid"]["step"]),
        outgoing_base=_to_float("sector", "outgoing_base", values["sector"]["outgoing_base"]),
        outgoing_half=_to_float("sector", "outgoing_half", values["sector"]["outgoing_half"]),
        incoming_base=_to_float("sector", "incoming_base", values["sector"]["incoming_base"]),
        incoming_half=_to_float("sector", "incoming_half", values["sector"]["incoming_half"]),
        coset_kind=values["coset"]["kind"],
        coset_modulus=_to_int("coset", "modulus", values["coset"]["modulus"]),
        coset_rows=_to_int_rows("coset", "rows", values["coset"]["rows"]),
        coset_moduli=tuple(
            _to_int("coset", "moduli", part) for part in values["coset"]["moduli"].split()
        ),
        epsilon=_to_float("box", "epsilon", values["box"]["epsilon"]),
        alpha=math.nan if alpha is None else alpha,
        theta=math.nan if theta is None else theta,
        theta_prime=math.nan if theta_prime is None else theta_prime,
        base_angle=_to_float("box", "base_angle", values["box"]["base_angle"]),
        base_angle_prime=_to_float(
            "box", "base_angle_prime", values["box"]["base_angle_prime"]
        ),
        verify_t_values=_to_floats("verify", "t_values", values["verify"]["t_values"]),
        rho_fraction=_to_float("verify", "rho_fraction", values["verify"]["rho_fraction"]),
        rho_prime_fraction=_to_float(
            "verify", "rho_prime_fraction", values["verify"]["rho_prime_fraction"]
        ),
        verify_samples=_to_int("verify", "samples", values["verify"]["samples"]),
        fit_window=(
            _to_float("fit", "window_start", values["fit"]["window_start"]),
            _to_float("fit", "window_stop", values["fit"]["window_stop"]),
        ),
        fit_bootstrap=_to_int("fit", "bootstrap", values["fit"]["bootstrap"]),
        output_directory=values["output"]["directory"],
        seed=_to_int("output", "seed", values["output"]["seed"]),
    )
    return config.validate()


def write_default_config(path):
    """Emit a config file spelling out every default."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, keys in DEFAULTS.items():
        parser[section] = keys
    with open(path, "w") as fh:
        parser.write(fh)
