"""Seeded instance generators: identical output for identical spec + seed."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, Valuation
from . import catalog as _catalog
from . import nested as _nested

__all__ = ["GeneratorSpec", "generate_instance", "generate_valuation", "parse_generator"]


@dataclass(frozen=True)
class GeneratorSpec:
    """family: uniform(m, n, max_value) | correlated(m, n, noise) |
    worstcase(k) | catalog(name); plus a 64-bit seed."""

    family: str
    seed: int = 0
    m: int = 8
    n: int = 3
    max_value: int = 20
    noise: int = 4
    k: int = 1
    name: str = ""

    def derived(self, trial: int) -> "GeneratorSpec":
        """Per-trial spec: seed xor trial index, order-independent sweeps."""
        return GeneratorSpec(
            self.family,
            self.seed ^ trial,
            self.m,
            self.n,
            self.max_value,
            self.noise,
            self.k,
            self.name,
        )


def generate_valuation(spec: GeneratorSpec) -> Valuation:
    return generate_instance(spec).valuations[0]


def generate_instance(spec: GeneratorSpec) -> Instance:
    rng = random.Random(spec.seed)
    if spec.family == "uniform":
        rows = [
            Valuation(tuple(Fraction(rng.randint(0, spec.max_value)) for _ in range(spec.m)))
            for _ in range(spec.n)
        ]
        return Instance(tuple(rows))
    if spec.family == "correlated":
        base = [rng.randint(0, spec.max_value) for _ in range(spec.m)]
        rows = []
        for _ in range(spec.n):
            rows.append(
                Valuation(
                    tuple(
                        Fraction(max(0, b + rng.randint(-spec.noise, spec.noise)))
                        for b in base
                    )
                )
            )
        return Instance(tuple(rows))
    if spec.family == "worstcase":
        v, n, _ = _nested.worstcase_instance(spec.k)
        return Instance.identical(v, n)
    if spec.family == "catalog":
        return _catalog.get(spec.name).instance
    raise ValueError(f"unknown generator family {spec.family!r}")


def parse_generator(text: str, seed: int = 0) -> GeneratorSpec:
    """Parse e.g. "uniform:m=8,n=3,maxv=20" or "worstcase:k=2" or "catalog:rho21"."""
    if ":" in text:
        family, rest = text.split(":", 1)
    else:
        family, rest = text, ""
    spec = {"family": family, "seed": seed}
    if family == "catalog":
        spec["name"] = rest
        return GeneratorSpec(**spec)
    for part in filter(None, rest.split(",")):
        key, _, val = part.partition("=")
        key = {"maxv": "max_value"}.get(key, key)
        spec[key] = int(val)
    return GeneratorSpec(**spec)
