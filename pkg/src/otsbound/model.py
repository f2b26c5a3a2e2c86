"""Solver-agnostic mixed-integer model container."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind = VarKind.CONTINUOUS
    lower: float = -math.inf
    upper: float = math.inf


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    coefficients: tuple[tuple[int, float], ...]
    sense: Sense
    rhs: float


@dataclass(frozen=True)
class MipModel:
    """``min objective.x + constant`` over linear rows, bounds and ``p**2 <= t`` terms.

    ``epigraph_terms`` holds ``(p_index, t_index)`` pairs. Variables are
    referenced by position in ``variables``.
    """

    name: str
    variables: tuple[Variable, ...]
    constraints: tuple[LinearConstraint, ...]
    objective: tuple[tuple[int, float], ...]
    objective_constant: float = 0.0
    epigraph_terms: tuple[tuple[int, int], ...] = ()

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.name: k for k, v in enumerate(self.variables)}

    @property
    def binary_indices(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.kind is VarKind.BINARY]

    def constraint(self, name: str) -> LinearConstraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)

    def check(self) -> None:
        n = len(self.variables)
        for con in self.constraints:
            for k, _ in con.coefficients:
                if not 0 <= k < n:
                    raise ValueError(f"row {con.name} references undeclared variable {k}")
        for v in self.variables:
            if v.kind is VarKind.BINARY and (v.lower < 0 or v.upper > 1):
                raise ValueError(f"binary {v.name} has bounds outside [0, 1]")
        for p, t in self.epigraph_terms:
            if (self.variables[p].kind is not VarKind.CONTINUOUS
                    or self.variables[t].kind is not VarKind.CONTINUOUS):
                raise ValueError("epigraph terms must reference continuous variables")

    def evaluate(self, x) -> float:
        return self.objective_constant + sum(c * x[k] for k, c in self.objective)

    def dense(self):
        """Return ``(c, A, senses, rhs, lower, upper)`` as numpy arrays."""
        n = len(self.variables)
        c = np.zeros(n)
        for k, coef in self.objective:
            c[k] += coef
        A = np.zeros((len(self.constraints), n))
        for r, con in enumerate(self.constraints):
            for k, coef in con.coefficients:
                A[r, k] += coef
        senses = [con.sense for con in self.constraints]
        rhs = np.array([con.rhs for con in self.constraints], dtype=float)
        lower = np.array([v.lower for v in self.variables], dtype=float)
        upper = np.array([v.upper for v in self.variables], dtype=float)
        return c, A, senses, rhs, lower, upper


class ModelBuilder:
    """Incremental construction helper; :meth:`build` freezes the result."""

    def __init__(self, name: str):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: dict[int, float] = {}
        self.constant = 0.0
        self.epigraph: list[tuple[int, int]] = []

    def add_var(self, name, kind=VarKind.CONTINUOUS, lower=-math.inf, upper=math.inf) -> int:
        self.variables.append(Variable(name, kind, float(lower), float(upper)))
        return len(self.variables) - 1

    def add_row(self, name, coefficients: dict[int, float], sense: Sense, rhs: float) -> None:
        coefs = tuple((k, float(v)) for k, v in coefficients.items() if v != 0)
        self.constraints.append(LinearConstraint(name, coefs, sense, float(rhs)))

    def add_cost(self, k: int, coef: float) -> None:
        if coef:
            self.objective[k] = self.objective.get(k, 0.0) + float(coef)

    def build(self) -> MipModel:
        model = MipModel(self.name, tuple(self.variables), tuple(self.constraints),
                         tuple(sorted(self.objective.items())), self.constant,
                         tuple(self.epigraph))
        model.check()
        return model


def relax(model: MipModel) -> MipModel:
    """Continuous relaxation: binaries become continuous on ``[0, 1]``."""
    if not model.binary_indices:
        return model
    variables = tuple(
        replace(v, kind=VarKind.CONTINUOUS, lower=max(v.lower, 0.0), upper=min(v.upper, 1.0))
        if v.kind is VarKind.BINARY else v
        for v in model.variables)
    return replace(model, variables=variables)


def fix_variables(model: MipModel, values: dict[int, float]) -> MipModel:
    """Copy with the given variables fixed (both bounds set to the value)."""
    variables = list(model.variables)
    for k, val in values.items():
        variables[k] = replace(variables[k], lower=float(val), upper=float(val))
    return replace(model, variables=tuple(variables))


__all__ = ["VarKind", "Sense", "Variable", "LinearConstraint", "MipModel",
           "ModelBuilder", "relax", "fix_variables"]
