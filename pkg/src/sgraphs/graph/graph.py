from __future__ import annotations

import copy
import logging
import threading
from collections.abc import Iterator

from ..errors import KindMismatch, UnknownVariable
from .factors import Factor
from .variables import FactorId, Variable, VariableId, VarKind

logger = logging.getLogger(__name__)


class FactorGraph:
    """Variables and factors of the situational graph.

    Single writer: every mutation takes the graph lock, and ``snapshot``
    hands readers a deep copy of the current estimates.
    """

    def __init__(self) -> None:
        self.variables: dict[VariableId, Variable] = {}
        self.factors: dict[FactorId, Factor] = {}
        self._next_index: dict[VarKind, int] = {kind: 0 for kind in VarKind}
        self._next_factor = 0
        self.lock = threading.RLock()

    # variables ----------------------------------------------------------

    def add_variable(self, v: Variable) -> VariableId:
        with self.lock:
            kind = v.KIND
            vid = VariableId(kind, self._next_index[kind])
            self._next_index[kind] += 1
            self.variables[vid] = v
            return vid

    def insert_variable(self, vid: VariableId, v: Variable) -> None:
        """Insert a variable under a known id (deserialization)."""
        with self.lock:
            if v.KIND != vid.kind:
                raise KindMismatch(f"{vid} cannot hold a {v.KIND.value} variable")
            self.variables[vid] = v
            self._next_index[vid.kind] = max(self._next_index[vid.kind], vid.index + 1)

    def get(self, vid: VariableId) -> Variable:
        try:
            return self.variables[vid]
        except KeyError:
            raise UnknownVariable(f"no variable {vid}") from None

    def remove_variable(self, vid: VariableId) -> None:
        with self.lock:
            if vid not in self.variables:
                raise UnknownVariable(f"no variable {vid}")
            attached = self.factors_of(vid)
            if attached:
                raise ValueError(f"{vid} still has {len(attached)} factors")
            del self.variables[vid]

    def ids_of_kind(self, kind: VarKind) -> list[VariableId]:
        return [vid for vid in self.variables if vid.kind == kind]

    def items_of_kind(self, kind: VarKind) -> Iterator[tuple[VariableId, Variable]]:
        for vid, var in self.variables.items():
            if vid.kind == kind:
                yield vid, var

    # factors ------------------------------------------------------------

    def _check_keys(self, f: Factor) -> None:
        for key, kind in zip(f.keys, f.KINDS):
            if key not in self.variables:
                raise UnknownVariable(f"{f.TYPE} factor references missing variable {key}")
            if key.kind != kind:
                raise KindMismatch(f"{f.TYPE} factor expects a {kind.value} variable, got {key}")

    def add_factor(self, f: Factor) -> FactorId:
        with self.lock:
            self._check_keys(f)
            fid = FactorId(f.TYPE, self._next_factor)
            self._next_factor += 1
            self.factors[fid] = f
            return fid

    def insert_factor(self, fid: FactorId, f: Factor) -> None:
        with self.lock:
            self._check_keys(f)
            self.factors[fid] = f
            self._next_factor = max(self._next_factor, fid.index + 1)

    def remove_factor(self, fid: FactorId) -> Factor:
        with self.lock:
            return self.factors.pop(fid)

    def factors_of(self, vid: VariableId) -> list[FactorId]:
        return [fid for fid, f in self.factors.items() if vid in f.keys]

    def factors_of_type(self, factor_type: type[Factor]) -> list[tuple[FactorId, Factor]]:
        return [(fid, f) for fid, f in self.factors.items() if type(f) is factor_type]

    def replace_variable(self, old: VariableId, new: VariableId) -> int:
        """Point every factor of ``old`` at ``new``; returns the number rewired."""
        with self.lock:
            if new not in self.variables:
                raise UnknownVariable(f"no variable {new}")
            if old.kind != new.kind:
                raise KindMismatch(f"cannot replace {old} with {new}")
            count = 0
            for fid in self.factors_of(old):
                self.factors[fid] = self.factors[fid].rekeyed(old, new)
                count += 1
            return count

    # readers ------------------------------------------------------------

    def snapshot(self) -> dict[VariableId, object]:
        with self.lock:
            return {vid: copy.deepcopy(v.get_state()) for vid, v in self.variables.items()}

    def counts(self) -> dict[str, int]:
        out = {kind.value: 0 for kind in VarKind}
        for vid in self.variables:
            out[vid.kind.value] += 1
        return out

    def __len__(self) -> int:
        return len(self.variables)

    def __repr__(self) -> str:
        return f"FactorGraph(variables={len(self.variables)}, factors={len(self.factors)})"
