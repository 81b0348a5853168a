"""Site-subset selectors for bipartitions of a cyclic lattice."""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .lattice import LatticeSpec


class Selector:
    """Base class; subclasses implement :meth:`_raw_indices` and :attr:`label`."""

    label = "selector"

    def _raw_indices(self, lattice: LatticeSpec) -> np.ndarray:
        raise NotImplementedError

    def indices(self, lattice: LatticeSpec, allow_full: bool = False) -> np.ndarray:
        """Sorted flat site indices; rejects empty or full selections."""
        idx = np.unique(np.asarray(self._raw_indices(lattice), dtype=int))
        if idx.size == 0:
            raise ConfigError(f"selector {self.label} selects no site")
        if idx.min() < 0 or idx.max() >= lattice.n:
            raise ConfigError(f"selector {self.label} leaves the lattice {lattice.label()}")
        if idx.size == lattice.n and not allow_full:
            raise ConfigError(f"selector {self.label} selects the whole lattice")
        return idx

    def complement(self, lattice: LatticeSpec) -> "Explicit":
        keep = np.setdiff1d(np.arange(lattice.n), self.indices(lattice))
        return Explicit(tuple(int(i) for i in keep))


@dataclass(frozen=True)
class SingleSite(Selector):
    site: int = 0

    @property
    def label(self):
        return "single_site" if self.site == 0 else f"single_site:{self.site}"

    def _raw_indices(self, lattice):
        return [self.site]


@dataclass(frozen=True)
class Block(Selector):
    """Contiguous box anchored at the origin.

    ``extent`` gives the length along each axis.  A single integer means a
    slab: full extent on every axis but the last, ``L`` sites along the last.
    """

    extent: tuple[int, ...] | int

    @property
    def label(self):
        if isinstance(self.extent, int):
            return f"block:{self.extent}"
        return "block:" + "x".join(str(e) for e in self.extent)

    def box(self, lattice: LatticeSpec) -> tuple[int, ...]:
        if isinstance(self.extent, int):
            return tuple(lattice.sizes[:-1]) + (self.extent,)
        if len(self.extent) != lattice.dims:
            raise ConfigError(f"{self.label} does not match lattice {lattice.label()}")
        return tuple(self.extent)

    def _raw_indices(self, lattice):
        box = self.box(lattice)
        if any(b < 1 or b > s for b, s in zip(box, lattice.sizes)):
            raise ConfigError(f"{self.label} does not fit lattice {lattice.label()}")
        sites = lattice.sites()
        inside = np.all(sites < np.array(box), axis=1)
        return np.flatnonzero(inside)


@dataclass(frozen=True)
class EvenComb(Selector):
    label = "even_comb"

    def _raw_indices(self, lattice):
        lattice.require_even()
        return np.flatnonzero(lattice.site_parity() == 1)


@dataclass(frozen=True)
class OddComb(Selector):
    label = "odd_comb"

    def _raw_indices(self, lattice):
        lattice.require_even()
        return np.flatnonzero(lattice.site_parity() == -1)


@dataclass(frozen=True)
class Explicit(Selector):
    """Explicit list of sites, as flat indices or coordinate tuples."""

    sites: tuple

    @property
    def label(self):
        return "explicit:[" + ",".join(_site_text(s) for s in self.sites) + "]"

    def _raw_indices(self, lattice):
        out = []
        for s in self.sites:
            if isinstance(s, (tuple, list)):
                out.append(int(lattice.flat_index(s)[0]))
            else:
                out.append(int(s))
        return out


@dataclass(frozen=True)
class FullLattice(Selector):
    """Whole lattice; only meaningful for purity checks."""

    label = "full"

    def _raw_indices(self, lattice):
        return np.arange(lattice.n)


def _site_text(s):
    if isinstance(s, (tuple, list)):
        return "(" + ",".join(str(int(v)) for v in s) + ")"
    return str(int(s))


_BLOCK_RE = re.compile(r"^\d+(x\d+)*$")


def parse_selector(text: str) -> Selector:
    """Parse the textual selector forms used in sweep configs.

    ``single_site``, ``single_site:<i>``, ``block:<L>``, ``block:<a>x<b>``,
    ``even_comb``, ``odd_comb``, ``explicit:[0,3,4]``.
    """
    text = text.strip()
    head, _, arg = text.partition(":")
    head = head.strip().lower()
    arg = arg.strip()
    if head == "single_site":
        return SingleSite(int(arg) if arg else 0)
    if head == "block":
        if not _BLOCK_RE.match(arg):
            raise ConfigError(f"cannot parse block selector {text!r}")
        parts = tuple(int(p) for p in arg.split("x"))
        return Block(parts[0] if len(parts) == 1 else parts)
    if head == "even_comb" and not arg:
        return EvenComb()
    if head == "odd_comb" and not arg:
        return OddComb()
    if head == "explicit":
        try:
            sites = ast.literal_eval(arg)
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"cannot parse explicit site list {arg!r}") from exc
        if not isinstance(sites, (list, tuple)):
            raise ConfigError(f"explicit selector needs a list, got {arg!r}")
        return Explicit(tuple(tuple(s) if isinstance(s, (list, tuple)) else int(s) for s in sites))
    raise ConfigError(f"unknown selector {text!r}")


def as_selector(obj) -> Selector:
    if isinstance(obj, Selector):
        return obj
    if isinstance(obj, str):
        return parse_selector(obj)
    raise ConfigError(f"not a selector: {obj!r}")
