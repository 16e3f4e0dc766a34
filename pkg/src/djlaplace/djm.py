"""Daftardar-Gejji--Jafari iteration for ``u = f + N(u)``.

The recurrence is::

    u_0 = f
    u_1 = N(u_0)
    u_{m+1} = N(u_0 + ... + u_m) - N(u_0 + ... + u_{m-1})

and the k-term approximation is ``u_0 + ... + u_{k-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .y_series import Series, combine, d2x, integrate_yy


@dataclass(frozen=True)
class Operator:
    """A deterministic map ``Series -> Series``.

    ``linear`` is only a hint used for cross-checks; the iteration never
    relies on it.
    """

    apply: Callable[[Series], Series]
    linear: bool = False
    name: str = "N"

    def __call__(self, s: Series) -> Series:
        return self.apply(s)


def laplace_operator(order: int) -> Operator:
    """``N(u) = -int_0^y int_0^y u_xx dy dy`` at truncation ``order``."""
    if order < 0:
        raise ValueError("order must be non-negative")

    def apply(s: Series) -> Series:
        return integrate_yy(d2x(s.truncate(order))).scale(-1)

    return Operator(apply, linear=True, name=f"laplace[K={order}]")


@dataclass(frozen=True)
class ComponentList:
    components: tuple[Series, ...]
    partial_sums: tuple[Series, ...]

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> Series:
        return self.components[i]

    @property
    def total(self) -> Series:
        return self.partial_sums[-1]


def dj_iterate(u0: Series, op: Operator, max_components: int | None = None) -> ComponentList:
    """Run the recurrence until a component vanishes or ``max_components`` is reached."""
    if max_components is None:
        max_components = u0.order + 2
    if max_components < 1:
        raise ValueError("max_components must be >= 1")
    comps = [u0]
    sums = [u0]
    if u0.is_zero():
        return ComponentList(tuple(comps), tuple(sums))
    n_prev = None  # N(u_0 + ... + u_{m-1})
    while len(comps) < max_components:
        n_cur = op(sums[-1])
        nxt = n_cur if n_prev is None else combine(n_cur, n_prev, 1, -1)
        n_prev = n_cur
        if nxt.is_zero():
            break
        comps.append(nxt)
        sums.append(combine(sums[-1], nxt, 1, 1))
    return ComponentList(tuple(comps), tuple(sums))


def k_term_sum(c: ComponentList, k: int) -> Series:
    """``u_0 + ... + u_{k-1}``."""
    if not 1 <= k <= len(c):
        raise IndexError(f"k={k} outside 1..{len(c)}")
    return c.partial_sums[k - 1]


def telescoping_check(c: ComponentList, op: Operator) -> bool:
    """Check ``u_1 + ... + u_{m+1} == N(u_0 + ... + u_m)`` for every available m."""
    if len(c) < 2:
        raise ValueError("telescoping check needs at least two components")
    running = None
    for m in range(len(c) - 1):
        nxt = c.components[m + 1]
        running = nxt if running is None else combine(running, nxt, 1, 1)
        lhs = op(c.partial_sums[m])
        if not combine(running, lhs, 1, -1).is_zero():
            return False
    return True


def linear_fast_path(u0: Series, op: Operator, count: int) -> list[Series]:
    """``u_{m+1} = N(u_m)``; equals the general recurrence when N is linear."""
    out = [u0]
    while len(out) < count:
        out.append(op(out[-1]))
    return out
