"""Truncated free-boson Fock space: exact Virasoro Gibbs traces for oracles.

A c = 1 positive-energy representation built from one chiral boson at zero
momentum: basis states are partitions (occupation numbers of the modes
a_{-k}), L_0 is the level, and L_n = (1/2) sum_j a_{n-j} a_j.  Truncation at
a maximum level gives Gibbs traces exact up to O(p(L) e^{-beta L}).
"""

from functools import lru_cache

import numpy as np


def partitions_up_to(level_max):
    """All occupation dicts {mode: count} with total level <= level_max."""
    states = []

    def rec(remaining, max_part, occ):
        states.append(dict(occ))
        for part in range(min(remaining, max_part), 0, -1):
            occ[part] = occ.get(part, 0) + 1
            rec(remaining - part, part, occ)
            occ[part] -= 1
            if occ[part] == 0:
                del occ[part]

    rec(level_max, level_max, {})
    # states are generated once per sub-partition path; dedupe by key
    seen = {}
    for occ in states:
        key = tuple(sorted(occ.items()))
        seen[key] = occ
    out = sorted(seen.values(), key=lambda o: (sum(k * v for k, v in o.items()),
                                               tuple(sorted(o.items()))))
    return out


class FockOracle:
    """Dense L_n matrices and Gibbs traces on the truncated Fock space."""

    def __init__(self, level_max=16):
        self.level_max = level_max
        self.basis = partitions_up_to(level_max)
        self.index = {tuple(sorted(o.items())): i for i, o in enumerate(self.basis)}
        self.levels = np.array([sum(k * v for k, v in o.items()) for o in self.basis],
                               dtype=float)
        self.dim = len(self.basis)

    def _apply_a(self, vec_dict, mode):
        """Apply a_mode to a dict {state_key: amplitude} (a_{-k} creates)."""
        out = {}
        for key, amp in vec_dict.items():
            occ = dict(key)
            if mode < 0:
                k = -mode
                occ[k] = occ.get(k, 0) + 1
                if sum(m * v for m, v in occ.items()) > self.level_max:
                    continue
                nk = tuple(sorted(occ.items()))
                out[nk] = out.get(nk, 0.0) + amp
            else:
                k = mode
                if occ.get(k, 0) == 0:
                    continue
                coeff = k * occ[k]
                occ[k] -= 1
                if occ[k] == 0:
                    del occ[k]
                nk = tuple(sorted(occ.items()))
                out[nk] = out.get(nk, 0.0) + amp * coeff
        return out

    @lru_cache(maxsize=32)
    def l_matrix(self, n):
        """Matrix of L_n in the (non-orthonormal) partition basis."""
        mat = np.zeros((self.dim, self.dim))
        for i, occ in enumerate(self.basis):
            key = tuple(sorted(occ.items()))
            acc = {}
            if n == 0:
                mat[i, i] = self.levels[i]
                continue
            # L_n = (1/2) sum_j a_{n-j} a_j; a_0 = 0 in this module.  The two
            # factors commute for n != 0, so apply an annihilator first and
            # avoid intermediate states above the truncation level.
            for j in range(-2 * self.level_max, 2 * self.level_max + 1):
                if j == 0 or n - j == 0:
                    continue
                first, second = (j, n - j) if j > 0 else (n - j, j)
                step1 = self._apply_a({key: 1.0}, first)
                if not step1:
                    continue
                step2 = self._apply_a(step1, second)
                for kk, amp in step2.items():
                    acc[kk] = acc.get(kk, 0.0) + 0.5 * amp
            for kk, amp in acc.items():
                if kk in self.index:
                    mat[self.index[kk], i] += amp
        return mat

    def smeared_t(self, fhat):
        """T(f) = 2 pi sum_k fhat[k] L_k for a dict of Fourier coefficients."""
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for k, v in fhat.items():
            mat += 2.0 * np.pi * v * self.l_matrix(k)
        return mat

    def gibbs_moments(self, fhat, beta, n_moments=4):
        """m_j = Tr(T(f)^j e^{-beta L0}) / Z on the truncated space."""
        w = np.exp(-beta * self.levels)
        z = w.sum()
        t = self.smeared_t(fhat)
        out = []
        power = np.eye(self.dim, dtype=complex)
        for _ in range(n_moments):
            power = power @ t
            out.append(complex((power.diagonal() * w).sum() / z))
        return out

    def partition_levels(self):
        """Spectrum list [(level, multiplicity)] of the truncated module."""
        levels = {}
        for lv in self.levels:
            levels[float(lv)] = levels.get(float(lv), 0) + 1
        return sorted(levels.items())
