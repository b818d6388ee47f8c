"""Compiled contest loop.

Array twin of the object-level path in :mod:`refti.evolution`: the same
draws are taken from the same ``numpy.random.Generator`` in the same
order, so both engines produce identical generations.

Memory is a set of ring buffers holding ``(time, winner, loser)``: row
``p`` holds player ``p``'s own contests (everything, in joint mode) and row
``n + p`` the third-party contests it observed.
Player kinds: 0 mixer, 1 immediate inference, 2 transitive inference.
Decisions: 0 hawk, 1 dove, -1 undecided (fall back to the mixed ESS).
"""

import math

import numpy as np
from numba import njit

HAWK = 0
DOVE = 1
UNDECIDED = -1


@njit(cache=True)
def _sign(v):
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


@njit(cache=True)
def _win_probability(rhp_a, rhp_b, a):
    z = (rhp_a - rhp_b) / a
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _decide(s, o, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head, cap,
            cnt_s, tal_s, cnt_o, tal_o):
    if kind[s] == 0:
        return UNDECIDED
    n_players = kind.shape[0]
    transitive = kind[s] == 2
    direct = 0
    for half in range(2):
        row = s + half * n_players
        for q in range(mem_size[row]):
            k = (mem_head[row] + q) % cap
            w = mem_w[row, k]
            l = mem_l[row, k]
            if w == o and l == s:
                direct += 1
            elif w == s and l == o:
                direct -= 1
            if transitive:
                # tal_s[r]: r's wins minus losses against s; tal_o[r]: o's against r
                if w == s:
                    cnt_s[l] += 1
                    tal_s[l] -= 1
                elif l == s:
                    cnt_s[w] += 1
                    tal_s[w] += 1
                if w == o:
                    cnt_o[l] += 1
                    tal_o[l] += 1
                elif l == o:
                    cnt_o[w] += 1
                    tal_o[w] -= 1
    result = UNDECIDED
    if direct < 0:
        result = HAWK
    elif direct > 0:
        result = DOVE
    elif transitive:
        total = 0
        n = 0
        for m in range(nrefs[s]):
            r = refs[s, m]
            if r == s or r == o:
                continue
            if cnt_s[r] > 0 and cnt_o[r] > 0:
                total += _sign(_sign(tal_o[r]) + _sign(tal_s[r]))
                n += 1
        if n > 0:
            if total < 0:
                result = HAWK
            elif total > 0:
                result = DOVE
    if transitive:
        for half in range(2):
            row = s + half * n_players
            for q in range(mem_size[row]):
                k = (mem_head[row] + q) % cap
                w = mem_w[row, k]
                l = mem_l[row, k]
                cnt_s[w] = 0
                cnt_s[l] = 0
                tal_s[w] = 0
                tal_s[l] = 0
                cnt_o[w] = 0
                cnt_o[l] = 0
                tal_o[w] = 0
                tal_o[l] = 0
    return result


@njit(cache=True)
def _hawk_prob(decision, p_hawk):
    if decision == HAWK:
        return 1.0
    if decision == DOVE:
        return 0.0
    return p_hawk


@njit(cache=True)
def consistency_ci1(n, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head, cap, p_hawk,
                    cnt_s, tal_s, cnt_o, tal_o):
    comp = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            hi = _hawk_prob(_decide(i, j, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head,
                                    cap, cnt_s, tal_s, cnt_o, tal_o), p_hawk)
            hj = _hawk_prob(_decide(j, i, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head,
                                    cap, cnt_s, tal_s, cnt_o, tal_o), p_hawk)
            comp += hi * (1.0 - hj) + (1.0 - hi) * hj
    return comp / (n * (n - 1) / 2.0)


@njit(cache=True)
def _push(p, t, w, l, mem_t, mem_w, mem_l, mem_size, mem_head, cap):
    if mem_size[p] < cap:
        k = (mem_head[p] + mem_size[p]) % cap
        mem_size[p] += 1
    else:
        k = mem_head[p]
        mem_head[p] = (mem_head[p] + 1) % cap
    mem_t[p, k] = t
    mem_w[p, k] = w
    mem_l[p, k] = l


@njit(cache=True)
def play_generation(rng, n_contests, rhp, kind, refs, nrefs, is_ref, cap, split,
                    p_hawk, v, c, a, ci_stride):
    """Run ``n_contests`` contests on a freshly reset population.

    Returns payoffs, the memory ring buffers, the contested pairs and the
    CI1 trace (``ci_steps``/``ci_values``, empty when ``ci_stride <= 0``).
    """
    n = rhp.shape[0]
    payoff = np.zeros(n)
    mem_t = np.zeros((2 * n, cap), dtype=np.int64)
    mem_w = np.zeros((2 * n, cap), dtype=np.int64)
    mem_l = np.zeros((2 * n, cap), dtype=np.int64)
    mem_size = np.zeros(2 * n, dtype=np.int64)
    mem_head = np.zeros(2 * n, dtype=np.int64)
    cnt_s = np.zeros(n, dtype=np.int64)
    tal_s = np.zeros(n, dtype=np.int64)
    cnt_o = np.zeros(n, dtype=np.int64)
    tal_o = np.zeros(n, dtype=np.int64)
    pairs = np.zeros((n_contests, 2), dtype=np.int64)

    n_ci = 0
    if ci_stride > 0:
        n_ci = n_contests // ci_stride + 1
        if n_contests % ci_stride != 0:
            n_ci += 1
    ci_steps = np.zeros(n_ci, dtype=np.int64)
    ci_values = np.zeros(n_ci)
    ci_k = 0
    if ci_stride > 0:
        ci_values[0] = consistency_ci1(n, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head,
                                       cap, p_hawk, cnt_s, tal_s, cnt_o, tal_o)
        ci_k = 1

    for t in range(n_contests):
        i = int(rng.random() * n)
        j = int(rng.random() * (n - 1))
        if j >= i:
            j += 1
        pa = min(i, j)
        pb = max(i, j)
        pairs[t, 0] = pa
        pairs[t, 1] = pb

        ta = _decide(pa, pb, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head, cap,
                     cnt_s, tal_s, cnt_o, tal_o)
        if ta == UNDECIDED:
            ta = HAWK if rng.random() < p_hawk else DOVE
        tb = _decide(pb, pa, kind, refs, nrefs, mem_w, mem_l, mem_size, mem_head, cap,
                     cnt_s, tal_s, cnt_o, tal_o)
        if tb == UNDECIDED:
            tb = HAWK if rng.random() < p_hawk else DOVE

        winner = -1
        if ta == DOVE and tb == DOVE:
            payoff[pa] += v / 2.0
            payoff[pb] += v / 2.0
        elif ta == HAWK and tb == DOVE:
            payoff[pa] += v
            winner = pa
        elif ta == DOVE and tb == HAWK:
            payoff[pb] += v
            winner = pb
        else:
            if rng.random() < _win_probability(rhp[pa], rhp[pb], a):
                payoff[pa] += v
                payoff[pb] -= c
                winner = pa
            else:
                payoff[pa] -= c
                payoff[pb] += v
                winner = pb

        if winner >= 0:
            loser = pb if winner == pa else pa
            for p in range(n):
                if kind[p] == 0:
                    continue
                if p == pa or p == pb:
                    _push(p, t, winner, loser, mem_t, mem_w, mem_l, mem_size, mem_head, cap)
                elif is_ref[p, pa] or is_ref[p, pb]:
                    row = p + n if split else p
                    _push(row, t, winner, loser, mem_t, mem_w, mem_l, mem_size, mem_head, cap)

        if ci_stride > 0 and ((t + 1) % ci_stride == 0 or t + 1 == n_contests):
            ci_steps[ci_k] = t + 1
            ci_values[ci_k] = consistency_ci1(n, kind, refs, nrefs, mem_w, mem_l, mem_size,
                                              mem_head, cap, p_hawk, cnt_s, tal_s, cnt_o, tal_o)
            ci_k += 1

    return payoff, mem_t, mem_w, mem_l, mem_size, mem_head, pairs, ci_steps, ci_values
