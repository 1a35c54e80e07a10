"""Numba kernels for the discrete chordal Loewner chain.

A chain is a list of elementary steps (delta_i, du_i): shift the centered map
by the driving increment du_i, then apply the vertical-slit map
w -> sqrt(w^2 + 4 delta_i), which has half-plane capacity 2 delta_i.  Points
are pushed forward through the steps; tips are obtained by pushing 0 back
through the inverse steps, newest first.
"""

import cmath
import math

import numpy as np
from numba import njit

SWALLOW_MARGIN = 0.5
# tips are computed once the Koebe lower bound on dist(z, boundary) drops below this many radii
NEAR_FACTOR = 2.0
MAX_REFINE = 3
# a step is split when its tip jump exceeds REFINE_JUMP * r and the segment
# passes within REFINE_REACH * r + 2 jump of a disc of radius r still undecided
REFINE_JUMP = 0.25
REFINE_REACH = 1.0
_STACK = 4 * MAX_REFINE + 4

# status codes returned by the Monte Carlo kernel
ST_OK = 0
ST_STEP_LIMIT = 1


@njit(cache=True)
def slit_forward(w, delta):
    """sqrt(w^2 + 4 delta) on the branch with Im >= 0 (real roots keep the sign of Re w)."""
    s = cmath.sqrt(w * w + 4.0 * delta)
    if s.imag < 0.0 or (s.imag == 0.0 and s.real * w.real < 0.0):
        s = -s
    return s


@njit(cache=True)
def slit_inverse(w, delta):
    """sqrt(w^2 - 4 delta) on the branch with Im >= 0; inverse of slit_forward."""
    s = cmath.sqrt(w * w - 4.0 * delta)
    if s.imag < 0.0 or (s.imag == 0.0 and s.real * w.real < 0.0):
        s = -s
    return s


@njit(cache=True)
def tip_at(dlt, du, n):
    """Tip after the first n steps."""
    w = 0j
    for i in range(n - 1, -1, -1):
        w = slit_inverse(w, dlt[i]) + du[i]
    return w


@njit(cache=True)
def preimage(dlt, du, n, w):
    """Z_n^{-1}(w): pull a point of the centered plane back to the physical plane."""
    for i in range(n - 1, -1, -1):
        w = slit_inverse(w, dlt[i]) + du[i]
    return w


@njit(cache=True)
def all_tips(dlt, du):
    n = dlt.shape[0]
    out = np.empty(n + 1, dtype=np.complex128)
    out[0] = 0j
    for k in range(1, n + 1):
        out[k] = tip_at(dlt, du, k)
    return out


@njit(cache=True)
def push_forward(dlt, du, n, z):
    """Centered image Z_n(z) and g_n'(z) after n steps, with swallow detection.

    Returns (Z, g', swallowed_step) where swallowed_step = -1 when z survives.
    """
    w = z + 0j
    gp = 1.0 + 0j
    for i in range(n):
        v = w - du[i]
        if abs(v) ** 2 < 4.0 * dlt[i] * (1.0 + SWALLOW_MARGIN):
            return v, gp, i
        w = slit_forward(v, dlt[i])
        gp = gp * v / w
    return w, gp, -1


@njit(cache=True)
def push_forward_real(dlt, du, n, x):
    """Image of a real point outside the hull footprint (stays on the real line)."""
    w = x + 0j
    for i in range(n):
        v = w - du[i]
        w = slit_forward(v.real + 0j, dlt[i])
        w = w.real + 0j
    return w.real


@njit(cache=True)
def real_swallow_step(dlt, du, n, x, u0):
    """First step at which the real point x is absorbed into the hull (-1 if it survives n steps)."""
    v0 = x - u0
    side = 1.0 if v0 >= 0.0 else -1.0
    w = v0
    for i in range(n):
        v = w - du[i]
        if side * v <= math.sqrt(4.0 * dlt[i] * (1.0 + SWALLOW_MARGIN)):
            return i
        w = side * math.sqrt(v * v + 4.0 * dlt[i])
    return -1


@njit(cache=True)
def seg_dist(z, a, b):
    """Distance from z to the segment [a, b]."""
    ab = b - a
    L2 = ab.real * ab.real + ab.imag * ab.imag
    if L2 == 0.0:
        return abs(z - a)
    az = z - a
    s = (az.real * ab.real + az.imag * ab.imag) / L2
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return abs(z - (a + s * ab))


@njit(cache=True)
def splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def sample_seed(master, index):
    """32-bit seed for sample ``index`` of a run with ``master`` seed (counter-based)."""
    h = splitmix64(np.uint64(master) ^ splitmix64(np.uint64(index) + np.uint64(0x632BE59BD9B4E019)))
    return np.uint32(h >> np.uint64(32))


@njit(cache=True)
def simulate_sample(
    seed,
    kappa,
    targets,
    radii,
    exit_radii,
    t_max,
    dt_min,
    eta,
    dt_max,
    record_times,
    max_steps,
    refine,
    dlt,
    du,
    hit_t,
    hit_Z,
    hit_gp,
    exit_t,
    rec_Z,
    rec_gp,
    swallow_t,
    diag,
):
    """Run one SLE sample until every disc is hit, the largest exit circle is crossed or t_max.

    radii[l, k] is the radius of disc k at level l.  Outputs are written into the
    preallocated arrays; hit_t / exit_t / swallow_t entries stay +inf when the
    event does not occur.  hit_Z[l, k, :] and hit_gp[l, k, :] hold the centered
    images and derivatives of every target at the step where (l, k) was hit.
    rec_Z / rec_gp hold the states at ``record_times`` (NaN if not reached).
    diag = [steps, tip evaluations, refinements, status].

    A radius <= 0 marks a passive point: it is evolved (and its swallow time
    recorded) but never targeted.  A target swallowed before the polyline
    reached its disc counts as hit at the swallow time, with the states of the
    last step before swallowing.
    """
    n = targets.shape[0]
    L = radii.shape[0]
    E = exit_radii.shape[0]
    T = record_times.shape[0]
    np.random.seed(seed)
    sq_kappa = math.sqrt(kappa)

    Z = targets.copy()
    gp = np.ones(n, dtype=np.complex128)
    newZ = np.empty(n, dtype=np.complex128)
    newgp = np.empty(n, dtype=np.complex128)
    alive = np.ones(n, dtype=np.bool_)
    near = np.zeros(n, dtype=np.bool_)
    done = np.zeros(n, dtype=np.bool_)
    swallowed = np.zeros(n, dtype=np.bool_)
    rmax = np.zeros(n)
    for k in range(n):
        rmax[k] = radii[0, k]
        for l in range(1, L):
            rmax[k] = max(rmax[k], radii[l, k])
    for l in range(L):
        for k in range(n):
            hit_t[l, k] = np.inf
    for e in range(E):
        exit_t[e] = np.inf
    for k in range(n):
        swallow_t[k] = np.inf
    for i in range(T):
        for k in range(n):
            rec_Z[i, k] = np.nan
            rec_gp[i, k] = np.nan
    exit_min = np.inf
    E_max = 0
    for e in range(E):
        exit_min = min(exit_min, exit_radii[e])
        if exit_radii[e] > exit_radii[E_max]:
            E_max = e

    # gamma(0) = 0 already lies within radius |z_k|
    for k in range(n):
        for l in range(L):
            if abs(targets[k]) <= radii[l, k]:
                hit_t[l, k] = 0.0
                for j in range(n):
                    hit_Z[l, k, j] = Z[j]
                    hit_gp[l, k, j] = gp[j]
    # a radius <= 0 marks a passive point: evolved and recorded, never a target
    for k in range(n):
        all_hit = True
        for l in range(L):
            if hit_t[l, k] == np.inf and radii[l, k] > 0.0:
                all_hit = False
        done[k] = all_hit

    st_d = np.empty(_STACK)
    st_x = np.empty(_STACK)
    st_lv = np.empty(_STACK, dtype=np.int64)
    sp = 0

    t = 0.0
    max_u = 0.0
    u_now = 0.0
    j = 0
    tip_prev = 0j
    prev_valid = True
    rec_i = 0
    while rec_i < T and record_times[rec_i] <= 0.0:
        for k in range(n):
            rec_Z[rec_i, k] = Z[k]
            rec_gp[rec_i, k] = gp[k]
        rec_i += 1
    n_tips = 0
    n_ref = 0
    status = ST_OK

    while True:
        # stopping rules
        finished = True
        for k in range(n):
            if alive[k] and not done[k]:
                finished = False
        if finished and rec_i >= T:
            break
        all_exit = True
        for e in range(E):
            if exit_t[e] == np.inf:
                all_exit = False
        if all_exit and rec_i >= T:
            break
        if t >= t_max:
            break
        if j >= max_steps:
            status = ST_STEP_LIMIT
            break

        if sp == 0:
            m = np.inf
            for k in range(n):
                if alive[k]:
                    a = abs(Z[k])
                    if a < m:
                        m = a
            if eta > 0.0 and m < np.inf:
                D = eta * eta * m * m
                if D < dt_min:
                    D = dt_min
                if D > dt_max:
                    D = dt_max
            else:
                D = dt_min
            if rec_i < T and t + D > record_times[rec_i]:
                D = record_times[rec_i] - t
            if t + D > t_max:
                D = t_max - t
            X = sq_kappa * math.sqrt(D) * np.random.standard_normal()
            st_d[0] = D
            st_x[0] = X
            st_lv[0] = 0
            sp = 1
        sp -= 1
        D = st_d[sp]
        X = st_x[sp]
        lv = st_lv[sp]

        for k in range(n):
            if alive[k]:
                v = Z[k] - X
                w = slit_forward(v, D)
                newZ[k] = w
                newgp[k] = gp[k] * v / w
        dlt[j] = D
        du[j] = X
        t_new = t + D

        newly_near = False
        any_near = False
        for k in range(n):
            if alive[k] and not done[k]:
                if not near[k]:
                    if newZ[k].imag <= 2.0 * NEAR_FACTOR * abs(newgp[k]) * rmax[k]:
                        near[k] = True
                        newly_near = True
                if near[k]:
                    any_near = True
        u_new = u_now + X
        mu = max(max_u, abs(u_new))
        # hull radius bound: rad(K_t) <= 4 max(sqrt t, sup|U|); check at half that for safety
        exit_possible = exit_t[E_max] == np.inf and 8.0 * max(math.sqrt(t_new), mu) >= exit_min
        need_tip = any_near or exit_possible
        tip_new = 0j
        if need_tip:
            tip_new = tip_at(dlt, du, j + 1)
            n_tips += 1
            if not prev_valid:
                tip_prev = tip_at(dlt, du, j)
                n_tips += 1
                prev_valid = True
            if refine and any_near and lv < MAX_REFINE:
                # only segments passing close to an undecided disc need resolving,
                # and only to the scale of that disc's radius
                jump = abs(tip_new - tip_prev)
                split = False
                for k in range(n):
                    if near[k] and not done[k]:
                        sd = seg_dist(targets[k], tip_prev, tip_new)
                        for l in range(L):
                            r = radii[l, k]
                            if r > 0.0 and hit_t[l, k] == np.inf and jump > REFINE_JUMP * r and sd <= REFINE_REACH * r + 2.0 * jump:
                                split = True
                if split:
                    # replace this step by four Brownian-bridge sub-steps
                    n_ref += 1
                    h = 0.5 * D
                    a = 0.5 * X + sq_kappa * math.sqrt(0.25 * D) * np.random.standard_normal()
                    b = X - a
                    q = 0.25 * D
                    a1 = 0.5 * a + sq_kappa * math.sqrt(0.5 * q) * np.random.standard_normal()
                    b1 = 0.5 * b + sq_kappa * math.sqrt(0.5 * q) * np.random.standard_normal()
                    st_d[sp] = q
                    st_x[sp] = b - b1
                    st_lv[sp] = lv + 1
                    st_d[sp + 1] = q
                    st_x[sp + 1] = b1
                    st_lv[sp + 1] = lv + 1
                    st_d[sp + 2] = q
                    st_x[sp + 2] = a - a1
                    st_lv[sp + 2] = lv + 1
                    st_d[sp + 3] = q
                    st_x[sp + 3] = a1
                    st_lv[sp + 3] = lv + 1
                    sp += 4
                    _ = h
                    continue

        # commit the step
        for k in range(n):
            swallowed[k] = False
            if alive[k]:
                v = Z[k] - X
                # slit scale of the finest step; adaptive steps are large only far from every target
                swallowed[k] = abs(v) ** 2 < 4.0 * min(D, dt_min) * (1.0 + SWALLOW_MARGIN)
        for k in range(n):
            if swallowed[k]:
                alive[k] = False
                swallow_t[k] = t_new
                # the curve came within the slit scale of z_k: every pending disc is hit,
                # with the last pre-swallow states
                for l in range(L):
                    if radii[l, k] > 0.0 and hit_t[l, k] == np.inf:
                        hit_t[l, k] = t_new
                        for q2 in range(n):
                            hit_Z[l, k, q2] = Z[q2]
                            hit_gp[l, k, q2] = gp[q2]
                done[k] = True
        for k in range(n):
            if alive[k]:
                Z[k] = newZ[k]
                gp[k] = newgp[k]
        t = t_new
        u_now = u_new
        max_u = mu
        j += 1

        if need_tip:
            ta = abs(tip_new)
            for e in range(E):
                if exit_t[e] == np.inf and ta > exit_radii[e]:
                    exit_t[e] = t
            for k in range(n):
                if near[k] and not done[k]:
                    dist = seg_dist(targets[k], tip_prev, tip_new)
                    all_hit = True
                    for l in range(L):
                        if hit_t[l, k] == np.inf and radii[l, k] > 0.0:
                            if dist <= radii[l, k]:
                                hit_t[l, k] = t
                                for q2 in range(n):
                                    hit_Z[l, k, q2] = Z[q2]
                                    hit_gp[l, k, q2] = gp[q2]
                            else:
                                all_hit = False
                    done[k] = all_hit
            tip_prev = tip_new
            prev_valid = True
        else:
            prev_valid = False

        while rec_i < T and t >= record_times[rec_i] * (1.0 - 1e-12):
            for k in range(n):
                if alive[k]:
                    rec_Z[rec_i, k] = Z[k]
                    rec_gp[rec_i, k] = gp[k]
            rec_i += 1
        _ = newly_near

    diag[0] = j
    diag[1] = n_tips
    diag[2] = n_ref
    diag[3] = status


@njit(cache=True)
def simulate_batch(
    master_seed,
    first_index,
    count,
    kappa,
    targets,
    radii,
    exit_radii,
    t_max,
    dt_min,
    eta,
    dt_max,
    record_times,
    max_steps,
    refine,
    hit_t,
    hit_Z,
    hit_gp,
    exit_t,
    rec_Z,
    rec_gp,
    swallow_t,
    diag,
):
    """Run samples first_index .. first_index+count-1; outputs carry a leading sample axis."""
    dlt = np.empty(max_steps)
    du = np.empty(max_steps)
    for s in range(count):
        seed = sample_seed(master_seed, first_index + s)
        simulate_sample(
            seed,
            kappa,
            targets,
            radii,
            exit_radii,
            t_max,
            dt_min,
            eta,
            dt_max,
            record_times,
            max_steps,
            refine,
            dlt,
            du,
            hit_t[s],
            hit_Z[s],
            hit_gp[s],
            exit_t[s],
            rec_Z[s],
            rec_gp[s],
            swallow_t[s],
            diag[s],
        )


@njit(cache=True)
def sample_increments(seed, kappa, dt, n):
    np.random.seed(seed)
    out = np.empty(n)
    s = math.sqrt(kappa * dt)
    for i in range(n):
        out[i] = s * np.random.standard_normal()
    return out
