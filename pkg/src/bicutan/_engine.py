"""Hot simulation kernels operating on packed numpy arrays.

Everything here is numba-njit compatible and runs either compiled or as
plain Python depending on :mod:`bicutan._jit`.  The ``advance`` function
integrates the whole world ``n_steps`` forward; the scalar cores
(`classify`, `free_accel`, `ghr`, `emergency`, ...) are shared with the
object-level API in :mod:`bicutan.kernel`.

Conventions: positions are front-bumper offsets along a lane (meters);
a vehicle with front at ``s`` and length ``L`` occupies ``[s - L, s]``.
Per-lane vehicle order is kept in doubly-linked lists (next_ahead points
toward the lane head, i.e. larger ``s``).  The ring is lane 18 with arc
positions in ``[0, C)`` circulating counterclockwise; in/out lanes of
approach ``a`` are ``a*3 + slot`` and ``9 + a*3 + slot``.
"""

import math

import numpy as np

from ._jit import maybe_njit

# lanes
N_LANES = 19
RING_LANE = 18

# vehicle phases
PH_UNBORN = 0
PH_QUEUED = 1
PH_APPROACH = 2
PH_RING = 3
PH_EXIT = 4
PH_DONE = 5

# driver states
ST_FREE = 0
ST_FOLLOW = 1
ST_EMERGENCY = 2

# VI integer columns
IV_LANE = 0
IV_PHASE = 1
IV_CLEARED = 2
IV_PREVLEAD = 3  # leader id tracked by the perception buffer; <0 invalid
IV_LCCOOL = 4
IV_BUFFILL = 5
IV_BUFPOS = 6
IV_STATE = 7
IV_TYPE = 8
IV_ORIG = 9
IV_DEST = 10
IV_CURLEAD = 11
N_IV = 12

# VF float columns
FV_S = 0
FV_V = 1
FV_RINGD = 2
FV_ARCNEED = 3
FV_EXIT = 4
FV_ARR = 5
N_FV = 6

# vehicle-type table columns
TT_LEN = 0
TT_AMAX = 1
TT_ANORM = 2
TT_BEMERG = 3
TT_VGOAL = 4
TT_CACC = 5
TT_CDEC = 6
TT_MEXP = 7
TT_LEXP = 8
TT_TC = 9
TT_TF = 10
TT_REACT_S = 11
TT_REACT_STEPS = 12
N_TT = 13

# lane table columns
LL_LEN = 0
LL_LIM = 1
LL_STOP = 2
N_LL = 3

# engine float parameters
EP_DT = 0
EP_S0 = 1
EP_HFREE = 2
EP_RING_LEN = 3
EP_WIN_START = 4
EP_WIN_END = 5
EP_CYC_LEN = 6
EP_STOP_B_END = 7
EP_ENTRY_MARGIN = 8
EP_RING_LOOKAHEAD = 9
EP_EXIT_LOOKAHEAD = 10
EP_TGAP_SCAN = 11
EP_LC_COOLDOWN = 12
EP_LC_GAP_BONUS = 13
EP_LC_GAP_FACTOR = 14
EP_LC_SPEED_MARGIN = 15
EP_INSERT_MARGIN = 16
N_EP = 17

# engine integer parameters
IP_IN_BASE = 0  # ..2: inbound lanes per approach outside the window
IP_IN_WIN = 3  # ..5: inside the window
IP_OUT_BASE = 6  # ..8
IP_OUT_WIN = 9  # ..11
N_IP = 12

# counters
CNT_ARR = 0
CNT_QUEUED = 1
CNT_NET = 2
CNT_DONE = 3
N_CNT = 4

# audits
AUD_MIN_GAP = 0
AUD_RED_COUNT = 1
AUD_RED_EXCESS = 2
AUD_CONSERVE = 3
AUD_COL_I = 4
AUD_COL_J = 5
AUD_COL_T = 6
AUD_HOLDS = 7
AUD_MAX_NET = 8
N_AUD = 9

STATUS_OK = 0
STATUS_COLLISION = 1
STATUS_CONSERVATION = 2

_EPS = 1e-9


# ---------------------------------------------------------------------------
# scalar behavior cores


@maybe_njit
def safe_gap(v, v_lead, react_s, a_norm, b_lead):
    """Gipps-style stopping margin: distance needed to brake at the normal
    rate after one reaction time, minus what the leader still covers
    braking at its emergency rate."""
    return v * react_s + v * v / (2.0 * a_norm) - v_lead * v_lead / (2.0 * b_lead)


@maybe_njit
def classify(v, gap, v_lead, s0, react_s, a_norm, b_lead, h_free):
    """Driver state given the binding leader constraint.

    Emergency takes precedence: inside the standstill buffer or short of
    the safe stopping gap the agent must brake regardless of headway.
    With no effective constraint the time-headway threshold separates
    free driving from normal following.
    """
    g_eff = gap - s0
    if g_eff <= 0.0:
        return ST_EMERGENCY
    if g_eff < safe_gap(v, v_lead, react_s, a_norm, b_lead):
        return ST_EMERGENCY
    if v <= 1e-12:
        return ST_FREE
    if gap / v > h_free:
        return ST_FREE
    return ST_FOLLOW


@maybe_njit
def free_accel(v, v_target, a_max, a_norm, dt):
    """Accelerate/decelerate toward the goal speed, landing on it exactly."""
    dv = (v_target - v) / dt
    if dv > 0.0:
        return dv if dv < a_max else a_max
    if dv < 0.0:
        return dv if dv > -a_norm else -a_norm
    return 0.0


@maybe_njit
def ghr(v_self, v_lead, gap, c_acc, c_dec, m_exp, l_exp, a_max, b_emerg):
    """Asymmetric stimulus-response following acceleration.

    c * v^m * dv / gap^l with the sensitivity picked by the sign of the
    closing speed; result clamped to [-b_emerg, a_max].
    """
    dv = v_lead - v_self
    if dv == 0.0:
        return 0.0
    g = gap if gap > 0.1 else 0.1
    c = c_acc if dv > 0.0 else c_dec
    a = c * v_self**m_exp * dv / g**l_exp
    if a > a_max:
        return a_max
    if a < -b_emerg:
        return -b_emerg
    return a


@maybe_njit
def emergency_brake(v, gap, v_lead, s0, a_norm, b_emerg, b_lead):
    """Deceleration that stops within the available room.

    Room is the effective gap plus the distance the leader still covers
    braking at ``b_lead``; the result is clamped to [a_norm, b_emerg] in
    magnitude and returned negative.
    """
    if v <= 0.0:
        return 0.0
    room = (gap - s0) + v_lead * v_lead / (2.0 * b_lead)
    if room <= 1e-9:
        return -b_emerg
    b_req = v * v / (2.0 * room)
    if b_req < a_norm:
        b_req = a_norm
    if b_req > b_emerg:
        b_req = b_emerg
    return -b_req


@maybe_njit
def eta_to_cover(v, d, a_max):
    """Earliest time to cover distance d accelerating at a_max."""
    if d <= 0.0:
        return 0.0
    return (math.sqrt(v * v + 2.0 * a_max * d) - v) / a_max


@maybe_njit
def accept_entry_gap(time_gap, t_c, t_f, follow_up):
    """Ring-entry gap acceptance: critical gap for a fresh gap, follow-up
    time when tucking in behind a previously accepted vehicle."""
    need = t_f if follow_up else t_c
    return time_gap >= need


@maybe_njit
def lc_decide(
    v,
    v_target,
    lead_gap,
    lead_v,
    left_ok,
    left_lead_gap,
    left_lead_v,
    left_lag_gap,
    left_lag_v,
    right_ok,
    right_lead_gap,
    right_lead_v,
    right_lag_gap,
    right_lag_v,
    required_dir,
    s0,
    react_s,
    a_norm,
    b_emerg,
    h_free,
    gap_bonus,
    gap_factor,
    speed_margin,
):
    """Lane-change decision: +1 left, -1 right, 0 stay.

    A mandatory change (``required_dir`` nonzero) uses relaxed,
    feasibility-only gaps and wins over any discretionary motive.  A
    discretionary change needs a constraining slow leader, a clearly
    better target gap, and safe lead/lag gaps in the target lane.
    """
    if required_dir != 0:
        floor = 0.5 * s0
        if required_dir > 0 and left_ok:
            lead_room = (left_lead_gap - floor) + left_lead_v * left_lead_v / (2.0 * b_emerg)
            lag_need = left_lag_v * left_lag_v / (2.0 * a_norm) - v * v / (2.0 * b_emerg)
            if lag_need < 0.0:
                lag_need = 0.0
            if (
                left_lead_gap >= floor
                and left_lag_gap >= floor
                and v * v / (2.0 * a_norm) <= lead_room
                and left_lag_gap - floor >= lag_need
            ):
                return 1
        if required_dir < 0 and right_ok:
            lead_room = (right_lead_gap - floor) + right_lead_v * right_lead_v / (2.0 * b_emerg)
            lag_need = right_lag_v * right_lag_v / (2.0 * a_norm) - v * v / (2.0 * b_emerg)
            if lag_need < 0.0:
                lag_need = 0.0
            if (
                right_lead_gap >= floor
                and right_lag_gap >= floor
                and v * v / (2.0 * a_norm) <= lead_room
                and right_lag_gap - floor >= lag_need
            ):
                return -1
        return 0

    # discretionary: only when the own-lane leader constrains
    if lead_gap >= 1e17:
        return 0
    if v <= 0.1:
        pass  # queued vehicles may still escape into an emptier lane
    elif lead_gap / v > h_free:
        return 0
    if lead_v + speed_margin >= v_target:
        return 0

    best_dir = 0
    best_gap = -1.0
    # left candidate
    if left_ok:
        if (
            left_lead_gap >= lead_gap * gap_factor
            and left_lead_gap >= lead_gap + gap_bonus
            and left_lead_gap >= s0
            and left_lag_gap >= s0
            and left_lead_gap - s0 >= safe_gap(v, left_lead_v, react_s, a_norm, b_emerg)
            and left_lag_gap - s0 >= safe_gap(left_lag_v, v, react_s, a_norm, b_emerg)
        ):
            best_dir = 1
            best_gap = left_lead_gap
    if right_ok:
        if (
            right_lead_gap >= lead_gap * gap_factor
            and right_lead_gap >= lead_gap + gap_bonus
            and right_lead_gap >= s0
            and right_lag_gap >= s0
            and right_lag_gap - s0 >= safe_gap(right_lag_v, v, react_s, a_norm, b_emerg)
            and right_lead_gap - s0 >= safe_gap(v, right_lead_v, react_s, a_norm, b_emerg)
        ):
            if right_lead_gap > best_gap:
                best_dir = -1
    return best_dir


# ---------------------------------------------------------------------------
# linked-list plumbing


@maybe_njit
def _unlink(i, v_lane_col, next_ahead, next_behind, lane_head, lane_tail):
    lane = v_lane_col[i]
    na = next_ahead[i]
    nb = next_behind[i]
    if na >= 0:
        next_behind[na] = nb
    else:
        lane_head[lane] = nb
    if nb >= 0:
        next_ahead[nb] = na
    else:
        lane_tail[lane] = na
    next_ahead[i] = -1
    next_behind[i] = -1
    v_lane_col[i] = -1


@maybe_njit
def _insert_sorted(lane, i, s, v_lane_col, v_s_col, next_ahead, next_behind, lane_head, lane_tail):
    """Insert i into the lane list keeping ascending s toward the head."""
    v_lane_col[i] = lane
    cur = lane_tail[lane]
    prev = -1  # the vehicle that will sit behind i
    while cur >= 0 and v_s_col[cur] <= s:
        prev = cur
        cur = next_ahead[cur]
    # i goes between prev (behind) and cur (ahead)
    next_behind[i] = prev
    next_ahead[i] = cur
    if prev >= 0:
        next_ahead[prev] = i
    else:
        lane_tail[lane] = i
    if cur >= 0:
        next_behind[cur] = i
    else:
        lane_head[lane] = i


# ---------------------------------------------------------------------------
# ring scans


@maybe_njit
def _ring_fwd_nearest(x, exclude, C, lane_head, next_behind, VF, VI, TT):
    """Nearest ring vehicle forward of arc x: (clear distance to its rear, id)."""
    best = 1e18
    best_id = -1
    j = lane_head[RING_LANE]
    while j >= 0:
        if j != exclude:
            d = (VF[j, FV_S] - x) % C
            gap = d - TT[VI[j, IV_TYPE], TT_LEN]
            if gap < best:
                best = gap
                best_id = j
        j = next_behind[j]
    return best, best_id


@maybe_njit
def _ring_insert_gaps(x, my_len, C, lane_head, next_behind, VF, VI, TT):
    """Clear distances around an insertion spot with front bumper at arc x.

    Each ring vehicle is assigned to the nearer side of x, so a vehicle
    overlapping the insertion interval shows up as a negative gap instead
    of wrapping around the ring.  Returns (lead_gap, lead_id, lag_gap,
    lag_id).
    """
    lead_gap = 1e18
    lead_id = -1
    lag_gap = 1e18
    lag_id = -1
    j = lane_head[RING_LANE]
    while j >= 0:
        fwd = (VF[j, FV_S] - x) % C
        bwd = C - fwd
        if fwd <= bwd:
            gap = fwd - TT[VI[j, IV_TYPE], TT_LEN]
            if gap < lead_gap:
                lead_gap = gap
                lead_id = j
        else:
            gap = bwd - my_len
            if gap < lag_gap:
                lag_gap = gap
                lag_id = j
        j = next_behind[j]
    return lead_gap, lead_id, lag_gap, lag_id


@maybe_njit
def _ring_min_arrival(x, C, scan_cap, lane_head, next_behind, VF):
    """Soonest arrival at arc x among upstream ring vehicles within scan_cap.

    Returns (time gap, vehicle id); (1e18, -1) when the window is clear.
    """
    best_t = 1e18
    best_id = -1
    j = lane_head[RING_LANE]
    while j >= 0:
        d = (x - VF[j, FV_S]) % C
        if d <= scan_cap:
            v = VF[j, FV_V]
            if v < 0.1:
                v = 0.1
            tg = d / v
            if tg < best_t:
                best_t = tg
                best_id = j
        j = next_behind[j]
    return best_t, best_id


@maybe_njit
def _lane_neighbors(lane, s, exclude, lane_tail, next_ahead, VF):
    """(lead id, lag id) around position s in a straight lane."""
    lead = -1
    lag = -1
    cur = lane_tail[lane]
    while cur >= 0:
        if cur != exclude:
            if VF[cur, FV_S] > s:
                lead = cur
                break
            lag = cur
        cur = next_ahead[cur]
    return lead, lag


@maybe_njit
def _exit_lane_pick(i, dest, carry, act_out, ep, LL, VF, VI, TT, lane_tail, next_ahead):
    """Exit lane with safe lead/lag room at position carry, or -1."""
    ti = VI[i, IV_TYPE]
    my_len = TT[ti, TT_LEN]
    my_v = VF[i, FV_V]
    margin = ep[EP_INSERT_MARGIN]
    s0 = ep[EP_S0]
    best = -1
    best_room = -1.0
    for slot in range(act_out):
        ln = 9 + dest * 3 + slot
        lead, lag = _lane_neighbors(ln, carry, -1, lane_tail, next_ahead, VF)
        if lead >= 0:
            lead_gap = VF[lead, FV_S] - TT[VI[lead, IV_TYPE], TT_LEN] - carry
            lead_v = VF[lead, FV_V]
            b_lead = TT[VI[lead, IV_TYPE], TT_BEMERG]
        else:
            lead_gap = 1e18
            lead_v = 0.0
            b_lead = 1.0
        if lag >= 0:
            lag_gap = carry - my_len - VF[lag, FV_S]
            lag_v = VF[lag, FV_V]
            a_norm_lag = TT[VI[lag, IV_TYPE], TT_ANORM]
        else:
            lag_gap = 1e18
            lag_v = 0.0
            a_norm_lag = 1.0
        if lead_gap < margin or lag_gap < margin:
            continue
        # emergency feasibility both ways
        lead_room = (lead_gap - 0.5 * s0) + lead_v * lead_v / (2.0 * b_lead)
        if my_v * my_v / (2.0 * TT[ti, TT_ANORM]) > lead_room:
            continue
        lag_need = lag_v * lag_v / (2.0 * a_norm_lag) - my_v * my_v / (2.0 * TT[ti, TT_BEMERG])
        if lag_need < 0.0:
            lag_need = 0.0
        if lag_gap - 0.5 * s0 < lag_need:
            continue
        room = lead_gap if lead_gap < lag_gap else lag_gap
        if room > best_room:
            best_room = room
            best = ln
    return best


@maybe_njit
def _green_through(t, dur, approach, ep):
    """True iff ``approach`` stays Go over [t, t+dur) under the cycle."""
    cyc = ep[EP_CYC_LEN]
    if cyc <= 0.0 or approach == 0:
        return True
    pos = t % cyc
    split = ep[EP_STOP_B_END]
    if approach == 1:  # B stopped during [0, split)
        return pos >= split and pos + dur <= cyc
    # C stopped during [split, cyc)
    return pos + dur <= split


# ---------------------------------------------------------------------------
# the integrator


@maybe_njit
def advance(
    n_steps,
    st,
    ep,
    ip,
    LL,
    entry_arc,
    arc_need,
    TT,
    VI,
    VF,
    pbuf,
    next_ahead,
    next_behind,
    lane_head,
    lane_tail,
    vq,
    vq_start,
    vq_end,
    ent_last_clear,
    ent_gap_leader,
    counters,
    aud,
    scr,
):
    dt = ep[EP_DT]
    s0 = ep[EP_S0]
    h_free = ep[EP_HFREE]
    C = ep[EP_RING_LEN]
    N = VI.shape[0]
    bufcap = pbuf.shape[1]

    for _step in range(n_steps):
        t = st[0]

        # signal state and active lane counts at time t
        stopped = -1
        if ep[EP_CYC_LEN] > 0.0:
            pos = t % ep[EP_CYC_LEN]
            stopped = 1 if pos < ep[EP_STOP_B_END] else 2
        in_window = ep[EP_WIN_START] <= t < ep[EP_WIN_END]

        # --- arrivals into vertical queues
        p = counters[CNT_ARR]
        while p < N and VF[p, FV_ARR] <= t + _EPS:
            o = VI[p, IV_ORIG]
            vq[o, vq_end[o]] = p
            vq_end[o] += 1
            VI[p, IV_PHASE] = PH_QUEUED
            counters[CNT_QUEUED] += 1
            p += 1
        counters[CNT_ARR] = p

        # --- spawn queue heads onto approach lanes
        for o in range(3):
            act_in = ip[IP_IN_WIN + o] if in_window else ip[IP_IN_BASE + o]
            while vq_start[o] < vq_end[o]:
                i = vq[o, vq_start[o]]
                ti = VI[i, IV_TYPE]
                best_lane = -1
                best_space = -1.0
                for slot in range(act_in):
                    ln = o * 3 + slot
                    tail = lane_tail[ln]
                    if tail < 0:
                        space = 2.0 * LL[ln, LL_LEN]
                    else:
                        space = VF[tail, FV_S] - TT[VI[tail, IV_TYPE], TT_LEN]
                    if space > best_space + 1e-12:
                        best_space = space
                        best_lane = ln
                if best_lane < 0 or best_space < s0 + 0.5:
                    break
                v_target = TT[ti, TT_VGOAL]
                lim = LL[best_lane, LL_LIM]
                if lim < v_target:
                    v_target = lim
                tail = lane_tail[best_lane]
                if tail >= 0:
                    g_eff = best_space - s0
                    vt = VF[tail, FV_V]
                    b_lead = TT[VI[tail, IV_TYPE], TT_BEMERG]
                    a_n = TT[ti, TT_ANORM]
                    react = TT[ti, TT_REACT_S]
                    room = g_eff + vt * vt / (2.0 * b_lead)
                    disc = react * react + 2.0 * room / a_n
                    v_safe = a_n * (math.sqrt(disc) - react)
                    if v_safe < 0.0:
                        v_safe = 0.0
                    if v_safe < v_target:
                        v_target = v_safe
                VI[i, IV_LANE] = best_lane
                VI[i, IV_PHASE] = PH_APPROACH
                VI[i, IV_CLEARED] = 0
                VI[i, IV_PREVLEAD] = -3
                VI[i, IV_LCCOOL] = 0
                VF[i, FV_S] = 0.0
                VF[i, FV_V] = v_target
                _insert_sorted(
                    best_lane, i, 0.0, VI[:, IV_LANE], VF[:, FV_S],
                    next_ahead, next_behind, lane_head, lane_tail,
                )
                vq_start[o] += 1
                counters[CNT_QUEUED] -= 1
                counters[CNT_NET] += 1

        # --- ring-entry clearance for approach-lane heads
        for o in range(3):
            for slot in range(3):
                ln = o * 3 + slot
                head = lane_head[ln]
                if head < 0:
                    continue
                stop_pos = LL[ln, LL_STOP]
                sf = VF[head, FV_S]
                if sf >= stop_pos and VI[head, IV_CLEARED] == 1:
                    continue  # committed past the line
                ti = VI[head, IV_TYPE]
                d = stop_pos - sf
                if d < 0.0:
                    d = 0.0
                v = VF[head, FV_V]
                eta = eta_to_cover(v, d + 1.0, TT[ti, TT_AMAX])
                sig_ok = _green_through(t, eta + ep[EP_ENTRY_MARGIN], o, ep)
                t_gap, gap_leader = _ring_min_arrival(
                    entry_arc[o], C, ep[EP_TGAP_SCAN], lane_head, next_behind, VF
                )
                if VI[head, IV_CLEARED] == 1:
                    # revoke a stale clearance while the line can still be held
                    can_stop = d >= v * v / (2.0 * TT[ti, TT_BEMERG]) - _EPS
                    if can_stop and not sig_ok:
                        VI[head, IV_CLEARED] = 0
                    elif can_stop and t_gap < TT[ti, TT_TF] + eta:
                        VI[head, IV_CLEARED] = 0
                    continue
                if not sig_ok:
                    continue
                follow_up = (
                    ent_gap_leader[ln] == gap_leader and ent_last_clear[ln] > -1e17
                )
                if follow_up:
                    if t - ent_last_clear[ln] < TT[ti, TT_TF]:
                        continue
                    need = TT[ti, TT_TF] + eta
                else:
                    need = TT[ti, TT_TC] + eta
                if t_gap >= need:
                    VI[head, IV_CLEARED] = 1
                    ent_last_clear[ln] = t
                    ent_gap_leader[ln] = gap_leader

        # --- lane changes on approach and exit lanes
        for group in range(6):
            if group < 3:
                o = group
                base = o * 3
                act = ip[IP_IN_WIN + o] if in_window else ip[IP_IN_BASE + o]
            else:
                o = group - 3
                base = 9 + o * 3
                act = ip[IP_OUT_WIN + o] if in_window else ip[IP_OUT_BASE + o]
            for slot in range(3):
                ln = base + slot
                i = lane_head[ln]
                while i >= 0:
                    nb = next_behind[i]
                    if VI[i, IV_LCCOOL] > 0:
                        VI[i, IV_LCCOOL] -= 1
                        i = nb
                        continue
                    required = 0
                    if slot >= act:
                        required = -1  # drain toward lower slots
                    elif act < 2 or VI[i, IV_CLEARED] == 1:
                        i = nb
                        continue
                    elif group < 3 and VF[i, FV_S] > LL[ln, LL_STOP] - 10.0:
                        i = nb
                        continue
                    ti = VI[i, IV_TYPE]
                    my_len = TT[ti, TT_LEN]
                    v = VF[i, FV_V]
                    v_target = TT[ti, TT_VGOAL]
                    if LL[ln, LL_LIM] < v_target:
                        v_target = LL[ln, LL_LIM]
                    lead = next_ahead[i]
                    if lead >= 0:
                        lead_gap = VF[lead, FV_S] - TT[VI[lead, IV_TYPE], TT_LEN] - VF[i, FV_S]
                        lead_v = VF[lead, FV_V]
                    else:
                        lead_gap = 1e18
                        lead_v = 0.0
                    left_ok = False
                    right_ok = False
                    l_lead_gap = l_lead_v = l_lag_gap = l_lag_v = 0.0
                    r_lead_gap = r_lead_v = r_lag_gap = r_lag_v = 0.0
                    s_here = VF[i, FV_S]
                    if required == 0 and slot + 1 < act:
                        lj, gj = _lane_neighbors(base + slot + 1, s_here, -1, lane_tail, next_ahead, VF)
                        left_ok = True
                        l_lead_gap = (
                            VF[lj, FV_S] - TT[VI[lj, IV_TYPE], TT_LEN] - s_here if lj >= 0 else 1e18
                        )
                        l_lead_v = VF[lj, FV_V] if lj >= 0 else 0.0
                        l_lag_gap = s_here - my_len - VF[gj, FV_S] if gj >= 0 else 1e18
                        l_lag_v = VF[gj, FV_V] if gj >= 0 else 0.0
                    if slot - 1 >= 0:
                        lj, gj = _lane_neighbors(base + slot - 1, s_here, -1, lane_tail, next_ahead, VF)
                        right_ok = True
                        r_lead_gap = (
                            VF[lj, FV_S] - TT[VI[lj, IV_TYPE], TT_LEN] - s_here if lj >= 0 else 1e18
                        )
                        r_lead_v = VF[lj, FV_V] if lj >= 0 else 0.0
                        r_lag_gap = s_here - my_len - VF[gj, FV_S] if gj >= 0 else 1e18
                        r_lag_v = VF[gj, FV_V] if gj >= 0 else 0.0
                    decision = lc_decide(
                        v,
                        v_target,
                        lead_gap,
                        lead_v,
                        left_ok,
                        l_lead_gap,
                        l_lead_v,
                        l_lag_gap,
                        l_lag_v,
                        right_ok,
                        r_lead_gap,
                        r_lead_v,
                        r_lag_gap,
                        r_lag_v,
                        required,
                        s0,
                        TT[ti, TT_REACT_S],
                        TT[ti, TT_ANORM],
                        TT[ti, TT_BEMERG],
                        h_free,
                        ep[EP_LC_GAP_BONUS],
                        ep[EP_LC_GAP_FACTOR],
                        ep[EP_LC_SPEED_MARGIN],
                    )
                    if decision != 0:
                        target = ln + decision
                        _unlink(i, VI[:, IV_LANE], next_ahead, next_behind, lane_head, lane_tail)
                        _insert_sorted(
                            target, i, s_here, VI[:, IV_LANE], VF[:, FV_S],
                            next_ahead, next_behind, lane_head, lane_tail,
                        )
                        VI[i, IV_LCCOOL] = int(ep[EP_LC_COOLDOWN] / dt)
                        VI[i, IV_PREVLEAD] = -3
                        VI[i, IV_CLEARED] = 0
                    i = nb

        # --- acceleration pass (synchronous: decisions from pre-step state)
        for ln in range(N_LANES):
            i = lane_head[ln]
            while i >= 0:
                ti = VI[i, IV_TYPE]
                v = VF[i, FV_V]
                s_here = VF[i, FV_S]
                v_target = TT[ti, TT_VGOAL]
                if LL[ln, LL_LIM] < v_target:
                    v_target = LL[ln, LL_LIM]

                gap = 1e18
                v_lead = 0.0
                b_lead = 1.0
                lead_id = -1
                is_virtual = False

                na = next_ahead[i]
                if ln == RING_LANE and na < 0:
                    tail = lane_tail[RING_LANE]
                    if tail != i:
                        na = tail
                        gap = (VF[na, FV_S] - s_here) % C - TT[VI[na, IV_TYPE], TT_LEN]
                        v_lead = VF[na, FV_V]
                        b_lead = TT[VI[na, IV_TYPE], TT_BEMERG]
                        lead_id = na
                elif na >= 0:
                    gap = VF[na, FV_S] - TT[VI[na, IV_TYPE], TT_LEN] - s_here
                    v_lead = VF[na, FV_V]
                    b_lead = TT[VI[na, IV_TYPE], TT_BEMERG]
                    lead_id = na

                if ln < 9:  # approach lane extras
                    if VI[i, IV_CLEARED] == 0:
                        g_line = LL[ln, LL_STOP] - s_here
                        if g_line < gap:
                            gap = g_line
                            v_lead = 0.0
                            b_lead = 1.0
                            lead_id = -1
                            is_virtual = True
                    elif na < 0:
                        # committed head: look through the connector onto the ring
                        o = ln // 3
                        fwd_gap, fwd_id = _ring_fwd_nearest(
                            entry_arc[o], i, C, lane_head, next_behind, VF, VI, TT
                        )
                        if fwd_id >= 0 and fwd_gap + TT[VI[fwd_id, IV_TYPE], TT_LEN] <= ep[
                            EP_RING_LOOKAHEAD
                        ]:
                            g_conn = (LL[ln, LL_LEN] - s_here) + fwd_gap
                            if g_conn < gap:
                                gap = g_conn
                                v_lead = VF[fwd_id, FV_V]
                                b_lead = TT[VI[fwd_id, IV_TYPE], TT_BEMERG]
                                lead_id = fwd_id
                elif ln == RING_LANE:
                    rem = VF[i, FV_ARCNEED] - VF[i, FV_RINGD]
                    if 0.0 < rem <= ep[EP_EXIT_LOOKAHEAD]:
                        d = VI[i, IV_DEST]
                        in_win_now = in_window
                        act_out = ip[IP_OUT_WIN + d] if in_win_now else ip[IP_OUT_BASE + d]
                        pick = _exit_lane_pick(
                            i, d, 0.0, act_out, ep, LL, VF, VI, TT, lane_tail, next_ahead
                        )
                        if pick < 0 and rem < gap:
                            gap = rem
                            v_lead = 0.0
                            b_lead = 1.0
                            lead_id = -1
                            is_virtual = True

                # perception: real leaders are seen with the reaction delay
                v_self_d = v
                v_lead_d = v_lead
                gap_d = gap
                if lead_id >= 0 and not is_virtual:
                    react_steps = int(TT[ti, TT_REACT_STEPS])
                    if VI[i, IV_PREVLEAD] == lead_id and VI[i, IV_BUFFILL] > 0:
                        fill = VI[i, IV_BUFFILL]
                        back = react_steps if fill > react_steps else fill - 1
                        idx = (VI[i, IV_BUFPOS] - back) % bufcap
                        v_self_d = pbuf[i, idx, 0]
                        v_lead_d = pbuf[i, idx, 1]
                        gap_d = pbuf[i, idx, 2]

                if lead_id < 0 and not is_virtual:
                    state = ST_FREE
                else:
                    state = classify(
                        v, gap, v_lead, s0, TT[ti, TT_REACT_S], TT[ti, TT_ANORM], b_lead, h_free
                    )
                if state == ST_FREE:
                    a = free_accel(v, v_target, TT[ti, TT_AMAX], TT[ti, TT_ANORM], dt)
                elif state == ST_FOLLOW:
                    a = ghr(
                        v_self_d,
                        v_lead_d,
                        gap_d,
                        TT[ti, TT_CACC],
                        TT[ti, TT_CDEC],
                        TT[ti, TT_MEXP],
                        TT[ti, TT_LEXP],
                        TT[ti, TT_AMAX],
                        TT[ti, TT_BEMERG],
                    )
                    cap = (v_target - v) / dt
                    if a > cap:
                        a = cap
                else:
                    a = emergency_brake(
                        v, gap, v_lead, s0, TT[ti, TT_ANORM], TT[ti, TT_BEMERG], b_lead
                    )

                VI[i, IV_STATE] = state
                VI[i, IV_CURLEAD] = lead_id if not is_virtual else -1
                scr[i, 0] = a
                scr[i, 1] = v  # pre-step speed for the perception push
                scr[i, 2] = v_lead
                scr[i, 3] = gap
                i = next_behind[i]

        # --- integrate and commit
        ring_wrapped = -1
        for ln in range(N_LANES):
            i = lane_head[ln]
            while i >= 0:
                v_new = VF[i, FV_V] + scr[i, 0] * dt
                if v_new < 0.0:
                    v_new = 0.0
                s_old = VF[i, FV_S]
                s_new = s_old + v_new * dt
                if ln == RING_LANE:
                    VF[i, FV_RINGD] += v_new * dt
                    if s_new >= C:
                        s_new -= C
                        ring_wrapped = i
                elif ln < 9 and stopped == ln // 3:
                    stop_pos = LL[ln, LL_STOP]
                    if s_old <= stop_pos < s_new:
                        aud[AUD_RED_COUNT] += 1.0
                        excess = s_new - stop_pos
                        if excess > aud[AUD_RED_EXCESS]:
                            aud[AUD_RED_EXCESS] = excess
                VF[i, FV_V] = v_new
                VF[i, FV_S] = s_new
                i = next_behind[i]
        if ring_wrapped >= 0:
            # the front-most ring vehicle wrapped past arc 0: it becomes the tail
            _unlink(ring_wrapped, VI[:, IV_LANE], next_ahead, next_behind, lane_head, lane_tail)
            _insert_sorted(
                RING_LANE, ring_wrapped, VF[ring_wrapped, FV_S], VI[:, IV_LANE], VF[:, FV_S],
                next_ahead, next_behind, lane_head, lane_tail,
            )

        # --- transfers: ring -> exit
        i = lane_head[RING_LANE]
        while i >= 0:
            nb = next_behind[i]
            if VF[i, FV_RINGD] >= VF[i, FV_ARCNEED] - _EPS:
                d = VI[i, IV_DEST]
                act_out = ip[IP_OUT_WIN + d] if in_window else ip[IP_OUT_BASE + d]
                carry = VF[i, FV_RINGD] - VF[i, FV_ARCNEED]
                pick = _exit_lane_pick(
                    i, d, carry, act_out, ep, LL, VF, VI, TT, lane_tail, next_ahead
                )
                if pick >= 0:
                    _unlink(i, VI[:, IV_LANE], next_ahead, next_behind, lane_head, lane_tail)
                    VI[i, IV_PHASE] = PH_EXIT
                    VI[i, IV_PREVLEAD] = -3
                    VF[i, FV_S] = carry
                    _insert_sorted(
                        pick, i, carry, VI[:, IV_LANE], VF[:, FV_S],
                        next_ahead, next_behind, lane_head, lane_tail,
                    )
                else:
                    # exit blocked at the crossing instant: circulate once more
                    VF[i, FV_ARCNEED] += C
                    aud[AUD_HOLDS] += 1.0
            i = nb

        # --- transfers: approach -> ring
        for ln in range(9):
            head = lane_head[ln]
            while head >= 0 and VF[head, FV_S] >= LL[ln, LL_LEN] - _EPS:
                o = ln // 3
                ti = VI[head, IV_TYPE]
                my_len = TT[ti, TT_LEN]
                if VI[head, IV_CLEARED] == 0:
                    # defensive: an uncleared vehicle may never enter the ring
                    VF[head, FV_S] = LL[ln, LL_LEN]
                    VF[head, FV_V] = 0.0
                    break
                carry = VF[head, FV_S] - LL[ln, LL_LEN]
                arc = (entry_arc[o] + carry) % C
                v_here = VF[head, FV_V]
                lead_gap, lead_id, lag_gap, lag_id = _ring_insert_gaps(
                    arc, my_len, C, lane_head, next_behind, VF, VI, TT
                )
                ok = True
                if lead_id >= 0:
                    if lead_gap < ep[EP_INSERT_MARGIN]:
                        ok = False
                    else:
                        b_lead = TT[VI[lead_id, IV_TYPE], TT_BEMERG]
                        room = (lead_gap - 0.5 * s0) + VF[lead_id, FV_V] ** 2 / (2.0 * b_lead)
                        if v_here * v_here / (2.0 * TT[ti, TT_ANORM]) > room:
                            ok = False
                if ok and lag_id >= 0:
                    v_lag = VF[lag_id, FV_V]
                    a_norm_lag = TT[VI[lag_id, IV_TYPE], TT_ANORM]
                    need = v_lag * v_lag / (2.0 * a_norm_lag) - v_here * v_here / (
                        2.0 * TT[ti, TT_BEMERG]
                    )
                    if need < 0.0:
                        need = 0.0
                    if lag_gap < ep[EP_INSERT_MARGIN] or lag_gap - 0.5 * s0 < need:
                        ok = False
                if ok:
                    _unlink(head, VI[:, IV_LANE], next_ahead, next_behind, lane_head, lane_tail)
                    VI[head, IV_PHASE] = PH_RING
                    VI[head, IV_CLEARED] = 0
                    VI[head, IV_PREVLEAD] = -3
                    VF[head, FV_S] = arc
                    VF[head, FV_RINGD] = carry
                    VF[head, FV_ARCNEED] = arc_need[o, VI[head, IV_DEST]]
                    _insert_sorted(
                        RING_LANE, head, arc, VI[:, IV_LANE], VF[:, FV_S],
                        next_ahead, next_behind, lane_head, lane_tail,
                    )
                else:
                    # hold at the boundary without stepping onto a follower
                    aud[AUD_HOLDS] += 1.0
                    pin = LL[ln, LL_LEN]
                    nb2 = next_behind[head]
                    if nb2 >= 0:
                        floor_pos = VF[nb2, FV_S] + my_len + 0.05
                        if floor_pos > pin:
                            pin = floor_pos
                    VF[head, FV_S] = pin
                    VF[head, FV_V] = 0.0
                    break
                head = lane_head[ln]

        # --- transfers: exit -> done
        for ln in range(9, 18):
            head = lane_head[ln]
            while head >= 0 and VF[head, FV_S] >= LL[ln, LL_LEN]:
                _unlink(head, VI[:, IV_LANE], next_ahead, next_behind, lane_head, lane_tail)
                VI[head, IV_PHASE] = PH_DONE
                VF[head, FV_EXIT] = t + dt
                counters[CNT_NET] -= 1
                counters[CNT_DONE] += 1
                head = lane_head[ln]

        # --- audits: bumper gaps, conservation
        for ln in range(N_LANES):
            i = lane_tail[ln]
            while i >= 0:
                na = next_ahead[i]
                gap = 1e18
                j = -1
                if na >= 0:
                    j = na
                    gap = VF[j, FV_S] - TT[VI[j, IV_TYPE], TT_LEN] - VF[i, FV_S]
                elif ln == RING_LANE:
                    tail = lane_tail[RING_LANE]
                    if tail != i:
                        j = tail
                        gap = (VF[j, FV_S] - VF[i, FV_S]) % C - TT[VI[j, IV_TYPE], TT_LEN]
                if j >= 0:
                    if gap < aud[AUD_MIN_GAP]:
                        aud[AUD_MIN_GAP] = gap
                    if gap < -1e-6:
                        aud[AUD_COL_I] = i
                        aud[AUD_COL_J] = j
                        aud[AUD_COL_T] = t + dt
                        return STATUS_COLLISION
                i = na
        unborn = N - counters[CNT_ARR]
        if unborn + counters[CNT_QUEUED] + counters[CNT_NET] + counters[CNT_DONE] != N:
            aud[AUD_CONSERVE] = 1.0
            return STATUS_CONSERVATION
        if counters[CNT_NET] > aud[AUD_MAX_NET]:
            aud[AUD_MAX_NET] = counters[CNT_NET]

        # --- perception buffer push (pre-step samples of the real leader)
        for ln in range(N_LANES):
            i = lane_head[ln]
            while i >= 0:
                lead_id = VI[i, IV_CURLEAD]
                if lead_id >= 0:
                    if VI[i, IV_PREVLEAD] != lead_id:
                        VI[i, IV_BUFFILL] = 0
                        VI[i, IV_BUFPOS] = 0
                    pos = (VI[i, IV_BUFPOS] + 1) % bufcap
                    pbuf[i, pos, 0] = scr[i, 1]
                    pbuf[i, pos, 1] = scr[i, 2]
                    pbuf[i, pos, 2] = scr[i, 3]
                    VI[i, IV_BUFPOS] = pos
                    fill = VI[i, IV_BUFFILL] + 1
                    VI[i, IV_BUFFILL] = fill if fill < bufcap else bufcap
                    VI[i, IV_PREVLEAD] = lead_id
                else:
                    VI[i, IV_PREVLEAD] = -1
                    VI[i, IV_BUFFILL] = 0
                i = next_behind[i]

        st[0] = t + dt

    return STATUS_OK
