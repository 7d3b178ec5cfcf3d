"""Hot numeric kernels: Bessel/Airy evaluation, zero refinement, billiard tracing.

Everything here is scalar-loop code compiled with numba when the backend
allows it (see :mod:`mushroom._backend`).  Under the numpy backend the same
functions run as plain Python; callers that need throughput in that mode use
the vectorised fallbacks in :mod:`mushroom.specfun`.

Bessel evaluation strategy (double precision, 0 <= n <= 300, 0 <= x <= 1000):

* ascending series where its terms decay from the start (x^2 <= 4(n+1)) and
  for all x <= 8,
* Hankel large-argument expansion for x >= max(20, n^2),
* Miller backward recurrence with even-order normalisation elsewhere.
"""

import math

import numpy as np

from ._backend import maybe_njit

# Ai(0) and -Ai'(0)
_AI0 = 0.3550280538878172
_AIP0 = 0.2588194037928068

# validated against an independent reference over this envelope
BESSEL_N_MAX = 2000
BESSEL_X_MAX = 2100.0


@maybe_njit()
def _bessel_j_series(n, x):
    """Ascending series; accurate when terms decrease essentially from k=0."""
    half = 0.5 * x
    t = 1.0
    for i in range(1, n + 1):
        t *= half / i
        if t == 0.0:  # deep underflow: |J_n| < 1e-300, report 0
            return 0.0
    s = t
    q = half * half
    k = 0
    while k < 2000:
        k += 1
        t *= -q / (k * (n + k))
        s_new = s + t
        if s_new == s:
            break
        s = s_new
    return s


@maybe_njit()
def _bessel_j_hankel(n, x):
    """Large-argument asymptotic expansion, for x >= max(20, n*n)."""
    mu = 4.0 * float(n) * float(n)
    p = 1.0
    q = 0.0
    a = 1.0
    prev = 1.0e308
    for k in range(1, 40):
        a *= (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * x)
        if abs(a) >= prev:  # divergence onset
            break
        prev = abs(a)
        if k % 2 == 1:
            q += a if (k % 4 == 1) else -a
        else:
            p += a if (k % 4 == 0) else -a
        if abs(a) < 1e-18:
            break
    w = x - (0.5 * n + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(w) - q * math.sin(w))


@maybe_njit()
def _bessel_j_miller(n, x):
    """Backward recurrence with normalisation; returns (J_n, J_{n+1})."""
    top = max(float(n), x)
    m = int(top + 8.0 * top ** (1.0 / 3.0) + 40.0)
    jp = 0.0  # trial J_{k+1}
    jc = 1e-30  # trial J_k, k=m
    norm = 0.0
    jn_val = 0.0
    jn1_val = 0.0
    if m == n:
        jn_val = jc
    if m == n + 1:
        jn1_val = jc
    if m % 2 == 0:
        norm += 2.0 * jc
    for k in range(m, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        kk = k - 1
        if kk == n:
            jn_val = jc
        if kk == n + 1:
            jn1_val = jc
        if kk > 0 and kk % 2 == 0:
            norm += 2.0 * jc
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            norm *= 1e-250
            jn_val *= 1e-250
            jn1_val *= 1e-250
    norm += jc  # J_0 term
    return jn_val / norm, jn1_val / norm


@maybe_njit()
def bessel_j(n, x):
    """J_n(x) for integer n >= 0, x >= 0."""
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x * x <= 4.0 * (n + 1.0) or x <= 8.0:
        return _bessel_j_series(n, x)
    if x >= 20.0 and x >= float(n) * float(n):
        return _bessel_j_hankel(n, x)
    jn, _ = _bessel_j_miller(n, x)
    return jn


@maybe_njit()
def bessel_j_pair(n, x):
    """(J_n(x), J_n'(x)) for integer n >= 0, x >= 0."""
    if x == 0.0:
        if n == 0:
            return 1.0, 0.0
        if n == 1:
            return 0.0, 0.5
        return 0.0, 0.0
    if x * x <= 4.0 * (n + 1.0) or x <= 8.0:
        jn = _bessel_j_series(n, x)
        jn1 = _bessel_j_series(n + 1, x)
    elif x >= 20.0 and x >= float(n + 1) * float(n + 1):
        jn = _bessel_j_hankel(n, x)
        jn1 = _bessel_j_hankel(n + 1, x)
    else:
        jn, jn1 = _bessel_j_miller(n, x)
    return jn, (n / x) * jn - jn1


@maybe_njit()
def bessel_j_batch(n, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = bessel_j(n, xs[i])
    return out


# ---------------------------------------------------------------------------
# z(zeta): inverse of (2/3)(-zeta)^{3/2} = sqrt(z^2-1) - arcsec(z), z >= 1.
# Solved via z = sec(beta) with tan(beta) - beta = y.


@maybe_njit()
def _solve_tan_beta(y):
    """beta in [0, pi/2) with tan(beta) - beta = y, for y >= 0."""
    if y <= 0.0:
        return 0.0
    lo = math.atan(y)  # f(lo) = -atan(y) <= 0
    hi = math.atan(y + 0.5 * math.pi)  # f(hi) = pi/2 - hi > 0
    b = (3.0 * y) ** (1.0 / 3.0) if y < 0.1 else 0.5 * (lo + hi)
    if b <= lo or b >= hi:
        b = 0.5 * (lo + hi)
    for _ in range(100):
        tb = math.tan(b)
        f = tb - b - y
        if f > 0.0:
            hi = b
        else:
            lo = b
        df = tb * tb
        if df > 0.0:
            step = f / df
            bn = b - step
            if bn <= lo or bn >= hi:
                bn = 0.5 * (lo + hi)
        else:
            bn = 0.5 * (lo + hi)
        if abs(bn - b) < 1e-16 * (1.0 + b):
            b = bn
            break
        b = bn
    return b


@maybe_njit()
def z_of_zeta(zeta):
    """The increasing solution z >= 1 of (2/3)(-zeta)^{3/2} = sqrt(z^2-1) - arcsec z."""
    if zeta >= 0.0:
        return 1.0
    y = (2.0 / 3.0) * (-zeta) ** 1.5
    b = _solve_tan_beta(y)
    return 1.0 / math.cos(b)


@maybe_njit()
def airy_zero_seed(k):
    """Asymptotic estimate of the k-th negative Airy zero (k >= 1)."""
    t = 3.0 * math.pi * (4.0 * k - 1.0) / 8.0
    return -(t ** (2.0 / 3.0)) * (1.0 + 5.0 / (48.0 * t * t))


@maybe_njit()
def bessel_zero_seed(n, k):
    """Initial guess for the k-th positive zero of J_n."""
    if k >= n:
        # McMahon expansion, accurate for k >~ n
        beta = (k + 0.5 * n - 0.25) * math.pi
        mu = 4.0 * float(n) * float(n)
        b8 = 8.0 * beta
        return (
            beta
            - (mu - 1.0) / b8
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3)
        )
    # uniform (Olver-type) leading order
    zeta = airy_zero_seed(k) * float(n) ** (-2.0 / 3.0)
    return n * z_of_zeta(zeta)


@maybe_njit()
def bessel_zeros_fill(n, alphas, resids):
    """First kmax positive zeros of J_n via bracketed Newton.

    Fills ``alphas``/``resids`` (length kmax) and returns an error code:
    0 ok, 1 bracketing failure, 2 no convergence, 3 ordering violation.
    """
    kmax = alphas.shape[0]
    prev = float(n)  # zeros satisfy alpha_{n,k} > n
    for k in range(1, kmax + 1):
        seed = bessel_zero_seed(n, k)
        if seed <= prev:
            seed = prev + 1.0
        # bracket by expanding around the seed; consecutive zeros are > pi apart
        lo = seed - 0.5
        hi = seed + 0.5
        if lo < prev + 1e-9:
            lo = prev + 1e-9
        flo = bessel_j(n, lo)
        fhi = bessel_j(n, hi)
        grow = 0
        while flo * fhi > 0.0 and grow < 60:
            grow += 1
            if abs(flo) < abs(fhi):
                lo -= 0.35
                if lo < prev + 1e-9:
                    lo = prev + 1e-9
                flo = bessel_j(n, lo)
            else:
                hi += 0.35
                fhi = bessel_j(n, hi)
        if flo * fhi > 0.0:
            return 1
        x = seed
        if x <= lo or x >= hi:
            x = 0.5 * (lo + hi)
        converged = False
        for _ in range(100):
            f, fp = bessel_j_pair(n, x)
            if f * flo > 0.0:
                lo = x
            else:
                hi = x
            if fp != 0.0:
                xn = x - f / fp
                if xn <= lo or xn >= hi:
                    xn = 0.5 * (lo + hi)
            else:
                xn = 0.5 * (lo + hi)
            if abs(xn - x) <= 1e-14 * xn:
                x = xn
                converged = True
                break
            x = xn
        if not converged and hi - lo > 1e-12 * x:
            return 2
        if x <= prev:
            return 3
        f, fp = bessel_j_pair(n, x)
        alphas[k - 1] = x
        resids[k - 1] = abs(f)
        prev = x
    return 0


# ---------------------------------------------------------------------------
# Airy function Ai and its derivative, on x <= 8.


@maybe_njit()
def _airy_maclaurin(x):
    """(Ai, Ai') by the Maclaurin series; trustworthy for |x| <= ~8."""
    x3 = x * x * x
    # f = sum t_k x^{3k},   t_{k+1}/t_k = x^3 / ((3k+2)(3k+3))
    # g = sum u_k x^{3k+1}, u_{k+1}/u_k = x^3 / ((3k+3)(3k+4))
    t = 1.0
    u = x
    f = t
    g = u
    fp = 0.0  # f' = sum 3k t_k x^{3k-1}
    gp = 1.0  # g' = sum (3k+1) u_k x^{3k} / x ... accumulated directly
    k = 0
    while k < 400:
        tn = t * x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0))
        un = u * x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0))
        k += 1
        f_new = f + tn
        g_new = g + un
        if x != 0.0:
            fp += 3.0 * k * tn / x
            gp += (3.0 * k + 1.0) * un / x
        done = (f_new == f) and (g_new == g)
        f = f_new
        g = g_new
        t = tn
        u = un
        if done:
            break
    ai = _AI0 * f - _AIP0 * g
    aip = _AI0 * fp - _AIP0 * gp
    return ai, aip


@maybe_njit()
def _airy_asymp_neg(x):
    """(Ai, Ai') for x <= -7.5 via the oscillatory asymptotic expansion."""
    z = -x
    zeta = (2.0 / 3.0) * z ** 1.5
    # u_k, v_k auxiliary coefficient sums
    se = 1.0  # sum (-1)^k u_{2k} zeta^{-2k}
    so = 0.0  # sum (-1)^k u_{2k+1} zeta^{-2k-1}
    pe = 1.0  # same with v_k
    po = 0.0
    u = 1.0
    v = 1.0
    prev = 1.0e308
    for k in range(0, 40):
        u_next = u * (6.0 * k + 1.0) * (6.0 * k + 3.0) * (6.0 * k + 5.0) / (
            216.0 * (k + 1.0) * (2.0 * k + 1.0)
        )
        v_next = u_next * (6.0 * (k + 1.0) + 1.0) / (1.0 - 6.0 * (k + 1.0))
        term = u_next / zeta ** (k + 1.0)
        if abs(term) >= prev:
            break
        prev = abs(term)
        kk = k + 1
        sgn = 1.0 if (kk // 2) % 2 == 0 else -1.0
        if kk % 2 == 1:
            so += sgn * u_next / zeta ** kk
            po += sgn * v_next / zeta ** kk
        else:
            se += sgn * u_next / zeta ** kk
            pe += sgn * v_next / zeta ** kk
        u = u_next
        v = v_next
        if abs(term) < 1e-18:
            break
    c = math.cos(zeta - 0.25 * math.pi)
    s = math.sin(zeta - 0.25 * math.pi)
    rpi = 1.0 / math.sqrt(math.pi)
    ai = rpi * z ** -0.25 * (c * se + s * so)
    aip = rpi * z ** 0.25 * (s * pe - c * po)
    return ai, aip


@maybe_njit()
def airy_ai_pair(x):
    """(Ai(x), Ai'(x)); supported for x <= 8."""
    if x <= -7.5:
        return _airy_asymp_neg(x)
    return _airy_maclaurin(x)


@maybe_njit()
def airy_zero_refine(k):
    """k-th negative Airy zero by bracketed Newton from the asymptotic seed.

    Returns (a_k, |Ai(a_k)|, err) with err 0 ok / 1 bracket fail / 2 no conv.
    """
    seed = airy_zero_seed(k)
    # local zero spacing is ~ pi / sqrt(|a_k|); keep the bracket well inside it
    halfw = 0.3 * math.pi / math.sqrt(-seed)
    lo = seed - halfw
    hi = seed + halfw
    flo, _ = airy_ai_pair(lo)
    fhi, _ = airy_ai_pair(hi)
    grow = 0
    while flo * fhi > 0.0 and grow < 40:
        grow += 1
        if abs(flo) < abs(fhi):
            lo -= 0.5 * halfw
            flo, _ = airy_ai_pair(lo)
        else:
            hi += 0.5 * halfw
            fhi, _ = airy_ai_pair(hi)
    if flo * fhi > 0.0:
        return 0.0, 1.0, 1
    x = seed
    if x <= lo or x >= hi:
        x = 0.5 * (lo + hi)
    converged = False
    for _ in range(100):
        f, fp = airy_ai_pair(x)
        if f * flo > 0.0:
            lo = x
        else:
            hi = x
        if fp != 0.0:
            xn = x - f / fp
            if xn <= lo or xn >= hi:
                xn = 0.5 * (lo + hi)
        else:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-15 * abs(x):
            x = xn
            converged = True
            break
        x = xn
    f, _ = airy_ai_pair(x)
    if not converged and hi - lo > 1e-10 * abs(x):
        return x, abs(f), 2
    return x, abs(f), 0


# ---------------------------------------------------------------------------
# Billiard trajectory tracing on the mushroom M_t.
#
# Wall codes follow the boundary tiling order of mushroom.geometry:
# 0 stalk-bottom, 1 stalk-right-wall, 2 hat-right-shelf, 3 cap-arc,
# 4 hat-left-shelf, 5 stalk-left-wall.
# Termination reasons: 0 bounce budget, 1 time budget, 2 corner, 3 tangency,
# 4 no intersection found (numerical failure).


@maybe_njit()
def trace_mushroom(r1, r2, t, x0, y0, dx0, dy0, max_bounces, max_time,
                   bx, by, bdx, bdy, bwall, btime):
    tau_min = 1e-12
    tau_seg = 1e-12 * r2
    tau_corner = 1e-12 * r2
    tau_tan = 1e-12
    x = x0
    y = y0
    dx = dx0
    dy = dy0
    tt = 0.0
    nb = 0
    reason = 0
    while nb < max_bounces:
        best_s = 1e300
        best_wall = -1
        # stalk-left-wall, x = -r1, y in [-t, 0]
        if dx < 0.0:
            s = (-r1 - x) / dx
            if s > tau_min:
                yh = y + s * dy
                if -t - tau_seg <= yh <= tau_seg and s < best_s:
                    best_s = s
                    best_wall = 5
        # stalk-right-wall, x = +r1
        if dx > 0.0:
            s = (r1 - x) / dx
            if s > tau_min:
                yh = y + s * dy
                if -t - tau_seg <= yh <= tau_seg and s < best_s:
                    best_s = s
                    best_wall = 1
        # stalk-bottom, y = -t, x in [-r1, r1]
        if dy < 0.0:
            s = (-t - y) / dy
            if s > tau_min:
                xh = x + s * dx
                if -r1 - tau_seg <= xh <= r1 + tau_seg and s < best_s:
                    best_s = s
                    best_wall = 0
        # shelves, y = 0, r1 <= |x| <= r2, approached from above
        if dy < 0.0 and y > 0.0:
            s = -y / dy
            if s > tau_min:
                xh = x + s * dx
                if (r1 - tau_seg <= xh <= r2 + tau_seg) and s < best_s:
                    best_s = s
                    best_wall = 2
                elif (-r2 - tau_seg <= xh <= -r1 + tau_seg) and s < best_s:
                    best_s = s
                    best_wall = 4
        # cap-arc, |p + s d| = r2 with y >= 0
        b_half = x * dx + y * dy
        c_quad = x * x + y * y - r2 * r2
        disc = b_half * b_half - c_quad
        if disc > 0.0:
            root = math.sqrt(disc)
            for which in range(2):
                s = -b_half - root if which == 0 else -b_half + root
                if s > tau_min and s < best_s:
                    yh = y + s * dy
                    if yh >= -tau_seg:
                        best_s = s
                        best_wall = 3
        if best_wall < 0:
            reason = 4
            break
        if tt + best_s > max_time:
            tt = max_time
            reason = 1
            break
        xh = x + best_s * dx
        yh = y + best_s * dy
        tt += best_s
        # snap the hit point exactly onto the wall so rounding drift cannot
        # spawn spurious micro-intersections on the next step
        if best_wall == 0:
            yh = -t
            nx_, ny_ = 0.0, -1.0
        elif best_wall == 1:
            xh = r1
            nx_, ny_ = 1.0, 0.0
        elif best_wall == 5:
            xh = -r1
            nx_, ny_ = -1.0, 0.0
        elif best_wall == 2 or best_wall == 4:
            yh = 0.0
            nx_, ny_ = 0.0, -1.0
        else:
            inv = r2 / math.sqrt(xh * xh + yh * yh)
            xh *= inv
            yh *= inv
            inv = 1.0 / r2
            nx_, ny_ = xh * inv, yh * inv
        # corner proximity (the six corner points)
        cornered = False
        for cx, cy in ((-r1, -t), (r1, -t), (r1, 0.0), (r2, 0.0),
                       (-r2, 0.0), (-r1, 0.0)):
            ddx = xh - cx
            ddy = yh - cy
            if ddx * ddx + ddy * ddy <= tau_corner * tau_corner:
                cornered = True
                break
        if cornered:
            x, y = xh, yh
            reason = 2
            break
        dot = dx * nx_ + dy * ny_
        if dot <= tau_tan:
            x, y = xh, yh
            reason = 3
            break
        dx = dx - 2.0 * dot * nx_
        dy = dy - 2.0 * dot * ny_
        inv = 1.0 / math.sqrt(dx * dx + dy * dy)
        dx *= inv
        dy *= inv
        x, y = xh, yh
        bx[nb] = x
        by[nb] = y
        bdx[nb] = dx
        bdy[nb] = dy
        bwall[nb] = best_wall
        btime[nb] = tt
        nb += 1
    return nb, tt, reason
