#!/usr/bin/env python3
"""Regenerates tests/reference_values.hpp.

Reference values for the phase-functional moments and covariances are computed
by high-precision quadrature of the defining Wiener-space integrals, using only
the Gaussian characteristic function E exp(i sum_k e_k phi_{t_k}).  This route
shares no algebra with the closed forms implemented in the library, so it acts
as an independent oracle for them.

Notation: phi_t = omega*t + gamma*W_t, c = i*omega - gamma^2/2,
Z_t = int_0^t exp(i phi_s) ds, Y1_t = int_0^t Z_s ds, Y0_t = int_0^t |Z_s|^2 ds.

Pair moments reduce to 1D integrals by conditioning on the lag x = b - a
(E exp(i(phi_b - phi_a)) = exp(c(b-a)) for b >= a) and integrating the
occupation weight of each lag over the rectangular domain:

  E[conj(Z_t) Z_t]      = 2 Re int_0^t exp(c x) (t - x) dx
  E[Y0_t]               = 2 Re int_0^t exp(c x) (t - x)^2 / 2 dx
  E[conj(Y1_t) Y1_t]    = 2 Re int_0^t exp(c x) ((t-x)^3/3 + x (t-x)^2/2) dx

Triple moments use the full characteristic function and are computed as
iterated 2D quadratures split at the a = b kink.
"""
import mpmath as mp

mp.mp.dps = 30


def cval(omega, gamma):
    return mp.mpc(-gamma * gamma / 2, omega)


def seg(t, per):
    """Subdivision points, a few panels per oscillation period."""
    n = max(4, int(mp.ceil(3 * t / per)) if per < mp.inf else 4)
    n = min(n, 64)
    return mp.linspace(0, t, n + 1)


def m_eiphi(om, ga, t):
    return mp.e ** (cval(om, ga) * t)


def m_Z(om, ga, t):
    c = cval(om, ga)
    return mp.quad(lambda s: mp.e ** (c * s), seg(t, 2 * mp.pi / om))


def m_ZZ(om, ga, t):
    c = cval(om, ga)
    v = mp.quad(lambda x: mp.e ** (c * x) * (t - x), seg(t, 2 * mp.pi / om))
    return 2 * mp.re(v)


def m_Y1(om, ga, t):
    c = cval(om, ga)
    return mp.quad(lambda a: mp.e ** (c * a) * (t - a), seg(t, 2 * mp.pi / om))


def m_Y0(om, ga, t):
    c = cval(om, ga)
    v = mp.quad(lambda x: mp.e ** (c * x) * (t - x) ** 2 / 2, seg(t, 2 * mp.pi / om))
    return 2 * mp.re(v)


def m_Y1Y1(om, ga, t):
    c = cval(om, ga)
    v = mp.quad(
        lambda x: mp.e ** (c * x) * ((t - x) ** 3 / 3 + x * (t - x) ** 2 / 2),
        seg(t, 2 * mp.pi / om),
    )
    return 2 * mp.re(v)


# --- triple moments via the Gaussian characteristic function ----------------
# E exp(i(phi_t + phi_b - phi_a)) = exp(i om (t+b-a) - ga^2 (t+3b-a-2 min(a,b))/2)
# E exp(i(phi_a + phi_b - phi_t)) = exp(i om (a+b-t) - ga^2 (t+2 min(a,b)-a-b)/2)


def t_ZZe(om, ga, t):
    """E[conj(Z_t) Z_t exp(i phi_t)] (integration over a for conj, b for Z)."""
    def inner(a):
        def f(b):
            mn = min(a, b)
            ex = mp.mpc(0, om * (t + b - a)) - ga * ga * (t + 3 * b - a - 2 * mn) / 2
            return mp.e ** ex
        return mp.quad(f, sorted(set(list(seg(t, 2 * mp.pi / om)) + [a])))
    return mp.quad(inner, seg(t, 2 * mp.pi / om))


def t_eZZ(om, ga, t):
    """E[exp(-i phi_t) Z_t Z_t]."""
    def inner(a):
        def f(b):
            mn = min(a, b)
            ex = mp.mpc(0, om * (a + b - t)) - ga * ga * (t + 2 * mn - a - b) / 2
            return mp.e ** ex
        return mp.quad(f, sorted(set(list(seg(t, 2 * mp.pi / om)) + [a])))
    return mp.quad(inner, seg(t, 2 * mp.pi / om))


def m_Ze(om, ga, t):
    """E[conj(Z_t) exp(i phi_t)] = int_0^t exp(c (t-a)) da."""
    c = cval(om, ga)
    return mp.quad(lambda a: mp.e ** (c * (t - a)), seg(t, 2 * mp.pi / om))


def m_eZ(om, ga, t):
    """E[exp(-i phi_t) Z_t] = int_0^t exp(conj(c) (t-a)) da."""
    c = mp.conj(cval(om, ga))
    return mp.quad(lambda a: mp.e ** (c * (t - a)), seg(t, 2 * mp.pi / om))


def cov_ZZ_e(om, ga, t):
    return t_ZZe(om, ga, t) - m_ZZ(om, ga, t) * m_eiphi(om, ga, t)


def cov_Ze_Z(om, ga, t):
    return t_ZZe(om, ga, t) - m_Ze(om, ga, t) * m_Z(om, ga, t)


def cov_eZ_Z(om, ga, t):
    return t_eZZ(om, ga, t) - m_eZ(om, ga, t) * m_Z(om, ga, t)


def r2_exp(z):
    """Remainder of e^z after the quadratic Taylor polynomial, by series."""
    total = mp.mpf(0)
    term = z ** 3 / 6
    k = 3
    while abs(term) > mp.mpf(10) ** (-40) * max(abs(total), mp.mpf(10) ** -60):
        total += term
        k += 1
        term *= z / k
    return total


def cfmt(v):
    return "{%.*e, %.*e}" % (17, float(mp.re(v)), 17, float(mp.im(v)))


def rfmt(v):
    return "%.*e" % (17, float(v))


def main():
    om, ga = mp.mpf(1), mp.mpf("0.25")
    mts = ["0.1", "1", "10", "50"]
    cts = ["1", "5", "20"]

    lines = []
    lines.append("// Generated by tools/reference_values.py; do not edit by hand.")
    lines.append("// High-precision quadrature of the defining Wiener-space integrals;")
    lines.append("// independent of the closed-form algebra under test.")
    lines.append("#pragma once")
    lines.append("#include <complex>")
    lines.append("")
    lines.append("namespace qmeter::ref {")
    lines.append("using cplx = std::complex<double>;")
    lines.append("")
    lines.append("struct MomentRow {")
    lines.append("  double t;")
    lines.append("  cplx eiphi, z, y1;")
    lines.append("  double zz, y0, y1y1;")
    lines.append("};")
    lines.append("")
    lines.append("// omega = 1, gamma = 0.25")
    lines.append("inline constexpr MomentRow kMoments[] = {")
    for ts in mts:
        t = mp.mpf(ts)
        row = (
            m_eiphi(om, ga, t),
            m_Z(om, ga, t),
            m_Y1(om, ga, t),
            m_ZZ(om, ga, t),
            m_Y0(om, ga, t),
            m_Y1Y1(om, ga, t),
        )
        lines.append(
            "    {%s, %s, %s, %s, %s, %s, %s},"
            % (ts, cfmt(row[0]), cfmt(row[1]), cfmt(row[2]),
               rfmt(row[3]), rfmt(row[4]), rfmt(row[5]))
        )
    lines.append("};")
    lines.append("")
    lines.append("// omega = 2, gamma = 0.7, t = 3 (off-axis spot check)")
    om2, ga2 = mp.mpf(2), mp.mpf("0.7")
    t2 = mp.mpf(3)
    row = (
        m_eiphi(om2, ga2, t2),
        m_Z(om2, ga2, t2),
        m_Y1(om2, ga2, t2),
        m_ZZ(om2, ga2, t2),
        m_Y0(om2, ga2, t2),
        m_Y1Y1(om2, ga2, t2),
    )
    lines.append(
        "inline constexpr MomentRow kMomentsOffAxis = {3, %s, %s, %s, %s, %s, %s};"
        % (cfmt(row[0]), cfmt(row[1]), cfmt(row[2]),
           rfmt(row[3]), rfmt(row[4]), rfmt(row[5]))
    )
    lines.append("")
    lines.append("struct CovRow {")
    lines.append("  double t;")
    lines.append("  cplx zz_eiphi, zstar_eiphi_z, eiphi_z_z;")
    lines.append("};")
    lines.append("")
    lines.append("// omega = 1, gamma = 0.25")
    lines.append("inline constexpr CovRow kCovariances[] = {")
    for ts in cts:
        t = mp.mpf(ts)
        lines.append(
            "    {%s, %s, %s, %s},"
            % (ts, cfmt(cov_ZZ_e(om, ga, t)), cfmt(cov_Ze_Z(om, ga, t)),
               cfmt(cov_eZ_Z(om, ga, t)))
        )
    lines.append("};")
    lines.append("")
    lines.append("// Taylor remainder of exp after the quadratic polynomial at z = -1e-8,")
    lines.append("// where direct evaluation in double loses every significant digit.")
    lines.append("inline constexpr double kExpRemainder2At1em8 = %s;" % rfmt(r2_exp(mp.mpf("-1e-8"))))
    lines.append("")
    lines.append("}  // namespace qmeter::ref")
    lines.append("")
    print("\n".join(lines))


if __name__ == "__main__":
    main()
