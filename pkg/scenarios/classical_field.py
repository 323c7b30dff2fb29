"""
Classical fields: the Kirchhoff solution for the plateau data and the
mass-shell restriction m̲ of a pair density, which vanishes spacelike to the
bridge tube and solves the wave equation.
"""
import logging

import numpy as np

from scenarios.common import pair, progress, quadrature_config, rng_for, validated, vec
from utils.data_handling import Report
from utils.geometry import FourVector
from utils.gupta_bleuler import field_shift
from utils.kernels import kirchhoff_wave, mass_shell_restriction
from utils.profiles import PlateauProfile

logger = logging.getLogger(__name__)


def wave_residual(wave, t, rho, h):
    """|S_tt - S_ρρ - (2/ρ) S_ρ| by central differences of step h."""
    s = wave.radial
    s_tt = (s(t + h, rho) - 2.0 * s(t, rho) + s(t - h, rho)) / h ** 2
    s_rr = (s(t, rho + h) - 2.0 * s(t, rho) + s(t, rho - h)) / h ** 2
    s_r = (s(t, rho + h) - s(t, rho - h)) / (2.0 * h)
    return float(abs(s_tt - s_rr - 2.0 / rho * s_r))


def box_residual(m, x, h, mu, cfg):
    """|□ m̲_μ| at x by central second differences of step h."""
    def value(y):
        return mass_shell_restriction(m, y, "momentum", cfg)[0][mu]
    centre = value(x)
    total = 0.0
    for nu, sign in enumerate((1.0, -1.0, -1.0, -1.0)):
        e = np.zeros(4)
        e[nu] = h
        total += sign * (value(x + e) - 2.0 * centre + value(x - e)) / h ** 2
    return abs(total)


def shadow_points(m, rng, n, margin):
    """Points whose distance to the segment exceeds their time offset by ``margin``."""
    d = m.d[1:]
    normal = np.cross(d, [0.0, 0.0, 1.0])
    if np.linalg.norm(normal) < 1e-12:
        normal = np.cross(d, [1.0, 0.0, 0.0])
    normal /= np.linalg.norm(normal)
    out = []
    for _ in range(n):
        base = m.point(float(rng.uniform(0.0, 1.0)))
        dt = float(rng.uniform(-2.0, 2.0))
        dist = abs(dt) + abs(m.d[0]) + margin + float(rng.uniform(0.0, 1.0))
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        axis = np.cross(d / np.linalg.norm(d), normal)
        offset = dist * (np.cos(angle) * normal + np.sin(angle) * axis)
        out.append(FourVector(base[0] + dt, tuple(base[1:] + offset)))
    return out


def validate(scenario):
    geo = scenario.geometry
    m = validated(lambda: pair(scenario), "pair density")
    chi = validated(lambda: PlateauProfile(float(geo["r"]), float(geo["eps"]), int(geo["k"])), "plateau")
    return m, chi


def run(scenario):
    """
    Rows for the Kirchhoff solution (interior, exterior, refinement ratio of
    the wave residual), the largest |m̲| and |F| at points spacelike to the
    tube, the refinement ratio of □m̲ and the gap between the two routes for F.
    """
    m, chi = validate(scenario)
    geo = scenario.geometry
    cfg = quadrature_config(scenario)
    report = Report.for_scenario(scenario)
    report.add_input("pair", m.text)
    r, eps = float(geo["r"]), float(geo["eps"])
    c = vec(geo["c"])
    wave = kirchhoff_wave(chi, c)

    t_in = 0.2 * (r - eps)
    inside = float(wave(c.x0 + t_in, c.spatial + [t_in, 0.0, 0.0])[0])
    report.add("kirchhoff_interior", inside, 0.0, 1.0, 1e-8)
    outside = float(wave(c.x0 + t_in, c.spatial + [r + eps + t_in + 0.5, 0.0, 0.0])[0])
    report.add("kirchhoff_exterior", outside, 0.0, 0.0, 1e-12)

    t0, rho0 = 0.3, r + 0.5 * eps + 0.3
    h = float(scenario.param("wave_step", eps / 5.0))
    coarse, fine = wave_residual(wave, t0, rho0, h), wave_residual(wave, t0, rho0, h / 2.0)
    report.add("kirchhoff_refinement_ratio", coarse / max(fine, 1e-300), 0.0, 3.0, 0.0, relation="ge")

    rng = rng_for(scenario)
    margin = 4.0 * m.mollifier.a + 0.05
    worst = 0.0
    for x in progress(shadow_points(m, rng, int(scenario.param("n_points", 10)), margin), "shadow"):
        lower, shift, _ = mass_shell_restriction(m, x, "kirchhoff", cfg)
        worst = max(worst, float(np.max(np.abs(lower))), float(np.max(np.abs(shift))))
    report.add("shadow_max", worst, 0.0, 0.0, float(scenario.param("shadow_tol", 1e-10)), relation="le")

    mid = m.point(0.5)
    normal = np.cross(m.d[1:], [0.0, 0.0, 1.0])
    normal = normal / max(np.linalg.norm(normal), 1e-12)
    probe_point = FourVector(mid[0] + 0.5, tuple(mid[1:] + 0.5 * normal))
    if scenario.param("box_check", True):
        step = float(scenario.param("box_step", 0.25 * m.mollifier.a))
        mu = int(np.argmax(np.abs(m.d)))
        coarse = box_residual(m, probe_point.as_array(), step, mu, cfg)
        fine = box_residual(m, probe_point.as_array(), step / 2.0, mu, cfg)
        report.add("box_refinement_ratio", coarse / max(fine, 1e-300), 0.0, 3.0, 0.0, relation="ge")

    momentum = field_shift(m, probe_point, "momentum", cfg)
    kirchhoff = field_shift(m, probe_point, "kirchhoff", cfg)
    report.add("field_route_gap", float(np.max(np.abs(momentum - kirchhoff))), 0.0)
    logger.info("classical field: shadow max %.3e", worst)
    return report
