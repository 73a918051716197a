"""Fleet-level day-ahead scheduler: one LP over all vehicles, plugs and steps.

Decision variables per vehicle and step: slow charge, grid discharge, fast
charge (all kWh, grid side) and state of energy (kWh). When the wear term is
priced, an epigraph variable per step carries the degradation cost.

Power caps are folded into variable bounds wherever they involve a single
variable (plug limit, on-board-charger limit, zero flow while unplugged);
the charge taper above the CC/CV breakpoint and the energy balance are rows.
Being plugged in is a prerequisite for any grid flow in every power mode;
the modes only change which magnitude caps apply while plugged in.

build/solve are pure given an immutable scenario, so distinct solves may run
concurrently.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import lp
from .degradation import degradation_cost, emit_degradation_rows
from .domain import FAST, SLOW, Scenario, ScenarioError, Vehicle, grid_fee, validate_scenario

FIXED_POWER_KW = 4.0


class PowerMode(str, Enum):
    """Which power caps constrain slow charging/discharging while plugged in."""

    FIXED_4KW = "fixed_4kw"   # flat 4 kW cap, ignoring plug and OBC ratings
    OBC_ONLY = "obc_only"     # on-board charger rating only
    CP_ONLY = "cp_only"       # plug rating only, no charge taper
    BOTH = "both"             # plug and OBC ratings plus the charge taper


@dataclass(frozen=True)
class CostToggles:
    """Objective term switches. Energy purchase/revenue is always priced."""

    include_energy: bool = True
    include_degradation: bool = True
    include_grid_tariff: bool = True
    include_cp_tariff: bool = True


#: Objective variants used by the cost ablation, cheapest-first naming.
OBJECTIVE_VARIANTS: dict[str, CostToggles] = {
    "of1": CostToggles(True, False, False, False),
    "of2": CostToggles(True, True, False, False),
    "of3": CostToggles(True, False, True, False),
    "of4": CostToggles(True, False, False, True),
    "of5": CostToggles(True, True, True, True),
}


def cost_toggles_for(label: str) -> CostToggles:
    try:
        return OBJECTIVE_VARIANTS[label.lower()]
    except KeyError:
        raise ValueError(f"unknown objective variant {label!r}, expected of1..of5") from None


class AssemblyError(RuntimeError):
    """Cost breakdown failed to reconcile with the LP objective."""


class _FloorUnreachable(Exception):
    """Requested terminal stock exceeds the battery's upper SOE bound."""


@dataclass
class VarMap:
    """LP variable ids per (vehicle, step); -1 where no variable exists."""

    sch: np.ndarray
    dch: np.ndarray
    fch: np.ndarray
    soe: np.ndarray
    cdeg: np.ndarray | None
    windows: list[np.ndarray]


@dataclass(frozen=True)
class VehicleCosts:
    """Objective-term breakdown for one vehicle, EUR.

    ``energy_eur`` is net of discharge revenue; ``v2g_revenue_eur`` reports
    the revenue component separately without being added again. The included
    terms sum to ``total_eur``.
    """

    vehicle: str
    energy_eur: float
    grid_fee_eur: float
    cp_fee_eur: float
    degradation_eur: float
    v2g_revenue_eur: float
    total_eur: float


@dataclass
class SessionResult:
    """Per-session trace entry for the station-level scheduler."""

    vehicle: str
    cp: str
    arrive_step: int
    depart_step: int
    arrival_soe_kwh: float
    depart_soe_kwh: float
    floor_kwh: float
    cost_eur: float
    note: str = ""


@dataclass
class FleetSchedule:
    """Solved trajectories plus the objective-cost breakdown.

    Arrays are (vehicles, steps). ``c_deg`` always holds the wear cost the
    trajectory implies; it enters the cost breakdown only when the wear term
    was priced in the objective.
    """

    status: str
    e_sch: np.ndarray
    e_dch: np.ndarray
    e_fch: np.ndarray
    soe: np.ndarray
    c_deg: np.ndarray
    per_vehicle: list[VehicleCosts]
    total_cost_eur: float
    message: str = ""
    warnings: list[str] = field(default_factory=list)
    sessions: list[SessionResult] | None = None

    @property
    def charged_kwh(self) -> float:
        return float(self.e_sch.sum() + self.e_fch.sum())

    @property
    def discharged_kwh(self) -> float:
        return float(self.e_dch.sum())

    @classmethod
    def empty(cls, s: Scenario, status: str, message: str = "") -> "FleetSchedule":
        shape = (len(s.vehicles), s.horizon.step_count)
        z = np.zeros(shape)
        return cls(status, z, z.copy(), z.copy(), z.copy(), z.copy(), [], 0.0, message)


# ---------------------------------------------------------------------------
# Assembly

def _flow_costs(s: Scenario, ct: CostToggles, v_idx: int, t: int) -> tuple[float, float, float]:
    """Objective coefficients (slow charge, discharge, fast charge) at (v, t)."""
    price = float(s.prices.values[t])
    cal = s.tariff_calendar
    h = s.horizon.step_hours
    sch = price
    fch = price
    cp = s.cp_at(v_idx, t)
    if cp is not None:
        fee_grid = grid_fee(cp, t, cal, h) if ct.include_grid_tariff else 0.0
        fee_cp = cp.cp_fee_eur_per_kwh if ct.include_cp_tariff else 0.0
        if cp.kind == SLOW:
            sch += fee_grid + fee_cp
        else:
            fch += fee_grid + fee_cp
    return sch, -price, fch


def _slow_cap(s: Scenario, v: Vehicle, v_idx: int, t: int, power: PowerMode) -> float:
    """Upper bound on slow charge/discharge at (v, t) under a power mode."""
    cp = s.cp_at(v_idx, t)
    if cp is None or cp.kind != SLOW:
        return 0.0
    if power is PowerMode.FIXED_4KW:
        return FIXED_POWER_KW * s.horizon.step_hours
    if power is PowerMode.OBC_ONLY:
        return v.obc_max_kwh_per_step
    if power is PowerMode.CP_ONLY:
        return cp.power_limit_kwh_per_step
    return min(cp.power_limit_kwh_per_step, v.obc_max_kwh_per_step)


def _build_fleet_lp(
    s: Scenario,
    ct: CostToggles,
    power: PowerMode,
    windows: list[np.ndarray],
    init_soe: list[float],
    final_floor: list[float],
    name: str = "fleet",
) -> tuple[lp.LpProblem, VarMap]:
    """Emit variables and rows for each vehicle over its step window.

    ``init_soe[v]`` is the stock entering the first window step;
    ``final_floor[v]`` the minimum stock at the last window step.
    """
    if s.prices is None:
        raise ScenarioError("scenario has no price series attached; use Scenario.with_prices")
    if not ct.include_energy:
        raise ValueError("the energy term cannot be toggled off")

    V, T = len(s.vehicles), s.horizon.step_count
    p = lp.LpProblem(name)
    shape = (V, T)
    m_sch = np.full(shape, -1, dtype=int)
    m_dch = np.full(shape, -1, dtype=int)
    m_fch = np.full(shape, -1, dtype=int)
    m_soe = np.full(shape, -1, dtype=int)
    m_deg = np.full(shape, -1, dtype=int) if ct.include_degradation else None

    for v_idx, v in enumerate(s.vehicles):
        steps = windows[v_idx]
        if steps.size == 0:
            continue
        cap = v.capacity_kwh
        soe_lb = v.soe_min_kwh
        soe_ub = v.soe_max_kwh
        last = int(steps[-1])
        taper_k = None
        if v.soe_cv_frac < 1.0 - 1e-12:
            taper_k = v.obc_max_kwh_per_step / (cap * (1.0 - v.soe_cv_frac))

        for t in map(int, steps):
            c_sch, c_dch, c_fch = _flow_costs(s, ct, v_idx, t)
            slow_cap = _slow_cap(s, v, v_idx, t, power)
            cp = s.cp_at(v_idx, t)
            fast_cap = (
                cp.power_limit_kwh_per_step if cp is not None and cp.kind == FAST else 0.0
            )
            m_sch[v_idx, t] = p.add_variable(0.0, slow_cap, c_sch, f"sch[{v.id},{t}]")
            m_dch[v_idx, t] = p.add_variable(0.0, slow_cap, c_dch, f"dch[{v.id},{t}]")
            m_fch[v_idx, t] = p.add_variable(0.0, fast_cap, c_fch, f"fch[{v.id},{t}]")
            lb_t = soe_lb
            if t == last:
                lb_t = max(lb_t, final_floor[v_idx])
                if lb_t > soe_ub + 1e-9:
                    raise _FloorUnreachable(
                        f"vehicle {v.id!r}: required stock {lb_t:.3f} kWh at step {t} "
                        f"exceeds the SOE ceiling {soe_ub:.3f} kWh"
                    )
                lb_t = min(lb_t, soe_ub)
            m_soe[v_idx, t] = p.add_variable(lb_t, soe_ub, 0.0, f"soe[{v.id},{t}]")
            if m_deg is not None:
                m_deg[v_idx, t] = p.add_variable(0.0, lp.INF, 1.0, f"cdeg[{v.id},{t}]")

        prev_id = -1
        for t in map(int, steps):
            v_ids = (m_sch[v_idx, t], m_dch[v_idx, t], m_fch[v_idx, t], m_soe[v_idx, t])
            sch_id, dch_id, fch_id, soe_id = v_ids
            # charge taper above the CC/CV breakpoint; slow charging only
            if taper_k is not None and _slow_cap(s, v, v_idx, t, power) > 0.0 and power is not PowerMode.CP_ONLY:
                p.add_constraint(
                    [(sch_id, 1.0), (soe_id, taper_k)],
                    "<=",
                    taper_k * cap,
                    name=f"cv[{v.id},{t}]",
                )
            terms = [
                (soe_id, 1.0),
                (sch_id, -v.eta_sch),
                (fch_id, -v.eta_fch),
                (dch_id, 1.0 / v.eta_dch),
            ]
            rhs = -float(s.trips.energy_kwh[v_idx, t]) / v.eta_run
            if prev_id >= 0:
                terms.append((prev_id, -1.0))
            else:
                rhs += init_soe[v_idx]
            p.add_constraint(terms, "=", rhs, name=f"bal[{v.id},{t}]")
            if m_deg is not None:
                emit_degradation_rows(p, m_deg[v_idx, t], dch_id, soe_id, v, t)
            prev_id = soe_id

    return p, VarMap(m_sch, m_dch, m_fch, m_soe, m_deg, windows)


def build_evba(
    s: Scenario, ct: CostToggles = CostToggles(), power: PowerMode = PowerMode.BOTH
) -> tuple[lp.LpProblem, VarMap]:
    """Assemble the whole-horizon fleet LP for a validated scenario."""
    diags = validate_scenario(s)
    if diags:
        raise ScenarioError("invalid scenario:\n  " + "\n  ".join(diags))
    T = s.horizon.step_count
    windows = [np.arange(T) for _ in s.vehicles]
    init = [v.soe_initial_kwh for v in s.vehicles]
    floor = [v.soe_initial_kwh for v in s.vehicles]  # end-of-day stock floor
    return _build_fleet_lp(s, ct, power, windows, init, floor, name="evba")


# ---------------------------------------------------------------------------
# Extraction

def _cost_breakdown(
    s: Scenario,
    ct: CostToggles,
    e_sch: np.ndarray,
    e_dch: np.ndarray,
    e_fch: np.ndarray,
    deg_priced: np.ndarray,
) -> list[VehicleCosts]:
    """Recompute the objective per vehicle from prices and fees.

    ``deg_priced`` must hold the wear cost actually present in the objective
    (zeros when the wear term is toggled off).
    """
    prices = s.prices.values
    cal = s.tariff_calendar
    h = s.horizon.step_hours
    out = []
    for v_idx, v in enumerate(s.vehicles):
        purchase = float(prices @ (e_sch[v_idx] + e_fch[v_idx]))
        revenue = float(prices @ e_dch[v_idx])
        grid = 0.0
        cp_fee = 0.0
        for t in range(s.horizon.step_count):
            flow = e_sch[v_idx, t] + e_fch[v_idx, t]
            if flow == 0.0:
                continue
            cp = s.cp_at(v_idx, t)
            if cp is None:
                continue
            grid += grid_fee(cp, t, cal, h) * flow
            cp_fee += cp.cp_fee_eur_per_kwh * flow
        if not ct.include_grid_tariff:
            grid = 0.0
        if not ct.include_cp_tariff:
            cp_fee = 0.0
        deg = float(deg_priced[v_idx].sum())
        grid = float(grid)
        cp_fee = float(cp_fee)
        energy = purchase - revenue
        out.append(
            VehicleCosts(
                vehicle=v.id,
                energy_eur=energy,
                grid_fee_eur=grid,
                cp_fee_eur=cp_fee,
                degradation_eur=deg,
                v2g_revenue_eur=revenue,
                total_eur=energy + grid + cp_fee + deg,
            )
        )
    return out


def extract_schedule(
    varmap: VarMap, sol: lp.LpSolution, s: Scenario, ct: CostToggles
) -> FleetSchedule:
    """Turn an optimal LP solution into a FleetSchedule.

    The cost breakdown is recomputed independently from prices and fees and
    reconciled with the LP objective; a mismatch means the model assembly is
    wrong and raises AssemblyError.
    """
    if sol.status != lp.OPTIMAL:
        raise ValueError(f"cannot extract from a non-optimal solution (status={sol.status})")
    V, T = varmap.sch.shape
    e_sch = np.zeros((V, T))
    e_dch = np.zeros((V, T))
    e_fch = np.zeros((V, T))
    soe = np.zeros((V, T))
    c_deg = np.zeros((V, T))

    for v_idx in range(V):
        for t in map(int, varmap.windows[v_idx]):
            e_sch[v_idx, t] = max(sol.value(varmap.sch[v_idx, t]), 0.0)
            e_dch[v_idx, t] = max(sol.value(varmap.dch[v_idx, t]), 0.0)
            e_fch[v_idx, t] = max(sol.value(varmap.fch[v_idx, t]), 0.0)
            soe[v_idx, t] = sol.value(varmap.soe[v_idx, t])
            if varmap.cdeg is not None:
                c_deg[v_idx, t] = sol.value(varmap.cdeg[v_idx, t])

    deg_priced = c_deg if ct.include_degradation else np.zeros((V, T))
    if not ct.include_degradation:
        # report the wear the trajectory implies even when it is not priced
        for v_idx, v in enumerate(s.vehicles):
            for t in map(int, varmap.windows[v_idx]):
                c_deg[v_idx, t] = max(
                    degradation_cost(
                        v,
                        e_dch[v_idx, t],
                        min(max(soe[v_idx, t], 0.0), v.capacity_kwh),
                    ),
                    0.0,
                )

    per_vehicle = _cost_breakdown(s, ct, e_sch, e_dch, e_fch, deg_priced)
    total = sum(c.total_eur for c in per_vehicle)
    if abs(total - sol.objective) > 1e-6 * (1.0 + abs(sol.objective)):
        raise AssemblyError(
            f"cost breakdown {total:.9f} does not reconcile with LP objective {sol.objective:.9f}"
        )
    return FleetSchedule(
        status="optimal",
        e_sch=e_sch,
        e_dch=e_dch,
        e_fch=e_fch,
        soe=soe,
        c_deg=c_deg,
        per_vehicle=per_vehicle,
        total_cost_eur=total,
    )


def _infeasibility_hint(s: Scenario, power: PowerMode) -> str:
    """Name the first step where even maximal charging cannot keep a vehicle
    above its SOE floor (ignoring the charge taper, so the bound is generous)."""
    T = s.horizon.step_count
    for v_idx, v in enumerate(s.vehicles):
        stock = v.soe_initial_kwh
        for t in range(T):
            slow = _slow_cap(s, v, v_idx, t, power)
            cp = s.cp_at(v_idx, t)
            fast = cp.power_limit_kwh_per_step if cp is not None and cp.kind == FAST else 0.0
            stock = min(stock + slow * v.eta_sch + fast * v.eta_fch, v.soe_max_kwh)
            stock -= float(s.trips.energy_kwh[v_idx, t]) / v.eta_run
            if stock < v.soe_min_kwh - 1e-9:
                return (
                    f"vehicle {v.id!r}: cumulative energy bound violated at step {t} "
                    f"(best reachable stock {stock:.3f} kWh is below the "
                    f"floor {v.soe_min_kwh:.3f} kWh)"
                )
        if stock < v.soe_initial_kwh - 1e-9:
            return (
                f"vehicle {v.id!r}: end-of-day stock floor {v.soe_initial_kwh:.3f} kWh "
                f"unreachable (best {stock:.3f} kWh)"
            )
    return "no single-vehicle cumulative-energy bound identified; interaction infeasibility"


def solve_evba(
    s: Scenario,
    ct: CostToggles = CostToggles(),
    power: PowerMode = PowerMode.BOTH,
    *,
    feas_tol: float = 1e-6,
) -> FleetSchedule:
    """Build and solve the fleet LP; returns the schedule or an infeasible status."""
    problem, varmap = build_evba(s, ct, power)
    sol = lp.solve(problem, feas_tol=feas_tol)
    if sol.status == lp.OPTIMAL:
        return extract_schedule(varmap, sol, s, ct)
    message = ""
    if sol.status == lp.INFEASIBLE:
        message = _infeasibility_hint(s, power)
    return FleetSchedule.empty(s, sol.status, message)


# ---------------------------------------------------------------------------
# Schedule export

def schedule_csv_text(s: Scenario, fs: FleetSchedule) -> str:
    """Schedule as CSV: vehicle,step,e_sch,e_dch,e_fch,soe,c_deg."""
    buf = io.StringIO()
    buf.write("vehicle,step,e_sch_kwh,e_dch_kwh,e_fch_kwh,soe_kwh,c_deg_eur\n")
    for v_idx, v in enumerate(s.vehicles):
        for t in range(s.horizon.step_count):
            buf.write(
                f"{v.id},{t},{fs.e_sch[v_idx, t]:.6f},{fs.e_dch[v_idx, t]:.6f},"
                f"{fs.e_fch[v_idx, t]:.6f},{fs.soe[v_idx, t]:.6f},{fs.c_deg[v_idx, t]:.6f}\n"
            )
    return buf.getvalue()


def breakdown_dict(s: Scenario, fs: FleetSchedule) -> dict:
    """Cost breakdown as a JSON-ready dict, including the assumption header."""
    from .analysis import ASSUMPTIONS  # late import; analysis depends on this module

    return {
        "assumptions": list(ASSUMPTIONS),
        "status": fs.status,
        "message": fs.message,
        "total_cost_eur": fs.total_cost_eur,
        "charged_kwh": fs.charged_kwh,
        "discharged_kwh": fs.discharged_kwh,
        "per_vehicle": [
            {
                "vehicle": c.vehicle,
                "energy_eur": c.energy_eur,
                "grid_fee_eur": c.grid_fee_eur,
                "cp_fee_eur": c.cp_fee_eur,
                "degradation_eur": c.degradation_eur,
                "v2g_revenue_eur": c.v2g_revenue_eur,
                "total_eur": c.total_eur,
            }
            for c in fs.per_vehicle
        ],
        "warnings": list(fs.warnings),
    }
