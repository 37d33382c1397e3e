"""Config-driven command line front end.

Commands: spectrum, bounds, sweep, oracle, check.  Each run is described by
a single JSON document so results are reproducible artifacts; the only flags
are --config, --out, --h, and --quiet.  Complex numbers are encoded as
[re, im] pairs throughout.

Exit codes: 0 success, 1 configuration error, 2 integration failures,
3 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import oracle as oracle_mod
from . import spectrum as spectrum_mod
from . import symmetry as symmetry_mod
from .potentials import PeriodicPotential, detect_symmetries
from .svgplot import render_spectrum_svg
from .transfer import IntegratorConfig, batch_monodromy, integrate_monodromy


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    trace_tol: float = 1e-6
    newton_tol: float = 1e-10
    richardson_tol: float = 1e-9
    symmetry_tol: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    potential: PeriodicPotential
    h_list: list[float]
    window: tuple[float, float, float, float]
    grid: tuple[int, int]
    delta: float
    tolerances: Tolerances
    integrator: IntegratorConfig
    outputs: dict[str, bool]
    out_dir: Path


def _complex(v, where: str) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ConfigError(f"{where}: complex values are [re, im] pairs, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def _parse_potential(spec) -> PeriodicPotential:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("potential: expected an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "constant":
        return PeriodicPotential.constant(_complex(spec["p"], "potential.p"),
                                          _complex(spec["q"], "potential.q"))
    if kind == "fourier":
        def modes(entries, where):
            return [(int(k), _complex(c, where)) for k, c in entries]
        return PeriodicPotential.fourier(modes(spec["p"], "potential.p"),
                                         modes(spec["q"], "potential.q"))
    if kind == "grid":
        return PeriodicPotential.from_samples(
            [_complex(v, "potential.p") for v in spec["p"]],
            [_complex(v, "potential.q") for v in spec["q"]])
    raise ConfigError(f"potential.kind: unknown kind {kind!r}")


def load_config(path: Path, h_override: float | None = None,
                out_override: str | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if raw.get("schema") != 1:
        raise ConfigError("config must declare 'schema': 1")
    try:
        pot = _parse_potential(raw["potential"])
        h_list = [float(h) for h in raw["h_list"]]
        window = tuple(float(v) for v in raw["window"])
        grid = tuple(int(v) for v in raw["grid"])
        delta = float(raw.get("delta", 0.3))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if h_override is not None:
        h_list = [float(h_override)]
    if not h_list or any(h <= 0 for h in h_list):
        raise ConfigError("h_list must be nonempty and strictly positive")
    if len(window) != 4:
        raise ConfigError("window must be [re_min, re_max, im_min, im_max]")
    if len(grid) != 2 or grid[0] < 8 or grid[1] < 8:
        raise ConfigError("grid must be [nx, ny] with both at least 8")
    if delta <= 0:
        raise ConfigError("delta must be positive")
    tol_raw = raw.get("tolerances", {})
    tols = Tolerances(
        trace_tol=float(tol_raw.get("trace_tol", 1e-6)),
        newton_tol=float(tol_raw.get("newton_tol", 1e-10)),
        richardson_tol=float(tol_raw.get("richardson_tol", 1e-9)),
        symmetry_tol=float(tol_raw.get("symmetry_tol", 1e-10)),
    )
    integ_raw = raw.get("integrator", {})
    try:
        integ = IntegratorConfig(
            samples_per_wavelength=float(integ_raw.get("samples_per_wavelength", 24.0)),
            min_steps=int(integ_raw.get("min_steps", 64)),
            max_steps=int(integ_raw.get("max_steps", 2 ** 22)),
            richardson_tol=float(integ_raw.get("richardson_tol", tols.richardson_tol)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid integrator config: {exc}") from exc
    out_raw = raw.get("outputs", {})
    outputs = {"csv": bool(out_raw.get("csv", True)),
               "json": bool(out_raw.get("json", True)),
               "svg": bool(out_raw.get("svg", False))}
    out_dir = Path(out_override if out_override is not None
                   else raw.get("out_dir", "out"))
    return RunConfig(potential=pot, h_list=h_list, window=window, grid=grid,
                     delta=delta, tolerances=tols, integrator=integ,
                     outputs=outputs, out_dir=out_dir)


def _fmt_h(h: float) -> str:
    return f"{h:g}"


def _write_rows(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _spectrum_csv_rows(arcs: spectrum_mod.SpectrumArcs):
    for arc_id, arc in enumerate(arcs.arcs):
        for vertex_id, (z, dre) in enumerate(arc):
            yield (arcs.h, arc_id, vertex_id, float(z.real), float(z.imag), dre)
    base = len(arcs.arcs)
    for k, ((a, b), (da, db)) in enumerate(zip(arcs.axis_bands,
                                               arcs.axis_band_deltas)):
        yield (arcs.h, base + k, 0, float(a), 0.0, float(da))
        yield (arcs.h, base + k, 1, float(b), 0.0, float(db))


def _trace_for(cfg: RunConfig, h: float):
    nx, ny = cfg.grid
    field = spectrum_mod.discriminant_field(cfg.potential, h, cfg.window,
                                            nx, ny, cfg.integrator)
    if field.failures:
        raise RuntimeError(f"{len(field.failures)} grid points failed to integrate "
                           f"at h={h} (first at index {field.failures[0]})")
    arcs = spectrum_mod.trace_spectrum(field, cfg.tolerances.trace_tol)
    return field, arcs


def _branch_markers(pot: PeriodicPotential):
    if pot.kind != "constant":
        return []
    w = np.sqrt(complex(pot.p0 * pot.q0))
    return [complex(w), complex(-w)] if w != 0 else []


def _svg_for(cfg: RunConfig, h: float, field, arcs) -> str:
    norms = cfg.potential.sup_norms()
    flags = detect_symmetries(cfg.potential, norms, cfg.tolerances.symmetry_tol)
    params = bounds_mod.enclosure_params(norms, flags, h)
    return render_spectrum_svg(
        cfg.window,
        boundaries=bounds_mod.enclosure_boundary(params, cfg.window),
        contours=spectrum_mod.im_zero_contours(field),
        arcs=[[z for z, _ in arc] for arc in arcs.arcs],
        axis_bands=arcs.axis_bands,
        markers=_branch_markers(cfg.potential),
    )


def cmd_spectrum(cfg: RunConfig, quiet: bool) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"schema": 1, "command": "spectrum", "runs": {}}
    for h in cfg.h_list:
        field, arcs = _trace_for(cfg, h)
        tag = _fmt_h(h)
        if cfg.outputs["csv"]:
            _write_rows(cfg.out_dir / f"spectrum_h{tag}.csv",
                        ["h", "arc_id", "vertex_id", "re_z", "im_z", "re_delta"],
                        _spectrum_csv_rows(arcs))
        if cfg.outputs["svg"]:
            (cfg.out_dir / f"spectrum_h{tag}.svg").write_text(
                _svg_for(cfg, h, field, arcs))
        summary["runs"][tag] = {
            "n_arcs": len(arcs.arcs),
            "n_vertices": int(arcs.arc_vertices().size),
            "axis_bands": [[a, b] for a, b in arcs.axis_bands],
            "refine_failures": arcs.refine_failures,
            "field_failures": len(field.failures),
        }
        if not quiet:
            print(f"h={tag}: {len(arcs.arcs)} arcs, "
                  f"{len(arcs.axis_bands)} axis bands")
    if cfg.outputs["json"]:
        (cfg.out_dir / "report.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_bounds(cfg: RunConfig, quiet: bool) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    norms = cfg.potential.sup_norms()
    flags = detect_symmetries(cfg.potential, norms, cfg.tolerances.symmetry_tol)
    report: dict = {"schema": 1, "command": "bounds",
                    "flags": {"is_real": flags.is_real, "is_even": flags.is_even,
                              "is_odd": flags.is_odd, "pq_real": flags.pq_real},
                    "runs": {}}
    for h in cfg.h_list:
        _, arcs = _trace_for(cfg, h)
        params = bounds_mod.enclosure_params(norms, flags, h)
        conf = bounds_mod.certify(arcs, params, cfg.delta)
        report["runs"][_fmt_h(h)] = {
            "strip_height": params.strip_height,
            "hyperbola_bound": params.hyperbola_bound,
            "hyperbola_bound_sharp": params.hyperbola_bound_sharp,
            "confinement_rate": params.confinement_rate,
            "confinement": conf.to_dict(),
        }
        if not quiet:
            print(f"h={_fmt_h(h)}: strip_ok={conf.strip_ok} "
                  f"hyperbola_ok={conf.hyperbola_ok} "
                  f"max_cross_distance={conf.max_cross_distance:.6g}")
    (cfg.out_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_sweep(cfg: RunConfig, quiet: bool) -> int:
    if len(cfg.h_list) < 3:
        raise ConfigError("sweep needs at least 3 h values")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    norms = cfg.potential.sup_norms()
    flags = detect_symmetries(cfg.potential, norms, cfg.tolerances.symmetry_tol)
    rows = []
    for h in cfg.h_list:
        _, arcs = _trace_for(cfg, h)
        params = bounds_mod.enclosure_params(norms, flags, h)
        conf = bounds_mod.certify(arcs, params, cfg.delta)
        sharp = params.hyperbola_bound_sharp
        rows.append((h, conf.max_cross_distance, params.strip_height,
                     params.hyperbola_bound,
                     sharp if sharp is not None else float("nan"),
                     conf.h0_for_delta,
                     int(h < conf.h0_for_delta),
                     int(conf.max_cross_distance <= cfg.delta)))
        if not quiet:
            print(f"h={_fmt_h(h)}: max_cross_distance={conf.max_cross_distance:.6g}")
    _write_rows(cfg.out_dir / "sweep.csv",
                ["h", "max_cross_distance", "strip_height", "hyperbola_bound",
                 "hyperbola_bound_sharp", "h0", "h_below_h0", "within_delta"],
                rows)
    return 0


def cmd_oracle(cfg: RunConfig, quiet: bool) -> int:
    if cfg.potential.kind != "constant":
        raise ConfigError("oracle tables exist only for constant potentials")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    re_min, re_max, im_min, im_max = cfg.window
    nx, ny = cfg.grid
    res = np.linspace(re_min, re_max, nx)
    ims = np.linspace(im_min, im_max, ny)
    Z = (res[:, None] + 1j * ims[None, :]).ravel()
    for h in cfg.h_list:
        model = oracle_mod.from_potential(cfg.potential, h)
        delta = oracle_mod.discriminant(model, Z)
        member = oracle_mod.spectrum_membership(model, Z, cfg.tolerances.trace_tol)
        rows = ((float(z.real), float(z.imag), float(d.real), float(d.imag),
                 int(m)) for z, d, m in zip(Z, delta, member))
        _write_rows(cfg.out_dir / f"oracle_h{_fmt_h(h)}.csv",
                    ["re_z", "im_z", "re_delta", "im_delta", "member"], rows)
        if not quiet:
            print(f"h={_fmt_h(h)}: oracle table with {Z.size} points")
    return 0


def _run_invariant_suite(cfg: RunConfig):
    """Desk-scale end-to-end invariant checks; yields (name, ok, detail)."""
    integ = cfg.integrator

    worst = 0.0
    for p0, q0 in [(1, 16j), (1 + 1j, 1 - 1j), (-1 - 1j, 1 - 1j), (0, 0)]:
        pot = PeriodicPotential.constant(p0, q0)
        for h in (1.0, 0.5):
            model = oracle_mod.ConstantModel(complex(p0), complex(q0), h)
            zs = (np.linspace(-5, 5, 5)[:, None]
                  + 1j * np.linspace(-4, 4, 5)[None, :]).ravel()
            M, _, _, status = batch_monodromy(pot, zs, h, integ)
            for z, Mi, st in zip(zs, M, status):
                Mo = oracle_mod.monodromy(model, complex(z))
                err = (np.linalg.norm(Mi - Mo)
                       / max(1.0, np.linalg.norm(Mo)))
                worst = max(worst, err if st == 0 else np.inf)
    yield "oracle equivalence (rel err <= 1e-8)", worst <= 1e-8, f"{worst:.3e}"

    rng = np.random.RandomState(12345)
    worst_det = worst_rec = worst_tr = 0.0
    for _ in range(8):
        pot = PeriodicPotential.fourier(
            {k: (rng.randn() + 1j * rng.randn()) * 0.4 for k in (-1, 0, 1)},
            {k: (rng.randn() + 1j * rng.randn()) * 0.4 for k in (-1, 0, 1)})
        zs = rng.randn(8) * 1.5 + 1j * rng.randn(8) * 0.5
        h = float(rng.uniform(0.5, 1.5))
        for z in zs:
            res = integrate_monodromy(pot, complex(z), h, integ)
            r1, r2 = res.multipliers
            worst_det = max(worst_det, res.det_defect)
            worst_rec = max(worst_rec, abs(r1 * r2 - 1.0))
            worst_tr = max(worst_tr, abs(r1 + r2 - 2 * res.delta))
    yield "det(M) = 1 (defect <= 1e-10)", worst_det <= 1e-10, f"{worst_det:.3e}"
    yield "multiplier product = 1 (<= 1e-10)", worst_rec <= 1e-10, f"{worst_rec:.3e}"
    yield "multiplier sum = 2 delta (<= 1e-10)", worst_tr <= 1e-10, f"{worst_tr:.3e}"

    from .transfer import _propagate
    pot = PeriodicPotential.fourier({1: 0.5, -1: 0.5}, {1: 0.5, -1: 0.5})
    z, h = 1.3 + 0.4j, 0.35
    ref = _propagate(pot, [z], h, 1 << 14)[0]
    ns = np.array([64, 128, 256, 512, 1024])
    errs = [np.linalg.norm(_propagate(pot, [z], h, int(n))[0] - ref) for n in ns]
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    yield "integrator order >= 3.5", order >= 3.5, f"{order:.2f}"

    cos_pot = pot
    sin_pot = PeriodicPotential.fourier({1: -0.5j, -1: 0.5j}, {1: -0.5j, -1: 0.5j})
    zs = (np.linspace(-1.5, 1.5, 4)[:, None]
          + 1j * np.linspace(-0.8, 0.8, 3)[None, :]).ravel()
    worst_sym = 0.0
    for test_pot in (cos_pot, sin_pot, PeriodicPotential.constant(0, 0)):
        norms = test_pot.sup_norms()
        flags = detect_symmetries(test_pot, norms, cfg.tolerances.symmetry_tol)
        for res in symmetry_mod.check_monodromy_symmetry(test_pot, flags, 1.0,
                                                         zs, integ):
            worst_sym = max(worst_sym, res.max_defect)
    yield "monodromy symmetries (<= 1e-8)", worst_sym <= 1e-8, f"{worst_sym:.3e}"

    foc = PeriodicPotential.constant(-1 - 1j, 1 - 1j)
    worst_id = 0.0
    for z in (0.7j, 0.3j, 2.5 + 0j):
        chk = spectrum_mod.verify_imag_identity(foc, 1.0, complex(z), integ)
        worst_id = max(worst_id, chk.max_rel_err)
    yield "Im z eigenfunction identity (<= 1e-6)", worst_id <= 1e-6, f"{worst_id:.3e}"


def cmd_check(cfg: RunConfig, quiet: bool) -> int:
    failures = 0
    for name, ok, detail in _run_invariant_suite(cfg):
        if not ok:
            failures += 1
        if not quiet or not ok:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if failures:
        print(f"{failures} invariant check(s) failed", file=sys.stderr)
        return 3
    if not quiet:
        print("all invariant checks passed")
    return 0


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="floqspec",
        description="Trace and certify spectra of one-periodic Dirac-type operators.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--h", type=float, default=None,
                        help="override h_list with a single value")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(Path(args.config), h_override=args.h,
                          out_override=args.out)
        return _COMMANDS[args.command](cfg, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
