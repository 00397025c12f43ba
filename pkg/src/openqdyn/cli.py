"""Batch command-line front end.

Verbs: evolve, derive, check, steady, spectrum, nonmarkov.  Every command
reads a flat sectioned config file (``[section]`` headers and ``key = value``
lines, ``#`` comments) with matrices in CSV sidecar files, and writes
deterministic CSV/tables: identical config, identical bytes.

Matrix CSV format (row-major, "re,im" cells): each matrix row becomes one CSV
row holding 2N numbers, alternating real and imaginary parts.  Map-family
("process matrix") CSV: one row per sample, the time followed by the
row-major re/im pairs of the N^2 x N^2 superoperator.

All floating-point output uses 12 significant digits in scientific notation.

Exit codes: 0 success / all checks passed, 1 verification failure, 2 config
error, 3 numerical error.  The environment variable OQS_NUM_THREADS caps the
linear-algebra thread pool (applied before the numerics load).
"""
import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS")


def _apply_thread_cap():
    cap = os.environ.get("OQS_NUM_THREADS")
    if cap:
        for var in _THREAD_VARS:
            os.environ.setdefault(var, cap)


def fmt(x):
    """12 significant digits, scientific notation, '.' decimal separator."""
    x = float(x)
    if x == 0.0:
        x = 0.0          # normalize -0.0
    return f"{x:.11e}"


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def parse_config(path):
    """Parse the sectioned key=value format into {section: {key: value}}.

    Raises ConfigError with file/line/key diagnostics.
    """
    from .errors import ConfigError

    sections = {}
    current = None
    try:
        lines = open(path, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = value
    return sections


def _get(cfg, section, key, default=None, cast=str, required=False):
    from .errors import ConfigError

    sec = cfg.get(section, {})
    if key not in sec:
        if required:
            raise ConfigError(f"missing required key {key!r} in [{section}]")
        return default
    try:
        return cast(sec[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key {key!r} in [{section}]: {exc}")


def _floats(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def read_matrix_csv(path):
    """Read a complex matrix from the row-major re,im CSV format."""
    import numpy as np

    from .errors import ConfigError

    rows = []
    try:
        content = open(path, "r", encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path}: {exc}")
    for lineno, raw in enumerate(content, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        vals = [float(tok) for tok in line.split(",") if tok.strip()]
        if len(vals) % 2 != 0:
            raise ConfigError(f"{path}:{lineno}: odd number of entries (need re,im pairs)")
        rows.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigError(f"{path}: matrix is not square")
    return np.array(rows, dtype=complex)


def write_matrix_csv(path, M):
    import numpy as np

    M = np.asarray(M, dtype=complex)
    lines = []
    for row in M:
        cells = []
        for z in row:
            cells.append(fmt(z.real))
            cells.append(fmt(z.imag))
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_map_family_csv(path):
    """Map-family CSV: one row per sample, t then row-major re/im superop."""
    import numpy as np

    from .errors import ConfigError

    family = []
    for lineno, raw in enumerate(open(path, "r", encoding="utf-8"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        vals = [float(tok) for tok in line.split(",") if tok.strip()]
        t, rest = vals[0], vals[1:]
        if len(rest) % 2 != 0:
            raise ConfigError(f"{path}:{lineno}: odd entry count")
        side = int(round((len(rest) // 2) ** 0.5))
        if 2 * side * side != len(rest):
            raise ConfigError(f"{path}:{lineno}: row does not hold a square matrix")
        flat = [complex(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]
        family.append((t, np.array(flat, dtype=complex).reshape(side, side)))
    if len(family) < 2:
        raise ConfigError(f"{path}: family needs at least two samples")
    return family


def write_map_family_csv(path, family):
    rows = []
    for t, E in family:
        cells = [fmt(t)]
        for z in E.reshape(-1):
            cells.append(fmt(z.real))
            cells.append(fmt(z.imag))
        rows.append(",".join(cells))
    _atomic_write(path, "\n".join(rows) + "\n")


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# model construction from config
# ---------------------------------------------------------------------------

def build_bath(cfg):
    from .errors import ConfigError
    from .weakcoupling import BathModel

    kind = _get(cfg, "bath", "type", default="ohmic").lower()
    if "temperature" in cfg.get("bath", {}):
        T = _get(cfg, "bath", "temperature", cast=float)
    else:
        T = _get(cfg, "bath", "T", default=0.0, cast=float)
    if kind == "ohmic":
        return BathModel.ohmic(
            coupling=_get(cfg, "bath", "alpha", default=0.1, cast=float),
            omega_c=_get(cfg, "bath", "omega_c", default=3.0, cast=float),
            temperature=T,
            s=_get(cfg, "bath", "s", default=1.0, cast=float),
            omega_max=_get(cfg, "bath", "omega_max", default=None,
                           cast=lambda v: float(v)),
        )
    if kind == "flat":
        return BathModel.flat(
            j0=_get(cfg, "bath", "alpha", default=0.1, cast=float),
            omega_max=_get(cfg, "bath", "omega_max", required=True, cast=float),
            temperature=T,
        )
    if kind == "table":
        import numpy as np

        path = _get(cfg, "bath", "j_file", required=True)
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except Exception as exc:
            raise ConfigError(f"cannot read tabulated density {path}: {exc}")
        return BathModel.tabulated(
            data[:, 0], data[:, 1], temperature=T,
            omega_max=_get(cfg, "bath", "omega_max", default=None,
                           cast=lambda v: float(v)))
    raise ConfigError(f"unknown bath type {kind!r}")


def build_system(cfg):
    from .errors import ConfigError
    from .weakcoupling import SystemModel, damped_oscillator, damped_qubit, pure_dephasing

    preset = _get(cfg, "model", "preset", default="damped_qubit").lower()
    omega0 = _get(cfg, "model", "omega0", default=1.0, cast=float)
    if preset == "damped_qubit":
        return damped_qubit(omega0)
    if preset == "damped_oscillator":
        return damped_oscillator(
            n_levels=_get(cfg, "model", "n_levels", default=10, cast=int),
            omega0=omega0)
    if preset == "pure_dephasing":
        return pure_dephasing(omega0)
    if preset == "custom":
        H = read_matrix_csv(_get(cfg, "model", "h_file", required=True))
        files = _get(cfg, "model", "coupling_files", required=True)
        couplings = [read_matrix_csv(p.strip()) for p in files.split(",") if p.strip()]
        pattern = _get(cfg, "model", "coupling_pattern", default="single").lower()
        return SystemModel(H=H, couplings=couplings, coupling_pattern=pattern)
    raise ConfigError(f"unknown model preset {preset!r}")


def build_observables(cfg, system):
    import numpy as np

    from .errors import ConfigError
    from .operators import number, sigma_x, sigma_y, sigma_z

    names = _get(cfg, "observables", "names", default="sigma_z" if system.dim == 2
                 else "number")
    obs = []
    table = {"sigma_x": sigma_x, "sigma_y": sigma_y, "sigma_z": sigma_z}
    for name in (tok.strip() for tok in names.split(",")):
        if not name:
            continue
        if name in table:
            if system.dim != 2:
                raise ConfigError(f"observable {name} needs a two-level system")
            obs.append((name, table[name]))
        elif name == "number":
            obs.append((name, number(system.dim)))
        elif name == "energy":
            obs.append((name, system.H))
        elif name.startswith("population_"):
            k = int(name.split("_", 1)[1])
            P = np.zeros((system.dim, system.dim), dtype=complex)
            P[k, k] = 1.0
            obs.append((name, P))
        elif name.startswith("file:"):
            obs.append((name, read_matrix_csv(name[5:])))
        else:
            raise ConfigError(f"unknown observable {name!r}")
    return obs


def build_initial_state(cfg, system, bath):
    import numpy as np

    from .errors import ConfigError
    from .weakcoupling import thermal_state

    kind = _get(cfg, "initial", "state", default="excited").lower()
    eps, V = np.linalg.eigh(system.H)
    if kind == "excited":
        v = V[:, -1]
        return np.outer(v, v.conj())
    if kind == "ground":
        v = V[:, 0]
        return np.outer(v, v.conj())
    if kind == "maximally_mixed":
        return np.eye(system.dim, dtype=complex) / system.dim
    if kind == "thermal":
        return thermal_state(system.H, bath.temperature)
    if kind == "file":
        from .liouville import assert_density_matrix

        rho = read_matrix_csv(_get(cfg, "initial", "rho_file", required=True))
        return assert_density_matrix(rho, tol_psd=1e-8)
    raise ConfigError(f"unknown initial state {kind!r}")


def build_output_times(cfg):
    explicit = _get(cfg, "solver", "output_times")
    if explicit is not None:
        times = _floats(explicit)
        if not times or times[0] < 0 or any(
                t2 <= t1 for t1, t2 in zip(times, times[1:])):
            from .errors import ConfigError

            raise ConfigError("output_times must be nonnegative and strictly ascending")
        return times
    import numpy as np

    t_final = _get(cfg, "solver", "t_final", default=10.0, cast=float)
    steps = _get(cfg, "solver", "steps", default=50, cast=int)
    return list(np.linspace(0.0, t_final, steps + 1))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_evolve(cfg, out_path, seed, tol, scheme_override=None, with_diagnostics=False):
    import numpy as np

    from .errors import ConfigError
    from .liouville import apply_superop, expm
    from .nonmarkov import (MemoryKernel, coarse_grain_evolve, memory_kernel_evolve,
                            post_markovian_evolve, tcl2_evolve)
    from .weakcoupling import davies_generator

    system = build_system(cfg)
    bath = build_bath(cfg)
    alpha = _get(cfg, "model", "coupling_strength", default=1.0, cast=float)
    scheme = (scheme_override or _get(cfg, "solver", "scheme", default="markov")).lower()
    times = build_output_times(cfg)
    rho0 = build_initial_state(cfg, system, bath)
    observables = build_observables(cfg, system)

    diag_cols, diag_rows = [], None
    if scheme == "markov":
        gen = davies_generator(system, bath, alpha=alpha)
        L = gen.superoperator()
        states = [rho0 if t == 0 else apply_superop(expm(t * L), rho0) for t in times]
    elif scheme in ("memory_kernel", "post_markovian"):
        gen = davies_generator(system, bath, alpha=alpha)
        kernel = MemoryKernel(g=_get(cfg, "solver", "kernel_g", default=10.0, cast=float))
        evolve = memory_kernel_evolve if scheme == "memory_kernel" else post_markovian_evolve
        grid = times if times[0] == 0.0 else [0.0] + times
        traj = evolve(gen.superoperator(), kernel, rho0, grid)
        lookup = dict(zip(grid, traj.states))
        states = [lookup[t] for t in times]
        if with_diagnostics:
            diag_cols = ["trace_error", "min_eigenvalue"]
            diag_rows = [[traj.max_trace_error, traj.min_eigenvalue] for _ in times]
    elif scheme == "tcl2":
        substeps = _get(cfg, "solver", "substeps", default=8, cast=int)
        grid = times if times[0] == 0.0 else [0.0] + times
        traj = tcl2_evolve(system, bath, rho0, grid, alpha=alpha, substeps=substeps)
        lookup = dict(zip(grid, traj.states))
        states = [lookup[t] for t in times]
        if with_diagnostics:
            diag_cols = ["min_choi_eigenvalue"]
            wit = dict(zip(grid, traj.min_choi_eigenvalues))
            diag_rows = [[wit[t]] for t in times]
    elif scheme == "coarse_grain":
        grid = times if times[0] == 0.0 else [0.0] + times
        traj = coarse_grain_evolve(system, bath, alpha, rho0, grid)
        lookup = dict(zip(grid, traj.states))
        states = [lookup[t] for t in times]
    else:
        raise ConfigError(f"unknown solver scheme {scheme!r}")

    header = ["t"] + [name for name, _ in observables] + diag_cols
    lines = [",".join(header)]
    for i, (t, rho) in enumerate(zip(times, states)):
        row = [fmt(t)]
        for _, O in observables:
            row.append(fmt(np.trace(O @ rho).real))
        if diag_rows is not None:
            row.extend(fmt(v) for v in diag_rows[i])
        lines.append(",".join(row))
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return 0


def cmd_derive(cfg, out_path, seed, tol):
    import numpy as np

    from .weakcoupling import davies_generator, kms_check, stationarity_check

    system = build_system(cfg)
    bath = build_bath(cfg)
    alpha = _get(cfg, "model", "coupling_strength", default=1.0, cast=float)
    gen = davies_generator(system, bath, alpha=alpha)
    lines = ["# weak-coupling generator report"]
    lines.append("bohr_frequencies," + ",".join(fmt(w) for w in sorted(gen.per_frequency)))
    for w in sorted(gen.per_frequency):
        block = gen.per_frequency[w]
        lines.append(f"block,omega={fmt(w)},couplings="
                     + ";".join(str(k) for k in block.coupling_indices))
        for label, M in (("gamma", block.gamma), ("shift", block.shift)):
            for i, row in enumerate(np.atleast_2d(M)):
                cells = []
                for z in row:
                    cells.append(fmt(np.real(z)))
                    cells.append(fmt(np.imag(z)))
                lines.append(f"{label},{i}," + ",".join(cells))
    lines.append("lamb_shift_matrix")
    for row in gen.lamb_shift:
        cells = []
        for z in row:
            cells.append(fmt(z.real))
            cells.append(fmt(z.imag))
        lines.append(",".join(cells))
    lines.append("canonical_jumps")
    for k, (g, V) in enumerate(gen.base.jumps):
        lines.append(f"jump,{k},rate," + fmt(g))
        for row in V:
            cells = []
            for z in row:
                cells.append(fmt(z.real))
                cells.append(fmt(z.imag))
            lines.append("jump," + str(k) + "," + ",".join(cells))
    kms = kms_check(gen, tol=tol if tol else 1e-8)
    lines.append("kms_max_relative_violation," + fmt(kms.max_relative_violation))
    lines.append("kms_vacuum_flags," + ",".join(
        f"{c.omega:.6g}:{int(c.vacuum)}" for c in kms.checks))
    lines.append("stationarity_residual," + fmt(stationarity_check(gen)))
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return 0


def cmd_check(cfg, out_path, seed, tol):
    import numpy as np

    from .gksl import check_kossakowski_conditions, random_partitions
    from .liouville import expm
    from .maps import divisibility_witness, is_cp, is_trace_preserving
    from .spectra import is_relaxing, spohn_check
    from .weakcoupling import davies_generator

    system = build_system(cfg)
    bath = build_bath(cfg)
    alpha = _get(cfg, "model", "coupling_strength", default=1.0, cast=float)
    requested = [tok.strip() for tok in
                 _get(cfg, "checks", "requested", default="cp").split(",") if tok.strip()]
    tol = tol if tol else 1e-10
    rng = np.random.default_rng(seed)
    gen = davies_generator(system, bath, alpha=alpha)
    L = gen.superoperator()

    lines = ["check,verdict,witness"]
    all_pass = True
    for name in requested:
        if name == "cp":
            worst = np.inf
            ok = True
            for tau in (0.01, 0.1, 1.0, 10.0):
                E = expm(tau * L)
                rep = is_cp(E, tol)
                worst = min(worst, rep.min_choi_eigenvalue)
                ok = ok and rep.verdict and is_trace_preserving(E)
            lines.append(f"cp,{'pass' if ok else 'fail'},{fmt(worst)}")
            all_pass &= ok
        elif name == "markov":
            family_file = _get(cfg, "checks", "family_file")
            if family_file:
                family = read_map_family_csv(family_file)
            else:
                times = [t for t in build_output_times(cfg) if t > 0]
                family = [(0.0, np.eye(system.dim**2, dtype=complex))]
                family += [(t, expm(t * L)) for t in times]
            report = divisibility_witness(family, tol=tol)
            worst = min((iv.min_choi_eigenvalue for iv in report.intervals
                         if iv.cp is not None), default=float("nan"))
            verdict = report.markovian
            label = "pass" if verdict else ("inconclusive" if verdict is None else "fail")
            lines.append(f"markov,{label},{fmt(worst)}")
            all_pass &= bool(verdict)
            report_file = _get(cfg, "checks", "report_file")
            if report_file:
                rows = ["t_start,t_end,min_choi_eigenvalue,cp,singular"]
                for iv in report.intervals:
                    rows.append(",".join([fmt(iv.t_start), fmt(iv.t_end),
                                          fmt(iv.min_choi_eigenvalue),
                                          str(int(bool(iv.cp))), str(int(iv.singular))]))
                _atomic_write(report_file, "\n".join(rows) + "\n")
        elif name == "kossakowski":
            parts = random_partitions(system.dim, 20, rng)
            rep = check_kossakowski_conditions(L, parts, tol=max(tol, 1e-9))
            lines.append(f"kossakowski,{'pass' if rep.passed else 'fail'},"
                         + (fmt(0.0) if rep.passed else fmt(rep.first_violation.value)))
            all_pass &= rep.passed
        elif name == "spohn":
            jumps = [V for _, V in gen.base.jumps]
            rep = spohn_check(jumps)
            lines.append(f"spohn,{'pass' if rep.relaxing_guaranteed else 'fail'},"
                         + fmt(rep.commutant_dim))
            all_pass &= rep.relaxing_guaranteed
        elif name == "relaxing":
            rep = is_relaxing(L)
            lines.append(f"relaxing,{'pass' if rep.verdict else 'fail'},"
                         + fmt(rep.report.spectral_gap))
            all_pass &= rep.verdict
        else:
            from .errors import ConfigError

            raise ConfigError(f"unknown check {name!r}")
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return 0 if all_pass else 1


def cmd_steady(cfg, out_path, seed, tol):
    from .spectra import steady_states
    from .weakcoupling import davies_generator

    system = build_system(cfg)
    bath = build_bath(cfg)
    alpha = _get(cfg, "model", "coupling_strength", default=1.0, cast=float)
    gen = davies_generator(system, bath, alpha=alpha)
    result = steady_states(gen.superoperator(), tol=tol if tol else 1e-9)
    lines = [f"# kernel_dimension,{result.kernel_dimension}",
             f"# n_states,{len(result.states)}"]
    for idx, rho in enumerate(result.states):
        lines.append(f"# state,{idx}")
        for row in rho:
            cells = []
            for z in row:
                cells.append(fmt(z.real))
                cells.append(fmt(z.imag))
            lines.append(",".join(cells))
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return 0


def cmd_spectrum(cfg, out_path, seed, tol):
    from .spectra import liouvillian_spectrum
    from .weakcoupling import davies_generator

    system = build_system(cfg)
    bath = build_bath(cfg)
    alpha = _get(cfg, "model", "coupling_strength", default=1.0, cast=float)
    gen = davies_generator(system, bath, alpha=alpha)
    rep = liouvillian_spectrum(gen.superoperator(), tol=tol if tol else 1e-9)
    lines = [f"# zero_multiplicity,{rep.zero_multiplicity}",
             f"# spectral_gap,{fmt(rep.spectral_gap)}",
             f"# diagonalizable,{int(rep.diagonalizable)}",
             "re,im"]
    for lam in rep.eigenvalues:
        lines.append(f"{fmt(lam.real)},{fmt(lam.imag)}")
    _atomic_write(out_path, "\n".join(lines) + "\n")
    return 0


def main(argv=None):
    _apply_thread_cap()
    parser = argparse.ArgumentParser(
        prog="openqdyn",
        description="Batch analysis of open-quantum-system dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (("evolve", "propagate and tabulate observables"),
                      ("derive", "weak-coupling generator report"),
                      ("check", "verification report (cp|markov|kossakowski|spohn|relaxing)"),
                      ("steady", "steady states of the derived generator"),
                      ("spectrum", "Liouvillian spectrum table"),
                      ("nonmarkov", "non-Markovian trajectory with diagnostics")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", default=None, help="output path (default from config)")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
    args = parser.parse_args(argv)

    from .errors import ConfigError, OpenQDynError

    try:
        cfg = parse_config(args.config)
        out_path = args.out or _get(cfg, "output", "path", default=None)
        if out_path is None:
            raise ConfigError("no output path: set [output] path or pass --out")
        if args.command == "evolve":
            code = cmd_evolve(cfg, out_path, args.seed, args.tol)
        elif args.command == "derive":
            code = cmd_derive(cfg, out_path, args.seed, args.tol)
        elif args.command == "check":
            code = cmd_check(cfg, out_path, args.seed, args.tol)
        elif args.command == "steady":
            code = cmd_steady(cfg, out_path, args.seed, args.tol)
        elif args.command == "spectrum":
            code = cmd_spectrum(cfg, out_path, args.seed, args.tol)
        else:
            code = cmd_evolve(cfg, out_path, args.seed, args.tol,
                              scheme_override=_get(cfg, "solver", "scheme",
                                                   default="memory_kernel"),
                              with_diagnostics=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OpenQDynError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return code


if __name__ == "__main__":
    sys.exit(main())
