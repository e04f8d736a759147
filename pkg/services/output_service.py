import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List

import numpy as np
from jinja2 import Template

from app.config import FLUX_CONVENTION, LN_CALIBRATION_SCALE, SLOW_FRONT_TAGS, TAG_ORDER
from app.models import POSITIVE_NORM_TAGS, ModeTag, all_labels
from app.schemas import SweepArtifacts

logger = logging.getLogger(__name__)

SPECTRUM_LABELS = [label for label in all_labels() if label.tag != ModeTag.C]
PARTNER_LABELS = [label for label in SPECTRUM_LABELS if label.tag in POSITIVE_NORM_TAGS]
EXECUTION_KEYS = ("OUT_DIR", "JOBS")


def _fmt(value) -> str:
    """Full-precision text form used in every CSV cell"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def header_lines(artifacts: SweepArtifacts) -> List[str]:
    """Effective configuration echoed at the top of every output file"""
    lines = ["# RIF vacuum emission sweep", "# units: c=1, lengths in um, frequencies in rad per um/c"]
    # results do not depend on OUT_DIR or JOBS
    lines += [f"# {key}={value}" for key, value in artifacts.config.to_items().items()
              if key not in EXECUTION_KEYS]
    lines += [
        f"# RESONANT_FREQUENCIES_EFFECTIVE={','.join(_fmt(v) for v in artifacts.resonant_frequencies)}",
        f"# RIGHT_ELASTIC_CONSTANTS={','.join(_fmt(v) for v in artifacts.right_elastic_constants)}",
        f"# LEFT_ELASTIC_CONSTANTS={','.join(_fmt(v) for v in artifacts.left_elastic_constants)}",
        f"# KAPPA_SCALE={_fmt(artifacts.kappa_scale)}",
        f"# FLUX_CONVENTION={FLUX_CONVENTION}",
        f"# LN_CALIBRATION_SCALE={_fmt(LN_CALIBRATION_SCALE)}",
    ]
    return lines


def _write_table(path: Path, artifacts: SweepArtifacts, columns: List[str], rows: Iterable[List]) -> str:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for line in header_lines(artifacts):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])
    return str(path)


def write_spectra(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["omega", "status", "reason", "scenario", "residual", "condition_number"]
    columns += [f"phi_{label}" for label in SPECTRUM_LABELS]
    rows = []
    for record in artifacts.records:
        row = [record.omega, "ok" if record.ok else "gap", record.reason, record.scenario,
               record.residual, record.condition_number]
        row += [record.fluxes.get(str(label)) for label in SPECTRUM_LABELS]
        rows.append(row)
    return _write_table(path, artifacts, columns, rows)


def write_ln_spectra(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["omega", "status", "scenario"]
    for label in PARTNER_LABELS:
        columns += [f"ln_noL_{label}", f"J_noL_{label}"]
    rows = []
    for record in artifacts.records:
        row = [record.omega, "ok" if record.ok else "gap", record.scenario]
        for label in PARTNER_LABELS:
            log_neg, degree = record.entanglement.get(str(label), (None, None))
            row += [log_neg, degree]
        rows.append(row)
    return _write_table(path, artifacts, columns, rows)


def write_modes(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["omega", "side", "label", "re_k", "im_k", "norm_sign", "group_velocity", "nature"]
    rows = []
    for record in artifacts.records:
        for mode in record.modes:
            rows.append([
                record.omega, mode.side, mode.label.tag, mode.wavenumber.real, mode.wavenumber.imag,
                None if mode.norm_sign is None else int(mode.norm_sign), mode.group_velocity, mode.nature,
            ])
    return _write_table(path, artifacts, columns, rows)


def write_smatrix(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["omega", "out_label", "in_label", "re", "im", "eta_out", "eta_in", "residual"]
    rows = []
    for record in artifacts.records:
        s_matrix = record.smatrix
        if s_matrix is None:
            continue
        for i, out_label in enumerate(s_matrix.out_basis):
            for j, in_label in enumerate(s_matrix.in_basis):
                value = s_matrix.entries[i, j]
                rows.append([record.omega, str(out_label), str(in_label), value.real, value.imag,
                             int(s_matrix.eta_out[i]), int(s_matrix.eta_in[j]), s_matrix.residual])
    return _write_table(path, artifacts, columns, rows)


def write_criticals(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["side", "omega_min", "omega_max", "lab_min", "lab_max", "zero_dispersion"]
    rows = []
    for side, interval in artifacts.intervals.items():
        if interval is None:
            rows.append([side, None, None, None, None, None])
        else:
            rows.append([side, interval.omega_min, interval.omega_max, interval.lab_min,
                         interval.lab_max, interval.zero_dispersion])
    return _write_table(path, artifacts, columns, rows)


def write_typifying(artifacts: SweepArtifacts, path: Path) -> str:
    rows = [[scenario, omega] for scenario, omega in artifacts.typifying.items()]
    return _write_table(path, artifacts, ["scenario", "omega"], rows)


def write_matrices(artifacts: SweepArtifacts, out_dir: Path) -> Dict[str, str]:
    files = {}
    for result in artifacts.typifying_results:
        for kind, matrix in (("correlations", result.correlations), ("entanglement", result.entanglement)):
            name = f"{kind}_{result.scenario.value}"
            rows = [[label] + list(values) for label, values in zip(result.labels, matrix)]
            files[name] = _write_table(out_dir / f"{name}.csv", artifacts, ["label"] + list(result.labels), rows)
    return files


def write_jc_scatter(artifacts: SweepArtifacts, path: Path) -> str:
    rows = [[point.scenario, point.omega, "-".join(point.pair), point.correlation, point.degree_of_entanglement]
            for point in artifacts.jc_points]
    return _write_table(path, artifacts, ["scenario", "omega", "pair", "C", "J"], rows)


def write_dispersion(artifacts: SweepArtifacts, path: Path) -> str:
    columns = ["side", "branch", "lab_frequency", "wavenumber", "omega"]
    return _write_table(path, artifacts, columns, [list(row) for row in artifacts.dispersion])


def write_artifacts(artifacts: SweepArtifacts) -> SweepArtifacts:
    """Write every CSV of the artifact set; returns a copy with file paths"""
    out_dir = Path(artifacts.config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "spectra": write_spectra(artifacts, out_dir / "spectra.csv"),
        "ln_spectra": write_ln_spectra(artifacts, out_dir / "ln_spectra.csv"),
        "criticals": write_criticals(artifacts, out_dir / "criticals.csv"),
        "typifying": write_typifying(artifacts, out_dir / "typifying.csv"),
        "jc_scatter": write_jc_scatter(artifacts, out_dir / "jc_scatter.csv"),
        "dispersion": write_dispersion(artifacts, out_dir / "dispersion.csv"),
    }
    files.update(write_matrices(artifacts, out_dir))
    if artifacts.config.dump_modes:
        files["modes"] = write_modes(artifacts, out_dir / "modes.csv")
    if artifacts.config.dump_smatrix:
        files["smatrix"] = write_smatrix(artifacts, out_dir / "smatrix.csv")
    for name, path in files.items():
        logger.info(f"Wrote {name}: {path}")
    return artifacts.model_copy(update={"files": files})


class PlotScriptService:
    """Renders standalone matplotlib scripts next to the CSV artifacts"""

    def get_preamble(self) -> str:
        return '''import csv
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

HERE = Path(__file__).resolve().parent


def read_table(name):
    with open(HERE / name, newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def column(rows, key):
    return np.array([float(row[key]) if row[key] else np.nan for row in rows])
'''

    def get_spectra_template(self) -> str:
        """Log-scaled flux spectra with the horizon intervals shaded"""
        return '''{{ preamble }}
HORIZON_INTERVALS = {{ intervals }}

rows = read_table("spectra.csv")
omega = column(rows, "omega")
fig, ax = plt.subplots(figsize=(8, 5))
for key in rows[0]:
    if not key.startswith("phi_"):
        continue
    values = column(rows, key)
    if np.any(values > 0):
        ax.plot(omega, np.where(values > 0, values, np.nan), label=key[4:])
for name, (low, high) in HORIZON_INTERVALS.items():
    ax.axvspan(low, high, alpha=0.2, label=name)
ax.set_yscale("log")
ax.set_xlabel("co-moving frequency omega")
ax.set_ylabel("photon flux phi")
ax.legend(ncol=3, fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "spectra.png", dpi=200)
'''

    def get_ln_spectra_template(self) -> str:
        return '''{{ preamble }}
rows = read_table("ln_spectra.csv")
omega = column(rows, "omega")
fig, ax = plt.subplots(figsize=(8, 5))
for key in rows[0]:
    if key.startswith("ln_noL_"):
        values = column(rows, key)
        if np.any(values > 0):
            ax.plot(omega, values, label=key[7:])
ax.set_xlabel("co-moving frequency omega")
ax.set_ylabel("logarithmic negativity with noL")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "ln_spectra.png", dpi=200)
'''

    def get_matrices_template(self) -> str:
        return '''{{ preamble }}
TAG_ORDER = {{ tag_order }}
SCENARIOS = {{ scenarios }}


def ordered(labels):
    return sorted(labels, key=lambda label: (TAG_ORDER.index(label[:-1]), label[-1]))


for kind in ("correlations", "entanglement"):
    fig, axes = plt.subplots(1, max(len(SCENARIOS), 1), figsize=(4 * max(len(SCENARIOS), 1), 4))
    axes = np.atleast_1d(axes)
    for ax, scenario in zip(axes, SCENARIOS):
        rows = read_table(f"{kind}_{scenario}.csv")
        table = {row["label"]: row for row in rows}
        labels = ordered(list(table))
        grid = np.array([[float(table[a][b]) if table[a][b] else np.nan for b in labels] for a in labels])
        image = ax.imshow(grid, vmin=0.0, vmax=1.0, cmap="viridis")
        ax.set_xticks(range(len(labels)), labels, rotation=90)
        ax.set_yticks(range(len(labels)), labels)
        ax.set_title(scenario)
    fig.colorbar(image, ax=list(axes))
    fig.savefig(HERE / f"{kind}.png", dpi=200)
'''

    def get_jc_scatter_template(self) -> str:
        return '''{{ preamble }}
COLORS = {"A": "tab:blue", "B": "tab:red", "C": "tab:green", "D": "tab:orange", "E": "black"}

rows = read_table("jc_scatter.csv")
fig, ax = plt.subplots(figsize=(5, 5))
for scenario, color in COLORS.items():
    subset = [row for row in rows if row["scenario"] == scenario]
    if subset:
        ax.scatter(column(subset, "C"), column(subset, "J"), s=12, color=color, label=scenario)
ax.set_xlim(0, 1)
ax.set_ylim(0, 1)
ax.set_xlabel("correlation C")
ax.set_ylabel("degree of entanglement J")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "jc_scatter.png", dpi=200)
'''

    def get_dispersion_template(self) -> str:
        return '''{{ preamble }}
rows = read_table("dispersion.csv")
fig, ax = plt.subplots(figsize=(6, 5))
for side in ("L", "R"):
    for branch in ("positive", "negative"):
        subset = [row for row in rows if row["side"] == side and row["branch"] == branch]
        ax.plot(column(subset, "wavenumber"), column(subset, "omega"), label=f"{side} {branch}")
ax.set_ylim({{ omega_min }}, {{ omega_max }})
ax.set_xlabel("co-moving wavenumber k")
ax.set_ylabel("co-moving frequency omega")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "dispersion.png", dpi=200)
'''

    def render_all(self, artifacts: SweepArtifacts) -> Dict[str, str]:
        left, right = artifacts.intervals.get("L"), artifacts.intervals.get("R")
        intervals = {}
        if left is not None and right is not None:
            intervals = {
                "WHI": tuple(sorted((left.omega_min, right.omega_min))),
                "BHI": tuple(sorted((left.omega_max, right.omega_max))),
            }
        context = dict(
            preamble=self.get_preamble(),
            intervals=repr(intervals),
            tag_order=repr(TAG_ORDER + SLOW_FRONT_TAGS),
            scenarios=repr([result.scenario.value for result in artifacts.typifying_results]),
            omega_min=repr(artifacts.config.omega_min),
            omega_max=repr(artifacts.config.omega_max),
        )
        templates = {
            "plot_spectra.py": self.get_spectra_template(),
            "plot_ln_spectra.py": self.get_ln_spectra_template(),
            "plot_matrices.py": self.get_matrices_template(),
            "plot_jc_scatter.py": self.get_jc_scatter_template(),
            "plot_dispersion.py": self.get_dispersion_template(),
        }
        return {name: Template(text).render(**context) for name, text in templates.items()}


def emit_plot_scripts(artifacts: SweepArtifacts) -> List[str]:
    """Write the plot scripts into the artifact directory"""
    out_dir = Path(artifacts.config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, source in plot_scripts.render_all(artifacts).items():
        path = out_dir / name
        path.write_text(source, encoding="utf-8")
        paths.append(str(path))
    logger.info(f"Emitted {len(paths)} plot scripts in {out_dir}")
    return paths


# Global instance
plot_scripts = PlotScriptService()
