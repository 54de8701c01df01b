"""Named end-to-end experiments behind the CLI.

Each scenario resolves its parameters, runs deterministically from the
configured seeds, writes binary arrays / CSV cross-sections / an optional
rendering into the output directory, and returns a RunReport with the
headline metrics and a checksummed artifact manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import binio
from .config import ScenarioConfig
from .correlation import (
    DEFAULT_MAX_PAIR_ELEMENTS,
    apply_mask_pair,
    aux_pump_intensity,
    compare_patterns,
    delta_approx_correlation,
    difference_projection,
    full_correlation,
)
from .emccd import (
    AnticorrelatedPairSampler,
    DetectorModel,
    DifferencePairSampler,
    coincidence_correlation,
    estimate_schmidt,
    save_frame_stack,
    speckle_contrast,
    sum_coincidence_correlation,
    synthesize_frames,
)
from .errors import DomainError, ResourceLimitError
from .grid import Grid1D, Grid2D, ComplexField, fourier_transform, pearson_correlation
from .spdc import SigmaPair, build_two_photon_amplitude, schmidt_number, sigma_ratio_for_schmidt, derive_sigmas, SpdcParams
from .zernike import (
    DmConfig,
    ParityFilter,
    PhaseMask,
    filtered_noise_mask,
    mask_from_coeffs,
    max_pupil_radius,
    parity_decompose,
    random_mask,
    save_dm_config,
    uniform_phase_mask,
)

__all__ = ["RunReport", "run_scenario"]


@dataclass
class RunReport:
    scenario: str
    metrics: dict[str, float]
    artifacts: list[dict]
    config_echo: dict = field(default_factory=dict)


class _Writer:
    def __init__(self, outdir: Path, render: bool):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.render = render
        self.manifest: list[dict] = []

    def register(self, path: Path):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.manifest.append({"path": path.name, "sha256": digest})


    def array(self, name: str, values, spacings):
        path = self.outdir / f"{name}.bin"
        binio.write_array(path, values, spacings)
        self.register(path)

    def csv(self, name: str, coords, values):
        path = self.outdir / f"{name}.csv"
        binio.write_csv(path, coords, values)
        self.register(path)

    def dm_config(self, name: str, cfg):
        path = self.outdir / f"{name}.yaml"
        save_dm_config(cfg, path)
        self.register(path)

    def image(self, name: str, values):
        if not self.render:
            return
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(4, 4))
        if np.ndim(values) == 1:
            ax.plot(values)
        else:
            ax.imshow(np.asarray(values).T, origin="lower", cmap="inferno")
            ax.set_axis_off()
        path = self.outdir / f"{name}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        self.register(path)


def _energy_region(values: np.ndarray, fraction: float = 0.9) -> np.ndarray:
    """Boolean mask of the centered disk holding ``fraction`` of the energy."""
    n_x, n_y = values.shape
    ix, iy = np.meshgrid(np.arange(n_x) - n_x // 2, np.arange(n_y) - n_y // 2, indexing="ij")
    r2 = (ix * ix + iy * iy).astype(np.float64)
    order = np.argsort(r2, axis=None)
    cumulative = np.cumsum(values.ravel()[order])
    cutoff = np.searchsorted(cumulative, fraction * cumulative[-1])
    r2_max = r2.ravel()[order][min(cutoff, order.size - 1)]
    return r2 <= r2_max


def _cut_row(corr_map, offset: float):
    """Nearest-row 1D cross-section of a 2D map along its first axis."""
    ys = corr_map.grid.coords_y
    j = int(np.argmin(np.abs(ys - offset)))
    return corr_map.grid.coords_x, corr_map.values[:, j], float(ys[j])


def _resolve_sigma_pair(params: dict, sigma_minus_default: float, dims: int) -> SigmaPair:
    """Pick the width pair from sigmas / spdc_params / schmidt_target / sigma_ratio.

    A 2D Schmidt target is split over the two transverse axes of the
    separable amplitude (per-axis K = sqrt(target)), then inverted for the
    per-axis width ratio.
    """
    if "sigmas" in params and params["sigmas"] is not None:
        s = params["sigmas"]
        return SigmaPair(s["plus"], s["minus"])
    if "spdc_params" in params and params["spdc_params"] is not None:
        p = params["spdc_params"]
        return derive_sigmas(SpdcParams(p["w0"], p["L"], p["lambda_p"], p["n_p"]))
    if params.get("schmidt_target") is not None:
        target = params["schmidt_target"]
        per_axis = math.sqrt(target) if dims == 2 else target
        ratio = sigma_ratio_for_schmidt(per_axis)
    else:
        ratio = params.get("sigma_ratio", 50.0)
    return SigmaPair(ratio * sigma_minus_default, sigma_minus_default)


# ---------------------------------------------------------------------------
# scenarios


def _run_fig1_demo(params, writer: _Writer) -> dict[str, float]:
    grid = Grid1D(params["n"], params["dk"])
    sigma_minus = params["sigma_minus"]
    freq = params["mask_frequency"]
    k = grid.coords
    full = PhaseMask(grid, np.cos(freq * k) + np.sin(freq * k))
    even, odd = parity_decompose(full)
    none = full.zero_like()

    cases = {"none": none, "full": full, "even": even, "odd": odd}
    maps = {}
    pumps = {}
    for name, mask in cases.items():
        maps[name] = delta_approx_correlation(mask, sigma_minus)
        pumps[name] = aux_pump_intensity(mask, sigma_minus)
        writer.array(f"twophoton_{name}", maps[name].values, maps[name].grid.spacings)
        writer.array(f"pump_{name}", pumps[name].values, pumps[name].grid.spacings)
        writer.csv(f"twophoton_{name}", maps[name].grid.coords, maps[name].values)
        writer.csv(f"pump_{name}", pumps[name].grid.coords, pumps[name].values)
        writer.image(f"twophoton_{name}", maps[name].values)

    return {
        "twophoton_full_vs_even": pearson_correlation(maps["full"].values, maps["even"].values),
        "twophoton_odd_vs_none": pearson_correlation(maps["odd"].values, maps["none"].values),
        "overlap_none": compare_patterns(maps["none"], pumps["none"]),
        "overlap_even": compare_patterns(maps["even"], pumps["even"]),
        "pump_full_vs_pump_even": pearson_correlation(pumps["full"].values, pumps["even"].values),
    }


def _run_zernike_gallery(params, writer: _Writer) -> dict[str, float]:
    grid = Grid2D.square(params["n"], 1.0)
    pupil = params["pupil_fraction"] * max_pupil_radius(grid)
    amplitude = params["amplitude"]
    kx, ky = grid.mesh()
    r2 = kx * kx + ky * ky
    beam = np.exp(-r2 / pupil**2) * (r2 <= pupil**2)
    peaks = []
    for j in range(4, 16):
        mask_j = mask_from_coeffs(DmConfig(coefficients={j: amplitude}, pupil_radius=pupil), grid)
        field = ComplexField(grid, beam * np.exp(1j * mask_j.values))
        intensity = np.abs(fourier_transform(field).values) ** 2
        intensity /= intensity.max()
        writer.array(f"farfield_z{j:02d}", intensity, grid.conjugate().spacings)
        writer.image(f"farfield_z{j:02d}", intensity)
        peaks.append(float(intensity.max()))
    return {"n_images": float(len(peaks)), "pupil_radius": float(pupil)}


def _run_parity_experiment(params, writer: _Writer) -> dict[str, float]:
    grid = Grid2D.square(params["n"], 1.0)
    pupil = params["pupil_fraction"] * max_pupil_radius(grid)
    sigma_minus = params["sigma_minus"]
    parity = {"odd": ParityFilter.ODD_ONLY, "even": ParityFilter.EVEN_ONLY, "all": ParityFilter.ALL}[
        params["parity"]
    ]
    none_map = delta_approx_correlation(PhaseMask(grid, np.zeros(grid.shape), pupil), sigma_minus)

    vs_none = []
    contrasts = []
    pump_match = []
    for i in range(params["n_masks"]):
        dm = random_mask(parity, params["mask_amplitude"], seed=[params["seed"], i], pupil_radius=pupil)
        mask = mask_from_coeffs(dm, grid)
        two = delta_approx_correlation(mask, sigma_minus)
        pump = aux_pump_intensity(mask, sigma_minus)
        vs_none.append(pearson_correlation(two.values, none_map.values))
        contrasts.append(speckle_contrast(pump.values, _energy_region(pump.values)))
        pump_match.append(compare_patterns(two, pump))
        if i == 0:
            writer.dm_config("mask_0", dm)
            writer.array("twophoton_0", two.values, two.grid.spacings)
            writer.array("pump_0", pump.values, pump.grid.spacings)
            writer.image("twophoton_0", two.values)
            writer.image("pump_0", pump.values)
    return {
        "twophoton_vs_nodisorder_min": float(np.min(vs_none)),
        "twophoton_vs_nodisorder_mean": float(np.mean(vs_none)),
        "pump_speckle_contrast_mean": float(np.mean(contrasts)),
        "pump_speckle_contrast_min": float(np.min(contrasts)),
        "pump_vs_twophoton_mean": float(np.mean(pump_match)),
    }


def _run_strong_disorder(params, writer: _Writer) -> dict[str, float]:
    n = params["n"]
    grid = Grid2D.square(n, 1.0)
    n_full = params["n_full"]
    sigma_minus_full = 3.2 / n_full
    sigmas_full = _resolve_sigma_pair(params, sigma_minus_full, dims=2)
    # Delta-path kernel sized relative to its own grid so the speckle grain
    # stays a fixed number of samples regardless of n.
    sigma_minus_delta = 12.8 / n
    rms = params["mask_rms"]
    corr_len = params["mask_correlation_length"]
    seed = params["seed"]

    mask = filtered_noise_mask(grid, rms, corr_len * n / n_full, seed=[seed, 0])
    even, odd = parity_decompose(mask)
    none = mask.zero_like()
    metrics: dict[str, float] = {
        "schmidt_per_axis": schmidt_number(sigmas_full),
        "schmidt_2d": schmidt_number(sigmas_full) ** 2,
    }

    maps = {}
    for name, m in (("none", none), ("full", mask), ("even", even), ("odd", odd)):
        two = delta_approx_correlation(m, sigma_minus_delta)
        pump = aux_pump_intensity(m, sigma_minus_delta)
        maps[name] = two
        writer.array(f"delta_twophoton_{name}", two.values, two.grid.spacings)
        writer.array(f"delta_pump_{name}", pump.values, pump.grid.spacings)
        writer.image(f"delta_twophoton_{name}", two.values)
        writer.image(f"delta_pump_{name}", pump.values)
        if name == "even":
            metrics["pump_even_vs_twophoton_even"] = compare_patterns(two, pump)
        if name == "full":
            metrics["pump_full_vs_twophoton_full"] = compare_patterns(two, pump)
    metrics["twophoton_full_vs_even_delta"] = pearson_correlation(
        maps["full"].values, maps["even"].values
    )
    metrics["twophoton_odd_vs_none_delta"] = pearson_correlation(
        maps["odd"].values, maps["none"].values
    )
    for offset in params["cut_offsets"]:
        for name in ("none", "full", "even", "odd"):
            coords, cut, actual = _cut_row(maps[name], float(offset))
            writer.csv(f"cut_{name}_y{offset:g}", coords, cut)

    if params["full_path"]:
        if n_full**4 > DEFAULT_MAX_PAIR_ELEMENTS:
            raise ResourceLimitError(
                f"full path needs {n_full**4} pair elements, over the "
                f"{DEFAULT_MAX_PAIR_ELEMENTS} budget"
            )
        grid_full = Grid2D.square(n_full, 1.0)
        mask_full = filtered_noise_mask(grid_full, rms, corr_len, seed=[seed, 1])
        even_full, odd_full = parity_decompose(mask_full)
        psi = build_two_photon_amplitude(grid_full, sigmas_full)
        projections = {}
        for name, m in (
            ("none", None),
            ("full", mask_full),
            ("even", even_full),
            ("odd", odd_full),
        ):
            masked = psi if m is None else apply_mask_pair(psi, m)
            proj = difference_projection(full_correlation(masked))
            projections[name] = proj
            writer.array(f"exact_projection_{name}", proj.values, proj.grid.spacings)
            writer.image(f"exact_projection_{name}", proj.values)
        metrics["twophoton_full_vs_even_exact"] = pearson_correlation(
            projections["full"].values, projections["even"].values
        )
        metrics["twophoton_odd_vs_none_exact"] = pearson_correlation(
            projections["odd"].values, projections["none"].values
        )
        metrics["twophoton_full_vs_none_exact"] = pearson_correlation(
            projections["full"].values, projections["none"].values
        )
    return metrics


def _run_emccd_pipeline(params, writer: _Writer) -> dict[str, float]:
    seed = params["seed"]
    sensor = params["sensor"]
    window = params["window"]
    mask_n = params["mask_n"]
    if window > mask_n // 2 - 1:
        raise DomainError(
            f"window {window} exceeds the difference-map half-size {mask_n // 2 - 1}"
        )
    grid_m = Grid2D.square(mask_n, 1.0)
    mask = filtered_noise_mask(
        grid_m, params["mask_rms"], params["mask_correlation_length"], seed=[seed, 0]
    )
    even, _ = parity_decompose(mask)
    truth = delta_approx_correlation(even, params["mask_sigma_minus"])
    writer.array("difference_map", truth.values, (1.0, 1.0))
    writer.image("difference_map", truth.values)

    det = params["detector"]
    model = DetectorModel(
        width=sensor,
        height=sensor,
        pairs_per_frame_mean=params["pairs_per_frame"],
        dark_electron_mean=det["dark_mean"],
        readout_std=det["read_std"],
        gain=det["gain"],
    )
    sampler = DifferencePairSampler.from_difference_map(
        truth.values, params["centroid_sigma"], center=(sensor / 2, sensor / 2)
    )
    stack = synthesize_frames(sampler, model, params["n_frames"], seed + 1)
    if params["save_frames"]:
        path = writer.outdir / "frames.bin"
        save_frame_stack(path, stack)
        writer.register(path)
    corr = coincidence_correlation(stack, window)
    writer.array("coincidence_map", corr.values, (1.0, 1.0))
    writer.image("coincidence_map", corr.values)

    c = mask_n // 2
    truth_window = truth.values[c - window : c + window + 1, c - window : c + window + 1]
    r = pearson_correlation(corr.values, truth_window)
    occupancy = float(stack.frames.mean())
    return {
        "corr_vs_truth_pearson": r,
        "mean_occupancy": occupancy,
        "threshold": stack.threshold,
        "frames": float(stack.n),
    }


def _run_schmidt_estimate(params, writer: _Writer) -> dict[str, float]:
    seed = params["seed"]
    sensor = params["sensor"]
    sigmas = _resolve_sigma_pair(params, 1.0, dims=1)
    ratio = sigmas.ratio
    sigma_j = params["sigma_j_px"]
    sigma_m = sigma_j * 0.5 * ratio * math.sqrt(1.0 + 1.0 / ratio**2)
    det = params["detector"]
    model = DetectorModel(
        width=sensor,
        height=sensor,
        pairs_per_frame_mean=params["pairs_per_frame"],
        dark_electron_mean=det["dark_mean"],
        readout_std=det["read_std"],
        gain=det["gain"],
    )
    sampler = AnticorrelatedPairSampler(sigma_j, sigma_m, center=(sensor / 2, sensor / 2))
    stack = synthesize_frames(sampler, model, params["n_frames"], seed)
    marginal_image = stack.photon_sum_image()
    sum_map = sum_coincidence_correlation(stack, window=int(8 * sigma_j))
    est = estimate_schmidt(marginal_image, sum_map)
    writer.array("marginal", marginal_image, (1.0, 1.0))
    writer.array("sum_map", sum_map.values, (1.0, 1.0))
    writer.image("marginal", marginal_image)
    writer.image("sum_map", sum_map.values)
    analytic = schmidt_number(sigmas)
    return {
        "schmidt_estimate": est.value,
        "schmidt_uncertainty": est.uncertainty,
        "schmidt_analytic": analytic,
        "relative_error": abs(est.value - analytic) / analytic,
        "sigma_m_px": est.sigma_m,
        "sigma_j_px": est.sigma_j,
    }


def _run_speckle_contrast(params, writer: _Writer) -> dict[str, float]:
    seed = params["seed"]
    grid = Grid2D.square(params["n"], 1.0)
    pupil = params["pupil_fraction"] * max_pupil_radius(grid)
    kx, ky = grid.mesh()
    support = (kx * kx + ky * ky <= pupil**2).astype(np.float64)
    contrasts = []
    for i in range(params["n_realizations"]):
        mask = uniform_phase_mask(grid, pupil, seed=[seed, i])
        intensity = np.abs(fourier_transform(ComplexField(grid, support * np.exp(1j * mask.values))).values) ** 2
        contrasts.append(speckle_contrast(intensity))
        if i == 0:
            writer.array("speckle_0", intensity / intensity.max(), grid.conjugate().spacings)
            writer.image("speckle_0", intensity)
    metrics = {
        "contrast_mean": float(np.mean(contrasts)),
        "contrast_std": float(np.std(contrasts)),
        "contrast_min": float(np.min(contrasts)),
        "contrast_max": float(np.max(contrasts)),
    }
    if params["compare_doubled_phase"]:
        # Reference comparison of one smooth mirror-style mask seen at the
        # photon wavelength (single phase) and at half that wavelength
        # (doubled phase).  Experimental counterparts land near 0.96 and
        # 0.89; exact values depend on the mirror stroke and are not
        # asserted anywhere.
        dm = random_mask(ParityFilter.ALL, math.pi, seed=[seed, 10001], pupil_radius=pupil)
        zmask = mask_from_coeffs(dm, grid)
        for label, mult in (("single", 1.0), ("double", 2.0)):
            intensity = np.abs(
                fourier_transform(ComplexField(grid, support * np.exp(1j * mult * zmask.values))).values
            ) ** 2
            metrics[f"reference_contrast_{label}"] = speckle_contrast(
                intensity, _energy_region(intensity)
            )
    return metrics


_RUNNERS = {
    "fig1-demo": _run_fig1_demo,
    "zernike-gallery": _run_zernike_gallery,
    "parity-experiment": _run_parity_experiment,
    "strong-disorder-2d": _run_strong_disorder,
    "emccd-pipeline": _run_emccd_pipeline,
    "schmidt-estimate": _run_schmidt_estimate,
    "speckle-contrast": _run_speckle_contrast,
}


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    """Run one scenario to completion and persist its report."""
    writer = _Writer(Path(cfg.output_dir), cfg.render)
    metrics = _RUNNERS[cfg.scenario](cfg.params, writer)
    metrics = {k: float(v) for k, v in metrics.items()}
    echo = {
        "scenario": cfg.scenario,
        "output_dir": cfg.output_dir,
        "render": cfg.render,
        **cfg.params,
    }
    report = RunReport(cfg.scenario, metrics, writer.manifest, echo)
    payload = {
        "scenario": report.scenario,
        "config": report.config_echo,
        "metrics": report.metrics,
        "artifacts": report.artifacts,
    }
    (writer.outdir / "metrics.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    lines = [f"scenario: {report.scenario}", "", "metrics:"]
    for name in sorted(report.metrics):
        lines.append(f"  {name} = {report.metrics[name]:.6g}")
    lines.append("")
    lines.append("artifacts:")
    for item in report.artifacts:
        lines.append(f"  {item['path']}  sha256={item['sha256']}")
    lines.append("")
    (writer.outdir / "report.txt").write_text("\n".join(lines))
    return report
