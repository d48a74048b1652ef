//! Experiment runners and output files.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use twophoton::barrier::{self, LayerStack, Polarization, TunnelingTimes};
use twophoton::eraser::{eraser_scan, eraser_visibility_curve, EraserConfig};
use twophoton::fit::{fit_dip, DipFit};
use twophoton::franson::{chsh_S, franson_coincidence, FransonConfig};
use twophoton::hom::{
    classical_pulse_width, delay_axis, hom_coincidence_scan, sample_delay_measurement, ArmConfig, HomScan,
};
use twophoton::materials::MaterialCatalog;
use twophoton::optics::ScalarTransfer;
use twophoton::spectral::{conditional_collapse, correlation_time, PhotonPairState};
use twophoton::{Error as CoreError, SPEED_OF_LIGHT};

use crate::config::{
    BarrierBlock, CollapseBlock, ElementConfig, EraserBlock, Experiment, FransonBlock, HomConfig, NoiseConfig, Range,
    RunConfig, FS, NM,
};
use crate::noise::poisson_counts;
use crate::CliError;

const DEG: f64 = PI / 180.0;
/// Points on an automatic delay axis spanning ±8 correlation times.
const AUTO_DELAY_POINTS: usize = 241;
const AUTO_DELAY_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub experiment: Experiment,
    pub code_version: String,
    pub config_sha256: String,
    pub csv: String,
    pub grid: Value,
    pub results: Value,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

/// Hex SHA-256 of the config in canonical form (sorted keys, compact).
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_value(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
        w.write_record(&self.header).map_err(|e| CliError::io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

fn fit_json(fit: &DipFit) -> Value {
    json!({
        "center_fs": fit.center / FS,
        "rms_width_fs": fit.rms_width / FS,
        "visibility": fit.visibility,
        "fit_residual": fit.fit_residual,
        "baseline": fit.baseline,
    })
}

/// Fit result, or the reason there is none. A missing dip is an outcome,
/// not a failure.
fn try_fit(scan: &HomScan) -> Result<Value, CliError> {
    match fit_dip(scan) {
        Ok(fit) => Ok(fit_json(&fit)),
        Err(e @ CoreError::NoDip { .. }) => Ok(json!({ "no_dip": e.to_string() })),
        Err(e) => Err(CliError::Numerical(e)),
    }
}

fn grid_json(pair: &PhotonPairState, span_factor: f64) -> Value {
    json!({
        "points": pair.grid().len(),
        "span_factor": span_factor,
        "step_rad_per_s": pair.grid().step(),
    })
}

fn delays(range: Option<&Range>, key: &str, center: f64, tc: f64) -> Result<Vec<f64>, CliError> {
    match range {
        Some(r) => Ok(r.values(key)?.into_iter().map(|d| d * FS).collect()),
        None => Ok(delay_axis(center, AUTO_DELAY_SPAN * tc, AUTO_DELAY_POINTS)),
    }
}

fn arm(elements: &[ElementConfig], catalog: &MaterialCatalog, center: f64) -> Result<ArmConfig, CliError> {
    elements.iter().try_fold(ArmConfig::empty(), |arm, e| {
        Ok(arm.with_element(e.build(catalog, center)?))
    })
}

fn cascade(elements: &[ElementConfig], catalog: &MaterialCatalog, center: f64) -> Result<ScalarTransfer, CliError> {
    elements.iter().try_fold(ScalarTransfer::Identity, |acc, e| {
        Ok(acc.then(e.build(catalog, center)?))
    })
}

/// Everything needed to run, built and checked up front.
// Built once per run, so the variant sizes do not matter.
#[allow(clippy::large_enum_variant)]
enum Plan {
    Hom {
        pair: PhotonPairState,
        arm_a: ArmConfig,
        arm_b: ArmConfig,
        delays: Vec<f64>,
        sample: Option<ScalarTransfer>,
        classical: Option<(twophoton::materials::Material, f64, f64)>,
    },
    Eraser {
        config: EraserConfig,
        delays: Vec<f64>,
        /// Polarizer-2 angles in degrees.
        curve: Option<Vec<f64>>,
        delayed_choice: bool,
    },
    Franson {
        base: FransonConfig,
        phi1: Vec<f64>,
        phi2: Vec<f64>,
        chsh: [f64; 4],
    },
    Barrier {
        stack: LayerStack,
        points: Vec<(f64, f64, Polarization)>,
        /// Wavelength (nm) and angle (deg) of each point as configured.
        labels: Vec<(f64, f64)>,
        report: (f64, f64, Polarization),
    },
    Collapse {
        pair: PhotonPairState,
        block: CollapseBlock,
    },
}

fn plan(config: &RunConfig, catalog: &MaterialCatalog) -> Result<Plan, CliError> {
    let pair = config.source.as_ref().map(|s| s.build()).transpose()?;
    match config.experiment {
        Experiment::Hom => plan_hom(config.hom.as_ref().expect("checked"), pair.expect("checked"), catalog),
        Experiment::Eraser => plan_eraser(config.eraser.as_ref().expect("checked"), pair.expect("checked")),
        Experiment::Franson => plan_franson(config.franson.as_ref().expect("checked")),
        Experiment::Barrier => plan_barrier(config.barrier.as_ref().expect("checked")),
        Experiment::Collapse => {
            let block = config.collapse.clone().expect("checked");
            let pair = pair.expect("checked");
            if !(block.filter_center_nm > 0.0) || block.filter_fwhm_nm.is_some_and(|w| !(w > 0.0)) {
                return Err(CliError::Config(
                    "`collapse`: filter_center_nm and filter_fwhm_nm must be positive".into(),
                ));
            }
            Ok(Plan::Collapse { pair, block })
        }
    }
}

fn plan_hom(block: &HomConfig, pair: PhotonPairState, catalog: &MaterialCatalog) -> Result<Plan, CliError> {
    let w0 = pair.center_angular_frequency();
    let arm_a = arm(&block.arm_a, catalog, w0)?;
    let arm_b = arm(&block.arm_b, catalog, w0)?;
    let gd = |elements: &[ElementConfig]| -> Result<f64, CliError> {
        cascade(elements, catalog, w0)?
            .group_delay(w0)
            .map_err(|e| CliError::config("hom", e))
    };
    let expected = gd(&block.arm_a)? - gd(&block.arm_b)?;
    let delays = delays(
        block.delays_fs.as_ref(),
        "hom.delays_fs",
        expected,
        correlation_time(&pair),
    )?;
    let sample = if block.measure_sample {
        if block.arm_a.is_empty() || !block.arm_b.is_empty() {
            return Err(CliError::Config(
                "`hom.measure_sample`: put the sample in arm_a and leave arm_b empty".into(),
            ));
        }
        Some(cascade(&block.arm_a, catalog, w0)?)
    } else {
        None
    };
    let classical = match &block.classical_pulse {
        Some(c) => {
            let material = catalog
                .get(&c.material)
                .map_err(|e| CliError::config("hom.classical_pulse.material", e))?
                .clone();
            if !(c.input_rms_fs > 0.0 && c.length_mm >= 0.0) {
                return Err(CliError::Config(
                    "`hom.classical_pulse`: need input_rms_fs > 0 and length_mm ≥ 0".into(),
                ));
            }
            Some((material, c.length_mm * 1e-3, c.input_rms_fs * FS))
        }
        None => None,
    };
    Ok(Plan::Hom {
        pair,
        arm_a,
        arm_b,
        delays,
        sample,
        classical,
    })
}

fn plan_eraser(block: &EraserBlock, pair: PhotonPairState) -> Result<Plan, CliError> {
    let tc = correlation_time(&pair);
    let config = EraserConfig {
        hwp_angle: block.hwp_deg * DEG,
        pol1: block.pol1_deg.map(|a| a * DEG),
        pol2: block.pol2_deg.map(|a| a * DEG),
        pair,
    };
    config.validate().map_err(|e| CliError::config("eraser", e))?;
    let curve = match &block.pol2_curve_deg {
        Some(r) => {
            if block.pol1_deg.is_none() {
                return Err(CliError::Config(
                    "`eraser.pol2_curve_deg` needs `eraser.pol1_deg`".into(),
                ));
            }
            Some(r.values("eraser.pol2_curve_deg")?)
        }
        None => None,
    };
    Ok(Plan::Eraser {
        delays: delays(block.delays_fs.as_ref(), "eraser.delays_fs", 0.0, tc)?,
        config,
        curve,
        delayed_choice: block.delayed_choice,
    })
}

fn plan_franson(block: &FransonBlock) -> Result<Plan, CliError> {
    let base = FransonConfig {
        path_imbalance: block.path_imbalance_m,
        phi1: 0.0,
        phi2: 0.0,
        visibility: block.visibility,
        coincidence_window: block.coincidence_window_ns * 1e-9,
        coherence_length: block.coherence_length_um * 1e-6,
        entangled: block.entangled,
    };
    base.validate().map_err(|e| CliError::config("franson", e))?;
    let s = block.chsh.clone().unwrap_or_default();
    Ok(Plan::Franson {
        base,
        phi1: block.phi1_deg.values("franson.phi1_deg")?,
        phi2: block.phi2_deg.values("franson.phi2_deg")?,
        chsh: [s.a_deg, s.a_prime_deg, s.b_deg, s.b_prime_deg].map(|a| a * DEG),
    })
}

fn plan_barrier(block: &BarrierBlock) -> Result<Plan, CliError> {
    let stack = block.stack.build()?;
    let wavelengths = block.wavelengths_nm.values("barrier.wavelengths_nm")?;
    if wavelengths.iter().any(|w| !(*w > 0.0)) {
        return Err(CliError::Config(
            "`barrier.wavelengths_nm`: wavelengths must be positive".into(),
        ));
    }
    if block.angles_deg.iter().any(|a| !(0.0..90.0).contains(a)) {
        return Err(CliError::Config(
            "`barrier.angles_deg`: angles must lie in [0, 90)".into(),
        ));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for &pol in &block.pols {
        for &angle in &block.angles_deg {
            for &lam in &wavelengths {
                points.push((lam * NM, angle * DEG, pol));
                labels.push((lam, angle));
            }
        }
    }
    let report = match &block.report {
        Some(r) => (r.wavelength_nm * NM, r.angle_deg * DEG, r.pol),
        None => {
            let lam = stack
                .bloch_cell()
                .map_or(wavelengths[0] * NM, |c| 2.0 * (c.n_h * c.d_h + c.n_l * c.d_l));
            (lam, 0.0, Polarization::P)
        }
    };
    // Fail here rather than midway through the scan.
    barrier::stack_response(&stack, report.0, report.1, report.2).map_err(|e| CliError::config("barrier.report", e))?;
    Ok(Plan::Barrier {
        stack,
        points,
        labels,
        report,
    })
}

fn execute(plan: Plan, config: &RunConfig) -> Result<(Table, Value, Value), CliError> {
    match plan {
        Plan::Hom {
            pair,
            arm_a,
            arm_b,
            delays,
            sample,
            classical,
        } => {
            let scan = hom_coincidence_scan(&pair, &arm_a, &arm_b, &delays)?;
            let tc = correlation_time(&pair);
            let (table, noisy_fit) = scan_table(&scan, config.noise.as_ref())?;
            let mut results = json!({
                "correlation_time_fs": tc / FS,
                "correlation_length_um": SPEED_OF_LIGHT * tc * 1e6,
                "fit": try_fit(&scan)?,
            });
            if let Some(f) = noisy_fit {
                results["noisy_fit"] = f;
            }
            if let Some(sample) = sample {
                let m = sample_delay_measurement(&pair, &sample)?;
                results["sample"] = json!({
                    "delay_shift_fs": m.delay_shift / FS,
                    "width_ratio": m.width_ratio,
                    "group_delay_fs": sample.group_delay(pair.center_angular_frequency())? / FS,
                    "reference": fit_json(&m.reference),
                    "with_sample": fit_json(&m.with_sample),
                });
            }
            if let Some((material, length, input)) = classical {
                let out = classical_pulse_width(&material, length, input, pair.center_wavelength())?;
                results["classical_pulse"] = json!({
                    "input_rms_fs": input / FS,
                    "output_rms_fs": out / FS,
                    "broadening": out / input,
                });
            }
            let grid = grid_json(&pair, source_span(config));
            Ok((table, results, grid))
        }
        Plan::Eraser {
            config: eraser,
            delays,
            curve,
            delayed_choice,
        } => {
            let profile = eraser_scan(&eraser, &delays)?;
            let (table, noisy_fit) = scan_table(&profile.scan, config.noise.as_ref())?;
            let mut results = json!({
                "visibility": profile.visibility,
                "delayed_choice": delayed_choice,
                "fit": try_fit(&profile.scan)?,
            });
            if let Some(f) = noisy_fit {
                results["noisy_fit"] = f;
            }
            if let Some(pol2) = curve {
                let radians: Vec<f64> = pol2.iter().map(|a| a * DEG).collect();
                let v =
                    eraser_visibility_curve(&eraser.pair, eraser.hwp_angle, eraser.pol1.expect("checked"), &radians)?;
                results["visibility_curve"] = pol2
                    .iter()
                    .zip(&v)
                    .map(|(p, v)| json!({ "pol2_deg": p, "visibility": v }))
                    .collect();
            }
            let grid = grid_json(&eraser.pair, source_span(config));
            Ok((table, results, grid))
        }
        Plan::Franson { base, phi1, phi2, chsh } => run_franson(base, &phi1, &phi2, chsh),
        Plan::Barrier {
            stack,
            points,
            labels,
            report,
        } => run_barrier(&stack, &points, &labels, report),
        Plan::Collapse { pair, block } => {
            let fwhm = block.filter_fwhm_nm.map_or(f64::INFINITY, |w| w * NM);
            let (spectrum, length) = conditional_collapse(&pair, block.filter_center_nm * NM, fwhm, block.filtered_arm)
                .map_err(|e| CliError::config("collapse", e))?;
            let (_, open_length) =
                conditional_collapse(&pair, block.filter_center_nm * NM, f64::INFINITY, block.filtered_arm)?;
            let mut table = Table::new(vec!["wavelength_nm", "density"]);
            // Emit in increasing wavelength; density is per unit angular frequency.
            let wl = spectrum.wavelengths();
            for i in (0..wl.len()).rev() {
                table
                    .rows
                    .push(vec![(wl[i] / NM).to_string(), spectrum.density[i].to_string()]);
            }
            let rms = spectrum.rms_width();
            let results = json!({
                "conjugate_rms_width_rad_per_s": rms,
                "conjugate_coherence_length_um": length * 1e6,
                "unfiltered_coherence_length_um": open_length * 1e6,
                "coherence_ratio": length / open_length,
                "entangled": pair.is_entangled(),
            });
            let grid = json!({
                "points": spectrum.grid.len(),
                "span_factor": source_span(config),
                "step_rad_per_s": spectrum.grid.step(),
            });
            Ok((table, results, grid))
        }
    }
}

fn source_span(config: &RunConfig) -> f64 {
    config.source.as_ref().map_or(0.0, |s| s.span_factor)
}

fn scan_table(scan: &HomScan, noise: Option<&NoiseConfig>) -> Result<(Table, Option<Value>), CliError> {
    let counts = match noise {
        Some(n) => Some(poisson_counts(&scan.rates, n.integration_time, n.peak_rate, n.seed)?),
        None => None,
    };
    let mut header = vec!["delay_fs", "rate"];
    if counts.is_some() {
        header.push("counts");
    }
    let mut table = Table::new(header);
    for (i, (d, r)) in scan.delays.iter().zip(&scan.rates).enumerate() {
        let mut row = vec![(d / FS).to_string(), r.to_string()];
        if let Some(c) = &counts {
            row.push(c[i].to_string());
        }
        table.rows.push(row);
    }
    let noisy_fit = match counts {
        Some(c) => {
            let noisy = HomScan {
                delays: scan.delays.clone(),
                rates: c.iter().map(|&k| k as f64).collect(),
            };
            Some(try_fit(&noisy)?)
        }
        None => None,
    };
    Ok((table, noisy_fit))
}

fn run_franson(
    base: FransonConfig,
    phi1: &[f64],
    phi2: &[f64],
    chsh: [f64; 4],
) -> Result<(Table, Value, Value), CliError> {
    let mut table = Table::new(vec!["phi1_deg", "phi2_deg", "class", "rate"]);
    let mut pattern = None;
    for &p1 in phi1 {
        for &p2 in phi2 {
            let rates = franson_coincidence(&FransonConfig {
                phi1: p1 * DEG,
                phi2: p2 * DEG,
                ..base
            })?;
            pattern = Some(rates.port_pattern);
            for (class, rate) in [
                ("ss", rates.p_ss),
                ("ll", rates.p_ll),
                ("sl", rates.p_sl),
                ("ls", rates.p_ls),
                ("like", rates.p_postselected_coincidence),
                ("unlike", rates.p_unlike),
            ] {
                table
                    .rows
                    .push(vec![p1.to_string(), p2.to_string(), class.into(), rate.to_string()]);
            }
        }
    }
    let [a, a_prime, b, b_prime] = chsh;
    let chsh_json = if base.entangled {
        match chsh_S(base.visibility, a, a_prime, b, b_prime) {
            Ok(r) => json!({
                "S": r.s,
                "violated": r.violated,
                "subtracted": r.subtracted,
                "correlations": r.correlations,
                "settings_deg": r.settings.map(|(x, y)| [x / DEG, y / DEG]),
            }),
            Err(e @ CoreError::DegenerateChsh) => return Err(CliError::config("franson.chsh", e)),
            Err(e) => return Err(e.into()),
        }
    } else {
        // Without phase correlations every E vanishes.
        json!({ "S": 0.0, "violated": false })
    };
    let results = json!({
        "visibility": base.visibility,
        "entangled": base.entangled,
        "port_pattern": pattern,
        "local_bound": 2.0,
        "chsh": chsh_json,
    });
    let grid = json!({ "phi1_points": phi1.len(), "phi2_points": phi2.len() });
    Ok((table, results, grid))
}

fn times_json(t: &TunnelingTimes, transmittance: f64) -> Value {
    json!({
        "T": transmittance,
        "group_delay_fs": t.group_delay / FS,
        "semiclassical_fs": t.semiclassical.map(|s| s / FS),
        "larmor_fs": t.larmor / FS,
        "larmor_y_fs": t.larmor_y / FS,
        "larmor_z_fs": t.larmor_z / FS,
        "d_over_c_fs": t.d_over_c / FS,
    })
}

fn run_barrier(
    stack: &LayerStack,
    points: &[(f64, f64, Polarization)],
    labels: &[(f64, f64)],
    report: (f64, f64, Polarization),
) -> Result<(Table, Value, Value), CliError> {
    let scan = barrier::tunneling_scan(stack, points)?;
    let mut table = Table::new(vec![
        "wavelength_nm",
        "angle_deg",
        "pol",
        "T",
        "group_delay_fs",
        "semiclassical_fs",
        "larmor_fs",
    ]);
    for (((lam, angle), (_, _, pol)), (resp, t)) in labels.iter().zip(points).zip(&scan) {
        table.rows.push(vec![
            lam.to_string(),
            angle.to_string(),
            pol.to_string(),
            resp.transmittance.to_string(),
            (t.group_delay / FS).to_string(),
            t.semiclassical.map_or(String::new(), |s| (s / FS).to_string()),
            (t.larmor / FS).to_string(),
        ]);
    }
    let (lam, angle, pol) = report;
    let resp = barrier::stack_response(stack, lam, angle, pol)?;
    let times = barrier::tunneling_times(stack, lam, angle, pol)?;
    let mut results = json!({
        "layers": stack.layers().len(),
        "total_thickness_nm": stack.total_thickness() / NM,
        "report": {
            "wavelength_nm": lam / NM,
            "angle_deg": angle / DEG,
            "pol": pol,
            "times": times_json(&times, resp.transmittance),
        },
    });
    if let Some((i, (resp, _))) = scan
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .0.transmittance.total_cmp(&y.1 .0.transmittance))
    {
        results["min_transmittance"] = json!({
            "T": resp.transmittance,
            "wavelength_nm": labels[i].0,
            "angle_deg": labels[i].1,
            "pol": points[i].2,
        });
    }
    if let Some(cell) = stack.bloch_cell() {
        if barrier::in_stop_band(&cell, lam, angle, pol) {
            let (short, long) = barrier::stop_band_edges(&cell, lam, angle, pol)?;
            results["stop_band_nm"] = json!([short / NM, long / NM]);
        }
    }
    let grid = json!({ "points": points.len() });
    Ok((table, results, grid))
}

/// Builds every input the run needs without computing anything expensive.
pub fn validate(config: &RunConfig, catalog: &MaterialCatalog) -> Result<(), CliError> {
    plan(config, catalog).map(|_| ())
}

/// Runs `config` and writes `<name>.csv` and `<name>.summary.json` into
/// `out_dir` (or the configured directory).
pub fn run_experiment(
    config: &RunConfig,
    catalog: &MaterialCatalog,
    out_dir: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let plan = plan(config, catalog)?;
    let (table, results, grid) = execute(plan, config)?;

    let dir = out_dir.map_or_else(|| config.output.dir.clone(), Path::to_path_buf);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let csv_name = format!("{}.csv", config.output.name);
    let csv_path = dir.join(&csv_name);
    let summary_path = dir.join(format!("{}.summary.json", config.output.name));
    table.write(&csv_path)?;

    let summary = Summary {
        experiment: config.experiment,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(config),
        csv: csv_name,
        grid,
        results,
        config: config.clone(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(&summary_path, text).map_err(|e| CliError::io(&summary_path, e))?;
    Ok(RunOutput {
        csv_path,
        summary_path,
        summary,
    })
}
