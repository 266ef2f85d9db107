//! Subcommand implementations. Each writes its primary output to `out` (or
//! to the configured output path) and returns an error carrying the exit
//! code on failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use serde_json::{json, Value};

use dampo_core::bath::{self, SpectralFunction};
use dampo_core::dynamics::{self, DynamicsError};
use dampo_core::fano::{self, CouplingShape};
use dampo_core::oracle;
use dampo_core::states::{self, GaussianState};

use crate::args::{Cli, Command, FigureSelect};
use crate::config::RunConfig;
use crate::figures;
use crate::model::{self, Model, Source};
use crate::CliError;

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Command::Figures { which } = &cli.command {
        let cfg = cli.resolve_config()?;
        return figures_cmd(&cfg, &FigureSelect::expand(which), out);
    }
    let cfg = cli.resolve_config()?;
    match &cli.command {
        Command::Validate => validate(&cfg, out),
        Command::Moments => moments(&cfg, out),
        Command::State => state(&cfg, out),
        Command::Evolve { classify, closed_form } => evolve(&cfg, *classify, *closed_form, out),
        Command::OracleCompare { .. } => oracle_compare(&cfg, out),
        Command::Kernel { numeric, j_table } => kernel(&cfg, *numeric, j_table.as_deref(), out),
        Command::Figures { .. } => unreachable!(),
    }
}

fn core<E: Into<dampo_core::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}

fn write_json(value: &Value, out: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    writeln!(out, "{text}")?;
    Ok(())
}

/// Write to the configured file, or to `out` when no path is set.
fn emit(cfg: &RunConfig, body: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(p) => {
            fs::write(p, body)?;
            info!("wrote {}", p.display());
        }
        None => out.write_all(body)?,
    }
    Ok(())
}

fn header(model: &Model) -> Value {
    json!({
        "source": model.source.name(),
        "m": model.m,
        "Omega0": model.omega0_big,
        "omega0": model.omega0,
    })
}

fn validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = model::build(cfg)?;
    let mut doc = header(&model);
    if let Some(bath) = &model.ohmic {
        let omega0 = model.omega0.unwrap_or(0.0);
        doc["frequency"] = serde_json::to_value(bath::frequency_constraints(bath, model.omega0_big, omega0)).unwrap();
    }
    if let Some(v) = &model.coupling {
        let pos = fano::positivity_check(v, model.omega0_big).map_err(core)?;
        doc["positivity"] = json!({ "integral_v2_over_omega": pos.integral, "ok": pos.ok });
    }
    let sd = model.density()?;
    let report = sd.validate();
    let passed = report.passed;
    doc["report"] = serde_json::to_value(&report).unwrap();
    write_json(&doc, out)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Physics("spectral weight failed validation".into()))
    }
}

fn moments(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = model::build(cfg)?;
    let sd = model.density()?;
    let q = cfg.quadrature.to_config()?;
    let norm = sd.weighted_average_with(|_| 1.0, &q).map_err(core)?;
    let mean = sd.weighted_average_with(|w| w, &q).map_err(core)?;
    let inv = sd.weighted_average_with(|w| 1.0 / w, &q).map_err(core)?;
    let second = sd.weighted_average_with(|w| w * w, &q).map_err(core)?;
    let mut doc = header(&model);
    doc["norm"] = json!(norm);
    doc["mean_omega"] = json!(mean);
    doc["mean_inv_omega"] = json!(inv);
    doc["second_moment"] = json!(second);
    if let Ok(cf) = sd.closed_form_moments() {
        doc["closed_form"] = serde_json::to_value(cf).unwrap();
    }
    write_json(&doc, out)
}

fn state_json(s: &GaussianState) -> Value {
    serde_json::to_value(s).unwrap()
}

fn state(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = model::build(cfg)?;
    let sd = model.density()?;
    let m = model.m;
    let beta = cfg.temperature.beta.value();
    let ground = states::ground_state(sd, m).map_err(core)?;
    let thermal = states::thermal_state(sd, m, beta).map_err(core)?;
    let big = model.omega0_big;
    let mut energies = json!({
        "ground_at_Omega0": states::oscillator_energy(&ground, m, big),
        "thermal_at_Omega0": states::oscillator_energy(&thermal, m, big),
    });
    if let Some(w) = model.omega0 {
        energies["ground_at_omega0"] = json!(states::oscillator_energy(&ground, m, w));
        energies["thermal_at_omega0"] = json!(states::oscillator_energy(&thermal, m, w));
    }
    let number = states::symmetric_moment(&thermal, m, big, 1, 1).map_err(core)?;
    let doc = json!({
        "model": header(&model),
        "beta": if beta.is_infinite() { json!("inf") } else { json!(beta) },
        "ground": state_json(&ground),
        "thermal": state_json(&thermal),
        "uncertainty_product": { "ground": ground.uncertainty_product(), "thermal": thermal.uncertainty_product() },
        "energies": energies,
        "diagonal_ground": serde_json::to_value(states::diagonal_form(&ground, m).map_err(core)?).unwrap(),
        "diagonal_thermal": serde_json::to_value(states::diagonal_form(&thermal, m).map_err(core)?).unwrap(),
        "symmetric_number_thermal": number.re,
        "provenance": {
            "ground": "reduced global ground state: var_x = <<1/omega>>/(2m), var_p = m<<omega>>/2",
            "thermal": "reduced global thermal state: weights coth(beta omega/2)",
            "energies": "kinetic plus potential energy of the reduced state with the stated frequency",
            "diagonal_ground": "thermal description of the reduced state at omega_diag = sqrt(var_p/var_x)/m",
            "symmetric_number_thermal": "symmetrically ordered <a^dagger a> with a defined at Omega0",
        },
    });
    write_json(&doc, out)
}

fn evolve(cfg: &RunConfig, classify: bool, closed_form: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let model = model::build(cfg)?;
    let sd = model.density()?;
    let times = cfg.time.grid()?;
    let series = if closed_form {
        if model.source != Source::Parametric {
            return Err(CliError::Config("--closed-form needs a parametric model".into()));
        }
        dynamics::closed_form_kernels(sd, &times).map_err(core)?
    } else {
        dynamics::kernels_with(sd, &times, &cfg.quadrature.to_config()?).map_err(core)?
    };
    let series = dynamics::evolve_means(cfg.initial.x0, cfg.initial.p0, model.m, series);
    let mut comments = cfg.echo();
    comments.push(format!("kernels from {}", if closed_form { "residue closed forms" } else { "quadrature" }));
    let mut buf = Vec::new();
    dampo_core::io::write_columns(
        &mut buf,
        &comments,
        &["t", "c", "s", "d", "mean_x", "mean_p"],
        &[&series.times, &series.c, &series.s, &series.d, &series.mean_x, &series.mean_p],
    )
    .map_err(core)?;
    if classify {
        let label = match dynamics::classify_damping(&series) {
            Ok(c) => c.to_string(),
            Err(DynamicsError::InconclusiveHorizon { c_end }) => {
                format!("inconclusive (no turning point and |c| = {c_end:.3e} at the horizon)")
            }
            Err(e) => return Err(core(e)),
        };
        writeln!(buf, "# classification: {label}")?;
        if let Some(p) = sd.as_parametric() {
            writeln!(buf, "# classical label: {}", dynamics::classical_label(p))?;
            writeln!(buf, "# suggested horizon: {:.6e}", dynamics::default_horizon(p))?;
        }
    }
    emit(cfg, &buf, out)
}

fn figures_cmd(cfg: &RunConfig, ids: &[figures::FigureId], out: &mut dyn Write) -> Result<(), CliError> {
    let dir: PathBuf = cfg.output.path.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let q = cfg.quadrature.to_config()?;
    for &id in ids {
        let fig = figures::generate(id, &q)?;
        let stem = format!("fig_{}", id.tag());
        let csv = dir.join(format!("{stem}.csv"));
        let svg = dir.join(format!("{stem}.svg"));
        fs::write(&csv, fig.csv()?)?;
        fs::write(&svg, fig.svg())?;
        writeln!(
            out,
            "{}\t{}\t{}\tmax deviation from closed form {:.3e}",
            id.tag(),
            display(&csv),
            display(&svg),
            fig.max_closed_form_deviation()
        )?;
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    (s / n.max(1) as f64).sqrt()
}

fn oracle_compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = model::build(cfg)?;
    let coupling = model
        .coupling
        .as_ref()
        .ok_or_else(|| CliError::Config("oracle-compare needs an ohmic or coupling model".into()))?;
    let n = cfg.oracle.n_modes;
    if n < 50 {
        return Err(CliError::Config(format!("oracle.n_modes = {n} is too small (minimum 50)")));
    }
    let omega_max = match (cfg.oracle.omega_max, &model.ohmic) {
        (Some(w), _) => w,
        (None, Some(b)) => (10.0 * b.omega_c).min(coupling.cutoff()),
        (None, None) => coupling.cutoff(),
    };
    if !(omega_max > 0.0) {
        return Err(CliError::Config(format!("oracle.omega_max = {omega_max} must be positive")));
    }
    let m = model.m;
    let big = model.omega0_big;
    let beta = cfg.temperature.beta.value();
    let bath = oracle::discretize(coupling, big, m, n, omega_max).map_err(core)?;
    let t_rec = bath.recurrence_time();

    // Means over half a recurrence time.
    let (x0, p0) = if cfg.initial.x0 == 0.0 && cfg.initial.p0 == 0.0 { (1.0, 0.0) } else { (cfg.initial.x0, cfg.initial.p0) };
    let times = linspace(0.0, 0.5 * t_rec, 201);
    let discrete = oracle::evolve_means_discrete(&bath, x0, p0, &times).map_err(core)?;
    let reference: Vec<f64> = match &model.density {
        Some(sd) => {
            let k = dynamics::kernels_with(sd, &times, &cfg.quadrature.to_config()?).map_err(core)?;
            dynamics::evolve_means(x0, p0, m, k).mean_x
        }
        None => times.iter().map(|&t| x0 * (big * t).cos() + p0 / (m * big) * (big * t).sin()).collect(),
    };
    let amplitude = reference.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1e-300);
    let diffs: Vec<f64> = discrete.mean_x.iter().zip(&reference).map(|(a, b)| a - b).collect();
    let mean_rms = rms(diffs.iter().copied()) / rms(reference.iter().copied()).max(1e-300);
    let mean_max = diffs.iter().fold(0.0_f64, |a, &d| a.max(d.abs())) / amplitude;

    // Oscillator covariance block late in the run, starting from the vacuum
    // at Ω₀, against the continuum steady state.
    let late_times = linspace(0.65 * t_rec, 0.75 * t_rec, 11);
    let init = GaussianState::vacuum(m, big);
    let traj = oracle::evolve_covariance_discrete(&bath, beta, &init, &late_times).map_err(core)?;
    let expected = match &model.density {
        Some(sd) => states::thermal_state(sd, m, beta).map_err(core)?,
        None => init,
    };
    let scale = (expected.var_x * expected.var_p).sqrt();
    let cov_devs: Vec<f64> = (0..late_times.len())
        .flat_map(|i| {
            let s = traj.state_at(i);
            [
                (s.var_x - expected.var_x) / expected.var_x,
                (s.var_p - expected.var_p) / expected.var_p,
                (s.cov_xp - expected.cov_xp) / scale,
            ]
        })
        .collect();
    let cov_rms = rms(cov_devs.iter().copied());
    let cov_max = cov_devs.iter().fold(0.0_f64, |a, &d| a.max(d.abs()));
    let last = traj.state_at(late_times.len() - 1);
    let bound = cfg.oracle.bound;
    let pass = mean_max <= bound && cov_max <= bound;
    let doc = json!({
        "model": header(&model),
        "n_modes": n,
        "omega_max": omega_max,
        "recurrence_time": t_rec,
        "means": {
            "x0": x0,
            "p0": p0,
            "t_end": 0.5 * t_rec,
            "rms_relative_deviation": mean_rms,
            "max_deviation_over_amplitude": mean_max,
        },
        "covariance": {
            "t_window": [late_times[0], late_times[late_times.len() - 1]],
            "oracle_at_end": state_json(&last),
            "continuum": state_json(&expected),
            "rms_relative_deviation": cov_rms,
            "max_relative_deviation": cov_max,
        },
        "bound": bound,
        "pass": pass,
    });
    write_json(&doc, out)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Physics(format!(
            "oracle deviation (means {mean_max:.3e}, covariance {cov_max:.3e}) exceeds bound {bound}"
        )))
    }
}

fn kernel(cfg: &RunConfig, numeric: bool, j_table: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let times = cfg.time.grid()?;
    let k = if let Some(path) = j_table {
        let file = fs::File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
        let (omega, j) =
            dampo_core::io::read_two_columns(file, ["omega", "J"]).map_err(|e| CliError::Config(e.to_string()))?;
        let sf = SpectralFunction::tabulated(omega, j, cfg.oscillator.m).map_err(|e| CliError::Config(e.to_string()))?;
        bath::kernel_from_density(&sf, &times).map_err(core)?
    } else {
        let model = model::build(cfg)?;
        match (&model.ohmic, &model.coupling) {
            (Some(b), _) if !numeric => bath::ohmic_kernel(b, &times),
            (Some(b), _) => bath::kernel_from_density(&SpectralFunction::Ohmic(*b), &times).map_err(core)?,
            (None, Some(v)) => {
                let CouplingShape::Tabulated(table) = v.shape() else {
                    return Err(CliError::Physics("the coupling vanishes identically; κ ≡ 0".into()));
                };
                // J = πmΩ₀V²/2 on the coupling table's nodes.
                let omega: Vec<f64> = table.xs().iter().copied().filter(|&w| w <= v.cutoff()).collect();
                let j: Vec<f64> =
                    omega.iter().map(|&w| 0.5 * std::f64::consts::PI * model.m * model.omega0_big * v.v_sq(w)).collect();
                let sf = SpectralFunction::tabulated(omega, j, model.m).map_err(core)?;
                bath::kernel_from_density(&sf, &times).map_err(core)?
            }
            (None, None) => {
                return Err(CliError::Config("kernel needs an ohmic or coupling model, or --j-table".into()))
            }
        }
    };
    let mut comments = cfg.echo();
    comments.push(format!("kappa(0) = {:.12e}", k.kappa0));
    match bath::markov_damping(&k) {
        Ok(est) => comments.push(format!(
            "markov rate = {:.12e} (window {:.6e}, tail {:.6e})",
            est.rate, est.window, est.tail
        )),
        Err(e) => comments.push(format!("markov rate unavailable: {e}")),
    }
    let mut buf = Vec::new();
    dampo_core::io::write_columns(&mut buf, &comments, &["t", "kappa"], &[&k.times, &k.kappa]).map_err(core)?;
    emit(cfg, &buf, out)
}
