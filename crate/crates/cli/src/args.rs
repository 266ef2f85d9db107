use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Beta, RunConfig, Spacing};
use crate::figures::FigureId;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "dampo", version, about = "Damped quantum harmonic oscillator via exact diagonalisation")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override values from the configuration file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Oscillator mass.
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Short-time (bare) frequency Ω₀.
    #[arg(long = "omega0-big", global = true, value_name = "Ω0")]
    pub omega0_big: Option<f64>,
    /// Long-time frequency ω₀.
    #[arg(long, global = true)]
    pub omega0: Option<f64>,
    /// Inverse temperature: a positive number or `inf`.
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true)]
    pub t_start: Option<f64>,
    #[arg(long, global = true)]
    pub t_stop: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub spacing: Option<Spacing>,
    /// Initial mean position.
    #[arg(long, global = true)]
    pub x0: Option<f64>,
    /// Initial mean momentum.
    #[arg(long, global = true)]
    pub p0: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Output file (or directory for `figures`); stdout when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that the spectral weight is a legitimate distribution.
    Validate,
    /// Print the frequency moments ⟨⟨ω⟩⟩, ⟨⟨ω⁻¹⟩⟩, ⟨⟨ω²⟩⟩.
    Moments,
    /// Ground and thermal reduced states, energies and diagonal form.
    State,
    /// Relaxation kernels and mean trajectory as CSV.
    Evolve {
        /// Append the damping classification as a trailing comment.
        #[arg(long)]
        classify: bool,
        /// Use the residue closed forms (parametric model only).
        #[arg(long)]
        closed_form: bool,
    },
    /// Reference relaxation plots (CSV + SVG).
    Figures {
        #[arg(value_enum)]
        which: Vec<FigureSelect>,
    },
    /// Compare a finite discretised bath against the continuum prediction.
    OracleCompare {
        #[arg(long)]
        n_modes: Option<usize>,
        #[arg(long)]
        omega_max: Option<f64>,
        /// Largest tolerated relative deviation.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Memory kernel κ(t) and its Markov rate.
    Kernel {
        /// For Ohmic baths, evaluate κ by quadrature instead of the closed form.
        #[arg(long)]
        numeric: bool,
        /// Spectral function table with header `omega,J`; replaces the
        /// configured model.
        #[arg(long, value_name = "CSV")]
        j_table: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureSelect {
    #[value(name = "2a")]
    F2a,
    #[value(name = "2b")]
    F2b,
    #[value(name = "3a")]
    F3a,
    #[value(name = "3b")]
    F3b,
    #[value(name = "4")]
    F4,
    All,
}

impl FigureSelect {
    pub fn expand(selection: &[FigureSelect]) -> Vec<FigureId> {
        let mut ids = Vec::new();
        let sel = if selection.is_empty() { &[FigureSelect::All][..] } else { selection };
        for s in sel {
            let add: &[FigureId] = match s {
                FigureSelect::F2a => &[FigureId::WeakCutoffReal],
                FigureSelect::F2b => &[FigureId::WeakCutoffComplex],
                FigureSelect::F3a => &[FigureId::StrongCutoffReal],
                FigureSelect::F3b => &[FigureId::StrongCutoffComplex],
                FigureSelect::F4 => &[FigureId::ClassicalComparison],
                FigureSelect::All => &FigureId::ALL,
            };
            for id in add {
                if !ids.contains(id) {
                    ids.push(*id);
                }
            }
        }
        ids
    }
}

impl Cli {
    /// Load the configuration file (if any) and apply flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let o = &self.overrides;
        if let Some(v) = o.m {
            cfg.oscillator.m = v;
        }
        if let Some(v) = o.omega0_big {
            cfg.oscillator.omega0_big = Some(v);
        }
        if let Some(v) = o.omega0 {
            cfg.oscillator.omega0 = Some(v);
        }
        if let Some(b) = &o.beta {
            let beta = Beta::parse(b)?;
            if !(beta.value() > 0.0) {
                return Err(CliError::Config(format!("beta must be positive, got {b}")));
            }
            cfg.temperature.beta = beta;
        }
        if let Some(v) = o.t_start {
            cfg.time.start = v;
        }
        if let Some(v) = o.t_stop {
            cfg.time.stop = v;
        }
        if let Some(v) = o.points {
            cfg.time.points = v;
        }
        if let Some(v) = o.spacing {
            cfg.time.spacing = v;
        }
        if let Some(v) = o.x0 {
            cfg.initial.x0 = v;
        }
        if let Some(v) = o.p0 {
            cfg.initial.p0 = v;
        }
        if let Some(v) = o.rel_tol {
            cfg.quadrature.rel_tol = v;
        }
        if let Some(v) = o.abs_tol {
            cfg.quadrature.abs_tol = v;
        }
        if let Some(v) = &o.output {
            cfg.output.path = Some(v.clone());
        }
        if let Command::OracleCompare { n_modes, omega_max, bound } = &self.command {
            if let Some(n) = n_modes {
                cfg.oracle.n_modes = *n;
            }
            if omega_max.is_some() {
                cfg.oracle.omega_max = *omega_max;
            }
            if let Some(b) = bound {
                cfg.oracle.bound = *b;
            }
        }
        if !(cfg.temperature.beta.value() > 0.0) {
            return Err(CliError::Config("temperature.beta must be positive".into()));
        }
        Ok(cfg)
    }
}
