use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use darkstate::lambda::{
    bloch_trajectory, compensate, dark_bright, verify_dark, BlochSample, ComplexField, RabiPair,
};
use darkstate::ladder::{
    band_sweep, build_ladder_b, edge_onset, numeric_edge_states, phase_scan, EdgeReport,
    LadderParams, Leg, ScanPoint,
};
use darkstate::manybody::{verify_cdw_with_tol, CdwReport};
use darkstate::numkit::eig_general;
use darkstate::C64;
use serde::Serialize;

use crate::config::{Format, InitialState, RunConfig};
use crate::output::{fmt_f64, to_json, Sink, Table};

pub struct RunContext {
    pub cfg: RunConfig,
    pub format: Format,
    pub sink: Sink,
    pub seed: u64,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    tolerances: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<LadderParams>,
    result: T,
}

impl RunContext {
    fn envelope<'a, T: Serialize>(
        &self,
        command: &'a str,
        tolerances: &[(&'static str, f64)],
        params: Option<LadderParams>,
        result: T,
    ) -> Envelope<'a, T> {
        Envelope {
            command,
            seed: self.seed,
            tolerances: tolerances.iter().copied().collect(),
            params,
            result,
        }
    }

    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.sink.emit(&format!("{name}.json"), &to_json(value)?)
    }

    fn emit_table(&self, name: &str, table: &Table) -> Result<()> {
        self.sink.emit(&format!("{name}.csv"), &table.to_csv())
    }
}

fn rabi_pair(cfg: &RunConfig) -> Result<RabiPair> {
    let l = &cfg.lambda;
    match (l.theta, l.omega1, l.omega2) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            bail!("give either theta or the Rabi pair omega1/omega2, not both")
        }
        (Some(theta), None, None) => Ok(RabiPair::from_theta(theta)?),
        (None, Some(o1), Some(o2)) => Ok(RabiPair::new(o1, o2)?),
        (None, None, None) => Ok(RabiPair::from_theta(std::f64::consts::FRAC_PI_2)?),
        _ => bail!("omega1 and omega2 must be given together"),
    }
}

fn check_vec(name: &str, v: [f64; 3]) -> Result<[f64; 3]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        bail!("{name} must be finite, got {v:?}")
    }
}

#[derive(Serialize)]
struct CompensateRecord {
    theta: f64,
    #[serde(rename = "B_R")]
    b_r: [f64; 3],
    #[serde(rename = "B_I")]
    b_i: [f64; 3],
    /// `[re, im]`.
    #[serde(rename = "lambda_D")]
    lambda_d: C64,
    residual: f64,
}

pub fn cmd_compensate(ctx: &RunContext) -> Result<()> {
    let rabi = rabi_pair(&ctx.cfg)?;
    let theta = rabi.theta();
    let b_r = check_vec("B_R", ctx.cfg.lambda.b_r.unwrap_or([0.0; 3]))?;
    let b_i = compensate(b_r, theta);
    let check = verify_dark(&rabi, &ComplexField { b_r, b_i })?;
    let record = CompensateRecord {
        theta,
        b_r,
        b_i,
        lambda_d: check.lambda_d,
        residual: check.residual,
    };
    ctx.emit_json("compensate", &record)
}

#[derive(Serialize)]
struct EvolveResult {
    field: ComplexField,
    psi0: InitialState,
    samples: Vec<BlochSample>,
}

pub fn cmd_lambda_evolve(ctx: &RunContext) -> Result<()> {
    let l = &ctx.cfg.lambda;
    let rabi = rabi_pair(&ctx.cfg)?;
    let theta = rabi.theta();
    let b_r = check_vec("B_R", l.b_r.unwrap_or([0.0, 1.0, 0.0]))?;
    let b_i = match (l.b_i, l.compensate.unwrap_or(true)) {
        (Some(b), _) => check_vec("B_I", b)?,
        (None, true) => compensate(b_r, theta),
        (None, false) => [0.0; 3],
    };
    let field = ComplexField { b_r, b_i };
    let t_max = l.t_max.unwrap_or(20.0);
    let steps = l.steps.unwrap_or(400);
    if !(t_max >= 0.0) || !t_max.is_finite() || steps == 0 {
        bail!("need a finite t_max >= 0 and steps >= 1 (got {t_max}, {steps})");
    }
    let (_, d, b) = dark_bright(&rabi)?;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let kind = l.psi0.unwrap_or(InitialState::Dark);
    let psi0 = match kind {
        InitialState::Dark => [d[0], d[1], zero],
        InitialState::Bright => [b[0], b[1], zero],
        InitialState::Up => [one, zero, zero],
        InitialState::Down => [zero, one, zero],
    };
    let grid: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
    let samples = bloch_trajectory(&rabi, &field, &psi0, &grid)?;
    match ctx.format {
        Format::Csv => {
            let mut t = Table::new(&["t", "sx", "sy", "sz", "dark_fidelity"]);
            for s in &samples {
                t.push(vec![
                    fmt_f64(s.t),
                    fmt_f64(s.bloch[0]),
                    fmt_f64(s.bloch[1]),
                    fmt_f64(s.bloch[2]),
                    fmt_f64(s.dark_fidelity),
                ]);
            }
            ctx.emit_table("lambda_evolve", &t)
        }
        Format::Json => ctx.emit_json(
            "lambda_evolve",
            &ctx.envelope("lambda-evolve", &[], None, EvolveResult { field, psi0: kind, samples }),
        ),
    }
}

#[derive(Serialize)]
struct SpectrumResult {
    eigenvalues: Vec<C64>,
    residuals: Vec<f64>,
    defective: bool,
    max_abs_imag: f64,
}

pub fn cmd_spectrum(ctx: &RunContext) -> Result<()> {
    let p = ctx.cfg.ladder_params()?;
    let tol = ctx.cfg.eig_tol();
    let spec = eig_general(&build_ladder_b(&p)?, tol)?;
    match ctx.format {
        Format::Csv => {
            let mut t = Table::new(&["index", "re_E", "im_E"]);
            for (i, z) in spec.eigenvalues.iter().enumerate() {
                t.push(vec![i.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
            }
            ctx.emit_table("spectrum", &t)
        }
        Format::Json => {
            let result = SpectrumResult {
                max_abs_imag: spec.max_abs_imag(),
                defective: spec.is_defective(),
                eigenvalues: spec.eigenvalues,
                residuals: spec.residuals,
            };
            ctx.emit_json("spectrum", &ctx.envelope("spectrum", &[("eig", tol)], Some(p), result))
        }
    }
}

pub fn cmd_bands(ctx: &RunContext) -> Result<()> {
    let p = ctx.cfg.ladder_params()?;
    let n_k = ctx.cfg.bands.n_k.unwrap_or(201);
    let sweep = band_sweep(&p, n_k)?;
    match ctx.format {
        Format::Csv => {
            let mut t = Table::new(&["k", "band", "re_E", "im_E"]);
            for (k, b) in sweep.k_grid.iter().zip(&sweep.bands) {
                for (j, z) in b.iter().enumerate() {
                    t.push(vec![fmt_f64(*k), j.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
                }
            }
            ctx.emit_table("bands", &t)
        }
        Format::Json => ctx.emit_json("bands", &ctx.envelope("bands", &[], Some(p), sweep)),
    }
}

#[derive(Serialize)]
struct EdgeSummary {
    energies: Vec<C64>,
    sides: Vec<String>,
    support_sizes: Vec<usize>,
    kappas: Vec<Option<f64>>,
    fitted_kappa: Option<f64>,
    fitted_sigma: Option<f64>,
    predicted_sigma: Option<f64>,
    files: Vec<String>,
}

fn edge_table(p: &LadderParams, v: &[C64]) -> Table {
    let mut t = Table::new(&["n", "leg", "re_psi", "im_psi", "abs2"]);
    for n in 0..p.length {
        for leg in [Leg::Up, Leg::Down] {
            let z = v[p.mode(n, leg)];
            t.push(vec![
                n.to_string(),
                leg.name().to_string(),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(z.norm_sqr()),
            ]);
        }
    }
    t
}

pub fn cmd_edges(ctx: &RunContext) -> Result<()> {
    let p = ctx.cfg.ladder_params()?;
    let window = ctx.cfg.edge_window();
    let rep: EdgeReport = numeric_edge_states(&p, window)?;
    let tolerances = [("edge_window", window), ("support_weight", 1e-10)];
    match ctx.format {
        Format::Json => ctx.emit_json("edges", &ctx.envelope("edges", &tolerances, Some(p), rep)),
        Format::Csv => {
            let mut files = Vec::new();
            if ctx.sink.dir().is_some() {
                for (i, s) in rep.states.iter().enumerate() {
                    let name = format!("edges_state_{i}");
                    ctx.emit_table(&name, &edge_table(&p, &s.vector))?;
                    files.push(format!("{name}.csv"));
                }
            }
            let summary = EdgeSummary {
                energies: rep.states.iter().map(|s| s.energy).collect(),
                sides: rep
                    .states
                    .iter()
                    .map(|s| format!("{:?}", s.side).to_lowercase())
                    .collect(),
                support_sizes: rep.states.iter().map(|s| s.support_size).collect(),
                kappas: rep.states.iter().map(|s| s.kappa).collect(),
                fitted_kappa: rep.fitted_kappa,
                fitted_sigma: rep.fitted_sigma,
                predicted_sigma: rep.predicted_sigma,
                files,
            };
            ctx.emit_json("edges", &ctx.envelope("edges", &tolerances, Some(p), summary))
        }
    }
}

#[derive(Serialize)]
struct ScanResult {
    points: Vec<ScanPoint>,
    /// Γ at which zero modes switch on, per Ω_y.
    onsets: Vec<(f64, Option<f64>)>,
}

pub fn cmd_scan(ctx: &RunContext) -> Result<()> {
    let p = ctx.cfg.ladder_params()?;
    let s = &ctx.cfg.scan;
    let start = s.gamma_start.unwrap_or(0.0);
    let stop = s.gamma_stop.unwrap_or(1.0);
    let step = s.gamma_step.unwrap_or(0.01);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        bail!("invalid Γ grid: start {start}, stop {stop}, step {step}");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let gammas: Vec<f64> = (0..=n).map(|i| start + step * i as f64).collect();
    let omega_y = s.omega_y.clone().unwrap_or_else(|| vec![p.omega_y]);
    if omega_y.is_empty() {
        bail!("scan needs at least one Ω_y value");
    }
    let tol = ctx.cfg.scan_edge_tol();
    let points = phase_scan(p.t, p.omega_x, p.length, &gammas, &omega_y, tol)?;
    match ctx.format {
        Format::Csv => {
            let mut t = Table::new(&["gamma", "omega_y", "n_edge", "max_im"]);
            for q in &points {
                t.push(vec![
                    fmt_f64(q.gamma),
                    fmt_f64(q.omega_y),
                    q.n_edge_states.to_string(),
                    fmt_f64(q.max_bulk_im),
                ]);
            }
            ctx.emit_table("scan", &t)
        }
        Format::Json => {
            let onsets = omega_y
                .iter()
                .zip(points.chunks(gammas.len()))
                .map(|(oy, line)| (*oy, edge_onset(line)))
                .collect();
            ctx.emit_json(
                "scan",
                &ctx.envelope("scan", &[("zero_mode", tol)], Some(p), ScanResult { points, onsets }),
            )
        }
    }
}

pub fn cmd_manybody(ctx: &RunContext) -> Result<()> {
    let p = ctx.cfg.ladder_params()?;
    let u = ctx.cfg.manybody.u.unwrap_or(0.05);
    let tol = ctx.cfg.degeneracy_tol();
    let report: CdwReport = verify_cdw_with_tol(&p, u, tol).context("CDW verification")?;
    ctx.emit_json(
        "manybody",
        &ctx.envelope("manybody", &[("degeneracy", tol)], Some(p), report),
    )
}
