//! Scenario runners. Each writes its tables into the run directory and
//! returns a JSON results object for `summary.json`.

use noonsim::{
    calibrate_b, coherence_sums, fidelity_vs_ramp, fringe_sweep, ground_state_with,
    hold_mean_fidelity, interaction_strength, make_mixture, make_noon, noon_fidelity,
    parity_fourier, physical, ramp_run, verify_decomposition_with, FockVector, ImaginaryTimeConfig,
    MixedEnsemble, RampConfig, State, Table, TrapSpec,
};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InputKind, Scenario};
use crate::failure::Failure;
use crate::output::{tag, RunDir};

pub struct Report {
    pub results: Value,
    pub notes: Vec<String>,
}

pub fn execute(config: &ExperimentConfig, out: &mut RunDir) -> Result<Report, Failure> {
    match config.scenario {
        Scenario::GroundState => ground_states(config, out),
        Scenario::Ramp => ramps(config, out),
        Scenario::RamseySweep => ramsey_sweeps(config, out, false),
        Scenario::CoherenceAnalysis => ramsey_sweeps(config, out, true),
        Scenario::EstimateU => estimate_u(config, out),
    }
}

fn ramp_config(config: &ExperimentConfig, samples: usize) -> RampConfig {
    RampConfig {
        samples,
        integrator: config.integrator,
        convention: config.system.convention,
        ground_state: ImaginaryTimeConfig {
            tolerance: config.ground_state.tolerance,
            ..ImaginaryTimeConfig::default()
        },
    }
}

fn state_table(state: &FockVector) -> Table {
    let mut t = Table::new(["n", "probability", "amplitude_re", "amplitude_im"]);
    for (n, c) in state.amplitudes().iter().enumerate() {
        t.push(vec![n as f64, c.norm_sqr(), c.re, c.im]);
    }
    t
}

fn ground_states(config: &ExperimentConfig, out: &mut RunDir) -> Result<Report, Failure> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let it = ImaginaryTimeConfig {
        tolerance: config.ground_state.tolerance,
        ..ImaginaryTimeConfig::default()
    };
    let mut summary = Table::new([
        "atoms",
        "u_over_kappa",
        "energy",
        "mean_left",
        "diff_variance",
        "noon_fidelity",
    ]);
    for &n in &config.system.atoms {
        for &ratio in &config.ground_state.u_over_kappa {
            let params = config.system.params(ratio * config.system.kappa);
            let g = ground_state_with(&params, n, &it)?;
            let variance = noonsim::diff_variance(&g.state);
            let mean_left = noonsim::mean_left(&g.state);
            let fidelity = noon_fidelity(&g.state).0;
            out.write_table(
                &format!("ground_N{n}_U{}", tag(ratio)),
                &state_table(&g.state),
            )?;
            summary.push(vec![
                n as f64, ratio, g.energy, mean_left, variance, fidelity,
            ]);
            rows.push(json!({
                "atoms": n, "u_over_kappa": ratio, "energy": g.energy, "iterations": g.iterations,
                "mean_left": mean_left, "diff_variance": variance, "noon_fidelity": fidelity,
            }));
            if ratio == 0.0 && config.system.e_left == config.system.e_right {
                notes.push(format!(
                    "N={n}, U=0: the non-interacting ground state is binomial with variance exactly N = {n} \
                     (computed {variance:.6}); the reference value 12 quoted for the FIG1 preset \
                     (N = 20, U = 0) disagrees with this analytic result."
                ));
            }
        }
    }
    out.write_table("ground_summary", &summary)?;
    Ok(Report {
        results: json!({ "ground_states": rows }),
        notes,
    })
}

fn ramps(config: &ExperimentConfig, out: &mut RunDir) -> Result<Report, Failure> {
    let r = &config.ramp;
    let kappa = config.system.kappa;
    let mut trajectories = Vec::new();
    let mut sweeps = Vec::new();
    for &n in &config.system.atoms {
        for &t in &r.ramp_times {
            let traj = ramp_run(
                n,
                kappa,
                r.u_start,
                r.u_end,
                t,
                &ramp_config(config, r.samples),
            )?;
            let name = format!("ramp_N{n}_T{}", tag(t));
            out.write_table(&format!("{name}_summary"), &traj.summary_table())?;
            out.write_table(&format!("{name}_distribution"), &traj.distribution_table())?;
            let (fidelity, phase) = noon_fidelity(traj.final_state());
            trajectories.push(json!({
                "atoms": n, "ramp_time": t,
                "final_diff_variance": noonsim::diff_variance(traj.final_state()),
                "final_noon_fidelity": fidelity, "noon_phase": phase,
                "max_norm_drift": traj.max_norm_drift,
                "rhs_evaluations": traj.stats.evaluations,
            }));
        }
        if !r.fidelity_times.is_empty() {
            let rc = ramp_config(config, 2);
            let sweep = fidelity_vs_ramp(n, kappa, r.u_start, r.u_end, &r.fidelity_times, &rc)?;
            let held = config.system.params(r.u_end);
            let mut table = Table::new([
                "ramp_time",
                "fidelity",
                "noon_phase",
                "final_variance",
                "hold_mean_fidelity",
                "reference_fidelity",
            ]);
            for p in &sweep.points {
                let final_state = ramp_run(n, kappa, r.u_start, r.u_end, p.ramp_time, &rc)?;
                let hold = hold_mean_fidelity(final_state.final_state(), &held, r.hold_time, 401)?;
                table.push(vec![
                    p.ramp_time,
                    p.fidelity,
                    p.noon_phase,
                    p.final_variance,
                    hold,
                    sweep.reference_fidelity,
                ]);
            }
            out.write_table(&format!("fidelity_N{n}"), &table)?;
            let fidelities: Vec<f64> = sweep.points.iter().map(|p| p.fidelity).collect();
            sweeps.push(json!({
                "atoms": n,
                "points": sweep.points,
                "reference_fidelity": sweep.reference_fidelity,
                "non_decreasing": fidelities.windows(2).all(|w| w[1] >= w[0]),
                "hold_mean_fidelity": table.column("hold_mean_fidelity"),
            }));
        }
    }
    Ok(Report {
        results: json!({ "trajectories": trajectories, "fidelity_sweeps": sweeps }),
        notes: Vec::new(),
    })
}

fn input_state(config: &ExperimentConfig, n: usize) -> Result<(State, Value), Failure> {
    let input = &config.input;
    let (state, info): (State, Value) = match input.kind {
        InputKind::Noon => (
            make_noon(n, input.phi)?.into(),
            json!({ "kind": "noon", "phi": input.phi }),
        ),
        InputKind::Mixture => (make_mixture(n)?.into(), json!({ "kind": "mixture" })),
        InputKind::GroundState => {
            let it = ImaginaryTimeConfig {
                tolerance: config.ground_state.tolerance,
                ..ImaginaryTimeConfig::default()
            };
            let g = ground_state_with(&config.system.params(config.system.u), n, &it)?;
            (
                g.state.into(),
                json!({ "kind": "ground_state", "u": config.system.u }),
            )
        }
        InputKind::Ramp => {
            let r = &config.ramp;
            let traj = ramp_run(
                n,
                config.system.kappa,
                r.u_start,
                r.u_end,
                input.ramp_time,
                &ramp_config(config, 2),
            )?;
            let s = traj.final_state().clone();
            let info = json!({
                "kind": "ramp", "u_start": r.u_start, "u_end": r.u_end, "ramp_time": input.ramp_time,
                "diff_variance": noonsim::diff_variance(&s), "noon_fidelity": noon_fidelity(&s).0,
                "max_norm_drift": traj.max_norm_drift,
            });
            (s.into(), info)
        }
    };
    if !input.dephase {
        return Ok((state, info));
    }
    Ok((
        dephased(&state)?.into(),
        json!({ "dephased": true, "source": info }),
    ))
}

/// Diagonal mixture of number states with the populations of `state`.
fn dephased(state: &State) -> Result<MixedEnsemble, Failure> {
    let n = noonsim::QuantumState::total_atoms(state);
    let p = noonsim::observables::number_distribution(state);
    let comps = p
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .map(|(k, w)| Ok((w, FockVector::number_state(n, k)?)))
        .collect::<Result<Vec<_>, noonsim::Error>>()?;
    let total: f64 = comps.iter().map(|c| c.0).sum();
    Ok(MixedEnsemble::new(
        comps.into_iter().map(|(w, s)| (w / total, s)).collect(),
    )?)
}

fn ramsey_sweeps(
    config: &ExperimentConfig,
    out: &mut RunDir,
    spectral: bool,
) -> Result<Report, Failure> {
    let rs = &config.ramsey;
    let grid = rs.grid();
    let mut runs = Vec::new();
    let mut notes = Vec::new();
    for &n in &config.system.atoms {
        let (state, info) = input_state(config, n)?;
        let reference_spectrum = if spectral {
            Some(dephased(&state)?)
        } else {
            None
        };
        for &u in &rs.u_interference {
            let rc = rs.config(u, config.system.convention);
            let fringe = fringe_sweep(&state, &grid, &rc, rs.max_moment)?;
            let name = format!("N{n}_U{}", tag(u));
            out.write_table(
                &format!("fringe_{name}"),
                &fringe.to_table(rs.distributions),
            )?;
            let parity = fringe.parity();
            let mut entry = json!({
                "atoms": n, "u_interference": u, "kappa_bs": rs.kappa_bs, "input": info,
                "grid_points": grid.len(),
                "parity_min": parity.iter().copied().fold(f64::INFINITY, f64::min),
                "parity_max": parity.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
            if spectral {
                let spectrum = parity_fourier(&fringe)?.with_coherence(&state)?;
                out.write_table(&format!("spectrum_{name}"), &spectrum.to_table())?;
                let dephased_state = reference_spectrum.as_ref().expect("set when spectral");
                let dephased_fringe = fringe_sweep(dephased_state, &grid, &rc, 1)?;
                let dephased_amp = parity_fourier(&dephased_fringe)?.amplitude(n).norm();
                let floor = spectrum.noise_floor();
                entry["frequency_n_amplitude"] = json!(spectrum.amplitude(n).norm());
                entry["frequency_n_power_fraction"] = json!(spectrum.power_fraction(n));
                entry["noise_floor"] = json!(floor);
                entry["dephased_frequency_n_amplitude"] = json!(dephased_amp);
                entry["coherence_n"] =
                    json!([coherence_sums(&state)[n].re, coherence_sums(&state)[n].im]);
                entry["detected_frequencies"] = json!((1..=n)
                    .filter(|&m| spectrum.amplitude(m).norm() > 10.0 * floor)
                    .collect::<Vec<_>>());
                if config.coherence.verify && u == 0.0 {
                    let b = calibrate_b(n, &rc)?;
                    let report = verify_decomposition_with(&state, &b, &rc, &grid)?;
                    entry["decomposition"] = json!(report);
                } else if u != 0.0 {
                    notes.push(format!(
                        "N={n}, U={u}: decomposition check skipped; with a nonlinear interference stage \
                         high-frequency components do not certify NOON-type coherence."
                    ));
                }
            }
            runs.push(entry);
        }
    }
    if config
        .preset
        .is_some_and(|p| matches!(p, crate::config::Preset::Fig7 | crate::config::Preset::Fig8))
    {
        notes.push(format!(
            "Interference-stage tunneling rate assumed equal to the generation-stage value: kappa_bs = {} s^-1.",
            rs.kappa_bs
        ));
    }
    Ok(Report {
        results: json!({ "fringes": runs }),
        notes,
    })
}

fn estimate_u(config: &ExperimentConfig, out: &mut RunDir) -> Result<Report, Failure> {
    let p = &config.physical;
    let mut table = Table::new(["scattering_length_a0", "scattering_length_m", "u"]);
    let mut rows = Vec::new();
    let mut widths = None;
    for &a0 in &p.scattering_length_a0 {
        let spec = TrapSpec::from_lab_units(p.mass_amu, p.omega, p.omega_units, a0)?;
        let u = interaction_strength(&spec)?;
        widths = Some(noonsim::gaussian_widths(&spec)?);
        table.push(vec![a0, spec.scattering_length, u]);
        rows.push(json!({ "scattering_length_a0": a0, "u": u }));
    }
    out.write_table("interaction_strength", &table)?;
    let (sx, sy, sz) = widths.expect("at least one scattering length");
    Ok(Report {
        results: json!({
            "estimates": rows,
            "gaussian_widths_m": [sx, sy, sz],
            "mass_kg": p.mass_amu * physical::ATOMIC_MASS_UNIT,
        }),
        notes: vec![match p.omega_units {
            noonsim::FrequencyUnits::Angular => {
                "Trap frequencies read as angular frequencies (rad/s).".into()
            }
            noonsim::FrequencyUnits::Hertz => {
                "Trap frequencies read in Hz and multiplied by 2 pi.".into()
            }
        }],
    })
}
